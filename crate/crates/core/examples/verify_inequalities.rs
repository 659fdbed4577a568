//! Functional inequalities, the ODE comparison lemma and the Gronwall
//! bound on random samples.
//!
//! cargo run --release --example verify_inequalities

use ksbox::verify::{run_suite, SuiteConfig};
use ksbox::DomainSpec;

fn main() -> ksbox::Result<()> {
    for lengths in [vec![2.0, 2.0], vec![2.0, 2.0, 2.0], vec![2.0, 5.0]] {
        let d = DomainSpec::new(lengths.clone())?;
        let report = run_suite(&d, &SuiteConfig::new(d.n(), 1))?;
        println!("L = {lengths:?}");
        print!("{}", report.to_text());
    }
    Ok(())
}
