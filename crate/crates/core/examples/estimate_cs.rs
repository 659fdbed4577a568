//! Monte Carlo estimate of the embedding constant in
//! `sup|f| <= cs ||Δ²f||` and its convergence with the number of trials.
//!
//! cargo run --release --example estimate_cs

use ksbox::verify::estimate_embedding_constant;
use ksbox::DomainSpec;

fn main() -> ksbox::Result<()> {
    let d = DomainSpec::new(vec![2.0, 2.0])?;
    for n in [8, 16, 32] {
        let est = estimate_embedding_constant(&d, &[n, n], 400, 1)?;
        let at = |k: usize| est.running_max[k - 1];
        println!(
            "N = {n:>2}: cs_hat after 50/100/400 trials = {:.5} / {:.5} / {:.5}, recommended {:.5}",
            at(50),
            at(100),
            at(400),
            est.recommended()
        );
    }
    Ok(())
}
