//! Large box where the geometric condition fails: the energy is not
//! monotone and grows until the blowup detector stops the run.
//!
//! cargo run --release --example instability

use ksbox::diagnostics::is_monotone;
use ksbox::experiments::InitialShape;
use ksbox::{damping_margin, simulate, DomainSpec, SolverConfig};

fn main() -> ksbox::Result<()> {
    let d = DomainSpec::new(vec![30.0, 30.0])?;
    let m = damping_margin(&d);
    println!("a = {:.4}, theta = {:.3}", m.a, m.theta);
    let u0 = InitialShape::random().gradient_data(&d, &[64, 64], 1.0, 1)?;
    let cfg = SolverConfig {
        dt: 0.02,
        t_end: 50.0,
        record_every: 25,
        ..SolverConfig::default()
    };
    let run = simulate(u0, &cfg)?;
    for r in &run.records {
        println!("t = {:6.2}  E = {:.4e}", r.t, r.energy());
    }
    println!(
        "status {:?}, monotone {}",
        run.status,
        is_monotone(&run.records)
    );
    Ok(())
}
