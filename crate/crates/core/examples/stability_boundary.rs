//! Bisection for the largest amplitude that still decays, compared with
//! the amplitude allowed by the smallness condition.
//!
//! cargo run --release --example stability_boundary

use ksbox::experiments::{stability_boundary, BoundarySpec, Classification, InitialShape};
use ksbox::{DomainSpec, ExponentMode, SolverConfig};

fn main() -> ksbox::Result<()> {
    let spec = BoundarySpec {
        domain: DomainSpec::new(vec![2.0, 2.0])?,
        resolution: vec![16, 16],
        shape: InitialShape::random(),
        seed: 1,
        amp_lo: 0.1,
        amp_hi: 100.0,
        tol: 0.25,
        solver: SolverConfig {
            record_every: 5,
            ..SolverConfig::new(1e-3, 1.0)
        },
        cs: 0.07,
        exponent_mode: ExponentMode::DimensionNCubed,
        classification: Classification::default(),
    };
    let r = stability_boundary(&spec)?;
    println!(
        "empirical amp* in [{:.3}, {:.3}] after {} bisections",
        r.bracket.lo, r.bracket.hi, r.bracket.iterations
    );
    println!(
        "theory amp* = {:.4} (unit-amplitude E0 = {:.4})",
        r.amp_star_theory.unwrap(),
        r.unit_energy
    );
    Ok(())
}
