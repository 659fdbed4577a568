//! Two runs whose potentials differ by 1e-8 in one mode, against the
//! Gronwall envelope of their difference.
//!
//! cargo run --release --example twin_run

use ksbox::experiments::InitialShape;
use ksbox::{gradient_initial_data, twin_run_divergence, DomainSpec, SolverConfig};

fn main() -> ksbox::Result<()> {
    let d = DomainSpec::new(vec![2.0, 2.0])?;
    let shape = InitialShape::random();
    let phi = shape.potential(&d, &[24, 24], 5)?;
    let phi = phi.scaled(0.1 * shape.unit_scale(&phi)?);
    let mut bumped = phi.clone();
    bumped.set_mode(&[2, 1], phi.mode(&[2, 1])? + 1e-8)?;
    let cfg = SolverConfig {
        record_every: 1,
        ..SolverConfig::new(1e-3, 1.0)
    };
    let twin = twin_run_divergence(
        &gradient_initial_data(&phi)?,
        &gradient_initial_data(&bumped)?,
        &cfg,
        0.07,
    )?;
    println!("rate constant {:.4e}", twin.rate_constant);
    for i in (0..twin.times.len()).step_by(100) {
        println!(
            "t = {:.2}  |w|^2 = {:.4e}  envelope = {:.4e}",
            twin.times[i], twin.difference[i], twin.envelope[i]
        );
    }
    println!("within envelope: {}", twin.within_envelope());
    Ok(())
}
