//! The scalar equation for φ and the gradient system for u = ∇φ give the
//! same trajectory; the curl of u stays at round-off.
//!
//! cargo run --release --example scalar_potential

use ksbox::dump::write_dump;
use ksbox::dynamics::curl_residual;
use ksbox::experiments::InitialShape;
use ksbox::{gradient_initial_data, simulate, DomainSpec, SolverConfig, State};

fn main() -> ksbox::Result<()> {
    let d = DomainSpec::new(vec![2.0, 1.5])?;
    let shape = InitialShape::random();
    let phi = shape.potential(&d, &[16, 12], 3)?;
    let phi = phi.scaled(0.5 * shape.unit_scale(&phi)?);
    let cfg = SolverConfig::new(1e-3, 0.5);
    let scalar = simulate(State::Scalar(phi.clone()), &cfg)?;
    let system = simulate(gradient_initial_data(&phi)?, &cfg)?;
    let phi_t = &scalar.final_state.fields()[0];
    for (j, u) in system.final_state.fields().iter().enumerate() {
        let diff = u.distance_sq(&phi_t.derivative(j)?)?.sqrt();
        println!("|u{} - d{}phi| = {diff:.3e}", j + 1, j + 1);
    }
    println!(
        "curl residual {:.3e}",
        curl_residual(system.final_state.as_gradient().unwrap())
    );
    let mut head = Vec::new();
    write_dump(&mut head, phi_t)?;
    let text = String::from_utf8_lossy(&head);
    println!("dump of phi(T), first lines:");
    for line in text.lines().take(3) {
        println!("  {line}");
    }
    Ok(())
}
