//! Geometric and smallness conditions for a few boxes.
//!
//! cargo run --example check_conditions

use ksbox::experiments::InitialShape;
use ksbox::geometry::max_initial_energy;
use ksbox::{damping_margin, smallness_check, DomainSpec, ExponentMode};

fn main() -> ksbox::Result<()> {
    let cs = 0.07;
    for lengths in [
        vec![1.0, 1.0],
        vec![2.0, 2.0],
        vec![2.0, 2.0, 2.0],
        vec![3.0, 5.0],
        vec![30.0, 30.0],
    ] {
        let d = DomainSpec::new(lengths.clone())?;
        let r = damping_margin(&d);
        print!("L = {lengths:?}: a = {:.5}, theta = {:+.5}", r.a, r.theta);
        if !r.geometric_ok {
            println!(", geometric condition fails");
            continue;
        }
        let e_star = max_initial_energy(&d, cs, ExponentMode::DimensionNCubed)?;
        let u0 = InitialShape::lowest_mode(d.n()).gradient_data(&d, &vec![8; d.n()], 0.1, 0)?;
        let s = smallness_check(&d, u0.total_lap_energy(), cs, ExponentMode::DimensionNCubed)?;
        println!(
            ", rate = {:.4}, E* = {e_star:.4e}, lowest mode amp 0.1: margin {:+.4e}",
            r.decay_rate,
            s.smallness_margin.unwrap()
        );
    }
    Ok(())
}
