//! Damped run on (0,2)² from data just inside the smallness threshold,
//! with the decay fit and the dissipation ledger.
//!
//! cargo run --release --example simulate_decay

use ksbox::experiments::InitialShape;
use ksbox::geometry::max_initial_energy;
use ksbox::verify::estimate_embedding_constant;
use ksbox::{
    damping_margin, decay_fit, dissipation_ledger, simulate, DomainSpec, ExponentMode, SolverConfig,
};

fn main() -> ksbox::Result<()> {
    let d = DomainSpec::new(vec![2.0, 2.0])?;
    let res = [32, 32];
    let cs = estimate_embedding_constant(&d, &res, 200, 1)?.recommended();
    let e_star = max_initial_energy(&d, cs, ExponentMode::DimensionNCubed)?;
    let unit = InitialShape::random().gradient_data(&d, &res, 1.0, 1)?;
    let u0 = unit.scaled((0.9 * e_star / unit.total_lap_energy()).sqrt());
    let e0 = u0.total_lap_energy();

    let cfg = SolverConfig {
        record_every: 1,
        ..SolverConfig::new(1e-3, 1.0)
    };
    let run = simulate(u0, &cfg)?;
    let m = damping_margin(&d);
    let fit = decay_fit(&run.records, m.decay_rate)?;
    let ledger = dissipation_ledger(&run.records, e0)?;

    println!("cs = {cs:.5}, E* = {e_star:.4}, E0 = {e0:.4}");
    for r in run.records.iter().step_by(100) {
        let bound = e0 * (-m.decay_rate * r.t).exp();
        println!(
            "t = {:.2}  E = {:.6e}  bound = {:.6e}",
            r.t,
            r.energy(),
            bound
        );
    }
    println!(
        "fitted rate {:.4} vs predicted {:.4}, bound violation {:.6}, monotone {}",
        fit.fitted_rate, fit.predicted_rate, fit.bound_violation, fit.monotone
    );
    println!(
        "ledger: E(T) + dissipation = {:.4e}, C = {:.4} (2/theta + 1 = {:.4})",
        ledger.lhs,
        ledger.constant,
        2.0 / m.theta + 1.0
    );
    Ok(())
}
