//! Acceptance suite. Runs as a plain binary so the verdict lines are always
//! printed; exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use ksbox::diagnostics::is_monotone;
use ksbox::dynamics::{curl_residual, simulate_observed};
use ksbox::experiments::{stability_boundary, BoundarySpec, Classification, InitialShape};
use ksbox::geometry::max_initial_energy;
use ksbox::verify::{
    chain_slacks, estimate_embedding_constant, run_suite, steklov_slacks, SuiteConfig,
};
use ksbox::{
    damping_margin, decay_fit, dissipation_ledger, gradient_initial_data, simulate,
    twin_run_divergence, DomainSpec, ExponentMode, GradientState, RunStatus, Scheme, SolverConfig,
    SpectralField, State,
};

type Outcome = (bool, String);

struct Verdict {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn run(id: usize, name: &'static str, limit: Duration, body: impl FnOnce() -> Outcome) -> Verdict {
    let start = Instant::now();
    let (ok, detail) = body();
    let took = start.elapsed();
    let in_time = took <= limit;
    let v = Verdict {
        id,
        name,
        pass: ok && in_time,
        detail: format!(
            "{detail}; runtime {:.2}s (limit {}s)",
            took.as_secs_f64(),
            limit.as_secs()
        ),
    };
    println!(
        "{} #{:<2} {:<26} {}",
        if v.pass { "PASS" } else { "FAIL" },
        v.id,
        v.name,
        v.detail
    );
    v
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn box2() -> DomainSpec {
    DomainSpec::new(vec![2.0, 2.0]).unwrap()
}

/// Working embedding constant on `(0,2)²`, shared by the decay criteria.
fn working_cs() -> f64 {
    estimate_embedding_constant(&box2(), &[32, 32], 200, 1)
        .unwrap()
        .recommended()
}

fn linear_exactness() -> Outcome {
    let d = DomainSpec::cube(2, std::f64::consts::PI).unwrap();
    let phi = SpectralField::single_mode(d, &[4, 4], &[1, 1], 1.0).unwrap();
    let expect = (-2.0f64).exp();
    let mut worst: f64 = 0.0;
    for dt in [0.1, 0.01] {
        let cfg = SolverConfig {
            nonlinear: false,
            ..SolverConfig::new(dt, 1.0)
        };
        let out = simulate(State::Scalar(phi.clone()), &cfg).unwrap();
        let c = out.final_state.fields()[0].mode(&[1, 1]).unwrap();
        worst = worst.max(((c - expect) / expect).abs());
    }
    (
        worst <= 1e-10,
        format!("max relative error {worst:.2e} (tol 1e-10)"),
    )
}

/// States at `t = 0.1 k`, k = 0..=5.
fn snapshots(u0: &GradientState, dt: f64) -> Vec<Vec<SpectralField>> {
    let cfg = SolverConfig {
        scheme: Scheme::Etdrk4,
        record_every: (0.1 / dt).round() as usize,
        ..SolverConfig::new(dt, 0.5)
    };
    let mut out = Vec::new();
    simulate_observed(u0.clone(), &cfg, |s, _| out.push(s.fields().to_vec())).unwrap();
    out
}

fn max_distance(a: &[Vec<SpectralField>], b: &[Vec<SpectralField>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            x.iter()
                .zip(y)
                .map(|(f, g)| f.distance_sq(g).unwrap())
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
}

fn etd_order() -> Outcome {
    let d = box2();
    let raw = InitialShape::random()
        .gradient_data(&d, &[32, 32], 0.1, 1)
        .unwrap();
    // a short fine pre-run removes the initial layer of unprepared data
    let prep = simulate(
        raw,
        &SolverConfig {
            record_every: 1000,
            ..SolverConfig::new(1e-5, 0.01)
        },
    )
    .unwrap();
    let u0 = prep.final_state.as_gradient().unwrap().clone();
    let reference = snapshots(&u0, 1e-4);
    let e1 = max_distance(&snapshots(&u0, 1e-2), &reference);
    let e2 = max_distance(&snapshots(&u0, 5e-3), &reference);
    let ratio = e1 / e2;
    (
        (10.0..=22.0).contains(&ratio),
        format!("err(1e-2) {e1:.3e}, err(5e-3) {e2:.3e}, ratio {ratio:.2} (need [10, 22])"),
    )
}

fn decay_and_ledger(cs: f64) -> (Outcome, Outcome) {
    let d = box2();
    let m = damping_margin(&d);
    let e_star = max_initial_energy(&d, cs, ExponentMode::DimensionNCubed).unwrap();
    let unit = InitialShape::random()
        .gradient_data(&d, &[32, 32], 1.0, 1)
        .unwrap();
    let u0 = unit.scaled((0.9 * e_star / unit.total_lap_energy()).sqrt());
    let e0 = u0.total_lap_energy();
    let cfg = SolverConfig {
        record_every: 1,
        ..SolverConfig::new(1e-3, 1.0)
    };
    let out = simulate(u0, &cfg).unwrap();
    let fit = decay_fit(&out.records, m.decay_rate).unwrap();
    let decay = (
        out.status == RunStatus::Completed && fit.bound_violation <= 1.01 && fit.monotone,
        format!(
            "a {:.4}, theta {:.4}, rate {:.4}, E0 {e0:.4e} = 0.9 E*, bound_violation {:.6} (tol 1.01), monotone {}, fitted {:.3}",
            m.a, m.theta, m.decay_rate, fit.bound_violation, fit.monotone, fit.fitted_rate
        ),
    );
    let ledger = dissipation_ledger(&out.records, e0).unwrap();
    let cap = 2.0 / m.theta + 1.0;
    let diss = (
        ledger.lhs.is_finite() && ledger.constant <= cap,
        format!(
            "E(T) + dissipation {:.4e}, C {:.4} (cap 2/theta+1 = {cap:.4})",
            ledger.lhs, ledger.constant
        ),
    );
    (decay, diss)
}

fn inequality_suite() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (n, seed) in [(2usize, 2u64), (3, 3)] {
        let d = DomainSpec::cube(n, 2.0).unwrap();
        let mut cfg = SuiteConfig::new(n, seed);
        cfg.ode_samples = 0;
        cfg.gronwall_samples = 0;
        let report = run_suite(&d, &cfg).unwrap();
        for e in report.entries.iter().filter(|e| e.samples > 0) {
            ok &= e.pass == Some(true) && e.min_slack >= -1e-10;
            parts.push(format!("n={n} {} {:+.2e}", e.id, e.min_slack));
        }
        let cube = DomainSpec::cube(n, std::f64::consts::PI).unwrap();
        let lowest = SpectralField::single_mode(cube, &vec![4; n], &vec![1; n], 1.0).unwrap();
        let eq = steklov_slacks(&lowest)
            .into_iter()
            .chain(chain_slacks(&lowest))
            .fold(0.0f64, |m, s| m.max(s.abs()));
        ok &= eq <= 1e-12;
        parts.push(format!("n={n} equality |slack| {eq:.1e}"));
    }
    (ok, parts.join(", "))
}

/// One suite entry, with the other families cut down to a single sample.
fn suite_entry(id: &str, ode_samples: usize, gronwall_samples: usize) -> Outcome {
    let mut cfg = SuiteConfig::new(2, 6);
    cfg.samples = 1;
    cfg.ode_samples = ode_samples;
    cfg.gronwall_samples = gronwall_samples;
    let report = run_suite(&box2(), &cfg).unwrap();
    let e = report.entries.iter().find(|e| e.id == id).unwrap();
    (
        e.pass == Some(true),
        format!(
            "{} cases, min slack {:.3e}, {}",
            e.samples, e.min_slack, e.detail
        ),
    )
}

fn curl_preservation() -> Outcome {
    let d = box2();
    let phi = InitialShape::random().potential(&d, &[32, 32], 4).unwrap();
    let phi = phi.scaled(0.1 / phi.coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs())));
    let u0 = gradient_initial_data(&phi).unwrap();
    let mut worst: f64 = 0.0;
    let mut records = 0;
    let cfg = SolverConfig {
        record_every: 10,
        ..SolverConfig::new(1e-3, 1.0)
    };
    simulate_observed(u0, &cfg, |s, _| {
        worst = worst.max(curl_residual(s.as_gradient().unwrap()));
        records += 1;
    })
    .unwrap();
    (
        worst <= 1e-7,
        format!("{records} records, max curl residual {worst:.2e} (tol 1e-7)"),
    )
}

fn twin_runs(cs: f64) -> Outcome {
    let d = box2();
    let phi = InitialShape::random().potential(&d, &[32, 32], 5).unwrap();
    let phi = phi.scaled(0.1 / phi.coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs())));
    let mut bumped = phi.clone();
    bumped
        .set_mode(&[2, 1], phi.mode(&[2, 1]).unwrap() + 1e-8)
        .unwrap();
    let u0 = gradient_initial_data(&phi).unwrap();
    let v0 = gradient_initial_data(&bumped).unwrap();
    let cfg = SolverConfig {
        record_every: 1,
        ..SolverConfig::new(1e-3, 1.0)
    };
    let twin = twin_run_divergence(&u0, &v0, &cfg, cs).unwrap();
    let same = twin_run_divergence(&u0, &u0, &cfg, cs).unwrap();
    let zero = same.difference.iter().all(|d| *d == 0.0);
    let margin = twin
        .difference
        .iter()
        .zip(&twin.envelope)
        .map(|(d, e)| d / e)
        .fold(0.0f64, f64::max);
    (
        twin.within_envelope() && zero,
        format!(
            "{} records, max diff/envelope {margin:.4}, final diff {:.3e}, identical data exactly zero {zero}",
            twin.times.len(),
            twin.difference.last().unwrap()
        ),
    )
}

fn sufficiency(cs: f64) -> Outcome {
    let spec = BoundarySpec {
        domain: box2(),
        resolution: vec![16, 16],
        shape: InitialShape::random(),
        seed: 1,
        amp_lo: 0.1,
        amp_hi: 100.0,
        tol: 0.5,
        solver: SolverConfig {
            record_every: 5,
            ..SolverConfig::new(1e-3, 1.0)
        },
        cs,
        exponent_mode: ExponentMode::DimensionNCubed,
        classification: Classification::default(),
    };
    match stability_boundary(&spec) {
        Ok(r) => {
            let theory = r.amp_star_theory.unwrap_or(f64::INFINITY);
            (
                r.amp_star_empirical >= theory,
                format!(
                    "amp* empirical {:.3} (bracket [{:.3}, {:.3}]) >= theory {theory:.4}",
                    r.amp_star_empirical, r.bracket.lo, r.bracket.hi
                ),
            )
        }
        Err(e) => (false, format!("bisection failed: {e}")),
    }
}

fn instability() -> Outcome {
    let d = DomainSpec::new(vec![30.0, 30.0]).unwrap();
    let m = damping_margin(&d);
    let u0 = InitialShape::random()
        .gradient_data(&d, &[64, 64], 1.0, 1)
        .unwrap();
    let cfg = SolverConfig {
        dt: 0.02,
        t_end: 50.0,
        record_every: 10,
        ..SolverConfig::default()
    };
    let out = simulate(u0, &cfg).unwrap();
    let monotone = is_monotone(&out.records);
    let first = out.records.first().unwrap();
    let last = out.records.last().unwrap();
    (
        !m.geometric_ok && !monotone,
        format!(
            "a {:.4}, theta {:.3}, {} records, E {:.3e} -> {:.3e} at t {:.2}, status {:?}, monotone {monotone}",
            m.a,
            m.theta,
            out.records.len(),
            first.energy(),
            last.energy(),
            last.t,
            out.status
        ),
    )
}

fn main() {
    let cs = working_cs();
    println!("working embedding constant cs = {cs:.5}");
    let mut verdicts = vec![run(1, "linear exactness", secs(1), linear_exactness)];
    verdicts.push(run(2, "etdrk4 order", secs(60), etd_order));
    let mut diss = None;
    verdicts.push(run(3, "decay bound", secs(60), || {
        let (decay, ledger) = decay_and_ledger(cs);
        diss = Some(ledger);
        decay
    }));
    verdicts.push(run(4, "dissipation ledger", secs(60), || {
        let (ok, detail) = diss.take().unwrap();
        (ok, format!("{detail}; same run as #3"))
    }));
    verdicts.push(run(5, "inequality suite", secs(60), inequality_suite));
    verdicts.push(run(6, "ode comparison lemma", secs(10), || {
        suite_entry("ode_comparison", 100, 0)
    }));
    verdicts.push(run(7, "gronwall", secs(10), || {
        suite_entry("gronwall", 0, 50)
    }));
    verdicts.push(run(8, "curl preservation", secs(60), curl_preservation));
    verdicts.push(run(9, "twin-run stability", secs(120), || twin_runs(cs)));
    verdicts.push(run(10, "sufficiency direction", secs(600), || {
        sufficiency(cs)
    }));
    verdicts.push(run(11, "instability regime", secs(300), instability));

    let failed: Vec<_> = verdicts.iter().filter(|v| !v.pass).map(|v| v.id).collect();
    println!(
        "acceptance: {}/{} criteria passed",
        verdicts.len() - failed.len(),
        verdicts.len()
    );
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
