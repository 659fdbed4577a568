use std::f64::consts::PI;

use ksbox::diagnostics::{bound_violation, is_monotone};
use ksbox::experiments::InitialShape;
use ksbox::{
    decay_fit, dissipation_ledger, gradient_initial_data, simulate, twin_run_divergence,
    DomainSpec, RunStatus, Scheme, SolverConfig, SpectralField, State,
};

fn linear(dt: f64, t_end: f64) -> SolverConfig {
    SolverConfig {
        nonlinear: false,
        record_every: 1,
        ..SolverConfig::new(dt, t_end)
    }
}

#[test]
fn linear_mode_follows_its_symbol() {
    // k=(2,1) on (0,3)x(0,2): μ = (2π/3)² + (π/2)², growth μ - μ²
    let d = DomainSpec::new(vec![3.0, 2.0]).unwrap();
    let phi = SpectralField::single_mode(d, &[4, 4], &[2, 1], 0.7).unwrap();
    let mu = (2.0 * PI / 3.0).powi(2) + (PI / 2.0).powi(2);
    let out = simulate(State::Scalar(phi), &linear(0.05, 0.5)).unwrap();
    let c = out.final_state.fields()[0].mode(&[2, 1]).unwrap();
    let expect = 0.7 * ((mu - mu * mu) * 0.5).exp();
    assert!((c / expect - 1.0).abs() < 1e-12);
}

#[test]
fn unstable_mode_grows_at_its_rate() {
    let d = DomainSpec::new(vec![10.0]).unwrap();
    let phi = SpectralField::single_mode(d, &[8], &[2], 1e-3).unwrap();
    let mu = (2.0 * PI / 10.0f64).powi(2);
    let out = simulate(State::Scalar(phi), &linear(0.1, 2.0)).unwrap();
    let c = out.final_state.fields()[0].mode(&[2]).unwrap();
    assert!(mu - mu * mu > 0.0);
    assert!((c / (1e-3 * ((mu - mu * mu) * 2.0).exp()) - 1.0).abs() < 1e-12);
}

#[test]
fn fitted_rate_of_single_gradient_mode() {
    // u = ∇ sin x sin y on (0,π)²: every component decays like e^{-2t}, so
    // the Δ-energy decays at rate 4
    let d = DomainSpec::cube(2, PI).unwrap();
    let phi = SpectralField::single_mode(d, &[4, 4], &[1, 1], 1.0).unwrap();
    let u = gradient_initial_data(&phi).unwrap();
    let out = simulate(u, &linear(0.01, 1.0)).unwrap();
    let fit = decay_fit(&out.records, 4.0).unwrap();
    assert!((fit.fitted_rate - 4.0).abs() < 1e-9, "{}", fit.fitted_rate);
    assert!(fit.monotone);
    assert!((fit.bound_violation - 1.0).abs() < 1e-9);
}

#[test]
fn huge_steps_stay_bounded() {
    let d = DomainSpec::new(vec![2.0, 2.0]).unwrap();
    let u = InitialShape::random()
        .gradient_data(&d, &[12, 12], 0.1, 3)
        .unwrap();
    let out = simulate(u, &SolverConfig::new(10.0, 100.0)).unwrap();
    assert_ne!(out.status, RunStatus::Blowup);
    assert!(out.records.iter().all(|r| r.energy().is_finite()));
}

#[test]
fn zero_data_stay_zero() {
    let d = DomainSpec::new(vec![2.0, 2.0]).unwrap();
    let u = InitialShape::random()
        .gradient_data(&d, &[8, 8], 0.0, 1)
        .unwrap();
    let out = simulate(u, &SolverConfig::new(1e-2, 0.5)).unwrap();
    assert_eq!(out.status, RunStatus::Completed);
    assert!(out.records.iter().all(|r| r.energy() == 0.0));
}

#[test]
fn gradient_system_tracks_scalar_equation() {
    let d = DomainSpec::new(vec![2.0, 1.5]).unwrap();
    let shape = InitialShape::random();
    let phi = shape.potential(&d, &[12, 10], 5).unwrap();
    let phi = phi.scaled(0.3 * shape.unit_scale(&phi).unwrap());
    let cfg = SolverConfig::new(1e-3, 0.2);
    let scalar = simulate(State::Scalar(phi.clone()), &cfg).unwrap();
    let system = simulate(gradient_initial_data(&phi).unwrap(), &cfg).unwrap();
    let phi_t = &scalar.final_state.fields()[0];
    for (j, uj) in system.final_state.fields().iter().enumerate() {
        let expect = phi_t.derivative(j).unwrap();
        let rel = (uj.distance_sq(&expect).unwrap() / expect.norms().l2).sqrt();
        assert!(rel < 1e-10, "component {j}: {rel}");
    }
}

#[test]
fn schemes_agree_at_small_steps() {
    let d = DomainSpec::new(vec![2.0, 2.0]).unwrap();
    let u = InitialShape::random()
        .gradient_data(&d, &[12, 12], 0.5, 8)
        .unwrap();
    let finals: Vec<_> = [
        Scheme::Etdrk4,
        Scheme::CoxMatthews,
        Scheme::HochbruckOstermann,
        Scheme::Etd1,
    ]
    .iter()
    .map(|s| {
        let cfg = SolverConfig {
            scheme: *s,
            ..SolverConfig::new(2e-4, 0.1)
        };
        simulate(u.clone(), &cfg).unwrap().final_state
    })
    .collect();
    let norm = finals[0].fields().iter().map(|f| f.norms().l2).sum::<f64>();
    for (k, tol) in [(1, 1e-10), (2, 1e-10), (3, 1e-3)] {
        let diff: f64 = finals[0]
            .fields()
            .iter()
            .zip(finals[k].fields())
            .map(|(a, b)| a.distance_sq(b).unwrap())
            .sum();
        assert!(
            (diff / norm).sqrt() < tol,
            "scheme {k}: {}",
            (diff / norm).sqrt()
        );
    }
}

#[test]
fn record_times_and_blowup_detection() {
    let d = DomainSpec::new(vec![2.0, 2.0]).unwrap();
    let u = InitialShape::random()
        .gradient_data(&d, &[8, 8], 0.1, 2)
        .unwrap();
    let cfg = SolverConfig {
        record_every: 4,
        ..SolverConfig::new(0.03, 0.5)
    };
    let out = simulate(u, &cfg).unwrap();
    let t: Vec<f64> = out.records.iter().map(|r| r.t).collect();
    assert_eq!(t.first(), Some(&0.0));
    assert_eq!(t.last(), Some(&0.5));
    assert!((t[1] - 0.12).abs() < 1e-12);

    // a domain far outside the damped regime with large data
    let d = DomainSpec::new(vec![30.0, 30.0]).unwrap();
    let u = InitialShape::random()
        .gradient_data(&d, &[32, 32], 1.0, 1)
        .unwrap();
    let cfg = SolverConfig {
        dt: 0.02,
        t_end: 20.0,
        record_every: 10,
        ..SolverConfig::default()
    };
    let out = simulate(u, &cfg).unwrap();
    assert!(!is_monotone(&out.records));
    if out.status == RunStatus::Blowup {
        let e0 = out.records[0].energy();
        assert!(out.records.last().unwrap().energy() > cfg.blowup_factor * e0);
    }
}

#[test]
fn dissipation_ledger_of_linear_mode() {
    // c(t) = c0 e^{st}: E = W μ² c², ∫ ||Δ²u||² = W μ⁴ c0² (1 - e^{2sT}) / (-2s)
    let d = DomainSpec::cube(1, 2.0).unwrap();
    let phi = SpectralField::single_mode(d, &[6], &[1], 1.0).unwrap();
    let out = simulate(State::Scalar(phi), &linear(1e-4, 0.5)).unwrap();
    let mu = (PI / 2.0).powi(2);
    let s = mu - mu * mu;
    let w = 1.0;
    let e0 = w * mu * mu;
    let ledger = dissipation_ledger(&out.records, e0).unwrap();
    let diss = w * mu.powi(4) * (1.0 - (2.0 * s * 0.5).exp()) / (-2.0 * s);
    assert!((ledger.dissipation / diss - 1.0).abs() < 1e-7);
    assert!((ledger.final_energy / (e0 * (2.0 * s * 0.5).exp()) - 1.0).abs() < 1e-12);
    assert!((ledger.constant - (ledger.final_energy + diss) / e0).abs() < 1e-6);
    assert!((bound_violation(&out.records, -2.0 * s) - 1.0).abs() < 1e-9);
}

#[test]
fn twin_runs_from_identical_data_coincide() {
    let d = DomainSpec::new(vec![2.0, 2.0]).unwrap();
    let u = InitialShape::random()
        .gradient_data(&d, &[10, 10], 0.2, 4)
        .unwrap();
    let cfg = SolverConfig {
        record_every: 2,
        ..SolverConfig::new(2e-3, 0.2)
    };
    let twin = twin_run_divergence(&u, &u, &cfg, 0.07).unwrap();
    assert!(twin.difference.iter().all(|d| *d == 0.0));
    assert!(twin.within_envelope());
    let v = u.scaled(1.0 + 1e-6);
    let twin = twin_run_divergence(&u, &v, &cfg, 0.07).unwrap();
    assert!(twin.within_envelope());
    assert!(twin.difference[0] > 0.0);
    assert!(twin_run_divergence(&u, &v, &cfg, 0.0).is_err());
}
