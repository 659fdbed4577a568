//! Scalar ODE checks: the nonlinear comparison lemma and the differential
//! Gronwall inequality, both integrated with fixed-step RK4.

use serde::{Deserialize, Serialize};

use super::quad::GaussLegendre;

fn rk4(f: impl Fn(f64, f64) -> f64, t: f64, y: f64, h: f64) -> f64 {
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
    let k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
    let k4 = f(t + h, y + h * k3);
    y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeLemmaOutcome {
    /// False when `alpha - k f0^n <= 0`, `k <= 0` or `f0 <= 0`.
    pub applicable: bool,
    pub max_f: f64,
    pub f_final: f64,
    pub pass: bool,
}

/// Integrates the equality case `f' = -(alpha - k f^n) f` from `f(0) = f0`
/// and checks `f(t) < f(0)` for every step in `(0, t_end]`.
pub fn ode_lemma_check(alpha: f64, k: f64, n_exp: u32, f0: f64, t_end: f64) -> OdeLemmaOutcome {
    let admissible = k > 0.0 && f0 > 0.0 && alpha - k * f0.powi(n_exp as i32) > 0.0 && t_end > 0.0;
    if !admissible {
        return OdeLemmaOutcome {
            applicable: false,
            max_f: f64::NAN,
            f_final: f64::NAN,
            pass: false,
        };
    }
    let dt = (1e-3f64).min(t_end / 1e4);
    let steps = (t_end / dt).ceil() as usize;
    let h = t_end / steps as f64;
    let rhs = |_t: f64, f: f64| -(alpha - k * f.powi(n_exp as i32)) * f;
    let mut f = f0;
    let mut max_f = f64::NEG_INFINITY;
    for s in 0..steps {
        f = rk4(rhs, s as f64 * h, f, h);
        max_f = max_f.max(f);
    }
    OdeLemmaOutcome {
        applicable: true,
        max_f,
        f_final: f,
        pass: max_f < f0,
    }
}

/// Piecewise-linear function through `(t, value)` knots, held constant
/// outside the knot range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    knots: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn new(mut knots: Vec<(f64, f64)>) -> Self {
        assert!(!knots.is_empty());
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self { knots }
    }

    pub fn constant(v: f64) -> Self {
        Self {
            knots: vec![(0.0, v)],
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let k = &self.knots;
        if t <= k[0].0 {
            return k[0].1;
        }
        let last = k[k.len() - 1];
        if t >= last.0 {
            return last.1;
        }
        let i = k.partition_point(|p| p.0 <= t) - 1;
        let (t0, v0) = k[i];
        let (t1, v1) = k[i + 1];
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    pub fn knot_times(&self) -> impl Iterator<Item = f64> + '_ {
        self.knots.iter().map(|p| p.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GronwallOutcome {
    pub u_final: f64,
    pub bound_final: f64,
    /// `max |u - bound| / |bound|` over checkpoints.
    pub max_rel_deviation: f64,
    /// `min (bound - u) / |bound|` over checkpoints.
    pub min_slack: f64,
    pub checkpoints: usize,
    pub pass: bool,
}

/// Integrates the equality case `u' = a u + b` by RK4 and evaluates the
/// bound `u0 e^{A(t)} + ∫_0^t e^{A(t) - A(s)} b(s) ds`, `A(t) = ∫_0^t a`, by
/// exact integration of `a` and Gauss–Legendre quadrature. Passes when
/// `u <= bound (1 + 1e-8)` at every checkpoint.
pub fn gronwall_check(
    a: &PiecewiseLinear,
    b: &PiecewiseLinear,
    u0: f64,
    t_end: f64,
) -> GronwallOutcome {
    let mut breaks: Vec<f64> = a
        .knot_times()
        .chain(b.knot_times())
        .filter(|t| *t > 0.0 && *t < t_end)
        .collect();
    breaks.push(t_end);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let gl = GaussLegendre::new(16);
    let max_h = t_end / 2000.0;
    let rhs = |t: f64, u: f64| a.eval(t) * u + b.eval(t);

    let mut t = 0.0;
    let mut u = u0;
    let mut big_a = 0.0; // A(t)
    let mut j = 0.0; // ∫_0^t e^{-A(s)} b(s) ds
    let mut worst_dev: f64 = 0.0;
    let mut min_slack = f64::INFINITY;
    let mut checkpoints = 0;
    let mut bound = u0;
    for &t_next in &breaks {
        let sub = ((t_next - t) / max_h).ceil().max(1.0) as usize;
        let h = (t_next - t) / sub as f64;
        for _ in 0..sub {
            let t0 = t;
            let a0 = big_a;
            let slope = (a.eval(t0 + h) - a.eval(t0)) / h;
            let a_at = |s: f64| a0 + a.eval(t0) * (s - t0) + 0.5 * slope * (s - t0) * (s - t0);
            j += gl
                .mapped(t0, t0 + h)
                .map(|(s, w)| w * (-a_at(s)).exp() * b.eval(s))
                .sum::<f64>();
            big_a = a_at(t0 + h);
            u = rk4(rhs, t0, u, h);
            t = t0 + h;
            bound = big_a.exp() * (u0 + j);
            let scale = bound.abs().max(f64::MIN_POSITIVE);
            worst_dev = worst_dev.max((u - bound).abs() / scale);
            min_slack = min_slack.min((bound - u) / scale);
            checkpoints += 1;
        }
        t = t_next;
    }
    GronwallOutcome {
        u_final: u,
        bound_final: bound,
        max_rel_deviation: worst_dev,
        min_slack,
        checkpoints,
        pass: min_slack >= -1e-8,
    }
}
