//! Energy bookkeeping, decay-rate fits, the dissipation ledger and the
//! twin-run stability check.

pub mod csv;

use serde::{Deserialize, Serialize};

use crate::dynamics::{simulate_observed, GradientState, RunStatus, SolverConfig, State};
use crate::error::{KsError, Result};
use crate::geometry::damping_margin;
use crate::spectral::{Norms, SpectralField};

/// Records with total Δ-energy at or below this are left out of rate fits.
pub const FIT_FLOOR: f64 = 1e-28;

/// Exact spectral energies of every component at one time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub t: f64,
    pub fields: Vec<Norms>,
    pub totals: Norms,
}

impl EnergyRecord {
    pub fn from_fields(t: f64, fields: &[SpectralField]) -> Self {
        let norms: Vec<Norms> = fields.iter().map(SpectralField::norms).collect();
        let totals = norms.iter().fold(Norms::default(), |acc, n| acc.add(n));
        Self {
            t,
            fields: norms,
            totals,
        }
    }

    /// Total Δ-energy `sum_j ||Δu_j||²`.
    pub fn energy(&self) -> f64 {
        self.totals.lap
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    /// Least-squares decay rate of the total Δ-energy.
    pub fitted_rate: f64,
    /// `a² θ / 2`.
    pub predicted_rate: f64,
    /// `max_t E(t) / (E(0) exp(-predicted_rate t))`.
    pub bound_violation: f64,
    /// Totals never increase between consecutive records.
    pub monotone: bool,
    pub eligible_records: usize,
}

/// `max_t E(t) / (E(0) e^{-rate t})`; zero for zero initial energy.
pub fn bound_violation(records: &[EnergyRecord], rate: f64) -> f64 {
    let Some(first) = records.first() else {
        return 0.0;
    };
    let e0 = first.energy();
    if e0 <= 0.0 {
        return 0.0;
    }
    records
        .iter()
        .map(|r| r.energy() / (e0 * (-rate * (r.t - first.t)).exp()))
        .fold(0.0, f64::max)
}

pub fn is_monotone(records: &[EnergyRecord]) -> bool {
    records.windows(2).all(|w| w[1].energy() <= w[0].energy())
}

/// Fits `log E(t)` by least squares over records above [`FIT_FLOOR`].
pub fn decay_fit(records: &[EnergyRecord], predicted_rate: f64) -> Result<DecayReport> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.energy() > FIT_FLOOR)
        .map(|r| (r.t, r.energy().ln()))
        .collect();
    if pts.len() < 3 {
        return Err(KsError::TooFewRecords {
            needed: 3,
            have: pts.len(),
        });
    }
    let m = pts.len() as f64;
    let tbar = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let ybar = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|(t, y)| (t - tbar) * (y - ybar)).sum();
    let sxx: f64 = pts.iter().map(|(t, _)| (t - tbar) * (t - tbar)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    Ok(DecayReport {
        fitted_rate: -slope,
        predicted_rate,
        bound_violation: bound_violation(records, predicted_rate),
        monotone: is_monotone(records),
        eligible_records: pts.len(),
    })
}

/// Left-hand side of the energy–dissipation inequality and the empirical
/// constant it implies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DissipationLedger {
    pub final_energy: f64,
    /// Trapezoidal `∫_0^t sum_i ||Δ²u_i||² dτ` over the record times.
    pub dissipation: f64,
    pub lhs: f64,
    /// `lhs / initial_energy`, zero for zero data.
    pub constant: f64,
}

pub fn dissipation_ledger(
    records: &[EnergyRecord],
    initial_energy: f64,
) -> Result<DissipationLedger> {
    let last = records
        .last()
        .ok_or(KsError::TooFewRecords { needed: 1, have: 0 })?;
    let dissipation = trapezoid(records.iter().map(|r| (r.t, r.totals.bilap)));
    let lhs = last.energy() + dissipation;
    let constant = if initial_energy > 0.0 {
        lhs / initial_energy
    } else {
        0.0
    };
    Ok(DissipationLedger {
        final_energy: last.energy(),
        dissipation,
        lhs,
        constant,
    })
}

fn trapezoid(points: impl Iterator<Item = (f64, f64)>) -> f64 {
    let mut acc = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for (t, v) in points {
        if let Some((t0, v0)) = prev {
            acc += 0.5 * (t - t0) * (v + v0);
        }
        prev = Some((t, v));
    }
    acc
}

/// Difference of two trajectories against its Gronwall envelope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwinRun {
    pub times: Vec<f64>,
    /// `sum_j ||u_j - v_j||²` at each record.
    pub difference: Vec<f64>,
    /// `difference[0] * exp(∫ C sum_i (||Δ²u_i||² + ||Δ²v_i||²) dτ)`.
    pub envelope: Vec<f64>,
    /// `C = 8 n cs² / θ`.
    pub rate_constant: f64,
    pub status_u: RunStatus,
    pub status_v: RunStatus,
}

impl TwinRun {
    pub fn within_envelope(&self) -> bool {
        self.difference
            .iter()
            .zip(&self.envelope)
            .all(|(d, e)| *d <= *e * (1.0 + 1e-12))
    }
}

/// Runs both trajectories and compares their L² distance with the envelope
/// obtained from the difference system. The constant follows from choosing
/// `ε = θ/2` in the Young split and summing the `n` component inequalities.
pub fn twin_run_divergence(
    u0: &GradientState,
    v0: &GradientState,
    config: &SolverConfig,
    cs: f64,
) -> Result<TwinRun> {
    if u0.domain() != v0.domain() || u0.resolution() != v0.resolution() {
        return Err(KsError::Incompatible(
            "twin runs need the same domain and resolution".into(),
        ));
    }
    if !(cs > 0.0) {
        return Err(KsError::InvalidParameter(format!(
            "cs must be positive, got {cs}"
        )));
    }
    let theta = damping_margin(u0.domain()).theta;
    if theta <= 0.0 {
        return Err(KsError::GeometricConditionFails { theta });
    }
    let n = u0.domain().n() as f64;
    let rate_constant = 8.0 * n * cs * cs / theta;

    let trajectory = |init: &GradientState| -> Result<(Vec<(f64, GradientState, f64)>, RunStatus)> {
        let mut states = Vec::new();
        let run = simulate_observed(init.clone(), config, |s, r| {
            if let State::Gradient(g) = s {
                states.push((r.t, g.clone(), r.totals.bilap));
            }
        })?;
        Ok((states, run.status))
    };
    let (ru, rv) = rayon::join(|| trajectory(u0), || trajectory(v0));
    let (su, status_u) = ru?;
    let (sv, status_v) = rv?;

    let len = su.len().min(sv.len());
    let mut times = Vec::with_capacity(len);
    let mut difference = Vec::with_capacity(len);
    let mut envelope = Vec::with_capacity(len);
    let mut integral = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for ((t, u, bu), (_, v, bv)) in su.iter().zip(&sv).take(len) {
        let w = u.difference(v)?;
        let d: f64 = w.fields().iter().map(|f| f.norms().l2).sum();
        let rate = bu + bv;
        if let Some((t0, r0)) = prev {
            integral += 0.5 * (t - t0) * (rate + r0);
        }
        prev = Some((*t, rate));
        if difference.is_empty() {
            envelope.push(d);
        } else {
            envelope.push(difference[0] * (rate_constant * integral).exp());
        }
        times.push(*t);
        difference.push(d);
    }
    Ok(TwinRun {
        times,
        difference,
        envelope,
        rate_constant,
        status_u,
        status_v,
    })
}
