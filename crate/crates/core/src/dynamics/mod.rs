//! Time evolution of the scalar KS equation
//! `φ_t + Δ²φ + Δφ + ½|∇φ|² = 0` and of its gradient system
//! `(u_j)_t + Δ²u_j + Δu_j + ½ sum_i (u_i²)_{x_j} = 0`, `u_j = φ_{x_j}`.

pub mod etd;
pub mod nonlinear;

use ndarray::ArrayD;
use serde::{Deserialize, Serialize};

use crate::diagnostics::EnergyRecord;
use crate::error::{KsError, Result};
use crate::geometry::DomainSpec;
use crate::spectral::{mu_tensor, Parity, SpectralField};

pub use etd::Scheme;
pub use nonlinear::{nonlinear_rhs_scalar, nonlinear_rhs_system, Padding};

use etd::{etd_step, EtdCoefficients};

/// Curl residual below which a state built from raw components is flagged
/// as gradient consistent.
pub const CURL_TOLERANCE: f64 = 1e-8;

/// Total Δ-energy below which a run stops as decayed.
pub const DECAY_FLOOR: f64 = 1e-30;

/// The components `(u_1, ..., u_n)` of the gradient system.
///
/// Component `u_j` is expanded in cosines along axis `j` and sines along the
/// other axes, which is the exact image of the sine basis under `∂_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientState {
    fields: Vec<SpectralField>,
    gradient_consistent: bool,
}

impl GradientState {
    /// Basis families of component `j` in dimension `n`.
    pub fn component_parity(n: usize, j: usize) -> Vec<Parity> {
        (0..n)
            .map(|i| if i == j { Parity::Cosine } else { Parity::Sine })
            .collect()
    }

    /// Builds a state from raw coefficient tensors, one per component.
    pub fn from_coefficients(domain: DomainSpec, coeffs: Vec<ArrayD<f64>>) -> Result<Self> {
        let n = domain.n();
        if coeffs.len() != n {
            return Err(KsError::InvalidParameter(format!(
                "expected {n} components, got {}",
                coeffs.len()
            )));
        }
        let fields = coeffs
            .into_iter()
            .enumerate()
            .map(|(j, c)| {
                SpectralField::with_parity(domain.clone(), Self::component_parity(n, j), c)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(fields)
    }

    /// Validates shared domain and resolution and the component families,
    /// then flags the state as gradient consistent when its curl residual is
    /// at most [`CURL_TOLERANCE`].
    pub fn new(fields: Vec<SpectralField>) -> Result<Self> {
        let first = fields
            .first()
            .ok_or_else(|| KsError::InvalidParameter("empty gradient state".into()))?;
        let n = first.domain().n();
        if fields.len() != n {
            return Err(KsError::InvalidParameter(format!(
                "expected {n} components, got {}",
                fields.len()
            )));
        }
        for (j, f) in fields.iter().enumerate() {
            if f.domain() != first.domain() {
                return Err(KsError::Incompatible(
                    "components live on different domains".into(),
                ));
            }
            if f.resolution() != first.resolution() {
                return Err(KsError::ShapeMismatch {
                    expected: first.resolution().to_vec(),
                    found: f.resolution().to_vec(),
                });
            }
            if f.parity() != Self::component_parity(n, j).as_slice() {
                return Err(KsError::InvalidParameter(format!(
                    "component {} must be cosine along its own axis and sine elsewhere",
                    j + 1
                )));
            }
        }
        let mut state = Self {
            fields,
            gradient_consistent: false,
        };
        state.gradient_consistent = curl_residual(&state) <= CURL_TOLERANCE;
        Ok(state)
    }

    pub(crate) fn from_raw(
        domain: &DomainSpec,
        coeffs: Vec<ArrayD<f64>>,
        gradient_consistent: bool,
    ) -> Self {
        let n = domain.n();
        let fields = coeffs
            .into_iter()
            .enumerate()
            .map(|(j, c)| {
                SpectralField::from_parts_unchecked(domain.clone(), Self::component_parity(n, j), c)
            })
            .collect();
        Self {
            fields,
            gradient_consistent,
        }
    }

    pub fn fields(&self) -> &[SpectralField] {
        &self.fields
    }

    pub fn field(&self, j: usize) -> &SpectralField {
        &self.fields[j]
    }

    pub fn domain(&self) -> &DomainSpec {
        self.fields[0].domain()
    }

    pub fn resolution(&self) -> &[usize] {
        self.fields[0].resolution()
    }

    pub fn gradient_consistent(&self) -> bool {
        self.gradient_consistent
    }

    pub fn scaled(&self, factor: f64) -> GradientState {
        GradientState {
            fields: self.fields.iter().map(|f| f.scaled(factor)).collect(),
            gradient_consistent: self.gradient_consistent,
        }
    }

    /// Componentwise difference `self - other`.
    pub fn difference(&self, other: &GradientState) -> Result<GradientState> {
        let fields = self
            .fields
            .iter()
            .zip(&other.fields)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(GradientState {
            fields,
            gradient_consistent: self.gradient_consistent && other.gradient_consistent,
        })
    }

    /// `sum_j ||Δu_j||²`.
    pub fn total_lap_energy(&self) -> f64 {
        self.fields.iter().map(|f| f.norms().lap).sum()
    }
}

/// `u_j = ∂_j φ0`, exactly.
pub fn gradient_initial_data(phi0: &SpectralField) -> Result<GradientState> {
    if !phi0.is_all_sine() {
        return Err(KsError::InvalidParameter(
            "the scalar potential must be expanded in the sine basis".into(),
        ));
    }
    let fields = (0..phi0.domain().n())
        .map(|j| phi0.derivative(j))
        .collect::<Result<Vec<_>>>()?;
    Ok(GradientState {
        fields,
        gradient_consistent: true,
    })
}

/// `max_{i != j} ||(u_i)_{x_j} - (u_j)_{x_i}|| / max(1, max_j ||∇u_j||)`,
/// with the L² norms evaluated exactly.
pub fn curl_residual(state: &GradientState) -> f64 {
    let n = state.domain().n();
    let scale = state
        .fields
        .iter()
        .map(|f| f.norms().grad.sqrt())
        .fold(1.0f64, f64::max);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let a = state.fields[i].derivative(j).expect("axis in range");
            let b = state.fields[j].derivative(i).expect("axis in range");
            let d = a.distance_sq(&b).expect("same domain");
            worst = worst.max(d.sqrt());
        }
    }
    worst / scale
}

/// Evolution problem to integrate.
#[derive(Clone, Debug, PartialEq)]
pub enum State {
    /// The scalar potential `φ` (all-sine).
    Scalar(SpectralField),
    /// The gradient system `(u_1, ..., u_n)`.
    Gradient(GradientState),
}

impl State {
    pub fn domain(&self) -> &DomainSpec {
        match self {
            State::Scalar(f) => f.domain(),
            State::Gradient(g) => g.domain(),
        }
    }

    pub fn resolution(&self) -> &[usize] {
        match self {
            State::Scalar(f) => f.resolution(),
            State::Gradient(g) => g.resolution(),
        }
    }

    pub fn fields(&self) -> &[SpectralField] {
        match self {
            State::Scalar(f) => std::slice::from_ref(f),
            State::Gradient(g) => g.fields(),
        }
    }

    pub fn as_gradient(&self) -> Option<&GradientState> {
        match self {
            State::Gradient(g) => Some(g),
            State::Scalar(_) => None,
        }
    }

    fn raw(&self) -> Vec<ArrayD<f64>> {
        self.fields().iter().map(|f| f.coeffs().clone()).collect()
    }

    fn rebuild(&self, raw: Vec<ArrayD<f64>>) -> State {
        match self {
            State::Scalar(f) => {
                let mut raw = raw;
                State::Scalar(SpectralField::from_parts_unchecked(
                    f.domain().clone(),
                    f.parity().to_vec(),
                    raw.remove(0),
                ))
            }
            State::Gradient(g) => State::Gradient(GradientState::from_raw(
                g.domain(),
                raw,
                g.gradient_consistent,
            )),
        }
    }
}

impl From<SpectralField> for State {
    fn from(f: SpectralField) -> Self {
        State::Scalar(f)
    }
}

impl From<GradientState> for State {
    fn from(g: GradientState) -> Self {
        State::Gradient(g)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub record_every: usize,
    pub blowup_factor: f64,
    pub padding: Padding,
    /// Set to `false` to integrate only the linear part.
    pub nonlinear: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 1.0,
            scheme: Scheme::Etdrk4,
            record_every: 10,
            blowup_factor: 1e6,
            padding: Padding::default(),
            nonlinear: true,
        }
    }
}

impl SolverConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(KsError::InvalidParameter(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(KsError::InvalidParameter(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if self.dt > self.t_end {
            return Err(KsError::InvalidParameter(format!(
                "dt = {} exceeds t_end = {}",
                self.dt, self.t_end
            )));
        }
        if self.record_every == 0 {
            return Err(KsError::InvalidParameter(
                "record_every must be at least 1".into(),
            ));
        }
        if !(self.blowup_factor > 1.0) {
            return Err(KsError::InvalidParameter(
                "blowup_factor must exceed 1".into(),
            ));
        }
        Ok(())
    }

    /// Number of steps and the size of the last one.
    fn schedule(&self) -> (usize, f64) {
        let ratio = self.t_end / self.dt;
        let full = (ratio + 1e-9).floor() as usize;
        let rest = self.t_end - full as f64 * self.dt;
        if rest > 1e-9 * self.t_end {
            (full + 1, rest)
        } else {
            (full, self.dt)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    DecayedBelowFloor,
    Blowup,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub records: Vec<EnergyRecord>,
    pub status: RunStatus,
    pub final_state: State,
    pub steps: usize,
}

/// Linear symbol `μ_k - μ_k²` of `-Δ² - Δ` on every mode.
pub fn linear_symbol(domain: &DomainSpec, resolution: &[usize]) -> ArrayD<f64> {
    mu_tensor(domain, resolution).mapv(|m| m - m * m)
}

/// Integrator bound to one discretization.
struct Stepper {
    domain: DomainSpec,
    intervals: Vec<usize>,
    scalar: bool,
    nonlinear: bool,
    scheme: Scheme,
}

impl Stepper {
    fn new(state: &State, config: &SolverConfig) -> Result<Self> {
        let intervals = config.padding.intervals(state.resolution())?;
        if let State::Scalar(f) = state {
            if !f.is_all_sine() {
                return Err(KsError::InvalidParameter(
                    "the scalar potential must be expanded in the sine basis".into(),
                ));
            }
        }
        Ok(Self {
            domain: state.domain().clone(),
            intervals,
            scalar: matches!(state, State::Scalar(_)),
            nonlinear: config.nonlinear,
            scheme: config.scheme,
        })
    }

    fn rhs(&self, u: &[ArrayD<f64>]) -> Vec<ArrayD<f64>> {
        if self.scalar {
            vec![nonlinear::scalar_rhs_raw(
                &self.domain,
                &u[0],
                &self.intervals,
            )]
        } else {
            nonlinear::system_rhs_raw(&self.domain, u, &self.intervals)
        }
    }

    fn advance(&self, u: &[ArrayD<f64>], coef: &EtdCoefficients) -> Vec<ArrayD<f64>> {
        let f = |v: &[ArrayD<f64>]| self.rhs(v);
        if self.nonlinear {
            etd_step(u, coef, self.scheme, Some(&f))
        } else {
            etd_step(
                u,
                coef,
                self.scheme,
                None::<&fn(&[ArrayD<f64>]) -> Vec<ArrayD<f64>>>,
            )
        }
    }
}

/// One step of size `config.dt`. Non-finite output is reported as an error.
pub fn step(state: &State, config: &SolverConfig) -> Result<State> {
    config.validate()?;
    let stepper = Stepper::new(state, config)?;
    let coef = EtdCoefficients::new(
        &linear_symbol(state.domain(), state.resolution()),
        config.dt,
    );
    let next = stepper.advance(&state.raw(), &coef);
    if next.iter().any(|c| c.iter().any(|v| !v.is_finite())) {
        return Err(KsError::InvalidParameter(
            "non-finite state after step (blowup)".into(),
        ));
    }
    Ok(state.rebuild(next))
}

/// Integrates to `config.t_end`, recording energies every `record_every`
/// steps. Stops early on blowup (non-finite values or total Δ-energy above
/// `blowup_factor` times its initial value) or when the total Δ-energy of
/// non-zero data falls below [`DECAY_FLOOR`].
pub fn simulate(initial: impl Into<State>, config: &SolverConfig) -> Result<RunResult> {
    simulate_observed(initial, config, |_, _| {})
}

/// [`simulate`] with a callback invoked on every recorded state.
pub fn simulate_observed<F>(
    initial: impl Into<State>,
    config: &SolverConfig,
    mut observe: F,
) -> Result<RunResult>
where
    F: FnMut(&State, &EnergyRecord),
{
    config.validate()?;
    let initial = initial.into();
    let stepper = Stepper::new(&initial, config)?;
    let symbol = linear_symbol(initial.domain(), initial.resolution());
    let (nsteps, last_h) = config.schedule();
    let coef = EtdCoefficients::new(&symbol, config.dt);
    let last_coef = (last_h != config.dt).then(|| EtdCoefficients::new(&symbol, last_h));

    let mut state = initial.clone();
    let mut raw = initial.raw();
    let first = EnergyRecord::from_fields(0.0, state.fields());
    let e0 = first.totals.lap;
    observe(&state, &first);
    let mut records = vec![first];
    let mut status = RunStatus::Completed;
    let mut taken = 0;

    for k in 1..=nsteps {
        let c = match (&last_coef, k == nsteps) {
            (Some(lc), true) => lc,
            _ => &coef,
        };
        let next = stepper.advance(&raw, c);
        taken = k;
        if next.iter().any(|a| a.iter().any(|v| !v.is_finite())) {
            status = RunStatus::Blowup;
            break;
        }
        raw = next;
        let t = if k == nsteps {
            config.t_end
        } else {
            k as f64 * config.dt
        };
        let candidate = initial.rebuild(raw.clone());
        let record = EnergyRecord::from_fields(t, candidate.fields());
        let lap = record.totals.lap;
        let blown = e0 > 0.0 && lap > config.blowup_factor * e0;
        let floored = e0 > 0.0 && lap < DECAY_FLOOR;
        state = candidate;
        if k % config.record_every == 0 || k == nsteps || blown || floored {
            observe(&state, &record);
            records.push(record);
        }
        if blown {
            status = RunStatus::Blowup;
            break;
        }
        if floored {
            status = RunStatus::DecayedBelowFloor;
            break;
        }
    }

    Ok(RunResult {
        records,
        status,
        final_state: state,
        steps: taken,
    })
}
