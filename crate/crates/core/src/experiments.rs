//! Parameter sweeps over domain lengths and initial amplitudes, and
//! bisection for the empirical stability boundary.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::csv::sci;
use crate::diagnostics::{bound_violation, decay_fit};
use crate::dynamics::{
    gradient_initial_data, simulate, GradientState, RunResult, RunStatus, SolverConfig,
};
use crate::error::{KsError, Result};
use crate::geometry::{
    damping_margin, max_initial_energy, smallness_check, DomainSpec, ExponentMode,
};
use crate::spectral::SpectralField;
use crate::verify::{random_field, sample_seed, DEFAULT_DECAY};

/// Scalar potential `φ0` from which gradient initial data `u = ∇φ0` are
/// built.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialShape {
    /// Unit-coefficient sum of the listed sine modes (1-based indices).
    Modes(Vec<Vec<usize>>),
    /// [`random_field`] drawn with the cell seed.
    Random { decay_exponent: f64 },
    /// A fixed potential, used as given.
    Potential(SpectralField),
}

impl InitialShape {
    pub fn lowest_mode(n: usize) -> Self {
        InitialShape::Modes(vec![vec![1; n]])
    }

    pub fn random() -> Self {
        InitialShape::Random {
            decay_exponent: DEFAULT_DECAY,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            InitialShape::Modes(m) => format!("modes {m:?}"),
            InitialShape::Random { decay_exponent } => format!("random q={decay_exponent}"),
            InitialShape::Potential(f) => format!("potential {:?}", f.resolution()),
        }
    }

    pub fn potential(
        &self,
        domain: &DomainSpec,
        resolution: &[usize],
        seed: u64,
    ) -> Result<SpectralField> {
        match self {
            InitialShape::Modes(modes) => {
                let mut phi = SpectralField::zeros(domain.clone(), resolution)?;
                for k in modes {
                    let v = phi.mode(k)?;
                    phi.set_mode(k, v + 1.0)?;
                }
                Ok(phi)
            }
            InitialShape::Random { decay_exponent } => {
                random_field(domain, resolution, seed, *decay_exponent)
            }
            InitialShape::Potential(f) => {
                if f.domain() != domain || f.resolution() != resolution {
                    return Err(KsError::Incompatible(
                        "stored potential does not match the requested discretization".into(),
                    ));
                }
                Ok(f.clone())
            }
        }
    }

    /// Gradient data `∇(amplitude φ0 / max_k |c_k|)`, so that the largest
    /// sine coefficient of the potential equals `amplitude`. A stored
    /// potential is only multiplied by `amplitude`.
    pub fn gradient_data(
        &self,
        domain: &DomainSpec,
        resolution: &[usize],
        amplitude: f64,
        seed: u64,
    ) -> Result<GradientState> {
        let phi = self.potential(domain, resolution, seed)?;
        gradient_initial_data(&phi.scaled(amplitude * self.unit_scale(&phi)?))
    }

    /// Factor taking the raw potential to unit amplitude.
    pub fn unit_scale(&self, phi: &SpectralField) -> Result<f64> {
        if let InitialShape::Potential(_) = self {
            return Ok(1.0);
        }
        let peak = phi.coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if peak <= 0.0 {
            return Err(KsError::InvalidParameter(
                "initial shape is identically zero".into(),
            ));
        }
        Ok(1.0 / peak)
    }
}

/// Cut-offs used to label a finished run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    /// A run whose final energy is below `decay_fraction * E0` counts as
    /// decayed.
    pub decay_fraction: f64,
    /// Largest accepted `bound_violation` for a decayed run.
    pub bound_tolerance: f64,
}

impl Default for Classification {
    fn default() -> Self {
        Self {
            decay_fraction: 1e-6,
            bound_tolerance: 1.01,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Decayed,
    Sustained,
    Blowup,
    Failed,
}

impl CellStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CellStatus::Decayed => "decayed",
            CellStatus::Sustained => "sustained",
            CellStatus::Blowup => "blowup",
            CellStatus::Failed => "failed",
        }
    }
}

/// Outcome of one run against the decay bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunVerdict {
    pub status: CellStatus,
    pub fitted_rate: Option<f64>,
    pub bound_violation: f64,
}

/// Labels a run: blowup if the solver flagged it, decayed if the final
/// energy fell below the cut or (when `θ > 0`) the decay bound held at every
/// record, sustained otherwise.
pub fn classify(run: &RunResult, domain: &DomainSpec, cut: &Classification) -> RunVerdict {
    let report = damping_margin(domain);
    let e0 = run.records.first().map_or(0.0, |r| r.energy());
    if e0 <= 0.0 {
        return RunVerdict {
            status: CellStatus::Decayed,
            fitted_rate: None,
            bound_violation: 0.0,
        };
    }
    let bv = bound_violation(&run.records, report.decay_rate);
    let fitted_rate = decay_fit(&run.records, report.decay_rate)
        .ok()
        .map(|r| r.fitted_rate);
    let status = if run.status == RunStatus::Blowup {
        CellStatus::Blowup
    } else {
        let final_e = run.records.last().map_or(e0, |r| r.energy());
        let floored =
            run.status == RunStatus::DecayedBelowFloor || final_e < cut.decay_fraction * e0;
        if floored || (report.geometric_ok && bv <= cut.bound_tolerance) {
            CellStatus::Decayed
        } else {
            CellStatus::Sustained
        }
    };
    RunVerdict {
        status,
        fitted_rate,
        bound_violation: bv,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    /// Candidate lengths per axis; cells are their Cartesian product.
    pub lengths: Vec<Vec<f64>>,
    pub amplitudes: Vec<f64>,
    pub shape: InitialShape,
    pub resolution: Vec<usize>,
    pub solver: SolverConfig,
    pub cs: f64,
    pub exponent_mode: ExponentMode,
    pub classification: Classification,
    pub seed: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.lengths.is_empty() || self.lengths.iter().any(Vec::is_empty) {
            return Err(KsError::InvalidParameter(
                "every axis needs at least one length".into(),
            ));
        }
        if self.amplitudes.is_empty() {
            return Err(KsError::InvalidParameter("amplitude list is empty".into()));
        }
        if self.amplitudes.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(KsError::InvalidParameter(
                "amplitudes must be finite and non-negative".into(),
            ));
        }
        if self.resolution.len() != self.lengths.len() {
            return Err(KsError::ShapeMismatch {
                expected: vec![self.lengths.len()],
                found: vec![self.resolution.len()],
            });
        }
        if !(self.cs > 0.0) {
            return Err(KsError::InvalidParameter(format!(
                "cs must be positive, got {}",
                self.cs
            )));
        }
        for l in self.lengths.iter().flatten() {
            if !(l.is_finite() && *l > 0.0) {
                return Err(KsError::InvalidDomain(format!(
                    "length {l} is not positive"
                )));
            }
        }
        self.solver.validate()
    }

    /// Length combinations in row-major order (last axis fastest).
    pub fn length_cells(&self) -> Vec<Vec<f64>> {
        let mut cells = vec![Vec::new()];
        for axis in &self.lengths {
            cells = cells
                .into_iter()
                .flat_map(|prefix| {
                    axis.iter().map(move |l| {
                        let mut c = prefix.clone();
                        c.push(*l);
                        c
                    })
                })
                .collect();
        }
        cells
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lengths: Vec<f64>,
    pub amplitude: f64,
    pub a: f64,
    pub theta: f64,
    pub e0: f64,
    pub predicted_rate: f64,
    /// Absent when `θ <= 0`.
    pub smallness_margin: Option<f64>,
    pub fitted_rate: Option<f64>,
    pub bound_violation: Option<f64>,
    pub status: CellStatus,
    pub error: Option<String>,
}

/// Provenance line of the JSON-lines sidecar.
#[derive(Clone, Debug, Serialize)]
pub struct SweepProvenance<'a> {
    pub index: usize,
    pub seed: u64,
    pub shape: String,
    pub resolution: &'a [usize],
    pub solver: &'a SolverConfig,
    pub cs: f64,
    pub exponent_mode: ExponentMode,
    pub classification: &'a Classification,
    pub row: &'a SweepRow,
}

/// Runs every cell of the sweep in parallel. Cells sharing the same lengths
/// share the initial shape, so amplitudes scale one fixed profile. Failures
/// are recorded in the row.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let cells: Vec<(usize, Vec<f64>, f64)> = spec
        .length_cells()
        .into_iter()
        .enumerate()
        .flat_map(|(i, l)| spec.amplitudes.iter().map(move |a| (i, l.clone(), *a)))
        .collect();
    Ok(cells
        .par_iter()
        .map(|(i, lengths, amp)| run_cell(spec, lengths, *amp, sample_seed(spec.seed, *i as u64)))
        .collect())
}

/// Seed used for the cells at length combination `index`.
pub fn cell_seed(spec: &SweepSpec, index: usize) -> u64 {
    sample_seed(spec.seed, index as u64)
}

fn run_cell(spec: &SweepSpec, lengths: &[f64], amplitude: f64, seed: u64) -> SweepRow {
    let mut row = SweepRow {
        lengths: lengths.to_vec(),
        amplitude,
        a: f64::NAN,
        theta: f64::NAN,
        e0: f64::NAN,
        predicted_rate: f64::NAN,
        smallness_margin: None,
        fitted_rate: None,
        bound_violation: None,
        status: CellStatus::Failed,
        error: None,
    };
    let result = (|| -> Result<()> {
        let domain = DomainSpec::new(lengths.to_vec())?;
        let report = damping_margin(&domain);
        row.a = report.a;
        row.theta = report.theta;
        row.predicted_rate = report.decay_rate;
        let init = spec
            .shape
            .gradient_data(&domain, &spec.resolution, amplitude, seed)?;
        row.e0 = init.total_lap_energy();
        if report.geometric_ok {
            row.smallness_margin =
                smallness_check(&domain, row.e0, spec.cs, spec.exponent_mode)?.smallness_margin;
        }
        let run = simulate(init, &spec.solver)?;
        let v = classify(&run, &domain, &spec.classification);
        row.status = v.status;
        row.fitted_rate = v.fitted_rate;
        row.bound_violation = Some(v.bound_violation);
        Ok(())
    })();
    if let Err(e) = result {
        row.status = CellStatus::Failed;
        row.error = Some(e.to_string());
    }
    row
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".to_string(), sci)
}

pub fn sweep_header(n: usize) -> String {
    let mut cols: Vec<String> = (1..=n).map(|i| format!("L{i}")).collect();
    cols.extend(
        [
            "a",
            "theta",
            "E0",
            "predicted_rate",
            "smallness_margin",
            "fitted_rate",
            "bound_violation",
            "status",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    cols.join(",")
}

pub fn write_sweep_csv<W: Write>(mut out: W, n: usize, rows: &[SweepRow]) -> std::io::Result<()> {
    writeln!(out, "{}", sweep_header(n))?;
    for r in rows {
        let mut cols: Vec<String> = r.lengths.iter().map(|l| sci(*l)).collect();
        cols.extend([
            sci(r.a),
            sci(r.theta),
            sci(r.e0),
            sci(r.predicted_rate),
            opt(r.smallness_margin),
            opt(r.fitted_rate),
            opt(r.bound_violation),
            r.status.as_str().to_string(),
        ]);
        writeln!(out, "{}", cols.join(","))?;
    }
    Ok(())
}

pub fn write_sweep_jsonl<W: Write>(mut out: W, spec: &SweepSpec, rows: &[SweepRow]) -> Result<()> {
    let per_cell = spec.amplitudes.len();
    for (index, row) in rows.iter().enumerate() {
        let line = SweepProvenance {
            index,
            seed: cell_seed(spec, index / per_cell),
            shape: spec.shape.describe(),
            resolution: &spec.resolution,
            solver: &spec.solver,
            cs: spec.cs,
            exponent_mode: spec.exponent_mode,
            classification: &spec.classification,
            row,
        };
        serde_json::to_writer(&mut out, &line)?;
        writeln!(out)?;
    }
    Ok(())
}

/// Result of a bisection on a monotone predicate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    /// Largest point known to satisfy the predicate.
    pub lo: f64,
    /// Smallest point known to violate it.
    pub hi: f64,
    pub iterations: usize,
}

/// Bisects until `hi - lo <= tol`, given `pred(lo)` true and `pred(hi)`
/// false. Both ends are evaluated first.
pub fn bisect(
    lo: f64,
    hi: f64,
    tol: f64,
    mut pred: impl FnMut(f64) -> Result<bool>,
) -> Result<Bracket> {
    if !(lo < hi) || !(tol > 0.0) {
        return Err(KsError::InvalidParameter(format!(
            "need lo < hi and tol > 0, got [{lo}, {hi}], tol = {tol}"
        )));
    }
    if !pred(lo)? || pred(hi)? {
        return Err(KsError::NoBracket(format!(
            "predicate must hold at {lo} and fail at {hi}"
        )));
    }
    let (mut lo, mut hi) = (lo, hi);
    let mut iterations = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if pred(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok(Bracket { lo, hi, iterations })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundarySpec {
    pub domain: DomainSpec,
    pub resolution: Vec<usize>,
    pub shape: InitialShape,
    pub seed: u64,
    pub amp_lo: f64,
    pub amp_hi: f64,
    pub tol: f64,
    pub solver: SolverConfig,
    pub cs: f64,
    pub exponent_mode: ExponentMode,
    pub classification: Classification,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryReport {
    /// Largest amplitude observed to decay.
    pub amp_star_empirical: f64,
    /// Amplitude at which `E0` equals the smallness threshold; absent when
    /// `θ <= 0`.
    pub amp_star_theory: Option<f64>,
    /// `E0` at unit amplitude.
    pub unit_energy: f64,
    pub bracket: Bracket,
}

/// Bisection on the amplitude for the decay/no-decay transition. The
/// theoretical amplitude follows from `E0(amp) = amp² E0(1)`.
pub fn stability_boundary(spec: &BoundarySpec) -> Result<BoundaryReport> {
    spec.solver.validate()?;
    let unit = spec
        .shape
        .gradient_data(&spec.domain, &spec.resolution, 1.0, spec.seed)?;
    let unit_energy = unit.total_lap_energy();
    let amp_star_theory = if damping_margin(&spec.domain).geometric_ok {
        Some((max_initial_energy(&spec.domain, spec.cs, spec.exponent_mode)? / unit_energy).sqrt())
    } else {
        None
    };
    let bracket = bisect(spec.amp_lo, spec.amp_hi, spec.tol, |amp| {
        let run = simulate(unit.scaled(amp), &spec.solver)?;
        Ok(classify(&run, &spec.domain, &spec.classification).status == CellStatus::Decayed)
    })?;
    Ok(BoundaryReport {
        amp_star_empirical: bracket.lo,
        amp_star_theory,
        unit_energy,
        bracket,
    })
}
