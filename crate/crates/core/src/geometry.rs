//! Box domains, the Steklov constant `a`, the damping margin `theta`, and the
//! geometric and smallness conditions under which the H²-energy decays.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{KsError, Result};

/// Largest dimension for which the condition arithmetic is defined.
pub const MAX_DIM: usize = 7;

/// The box `(0, L_1) x ... x (0, L_n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    lengths: Vec<f64>,
}

impl DomainSpec {
    pub fn new(lengths: Vec<f64>) -> Result<Self> {
        let n = lengths.len();
        if n == 0 || n > MAX_DIM {
            return Err(KsError::InvalidDomain(format!(
                "dimension must be in 1..={MAX_DIM}, got {n}"
            )));
        }
        if let Some(bad) = lengths.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(KsError::InvalidDomain(format!(
                "edge lengths must be positive and finite, got {bad}"
            )));
        }
        Ok(Self { lengths })
    }

    /// Cube with every edge equal to `length`.
    pub fn cube(n: usize, length: f64) -> Result<Self> {
        Self::new(vec![length; n])
    }

    pub fn n(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn length(&self, axis: usize) -> f64 {
        self.lengths[axis]
    }

    /// Volume of the box.
    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }
}

/// Which cube is used in the smallness threshold: a fixed `7^3`, valid for
/// every `n <= 7`, or `n^3` for the actual dimension.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentMode {
    #[serde(rename = "paper_7cubed")]
    Paper7Cubed,
    #[default]
    #[serde(rename = "dimension_ncubed")]
    DimensionNCubed,
}

impl ExponentMode {
    pub fn factor(self, n: usize) -> f64 {
        match self {
            ExponentMode::Paper7Cubed => 343.0,
            ExponentMode::DimensionNCubed => (n * n * n) as f64,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ExponentMode::Paper7Cubed => "paper_7cubed",
            ExponentMode::DimensionNCubed => "dimension_ncubed",
        }
    }
}

impl std::str::FromStr for ExponentMode {
    type Err = KsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper_7cubed" => Ok(ExponentMode::Paper7Cubed),
            "dimension_ncubed" => Ok(ExponentMode::DimensionNCubed),
            other => Err(KsError::InvalidParameter(format!(
                "unknown exponent mode `{other}`"
            ))),
        }
    }
}

/// Outcome of the geometric and smallness checks for one domain and one
/// initial energy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub a: f64,
    pub theta: f64,
    pub geometric_ok: bool,
    /// `None` until a smallness check has been run.
    pub smallness_margin: Option<f64>,
    pub smallness_ok: bool,
    pub decay_rate: f64,
    pub cs_used: Option<f64>,
    pub exponent_mode: ExponentMode,
    /// Initial energy the margin was evaluated at.
    pub initial_energy: Option<f64>,
}

/// `a = sum_i pi^2 / L_i^2`.
pub fn steklov_constant(domain: &DomainSpec) -> f64 {
    domain.lengths().iter().map(|l| PI * PI / (l * l)).sum()
}

/// Fills in `a`, `theta = 1 - 1/a`, the geometric flag and the predicted
/// decay rate `a^2 theta / 2`. A non-positive `theta` is reported, not an
/// error.
pub fn damping_margin(domain: &DomainSpec) -> ConditionReport {
    let a = steklov_constant(domain);
    let theta = 1.0 - 1.0 / a;
    ConditionReport {
        a,
        theta,
        geometric_ok: theta > 0.0,
        smallness_margin: None,
        smallness_ok: false,
        decay_rate: a * a * theta / 2.0,
        cs_used: None,
        exponent_mode: ExponentMode::default(),
        initial_energy: None,
    }
}

fn check_cs(cs: f64) -> Result<()> {
    if !(cs.is_finite() && cs > 0.0) {
        return Err(KsError::InvalidParameter(format!(
            "embedding constant must be positive, got {cs}"
        )));
    }
    Ok(())
}

/// Evaluates `theta - (2 cs^2 p / (a theta)) E0` where `E0 = sum_j ||Δu_j0||^2`.
pub fn smallness_check(
    domain: &DomainSpec,
    initial_energy: f64,
    cs: f64,
    mode: ExponentMode,
) -> Result<ConditionReport> {
    check_cs(cs)?;
    if !(initial_energy.is_finite() && initial_energy >= 0.0) {
        return Err(KsError::InvalidParameter(format!(
            "initial energy must be non-negative, got {initial_energy}"
        )));
    }
    let mut report = damping_margin(domain);
    if !report.geometric_ok {
        return Err(KsError::GeometricConditionFails {
            theta: report.theta,
        });
    }
    let p = mode.factor(domain.n());
    let margin = report.theta - (2.0 * cs * cs * p / (report.a * report.theta)) * initial_energy;
    report.smallness_margin = Some(margin);
    report.smallness_ok = margin > 0.0;
    report.cs_used = Some(cs);
    report.exponent_mode = mode;
    report.initial_energy = Some(initial_energy);
    Ok(report)
}

/// The initial energy at which the smallness margin is exactly zero:
/// `E* = a theta^2 / (2 cs^2 p)`.
pub fn max_initial_energy(domain: &DomainSpec, cs: f64, mode: ExponentMode) -> Result<f64> {
    check_cs(cs)?;
    let report = damping_margin(domain);
    if !report.geometric_ok {
        return Err(KsError::GeometricConditionFails {
            theta: report.theta,
        });
    }
    let p = mode.factor(domain.n());
    Ok(report.a * report.theta * report.theta / (2.0 * cs * cs * p))
}
