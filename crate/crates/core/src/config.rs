//! TOML run configuration shared by every subcommand.
//!
//! ```toml
//! resolution = 32            # or one entry per axis
//!
//! [domain]
//! lengths = [2.0, 2.0]
//!
//! [initial]
//! kind = "random"            # "mode", "random" or "scalar-potential"
//! amplitude = 0.5
//! seed = 7
//!
//! [solver]
//! dt = 1e-3
//! t_end = 1.0
//!
//! [constants]
//! cs = "estimate"            # or a number
//! exponent_mode = "dimension_ncubed"
//! ```
//!
//! Note that in TOML a top-level key such as `resolution` must appear before
//! the first `[section]` header.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::dump::load_dump;
use crate::dynamics::{Padding, Scheme, SolverConfig};
use crate::error::{KsError, Result};
use crate::experiments::{Classification, InitialShape};
use crate::geometry::{DomainSpec, ExponentMode};
use crate::spectral::validate_resolution;
use crate::verify::{estimate_embedding_constant, EmbeddingEstimate, SuiteConfig};

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub resolution: Option<ResolutionSpec>,
    pub domain: DomainSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub constants: ConstantsSection,
    #[serde(default)]
    pub output: OutputSection,
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub verify: VerifySection,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ResolutionSpec {
    Uniform(usize),
    PerAxis(Vec<usize>),
}

impl ResolutionSpec {
    fn expand(&self, n: usize) -> Vec<usize> {
        match self {
            ResolutionSpec::Uniform(r) => vec![*r; n],
            ResolutionSpec::PerAxis(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub n: Option<usize>,
    pub lengths: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialKind {
    #[default]
    Mode,
    Random,
    ScalarPotential,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialSection {
    pub kind: InitialKind,
    /// Sine modes of the potential for `kind = "mode"`; defaults to the
    /// lowest mode.
    pub modes: Option<Vec<Vec<usize>>>,
    pub amplitude: f64,
    pub seed: u64,
    pub decay_exponent: f64,
    /// Coefficient dump of the potential for `kind = "scalar-potential"`,
    /// relative to the config file.
    pub path: Option<PathBuf>,
}

impl Default for InitialSection {
    fn default() -> Self {
        Self {
            kind: InitialKind::Mode,
            modes: None,
            amplitude: 0.1,
            seed: 0,
            decay_exponent: crate::verify::DEFAULT_DECAY,
            path: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Equation {
    /// The system for `u = ∇φ`.
    #[default]
    Gradient,
    /// The scalar equation for `φ`.
    Scalar,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub record_every: usize,
    pub blowup_factor: f64,
    /// Padding ratio as `[numerator, denominator]`.
    pub padding: [u32; 2],
    pub nonlinear: bool,
    pub equation: Equation,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            dt: d.dt,
            t_end: d.t_end,
            scheme: d.scheme,
            record_every: d.record_every,
            blowup_factor: d.blowup_factor,
            padding: [d.padding.num, d.padding.den],
            nonlinear: d.nonlinear,
            equation: Equation::Gradient,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum CsSpec {
    Value(f64),
    Keyword(String),
}

impl Default for CsSpec {
    fn default() -> Self {
        CsSpec::Keyword("estimate".into())
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstantsSection {
    pub cs: CsSpec,
    pub exponent_mode: ExponentMode,
    pub estimate_trials: usize,
}

impl Default for ConstantsSection {
    fn default() -> Self {
        Self {
            cs: CsSpec::default(),
            exponent_mode: ExponentMode::default(),
            estimate_trials: 200,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Candidate lengths, one list per axis.
    pub lengths: Vec<Vec<f64>>,
    pub amplitudes: Vec<f64>,
    #[serde(default = "default_decay_fraction")]
    pub decay_fraction: f64,
    #[serde(default = "default_bound_tolerance")]
    pub bound_tolerance: f64,
}

fn default_decay_fraction() -> f64 {
    Classification::default().decay_fraction
}

fn default_bound_tolerance() -> f64 {
    Classification::default().bound_tolerance
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    pub samples: usize,
    pub resolution: ResolutionSpec,
    pub ode_samples: usize,
    pub gronwall_samples: usize,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            samples: 1000,
            resolution: ResolutionSpec::Uniform(8),
            ode_samples: 100,
            gronwall_samples: 50,
        }
    }
}

fn config_err(path: &str, message: impl ToString) -> KsError {
    KsError::Config {
        path: path.to_string(),
        message: message.to_string(),
    }
}

/// Parses TOML text; errors carry the offending key path.
pub fn parse_config(text: &str) -> Result<RunConfigFile> {
    let de = toml::Deserializer::parse(text)
        .map_err(|e| config_err("<root>", e.to_string().trim_end()))?;
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." {
            "<root>".to_string()
        } else {
            path
        };
        config_err(&path, e.into_inner().to_string().trim_end())
    })
}

/// A parsed configuration together with the directory relative paths are
/// resolved against.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub file: RunConfigFile,
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err("<file>", format!("{}: {e}", path.display())))?;
        Ok(Self {
            file: parse_config(&text)?,
            base_dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
        })
    }

    pub fn from_str(text: &str) -> Result<Self> {
        Ok(Self {
            file: parse_config(text)?,
            base_dir: PathBuf::new(),
        })
    }

    pub fn domain(&self) -> Result<DomainSpec> {
        let d = &self.file.domain;
        if let Some(n) = d.n {
            if n != d.lengths.len() {
                return Err(config_err(
                    "domain.n",
                    format!("n = {n} but {} lengths given", d.lengths.len()),
                ));
            }
        }
        DomainSpec::new(d.lengths.clone()).map_err(|e| config_err("domain.lengths", e))
    }

    /// Resolution of the simulation grid (16 per axis when unset).
    pub fn resolution(&self) -> Result<Vec<usize>> {
        let domain = self.domain()?;
        let r = self
            .file
            .resolution
            .as_ref()
            .map_or(vec![16; domain.n()], |r| r.expand(domain.n()));
        validate_resolution(&domain, &r).map_err(|e| config_err("resolution", e))?;
        Ok(r)
    }

    pub fn shape(&self) -> Result<InitialShape> {
        let init = &self.file.initial;
        let n = self.domain()?.n();
        Ok(match init.kind {
            InitialKind::Mode => {
                let modes = init.modes.clone().unwrap_or_else(|| vec![vec![1; n]]);
                if modes.is_empty() {
                    return Err(config_err("initial.modes", "at least one mode is required"));
                }
                let res = self.resolution()?;
                for k in &modes {
                    if k.len() != n || k.iter().zip(&res).any(|(ki, ni)| *ki == 0 || ki > ni) {
                        return Err(config_err(
                            "initial.modes",
                            format!("mode {k:?} is outside 1..={res:?}"),
                        ));
                    }
                }
                InitialShape::Modes(modes)
            }
            InitialKind::Random => {
                if !init.decay_exponent.is_finite() {
                    return Err(config_err("initial.decay_exponent", "must be finite"));
                }
                InitialShape::Random {
                    decay_exponent: init.decay_exponent,
                }
            }
            InitialKind::ScalarPotential => {
                let rel = init.path.as_ref().ok_or_else(|| {
                    config_err("initial.path", "required for kind = \"scalar-potential\"")
                })?;
                let phi = load_dump(&self.base_dir.join(rel), None)
                    .map_err(|e| config_err("initial.path", e))?;
                if phi.domain() != &self.domain()? || phi.resolution() != self.resolution()? {
                    return Err(config_err(
                        "initial.path",
                        "dump does not match the configured domain and resolution",
                    ));
                }
                InitialShape::Potential(phi)
            }
        })
    }

    pub fn amplitude(&self) -> Result<f64> {
        let a = self.file.initial.amplitude;
        if !(a.is_finite() && a >= 0.0) {
            return Err(config_err(
                "initial.amplitude",
                format!("must be non-negative, got {a}"),
            ));
        }
        Ok(a)
    }

    pub fn solver(&self) -> Result<SolverConfig> {
        let s = &self.file.solver;
        let padding = Padding::new(s.padding[0], s.padding[1])
            .map_err(|e| config_err("solver.padding", e))?;
        let cfg = SolverConfig {
            dt: s.dt,
            t_end: s.t_end,
            scheme: s.scheme,
            record_every: s.record_every,
            blowup_factor: s.blowup_factor,
            padding,
            nonlinear: s.nonlinear,
        };
        cfg.validate().map_err(|e| config_err("solver", e))?;
        Ok(cfg)
    }

    pub fn exponent_mode(&self) -> ExponentMode {
        self.file.constants.exponent_mode
    }

    /// The configured embedding constant, or `2 cs_hat` from
    /// `estimate_trials` random fields at the simulation resolution.
    pub fn resolve_cs(&self, seed: u64) -> Result<(f64, Option<EmbeddingEstimate>)> {
        match &self.file.constants.cs {
            CsSpec::Value(v) if v.is_finite() && *v > 0.0 => Ok((*v, None)),
            CsSpec::Value(v) => Err(config_err(
                "constants.cs",
                format!("must be positive, got {v}"),
            )),
            CsSpec::Keyword(k) if k == "estimate" => {
                let trials = self.file.constants.estimate_trials;
                if trials == 0 {
                    return Err(config_err(
                        "constants.estimate_trials",
                        "must be at least 1",
                    ));
                }
                let est = estimate_embedding_constant(
                    &self.domain()?,
                    &self.resolution()?,
                    trials,
                    seed,
                )?;
                Ok((est.recommended(), Some(est)))
            }
            CsSpec::Keyword(k) => Err(config_err(
                "constants.cs",
                format!("expected a number or \"estimate\", got \"{k}\""),
            )),
        }
    }

    pub fn classification(&self) -> Classification {
        self.file
            .sweep
            .as_ref()
            .map_or_else(Classification::default, |s| Classification {
                decay_fraction: s.decay_fraction,
                bound_tolerance: s.bound_tolerance,
            })
    }

    pub fn suite(&self, seed: u64) -> Result<SuiteConfig> {
        let v = &self.file.verify;
        let domain = self.domain()?;
        let resolution = v.resolution.expand(domain.n());
        validate_resolution(&domain, &resolution)
            .map_err(|e| config_err("verify.resolution", e))?;
        if v.samples == 0 {
            return Err(config_err("verify.samples", "must be at least 1"));
        }
        Ok(SuiteConfig {
            samples: v.samples,
            resolution,
            ode_samples: v.ode_samples,
            gronwall_samples: v.gronwall_samples,
            seed,
        })
    }

    pub fn output_dir(&self) -> Option<PathBuf> {
        self.file.output.dir.as_ref().map(|d| self.base_dir.join(d))
    }
}
