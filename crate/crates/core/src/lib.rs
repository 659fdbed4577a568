//! Pseudospectral Kuramoto–Sivashinsky solver on box domains with a
//! verification harness for the decay estimate.
//!
//! Fields are expanded in tensor sine/cosine bases that satisfy the
//! homogeneous Dirichlet conditions exactly, so every energy is a weighted
//! sum of squared coefficients. Time stepping uses exponential integrators
//! on the linear operator `-Δ² - Δ`.

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod dump;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod spectral;
pub mod verify;

pub use diagnostics::{
    decay_fit, dissipation_ledger, twin_run_divergence, DecayReport, EnergyRecord,
};
pub use dynamics::{
    gradient_initial_data, simulate, GradientState, RunResult, RunStatus, Scheme, SolverConfig,
    State,
};
pub use error::{KsError, Result};
pub use geometry::{
    damping_margin, smallness_check, steklov_constant, ConditionReport, DomainSpec, ExponentMode,
};
pub use spectral::{analyze, GridField, Norms, Parity, SpectralField};
