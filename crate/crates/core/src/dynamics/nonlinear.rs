//! Alias-free Galerkin projections of the quadratic KS nonlinearities.
//!
//! Every quadratic term that appears here is a sum of squares of fields
//! whose axes are sine or cosine series, so the pointwise product is a pure
//! cosine series in every axis with mode numbers up to `2 N_i`. Sampling it
//! on a closed grid with `M_i >= 2 N_i` intervals, a DCT-I recovers its
//! cosine coefficients exactly, and the analytic cosine-to-sine coupling
//! then gives the exact projection onto the retained sine modes.

use ndarray::{ArrayD, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{KsError, Result};
use crate::geometry::DomainSpec;
use crate::spectral::projection::project_cosine_samples;
use crate::spectral::{Parity, SpectralField};

use super::GradientState;

/// Rational dealiasing factor: the product grid has
/// `max(ceil(num/den * (N+1)), 2N)` intervals per axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Padding {
    pub num: u32,
    pub den: u32,
}

impl Default for Padding {
    fn default() -> Self {
        Padding { num: 2, den: 1 }
    }
}

impl Padding {
    pub fn new(num: u32, den: u32) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(KsError::InvalidParameter(
                "padding factor must be positive".into(),
            ));
        }
        Ok(Padding { num, den })
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Product-grid intervals per axis. Fails when the factor is too small
    /// to hold the `2N` modes of a quadratic product.
    pub fn intervals(&self, resolution: &[usize]) -> Result<Vec<usize>> {
        resolution
            .iter()
            .map(|&n| {
                let m = ((n + 1) * self.num as usize).div_ceil(self.den as usize);
                if m < 2 * n || m < n + 1 {
                    Err(KsError::InvalidParameter(format!(
                        "padding {}/{} gives {m} intervals for N = {n}; dealiasing needs at least {}",
                        self.num,
                        self.den,
                        (2 * n).max(n + 1)
                    )))
                } else {
                    Ok(m)
                }
            })
            .collect()
    }
}

/// Sine coefficients (at `resolution`) of the exact projection of
/// `sum_f f(x)^2` onto the all-sine basis.
pub fn project_sum_of_squares(
    factors: &[SpectralField],
    resolution: &[usize],
    intervals: &[usize],
) -> ArrayD<f64> {
    let n = resolution.len();
    let mut acc: Option<ArrayD<f64>> = None;
    for f in factors {
        let v = f.synthesize_extended(intervals);
        match acc.as_mut() {
            None => acc = Some(v.mapv(|x| x * x)),
            Some(a) => Zip::from(a).and(&v).for_each(|a, &x| *a += x * x),
        }
    }
    let values = acc.expect("at least one factor");
    project_cosine_samples(&values, &vec![Parity::Sine; n], resolution)
}

fn scalar_potential(domain: &DomainSpec, phi: &ArrayD<f64>, intervals: &[usize]) -> ArrayD<f64> {
    let n = domain.n();
    let field =
        SpectralField::from_parts_unchecked(domain.clone(), vec![Parity::Sine; n], phi.clone());
    let grads: Vec<SpectralField> = (0..n)
        .map(|j| field.derivative(j).expect("axis in range"))
        .collect();
    project_sum_of_squares(&grads, phi.shape(), intervals)
}

fn system_potential(domain: &DomainSpec, u: &[ArrayD<f64>], intervals: &[usize]) -> ArrayD<f64> {
    let n = domain.n();
    let fields: Vec<SpectralField> = u
        .iter()
        .enumerate()
        .map(|(j, c)| {
            SpectralField::from_parts_unchecked(
                domain.clone(),
                GradientState::component_parity(n, j),
                c.clone(),
            )
        })
        .collect();
    project_sum_of_squares(&fields, u[0].shape(), intervals)
}

/// Raw nonlinear term for the scalar equation: `-P(½|∇φ|²)`.
pub(crate) fn scalar_rhs_raw(
    domain: &DomainSpec,
    phi: &ArrayD<f64>,
    intervals: &[usize],
) -> ArrayD<f64> {
    scalar_potential(domain, phi, intervals).mapv(|v| -0.5 * v)
}

/// Raw nonlinear terms for the gradient system: `-½ ∂_j P(sum_i u_i²)`.
pub(crate) fn system_rhs_raw(
    domain: &DomainSpec,
    u: &[ArrayD<f64>],
    intervals: &[usize],
) -> Vec<ArrayD<f64>> {
    let n = domain.n();
    let potential = system_potential(domain, u, intervals);
    let p = SpectralField::from_parts_unchecked(domain.clone(), vec![Parity::Sine; n], potential);
    (0..n)
        .map(|j| {
            p.derivative(j)
                .expect("axis in range")
                .into_coeffs()
                .mapv(|v| -0.5 * v)
        })
        .collect()
}

/// Galerkin projection of `-½|∇φ|²` onto the sine modes of `phi`,
/// evaluated with the default padding.
pub fn nonlinear_rhs_scalar(phi: &SpectralField) -> Result<SpectralField> {
    nonlinear_rhs_scalar_padded(phi, Padding::default())
}

pub fn nonlinear_rhs_scalar_padded(phi: &SpectralField, padding: Padding) -> Result<SpectralField> {
    if !phi.is_all_sine() {
        return Err(KsError::InvalidParameter(
            "the scalar potential must be expanded in the sine basis".into(),
        ));
    }
    let intervals = padding.intervals(phi.resolution())?;
    let coeffs = scalar_rhs_raw(phi.domain(), phi.coeffs(), &intervals);
    SpectralField::new(phi.domain().clone(), coeffs)
}

/// Nonlinear terms of the gradient system, `-½ ∂_j P(sum_i u_i²)` for each
/// `j`, where `P` is the exact projection onto the sine modes.
///
/// For gradient data `u = ∇φ` this is exactly `∂_j` of
/// [`nonlinear_rhs_scalar`], so the system preserves `(u_i)_{x_j} =
/// (u_j)_{x_i}`. It coincides with the Galerkin projection of
/// `-½ sum_i (u_i²)_{x_j}` onto the basis of `u_j` up to the boundary flux of
/// `u_j²` across the faces `x_j ∈ {0, L_j}`.
pub fn nonlinear_rhs_system(state: &GradientState) -> Result<Vec<SpectralField>> {
    nonlinear_rhs_system_padded(state, Padding::default())
}

pub fn nonlinear_rhs_system_padded(
    state: &GradientState,
    padding: Padding,
) -> Result<Vec<SpectralField>> {
    let intervals = padding.intervals(state.resolution())?;
    let raw: Vec<ArrayD<f64>> = state.fields().iter().map(|f| f.coeffs().clone()).collect();
    let out = system_rhs_raw(state.domain(), &raw, &intervals);
    let n = state.domain().n();
    out.into_iter()
        .enumerate()
        .map(|(j, c)| {
            SpectralField::with_parity(
                state.domain().clone(),
                GradientState::component_parity(n, j),
                c,
            )
        })
        .collect()
}
