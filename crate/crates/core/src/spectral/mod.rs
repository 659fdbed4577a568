//! Tensor-product trigonometric basis on the box.
//!
//! A [`SpectralField`] stores continuum coefficients `c_k` of
//!
//! ```text
//! f(x) = sum_k c_k prod_i b_i(k_i pi x_i / L_i),   k_i = 1..N_i
//! ```
//!
//! where each axis uses either `b = sin` or `b = cos` ([`Parity`]). The
//! all-sine family is the eigenbasis of `Δ² w = λ w` with `w = Δw = 0` on
//! the boundary (`λ = μ²`, `μ_k = sum_i (k_i pi / L_i)^2`). Mixed families
//! appear as exact derivatives: `∂_j` of a sine field is cosine along axis
//! `j`. Every member of both families is an eigenfunction of `-Δ` with the
//! same `μ_k`, so Laplacians, Parseval norms and the linear KS symbol are
//! parity independent.
//!
//! Grid values live on interior collocation nodes `x_m = m L / (N + 1)`,
//! `m = 1..N` ([`GridField`]); the pair [`SpectralField::synthesize`] /
//! [`analyze`] is an exact type-I sine transform pair.

pub mod projection;
pub mod transform;

use std::f64::consts::PI;

use ndarray::{ArrayD, IxDyn, Slice};
use serde::{Deserialize, Serialize};

use crate::error::{KsError, Result};
use crate::geometry::DomainSpec;
use transform::{dct1, dst1, map_axis};

/// Largest dimension supported by grid-based operations.
pub const MAX_GRID_DIM: usize = 4;

/// Basis family along one axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    Sine,
    Cosine,
}

impl Parity {
    pub fn flipped(self) -> Self {
        match self {
            Parity::Sine => Parity::Cosine,
            Parity::Cosine => Parity::Sine,
        }
    }
}

/// Exact Parseval energies `||f||², ||∇f||², ||Δf||², ||∇Δf||², ||Δ²f||²`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub l2: f64,
    pub grad: f64,
    pub lap: f64,
    pub gradlap: f64,
    pub bilap: f64,
}

impl Norms {
    pub const LABELS: [&'static str; 5] = ["l2", "grad", "lap", "gradlap", "bilap"];

    pub fn as_array(&self) -> [f64; 5] {
        [self.l2, self.grad, self.lap, self.gradlap, self.bilap]
    }

    pub fn from_array(v: [f64; 5]) -> Self {
        Norms {
            l2: v[0],
            grad: v[1],
            lap: v[2],
            gradlap: v[3],
            bilap: v[4],
        }
    }

    pub fn add(&self, other: &Norms) -> Norms {
        let (a, b) = (self.as_array(), other.as_array());
        Norms::from_array(std::array::from_fn(|i| a[i] + b[i]))
    }

    /// The Sobolev norm `||f||²_{H^2} = ||f||² + ||∇f||² + ||Δf||²`.
    pub fn h2(&self) -> f64 {
        self.l2 + self.grad + self.lap
    }

    /// `||f||²_{H^4}` assembled from all five energies.
    pub fn h4(&self) -> f64 {
        self.l2 + self.grad + self.lap + self.gradlap + self.bilap
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|v| v.is_finite())
    }
}

pub(crate) fn validate_resolution(domain: &DomainSpec, resolution: &[usize]) -> Result<()> {
    if resolution.len() != domain.n() {
        return Err(KsError::InvalidResolution(format!(
            "resolution has {} entries for a {}-dimensional domain",
            resolution.len(),
            domain.n()
        )));
    }
    if domain.n() > MAX_GRID_DIM {
        return Err(KsError::InvalidResolution(format!(
            "grids are supported up to n = {MAX_GRID_DIM}, got n = {}",
            domain.n()
        )));
    }
    if resolution.contains(&0) {
        return Err(KsError::InvalidResolution(
            "every axis needs at least one mode".into(),
        ));
    }
    Ok(())
}

/// `μ_k = sum_i (k_i pi / L_i)^2`; the biharmonic eigenvalue is `μ_k²`.
pub fn eigenvalue_mu(domain: &DomainSpec, k: &[usize]) -> Result<f64> {
    if k.len() != domain.n() || k.iter().any(|&ki| ki < 1) {
        return Err(KsError::InvalidMode(k.to_vec()));
    }
    Ok(k.iter()
        .zip(domain.lengths())
        .map(|(&ki, &l)| {
            let w = ki as f64 * PI / l;
            w * w
        })
        .sum())
}

/// `μ_k` for every mode of a resolution, shaped like the coefficient tensor.
pub fn mu_tensor(domain: &DomainSpec, resolution: &[usize]) -> ArrayD<f64> {
    let mut mu = ArrayD::<f64>::zeros(IxDyn(resolution));
    for (idx, v) in mu.indexed_iter_mut() {
        *v = (0..resolution.len())
            .map(|i| {
                let w = (idx[i] + 1) as f64 * PI / domain.length(i);
                w * w
            })
            .sum();
    }
    mu
}

/// Coefficients of a scalar field in the tensor basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    domain: DomainSpec,
    parity: Vec<Parity>,
    coeffs: ArrayD<f64>,
}

impl SpectralField {
    /// All-sine field from a coefficient tensor.
    pub fn new(domain: DomainSpec, coeffs: ArrayD<f64>) -> Result<Self> {
        let parity = vec![Parity::Sine; domain.n()];
        Self::with_parity(domain, parity, coeffs)
    }

    pub fn with_parity(
        domain: DomainSpec,
        parity: Vec<Parity>,
        coeffs: ArrayD<f64>,
    ) -> Result<Self> {
        validate_resolution(&domain, coeffs.shape())?;
        if parity.len() != domain.n() {
            return Err(KsError::InvalidParameter(format!(
                "parity has {} entries for a {}-dimensional domain",
                parity.len(),
                domain.n()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(KsError::InvalidParameter("non-finite coefficient".into()));
        }
        Ok(Self {
            domain,
            parity,
            coeffs,
        })
    }

    pub fn zeros(domain: DomainSpec, resolution: &[usize]) -> Result<Self> {
        validate_resolution(&domain, resolution)?;
        Self::new(domain, ArrayD::zeros(IxDyn(resolution)))
    }

    /// `amplitude * prod_i sin(k_i pi x_i / L_i)`.
    pub fn single_mode(
        domain: DomainSpec,
        resolution: &[usize],
        k: &[usize],
        amplitude: f64,
    ) -> Result<Self> {
        let mut f = Self::zeros(domain, resolution)?;
        f.set_mode(k, amplitude)?;
        Ok(f)
    }

    pub(crate) fn from_parts_unchecked(
        domain: DomainSpec,
        parity: Vec<Parity>,
        coeffs: ArrayD<f64>,
    ) -> Self {
        Self {
            domain,
            parity,
            coeffs,
        }
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn parity(&self) -> &[Parity] {
        &self.parity
    }

    pub fn resolution(&self) -> &[usize] {
        self.coeffs.shape()
    }

    pub fn coeffs(&self) -> &ArrayD<f64> {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> ArrayD<f64> {
        self.coeffs
    }

    pub fn is_all_sine(&self) -> bool {
        self.parity.iter().all(|p| *p == Parity::Sine)
    }

    fn mode_index(&self, k: &[usize]) -> Result<IxDyn> {
        if k.len() != self.domain.n()
            || k.iter()
                .zip(self.resolution())
                .any(|(&ki, &n)| ki < 1 || ki > n)
        {
            return Err(KsError::InvalidMode(k.to_vec()));
        }
        Ok(IxDyn(&k.iter().map(|ki| ki - 1).collect::<Vec<_>>()))
    }

    /// Coefficient of mode `k` (1-based wavenumbers).
    pub fn mode(&self, k: &[usize]) -> Result<f64> {
        Ok(self.coeffs[self.mode_index(k)?])
    }

    pub fn set_mode(&mut self, k: &[usize], value: f64) -> Result<()> {
        let idx = self.mode_index(k)?;
        self.coeffs[idx] = value;
        Ok(())
    }

    pub fn scaled(&self, factor: f64) -> SpectralField {
        self.map_coeffs(|c| c * factor)
    }

    fn map_coeffs(&self, f: impl Fn(f64) -> f64) -> SpectralField {
        SpectralField {
            domain: self.domain.clone(),
            parity: self.parity.clone(),
            coeffs: self.coeffs.mapv(f),
        }
    }

    fn check_compatible(&self, other: &SpectralField) -> Result<()> {
        if self.domain != other.domain || self.parity != other.parity {
            return Err(KsError::Incompatible(
                "fields differ in domain or basis family".into(),
            ));
        }
        if self.resolution() != other.resolution() {
            return Err(KsError::ShapeMismatch {
                expected: self.resolution().to_vec(),
                found: other.resolution().to_vec(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        self.check_compatible(other)?;
        Ok(SpectralField {
            domain: self.domain.clone(),
            parity: self.parity.clone(),
            coeffs: &self.coeffs + &other.coeffs,
        })
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        self.check_compatible(other)?;
        Ok(SpectralField {
            domain: self.domain.clone(),
            parity: self.parity.clone(),
            coeffs: &self.coeffs - &other.coeffs,
        })
    }

    pub fn mu(&self) -> ArrayD<f64> {
        mu_tensor(&self.domain, self.resolution())
    }

    /// `c_k -> -μ_k c_k`.
    pub fn laplacian(&self) -> SpectralField {
        let mu = self.mu();
        SpectralField {
            domain: self.domain.clone(),
            parity: self.parity.clone(),
            coeffs: &self.coeffs * &mu.mapv(|m| -m),
        }
    }

    /// `c_k -> μ_k² c_k`.
    pub fn biharmonic(&self) -> SpectralField {
        let mu = self.mu();
        SpectralField {
            domain: self.domain.clone(),
            parity: self.parity.clone(),
            coeffs: &self.coeffs * &mu.mapv(|m| m * m),
        }
    }

    /// Exact spectral `∂/∂x_axis`; flips the family along `axis`.
    pub fn derivative(&self, axis: usize) -> Result<SpectralField> {
        let n = self.domain.n();
        if axis >= n {
            return Err(KsError::InvalidAxis { axis, n });
        }
        let sign = match self.parity[axis] {
            Parity::Sine => 1.0,
            Parity::Cosine => -1.0,
        };
        let wave = PI / self.domain.length(axis);
        let mut coeffs = self.coeffs.clone();
        for (idx, c) in coeffs.indexed_iter_mut() {
            *c *= sign * wave * (idx[axis] + 1) as f64;
        }
        let mut parity = self.parity.clone();
        parity[axis] = parity[axis].flipped();
        Ok(SpectralField {
            domain: self.domain.clone(),
            parity,
            coeffs,
        })
    }

    /// `∂f/∂x_axis` sampled on the interior collocation nodes.
    pub fn gradient_component(&self, axis: usize) -> Result<GridField> {
        Ok(self.derivative(axis)?.synthesize())
    }

    /// Values on the closed grid `x_j = j L_i / M_i`, `j = 0..M_i`. Requires
    /// `M_i >= N_i + 1`.
    pub fn synthesize_extended(&self, intervals: &[usize]) -> ArrayD<f64> {
        assert_eq!(intervals.len(), self.domain.n());
        let mut work = self.coeffs.clone();
        for (axis, &m) in intervals.iter().enumerate() {
            let n = self.resolution()[axis];
            assert!(m > n, "need at least N+1 intervals along axis {axis}");
            work = match self.parity[axis] {
                Parity::Sine => {
                    let mut x = vec![0.0; m - 1];
                    let mut y = vec![0.0; m - 1];
                    map_axis(&work, axis, m + 1, |src, dst| {
                        x[..n].copy_from_slice(src);
                        x[n..].iter_mut().for_each(|v| *v = 0.0);
                        dst1(&x, &mut y);
                        dst[1..m].copy_from_slice(&y);
                    })
                }
                Parity::Cosine => {
                    let mut x = vec![0.0; m + 1];
                    map_axis(&work, axis, m + 1, |src, dst| {
                        x.iter_mut().for_each(|v| *v = 0.0);
                        for (k, c) in src.iter().enumerate() {
                            x[k + 1] = 0.5 * c;
                        }
                        dct1(&x, dst);
                    })
                }
            };
        }
        work
    }

    /// Values on the interior nodes `x_m = m L_i / (N_i + 1)`.
    pub fn synthesize(&self) -> GridField {
        let intervals: Vec<usize> = self.resolution().iter().map(|n| n + 1).collect();
        let ext = self.synthesize_extended(&intervals);
        let values = ext
            .slice_each_axis(|_| Slice::new(1, Some(-1), 1))
            .to_owned();
        GridField {
            domain: self.domain.clone(),
            values,
        }
    }

    /// Exact energies `Π(L_i/2) sum_k μ_k^s c_k²`, `s = 0..4`.
    pub fn norms(&self) -> Norms {
        let weight = parseval_weight(&self.domain);
        let mut acc = [0.0; 5];
        let res = self.resolution();
        for (idx, &c) in self.coeffs.indexed_iter() {
            if c == 0.0 {
                continue;
            }
            let mu: f64 = (0..res.len())
                .map(|i| {
                    let w = (idx[i] + 1) as f64 * PI / self.domain.length(i);
                    w * w
                })
                .sum();
            let mut p = c * c;
            for a in acc.iter_mut() {
                *a += p;
                p *= mu;
            }
        }
        Norms::from_array(acc.map(|v| v * weight))
    }

    /// Max `|f|` over the closed grid refined `oversample` times; a lower
    /// bound on the true supremum.
    pub fn sup_norm(&self, oversample: usize) -> f64 {
        let oversample = oversample.max(1);
        let intervals: Vec<usize> = self
            .resolution()
            .iter()
            .map(|n| oversample * (n + 1))
            .collect();
        self.synthesize_extended(&intervals)
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Exact L² projection onto the given families and resolution.
    pub fn project(&self, parity: &[Parity], resolution: &[usize]) -> Result<SpectralField> {
        validate_resolution(&self.domain, resolution)?;
        let mut work = self.coeffs.clone();
        for axis in 0..self.domain.n() {
            work = projection::project_axis(
                &work,
                axis,
                self.parity[axis],
                1,
                parity[axis],
                resolution[axis],
            );
        }
        Ok(SpectralField {
            domain: self.domain.clone(),
            parity: parity.to_vec(),
            coeffs: work,
        })
    }

    /// Exact `∫ f g dx` for fields of any families on the same domain.
    pub fn inner(&self, other: &SpectralField) -> Result<f64> {
        if self.domain != other.domain {
            return Err(KsError::Incompatible(
                "fields live on different domains".into(),
            ));
        }
        let projected = other.project(&self.parity, self.resolution())?;
        let dot: f64 = self
            .coeffs
            .iter()
            .zip(projected.coeffs.iter())
            .map(|(a, b)| a * b)
            .sum();
        Ok(dot * parseval_weight(&self.domain))
    }

    /// Exact `||f - g||²` for fields of any families.
    pub fn distance_sq(&self, other: &SpectralField) -> Result<f64> {
        if self.parity == other.parity && self.resolution() == other.resolution() {
            return Ok(self.sub(other)?.norms().l2);
        }
        let d = self.norms().l2 + other.norms().l2 - 2.0 * self.inner(other)?;
        Ok(d.max(0.0))
    }
}

/// `Π_i L_i / 2`, the squared norm of every basis function.
pub fn parseval_weight(domain: &DomainSpec) -> f64 {
    domain.lengths().iter().map(|l| 0.5 * l).product()
}

/// Values sampled on interior collocation nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    domain: DomainSpec,
    values: ArrayD<f64>,
}

impl GridField {
    pub fn new(domain: DomainSpec, values: ArrayD<f64>) -> Result<Self> {
        validate_resolution(&domain, values.shape())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(KsError::InvalidParameter("non-finite grid value".into()));
        }
        Ok(Self { domain, values })
    }

    /// Samples `f` at the interior nodes of the given resolution.
    pub fn from_fn(
        domain: DomainSpec,
        resolution: &[usize],
        f: impl Fn(&[f64]) -> f64,
    ) -> Result<Self> {
        validate_resolution(&domain, resolution)?;
        let mut values = ArrayD::<f64>::zeros(IxDyn(resolution));
        let mut x = vec![0.0; resolution.len()];
        for (idx, v) in values.indexed_iter_mut() {
            for i in 0..resolution.len() {
                x[i] = node(domain.length(i), resolution[i], idx[i] + 1);
            }
            *v = f(&x);
        }
        Self::new(domain, values)
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn resolution(&self) -> &[usize] {
        self.values.shape()
    }

    pub fn values(&self) -> &ArrayD<f64> {
        &self.values
    }

    /// Position of node `m` (1-based) along an axis with `n` interior nodes.
    pub fn node(&self, axis: usize, m: usize) -> f64 {
        node(self.domain.length(axis), self.resolution()[axis], m)
    }
}

fn node(length: f64, n: usize, m: usize) -> f64 {
    m as f64 * length / (n + 1) as f64
}

/// Inverse of [`SpectralField::synthesize`] for all-sine fields.
pub fn analyze(grid: &GridField) -> Result<SpectralField> {
    let domain = grid.domain.clone();
    let mut work = grid.values.clone();
    for axis in 0..domain.n() {
        let n = work.shape()[axis];
        let scale = 2.0 / (n + 1) as f64;
        work = map_axis(&work, axis, n, |src, dst| {
            dst1(src, dst);
            dst.iter_mut().for_each(|v| *v *= scale);
        });
    }
    SpectralField::new(domain, work)
}
