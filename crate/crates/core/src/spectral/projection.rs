//! Exact L² projections between the sine and cosine families on `(0, L)`.
//!
//! With `s_k(x) = sin(k pi x / L)` and `c_m(x) = cos(m pi x / L)`, the
//! projection coefficient of a source function onto a target basis element
//! is `(2/L) * integral_0^L target_k * source_m dx`. Mixed-family integrals
//! have the closed form
//!
//! ```text
//! (2/L) ∫ s_k c_m dx = (2/pi) k (1 - (-1)^(k+m)) / (k^2 - m^2),   k != m
//! ```
//!
//! and vanish for `k = m`.

use std::f64::consts::FRAC_2_PI;

use ndarray::ArrayD;

use super::transform::{dct1, map_axis};
use super::Parity;

/// `(2/L) ∫_0^L target_k(x) source_m(x) dx` for `k >= 1`. `m = 0` is only
/// meaningful for a cosine source (the constant).
pub fn coupling(target: Parity, k: usize, source: Parity, m: usize) -> f64 {
    match (target, source) {
        (Parity::Sine, Parity::Sine) | (Parity::Cosine, Parity::Cosine) => {
            if k == m {
                1.0
            } else {
                0.0
            }
        }
        (Parity::Sine, Parity::Cosine) => mixed(k, m),
        (Parity::Cosine, Parity::Sine) => mixed(m, k),
    }
}

// (2/L) ∫ sin(k·) cos(m·)
fn mixed(k: usize, m: usize) -> f64 {
    if (k + m).is_multiple_of(2) {
        return 0.0;
    }
    let (kf, mf) = (k as f64, m as f64);
    FRAC_2_PI * 2.0 * kf / (kf * kf - mf * mf)
}

/// Dense projection matrix, row-major `[k - 1][m - offset]`, mapping
/// `source_len` source coefficients (first index `offset`, 0 or 1) onto
/// target modes `1..=target_len`.
pub fn coupling_matrix(
    target: Parity,
    target_len: usize,
    source: Parity,
    source_len: usize,
    offset: usize,
) -> Vec<f64> {
    let mut mat = vec![0.0; target_len * source_len];
    for k in 1..=target_len {
        for j in 0..source_len {
            mat[(k - 1) * source_len + j] = coupling(target, k, source, j + offset);
        }
    }
    mat
}

/// Projects coefficients along `axis` from the `source` family onto the
/// first `target_len` modes of the `target` family.
pub fn project_axis(
    coeffs: &ArrayD<f64>,
    axis: usize,
    source: Parity,
    offset: usize,
    target: Parity,
    target_len: usize,
) -> ArrayD<f64> {
    let source_len = coeffs.shape()[axis];
    if source == target && offset == 1 {
        // same family: truncate or zero-pad
        return map_axis(coeffs, axis, target_len, |src, dst| {
            let n = src.len().min(dst.len());
            dst[..n].copy_from_slice(&src[..n]);
        });
    }
    let mat = coupling_matrix(target, target_len, source, source_len, offset);
    map_axis(coeffs, axis, target_len, |src, dst| {
        for (row, out) in mat.chunks_exact(source_len).zip(dst.iter_mut()) {
            *out = row.iter().zip(src).map(|(a, b)| a * b).sum();
        }
    })
}

/// Cosine-series coefficients `a_m`, `m = 0..M`, of samples taken at
/// `x_j = j L / M`, `j = 0..M`, along `axis`. Exact for cosine series whose
/// highest mode does not exceed `M`.
pub fn cosine_analysis_axis(values: &ArrayD<f64>, axis: usize) -> ArrayD<f64> {
    let np1 = values.shape()[axis];
    let m = np1 - 1;
    let scale = 1.0 / m as f64;
    map_axis(values, axis, np1, |src, dst| {
        dct1(src, dst);
        for v in dst.iter_mut() {
            *v *= scale;
        }
        dst[0] *= 0.5;
        dst[m] *= 0.5;
    })
}

/// Galerkin projection of a function sampled on the closed extended grid
/// (`M_i + 1` points per axis, endpoints included) onto the tensor basis
/// with the given per-axis families and mode counts. The sampled function
/// must be a cosine series in every axis with mode numbers `<= M_i`; the
/// product of two fields of resolution `N` sampled with `M_i >= 2 N_i` is.
pub fn project_cosine_samples(
    values: &ArrayD<f64>,
    parity: &[Parity],
    resolution: &[usize],
) -> ArrayD<f64> {
    let mut work = values.clone();
    for axis in 0..parity.len() {
        let cos = cosine_analysis_axis(&work, axis);
        work = project_axis(
            &cos,
            axis,
            Parity::Cosine,
            0,
            parity[axis],
            resolution[axis],
        );
    }
    work
}
