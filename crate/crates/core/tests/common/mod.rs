//! Independent oracles shared by the integration tests: direct evaluation
//! of a basis expansion at a point and tensor Gauss–Legendre quadrature.

#![allow(dead_code)]

use std::f64::consts::PI;

use ksbox::{Parity, SpectralField};

/// `f(x)` by summing the expansion term by term.
pub fn eval(f: &SpectralField, x: &[f64]) -> f64 {
    let d = f.domain();
    f.coeffs()
        .indexed_iter()
        .map(|(idx, c)| {
            let mut v = *c;
            for (i, p) in f.parity().iter().enumerate() {
                let arg = (idx[i] + 1) as f64 * PI * x[i] / d.length(i);
                v *= match p {
                    Parity::Sine => arg.sin(),
                    Parity::Cosine => arg.cos(),
                };
            }
            v
        })
        .sum()
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Composite nodes and weights on `[0, length]`.
pub fn axis_rule(length: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let base = gauss_legendre(order);
    let h = length / panels as f64;
    (0..panels)
        .flat_map(|p| {
            base.iter()
                .map(move |(x, w)| (h * (p as f64 + 0.5 * (x + 1.0)), 0.5 * h * w))
        })
        .collect()
}

/// `∫ g` over the 2D box `(0,l0) x (0,l1)`.
pub fn integrate_2d(lengths: &[f64], panels: usize, g: impl Fn(&[f64]) -> f64) -> f64 {
    let r0 = axis_rule(lengths[0], panels, 8);
    let r1 = axis_rule(lengths[1], panels, 8);
    let mut acc = 0.0;
    for (x, wx) in &r0 {
        for (y, wy) in &r1 {
            acc += wx * wy * g(&[*x, *y]);
        }
    }
    acc
}
