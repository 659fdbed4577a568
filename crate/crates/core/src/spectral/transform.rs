//! Type-I sine and cosine transforms built on `rustfft`, plus helpers for
//! applying 1D kernels along one axis of an n-dimensional array.
//!
//! Both transforms are unnormalized:
//!
//! * `dst1`: `y_k = sum_{m=1}^{N} x_m sin(pi k m / (N+1))`, `k = 1..N`
//! * `dct1`: `y_k = x_0 + (-1)^k x_M + 2 sum_{m=1}^{M-1} x_m cos(pi k m / M)`,
//!   `k = 0..M`
//!
//! so that `dst1(dst1(x)) = (N+1)/2 x` and `dct1(dct1(x)) = 2M x`.
//!
//! Results are bitwise deterministic: every lane is processed sequentially
//! with a plan that depends only on its length.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use ndarray::{ArrayD, ArrayViewMut1, Axis, IxDyn, Zip};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANS: RefCell<(FftPlanner<f64>, HashMap<usize, Arc<dyn Fft<f64>>>)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plan(len: usize) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cell| {
        let mut guard = cell.borrow_mut();
        let (planner, cache) = &mut *guard;
        cache
            .entry(len)
            .or_insert_with(|| planner.plan_fft_forward(len))
            .clone()
    })
}

/// Unnormalized DST-I. `x` and `y` have the same length `N >= 1`.
pub fn dst1(x: &[f64], y: &mut [f64]) {
    let n = x.len();
    assert_eq!(n, y.len());
    if n == 0 {
        return;
    }
    let len = 2 * (n + 1);
    let mut buf = vec![Complex::new(0.0, 0.0); len];
    for (m, &v) in x.iter().enumerate() {
        buf[m + 1].re = v;
        buf[len - m - 1].re = -v;
    }
    plan(len).process(&mut buf);
    for (k, out) in y.iter_mut().enumerate() {
        *out = -0.5 * buf[k + 1].im;
    }
}

/// Unnormalized DCT-I. `x` and `y` have the same length `M + 1 >= 2`.
pub fn dct1(x: &[f64], y: &mut [f64]) {
    let np1 = x.len();
    assert_eq!(np1, y.len());
    assert!(np1 >= 2, "dct1 needs at least two points");
    let m = np1 - 1;
    let len = 2 * m;
    let mut buf = vec![Complex::new(0.0, 0.0); len];
    buf[0].re = x[0];
    buf[m].re = x[m];
    for j in 1..m {
        buf[j].re = x[j];
        buf[len - j].re = x[j];
    }
    plan(len).process(&mut buf);
    for (k, out) in y.iter_mut().enumerate() {
        *out = buf[k].re;
    }
}

/// Applies `kernel(input_lane, output_lane)` to every 1D lane along `axis`,
/// producing an array whose extent along `axis` is `out_len`.
pub fn map_axis<F>(input: &ArrayD<f64>, axis: usize, out_len: usize, mut kernel: F) -> ArrayD<f64>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let mut shape = input.shape().to_vec();
    shape[axis] = out_len;
    let mut out = ArrayD::<f64>::zeros(IxDyn(&shape));
    let in_len = input.shape()[axis];
    let mut src = vec![0.0; in_len];
    let mut dst = vec![0.0; out_len];
    Zip::from(input.lanes(Axis(axis)))
        .and(out.lanes_mut(Axis(axis)))
        .for_each(|lane_in, mut lane_out: ArrayViewMut1<f64>| {
            for (s, v) in src.iter_mut().zip(lane_in.iter()) {
                *s = *v;
            }
            dst.iter_mut().for_each(|d| *d = 0.0);
            kernel(&src, &mut dst);
            for (o, d) in lane_out.iter_mut().zip(dst.iter()) {
                *o = *d;
            }
        });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn naive_dst1(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (1..=n)
            .map(|k| {
                (1..=n)
                    .map(|m| x[m - 1] * (PI * (k * m) as f64 / (n + 1) as f64).sin())
                    .sum()
            })
            .collect()
    }

    fn naive_dct1(x: &[f64]) -> Vec<f64> {
        let m = x.len() - 1;
        (0..=m)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                x[0] + sign * x[m]
                    + 2.0
                        * (1..m)
                            .map(|j| x[j] * (PI * (k * j) as f64 / m as f64).cos())
                            .sum::<f64>()
            })
            .collect()
    }

    fn pseudo(n: usize, salt: u64) -> Vec<f64> {
        (0..n)
            .map(|i| (((i as u64 + 1) * 2654435761 + salt) % 1000) as f64 / 500.0 - 1.0)
            .collect()
    }

    #[test]
    fn dst1_matches_direct_sum() {
        for n in [1, 2, 3, 7, 16, 31] {
            let x = pseudo(n, 3);
            let mut y = vec![0.0; n];
            dst1(&x, &mut y);
            for (a, b) in y.iter().zip(naive_dst1(&x)) {
                assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()), "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn dct1_matches_direct_sum() {
        for np1 in [2, 3, 4, 9, 17, 33] {
            let x = pseudo(np1, 11);
            let mut y = vec![0.0; np1];
            dct1(&x, &mut y);
            for (a, b) in y.iter().zip(naive_dct1(&x)) {
                assert!(
                    (a - b).abs() < 1e-12 * (1.0 + b.abs()),
                    "len={np1}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn transforms_are_involutions_up_to_scale() {
        let x = pseudo(12, 5);
        let mut y = vec![0.0; 12];
        let mut z = vec![0.0; 12];
        dst1(&x, &mut y);
        dst1(&y, &mut z);
        for (a, b) in x.iter().zip(z.iter()) {
            assert!((a * 6.5 - b).abs() < 1e-12);
        }
        let x = pseudo(9, 7);
        let mut y = vec![0.0; 9];
        let mut z = vec![0.0; 9];
        dct1(&x, &mut y);
        dct1(&y, &mut z);
        for (a, b) in x.iter().zip(z.iter()) {
            assert!((a * 16.0 - b).abs() < 1e-12);
        }
    }
}
