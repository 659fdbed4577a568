//! Exponential time differencing for diagonal stiff systems
//! `u_t = s u + N(u)`, with per-mode symbol `s_k = μ_k - μ_k²`.

use ndarray::{ArrayD, Zip};
use serde::{Deserialize, Serialize};

/// Below this `|z|` the φ-functions are summed as Taylor series.
pub const SERIES_SWITCH: f64 = 1e-2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Fourth-order exponential Runge–Kutta in Krogstad's form.
    #[default]
    Etdrk4,
    /// Exponential Euler.
    Etd1,
    /// The Cox–Matthews fourth-order scheme. It loses order on stiff modes
    /// driven by forcing that does not vanish on the boundary.
    #[serde(rename = "cox-matthews")]
    CoxMatthews,
    /// Hochbruck–Ostermann five-stage scheme of stiff order four.
    #[serde(rename = "hochbruck-ostermann")]
    HochbruckOstermann,
}

impl std::str::FromStr for Scheme {
    type Err = crate::error::KsError;

    fn from_str(s: &str) -> crate::error::Result<Self> {
        match s {
            "etdrk4" => Ok(Scheme::Etdrk4),
            "etd1" => Ok(Scheme::Etd1),
            "cox-matthews" => Ok(Scheme::CoxMatthews),
            "hochbruck-ostermann" => Ok(Scheme::HochbruckOstermann),
            other => Err(crate::error::KsError::InvalidParameter(format!(
                "unknown scheme `{other}`"
            ))),
        }
    }
}

/// `[φ1(z), φ2(z), φ3(z)]`, `φ_l(z) = sum_k z^k / (k + l)!`.
pub fn phi_functions(z: f64) -> [f64; 3] {
    if z.abs() < SERIES_SWITCH {
        let mut out = [0.0; 3];
        for (l, slot) in out.iter_mut().enumerate() {
            let l = l + 1;
            // 1/l!
            let mut term = 1.0 / (1..=l).map(|v| v as f64).product::<f64>();
            let mut sum = 0.0;
            for k in 0..12 {
                sum += term;
                term *= z / (k + l + 1) as f64;
            }
            *slot = sum;
        }
        out
    } else {
        let em1 = z.exp_m1();
        let p1 = em1 / z;
        let p2 = (em1 - z) / (z * z);
        let p3 = (em1 - z - 0.5 * z * z) / (z * z * z);
        [p1, p2, p3]
    }
}

/// Per-mode coefficient tensors for one step size `h`, `z = s h`.
#[derive(Clone, Debug)]
pub struct EtdCoefficients {
    pub h: f64,
    pub e: ArrayD<f64>,
    pub e2: ArrayD<f64>,
    /// `h φ_l(z)`, `l = 1, 2, 3`
    pub p: [ArrayD<f64>; 3],
    /// `(h/2) φ_l(z/2)`, `l = 1, 2, 3`
    pub q: [ArrayD<f64>; 3],
}

impl EtdCoefficients {
    pub fn new(symbol: &ArrayD<f64>, h: f64) -> Self {
        let table = |step: f64| -> [ArrayD<f64>; 3] {
            let vals = symbol.mapv(|s| phi_functions(s * step));
            std::array::from_fn(|l| vals.mapv(|v| step * v[l]))
        };
        Self {
            h,
            e: symbol.mapv(|s| (s * h).exp()),
            e2: symbol.mapv(|s| (0.5 * s * h).exp()),
            p: table(h),
            q: table(0.5 * h),
        }
    }
}

/// `decay * u + sum_i w_i n_i`, mode by mode.
fn combine(
    u: &ArrayD<f64>,
    decay: &ArrayD<f64>,
    terms: &[(&ArrayD<f64>, &ArrayD<f64>)],
) -> ArrayD<f64> {
    let mut out = u * decay;
    for (w, n) in terms {
        Zip::from(&mut out)
            .and(*w)
            .and(*n)
            .for_each(|o, &w, &n| *o += w * n);
    }
    out
}

fn weights(f: impl Fn(f64, f64, f64) -> f64, phi: &[ArrayD<f64>; 3]) -> ArrayD<f64> {
    let mut out = phi[0].clone();
    Zip::from(&mut out)
        .and(&phi[1])
        .and(&phi[2])
        .for_each(|o, &b, &c| *o = f(*o, b, c));
    out
}

/// One step of the chosen scheme. `rhs` maps the stacked components to
/// their nonlinear terms; `None` disables the nonlinearity.
pub fn etd_step<F>(
    u: &[ArrayD<f64>],
    coef: &EtdCoefficients,
    scheme: Scheme,
    rhs: Option<&F>,
) -> Vec<ArrayD<f64>>
where
    F: Fn(&[ArrayD<f64>]) -> Vec<ArrayD<f64>>,
{
    let Some(rhs) = rhs else {
        return u.iter().map(|c| c * &coef.e).collect();
    };
    let m = u.len();
    let diff = |a: &[ArrayD<f64>], b: &[ArrayD<f64>]| -> Vec<ArrayD<f64>> {
        a.iter().zip(b).map(|(a, b)| a - b).collect()
    };
    // final-stage weights shared by the fourth-order schemes
    let b1 = || weights(|p1, p2, p3| p1 - 3.0 * p2 + 4.0 * p3, &coef.p);
    let b4 = || weights(|_, p2, p3| -p2 + 4.0 * p3, &coef.p);
    match scheme {
        Scheme::Etd1 => {
            let nu = rhs(u);
            (0..m)
                .map(|j| combine(&u[j], &coef.e, &[(&coef.p[0], &nu[j])]))
                .collect()
        }
        Scheme::CoxMatthews => {
            let nu = rhs(u);
            let a: Vec<_> = (0..m)
                .map(|j| combine(&u[j], &coef.e2, &[(&coef.q[0], &nu[j])]))
                .collect();
            let na = rhs(&a);
            let b: Vec<_> = (0..m)
                .map(|j| combine(&u[j], &coef.e2, &[(&coef.q[0], &na[j])]))
                .collect();
            let nb = rhs(&b);
            let forcing: Vec<_> = (0..m).map(|j| &nb[j] * 2.0 - &nu[j]).collect();
            let c: Vec<_> = (0..m)
                .map(|j| combine(&a[j], &coef.e2, &[(&coef.q[0], &forcing[j])]))
                .collect();
            let nc = rhs(&c);
            let w23 = weights(|_, p2, p3| 2.0 * p2 - 4.0 * p3, &coef.p);
            let (w1, w4) = (b1(), b4());
            (0..m)
                .map(|j| {
                    combine(
                        &u[j],
                        &coef.e,
                        &[(&w1, &nu[j]), (&w23, &na[j]), (&w23, &nb[j]), (&w4, &nc[j])],
                    )
                })
                .collect()
        }
        Scheme::Etdrk4 => {
            let nu = rhs(u);
            let a: Vec<_> = (0..m)
                .map(|j| combine(&u[j], &coef.e2, &[(&coef.q[0], &nu[j])]))
                .collect();
            let na = rhs(&a);
            let da = diff(&na, &nu);
            let two_q2 = &coef.q[1] * 2.0;
            let b: Vec<_> = (0..m)
                .map(|j| combine(&u[j], &coef.e2, &[(&coef.q[0], &nu[j]), (&two_q2, &da[j])]))
                .collect();
            let nb = rhs(&b);
            let db = diff(&nb, &nu);
            let two_p2 = &coef.p[1] * 2.0;
            let c: Vec<_> = (0..m)
                .map(|j| combine(&u[j], &coef.e, &[(&coef.p[0], &nu[j]), (&two_p2, &db[j])]))
                .collect();
            let nc = rhs(&c);
            let w23 = weights(|_, p2, p3| 2.0 * p2 - 4.0 * p3, &coef.p);
            let (w1, w4) = (b1(), b4());
            (0..m)
                .map(|j| {
                    combine(
                        &u[j],
                        &coef.e,
                        &[(&w1, &nu[j]), (&w23, &na[j]), (&w23, &nb[j]), (&w4, &nc[j])],
                    )
                })
                .collect()
        }
        Scheme::HochbruckOstermann => {
            let nu = rhs(u);
            let u2: Vec<_> = (0..m)
                .map(|j| combine(&u[j], &coef.e2, &[(&coef.q[0], &nu[j])]))
                .collect();
            let n2 = rhs(&u2);
            let d2 = diff(&n2, &nu);
            let two_q2 = &coef.q[1] * 2.0;
            let u3: Vec<_> = (0..m)
                .map(|j| combine(&u[j], &coef.e2, &[(&coef.q[0], &nu[j]), (&two_q2, &d2[j])]))
                .collect();
            let n3 = rhs(&u3);
            let d3 = diff(&n3, &nu);
            let d23: Vec<_> = (0..m).map(|j| &d2[j] + &d3[j]).collect();
            let u4: Vec<_> = (0..m)
                .map(|j| {
                    combine(
                        &u[j],
                        &coef.e,
                        &[(&coef.p[0], &nu[j]), (&coef.p[1], &d23[j])],
                    )
                })
                .collect();
            let n4 = rhs(&u4);
            let d4 = diff(&n4, &nu);
            // h a52 = h a53 = h(φ2(z/2)/2 - φ3(z) + φ2(z)/4 - φ3(z/2)/2)
            let a52 = &coef.q[1] - &coef.p[2] + &coef.p[1] * 0.25 - &coef.q[2];
            // h a54 = h φ2(z/2)/4 - h a52
            let a54 = &coef.q[1] * 0.5 - &a52;
            let u5: Vec<_> = (0..m)
                .map(|j| {
                    combine(
                        &u[j],
                        &coef.e2,
                        &[(&coef.q[0], &nu[j]), (&a52, &d23[j]), (&a54, &d4[j])],
                    )
                })
                .collect();
            let n5 = rhs(&u5);
            let w5 = weights(|_, p2, p3| 4.0 * p2 - 8.0 * p3, &coef.p);
            let (w1, w4) = (b1(), b4());
            (0..m)
                .map(|j| {
                    combine(
                        &u[j],
                        &coef.e,
                        &[(&w1, &nu[j]), (&w4, &n4[j]), (&w5, &n5[j])],
                    )
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn closed(z: f64) -> [f64; 3] {
        let e = z.exp();
        [
            (e - 1.0) / z,
            (e - 1.0 - z) / (z * z),
            (e - 1.0 - z - z * z / 2.0) / (z * z * z),
        ]
    }

    #[test]
    fn phi_functions_at_zero() {
        let p = phi_functions(0.0);
        assert_eq!(p, [1.0, 0.5, 1.0 / 6.0]);
    }

    #[test]
    fn series_and_closed_form_agree_near_switch() {
        for z in [-0.5, -0.3, 1.0, 0.3, -3.0] {
            let a = phi_functions(z);
            let b = closed(z);
            for i in 0..3 {
                assert!(
                    (a[i] - b[i]).abs() < 1e-12 * b[i].abs(),
                    "z={z} l={}",
                    i + 1
                );
            }
        }
        // continuity across the switch
        let lo = phi_functions(SERIES_SWITCH * (1.0 - 1e-12));
        let hi = phi_functions(SERIES_SWITCH * (1.0 + 1e-12));
        for i in 0..3 {
            assert!((lo[i] - hi[i]).abs() < 1e-11);
        }
    }

    #[test]
    fn stiff_limits() {
        let [p1, p2, p3] = phi_functions(-1e6);
        assert!((p1 - 1e-6).abs() < 1e-12);
        assert!((p2 - 1e-6).abs() < 1e-11);
        assert!((p3 - 0.5e-6).abs() < 1e-11);
    }

    /// `u' = λu + u²` has `1/u = (1/u0 + 1/λ) e^{-λt} - 1/λ`.
    fn bernoulli_error(scheme: Scheme, lambda: f64, h: f64) -> f64 {
        let (u0, t_end) = (0.5, 1.0);
        let symbol = ArrayD::from_elem(ndarray::IxDyn(&[1]), lambda);
        let coef = EtdCoefficients::new(&symbol, h);
        let rhs = |u: &[ArrayD<f64>]| vec![u[0].mapv(|v| v * v)];
        let mut u = vec![ArrayD::from_elem(ndarray::IxDyn(&[1]), u0)];
        for _ in 0..(t_end / h).round() as usize {
            u = etd_step(&u, &coef, scheme, Some(&rhs));
        }
        let exact = 1.0 / ((1.0 / u0 + 1.0 / lambda) * (-lambda * t_end).exp() - 1.0 / lambda);
        (u[0][[0]] - exact).abs()
    }

    #[test]
    fn convergence_orders_on_scalar_ode() {
        for (scheme, order) in [
            (Scheme::Etd1, 1.0),
            (Scheme::Etdrk4, 4.0),
            (Scheme::CoxMatthews, 4.0),
            (Scheme::HochbruckOstermann, 4.0),
        ] {
            let e1 = bernoulli_error(scheme, -2.0, 0.05);
            let e2 = bernoulli_error(scheme, -2.0, 0.025);
            let observed = (e1 / e2).log2();
            assert!(
                (observed - order).abs() < 0.25,
                "{scheme:?}: order {observed}"
            );
        }
    }

    #[test]
    fn linear_part_is_exact() {
        let symbol = ArrayD::from_elem(ndarray::IxDyn(&[2]), -3.0);
        let coef = EtdCoefficients::new(&symbol, 0.7);
        let zero = |u: &[ArrayD<f64>]| vec![u[0].mapv(|_| 0.0)];
        let u = vec![ArrayD::from_elem(ndarray::IxDyn(&[2]), 1.0)];
        for scheme in [
            Scheme::Etd1,
            Scheme::Etdrk4,
            Scheme::CoxMatthews,
            Scheme::HochbruckOstermann,
        ] {
            let out = etd_step(&u, &coef, scheme, Some(&zero));
            assert!((out[0][[0]] - (-2.1f64).exp()).abs() < 1e-15);
        }
    }
}
