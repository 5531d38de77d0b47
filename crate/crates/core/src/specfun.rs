//! Log-gamma, Jacobi polynomials `P_n^{(beta, gamma)}` and Gauss-Jacobi quadrature.
//!
//! Convention: `beta` is the exponent attached to `(1 - t)` and `gamma` the one
//! attached to `(1 + t)`, i.e. the orthogonality weight is `(1-t)^beta (1+t)^gamma`.

use crate::error::{Error, Result};
use crate::tridiag::SymTridiag;

/// `ln Gamma(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 || !x.is_finite() {
        return Err(Error::Domain {
            name: "x",
            requirement: "finite and > 0",
            value: x,
        });
    }
    Ok(lg(x))
}

/// Unchecked `ln Gamma` for arguments the caller has already shown to be positive.
pub(crate) fn lg(x: f64) -> f64 {
    debug_assert!(x > 0.0, "ln_gamma({x})");
    // exact zeros at 1 and 2 keep normalisation ratios exact at n = 0
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    statrs::function::gamma::ln_gamma(x)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JacobiParams {
    pub beta: f64,
    pub gamma_: f64,
}

impl JacobiParams {
    pub fn new(beta: f64, gamma_: f64) -> Result<Self> {
        for (name, v) in [("beta", beta), ("gamma", gamma_)] {
            if v.is_nan() || v <= -1.0 || !v.is_finite() {
                return Err(Error::Domain {
                    name,
                    requirement: "> -1",
                    value: v,
                });
            }
        }
        Ok(Self { beta, gamma_ })
    }

    fn shifted(&self) -> Self {
        Self {
            beta: self.beta + 1.0,
            gamma_: self.gamma_ + 1.0,
        }
    }
}

/// `P_0(t), ..., P_n(t)` by the three-term recurrence.
pub fn jacobi_sequence(n: usize, jp: &JacobiParams, t: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    jacobi_fill(jp, t, n + 1, &mut out);
    out
}

/// Appends `P_0 .. P_{count-1}` at `t` to `out`.
pub(crate) fn jacobi_fill(jp: &JacobiParams, t: f64, count: usize, out: &mut Vec<f64>) {
    jacobi_fill_split(jp, 0.5 * (1.0 + t), 0.5 * (1.0 - t), count, out)
}

/// Same as [`jacobi_fill`] with `u = (1+t)/2` and `v = (1-t)/2` supplied
/// separately, so callers that know both accurately lose nothing near `t = +-1`.
///
/// The usual `t`-form subtracts quantities of size `beta^2` to form O(beta)
/// coefficients, which for large exponents turns into noise near the endpoints.
/// Expanding about the nearer endpoint avoids that; the far half uses the
/// reflection `P_n^(b,g)(t) = (-1)^n P_n^(g,b)(-t)`.
pub(crate) fn jacobi_fill_split(jp: &JacobiParams, u: f64, v: f64, count: usize, out: &mut Vec<f64>) {
    if u <= v {
        fill_about_minus_one(jp.beta, jp.gamma_, u, count, out);
    } else {
        let start = out.len();
        fill_about_minus_one(jp.gamma_, jp.beta, v, count, out);
        for p in out[start..].iter_mut().skip(1).step_by(2) {
            *p = -*p;
        }
    }
}

fn fill_about_minus_one(a: f64, b: f64, u: f64, count: usize, out: &mut Vec<f64>) {
    if count == 0 {
        return;
    }
    out.push(1.0);
    if count == 1 {
        return;
    }
    let mut p_prev = 1.0;
    let mut p = (a + b + 2.0) * u - (b + 1.0);
    out.push(p);
    let ab = a + b;
    for k in 2..count {
        let k = k as f64;
        let c = 2.0 * k + ab;
        let m = 2.0 * k - 1.0 + b;
        // c(c-2) t + a^2 - b^2 with t = 2u - 1
        let linear = 2.0 * c * (c - 2.0) * u - (m * (2.0 * a + m) + (b - 1.0) * (b + 1.0));
        let denom = 2.0 * k * (k + ab) * (c - 2.0);
        let next = ((c - 1.0) * linear * p - 2.0 * (k + a - 1.0) * (k + b - 1.0) * c * p_prev) / denom;
        p_prev = p;
        p = next;
        out.push(p);
    }
}

pub fn jacobi_p(n: usize, jp: &JacobiParams, t: f64) -> f64 {
    *jacobi_sequence(n, jp, t).last().expect("non-empty")
}

/// `d/dt P_n^{(b,g)} = (n + b + g + 1)/2 * P_{n-1}^{(b+1, g+1)}`.
pub fn jacobi_derivative(n: usize, jp: &JacobiParams, t: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    0.5 * (n as f64 + jp.beta + jp.gamma_ + 1.0) * jacobi_p(n - 1, &jp.shifted(), t)
}

/// Left side of the raising relation
/// `{(2n+b+g+2)(1-t^2) d/dt - (n+b+g+1)[b-g+(2n+b+g+2)t]} P_n`,
/// which equals `-2(n+1)(n+b+g+1) P_{n+1}`.
pub fn jacobi_raise_rhs(n: usize, jp: &JacobiParams, t: f64) -> f64 {
    let (b, g) = (jp.beta, jp.gamma_);
    let nf = n as f64;
    let c = 2.0 * nf + b + g + 2.0;
    c * (1.0 - t * t) * jacobi_derivative(n, jp, t) - (nf + b + g + 1.0) * (b - g + c * t) * jacobi_p(n, jp, t)
}

/// Gauss-Jacobi rule for the weight `(1-t)^beta (1+t)^gamma` on `[-1, 1]`.
///
/// Weights are kept as logarithms: for large `beta` the factor `2^(beta+gamma+1)`
/// overflows long before the integrands of interest do.
#[derive(Clone, Debug)]
pub struct GaussJacobi {
    pub params: JacobiParams,
    pub nodes: Vec<f64>,
    pub ln_weights: Vec<f64>,
}

const NEWTON_TOL: f64 = 1e-14;
const NEWTON_MAX_ITER: usize = 100;

impl GaussJacobi {
    /// `m`-point rule, exact for polynomials of degree `<= 2m - 1`.
    pub fn new(m: usize, jp: JacobiParams) -> Result<Self> {
        if m == 0 {
            return Err(Error::GridTooShort { len: 0, min: 1 });
        }
        let (a, b) = (jp.beta, jp.gamma_);
        let ab = a + b;
        // orthonormal-polynomial Jacobi matrix supplies the initial guesses
        let diag: Vec<f64> = (0..m)
            .map(|k| {
                let k = k as f64;
                if k == 0.0 {
                    (b - a) / (ab + 2.0)
                } else {
                    (b * b - a * a) / ((2.0 * k + ab) * (2.0 * k + ab + 2.0))
                }
            })
            .collect();
        let off: Vec<f64> = (1..m)
            .map(|k| {
                let k = k as f64;
                let c = 2.0 * k + ab;
                let num = 4.0 * k * (k + a) * (k + b) * (k + ab);
                let den = c * c * (c + 1.0) * (c - 1.0);
                if k == 1.0 {
                    // the general formula is 0/0 when a + b = -1
                    (4.0 * (1.0 + a) * (1.0 + b) / ((ab + 2.0).powi(2) * (ab + 3.0))).sqrt()
                } else {
                    (num / den).sqrt()
                }
            })
            .collect();
        let guesses = SymTridiag::new(diag, off)?.lowest_eigenvalues(m)?;

        let mf = m as f64;
        let ln_const = (ab + 1.0) * std::f64::consts::LN_2 + lg(mf + a + 1.0) + lg(mf + b + 1.0)
            - lg(mf + ab + 1.0)
            - lg(mf + 1.0);
        let mut nodes = Vec::with_capacity(m);
        let mut ln_weights = Vec::with_capacity(m);
        for (i, &x0) in guesses.iter().enumerate() {
            let mut x = x0.clamp(-1.0 + 1e-300, 1.0 - f64::EPSILON);
            let mut converged = false;
            for _ in 0..NEWTON_MAX_ITER {
                let p = jacobi_p(m, &jp, x);
                let dp = jacobi_derivative(m, &jp, x);
                let dx = p / dp;
                x -= dx;
                if !x.is_finite() {
                    break;
                }
                if dx.abs() <= NEWTON_TOL {
                    converged = true;
                    break;
                }
            }
            if !converged || !(-1.0..1.0).contains(&x) {
                return Err(Error::QuadratureNewton { index: i });
            }
            let dp = jacobi_derivative(m, &jp, x);
            nodes.push(x);
            ln_weights.push(ln_const - (1.0 - x * x).ln() - 2.0 * dp.abs().ln());
        }
        Ok(Self {
            params: jp,
            nodes,
            ln_weights,
        })
    }

    /// `sum_i exp(ln_scale + ln w_i) g(t_i)`.
    pub fn integrate_scaled(&self, ln_scale: f64, mut g: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.ln_weights)
            .map(|(&t, &lw)| (ln_scale + lw).exp() * g(t))
            .sum()
    }

    pub fn integrate(&self, g: impl FnMut(f64) -> f64) -> f64 {
        self.integrate_scaled(0.0, g)
    }
}
