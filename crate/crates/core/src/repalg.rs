//! Representation theory of the quadratic Jacobi algebra QJ(3): defining
//! parameters, positive-discrete-series irreps and closed-form matrix elements
//! in the tilde and deformed su(1,1) bases.
//!
//! The algebra only sees `L(L+1)`, so `L` and `-L-1` share it. For the line the
//! two towers `L = -1` and `L = 0` are two irreps of one algebra; for radial
//! `L = 0` the `L = -1` irrep is also admissible algebraically and is excluded
//! only by regularity at the origin.

use num_traits::Float;
use serde::Serialize;
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::model::{DerivedParams, Parity, SectorLabel};
use crate::report::ResidualReport;
use crate::spectrum::{energy, energy_at};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QJ3Params {
    pub a2: f64,
    pub c2: f64,
    pub d: f64,
    pub g1: f64,
    pub g2: f64,
}

impl QJ3Params {
    /// `D^2 - 4 A2 G1`; nonzero means the algebra is not a Lie algebra in disguise.
    pub fn discriminant(&self) -> f64 {
        self.d * self.d - 4.0 * self.a2 * self.g1
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.discriminant() != 0.0
    }
}

/// `c = (lambda/alpha)(lambda/alpha - 1)`.
fn c_nu(dp: &DerivedParams) -> f64 {
    dp.nu * (dp.nu - 1.0)
}

pub fn qj3_params(dp: &DerivedParams) -> QJ3Params {
    let (a, c, ll) = (dp.alpha, c_nu(dp), dp.l_term());
    QJ3Params {
        a2: -8.0 * a,
        c2: -16.0 * a * a * (c + ll - 1.0),
        d: 0.0,
        g1: 8.0 * a,
        g2: -16.0 * a * a * (c - ll),
    }
}

/// `lambda_p = alpha [4p(p+1) - c - L(L+1) + 1]`.
pub fn lambda_p(dp: &DerivedParams, p: f64) -> f64 {
    dp.alpha * (4.0 * p * (p + 1.0) - c_nu(dp) - dp.l_term() + 1.0)
}

/// The four linear factors of `a_p^2` and its prefactor `16 p^2 (2p-1)(2p+1)`.
fn a_sq_factors(dp: &DerivedParams, p: f64) -> ([f64; 4], f64) {
    let (nu, l) = (dp.nu, dp.l_eff);
    let two_p = 2.0 * p;
    (
        [
            two_p - nu + l + 1.0,
            two_p - nu - l,
            two_p + nu - l - 1.0,
            two_p + nu + l,
        ],
        16.0 * p * p * (two_p - 1.0) * (two_p + 1.0),
    )
}

/// `a_p^2` as a product of its four linear factors over the prefactor.
///
/// ```
/// # use pdmosc::{ModelParams, SectorLabel, repalg::a_p_sq};
/// let dp = ModelParams::new(3.0, 4.0, SectorLabel::Radial { d: 3, l: 0 })?.derive();
/// let (nu, l, p) = (dp.nu, dp.l_eff, 1.7);
/// let expanded = (2.0*p - nu + l + 1.0) * (2.0*p - nu - l) * (2.0*p + nu - l - 1.0)
///     * (2.0*p + nu + l) / (16.0 * p * p * (2.0*p - 1.0) * (2.0*p + 1.0));
/// assert!((a_p_sq(&dp, p) - expanded).abs() < 1e-14);
/// # Ok::<(), pdmosc::Error>(())
/// ```
pub fn a_p_sq(dp: &DerivedParams, p: f64) -> f64 {
    let (f, pre) = a_sq_factors(dp, p);
    f.iter().product::<f64>() / pre
}

/// `b_p = -(lambda/alpha - L - 1)(lambda/alpha + L) / (4p(p+1))`.
pub fn b_p(dp: &DerivedParams, p: f64) -> f64 {
    -(dp.nu - dp.l_eff - 1.0) * (dp.nu + dp.l_eff) / (4.0 * p * (p + 1.0))
}

pub fn g_p(dp: &DerivedParams, p: f64) -> f64 {
    8.0 * dp.alpha * p
}

/// Lowest weight of the sector's own irrep, `(lambda/alpha + L)/2`.
pub fn p0(dp: &DerivedParams) -> f64 {
    0.5 * (dp.nu + dp.l_eff)
}

/// Factors below this are treated as accidental zeros.
pub const DEGENERACY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LowestWeight {
    pub p0: f64,
    /// The `L` with `p0 = (lambda/alpha + L)/2`.
    pub l_branch: f64,
    /// Some factor of `a_{p0+n}^2`, `1 <= n <= n_check`, is within
    /// [`DEGENERACY_TOL`] of zero: non-generic input, classification unreliable.
    pub near_degenerate: bool,
}

/// Roots of `a_p^2` that start a positive-discrete series: `a_{p0}^2 = 0` and
/// `a_{p0+n}^2 > 0` for `1 <= n <= n_check`.
pub fn lowest_weight_candidates(dp: &DerivedParams, n_check: u32) -> Vec<LowestWeight> {
    let (nu, l) = (dp.nu, dp.l_eff);
    // the algebra cannot tell nu from 1 - nu; lambda fixes nu > 1, so only the
    // two nu-branch roots are physical
    let mut roots: Vec<f64> = vec![nu - l - 1.0, nu + l].into_iter().map(|x| 0.5 * x).collect();
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    roots
        .into_iter()
        .filter(|&p| (1..=n_check).all(|k| a_p_sq(dp, p + f64::from(k)) > 0.0))
        .map(|p| LowestWeight {
            p0: p,
            l_branch: 2.0 * p - nu,
            near_degenerate: near_degenerate(dp, p, n_check),
        })
        .collect()
}

fn near_degenerate(dp: &DerivedParams, p0: f64, n_check: u32) -> bool {
    (1..=n_check).any(|k| {
        let (f, _) = a_sq_factors(dp, p0 + f64::from(k));
        let two_p = 2.0 * (p0 + f64::from(k));
        f.iter()
            .chain([two_p - 1.0, two_p].iter())
            .any(|x| x.abs() < DEGENERACY_TOL)
    })
}

/// `a_n = [n(2n+2L+1)(nu+n+L)(2nu+2n-1) / ((nu+2n+L-1)(nu+2n+L+1))]^(1/2) / (nu+2n+L)`, `tau_n = +1`.
pub fn a_n(dp: &DerivedParams, n: u32) -> f64 {
    // the explicit factor n wins when a pole of the denominator coincides (nu + L = 1)
    if n == 0 {
        return 0.0;
    }
    let (nu, l, n) = (dp.nu, dp.l_eff, f64::from(n));
    let s = nu + 2.0 * n + l;
    (n * (2.0 * n + 2.0 * l + 1.0) * (nu + n + l) * (2.0 * nu + 2.0 * n - 1.0) / ((s - 1.0) * (s + 1.0))).sqrt() / s
}

pub fn b_n(dp: &DerivedParams, n: u32) -> f64 {
    let (nu, l) = (dp.nu, dp.l_eff);
    let s = nu + 2.0 * f64::from(n) + l;
    -(nu - l - 1.0) * (nu + l) / (s * (s + 2.0))
}

pub fn g_n(dp: &DerivedParams, n: u32) -> f64 {
    4.0 * dp.alpha * (dp.nu + 2.0 * f64::from(n) + dp.l_eff)
}

/// Coefficient tables of one positive-discrete-series irrep, indexed by `n = p - p0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RepCoefficients {
    pub sector: SectorLabel,
    pub p0: f64,
    pub near_degenerate: bool,
    pub lambda: Vec<f64>,
    pub a_sq: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub g: Vec<f64>,
    pub tau: Vec<i8>,
}

fn coefficients_for(dp: &DerivedParams, n_max: u32) -> RepCoefficients {
    let p0 = p0(dp);
    let ns = 0..=n_max;
    RepCoefficients {
        sector: dp.sector,
        p0,
        near_degenerate: near_degenerate(dp, p0, n_max.max(1)),
        // p = p0 + n through the energy polynomial: same arithmetic as `energy`
        lambda: ns.clone().map(|n| energy_at(dp, f64::from(n))).collect(),
        a_sq: ns.clone().map(|n| a_sq_shifted(dp, n)).collect(),
        a: ns.clone().map(|n| a_n(dp, n)).collect(),
        b: ns.clone().map(|n| b_n(dp, n)).collect(),
        g: ns.clone().map(|n| g_n(dp, n)).collect(),
        tau: ns.map(|_| 1).collect(),
    }
}

/// `a_{p0+n}^2` with the factor `2p - nu - L` written as `2n`, so the zero at
/// `n = 0` is exact.
pub fn a_sq_shifted(dp: &DerivedParams, n: u32) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let (nu, l, n) = (dp.nu, dp.l_eff, f64::from(n));
    let two_p = nu + l + 2.0 * n;
    (2.0 * n + 2.0 * l + 1.0) * (2.0 * n) * (2.0 * nu + 2.0 * n - 1.0) * (2.0 * nu + 2.0 * l + 2.0 * n)
        / (4.0 * two_p * two_p * (two_p - 1.0) * (two_p + 1.0))
}

/// Radial sectors: one irrep. Line sectors: the even (`L = -1`) and odd
/// (`L = 0`) irreps, in that order, whichever parity `dp` carries.
pub fn rep_coefficients(dp: &DerivedParams, n_max: u32) -> Result<Vec<RepCoefficients>> {
    if dp.sector.is_line() {
        [Parity::Even, Parity::Odd]
            .into_iter()
            .map(|parity| Ok(coefficients_for(&dp.with_sector(SectorLabel::Line { parity })?, n_max)))
            .collect()
    } else {
        Ok(vec![coefficients_for(dp, n_max)])
    }
}

/// `<n+1|K+|n> = (alpha/lambda) [(n+1)(n+L+3/2)(n+nu+L+1)(n+nu+1/2)]^(1/2)`.
pub fn raise_element(dp: &DerivedParams, n: u32) -> f64 {
    let (nu, l, n) = (dp.nu, dp.l_eff, f64::from(n));
    dp.alpha / dp.lambda * ((n + 1.0) * (n + l + 1.5) * (n + nu + l + 1.0) * (n + nu + 0.5)).sqrt()
}

/// `<n-1|K-|n> = (alpha/lambda) [n(n+L+1/2)(n+nu+L)(n+nu-1/2)]^(1/2)`.
pub fn lower_element(dp: &DerivedParams, n: u32) -> f64 {
    let (nu, l, n) = (dp.nu, dp.l_eff, f64::from(n));
    dp.alpha / dp.lambda * (n * (n + l + 0.5) * (n + nu + l) * (n + nu - 0.5)).sqrt()
}

/// `<n|K0|n> = E_n/(4 lambda)`.
pub fn weight_element(dp: &DerivedParams, n: u32) -> f64 {
    energy(dp, n) / (4.0 * dp.lambda)
}

/// Line, full-line index: `<N+2|K+|N> = (alpha/4lambda) [(N+1)(N+2)(N+2nu)(N+2nu+1)]^(1/2)`.
pub fn line_raise_element(dp: &DerivedParams, big_n: u32) -> f64 {
    let (nu, n) = (dp.nu, f64::from(big_n));
    dp.alpha / (4.0 * dp.lambda) * ((n + 1.0) * (n + 2.0) * (n + 2.0 * nu) * (n + 2.0 * nu + 1.0)).sqrt()
}

/// Line, full-line index: `<N-2|K-|N> = (alpha/4lambda) [N(N-1)(N+2nu-2)(N+2nu-1)]^(1/2)`.
pub fn line_lower_element(dp: &DerivedParams, big_n: u32) -> f64 {
    let (nu, n) = (dp.nu, f64::from(big_n));
    dp.alpha / (4.0 * dp.lambda) * (n * (n - 1.0) * (n + 2.0 * nu - 2.0) * (n + 2.0 * nu - 1.0)).sqrt()
}

/// Line, full-line index: `<N|K0|N> = (alpha/4lambda)(N^2 + (2N+1) nu)`.
pub fn line_weight_element(dp: &DerivedParams, big_n: u32) -> f64 {
    let n = f64::from(big_n);
    dp.alpha / (4.0 * dp.lambda) * (n * n + (2.0 * n + 1.0) * dp.nu)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Tilde,
    Deformed,
}

/// One closed-form matrix element: `<row|op|col>`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Element {
    pub op: &'static str,
    pub row: u32,
    pub col: u32,
    pub value: f64,
}

/// Non-zero closed-form matrix elements on `0..=n_max`, in the sector's own index.
/// For the line's deformed basis the index is the full-line one, so `K+-`
/// step by two and `K0` runs over the sector's parity only.
pub fn matrix_elements(dp: &DerivedParams, n_max: u32, basis: Basis) -> Result<Vec<Element>> {
    if n_max < 1 {
        return Err(Error::Domain {
            name: "n_max",
            requirement: ">= 1",
            value: f64::from(n_max),
        });
    }
    let el = |op, row, col, value| Element { op, row, col, value };
    let mut out = Vec::new();
    match (basis, dp.sector.parity()) {
        (Basis::Tilde, _) => {
            for n in 0..=n_max {
                out.push(el("K1~", n, n, energy(dp, n)));
                out.push(el("K2~", n, n, b_n(dp, n)));
                if n < n_max {
                    out.push(el("K2~", n + 1, n, a_n(dp, n + 1)));
                    out.push(el("K3~", n + 1, n, g_n(dp, n + 1) * a_n(dp, n + 1)));
                }
                if n > 0 {
                    out.push(el("K2~", n - 1, n, a_n(dp, n)));
                    out.push(el("K3~", n - 1, n, -g_n(dp, n) * a_n(dp, n)));
                }
            }
        }
        (Basis::Deformed, None) => {
            for n in 0..=n_max {
                out.push(el("K0", n, n, weight_element(dp, n)));
                if n < n_max {
                    out.push(el("K+", n + 1, n, raise_element(dp, n)));
                }
                if n > 0 {
                    out.push(el("K-", n - 1, n, lower_element(dp, n)));
                }
            }
        }
        (Basis::Deformed, Some(parity)) => {
            let first = parity.full_line_index(0);
            for big_n in (first..=n_max).step_by(2) {
                out.push(el("K0", big_n, big_n, line_weight_element(dp, big_n)));
                if big_n + 2 <= n_max {
                    out.push(el("K+", big_n + 2, big_n, line_raise_element(dp, big_n)));
                }
                if big_n >= 2 {
                    out.push(el("K-", big_n - 2, big_n, line_lower_element(dp, big_n)));
                }
            }
        }
    }
    Ok(out)
}

pub type Matrix = Vec<Vec<f64>>;

fn zeros<T: Float>(dim: usize) -> Vec<Vec<T>> {
    vec![vec![T::zero(); dim]; dim]
}

fn matmul<T: Float>(a: &[Vec<T>], b: &[Vec<T>]) -> Vec<Vec<T>> {
    let n = a.len();
    let mut c = zeros(n);
    for i in 0..n {
        for k in 0..n {
            if !a[i][k].is_zero() {
                for j in 0..n {
                    c[i][j] = c[i][j] + a[i][k] * b[k][j];
                }
            }
        }
    }
    c
}

fn lin<T: Float>(terms: &[(T, &Vec<Vec<T>>)]) -> Vec<Vec<T>> {
    let n = terms[0].1.len();
    let mut c = zeros(n);
    for (w, m) in terms {
        for i in 0..n {
            for j in 0..n {
                c[i][j] = c[i][j] + *w * m[i][j];
            }
        }
    }
    c
}

/// `K1~`, `K2~`, `K3~` on the span of `psi_0 .. psi_{dim-1}` (entry `[m][n] = <m|K|n>`).
pub fn tilde_matrices(dp: &DerivedParams, dim: usize) -> [Matrix; 3] {
    let (mut k1, mut k2, mut k3) = (zeros(dim), zeros(dim), zeros(dim));
    for n in 0..dim {
        let nu = n as u32;
        k1[n][n] = energy(dp, nu);
        k2[n][n] = b_n(dp, nu);
        if n + 1 < dim {
            let a = a_n(dp, nu + 1);
            k2[n + 1][n] = a;
            k2[n][n + 1] = a;
            k3[n + 1][n] = g_n(dp, nu + 1) * a;
            k3[n][n + 1] = -g_n(dp, nu + 1) * a;
        }
    }
    [k1, k2, k3]
}

/// Deformed generators and the diagonal `delta` on the span of `psi_0 .. psi_{dim-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DeformedMatrices<T = f64> {
    pub k0: Vec<Vec<T>>,
    pub kp: Vec<Vec<T>>,
    pub km: Vec<Vec<T>>,
    pub delta: Vec<Vec<T>>,
}

/// The constants the deformed elements depend on, in a chosen precision.
/// `nu` is formed as `lambda/alpha` in that precision so the algebraic
/// identities hold to its rounding level.
#[derive(Clone, Copy)]
struct Constants<T> {
    alpha: T,
    lambda: T,
    nu: T,
    /// `alpha / lambda`
    ratio: T,
    l: T,
}

impl<T: Float> Constants<T> {
    fn new(dp: &DerivedParams) -> Self {
        let c = |x: f64| T::from(x).expect("finite");
        let (alpha, lambda) = (c(dp.alpha), c(dp.lambda));
        Self {
            alpha,
            lambda,
            nu: Self::div(lambda, alpha),
            ratio: Self::div(alpha, lambda),
            l: c(dp.l_eff),
        }
    }

    // twofloat's quotient is only good to f64 precision; one correction step
    // restores the full width (and is a no-op for f64).
    fn div(a: T, b: T) -> T {
        let q = a / b;
        q + (a - q * b) / b
    }

    fn c(x: f64) -> T {
        T::from(x).expect("finite")
    }

    fn raise(&self, n: usize) -> T {
        let n = Self::c(n as f64);
        let one = T::one();
        let half = Self::c(0.5);
        self.ratio
            * ((n + one) * (n + self.l + one + half) * (n + self.nu + self.l + one) * (n + self.nu + half)).sqrt()
    }

    fn lower(&self, n: usize) -> T {
        let n = Self::c(n as f64);
        let half = Self::c(0.5);
        self.ratio * (n * (n + self.l + half) * (n + self.nu + self.l) * (n + self.nu - half)).sqrt()
    }

    fn weight(&self, n: usize) -> T {
        let (n, one, two, three, four) = (Self::c(n as f64), T::one(), Self::c(2.0), Self::c(3.0), Self::c(4.0));
        let l = self.l;
        let e = self.alpha * (four * n * n + four * n * (l + one) + l + one + (four * n + two * l + three) * self.nu);
        Self::div(e, four * self.lambda)
    }

    fn delta(&self, n: usize) -> T {
        self.nu + self.l + T::one() + Self::c(2.0 * n as f64)
    }

    fn casimir(&self) -> T {
        let (r, l) = (self.ratio, self.l);
        let (one, half) = (T::one(), Self::c(0.5));
        Self::c(0.25) * (one - r) * (l + one + half) * (l - half) - Self::c(3.0) * r * r * l * (l + one) / Self::c(16.0)
    }

    fn matrices(&self, dim: usize) -> DeformedMatrices<T> {
        let mut m = DeformedMatrices {
            k0: zeros(dim),
            kp: zeros(dim),
            km: zeros(dim),
            delta: zeros(dim),
        };
        for n in 0..dim {
            m.k0[n][n] = self.weight(n);
            m.delta[n][n] = self.delta(n);
            if n + 1 < dim {
                m.kp[n + 1][n] = self.raise(n);
                m.km[n][n + 1] = self.lower(n + 1);
            }
        }
        m
    }
}

pub fn deformed_matrices(dp: &DerivedParams, dim: usize) -> DeformedMatrices {
    Constants::<f64>::new(dp).matrices(dim)
}

/// `1/4 (1 - alpha/lambda)(L + 3/2)(L - 1/2) - 3 alpha^2 L(L+1) / (16 lambda^2)`.
pub fn deformed_casimir_value(dp: &DerivedParams) -> f64 {
    let (a, lam, l) = (dp.alpha, dp.lambda, dp.l_eff);
    0.25 * (1.0 - a / lam) * (l + 1.5) * (l - 0.5) - 3.0 * a * a * dp.l_term() / (16.0 * lam * lam)
}

/// Largest elementwise relative difference on the leading `safe x safe` block;
/// entries where both sides are exactly zero are skipped.
fn block_report<T: Float>(identity: &str, lhs: &[Vec<T>], rhs: &[Vec<T>], safe: usize) -> ResidualReport {
    let (mut residual, mut scale, mut relative) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..safe {
        for j in 0..safe {
            let (x, y) = (lhs[i][j], rhs[i][j]);
            let d = (x - y).abs().to_f64().unwrap_or(f64::NAN);
            let (xa, ya) = (
                x.abs().to_f64().unwrap_or(f64::NAN),
                y.abs().to_f64().unwrap_or(f64::NAN),
            );
            residual = residual.max(d);
            scale = scale.max(xa).max(ya);
            if xa != 0.0 || ya != 0.0 {
                relative = relative.max(d / xa.max(ya));
            }
        }
    }
    ResidualReport {
        identity: identity.to_string(),
        residual,
        scale,
        relative,
        grid: None,
    }
}

fn deformed_reports<T: Float>(dp: &DerivedParams, dim: usize) -> Vec<ResidualReport> {
    let safe = dim - 2;
    let k = Constants::<T>::new(dp);
    let m = k.matrices(dim);
    let r = k.ratio;
    let c = Constants::<T>::c;
    let eye: Vec<Vec<T>> = (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { T::one() } else { T::zero() }).collect())
        .collect();

    let lhs1 = lin(&[(T::one(), &matmul(&m.k0, &m.kp)), (-T::one(), &matmul(&m.kp, &m.k0))]);
    let rhs1 = lin(&[(r, &matmul(&m.kp, &m.delta)), (r, &m.kp)]);

    let kpkm = matmul(&m.kp, &m.km);
    let lhs2 = lin(&[(T::one(), &kpkm), (-T::one(), &matmul(&m.km, &m.kp))]);
    let inner = lin(&[(c(2.0), &m.k0), (r / c(4.0), &eye)]);
    let rhs2 = lin(&[(-r, &matmul(&m.delta, &inner))]);

    let casimir = lin(&[
        (-T::one(), &kpkm),
        (T::one(), &matmul(&m.k0, &m.k0)),
        (-r, &matmul(&m.delta, &m.k0)),
        (c(1.25) * r, &m.k0),
        (-r * r / c(8.0), &m.delta),
    ]);
    let value = lin(&[(k.casimir(), &eye)]);

    vec![
        block_report("[K0,K+] = (alpha/lambda) K+ (delta + 1)", &lhs1, &rhs1, safe),
        block_report(
            "[K+,K-] = -(alpha/lambda) delta (2 K0 + alpha/(4 lambda))",
            &lhs2,
            &rhs2,
            safe,
        ),
        block_report("deformed Casimir = constant", &casimir, &value, safe),
    ]
}

/// Builds `(n_max+1)`-dimensional matrices from the closed-form elements and
/// checks `[K0,K+] = (alpha/lambda) K+ (delta+1)`,
/// `[K+,K-] = -(alpha/lambda) delta (2 K0 + alpha/(4 lambda))` and the
/// Casimir `C = -K+ K- + K0^2 - (alpha/lambda)(delta - 5/4) K0 - alpha^2 delta/(8 lambda^2)`
/// on the block `n <= n_max - 2`, which truncation cannot reach.
///
/// The Casimir diagonal is a constant of order one obtained by cancelling terms
/// that grow like `n^4`; in `f64` that alone costs about four digits at
/// `n = 10`. The matrices are therefore formed in double-double arithmetic.
pub fn deformed_commutator_matrices(dp: &DerivedParams, n_max: u32) -> Result<Vec<ResidualReport>> {
    if n_max < 2 {
        return Err(Error::Domain {
            name: "n_max",
            requirement: ">= 2",
            value: f64::from(n_max),
        });
    }
    Ok(deformed_reports::<TwoFloat>(dp, n_max as usize + 1))
}

/// The same checks in plain `f64`, for comparison.
pub fn deformed_commutator_matrices_f64(dp: &DerivedParams, n_max: u32) -> Result<Vec<ResidualReport>> {
    if n_max < 2 {
        return Err(Error::Domain {
            name: "n_max",
            requirement: ">= 2",
            value: f64::from(n_max),
        });
    }
    Ok(deformed_reports::<f64>(dp, n_max as usize + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn radial(alpha: f64, omega: f64, d: u32, l: u32) -> DerivedParams {
        ModelParams::new(alpha, omega, SectorLabel::Radial { d, l })
            .unwrap()
            .derive()
    }

    fn line(parity: Parity) -> DerivedParams {
        ModelParams::new(1.0, 8f64.sqrt(), SectorLabel::Line { parity })
            .unwrap()
            .derive()
    }

    #[test]
    fn qj3_reference() {
        let q = qj3_params(&radial(3.0, 4.0, 3, 0));
        assert_eq!((q.a2, q.g1, q.d), (-24.0, 24.0, 0.0));
        assert_relative_eq!(q.c2, 80.0, max_relative = 1e-14);
        assert_relative_eq!(q.g2, -64.0, max_relative = 1e-14);
        assert_eq!(q.discriminant(), 2304.0);
        assert!(q.is_nondegenerate());
    }

    #[test]
    fn qj3_small_alpha_scaling() {
        let dp = radial(1e-6, 2.0, 3, 0);
        let q = qj3_params(&dp);
        assert_relative_eq!(q.a2, -8e-6);
        // alpha^2 c -> omega^2/4 = 1
        assert_relative_eq!(q.c2, -16.0, max_relative = 1e-5);
        assert_relative_eq!(q.g2, -16.0, max_relative = 1e-5);
    }

    #[test]
    fn reference_irrep() {
        let dp = radial(3.0, 4.0, 3, 0);
        let rc = rep_coefficients(&dp, 4).unwrap();
        assert_eq!(rc.len(), 1);
        let rc = &rc[0];
        assert_relative_eq!(rc.p0, 2.0 / 3.0, max_relative = 1e-15);
        assert_eq!(rc.lambda[0], 15.0);
        assert_relative_eq!(lambda_p(&dp, rc.p0), 15.0, max_relative = 1e-14);
        assert_eq!(rc.a_sq[0], 0.0);
        assert!(rc.a_sq[1] > 0.0);
        assert_relative_eq!(rc.b[0], -0.1, max_relative = 1e-14);
        assert_relative_eq!(rc.g[0], 16.0, max_relative = 1e-14);
        assert_relative_eq!(rc.a[1], 0.3 * (33.0f64 / 13.0).sqrt(), max_relative = 1e-14);
        assert!(!rc.near_degenerate);
    }

    #[test]
    fn line_has_two_irreps() {
        for parity in [Parity::Even, Parity::Odd] {
            let dp = line(parity);
            let cands = lowest_weight_candidates(&dp, 20);
            let p0s: Vec<f64> = cands.iter().map(|c| c.p0).collect();
            assert_eq!(p0s, vec![0.5, 1.0]);
            let rc = rep_coefficients(&dp, 5).unwrap();
            assert_eq!(rc.len(), 2);
            // even irrep sits on the 0/0 coincidence at p0 = 1/2
            for r in &rc {
                assert_eq!((r.a_sq[0], r.a[0]), (0.0, 0.0));
                assert!(r.a_sq.iter().chain(&r.a).all(|v| v.is_finite()));
            }
            let even = dp.with_sector(SectorLabel::Line { parity: Parity::Even }).unwrap();
            for v in 0..5u32 {
                assert_eq!(
                    rc[0].lambda[v as usize],
                    crate::spectrum::full_line_energy(&even, 2 * v)
                );
                let e = f64::from(v);
                assert_eq!(rc[0].lambda[v as usize], 4.0 * e * e + 8.0 * e + 2.0);
                assert_eq!(rc[1].lambda[v as usize], 4.0 * e * e + 12.0 * e + 7.0);
            }
        }
    }

    #[test]
    fn radial_candidates() {
        // L = 1: single irrep
        let c = lowest_weight_candidates(&radial(3.0, 4.0, 3, 1), 20);
        assert_eq!(c.len(), 1);
        assert_relative_eq!(c[0].l_branch, 1.0, max_relative = 1e-14);
        // L = 0: the L = -1 irrep is also algebraically admissible
        let c = lowest_weight_candidates(&radial(3.0, 4.0, 3, 0), 20);
        let ls: Vec<f64> = c.iter().map(|c| c.l_branch.round()).collect();
        assert_eq!(ls, vec![-1.0, 0.0]);
    }

    #[test]
    fn near_degenerate_input_is_flagged() {
        // nu = L + 1 makes b vanish identically
        let dp = radial(1.0, 8f64.sqrt(), 3, 1);
        assert_relative_eq!(dp.nu, 2.0, max_relative = 1e-15);
        // roots 2p in {nu - L - 1, nu + L} = {0, 3}
        let c = lowest_weight_candidates(&dp, 10);
        assert!(c.iter().any(|c| (c.p0 - 1.5).abs() < 1e-14));
    }

    #[test]
    fn deformed_reference_elements() {
        let dp = radial(3.0, 4.0, 3, 0);
        assert_relative_eq!(
            raise_element(&dp, 0),
            0.75 * (77.0f64 / 12.0).sqrt(),
            max_relative = 1e-14
        );
        assert_relative_eq!(weight_element(&dp, 0), 15.0 / 16.0, max_relative = 1e-15);
        assert_eq!(lower_element(&dp, 0), 0.0);
        let ev = line(Parity::Even);
        assert_relative_eq!(line_raise_element(&ev, 0), 40f64.sqrt() / 8.0, max_relative = 1e-14);
        assert_relative_eq!(line_weight_element(&ev, 0), 0.25, max_relative = 1e-15);
        // section-4 form agrees with the radial form at L = -1, 0
        for n in 0..6u32 {
            assert_relative_eq!(
                line_raise_element(&ev, 2 * n),
                raise_element(&ev, n),
                max_relative = 1e-13
            );
            let od = line(Parity::Odd);
            assert_relative_eq!(
                line_raise_element(&od, 2 * n + 1),
                raise_element(&od, n),
                max_relative = 1e-13
            );
            assert_relative_eq!(
                line_lower_element(&od, 2 * n + 1),
                lower_element(&od, n),
                max_relative = 1e-13,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn deformed_algebra_reference() {
        let dp = radial(3.0, 4.0, 3, 0);
        assert_relative_eq!(deformed_casimir_value(&dp), -3.0 / 64.0, max_relative = 1e-14);
        let reps = deformed_commutator_matrices(&dp, 12).unwrap();
        for r in &reps {
            assert!(r.passes(1e-12), "{}: {}", r.identity, r.relative);
        }
    }

    #[test]
    fn small_alpha_su11_limit() {
        let dp = radial(1e-6, 2.0, 3, 0);
        for n in 0..5u32 {
            let su11 = ((f64::from(n) + 1.0) * (f64::from(n) + dp.l_eff + 1.5)).sqrt();
            assert!((raise_element(&dp, n) / su11 - 1.0).abs() <= 1e-5);
            assert!((dp.alpha * dp.delta_n(n) / dp.lambda - 1.0).abs() <= 1e-5);
        }
        assert!(dp.alpha / dp.lambda < 1e-5);
    }

    #[test]
    fn matrix_element_tables() {
        let dp = radial(3.0, 4.0, 3, 0);
        let t = matrix_elements(&dp, 3, Basis::Tilde).unwrap();
        let find = |op: &str, r: u32, c: u32| t.iter().find(|e| e.op == op && e.row == r && e.col == c).unwrap().value;
        assert_eq!(find("K2~", 1, 0), find("K2~", 0, 1));
        assert_eq!(find("K3~", 1, 0), -find("K3~", 0, 1));
        assert!(matrix_elements(&dp, 0, Basis::Tilde).is_err());
        let ev = line(Parity::Odd);
        let d = matrix_elements(&ev, 7, Basis::Deformed).unwrap();
        assert!(d.iter().all(|e| e.col % 2 == 1));
        assert!(d.iter().any(|e| e.op == "K+" && e.row == 7 && e.col == 5));
    }

    proptest! {
        #[test]
        fn lambda_matches_energy_bitwise(alpha in 0.05f64..10.0, omega in 0.05f64..10.0, d in 2u32..7, l in 0u32..5) {
            let dp = radial(alpha, omega, d, l);
            let rc = rep_coefficients(&dp, 20).unwrap().remove(0);
            for n in 0..=20u32 {
                prop_assert_eq!(rc.lambda[n as usize], energy(&dp, n));
                let general = lambda_p(&dp, rc.p0 + f64::from(n));
                prop_assert!((general - energy(&dp, n)).abs() <= 1e-12 * energy(&dp, n));
            }
        }

        #[test]
        fn a_sq_positive_above_p0(alpha in 0.05f64..10.0, omega in 0.05f64..10.0, d in 2u32..7, l in 0u32..5) {
            let dp = radial(alpha, omega, d, l);
            prop_assert_eq!(a_sq_shifted(&dp, 0), 0.0);
            prop_assert!(a_p_sq(&dp, p0(&dp)).abs() <= 1e-14);
            for n in 1..=20u32 {
                let s = a_sq_shifted(&dp, n);
                prop_assert!(s > 0.0);
                prop_assert!((s.sqrt() - a_n(&dp, n)).abs() <= 1e-13 * a_n(&dp, n));
                let general = a_p_sq(&dp, p0(&dp) + f64::from(n));
                prop_assert!((general - s).abs() <= 1e-11 * s);
                prop_assert!((b_p(&dp, p0(&dp) + f64::from(n)) - b_n(&dp, n)).abs() <= 1e-12 * b_n(&dp, n).abs().max(1e-300) + 1e-15);
                prop_assert!((g_p(&dp, p0(&dp) + f64::from(n)) - g_n(&dp, n)).abs() <= 1e-12 * g_n(&dp, n));
            }
        }

        #[test]
        fn line_admits_exactly_two(alpha in 0.05f64..10.0, omega in 0.05f64..10.0) {
            let dp = ModelParams::new(alpha, omega, SectorLabel::Line { parity: Parity::Even }).unwrap().derive();
            let c = lowest_weight_candidates(&dp, 20);
            prop_assert_eq!(c.len(), 2);
            prop_assert!((c[0].p0 - 0.5 * (dp.nu - 1.0)).abs() < 1e-12);
            prop_assert!((c[1].p0 - 0.5 * dp.nu).abs() < 1e-12);
        }

        #[test]
        fn deformed_algebra_holds(alpha in 0.05f64..10.0, omega in 0.05f64..10.0, d in 2u32..6, l in 0u32..4) {
            let dp = radial(alpha, omega, d, l);
            for r in deformed_commutator_matrices(&dp, 12).unwrap() {
                prop_assert!(r.passes(1e-12), "{}: {}", r.identity, r.relative);
            }
        }
    }
}
