//! Algebraic construction of the eigenstates: the ground state from the
//! first-order equation `A- psi_0 = 0`, then the whole tower by repeated
//! application of `A+`, each step checked against the closed forms.

use std::fmt::Write as _;
use std::sync::Arc;

use log::warn;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Domain, GridFunction, RadialGrid, EDGE_BAND};
use crate::gridops::{
    apply_generator, apply_ladder, check_grid, closed_form_states, DeltaOrdering, Generator, LadderOp,
};
use crate::model::{DerivedParams, Parity, SectorLabel};
use crate::report::{GridInfo, ResidualReport};
use crate::specfun::{jacobi_p, jacobi_raise_rhs};
use crate::spectrum::{energy, ln_normalization_ratio, ClosedForm};

/// Normalisation drift of a single raising step above which a warning is logged.
pub const NORM_WARN: f64 = 1e-6;

const ODE_TOL: f64 = 1e-13;

/// Default points per half-line for tower grids.
pub const TOWER_POINTS: usize = 2001;

/// Sinh-mapped grid reaching the `1e-12` tail of `psi_{n_max}`, with
/// [`TOWER_POINTS`] per half-line.
pub fn tower_grid(dp: &DerivedParams, n_max: u32) -> Result<Arc<RadialGrid>> {
    let n = if dp.sector.is_line() {
        2 * TOWER_POINTS - 1
    } else {
        TOWER_POINTS
    };
    Ok(Arc::new(RadialGrid::for_model(dp, n_max, n)?))
}

/// `d ln|psi_0| / dr = -(nu+1) alpha r/f + (L+1)/(r f)`, the first-order
/// equation `r psi_0' / psi_0 = -(nu+1)(1+t)/2 + (L+1)(1-t)/2` in `r`.
pub fn ground_log_slope(dp: &DerivedParams, r: f64) -> f64 {
    let f = dp.f(r);
    let mut slope = -(dp.nu + 1.0) * dp.alpha * r / f;
    if dp.l_eff + 1.0 != 0.0 {
        slope += (dp.l_eff + 1.0) / (r * f);
    }
    slope
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive Dormand-Prince integration of the scalar `y' = rhs(s, y)` from `s0` to `s1`.
fn dopri(rhs: impl Fn(f64, f64) -> f64, s0: f64, y0: f64, s1: f64, tol: f64) -> Result<f64> {
    let (mut s, mut y) = (s0, y0);
    let mut h = s1 - s0;
    let mut k = [0.0; 7];
    for _ in 0..10_000 {
        if (s1 - s).abs() <= 1e-15 * s1.abs().max(1.0) {
            return Ok(y);
        }
        if (s + h - s1) * h.signum() > 0.0 {
            h = s1 - s;
        }
        for i in 0..7 {
            let yi = y + h * (0..i).map(|j| A[i][j] * k[j]).sum::<f64>();
            k[i] = rhs(s + C[i] * h, yi);
        }
        let y5 = y + h * (0..6).map(|j| A[6][j] * k[j]).sum::<f64>();
        let y4 = y + h * (0..7).map(|j| B4[j] * k[j]).sum::<f64>();
        if !y5.is_finite() {
            return Err(Error::OdeBlowUp { s });
        }
        let err = (y5 - y4).abs();
        let scale = tol * (1.0 + y5.abs());
        if err <= scale {
            s += h;
            y = y5;
        }
        let grow = if err == 0.0 {
            5.0
        } else {
            (0.9 * (scale / err).powf(0.2)).clamp(0.2, 5.0)
        };
        h *= grow;
    }
    Err(Error::OdeBlowUp { s })
}

/// Integrates the ground-state equation for `ln|psi_0|` on the grid, outward in
/// both directions from the middle of the positive half, and normalises.
/// Line sectors integrate `x > 0` and fill `x < 0` by parity.
pub fn ground_state_ode(dp: &DerivedParams, grid: &Arc<RadialGrid>) -> Result<GridFunction> {
    check_grid(dp, grid)?;
    let n = grid.len();
    let first = match grid.domain {
        Domain::HalfLine => 0,
        Domain::FullLine => n / 2 + 1,
    };
    if n - first < 2 {
        return Err(Error::GridTooShort {
            len: n,
            min: 2 * first + 2,
        });
    }
    let map = grid.map;
    let rhs = |s: f64, _: f64| ground_log_slope(dp, map.r(s)) * map.dr(s);

    let mut ln_psi = vec![f64::NEG_INFINITY; n];
    let start = first + (n - first) / 2;
    ln_psi[start] = 0.0;
    for i in start + 1..n {
        ln_psi[i] = dopri(rhs, grid.s[i - 1], ln_psi[i - 1], grid.s[i], ODE_TOL)?;
    }
    for i in (first..start).rev() {
        ln_psi[i] = dopri(rhs, grid.s[i + 1], ln_psi[i + 1], grid.s[i], ODE_TOL)?;
    }

    let mut sign = vec![1.0; n];
    if let SectorLabel::Line { parity } = dp.sector {
        let mid = n / 2;
        ln_psi[mid] = match parity {
            // psi_0 is even and smooth through the origin
            Parity::Even => dopri(rhs, grid.s[first], ln_psi[first], 0.0, ODE_TOL)?,
            Parity::Odd => f64::NEG_INFINITY,
        };
        for i in first..n {
            let j = n - 1 - i;
            ln_psi[j] = ln_psi[i];
            sign[j] = parity.sign();
        }
    }

    let peak = ln_psi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let values = ln_psi.iter().zip(&sign).map(|(l, s)| s * (l - peak).exp()).collect();
    Ok(GridFunction::new(Arc::clone(grid), values)?.normalized())
}

/// Scalar taking `A+ psi_n` to `psi_{n+1}`:
/// `(1/16 alpha)(delta+1)(delta+2)^{1/2} [(n+1)(n+L+3/2)(n+nu+L+1)(n+nu+1/2)]^{-1/2} delta^{-1/2}`
/// with `delta = 2n + nu + L + 1`.
pub fn raise_coefficient(dp: &DerivedParams, n: u32) -> f64 {
    let (nu, l, n) = (dp.nu, dp.l_eff, f64::from(n));
    let d = 2.0 * n + nu + l + 1.0;
    let radicand = (n + 1.0) * (n + l + 1.5) * (n + nu + l + 1.0) * (n + nu + 0.5);
    (d + 1.0) * ((d + 2.0) / (d * radicand)).sqrt() / (16.0 * dp.alpha)
}

#[derive(Clone, Debug)]
pub struct Raised {
    /// Unit-normalised `psi_{n+1}`.
    pub state: GridFunction,
    /// `| ||c A+ psi_n|| - 1 |` before renormalising.
    pub norm_error: f64,
}

/// `psi_{n+1}` from `psi_n` by one application of `A+` (with `delta -> delta_n`).
pub fn raise(dp: &DerivedParams, n: u32, psi_n: &GridFunction) -> Result<Raised> {
    let next = apply_ladder(dp, n, LadderOp::RaiseA, psi_n, DeltaOrdering::Right)?.scale(raise_coefficient(dp, n));
    let norm = next.norm();
    let norm_error = (norm - 1.0).abs();
    if norm_error > NORM_WARN {
        warn!(
            "raising step {n} -> {} lost normalisation by {norm_error:e} on grid {:?}",
            n + 1,
            psi_n.grid.stats()
        );
    }
    Ok(Raised {
        state: next.scale(1.0 / norm),
        norm_error,
    })
}

/// `N_{n+1}/N_n = [(n+1)(n+nu+L+1)(2n+nu+L+3) / ((n+L+3/2)(n+nu+1/2)(2n+nu+L+1))]^{1/2}`.
pub fn norm_recursion(dp: &DerivedParams, n: u32) -> f64 {
    let (nu, l, n) = (dp.nu, dp.l_eff, f64::from(n));
    ((n + 1.0) * (n + nu + l + 1.0) * (2.0 * n + nu + l + 3.0)
        / ((n + l + 1.5) * (n + nu + 0.5) * (2.0 * n + nu + l + 1.0)))
        .sqrt()
}

/// Relative mismatch between `prod_{k<n} norm_recursion(k)` and the closed-form
/// `N_n/N_0`, worst over `n <= n_max`.
pub fn norm_product_residual(dp: &DerivedParams, n_max: u32) -> ResidualReport {
    let mut product = 1.0;
    let mut worst = 0.0f64;
    for n in 0..=n_max {
        let closed = ln_normalization_ratio(dp, n).exp();
        worst = worst.max((product / closed - 1.0).abs());
        product *= norm_recursion(dp, n);
    }
    ResidualReport::new(format!("prod N_(k+1)/N_k = N_n/N_0, n <= {n_max}"), worst, 1.0, None)
}

/// Worst relative pointwise mismatch, over `n <= n_max` and the grid's `t` values, of
/// `{(2n+b+g+2)(1-t^2) d/dt - (n+b+g+1)[b-g+(2n+b+g+2)t]} P_n = -2(n+1)(n+b+g+1) P_{n+1}`.
pub fn jacobi_identity_residual(dp: &DerivedParams, grid: &RadialGrid, n_max: u32) -> ResidualReport {
    let jp = dp.jacobi_params();
    let (b, g) = (jp.beta, jp.gamma_);
    let ts: Vec<f64> = grid.r.iter().map(|&r| dp.t(r.abs())).collect();
    let mut worst = 0.0f64;
    for n in 0..=n_max as usize {
        let c = -2.0 * (n as f64 + 1.0) * (n as f64 + b + g + 1.0);
        let (mut diff, mut scale) = (0.0f64, 0.0f64);
        for &t in &ts {
            let rhs = c * jacobi_p(n + 1, &jp, t);
            diff = diff.max((jacobi_raise_rhs(n, &jp, t) - rhs).abs());
            scale = scale.max(rhs.abs());
        }
        worst = worst.max(diff / scale);
    }
    ResidualReport::new(
        format!("Jacobi raising relation, n <= {n_max}"),
        worst,
        1.0,
        Some(GridInfo::from(grid)),
    )
}

/// `A+ (psi_0 P_n)` on the grid against `-8 alpha psi_0 / (delta_n + 1)` times the
/// left side of the Jacobi raising relation (the ansatz step of the tower).
pub fn ansatz_residual(dp: &DerivedParams, grid: &Arc<RadialGrid>, n: u32) -> Result<ResidualReport> {
    let jp = dp.jacobi_params();
    let cf = ClosedForm::new(dp, 0);
    let (a, d) = (dp.alpha, dp.delta_n(n));
    let nn = n as usize;
    let trial = GridFunction::from_fn(grid, |r| cf.eval(0, r) * jacobi_p(nn, &jp, dp.t(r.abs())));
    let lhs = apply_ladder(dp, n, LadderOp::RaiseA, &trial, DeltaOrdering::Right)?;
    let rhs = GridFunction::from_fn(grid, |r| {
        -8.0 * a / (d + 1.0) * cf.eval(0, r) * jacobi_raise_rhs(nn, &jp, dp.t(r.abs()))
    });
    Ok(ResidualReport::compare(
        format!("A+ (psi_0 P_{n}) = -8 alpha psi_0 R_{n} / (delta_{n} + 1)"),
        &lhs,
        &rhs,
        EDGE_BAND,
    ))
}

/// Orthonormal basis of `{psi_0 q(t) : deg q <= degree}` on the grid, ordered by
/// degree so that every prefix spans the lower-degree subspace. Built from
/// Chebyshev polynomials in `t` with two passes of modified Gram-Schmidt.
pub fn ansatz_basis(dp: &DerivedParams, psi0: &GridFunction, degree: u32) -> Vec<GridFunction> {
    let ts: Vec<f64> = psi0.grid.r.iter().map(|&r| dp.t(r.abs())).collect();
    let mut prev = psi0.clone();
    let mut cur = psi0.with_values(psi0.values.iter().zip(&ts).map(|(v, t)| v * t).collect());
    let mut raw = vec![prev.clone()];
    for _ in 0..degree {
        raw.push(cur.clone());
        let next = psi0.with_values(
            (0..ts.len())
                .map(|i| 2.0 * ts[i] * cur.values[i] - prev.values[i])
                .collect(),
        );
        prev = std::mem::replace(&mut cur, next);
    }
    let mut basis: Vec<GridFunction> = Vec::with_capacity(raw.len());
    for mut v in raw {
        for _ in 0..2 {
            for b in &basis {
                v = v.axpy(-b.inner(&v), b);
            }
        }
        basis.push(v.normalized());
    }
    basis
}

/// Orthogonal projection onto the span of `basis`.
pub fn project(psi: &GridFunction, basis: &[GridFunction]) -> GridFunction {
    basis
        .iter()
        .fold(GridFunction::zeros(&psi.grid), |acc, b| acc.axpy(b.inner(psi), b))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TowerStep {
    pub n: u32,
    pub energy: f64,
    /// `||psi_tower - psi_closed||`.
    pub l2_deviation: f64,
    pub rayleigh_quotient: f64,
    /// Normalisation drift of the step that produced this state (0 for the ground state,
    /// which is normalised directly).
    pub norm_error: f64,
}

#[derive(Clone, Debug)]
pub struct TowerResult {
    pub dp: DerivedParams,
    pub states: Vec<GridFunction>,
    pub steps: Vec<TowerStep>,
    /// Relative mismatch of the normalisation recursion against the closed form.
    pub norm_check: ResidualReport,
}

impl TowerResult {
    pub fn max_deviation(&self) -> f64 {
        self.steps.iter().map(|s| s.l2_deviation).fold(0.0, f64::max)
    }

    /// `n,E_n,L2_deviation,rayleigh_quotient,norm_error` after the parameter echo line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{}", crate::spectrum::parameter_echo(&self.dp)).unwrap();
        writeln!(out, "n,E_n,L2_deviation,rayleigh_quotient,norm_error").unwrap();
        for s in &self.steps {
            writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{:.16e}",
                s.n, s.energy, s.l2_deviation, s.rayleigh_quotient, s.norm_error
            )
            .unwrap();
        }
        out
    }
}

fn rayleigh(dp: &DerivedParams, psi: &GridFunction) -> Result<f64> {
    let h = apply_generator(Generator::K1Tilde, dp, psi)?;
    Ok(psi.inner(&h) / psi.inner(psi))
}

/// Ground state from the first-order equation, then `psi_1 .. psi_{n_max}` by
/// repeated raising, each compared with the closed form on the same grid.
///
/// `A+` differentiates, so every step multiplies round-off by roughly `1/h`;
/// left alone, the noise grows like `h^-n` and swamps the tower by `n ~ 6` on
/// fine grids. Each raised state is therefore projected onto the ansatz space
/// `psi_0 x (polynomials of degree n+1 in t)`, which contains the exact state
/// and discards the noise.
pub fn build_tower(dp: &DerivedParams, grid: &Arc<RadialGrid>, n_max: u32) -> Result<TowerResult> {
    let closed = closed_form_states(dp, grid, n_max);
    let psi0 = ground_state_ode(dp, grid)?;
    let basis = ansatz_basis(dp, &psi0, n_max);
    let mut states = vec![psi0];
    let mut errors = vec![0.0];
    for n in 0..n_max {
        let next = raise(dp, n, &states[n as usize])?;
        states.push(project(&next.state, &basis[..n as usize + 2]).normalized());
        errors.push(next.norm_error);
    }
    let steps = states
        .iter()
        .zip(&closed)
        .zip(&errors)
        .enumerate()
        .map(|(n, ((psi, exact), &norm_error))| {
            Ok(TowerStep {
                n: n as u32,
                energy: energy(dp, n as u32),
                l2_deviation: psi.sub(exact).norm(),
                rayleigh_quotient: rayleigh(dp, psi)?,
                norm_error,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TowerResult {
        dp: *dp,
        states,
        steps,
        norm_check: norm_product_residual(dp, n_max),
    })
}
