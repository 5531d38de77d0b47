//! Grid realisations of the generators, ladder operators and the operator
//! identities of the quadratic algebra.
//!
//! Every generator is applied in its expanded real form: with
//! `pi_r psi = -i (f psi' + alpha r psi)` all factors of `i` cancel.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{derivatives, Domain, GridFunction, RadialGrid, EDGE_BAND};
use crate::model::DerivedParams;
use crate::report::ResidualReport;
use crate::spectrum::{energy, ClosedForm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Generator {
    /// Hamiltonian `pi_r^2 + L(L+1)/r^2 + omega^2 r^2/4`.
    K1Tilde,
    /// Multiplication by `t`.
    K2Tilde,
    /// `-8 alpha r d/dr - 4 alpha`.
    K3Tilde,
    /// Same operator as `K1Tilde`.
    K1Bar,
    /// Multiplication by `r^2`.
    K2Bar,
    /// `-4 r f d/dr - (4 alpha r^2 + 2 f)`.
    K3Bar,
}

pub(crate) fn check_grid(dp: &DerivedParams, grid: &RadialGrid) -> Result<()> {
    match (dp.sector.is_line(), grid.domain) {
        (true, Domain::FullLine) | (false, Domain::HalfLine) => {}
        (line, domain) => {
            return Err(Error::SectorMismatch(format!(
                "{} sector on a {:?} grid",
                if line { "line" } else { "radial" },
                domain
            )))
        }
    }
    let l_term = dp.l_term();
    if l_term != 0.0 && grid.r.contains(&0.0) {
        return Err(Error::SingularPoint { l_term });
    }
    Ok(())
}

pub fn apply_generator(which: Generator, dp: &DerivedParams, gf: &GridFunction) -> Result<GridFunction> {
    check_grid(dp, &gf.grid)?;
    let g = &gf.grid;
    let a = dp.alpha;
    let values = match which {
        Generator::K2Tilde => pointwise(gf, |r, v| dp.t(r.abs()) * v),
        Generator::K2Bar => pointwise(gf, |r, v| r * r * v),
        Generator::K1Tilde | Generator::K1Bar => {
            let (d1, d2) = derivatives(gf)?;
            let (w2, lt) = (dp.omega * dp.omega, dp.l_term());
            (0..g.len())
                .map(|i| {
                    let r = g.r[i];
                    let f = dp.f(r);
                    let v = gf.values[i];
                    let centrifugal = if lt == 0.0 { 0.0 } else { lt * v / (r * r) };
                    -(f * f * d2.values[i] + 4.0 * a * r * f * d1.values[i] + (a * f + a * a * r * r) * v)
                        + centrifugal
                        + 0.25 * w2 * r * r * v
                })
                .collect()
        }
        Generator::K3Tilde => {
            let d1 = derivatives(gf)?.0;
            (0..g.len())
                .map(|i| -8.0 * a * g.r[i] * d1.values[i] - 4.0 * a * gf.values[i])
                .collect()
        }
        Generator::K3Bar => {
            let d1 = derivatives(gf)?.0;
            (0..g.len())
                .map(|i| {
                    let r = g.r[i];
                    let f = dp.f(r);
                    -4.0 * r * f * d1.values[i] - (4.0 * a * r * r + 2.0 * f) * gf.values[i]
                })
                .collect()
        }
    };
    Ok(GridFunction {
        grid: Arc::clone(&gf.grid),
        values,
    })
}

fn pointwise(gf: &GridFunction, op: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    gf.grid.r.iter().zip(&gf.values).map(|(&r, &v)| op(r, v)).collect()
}

/// `K3~` as it comes out of the commutator, before simplification:
/// `-8 alpha (r psi' + alpha r^2 psi/f) + 4 alpha t psi`.
pub fn k3_tilde_unsimplified(dp: &DerivedParams, gf: &GridFunction) -> Result<GridFunction> {
    check_grid(dp, &gf.grid)?;
    let d1 = derivatives(gf)?.0;
    let a = dp.alpha;
    let g = &gf.grid;
    let values = (0..g.len())
        .map(|i| {
            let r = g.r[i];
            let v = gf.values[i];
            -8.0 * a * (r * d1.values[i] + a * r * r * v / dp.f(r)) + 4.0 * a * dp.t(r.abs()) * v
        })
        .collect();
    Ok(GridFunction {
        grid: Arc::clone(&gf.grid),
        values,
    })
}

/// Smooth compactly supported bump `exp(-1/(1-u^2))`, `u = (r - center)/half_width`.
pub fn bump(center: f64, half_width: f64) -> impl Fn(f64) -> f64 {
    move |r| {
        let u = (r - center) / half_width;
        if u.abs() >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - u * u)).exp()
        }
    }
}

/// Test functions for operator identities: bumps placed on the scale of the
/// bound states, one of them modulated so that not every test function is even
/// about its centre. Line sectors get bumps on both sides and across the origin.
pub fn test_functions(dp: &DerivedParams, grid: &Arc<RadialGrid>) -> Vec<GridFunction> {
    let a = dp.length_scale();
    let mut specs = vec![
        (1.6 * a, 1.4 * a, 0.0),
        (2.2 * a, 1.8 * a, 1.0),
        (2.5 * a, 1.5 * a, 0.0),
    ];
    if dp.sector.is_line() {
        specs.push((-2.0 * a, 1.8 * a, 0.5));
        specs.push((0.3 * a, 2.0 * a, 1.0));
    }
    specs
        .into_iter()
        .map(|(c, w, tilt)| {
            let b = bump(c, w);
            GridFunction::from_fn(grid, move |r| b(r) * (1.0 + tilt * (r - c) / w))
        })
        .collect()
}

/// Outermost reach of [`test_functions`], in units of the length scale.
pub const BUMP_REACH: f64 = 4.0;

/// Grid for operator identities on test functions: the bumps sit well inside
/// `|r| < 5a`, so resolution is not spent on the power-law tails of the states.
/// `n_points` counts points per half-line, so line sectors get `2 n_points - 1`
/// and both sectors see the same spacing.
pub fn identity_grid(dp: &DerivedParams, n_points: usize) -> Result<Arc<RadialGrid>> {
    let r_max = (BUMP_REACH + 1.0) * dp.length_scale();
    let n = if dp.sector.is_line() {
        2 * n_points - 1
    } else {
        n_points
    };
    Ok(Arc::new(RadialGrid::with_rmax(dp, n, r_max)?))
}

/// Closed-form `psi_0 .. psi_{n_max}` sampled on a grid.
pub fn closed_form_states(dp: &DerivedParams, grid: &Arc<RadialGrid>, n_max: u32) -> Vec<GridFunction> {
    let cf = ClosedForm::new(dp, n_max);
    let rows: Vec<Vec<f64>> = grid.r.iter().map(|&r| cf.eval_all(r)).collect();
    (0..=n_max as usize)
        .map(|n| GridFunction {
            grid: Arc::clone(grid),
            values: rows.iter().map(|row| row[n]).collect(),
        })
        .collect()
}

struct Ops<'a> {
    dp: &'a DerivedParams,
}

impl Ops<'_> {
    fn k(&self, which: Generator, gf: &GridFunction) -> Result<GridFunction> {
        apply_generator(which, self.dp, gf)
    }

    fn mul(&self, gf: &GridFunction, g: impl Fn(f64) -> f64) -> GridFunction {
        gf.mul_fn(g)
    }

    /// `A B phi - B A phi`.
    fn commutator(&self, a: Generator, b: Generator, phi: &GridFunction) -> Result<GridFunction> {
        let ab = self.k(a, &self.k(b, phi)?)?;
        let ba = self.k(b, &self.k(a, phi)?)?;
        Ok(ab.sub(&ba))
    }

    /// `A B phi + B A phi`.
    fn anticommutator(&self, a: Generator, b: Generator, phi: &GridFunction) -> Result<GridFunction> {
        let ab = self.k(a, &self.k(b, phi)?)?;
        let ba = self.k(b, &self.k(a, phi)?)?;
        Ok(ab.add(&ba))
    }
}

/// Keeps, per identity, the test function with the largest relative residual.
fn worst(reports: Vec<ResidualReport>) -> ResidualReport {
    reports
        .into_iter()
        .max_by(|a, b| a.relative.total_cmp(&b.relative))
        .expect("at least one test function")
}

type Check = (
    &'static str,
    fn(&Ops, &GridFunction) -> Result<(GridFunction, GridFunction)>,
);

fn commutator_checks() -> Vec<Check> {
    use Generator::*;
    vec![
        ("[K1~,K2~] = K3~", |o, phi| Ok((o.commutator(K1Tilde, K2Tilde, phi)?, o.k(K3Tilde, phi)?))),
        ("[K2~,K3~] = 8 alpha (1 - K2~^2)", |o, phi| {
            let a = o.dp.alpha;
            let dp = *o.dp;
            Ok((
                o.commutator(K2Tilde, K3Tilde, phi)?,
                o.mul(phi, move |r| {
                    let t = dp.t(r.abs());
                    8.0 * a * (1.0 - t * t)
                }),
            ))
        }),
        ("[K3~,K1~] = -8 alpha {K1~,K2~} - 16 alpha^2 [c + L(L+1) - 1] K2~ - 16 alpha^2 [c - L(L+1)]", |o, phi| {
            let dp = *o.dp;
            let (a, c, ll) = (dp.alpha, dp.nu * (dp.nu - 1.0), dp.l_term());
            let rhs = o.anticommutator(K1Tilde, K2Tilde, phi)?.scale(-8.0 * a).add(&o.mul(phi, move |r| {
                -16.0 * a * a * (c + ll - 1.0) * dp.t(r.abs()) - 16.0 * a * a * (c - ll)
            }));
            Ok((o.commutator(K3Tilde, K1Tilde, phi)?, rhs))
        }),
        ("[K1-,K2-] = 1/2 {1 + alpha K2-, K3-}", |o, phi| {
            let a = o.dp.alpha;
            let w = move |r: f64| 1.0 + a * r * r;
            let left = o.mul(&o.k(K3Bar, phi)?, w);
            let right = o.k(K3Bar, &o.mul(phi, w))?;
            Ok((o.commutator(K1Bar, K2Bar, phi)?, left.add(&right).scale(0.5)))
        }),
        ("[K2-,K3-] = 8 K2- (1 + alpha K2-)", |o, phi| {
            let a = o.dp.alpha;
            Ok((
                o.commutator(K2Bar, K3Bar, phi)?,
                o.mul(phi, move |r| 8.0 * r * r * (1.0 + a * r * r)),
            ))
        }),
        ("[K3-,K1-] = 4 {1 + alpha K2-, K1-} - 16 alpha^2 c K2- (1 + alpha K2-) + 4 alpha (1 + alpha K2-)(1 + 3 alpha K2-)", |o, phi| {
            let dp = *o.dp;
            let (a, c) = (dp.alpha, dp.nu * (dp.nu - 1.0));
            let w = move |r: f64| 1.0 + a * r * r;
            let k1 = o.k(K1Bar, phi)?;
            let anti = o.mul(&k1, w).add(&o.k(K1Bar, &o.mul(phi, w))?);
            let rest = o.mul(phi, move |r| {
                let x = a * r * r;
                -16.0 * a * a * c * r * r * (1.0 + x) + 4.0 * a * (1.0 + x) * (1.0 + 3.0 * x)
            });
            Ok((o.commutator(K3Bar, K1Bar, phi)?, anti.scale(4.0).add(&rest)))
        }),
        ("K3~ simplified = K3~ unsimplified", |o, phi| {
            Ok((o.k(K3Tilde, phi)?, k3_tilde_unsimplified(o.dp, phi)?))
        }),
    ]
}

/// The three tilde-basis and three bar-basis commutation relations, plus the
/// agreement of the two `K3~` forms: one report per relation (worst test function).
pub fn commutator_residuals(dp: &DerivedParams, tests: &[GridFunction]) -> Result<Vec<ResidualReport>> {
    let ops = Ops { dp };
    commutator_checks()
        .into_iter()
        .map(|(name, check)| {
            let reports = tests
                .iter()
                .map(|phi| {
                    let (lhs, rhs) = check(&ops, phi)?;
                    Ok(ResidualReport::compare(name, &lhs, &rhs, EDGE_BAND))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(worst(reports))
        })
        .collect()
}

/// `16 alpha^2 [c + L(L+1) - 2]`, the value taken by the Casimir `Q`.
pub fn casimir_value(dp: &DerivedParams) -> f64 {
    let a = dp.alpha;
    16.0 * a * a * (dp.nu * (dp.nu - 1.0) + dp.l_term() - 2.0)
}

/// `C-(r) = [(2L+3)(2L-1) - 10 alpha r^2 - 7 alpha^2 r^4]/16`.
pub fn c_bar(dp: &DerivedParams, r: f64) -> f64 {
    let (a, l) = (dp.alpha, dp.l_eff);
    let x = a * r * r;
    ((2.0 * l + 3.0) * (2.0 * l - 1.0) - 10.0 * x - 7.0 * x * x) / 16.0
}

/// `Q phi` with
/// `Q = -16 alpha K2~ K1~ K2~ + K3~^2 - 16 alpha^2 [c + L(L+1) - 1] K2~^2 + 16 alpha K1~ - 32 alpha^2 [c - L(L+1)] K2~`.
pub fn apply_casimir(dp: &DerivedParams, phi: &GridFunction) -> Result<GridFunction> {
    let terms = casimir_terms(dp, phi)?;
    Ok(terms[1..].iter().fold(terms[0].clone(), |acc, t| acc.add(t)))
}

/// The five terms of `Q phi`, separately, so residuals can be scaled by the
/// largest of them (the eigenvalue itself may vanish).
fn casimir_terms(dp: &DerivedParams, phi: &GridFunction) -> Result<[GridFunction; 5]> {
    use Generator::*;
    let ops = Ops { dp };
    let (a, c, ll) = (dp.alpha, dp.nu * (dp.nu - 1.0), dp.l_term());
    let d = *dp;
    let t = move |r: f64| d.t(r.abs());
    let k2k1k2 = ops.k(K2Tilde, &ops.k(K1Tilde, &ops.mul(phi, t))?)?;
    let k3k3 = ops.k(K3Tilde, &ops.k(K3Tilde, phi)?)?;
    let k1 = ops.k(K1Tilde, phi)?;
    Ok([
        k2k1k2.scale(-16.0 * a),
        k3k3,
        ops.mul(phi, move |r| -16.0 * a * a * (c + ll - 1.0) * t(r) * t(r)),
        k1.scale(16.0 * a),
        ops.mul(phi, move |r| -32.0 * a * a * (c - ll) * t(r)),
    ])
}

/// Casimir checks:
/// (a) `Q psi_n = 16 alpha^2 [c + L(L+1) - 2] psi_n` for each supplied eigenstate;
/// (b) the curly-bracket operator of the bar-basis rewrite of `Q` annihilates test functions;
/// (c) `(1/64)[K3-^2 - 16 alpha^2 c K2-^2 + 8 {K1-, K2-}]` acts as multiplication by `C-(r)`.
pub fn casimir_residuals(
    dp: &DerivedParams,
    tests: &[GridFunction],
    eigenbasis: &[GridFunction],
) -> Result<Vec<ResidualReport>> {
    use Generator::*;
    let ops = Ops { dp };
    let q = casimir_value(dp);
    let mut out = Vec::new();
    for (n, psi) in eigenbasis.iter().enumerate() {
        let terms = casimir_terms(dp, psi)?;
        let scale = terms.iter().map(|t| t.window_norm(EDGE_BAND)).fold(0.0, f64::max);
        let lhs = terms[1..].iter().fold(terms[0].clone(), |acc, t| acc.add(t));
        out.push(ResidualReport::against_scale(
            format!("Q psi_{n} = {q} psi_{n}"),
            &lhs,
            &psi.scale(q),
            scale,
            EDGE_BAND,
        ));
    }

    let (a, c, ll) = (dp.alpha, dp.nu * (dp.nu - 1.0), dp.l_term());
    let mut bracket = Vec::new();
    let mut cbar = Vec::new();
    for phi in tests {
        let k3k3 = ops.k(K3Bar, &ops.k(K3Bar, phi)?)?;
        let k2k2 = ops.mul(phi, |r| r.powi(4));
        let anti = ops.anticommutator(K1Bar, K2Bar, phi)?;
        let k2 = ops.mul(phi, |r| r * r);

        let terms = [
            k3k3.scale(4.0 * a * a),
            k2k2.scale(-64.0 * a.powi(4) * c),
            anti.scale(32.0 * a * a),
            phi.scale(4.0 * a * a * (12.0 - 16.0 * ll)),
            k2.scale(160.0 * a.powi(3)),
            k2k2.scale(112.0 * a.powi(4)),
        ];
        let scale = terms.iter().map(|t| t.window_norm(EDGE_BAND)).fold(0.0, f64::max);
        let total = terms[1..].iter().fold(terms[0].clone(), |acc, t| acc.add(t));
        bracket.push(ResidualReport::against_scale(
            "bar-basis Casimir bracket = 0",
            &total,
            &GridFunction::zeros(&phi.grid),
            scale,
            EDGE_BAND,
        ));

        let lhs = k3k3.axpy(-16.0 * a * a * c, &k2k2).axpy(8.0, &anti).scale(1.0 / 64.0);
        let d = *dp;
        let rhs = ops.mul(phi, move |r| c_bar(&d, r));
        cbar.push(ResidualReport::compare(
            "C-(r) multiplication identity",
            &lhs,
            &rhs,
            EDGE_BAND,
        ));
    }
    out.push(worst(bracket));
    out.push(worst(cbar));
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum LadderOp {
    /// `A+` with `delta -> delta_n`.
    RaiseA,
    /// `A-` with `delta -> delta_n`.
    LowerA,
    /// `K+`.
    Raise,
    /// `K-`.
    Lower,
    /// `K0 = K1~/(4 lambda)`.
    Weight,
}

/// Where the `delta`-dependent prefactor of `K+-` is evaluated: to the right of
/// `A+-` (on `psi_n`) or to the left (on `psi_{n+-1}`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Default)]
pub enum DeltaOrdering {
    #[default]
    Right,
    Left,
}

/// `(lambda/alpha - L - 1)(lambda/alpha + L)`.
fn ladder_constant(dp: &DerivedParams) -> f64 {
    (dp.nu - dp.l_eff - 1.0) * (dp.nu + dp.l_eff)
}

/// Scalar prefactor of `K+` acting on `psi_n`.
pub fn raise_prefactor(dp: &DerivedParams, n: u32, ordering: DeltaOrdering) -> f64 {
    let inv = 1.0 / (16.0 * dp.lambda);
    match ordering {
        DeltaOrdering::Right => {
            let d = dp.delta_n(n);
            inv * (d + 1.0) * ((d + 2.0) / d).sqrt()
        }
        DeltaOrdering::Left => {
            let d = dp.delta_n(n + 1);
            inv * (d - 1.0) * (d / (d - 2.0)).sqrt()
        }
    }
}

/// Scalar prefactor of `K-` acting on `psi_n` (sign included). At `n = 0` the
/// radicand can be negative; its modulus is used since `A- psi_0 = 0` anyway.
pub fn lower_prefactor(dp: &DerivedParams, n: u32, ordering: DeltaOrdering) -> f64 {
    let inv = -1.0 / (16.0 * dp.lambda);
    match ordering {
        DeltaOrdering::Right => {
            let d = dp.delta_n(n);
            inv * (d - 1.0) * ((d - 2.0) / d).abs().sqrt()
        }
        DeltaOrdering::Left => {
            let d = dp.delta_n(n) - 2.0;
            inv * (d + 1.0) * (d / (d + 2.0)).abs().sqrt()
        }
    }
}

/// Applies a ladder operator to the `n`-th eigenstate, with `delta` replaced by
/// its eigenvalue `delta_n`.
pub fn apply_ladder(
    dp: &DerivedParams,
    n: u32,
    which: LadderOp,
    gf: &GridFunction,
    ordering: DeltaOrdering,
) -> Result<GridFunction> {
    let a = dp.alpha;
    let d = dp.delta_n(n);
    let k = ladder_constant(dp);
    let dpc = *dp;
    let a_plus = |gf: &GridFunction| -> Result<GridFunction> {
        let k3 = apply_generator(Generator::K3Tilde, dp, gf)?;
        Ok(k3.add(&gf.mul_fn(move |r| -4.0 * a * dpc.t(r.abs()) * (1.0 - d) + 4.0 * a * k / (1.0 + d))))
    };
    let a_minus = |gf: &GridFunction| -> Result<GridFunction> {
        let k3 = apply_generator(Generator::K3Tilde, dp, gf)?;
        Ok(k3.add(&gf.mul_fn(move |r| -4.0 * a * dpc.t(r.abs()) * (1.0 + d) + 4.0 * a * k / (1.0 - d))))
    };
    match which {
        LadderOp::RaiseA => a_plus(gf),
        LadderOp::LowerA => a_minus(gf),
        LadderOp::Raise => Ok(a_plus(gf)?.scale(raise_prefactor(dp, n, ordering))),
        LadderOp::Lower => Ok(a_minus(gf)?.scale(lower_prefactor(dp, n, ordering))),
        LadderOp::Weight => Ok(apply_generator(Generator::K1Tilde, dp, gf)?.scale(0.25 / dp.lambda)),
    }
}

/// `||K1~ psi - E_n psi|| / ||E_n psi||` on the interior window.
pub fn eigen_residual(dp: &DerivedParams, n: u32, psi: &GridFunction) -> Result<ResidualReport> {
    let lhs = apply_generator(Generator::K1Tilde, dp, psi)?;
    let e = energy(dp, n);
    Ok(ResidualReport::compare(
        format!("K1~ psi_{n} = E_{n} psi_{n}"),
        &lhs,
        &psi.scale(e),
        EDGE_BAND,
    ))
}

/// Matrix `<psi_m, Op_n psi_n>` by grid quadrature, where `op(n, psi_n)` applies
/// an operator that may depend on the column index.
pub fn matrix_on_grid(
    states: &[GridFunction],
    op: impl Fn(u32, &GridFunction) -> Result<GridFunction>,
) -> Result<Vec<Vec<f64>>> {
    let images = states
        .iter()
        .enumerate()
        .map(|(n, psi)| op(n as u32, psi))
        .collect::<Result<Vec<_>>>()?;
    Ok(states
        .iter()
        .map(|row| images.iter().map(|img| row.inner(img)).collect())
        .collect())
}

/// Diagonal of the deformed Casimir
/// `C = -K+ K- + K0^2 - (alpha/lambda)(delta - 5/4) K0 - alpha^2 delta/(8 lambda^2)`
/// on each supplied eigenstate, by grid quadrature.
pub fn deformed_casimir_on_grid(dp: &DerivedParams, states: &[GridFunction]) -> Result<Vec<f64>> {
    let ord = DeltaOrdering::Right;
    let (a, lam) = (dp.alpha, dp.lambda);
    states
        .iter()
        .enumerate()
        .map(|(n, psi)| {
            let n = n as u32;
            let d = dp.delta_n(n);
            let lowered = apply_ladder(dp, n, LadderOp::Lower, psi, ord)?;
            let kpkm = if n == 0 {
                GridFunction::zeros(&psi.grid)
            } else {
                apply_ladder(dp, n - 1, LadderOp::Raise, &lowered, ord)?
            };
            let k0 = apply_ladder(dp, n, LadderOp::Weight, psi, ord)?;
            let k0k0 = apply_ladder(dp, n, LadderOp::Weight, &k0, ord)?;
            let c = kpkm
                .scale(-1.0)
                .add(&k0k0)
                .axpy(-(a / lam) * (d - 1.25), &k0)
                .axpy(-a * a * d / (8.0 * lam * lam), psi);
            Ok(psi.inner(&c))
        })
        .collect()
}

pub use crate::repalg::deformed_casimir_value;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelParams, Parity, SectorLabel};
    use approx::assert_relative_eq;

    fn reference() -> DerivedParams {
        ModelParams::new(3.0, 4.0, SectorLabel::Radial { d: 3, l: 0 })
            .unwrap()
            .derive()
    }

    fn grid(dp: &DerivedParams, n: usize) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::for_model(dp, 8, n).unwrap())
    }

    #[test]
    fn multiplication_generators() {
        let dp = reference();
        let g = grid(&dp, 401);
        let psi = closed_form_states(&dp, &g, 0).remove(0);
        let k2 = apply_generator(Generator::K2Tilde, &dp, &psi).unwrap();
        // at r = 1, t = 1/2
        let one = GridFunction::from_fn(&g, |r| r);
        let k2r = apply_generator(Generator::K2Tilde, &dp, &one).unwrap();
        for i in 0..g.len() {
            assert_relative_eq!(k2.values[i], dp.t(g.r[i]) * psi.values[i]);
            assert_relative_eq!(k2r.values[i], dp.t(g.r[i]) * g.r[i]);
        }
        assert_eq!(dp.t(1.0), 0.5);
        let kb = apply_generator(Generator::K2Bar, &dp, &one).unwrap();
        assert_relative_eq!(kb.values[7], g.r[7].powi(3));
    }

    #[test]
    fn hamiltonian_annihilates_eigenstates_up_to_energy() {
        let dp = reference();
        let g = grid(&dp, 4001);
        for (n, psi) in closed_form_states(&dp, &g, 5).iter().enumerate() {
            let rep = eigen_residual(&dp, n as u32, psi).unwrap();
            assert!(rep.relative < 1e-8, "n={n}: {}", rep.relative);
        }
    }

    #[test]
    fn two_k3_forms_agree() {
        let dp = reference();
        let g = grid(&dp, 2001);
        for phi in test_functions(&dp, &g) {
            let a = apply_generator(Generator::K3Tilde, &dp, &phi).unwrap();
            let b = k3_tilde_unsimplified(&dp, &phi).unwrap();
            let scale = a.max_abs();
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!((x - y).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn commutators_on_reference() {
        let dp = reference();
        let g = identity_grid(&dp, 4001).unwrap();
        let reps = commutator_residuals(&dp, &test_functions(&dp, &g)).unwrap();
        assert_eq!(reps.len(), 7);
        for r in &reps {
            assert!(r.relative < 1e-6, "{}: {}", r.identity, r.relative);
        }
    }

    #[test]
    fn casimir_suite_on_reference() {
        let dp = reference();
        let tests = test_functions(&dp, &identity_grid(&dp, 4001).unwrap());
        let states = closed_form_states(&dp, &grid(&dp, 4001), 5);
        let reps = casimir_residuals(&dp, &tests, &states).unwrap();
        assert_eq!(reps.len(), 8);
        for r in &reps[..6] {
            assert!(r.passes(1e-6), "{}: {}", r.identity, r.relative);
        }
        for r in &reps[6..] {
            assert!(r.passes(1e-5), "{}: {}", r.identity, r.relative);
        }
    }

    #[test]
    fn commutators_converge_at_stencil_order() {
        let dp = reference();
        let run = |n| commutator_residuals(&dp, &test_functions(&dp, &identity_grid(&dp, n).unwrap())).unwrap();
        let (coarse, fine) = (run(1001), run(2001));
        for (c, f) in coarse.iter().zip(&fine).take(6) {
            let p = crate::report::observed_order(c, f).unwrap();
            assert!((5.0..7.0).contains(&p), "{}: order {p}", c.identity);
        }
    }

    #[test]
    fn casimir_reference_value() {
        let dp = reference();
        assert_relative_eq!(casimir_value(&dp), -224.0, max_relative = 1e-14);
        assert_relative_eq!(c_bar(&dp, 0.0), -3.0 / 16.0);
        assert_relative_eq!(deformed_casimir_value(&dp), -3.0 / 64.0, max_relative = 1e-14);
    }

    #[test]
    fn ladder_actions_on_reference() {
        let dp = reference();
        let g = grid(&dp, 4001);
        let states = closed_form_states(&dp, &g, 2);
        let ord = DeltaOrdering::Right;
        let kp = apply_ladder(&dp, 0, LadderOp::Raise, &states[0], ord).unwrap();
        assert_relative_eq!(
            states[1].inner(&kp),
            0.75 * (77.0f64 / 12.0).sqrt(),
            max_relative = 1e-8
        );
        let km = apply_ladder(&dp, 0, LadderOp::Lower, &states[0], ord).unwrap();
        assert!(km.norm() < 1e-8 * states[0].norm());
        let k0 = apply_ladder(&dp, 0, LadderOp::Weight, &states[0], ord).unwrap();
        let rep = ResidualReport::compare("K0", &k0, &states[0].scale(15.0 / 16.0), EDGE_BAND);
        assert!(rep.relative < 1e-8);
        for n in 0..3 {
            assert_relative_eq!(
                raise_prefactor(&dp, n, DeltaOrdering::Right),
                raise_prefactor(&dp, n, DeltaOrdering::Left),
                max_relative = 1e-12
            );
            assert_relative_eq!(
                lower_prefactor(&dp, n, DeltaOrdering::Right),
                lower_prefactor(&dp, n, DeltaOrdering::Left),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn sector_grid_mismatch_is_rejected() {
        let dp = reference();
        let line = ModelParams::new(1.0, 1.0, SectorLabel::Line { parity: Parity::Even })
            .unwrap()
            .derive();
        let g = grid(&line, 101);
        let phi = GridFunction::from_fn(&g, |x| (-x * x).exp());
        assert!(matches!(
            apply_generator(Generator::K1Tilde, &dp, &phi),
            Err(Error::SectorMismatch(_))
        ));
        let l1 = ModelParams::new(1.0, 1.0, SectorLabel::Radial { d: 3, l: 1 })
            .unwrap()
            .derive();
        let bad = Arc::new(RadialGrid::full_line(crate::grid::GridMap::Uniform, 21, 1.0).unwrap());
        let phi = GridFunction::zeros(&bad);
        // full-line grid for a radial sector is a mismatch before it is a singularity
        assert!(apply_generator(Generator::K1Tilde, &l1, &phi).is_err());
    }
}
