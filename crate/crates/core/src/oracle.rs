//! Independent ground truth: a conservative second-order finite-difference
//! discretisation of the Sturm-Liouville form `-(f^2 psi')' + V~_eff psi = E psi`
//! solved with the tridiagonal eigensolver. Nothing here uses a closed form,
//! except the comparison helpers at the end.
//!
//! The grid is uniform in `s` with `r = r(s)`; in `s` the problem reads
//! `-(p psi_s)_s + w V psi = E w psi` with `p = f^2/r'` and `w = r'`, and is
//! symmetrised by `phi = sqrt(w) psi`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::grid::GridMap;
use crate::model::{DerivedParams, Parity, SectorLabel};
use crate::report::{Check, ResidualReport};
use crate::spectrum::{energy, parameter_echo, ClosedForm};
use crate::tridiag::SymTridiag;

/// Decades below the peak at which the outer Dirichlet wall is placed.
pub const TAIL_DECADES: f64 = 15.0;

/// Decades by which the outer wall's eigenvalue shift must be suppressed.
pub const WALL_DECADES: f64 = 12.0;

/// Default interior points of the coarse grid (the fine grid has twice as many).
pub const DEFAULT_POINTS: usize = 2000;

/// Condition at the inner end (`r = 0`, or `x = 0` for a folded line sector).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum InnerBoundary {
    /// Nodes at `s_i = i h`, `psi(0) = 0`.
    Dirichlet,
    /// Cell-centred nodes `s_i = (i + 1/2) h`, `psi'(0) = 0` (even line states).
    Neumann,
    /// Cell-centred nodes, `psi(0) = 0` (odd line states).
    CellDirichlet,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SLDiscretization {
    pub map: GridMap,
    pub inner: InnerBoundary,
    pub h: f64,
    pub s: Vec<f64>,
    pub r: Vec<f64>,
    /// `dr/ds`, the weight of the generalised problem.
    pub weight: Vec<f64>,
    /// Unsymmetrised tridiagonal `A` of `A psi = E W psi`: diagonal and the
    /// (negative) coupling `-p_{i+1/2}/h^2`.
    pub a_diag: Vec<f64>,
    pub a_off: Vec<f64>,
    /// `W^-1/2 A W^-1/2`.
    pub matrix: SymTridiag,
}

/// Outer radius where the large-`r` envelope `f^-(nu+1)/2` of the bound states
/// has fallen by [`TAIL_DECADES`], pushed further out if needed so the wall's
/// own eigenvalue shift is negligible. The envelope follows from the equation's
/// behaviour at infinity (`psi ~ r^-(nu+1)`), and reduces to the Gaussian
/// `exp(-omega r^2/4)` as `alpha -> 0`.
///
/// The wall shift goes as the ratio of the decaying to the growing solution,
/// `r^-(nu+1) / r^(nu-2) = f^-(2 nu - 1)/2`, which for heavy tails (`nu -> 1`)
/// is far slower than the envelope itself.
pub fn oracle_rmax(dp: &DerivedParams) -> f64 {
    let ln10 = std::f64::consts::LN_10;
    let envelope = 2.0 * TAIL_DECADES * ln10 / (dp.nu + 1.0);
    let wall = 2.0 * WALL_DECADES * ln10 / (2.0 * dp.nu - 1.0);
    (envelope.max(wall).exp_m1() / dp.alpha).sqrt()
}

fn inner_boundary(dp: &DerivedParams) -> InnerBoundary {
    match dp.sector {
        SectorLabel::Radial { .. } => InnerBoundary::Dirichlet,
        SectorLabel::Line { parity: Parity::Even } => InnerBoundary::Neumann,
        SectorLabel::Line { parity: Parity::Odd } => InnerBoundary::CellDirichlet,
    }
}

/// Sinh map with scale `1/sqrt(alpha + omega/2)` out to [`oracle_rmax`].
pub fn default_map(dp: &DerivedParams) -> (GridMap, f64) {
    (
        GridMap::Sinh {
            scale: dp.length_scale(),
        },
        oracle_rmax(dp),
    )
}

/// Conservative three-point stencil
/// `(A psi)_i = [p_{i+1/2}(psi_i - psi_{i+1}) + p_{i-1/2}(psi_i - psi_{i-1})]/h^2 + w_i V_i psi_i`
/// with `p = f^2/r'` at the midpoints and Dirichlet at `r_max`.
pub fn assemble(dp: &DerivedParams, map: GridMap, n_points: usize, r_max: f64) -> Result<SLDiscretization> {
    crate::error::require_positive("r_max", r_max)?;
    if n_points < 3 {
        return Err(crate::Error::GridTooShort { len: n_points, min: 3 });
    }
    let inner = inner_boundary(dp);
    let s_max = map.s_of_r(r_max);
    let (h, offset) = match inner {
        InnerBoundary::Dirichlet => (s_max / (n_points + 1) as f64, 1.0),
        InnerBoundary::Neumann | InnerBoundary::CellDirichlet => (s_max / n_points as f64, 0.5),
    };
    let s: Vec<f64> = (0..n_points).map(|i| (i as f64 + offset) * h).collect();
    let r: Vec<f64> = s.iter().map(|&x| map.r(x)).collect();
    let weight: Vec<f64> = s.iter().map(|&x| map.dr(x)).collect();
    let p = |x: f64| {
        let f = dp.f(map.r(x));
        f * f / map.dr(x)
    };
    let h2 = h * h;
    let p_plus: Vec<f64> = s.iter().map(|&x| p(x + 0.5 * h)).collect();
    let p_minus: Vec<f64> = s.iter().map(|&x| p(x - 0.5 * h)).collect();
    let mut a_diag: Vec<f64> = (0..n_points)
        .map(|i| (p_plus[i] + p_minus[i]) / h2 + weight[i] * dp.v_tilde(r[i]))
        .collect();
    match inner {
        InnerBoundary::Dirichlet => {}
        // ghost value psi_{-1} = +-psi_0 across x = 0
        InnerBoundary::Neumann => a_diag[0] -= p_minus[0] / h2,
        InnerBoundary::CellDirichlet => a_diag[0] += p_minus[0] / h2,
    }
    let a_off: Vec<f64> = p_plus[..n_points - 1].iter().map(|pp| -pp / h2).collect();
    let diag = a_diag.iter().zip(&weight).map(|(a, w)| a / w).collect();
    let off = (0..n_points - 1)
        .map(|i| a_off[i] / (weight[i] * weight[i + 1]).sqrt())
        .collect();
    Ok(SLDiscretization {
        map,
        inner,
        h,
        s,
        r,
        weight,
        a_diag,
        a_off,
        matrix: SymTridiag::new(diag, off)?,
    })
}

pub fn assemble_default(dp: &DerivedParams, n_points: usize) -> Result<SLDiscretization> {
    let (map, r_max) = default_map(dp);
    assemble(dp, map, n_points, r_max)
}

impl SLDiscretization {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        *self.r.last().expect("non-empty grid")
    }

    /// `sum_i h w_i a_i b_i`, the discrete `L^2(dr)` product (half line).
    pub fn inner_product(&self, a: &[f64], b: &[f64]) -> f64 {
        (0..self.len()).map(|i| self.h * self.weight[i] * a[i] * b[i]).sum()
    }

    /// `<psi, A psi> / <psi, W psi>` with the unsymmetrised operator.
    pub fn rayleigh_quotient(&self, psi: &[f64]) -> f64 {
        let n = self.len();
        let mut num = 0.0;
        for i in 0..n {
            let mut a = self.a_diag[i] * psi[i];
            if i > 0 {
                a += self.a_off[i - 1] * psi[i - 1];
            }
            if i + 1 < n {
                a += self.a_off[i] * psi[i + 1];
            }
            num += psi[i] * a;
        }
        let den: f64 = (0..n).map(|i| self.weight[i] * psi[i] * psi[i]).sum();
        num / den
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `psi` at the nodes, unit norm under [`SLDiscretization::inner_product`],
    /// sign fixed by `sign psi_n(first node) = (-1)^n`.
    pub eigenvectors: Vec<Vec<f64>>,
    pub h: f64,
    pub n_points: usize,
    pub r_max: f64,
}

/// The `k` lowest eigenpairs.
pub fn eigensolve(disc: &SLDiscretization, k: usize) -> Result<SpectralResult> {
    let (values, phis) = disc.matrix.lowest_eigenpairs(k)?;
    let eigenvectors = phis
        .into_iter()
        .enumerate()
        .map(|(n, phi)| {
            let mut psi: Vec<f64> = phi
                .iter()
                .zip(&disc.weight)
                .map(|(v, w)| v / (w * disc.h).sqrt())
                .collect();
            // psi_n ~ P_n(-1) r^(L+1) near the origin, and P_n(-1) has sign (-1)^n
            let want = if n % 2 == 0 { 1.0 } else { -1.0 };
            if psi[0].signum() != want {
                psi.iter_mut().for_each(|v| *v = -*v);
            }
            psi
        })
        .collect();
    Ok(SpectralResult {
        eigenvalues: values,
        eigenvectors,
        h: disc.h,
        n_points: disc.len(),
        r_max: disc.r_max(),
    })
}

/// Point count with half the spacing of `n_points` for the same inner boundary.
fn refined(inner: InnerBoundary, n_points: usize) -> usize {
    match inner {
        InnerBoundary::Dirichlet => 2 * n_points + 1,
        InnerBoundary::Neumann | InnerBoundary::CellDirichlet => 2 * n_points,
    }
}

/// `(4 E_{h/2} - E_h) / 3`.
pub fn richardson(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

/// Eigenvalues on grids with spacing `h, h/2, h/4` and the observed order
/// `log2((E_h - E_{h/2}) / (E_{h/2} - E_{h/4}))` for each of the `k` lowest levels.
pub fn observed_orders(dp: &DerivedParams, k: usize, n_points: usize) -> Result<Vec<f64>> {
    let inner = inner_boundary(dp);
    let counts = [
        n_points,
        refined(inner, n_points),
        refined(inner, refined(inner, n_points)),
    ];
    let levels = counts
        .par_iter()
        .map(|&n| assemble_default(dp, n)?.matrix.lowest_eigenvalues(k))
        .collect::<Result<Vec<_>>>()?;
    Ok((0..k)
        .map(|j| ((levels[0][j] - levels[1][j]) / (levels[1][j] - levels[2][j])).log2())
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub n: u32,
    pub e_closed: f64,
    pub e_h: f64,
    pub e_h2: f64,
    pub e_extrap: f64,
    pub rel_err: f64,
    /// `|<psi_oracle, psi_closed>|` on the fine grid, both unit-normalised there.
    pub overlap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumComparison {
    #[serde(skip)]
    pub dp: DerivedParams,
    pub h: f64,
    pub n_points: usize,
    pub r_max: f64,
    pub rows: Vec<SpectrumRow>,
}

impl SpectrumComparison {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{}", parameter_echo(&self.dp)).unwrap();
        writeln!(out, "n,E_closed,E_h,E_h2,E_extrap,rel_err,overlap").unwrap();
        for r in &self.rows {
            writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.n, r.e_closed, r.e_h, r.e_h2, r.e_extrap, r.rel_err, r.overlap
            )
            .unwrap();
        }
        out
    }
}

/// Oracle eigenpairs `0..=n_max` on `h` and `h/2` (solved in parallel), Richardson
/// extrapolation, and comparison with the closed-form energies and states.
pub fn compare_spectrum(dp: &DerivedParams, n_max: u32, n_points: usize) -> Result<SpectrumComparison> {
    compare_spectrum_to(dp, n_max, n_points, oracle_rmax(dp))
}

/// [`compare_spectrum`] with the outer wall at `r_max`.
pub fn compare_spectrum_to(dp: &DerivedParams, n_max: u32, n_points: usize, r_max: f64) -> Result<SpectrumComparison> {
    let k = n_max as usize + 1;
    let (map, _) = default_map(dp);
    let fine_points = refined(inner_boundary(dp), n_points);
    let (coarse, fine) = rayon::join(
        || -> Result<_> { assemble(dp, map, n_points, r_max)?.matrix.lowest_eigenvalues(k) },
        || -> Result<_> {
            let disc = assemble(dp, map, fine_points, r_max)?;
            let spec = eigensolve(&disc, k)?;
            Ok((disc, spec))
        },
    );
    let (coarse, (disc, spec)) = (coarse?, fine?);

    let cf = ClosedForm::new(dp, n_max);
    let samples: Vec<Vec<f64>> = disc.r.iter().map(|&r| cf.eval_all(r)).collect();
    let rows = (0..k)
        .map(|n| {
            let e_closed = energy(dp, n as u32);
            let e_extrap = richardson(coarse[n], spec.eigenvalues[n]);
            let exact: Vec<f64> = samples.iter().map(|row| row[n]).collect();
            let oracle = &spec.eigenvectors[n];
            let overlap = disc.inner_product(oracle, &exact)
                / (disc.inner_product(oracle, oracle) * disc.inner_product(&exact, &exact)).sqrt();
            SpectrumRow {
                n: n as u32,
                e_closed,
                e_h: coarse[n],
                e_h2: spec.eigenvalues[n],
                e_extrap,
                rel_err: (e_extrap - e_closed).abs() / e_closed.abs(),
                overlap: overlap.abs(),
            }
        })
        .collect();
    Ok(SpectrumComparison {
        dp: *dp,
        h: spec.h,
        n_points: spec.n_points,
        r_max: spec.r_max,
        rows,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectrumTolerances {
    /// Relative error of the extrapolated eigenvalue.
    pub energy: f64,
    /// Allowed `1 - |overlap|`.
    pub overlap: f64,
    /// Coarse-grid interior points.
    pub n_points: usize,
}

impl Default for SpectrumTolerances {
    fn default() -> Self {
        Self {
            energy: 1e-6,
            overlap: 1e-6,
            n_points: DEFAULT_POINTS,
        }
    }
}

/// One energy check and one overlap check per requested level.
pub fn verify_spectrum(dp: &DerivedParams, ns: &[u32], tol: &SpectrumTolerances) -> Result<Vec<Check>> {
    let n_max = ns.iter().copied().max().unwrap_or(0);
    let cmp = compare_spectrum(dp, n_max, tol.n_points)?;
    let mut out = Vec::with_capacity(2 * ns.len());
    for &n in ns {
        let row = &cmp.rows[n as usize];
        out.push(Check::new(
            ResidualReport::new(
                format!("{}: Richardson E_{n} vs closed form", dp.sector),
                (row.e_extrap - row.e_closed).abs(),
                row.e_closed.abs(),
                None,
            ),
            tol.energy,
        ));
        out.push(Check::new(
            ResidualReport::new(
                format!("{}: 1 - |<psi_{n} oracle, psi_{n}>|", dp.sector),
                1.0 - row.overlap,
                1.0,
                None,
            ),
            tol.overlap,
        ));
    }
    Ok(out)
}
