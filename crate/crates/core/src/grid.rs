//! Grids, grid functions, finite differences and quadrature.
//!
//! Grids are uniform in a computational variable `s` and mapped to the physical
//! coordinate by `r = r(s)`. With the sinh map the algebraic tails of the
//! wavefunctions (`psi ~ r^-(lambda/alpha + 1)`) fit on a few thousand points.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::DerivedParams;
use crate::spectrum::ClosedForm;

/// Points skipped at each end when forming residual norms: the one-sided
/// stencils there are less accurate than the interior ones.
pub const EDGE_BAND: usize = 5;

/// Minimum number of points for the 7-point stencils and Gregory end corrections.
pub const MIN_POINTS: usize = 10;

/// Relative tail level used to place the outer boundary.
pub const TAIL_LEVEL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "map", rename_all = "lowercase")]
pub enum GridMap {
    Uniform,
    /// `r = scale * sinh(s)`.
    Sinh {
        scale: f64,
    },
}

impl GridMap {
    pub fn r(&self, s: f64) -> f64 {
        match *self {
            GridMap::Uniform => s,
            GridMap::Sinh { scale } => scale * s.sinh(),
        }
    }

    pub fn dr(&self, s: f64) -> f64 {
        match *self {
            GridMap::Uniform => 1.0,
            GridMap::Sinh { scale } => scale * s.cosh(),
        }
    }

    pub fn d2r(&self, s: f64) -> f64 {
        match *self {
            GridMap::Uniform => 0.0,
            GridMap::Sinh { scale } => scale * s.sinh(),
        }
    }

    pub fn s_of_r(&self, r: f64) -> f64 {
        match *self {
            GridMap::Uniform => r,
            GridMap::Sinh { scale } => (r / scale).asinh(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    /// `s_i = i h`, `i = 1..=N`: origin excluded.
    HalfLine,
    /// `N` odd, symmetric about the origin, which is the middle point.
    FullLine,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadialGrid {
    pub map: GridMap,
    pub domain: Domain,
    /// Spacing in `s`.
    pub h: f64,
    pub s: Vec<f64>,
    pub r: Vec<f64>,
    /// `dr/ds` at each point.
    pub dr: Vec<f64>,
    /// `d2r/ds2` at each point.
    pub d2r: Vec<f64>,
}

impl RadialGrid {
    fn build(map: GridMap, domain: Domain, h: f64, s: Vec<f64>) -> Self {
        let r = s.iter().map(|&x| map.r(x)).collect();
        let dr = s.iter().map(|&x| map.dr(x)).collect();
        let d2r = s.iter().map(|&x| map.d2r(x)).collect();
        Self {
            map,
            domain,
            h,
            s,
            r,
            dr,
            d2r,
        }
    }

    pub fn half_line(map: GridMap, n: usize, s_max: f64) -> Result<Self> {
        if n < MIN_POINTS {
            return Err(Error::GridTooShort {
                len: n,
                min: MIN_POINTS,
            });
        }
        let h = s_max / n as f64;
        let s = (1..=n).map(|i| i as f64 * h).collect();
        Ok(Self::build(map, Domain::HalfLine, h, s))
    }

    /// `n` is rounded up to the next odd number so the origin is a grid point.
    pub fn full_line(map: GridMap, n: usize, s_max: f64) -> Result<Self> {
        if n < MIN_POINTS {
            return Err(Error::GridTooShort {
                len: n,
                min: MIN_POINTS,
            });
        }
        let n = n | 1;
        let half = (n - 1) / 2;
        let h = s_max / half as f64;
        let s = (0..n).map(|i| (i as f64 - half as f64) * h).collect();
        Ok(Self::build(map, Domain::FullLine, h, s))
    }

    /// Sinh-mapped grid for a model: full line for line sectors, half line
    /// otherwise, ending where every `psi_n`, `n <= n_max`, has dropped below
    /// [`TAIL_LEVEL`] of its peak.
    pub fn for_model(dp: &DerivedParams, n_max: u32, n_points: usize) -> Result<Self> {
        Self::with_rmax(dp, n_points, tail_radius(dp, n_max, TAIL_LEVEL))
    }

    pub fn with_rmax(dp: &DerivedParams, n_points: usize, r_max: f64) -> Result<Self> {
        let map = GridMap::Sinh {
            scale: dp.length_scale(),
        };
        let s_max = map.s_of_r(r_max);
        if dp.sector.is_line() {
            Self::full_line(map, n_points, s_max)
        } else {
            Self::half_line(map, n_points, s_max)
        }
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        *self.r.last().expect("non-empty grid")
    }

    /// Gregory end-corrected trapezoid weights in `s` (times `h`), exact for
    /// polynomials of degree 5. Half-line grids include a virtual origin point
    /// carrying a zero integrand.
    pub fn quadrature_weights(&self) -> Vec<f64> {
        const END: [f64; 5] = [95.0 / 288.0, 317.0 / 240.0, 23.0 / 30.0, 793.0 / 720.0, 157.0 / 160.0];
        let offset = match self.domain {
            Domain::HalfLine => 1,
            Domain::FullLine => 0,
        };
        let total = self.len() + offset;
        (offset..total)
            .map(|j| {
                let c = if j < END.len() {
                    END[j]
                } else if total - 1 - j < END.len() {
                    END[total - 1 - j]
                } else {
                    1.0
                };
                c * self.h
            })
            .collect()
    }
}

/// Smallest `r` beyond which all `|psi_n|`, `n <= n_max`, stay below `level` times their peak.
pub fn tail_radius(dp: &DerivedParams, n_max: u32, level: f64) -> f64 {
    let cf = ClosedForm::new(dp, n_max);
    let a = dp.length_scale();
    // log scan from 1e-3 a to 1e14 a, 40 points per decade
    let rs: Vec<f64> = (0..=680).map(|k| a * 10f64.powf(-3.0 + k as f64 / 40.0)).collect();
    let vals: Vec<Vec<f64>> = rs.iter().map(|&r| cf.eval_all(r)).collect();
    let mut r_max: f64 = 0.0;
    for n in 0..=n_max as usize {
        let peak = vals.iter().map(|v| v[n].abs()).fold(0.0, f64::max);
        // last scan point still above the threshold, plus one step
        let last = vals.iter().rposition(|v| v[n].abs() >= level * peak).unwrap_or(0);
        r_max = r_max.max(rs[(last + 1).min(rs.len() - 1)]);
    }
    r_max
}

/// Real function sampled on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    pub grid: Arc<RadialGrid>,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridTooShort {
                len: values.len(),
                min: grid.len(),
            });
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain {
                name: "grid value",
                requirement: "finite",
                value: *bad,
            });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: &Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.r.iter().map(|&r| f(r)).collect();
        Self {
            grid: Arc::clone(grid),
            values,
        }
    }

    pub fn zeros(grid: &Arc<RadialGrid>) -> Self {
        Self {
            grid: Arc::clone(grid),
            values: vec![0.0; grid.len()],
        }
    }

    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values,
        }
    }

    /// Pointwise product with `g(r)`.
    pub fn mul_fn(&self, g: impl Fn(f64) -> f64) -> Self {
        self.with_values(self.values.iter().zip(&self.grid.r).map(|(v, &r)| v * g(r)).collect())
    }

    pub fn scale(&self, c: f64) -> Self {
        self.with_values(self.values.iter().map(|v| c * v).collect())
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &GridFunction) -> Self {
        debug_assert!(Arc::ptr_eq(&self.grid, &other.grid) || self.grid == other.grid);
        self.with_values(self.values.iter().zip(&other.values).map(|(a, b)| a + c * b).collect())
    }

    pub fn add(&self, other: &GridFunction) -> Self {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &GridFunction) -> Self {
        self.axpy(-1.0, other)
    }

    /// `int self dr` (full line or `[0, r_max]`).
    pub fn integrate(&self) -> f64 {
        self.grid
            .quadrature_weights()
            .iter()
            .zip(&self.values)
            .zip(&self.grid.dr)
            .map(|((w, v), d)| w * v * d)
            .sum()
    }

    pub fn inner(&self, other: &GridFunction) -> f64 {
        let w = self.grid.quadrature_weights();
        (0..self.values.len())
            .map(|i| w[i] * self.grid.dr[i] * self.values[i] * other.values[i])
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).max(0.0).sqrt()
    }

    pub fn normalized(&self) -> Self {
        self.scale(1.0 / self.norm())
    }

    /// L2 norm over the interior, skipping `band` points at each end.
    pub fn window_norm(&self, band: usize) -> f64 {
        let n = self.values.len();
        if n <= 2 * band {
            return 0.0;
        }
        let h = self.grid.h;
        (band..n - band)
            .map(|i| self.values[i] * self.values[i] * self.grid.dr[i] * h)
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Finite-difference weights for derivatives `0..=order` at `x0` (Fornberg's algorithm).
pub fn fornberg_weights(x0: f64, nodes: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

const D1_CENTRAL: [f64; 7] = [
    -1.0 / 60.0,
    3.0 / 20.0,
    -3.0 / 4.0,
    0.0,
    3.0 / 4.0,
    -3.0 / 20.0,
    1.0 / 60.0,
];
const D2_CENTRAL: [f64; 7] = [
    1.0 / 90.0,
    -3.0 / 20.0,
    3.0 / 2.0,
    -49.0 / 18.0,
    3.0 / 2.0,
    -3.0 / 20.0,
    1.0 / 90.0,
];

/// First and second derivatives with respect to `s` (6th order interior,
/// 8-point one-sided stencils in the first and last three points).
fn s_derivatives(values: &[f64], h: f64) -> (Vec<f64>, Vec<f64>) {
    let n = values.len();
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    // differences u_j - u_i make constants differentiate to exactly zero
    for i in 3..n - 3 {
        let (mut a, mut b) = (0.0, 0.0);
        for k in 0..7 {
            let du = values[i + k - 3] - values[i];
            a += D1_CENTRAL[k] * du;
            b += D2_CENTRAL[k] * du;
        }
        d1[i] = a / h;
        d2[i] = b / (h * h);
    }
    let offsets: Vec<f64> = (0..8).map(|k| k as f64).collect();
    for i in 0..3 {
        let w = fornberg_weights(i as f64, &offsets, 2);
        let (mut a, mut b) = (0.0, 0.0);
        let (mut ar, mut br) = (0.0, 0.0);
        for k in 0..8 {
            let du = values[k] - values[i];
            a += w[1][k] * du;
            b += w[2][k] * du;
            // mirrored stencil at the right edge: d/ds flips sign
            let j = n - 1 - i;
            let dur = values[n - 1 - k] - values[j];
            ar -= w[1][k] * dur;
            br += w[2][k] * dur;
        }
        d1[i] = a / h;
        d2[i] = b / (h * h);
        d1[n - 1 - i] = ar / h;
        d2[n - 1 - i] = br / (h * h);
    }
    (d1, d2)
}

/// First or second derivative with respect to `r`.
pub fn differentiate(gf: &GridFunction, order: u8) -> Result<GridFunction> {
    let (d1, d2) = derivatives(gf)?;
    match order {
        1 => Ok(d1),
        2 => Ok(d2),
        _ => Err(Error::Domain {
            name: "derivative order",
            requirement: "1 or 2",
            value: f64::from(order),
        }),
    }
}

/// `(d/dr, d2/dr2)` of a grid function.
pub fn derivatives(gf: &GridFunction) -> Result<(GridFunction, GridFunction)> {
    let g = &gf.grid;
    if g.len() < MIN_POINTS {
        return Err(Error::GridTooShort {
            len: g.len(),
            min: MIN_POINTS,
        });
    }
    let (ds, dss) = s_derivatives(&gf.values, g.h);
    let mut d1 = Vec::with_capacity(g.len());
    let mut d2 = Vec::with_capacity(g.len());
    for i in 0..g.len() {
        let rp = g.dr[i];
        d1.push(ds[i] / rp);
        d2.push((dss[i] - g.d2r[i] / rp * ds[i]) / (rp * rp));
    }
    Ok((gf.with_values(d1), gf.with_values(d2)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridStats {
    pub h: f64,
    pub n: usize,
    pub r_max: f64,
}

impl RadialGrid {
    pub fn stats(&self) -> GridStats {
        GridStats {
            h: self.h,
            n: self.len(),
            r_max: self.r_max(),
        }
    }
}
