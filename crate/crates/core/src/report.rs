//! Named residuals of operator identities, serialised as JSON by the CLI.

use serde::{Deserialize, Serialize};

use crate::grid::{GridFunction, RadialGrid};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub h: f64,
    pub n: usize,
    pub r_max: f64,
}

impl From<&RadialGrid> for GridInfo {
    fn from(g: &RadialGrid) -> Self {
        Self {
            h: g.h,
            n: g.len(),
            r_max: g.r_max(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub identity: String,
    pub residual: f64,
    pub scale: f64,
    pub relative: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub grid: Option<GridInfo>,
}

impl ResidualReport {
    /// `relative = residual/scale`; a vanishing scale gives `relative = residual`.
    pub fn new(identity: impl Into<String>, residual: f64, scale: f64, grid: Option<GridInfo>) -> Self {
        let relative = if scale > 0.0 { residual / scale } else { residual };
        Self {
            identity: identity.into(),
            residual,
            scale,
            relative,
            grid,
        }
    }

    /// Compares two grid functions on the interior window.
    pub fn compare(identity: impl Into<String>, lhs: &GridFunction, rhs: &GridFunction, band: usize) -> Self {
        let diff = lhs.sub(rhs);
        let scale = lhs.window_norm(band).max(rhs.window_norm(band));
        Self::new(
            identity,
            diff.window_norm(band),
            scale,
            Some(GridInfo::from(lhs.grid.as_ref())),
        )
    }

    /// Residual of `lhs - rhs` against an explicit scale (for identities whose
    /// right side vanishes).
    pub fn against_scale(
        identity: impl Into<String>,
        lhs: &GridFunction,
        rhs: &GridFunction,
        scale: f64,
        band: usize,
    ) -> Self {
        let diff = lhs.sub(rhs);
        Self::new(
            identity,
            diff.window_norm(band),
            scale,
            Some(GridInfo::from(lhs.grid.as_ref())),
        )
    }

    pub fn passes(&self, tolerance: f64) -> bool {
        self.relative.is_finite() && self.relative <= tolerance
    }
}

/// A residual together with the tolerance it is held to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    #[serde(flatten)]
    pub report: ResidualReport,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(report: ResidualReport, tolerance: f64) -> Self {
        let pass = report.passes(tolerance);
        Self {
            report,
            tolerance,
            pass,
        }
    }
}

/// `ln(r_coarse/r_fine) / ln(h_coarse/h_fine)` for the same identity on two grids.
pub fn observed_order(coarse: &ResidualReport, fine: &ResidualReport) -> Option<f64> {
    let (gc, gf) = (coarse.grid?, fine.grid?);
    Some((coarse.residual / fine.residual).ln() / (gc.h / gf.h).ln())
}
