//! Constant-mass limit `alpha -> 0`: the spectrum goes over to the linear
//! oscillator spectrum `omega (2n + L + 3/2)` and the `K+` elements to the
//! su(1,1) values `sqrt((n+1)(n+L+3/2))`, both with deviations linear in alpha.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{require_positive, Result};
use crate::model::{ModelParams, SectorLabel};
use crate::repalg::raise_element;
use crate::spectrum::energy;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LimitRow {
    pub alpha: f64,
    pub n: u32,
    pub energy: f64,
    pub energy_limit: f64,
    /// `|E_n - omega(2n+L+3/2)|`.
    pub energy_deviation: f64,
    /// First-order prediction `4n^2 + 4n(L+1) + L + 1 + (4n+2L+3)/2` of `deviation/alpha`.
    pub energy_slope: f64,
    pub raise: f64,
    pub raise_limit: f64,
    /// Relative deviation of `<n+1|K+|n>` from its su(1,1) value.
    pub raise_deviation: f64,
    /// First-order prediction `(2n+L+3/2)/omega` of `raise_deviation/alpha`.
    pub raise_slope: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LimitSlope {
    pub n: u32,
    pub energy: f64,
    pub raise: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitSweep {
    pub omega: f64,
    pub sector: SectorLabel,
    pub n_max: u32,
    pub alphas: Vec<f64>,
    pub rows: Vec<LimitRow>,
}

/// `per_decade` points per decade from `hi` down to `lo`, both included.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Result<Vec<f64>> {
    require_positive("lo", lo)?;
    require_positive("hi", hi / lo - 1.0)?;
    let steps = ((hi / lo).log10() * per_decade.max(1) as f64).round().max(1.0) as usize;
    let (a, b) = (hi.ln(), lo.ln());
    Ok((0..=steps)
        .map(|i| (a + (b - a) * i as f64 / steps as f64).exp())
        .collect())
}

fn rows_at(alpha: f64, omega: f64, sector: SectorLabel, n_max: u32) -> Result<Vec<LimitRow>> {
    let dp = ModelParams::new(alpha, omega, sector)?.derive();
    let l = dp.l_eff;
    Ok((0..=n_max)
        .map(|n| {
            let nf = f64::from(n);
            let e = energy(&dp, n);
            let e0 = omega * (2.0 * nf + l + 1.5);
            let k = raise_element(&dp, n);
            let k0 = ((nf + 1.0) * (nf + l + 1.5)).sqrt();
            LimitRow {
                alpha,
                n,
                energy: e,
                energy_limit: e0,
                energy_deviation: (e - e0).abs(),
                energy_slope: 4.0 * nf * nf + 4.0 * nf * (l + 1.0) + l + 1.0 + (4.0 * nf + 2.0 * l + 3.0) / 2.0,
                raise: k,
                raise_limit: k0,
                raise_deviation: (k / k0 - 1.0).abs(),
                raise_slope: (2.0 * nf + l + 1.5) / omega,
            }
        })
        .collect())
}

/// Evaluates every `alpha` in parallel; rows are ordered by `alpha` as given, then `n`.
pub fn sweep(omega: f64, sector: SectorLabel, alphas: &[f64], n_max: u32) -> Result<LimitSweep> {
    let per_alpha = alphas
        .par_iter()
        .map(|&a| rows_at(a, omega, sector, n_max))
        .collect::<Result<Vec<_>>>()?;
    Ok(LimitSweep {
        omega,
        sector,
        n_max,
        alphas: alphas.to_vec(),
        rows: per_alpha.into_iter().flatten().collect(),
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let m = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / m, ly.iter().sum::<f64>() / m);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

impl LimitSweep {
    fn column(&self, n: u32, pick: impl Fn(&LimitRow) -> f64) -> (Vec<f64>, Vec<f64>) {
        self.rows
            .iter()
            .filter(|r| r.n == n)
            .map(|r| (r.alpha, pick(r)))
            .unzip()
    }

    /// Log-log slopes of both deviations against alpha, per level.
    pub fn slopes(&self) -> Vec<LimitSlope> {
        (0..=self.n_max)
            .map(|n| {
                let (a, e) = self.column(n, |r| r.energy_deviation);
                let (_, k) = self.column(n, |r| r.raise_deviation);
                LimitSlope {
                    n,
                    energy: loglog_slope(&a, &e),
                    raise: loglog_slope(&a, &k),
                }
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "# omega={:.16e},sector={},nmax={},alpha_min={:.16e},alpha_max={:.16e},points={}",
            self.omega,
            self.sector,
            self.n_max,
            self.alphas.iter().copied().fold(f64::INFINITY, f64::min),
            self.alphas.iter().copied().fold(0.0, f64::max),
            self.alphas.len()
        )
        .unwrap();
        writeln!(
            out,
            "alpha,n,E,E_limit,E_deviation,E_deviation_over_alpha,E_slope_predicted,K_plus,K_plus_limit,K_plus_deviation,K_plus_deviation_over_alpha,K_plus_slope_predicted"
        )
        .unwrap();
        for r in &self.rows {
            writeln!(
                out,
                "{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.alpha,
                r.n,
                r.energy,
                r.energy_limit,
                r.energy_deviation,
                r.energy_deviation / r.alpha,
                r.energy_slope,
                r.raise,
                r.raise_limit,
                r.raise_deviation,
                r.raise_deviation / r.alpha,
                r.raise_slope
            )
            .unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Parity;

    #[test]
    fn log_grid_spans_decades() {
        let g = log_grid(1e-5, 1e-1, 2).unwrap();
        assert_eq!(g.len(), 9);
        assert!((g[0] - 1e-1).abs() < 1e-16 && (g[8] / 1e-5 - 1.0).abs() < 1e-12);
        assert!((g[1] / g[0] - 10f64.powf(-0.5)).abs() < 1e-12);
        assert!(log_grid(1e-1, 1e-5, 2).is_err());
    }

    #[test]
    fn slope_of_power_laws() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(1.5)).collect();
        assert!((loglog_slope(&x, &y) - 1.5).abs() < 1e-13);
    }

    #[test]
    fn deviations_are_linear_in_alpha() {
        let alphas = log_grid(1e-5, 1e-1, 2).unwrap();
        for sector in [
            SectorLabel::Radial { d: 3, l: 0 },
            SectorLabel::Radial { d: 3, l: 2 },
            SectorLabel::Line { parity: Parity::Even },
            SectorLabel::Line { parity: Parity::Odd },
        ] {
            let sw = sweep(4.0, sector, &alphas, 4).unwrap();
            for s in sw.slopes() {
                assert!((s.energy - 1.0).abs() <= 0.05, "{sector} {s:?}");
                assert!((s.raise - 1.0).abs() <= 0.05, "{sector} {s:?}");
            }
        }
    }

    #[test]
    fn first_order_coefficients_match_at_small_alpha() {
        let sw = sweep(4.0, SectorLabel::Radial { d: 3, l: 1 }, &[1e-3, 1e-6], 3).unwrap();
        for r in &sw.rows {
            let tol = if r.alpha > 1e-4 { 1e-2 } else { 1e-5 };
            assert!(
                (r.energy_deviation / r.alpha / r.energy_slope - 1.0).abs() < tol,
                "{r:?}"
            );
            assert!((r.raise_deviation / r.alpha / r.raise_slope - 1.0).abs() < tol, "{r:?}");
        }
    }

    #[test]
    fn csv_echoes_parameters() {
        let sw = sweep(4.0, SectorLabel::Radial { d: 3, l: 0 }, &[1e-2, 1e-3], 1).unwrap();
        let csv = sw.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# omega=4.0000000000000000e0,sector=radial:3,0,nmax=1"));
        assert_eq!(lines.len(), 2 + 4);
        assert_eq!(lines[2].split(',').count(), 12);
    }
}
