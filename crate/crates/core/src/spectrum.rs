//! Closed-form energies, quantum-number inversion and normalised wavefunctions.
//!
//! Line sectors reuse the radial formulas with `L = -1` (even) or `L = 0` (odd)
//! and a within-parity index; see [`full_line_energy`] for the full-line index.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{DerivedParams, Parity, SectorLabel};
use crate::specfun::{jacobi_fill, jacobi_fill_split, lg, GaussJacobi};

/// `E_n = alpha (4n^2 + 4n(L+1) + L + 1 + (4n + 2L + 3) lambda/alpha)`.
pub fn energy(dp: &DerivedParams, n: u32) -> f64 {
    energy_at(dp, f64::from(n))
}

/// The energy polynomial at a real level offset; the representation layer
/// evaluates its `lambda_p` through this so both agree bit for bit.
pub(crate) fn energy_at(dp: &DerivedParams, n: f64) -> f64 {
    let (a, l, nu) = (dp.alpha, dp.l_eff, dp.nu);
    a * (4.0 * n * n + 4.0 * n * (l + 1.0) + l + 1.0 + (4.0 * n + 2.0 * l + 3.0) * nu)
}

/// Line spectrum in the full-line index: `E_n = alpha (n^2 + (2n+1) lambda/alpha)`.
pub fn full_line_energy(dp: &DerivedParams, n: u32) -> f64 {
    let n = f64::from(n);
    dp.alpha * (n * n + (2.0 * n + 1.0) * dp.nu)
}

/// Constant-mass energy `omega (2n + L + 3/2)`.
pub fn constant_mass_energy(dp: &DerivedParams, n: u32) -> f64 {
    dp.omega * (2.0 * f64::from(n) + dp.l_eff + 1.5)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundState {
    pub n: u32,
    pub energy: f64,
    pub sector: SectorLabel,
}

pub fn bound_states(dp: &DerivedParams, n_max: u32) -> Vec<BoundState> {
    (0..=n_max)
        .map(|n| BoundState {
            n,
            energy: energy(dp, n),
            sector: dp.sector,
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuantumNumber {
    pub delta: f64,
    pub n: u32,
    /// Whether `E` sits on the spectrum (within a relative `1e-9` in `n`).
    pub exact: bool,
}

/// Inverts the spectrum: `delta = sqrt(E/alpha + nu(nu-1) + L(L+1))`,
/// `n = (delta - nu - L - 1)/2`.
pub fn delta_and_n(dp: &DerivedParams, e: f64) -> Result<QuantumNumber> {
    let nu = dp.nu;
    let radicand = e / dp.alpha + nu * (nu - 1.0) + dp.l_term();
    if radicand.is_nan() || radicand < 0.0 {
        return Err(Error::Domain {
            name: "delta^2",
            requirement: ">= 0",
            value: radicand,
        });
    }
    let delta = radicand.sqrt();
    let n_real = 0.5 * (delta - (nu + dp.l_eff + 1.0));
    let n_round = n_real.round();
    let exact = n_round >= 0.0 && (n_real - n_round).abs() <= 1e-9 * n_round.max(1.0);
    Ok(QuantumNumber {
        delta,
        n: n_round.max(0.0) as u32,
        exact,
    })
}

/// Normalisation constants in log space: `N_0` and `N_n/N_0`. Phases are all `+1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalizationTable {
    pub ln_n0: f64,
    pub ln_ratio: Vec<f64>,
}

impl NormalizationTable {
    pub fn n0(&self) -> f64 {
        self.ln_n0.exp()
    }

    pub fn ratio(&self, n: usize) -> f64 {
        self.ln_ratio[n].exp()
    }

    pub fn tau(&self, _n: usize) -> i8 {
        1
    }

    pub fn n_max(&self) -> usize {
        self.ln_ratio.len() - 1
    }
}

/// `ln N_0`. The line towers use their own constants, which equal the radial
/// `L = -1, 0` ones divided by `sqrt 2` (the full line carries twice the mass).
pub fn ln_ground_normalization(dp: &DerivedParams) -> f64 {
    let (a, nu) = (dp.alpha, dp.nu);
    let ln_pi = std::f64::consts::PI.ln();
    match dp.sector {
        SectorLabel::Line { parity: Parity::Even } => 0.5 * (0.5 * a.ln() + lg(nu + 1.0) - 0.5 * ln_pi - lg(nu + 0.5)),
        SectorLabel::Line { parity: Parity::Odd } => {
            0.5 * (std::f64::consts::LN_2 + 1.5 * a.ln() + lg(nu + 2.0) - 0.5 * ln_pi - lg(nu + 0.5))
        }
        SectorLabel::Radial { .. } => radial_ln_n0(a, nu, dp.l_eff),
    }
}

fn radial_ln_n0(a: f64, nu: f64, l: f64) -> f64 {
    0.5 * (std::f64::consts::LN_2 + (l + 1.5) * a.ln() + lg(nu + l + 2.0) - lg(l + 1.5) - lg(nu + 0.5))
}

/// `ln(N_n/N_0)`.
pub fn ln_normalization_ratio(dp: &DerivedParams, n: u32) -> f64 {
    let (nu, l) = (dp.nu, dp.l_eff);
    let n = f64::from(n);
    if n == 0.0 {
        return 0.0;
    }
    0.5 * (lg(l + 1.5) + lg(nu + 0.5) + lg(n + 1.0) + (nu + 2.0 * n + l + 1.0).ln() + lg(nu + n + l + 1.0)
        - lg(nu + l + 2.0)
        - lg(nu + n + 0.5)
        - lg(n + l + 1.5))
}

pub fn normalization_table(dp: &DerivedParams, n_max: u32) -> NormalizationTable {
    NormalizationTable {
        ln_n0: ln_ground_normalization(dp),
        ln_ratio: (0..=n_max).map(|n| ln_normalization_ratio(dp, n)).collect(),
    }
}

/// Evaluator for `psi_0 .. psi_{n_max}` sharing one normalisation table.
#[derive(Clone, Debug)]
pub struct ClosedForm {
    pub dp: DerivedParams,
    pub table: NormalizationTable,
}

impl ClosedForm {
    pub fn new(dp: &DerivedParams, n_max: u32) -> Self {
        Self {
            dp: *dp,
            table: normalization_table(dp, n_max),
        }
    }

    pub fn n_max(&self) -> usize {
        self.table.n_max()
    }

    /// `ln` of the unnormalised ground-state envelope `|r|^(L+1) f^-(nu+L+2)/2`;
    /// `-inf` where it vanishes.
    pub fn ln_envelope(&self, r: f64) -> f64 {
        let dp = &self.dp;
        let x = r.abs();
        let power = dp.l_eff + 1.0;
        let radial = if power == 0.0 {
            0.0
        } else if x == 0.0 {
            f64::NEG_INFINITY
        } else {
            power * x.ln()
        };
        radial - 0.5 * (dp.nu + dp.l_eff + 2.0) * (dp.alpha * x * x).ln_1p()
    }

    /// Sign picked up under `x -> -x` (odd line tower only).
    fn parity_sign(&self, r: f64) -> f64 {
        match self.dp.sector {
            SectorLabel::Line { parity: Parity::Odd } if r < 0.0 => -1.0,
            _ => 1.0,
        }
    }

    /// All of `psi_0(r) .. psi_{n_max}(r)`.
    pub fn eval_all(&self, r: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_max() + 1);
        self.eval_into(r, &mut out);
        out
    }

    pub(crate) fn eval_into(&self, r: f64, out: &mut Vec<f64>) {
        let start = out.len();
        let ar2 = self.dp.alpha * r * r;
        let f = 1.0 + ar2;
        jacobi_fill_split(&self.dp.jacobi_params(), ar2 / f, 1.0 / f, self.n_max() + 1, out);
        let base = self.table.ln_n0 + self.ln_envelope(r);
        let sign = self.parity_sign(r);
        for (n, p) in out[start..].iter_mut().enumerate() {
            *p *= sign * (base + self.table.ln_ratio[n]).exp();
        }
    }

    pub fn eval(&self, n: usize, r: f64) -> f64 {
        self.eval_all(r)[n]
    }

    /// Gauss-Jacobi rule that integrates every `psi_m psi_n` (and `t psi_m psi_n`) exactly.
    pub fn quadrature(&self) -> Result<GaussJacobi> {
        GaussJacobi::new(self.n_max() + 4, self.dp.jacobi_params())
    }

    /// `ln` of the factor turning `sum_i w_i P_m(t_i) P_n(t_i) g(t_i)` into
    /// `int psi_m psi_n g dr` (over the full line for line sectors).
    fn ln_quadrature_scale(&self) -> f64 {
        let dp = &self.dp;
        let half_line = 2.0 * self.table.ln_n0
            - (dp.l_eff + 1.5) * dp.alpha.ln()
            - (dp.nu + dp.l_eff + 2.0) * std::f64::consts::LN_2;
        if dp.sector.is_line() {
            half_line + std::f64::consts::LN_2
        } else {
            half_line
        }
    }

    /// Matrix `int psi_m g(t) psi_n dr` for `m, n <= n_max`, by Gauss-Jacobi quadrature.
    pub fn weighted_gram(&self, g: impl Fn(f64) -> f64) -> Result<Vec<Vec<f64>>> {
        let q = self.quadrature()?;
        let jp = self.dp.jacobi_params();
        let size = self.n_max() + 1;
        let scale = self.ln_quadrature_scale();
        let mut out = vec![vec![0.0; size]; size];
        let mut p = Vec::with_capacity(size);
        for (&t, &lw) in q.nodes.iter().zip(&q.ln_weights) {
            p.clear();
            jacobi_fill(&jp, t, size, &mut p);
            let gt = g(t);
            for m in 0..size {
                for n in 0..size {
                    let lnc = scale + lw + self.table.ln_ratio[m] + self.table.ln_ratio[n];
                    out[m][n] += lnc.exp() * gt * p[m] * p[n];
                }
            }
        }
        Ok(out)
    }

    /// Overlap matrix `<psi_m, psi_n>`.
    pub fn gram(&self) -> Result<Vec<Vec<f64>>> {
        self.weighted_gram(|_| 1.0)
    }
}

/// Normalised `psi_n` at a single point (`r >= 0` radial, any `x` for the line).
pub fn psi(dp: &DerivedParams, n: u32, r: f64) -> f64 {
    ClosedForm::new(dp, n).eval(n as usize, r)
}

/// CSV table `r,t,psi_<n>...` (first column `x` for line sectors), preceded by a
/// `#` line echoing all parameters.
pub fn tabulate_csv(dp: &DerivedParams, ns: &[u32], points: &[f64]) -> String {
    let n_max = ns.iter().copied().max().unwrap_or(0);
    let cf = ClosedForm::new(dp, n_max);
    let mut out = String::new();
    writeln!(out, "{}", parameter_echo(dp)).unwrap();
    let var = if dp.sector.is_line() { "x" } else { "r" };
    write!(out, "{var},t").unwrap();
    for n in ns {
        write!(out, ",psi_{n}").unwrap();
    }
    out.push('\n');
    for &r in points {
        let vals = cf.eval_all(r);
        write!(out, "{:.16e},{:.16e}", r, dp.t(r.abs())).unwrap();
        for &n in ns {
            write!(out, ",{:.16e}", vals[n as usize]).unwrap();
        }
        out.push('\n');
    }
    out
}

/// `# alpha=...,omega=...,...` header line shared by all CSV outputs.
pub fn parameter_echo(dp: &DerivedParams) -> String {
    format!(
        "# alpha={:.16e},omega={:.16e},sector={},Delta={:.16e},lambda={:.16e},L={},lambda_over_alpha={:.16e}",
        dp.alpha, dp.omega, dp.sector, dp.delta, dp.lambda, dp.l_eff, dp.nu
    )
}
