//! Problem parameters, derived constants and the radial/line sector logic.
//!
//! Units follow the usual convention for this oscillator: `hbar = 2 m0 = 1`,
//! so `alpha` and `omega` both carry dimensions of inverse length squared.
//! The mass profile is `M(r) = 1/f(r)^2` with `f(r) = 1 + alpha r^2`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::specfun::JacobiParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// Effective angular momentum used when the line is folded onto a half line.
    pub fn l_eff(self) -> f64 {
        match self {
            Parity::Even => -1.0,
            Parity::Odd => 0.0,
        }
    }

    /// `psi(-x) = sign * psi(x)`.
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    /// Full-line level index `2 nu` or `2 nu + 1`.
    pub fn full_line_index(self, nu: u32) -> u32 {
        match self {
            Parity::Even => 2 * nu,
            Parity::Odd => 2 * nu + 1,
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parity::Even => f.write_str("even"),
            Parity::Odd => f.write_str("odd"),
        }
    }
}

/// Which solvable family a problem instance belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum SectorLabel {
    /// `d`-dimensional radial problem, `d >= 2`, angular momentum `l`.
    Radial { d: u32, l: u32 },
    /// One-dimensional oscillator on the full line, one parity tower.
    Line { parity: Parity },
}

impl SectorLabel {
    pub fn radial(d: u32, l: u32) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidSector(format!("radial sectors need d >= 2, got d = {d}")));
        }
        Ok(SectorLabel::Radial { d, l })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SectorLabel::Radial { d, l } => Self::radial(d, l).map(|_| ()),
            SectorLabel::Line { .. } => Ok(()),
        }
    }

    /// `L = l + (d - 3)/2`, or `-1`/`0` for the even/odd line towers.
    pub fn l_eff(&self) -> f64 {
        match *self {
            SectorLabel::Radial { d, l } => f64::from(l) + (f64::from(d) - 3.0) / 2.0,
            SectorLabel::Line { parity } => parity.l_eff(),
        }
    }

    pub fn is_line(&self) -> bool {
        matches!(self, SectorLabel::Line { .. })
    }

    pub fn parity(&self) -> Option<Parity> {
        match *self {
            SectorLabel::Line { parity } => Some(parity),
            SectorLabel::Radial { .. } => None,
        }
    }

    /// Spatial dimension: `d` for radial sectors, 1 for the line.
    pub fn dimension(&self) -> u32 {
        match *self {
            SectorLabel::Radial { d, .. } => d,
            SectorLabel::Line { .. } => 1,
        }
    }
}

impl fmt::Display for SectorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SectorLabel::Radial { d, l } => write!(f, "radial:{d},{l}"),
            SectorLabel::Line { parity } => write!(f, "line:{parity}"),
        }
    }
}

/// Parses `radial:d,l`, `line:even`, `line:odd` (and bare `line`, meaning even).
impl FromStr for SectorLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, rest) = match s.split_once(':') {
            Some((k, r)) => (k.trim(), Some(r.trim())),
            None => (s, None),
        };
        match (kind.to_ascii_lowercase().as_str(), rest) {
            ("radial", Some(rest)) => {
                let (d, l) = rest
                    .split_once(',')
                    .ok_or_else(|| Error::InvalidSector(format!("expected radial:d,l, got {s}")))?;
                let d = d
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidSector(format!("bad dimension in {s}")))?;
                let l = l
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidSector(format!("bad angular momentum in {s}")))?;
                SectorLabel::radial(d, l)
            }
            ("line", None) => Ok(SectorLabel::Line { parity: Parity::Even }),
            ("line", Some(p)) => match p.to_ascii_lowercase().as_str() {
                "even" => Ok(SectorLabel::Line { parity: Parity::Even }),
                "odd" => Ok(SectorLabel::Line { parity: Parity::Odd }),
                _ => Err(Error::InvalidSector(format!("unknown parity in {s}"))),
            },
            _ => Err(Error::InvalidSector(s.to_string())),
        }
    }
}

/// A complete, validated problem instance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModelParams")]
pub struct ModelParams {
    pub alpha: f64,
    pub omega: f64,
    pub sector: SectorLabel,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModelParams {
    alpha: f64,
    omega: f64,
    sector: SectorLabel,
}

impl TryFrom<RawModelParams> for ModelParams {
    type Error = Error;

    fn try_from(raw: RawModelParams) -> Result<Self> {
        ModelParams::new(raw.alpha, raw.omega, raw.sector)
    }
}

impl ModelParams {
    pub fn new(alpha: f64, omega: f64, sector: SectorLabel) -> Result<Self> {
        require_positive("alpha", alpha)?;
        require_positive("omega", omega)?;
        sector.validate()?;
        Ok(Self { alpha, omega, sector })
    }

    pub fn derive(&self) -> DerivedParams {
        // parameters were validated at construction
        derive_unchecked(*self)
    }
}

/// Cached derived constants. Every other module reads these rather than
/// recomputing them, so all modules see bit-identical values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DerivedParams {
    pub alpha: f64,
    pub omega: f64,
    pub sector: SectorLabel,
    /// `sqrt(omega^2 + alpha^2)`
    pub delta: f64,
    /// `(alpha + Delta)/2`
    pub lambda: f64,
    /// Effective angular momentum `L`.
    pub l_eff: f64,
    /// `lambda / alpha`
    pub nu: f64,
}

/// Validates and derives. Rejects `alpha <= 0` or `omega <= 0`.
pub fn derive_params(params: &ModelParams) -> Result<DerivedParams> {
    require_positive("alpha", params.alpha)?;
    require_positive("omega", params.omega)?;
    params.sector.validate()?;
    Ok(derive_unchecked(*params))
}

fn derive_unchecked(params: ModelParams) -> DerivedParams {
    let ModelParams { alpha, omega, sector } = params;
    let delta = omega.hypot(alpha);
    let lambda = 0.5 * (alpha + delta);
    // (alpha + Delta)/(2 alpha) without forming lambda/alpha from rounded lambda
    let nu = 0.5 * (1.0 + delta / alpha);
    DerivedParams {
        alpha,
        omega,
        sector,
        delta,
        lambda,
        l_eff: sector.l_eff(),
        nu,
    }
}

/// `f`, `M = 1/f^2` and `f' = 2 alpha r` at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Profiles {
    pub f: f64,
    pub mass: f64,
    pub f_prime: f64,
}

pub fn mass_and_profiles(dp: &DerivedParams, r: f64) -> Result<Profiles> {
    if !r.is_finite() || (!dp.sector.is_line() && r < 0.0) {
        return Err(Error::Domain {
            name: "r",
            requirement: "finite (and >= 0 for radial sectors)",
            value: r,
        });
    }
    let f = dp.f(r);
    Ok(Profiles {
        f,
        mass: 1.0 / (f * f),
        f_prime: 2.0 * dp.alpha * r,
    })
}

/// `(V~_eff, V_eff)`: the potential entering the Sturm-Liouville form, and the
/// Cartesian effective potential it was derived from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectivePotentials {
    pub v_tilde: f64,
    pub v_eff: f64,
}

pub fn effective_potentials(dp: &DerivedParams, r: f64) -> Result<EffectivePotentials> {
    if !r.is_finite() || (!dp.sector.is_line() && r < 0.0) {
        return Err(Error::Domain {
            name: "r",
            requirement: "finite (and >= 0 for radial sectors)",
            value: r,
        });
    }
    let l_term = dp.l_term();
    if r == 0.0 && l_term != 0.0 {
        return Err(Error::SingularPoint { l_term });
    }
    let (a, w) = (dp.alpha, dp.omega);
    let d = f64::from(dp.sector.dimension());
    let r2 = r * r;
    let v_eff = 0.25 * (w * w - 4.0 * a * a * (l_term + 2.0 * d)) * r2 - a * (2.0 * l_term + 2.0 * d - 1.0);
    Ok(EffectivePotentials {
        v_tilde: dp.v_tilde(r),
        v_eff,
    })
}

pub fn t_of_r(dp: &DerivedParams, r: f64) -> Result<f64> {
    if !r.is_finite() || (!dp.sector.is_line() && r < 0.0) {
        return Err(Error::Domain {
            name: "r",
            requirement: "finite (and >= 0 for radial sectors)",
            value: r,
        });
    }
    Ok(dp.t(r))
}

/// Inverse of [`t_of_r`] on `r >= 0`.
pub fn r_of_t(dp: &DerivedParams, t: f64) -> Result<f64> {
    if !(-1.0..1.0).contains(&t) {
        return Err(Error::OutOfRange(t));
    }
    Ok(((1.0 + t) / ((1.0 - t) * dp.alpha)).sqrt())
}

impl DerivedParams {
    /// `L(L+1)`; zero for both line towers.
    pub fn l_term(&self) -> f64 {
        self.l_eff * (self.l_eff + 1.0)
    }

    pub fn f(&self, r: f64) -> f64 {
        self.alpha.mul_add(r * r, 1.0)
    }

    /// `t = (alpha r^2 - 1)/(alpha r^2 + 1)`, evaluated as `1 - 2/f`.
    pub fn t(&self, r: f64) -> f64 {
        let ar2 = self.alpha * r * r;
        (ar2 - 1.0) / (ar2 + 1.0)
    }

    /// `V~_eff(r) = L(L+1)/r^2 + (omega^2 - 8 alpha^2) r^2/4 - alpha`.
    pub fn v_tilde(&self, r: f64) -> f64 {
        let (a, w) = (self.alpha, self.omega);
        let centrifugal = if self.l_term() == 0.0 {
            0.0
        } else {
            self.l_term() / (r * r)
        };
        centrifugal + 0.25 * (w * w - 8.0 * a * a) * r * r - a
    }

    /// `delta_n = lambda/alpha + L + 1 + 2n`, the value of the delta operator on the n-th state.
    pub fn delta_n(&self, n: u32) -> f64 {
        self.nu + self.l_eff + 1.0 + 2.0 * f64::from(n)
    }

    /// Exponents `(lambda/alpha - 1/2, L + 1/2)` of the Jacobi polynomials.
    pub fn jacobi_params(&self) -> JacobiParams {
        JacobiParams::new(self.nu - 0.5, self.l_eff + 0.5)
            .expect("lambda/alpha > 1 and L >= -1 keep both exponents above -1")
    }

    /// `d = 2, l = 0` gives `L = -1/2`, an attractive `-1/(4 r^2)` term. Supported but
    /// not certified by the oracle.
    pub fn is_critical_centrifugal(&self) -> bool {
        !self.sector.is_line() && self.l_eff == -0.5
    }

    /// Natural length used to map grids: `1/sqrt(alpha + omega/2)`. Tends to the
    /// oscillator length for small alpha and to `1/sqrt(alpha)` for large alpha.
    pub fn length_scale(&self) -> f64 {
        1.0 / (self.alpha + 0.5 * self.omega).sqrt()
    }

    pub fn params(&self) -> ModelParams {
        ModelParams {
            alpha: self.alpha,
            omega: self.omega,
            sector: self.sector,
        }
    }

    /// Same alpha and omega with another sector.
    pub fn with_sector(&self, sector: SectorLabel) -> Result<DerivedParams> {
        derive_params(&ModelParams::new(self.alpha, self.omega, sector)?)
    }
}
