//! Closed-form layer: Gamma, absolute moments of the standard symmetric
//! alpha-stable law, and the constants c0..c8 as explicit formulas.
//!
//! Everything here is a pure function of its arguments. The module is
//! deliberately quadrature-free: c4 has no self contained closed form
//! (it is c1/r with r coming from quadrature), so it only accepts an
//! injected r value.

mod gamma;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use gamma::gamma_fn;

const PI: f64 = std::f64::consts::PI;

#[derive(Debug, Error, PartialEq)]
pub enum SpecFunError {
    #[error("gamma function pole at non-positive integer argument {0}")]
    GammaPole(f64),
    #[error("stability index must satisfy 1 < alpha <= 2, got {0}")]
    AlphaRange(f64),
    #[error("{constant}: alpha = 2 is a degenerate boundary; the formula is stated for alpha in (1,2)")]
    DegenerateAlpha { constant: &'static str },
    #[error("{constant}: gamma = {gamma} outside the required range ({lo}, {hi})")]
    GammaRegime {
        constant: &'static str,
        gamma: f64,
        lo: f64,
        hi: f64,
    },
    #[error("moment order gamma = {gamma} outside (-1, alpha) for alpha = {alpha}")]
    MomentRange { gamma: f64, alpha: f64 },
    #[error("{0} has no closed form; compute its integral representation instead")]
    NoClosedForm(&'static str),
    #[error("c4 has no self-contained closed form; supply r(alpha,gamma) via c4_from_r")]
    RequiresInjectedR,
    #[error("unknown constant name `{0}`")]
    UnknownConstant(String),
    #[error("{constant} requires a gamma argument")]
    MissingGamma { constant: &'static str },
}

/// Stability index of a symmetric alpha-stable process, 1 < alpha <= 2.
/// alpha = 2 is the Brownian reference case; operations whose formulas
/// degenerate there reject it explicitly instead of extrapolating.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Alpha(f64);

impl Alpha {
    pub fn new(value: f64) -> Result<Self, SpecFunError> {
        if value.is_finite() && value > 1.0 && value <= 2.0 {
            Ok(Alpha(value))
        } else {
            Err(SpecFunError::AlphaRange(value))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn is_brownian_boundary(self) -> bool {
        self.0 == 2.0
    }

    /// Guard for formulas stated only on alpha in (1,2).
    pub fn require_below_two(self, constant: &'static str) -> Result<f64, SpecFunError> {
        if self.is_brownian_boundary() {
            Err(SpecFunError::DegenerateAlpha { constant })
        } else {
            Ok(self.0)
        }
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// m_gamma = E|X_1|^gamma for the standard symmetric alpha-stable law
/// with characteristic function exp(-|xi|^alpha), finite for
/// -1 < gamma < alpha:
///
///   m_gamma = 2^gamma Gamma((1+gamma)/2) Gamma((alpha-gamma)/alpha)
///             / (sqrt(pi) Gamma((2-gamma)/2))
pub fn moment_m(alpha: Alpha, gamma: f64) -> Result<f64, SpecFunError> {
    let a = alpha.get();
    if !(gamma > -1.0 && gamma < a) {
        return Err(SpecFunError::MomentRange { gamma, alpha: a });
    }
    if gamma == 0.0 {
        return Ok(1.0);
    }
    let num = 2f64.powf(gamma) * gamma_fn((1.0 + gamma) / 2.0)? * gamma_fn((a - gamma) / a)?;
    let den = PI.sqrt() * gamma_fn((2.0 - gamma) / 2.0)?;
    Ok(num / den)
}

/// Closed enumeration of the constants table. Unknown names are an
/// error, never a fallback.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstantName {
    C0,
    C1,
    C2,
    C3,
    C4,
    C5,
    C6,
    C7,
    C8,
    R,
    Q,
}

impl ConstantName {
    pub const ALL: [ConstantName; 11] = [
        ConstantName::C0,
        ConstantName::C1,
        ConstantName::C2,
        ConstantName::C3,
        ConstantName::C4,
        ConstantName::C5,
        ConstantName::C6,
        ConstantName::C7,
        ConstantName::C8,
        ConstantName::R,
        ConstantName::Q,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ConstantName::C0 => "c0",
            ConstantName::C1 => "c1",
            ConstantName::C2 => "c2",
            ConstantName::C3 => "c3",
            ConstantName::C4 => "c4",
            ConstantName::C5 => "c5",
            ConstantName::C6 => "c6",
            ConstantName::C7 => "c7",
            ConstantName::C8 => "c8",
            ConstantName::R => "r",
            ConstantName::Q => "q",
        }
    }

    /// Whether the closed form takes a gamma argument.
    pub fn needs_gamma(self) -> bool {
        matches!(
            self,
            ConstantName::C3 | ConstantName::C4 | ConstantName::C8 | ConstantName::R | ConstantName::Q
        )
    }
}

impl fmt::Display for ConstantName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConstantName {
    type Err = SpecFunError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "c0" => Ok(ConstantName::C0),
            "c1" => Ok(ConstantName::C1),
            "c2" => Ok(ConstantName::C2),
            "c3" => Ok(ConstantName::C3),
            "c4" => Ok(ConstantName::C4),
            "c5" => Ok(ConstantName::C5),
            "c6" => Ok(ConstantName::C6),
            "c7" => Ok(ConstantName::C7),
            "c8" => Ok(ConstantName::C8),
            "r" => Ok(ConstantName::R),
            "q" => Ok(ConstantName::Q),
            other => Err(SpecFunError::UnknownConstant(other.to_owned())),
        }
    }
}

/// c0 = Gamma((alpha+1)/alpha) / pi, the density of E(d_t L^0_t) at t = 1.
pub fn c0(alpha: Alpha) -> Result<f64, SpecFunError> {
    let a = alpha.get();
    Ok(gamma_fn((a + 1.0) / a)? / PI)
}

/// c1 = (alpha-1) pi m_{alpha-1} / Gamma(1/alpha), the local-time
/// coefficient of the Tanaka formula.
pub fn c1(alpha: Alpha) -> Result<f64, SpecFunError> {
    let a = alpha.get();
    Ok((a - 1.0) * PI * moment_m(alpha, a - 1.0)? / gamma_fn(1.0 / a)?)
}

/// c2 = 2(alpha-1) m_{2(alpha-1)} / (alpha m_{alpha-2}).
pub fn c2(alpha: Alpha) -> Result<f64, SpecFunError> {
    let a = alpha.require_below_two("c2")?;
    Ok(2.0 * (a - 1.0) * moment_m(alpha, 2.0 * (a - 1.0))? / (a * moment_m(alpha, a - 2.0)?))
}

/// c3 = gamma m_gamma / (alpha m_{gamma-alpha}), the Doob-Meyer
/// coefficient on gamma in (alpha-1, alpha).
pub fn c3(alpha: Alpha, gamma: f64) -> Result<f64, SpecFunError> {
    let a = alpha.get();
    if !(gamma > a - 1.0 && gamma < a) {
        return Err(SpecFunError::GammaRegime {
            constant: "c3",
            gamma,
            lo: a - 1.0,
            hi: a,
        });
    }
    c3_unchecked(alpha, gamma)
}

/// c3 without the Doob-Meyer regime gate; used where the formula itself
/// is the object (the c8 difference, the c2 limit). Still requires the
/// moments to exist, i.e. alpha-1 <= gamma < alpha. At the boundary
/// gamma = alpha-1 the value is the m_{-1} = +inf limit, which is 0.
fn c3_unchecked(alpha: Alpha, gamma: f64) -> Result<f64, SpecFunError> {
    let a = alpha.get();
    if gamma == a - 1.0 {
        return Ok(0.0);
    }
    Ok(gamma * moment_m(alpha, gamma)? / (a * moment_m(alpha, gamma - a)?))
}

/// c4 = c1 / r with the renormalized level-difference integral r
/// injected from quadrature. Valid on the Dirichlet regime
/// gamma in ((alpha-1)/2, alpha-1).
pub fn c4_from_r(alpha: Alpha, gamma: f64, r: f64) -> Result<f64, SpecFunError> {
    let a = alpha.get();
    if !(gamma > (a - 1.0) / 2.0 && gamma < a - 1.0) {
        return Err(SpecFunError::GammaRegime {
            constant: "c4",
            gamma,
            lo: (a - 1.0) / 2.0,
            hi: a - 1.0,
        });
    }
    Ok(c1(alpha)? / r)
}

/// c5 = alpha / (2 Gamma(1-alpha) cos(alpha pi / 2)), the Levy-density
/// prefactor. Gamma(1-alpha) and cos(alpha pi/2) are both negative on
/// (1,2); the product is positive.
pub fn c5(alpha: Alpha) -> Result<f64, SpecFunError> {
    let a = alpha.require_below_two("c5")?;
    Ok(a / (2.0 * gamma_fn(1.0 - a)? * (a * PI / 2.0).cos()))
}

/// c6 = 1/c1, the potential-kernel coefficient v(x) = c6 |x|^(alpha-1).
pub fn c6(alpha: Alpha) -> Result<f64, SpecFunError> {
    alpha.require_below_two("c6")?;
    Ok(1.0 / c1(alpha)?)
}

/// The direct Gamma expression for c6, used as an independent route:
/// c6 = Gamma(2-alpha) cos((alpha-1) pi/2) / (pi (alpha-1)). Agreement
/// with 1/c1 is the duplication-formula consistency check.
pub fn c6_gamma_expression(alpha: Alpha) -> Result<f64, SpecFunError> {
    let a = alpha.require_below_two("c6")?;
    Ok(gamma_fn(2.0 - a)? * ((a - 1.0) * PI / 2.0).cos() / (PI * (a - 1.0)))
}

/// c7 = c2 c6^2, the bracket coefficient of the normalized martingale.
pub fn c7(alpha: Alpha) -> Result<f64, SpecFunError> {
    Ok(c2(alpha)? * c6(alpha)?.powi(2))
}

/// c8 = c3(alpha, 2 gamma) - 2 c3(alpha, gamma) on
/// alpha-1 <= gamma < alpha/2. The stated upper boundary gamma = alpha/2
/// is rejected: m_{2 gamma} degenerates there and the bracket integral
/// diverges.
pub fn c8(alpha: Alpha, gamma: f64) -> Result<f64, SpecFunError> {
    let a = alpha.get();
    if !(gamma >= a - 1.0 && gamma < a / 2.0) {
        return Err(SpecFunError::GammaRegime {
            constant: "c8",
            gamma,
            lo: a - 1.0,
            hi: a / 2.0,
        });
    }
    Ok(c3_unchecked(alpha, 2.0 * gamma)? - 2.0 * c3_unchecked(alpha, gamma)?)
}

/// Closed-form dispatcher over the constants table. r and q have no
/// closed form; c4 requires the injected r (`c4_from_r`).
pub fn constant_closed_form(
    name: ConstantName,
    alpha: Alpha,
    gamma: Option<f64>,
) -> Result<f64, SpecFunError> {
    let need = |g: Option<f64>, constant: &'static str| {
        g.ok_or(SpecFunError::MissingGamma { constant })
    };
    match name {
        ConstantName::C0 => c0(alpha),
        ConstantName::C1 => c1(alpha),
        ConstantName::C2 => c2(alpha),
        ConstantName::C3 => c3(alpha, need(gamma, "c3")?),
        ConstantName::C4 => Err(SpecFunError::RequiresInjectedR),
        ConstantName::C5 => c5(alpha),
        ConstantName::C6 => c6(alpha),
        ConstantName::C7 => c7(alpha),
        ConstantName::C8 => c8(alpha, need(gamma, "c8")?),
        ConstantName::R => Err(SpecFunError::NoClosedForm("r")),
        ConstantName::Q => Err(SpecFunError::NoClosedForm("q")),
    }
}

/// One entry of a constants record: the closed-form value when the
/// table gives one, and the integral representation once quadrature
/// has produced it.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct ConstantValue {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integral_rep: Option<f64>,
}

impl ConstantValue {
    pub fn relative_gap(&self) -> Option<f64> {
        match (self.closed_form, self.integral_rep) {
            (Some(c), Some(i)) => Some((c - i).abs() / c.abs().max(f64::MIN_POSITIVE)),
            _ => None,
        }
    }
}

/// All constants for one (alpha, gamma) pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstantsRecord {
    pub alpha: Alpha,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    pub entries: BTreeMap<ConstantName, ConstantValue>,
}

impl ConstantsRecord {
    pub fn new(alpha: Alpha, gamma: Option<f64>) -> Self {
        ConstantsRecord {
            alpha,
            gamma,
            entries: BTreeMap::new(),
        }
    }

    /// Type invariants: finiteness, positivity of the strictly positive
    /// constants, and the exact inter-constant identities at 1e-12
    /// relative. Returns the first violation found.
    pub fn validate(&self) -> Result<(), String> {
        const POSITIVE: [ConstantName; 8] = [
            ConstantName::C0,
            ConstantName::C1,
            ConstantName::C2,
            ConstantName::C3,
            ConstantName::C5,
            ConstantName::C6,
            ConstantName::C7,
            ConstantName::C8,
        ];
        for (name, v) in &self.entries {
            for val in [v.closed_form, v.integral_rep].into_iter().flatten() {
                if !val.is_finite() {
                    return Err(format!("{name}: non-finite value {val}"));
                }
                if POSITIVE.contains(name) && val <= 0.0 {
                    return Err(format!("{name}: expected strictly positive, got {val}"));
                }
            }
        }
        let closed = |n: ConstantName| self.entries.get(&n).and_then(|v| v.closed_form);
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
        if let (Some(c6v), Some(c1v)) = (closed(ConstantName::C6), closed(ConstantName::C1)) {
            if rel(c6v * c1v, 1.0) > 1e-12 {
                return Err(format!("c6*c1 = {} differs from 1", c6v * c1v));
            }
        }
        if let (Some(c7v), Some(c2v), Some(c6v)) = (
            closed(ConstantName::C7),
            closed(ConstantName::C2),
            closed(ConstantName::C6),
        ) {
            if rel(c7v, c2v * c6v * c6v) > 1e-12 {
                return Err(format!("c7 = {c7v} differs from c2*c6^2"));
            }
        }
        if let (Some(c8v), Some(gamma)) = (closed(ConstantName::C8), self.gamma) {
            let both = c3_unchecked(self.alpha, 2.0 * gamma)
                .and_then(|hi| c3_unchecked(self.alpha, gamma).map(|lo| hi - 2.0 * lo));
            if let Ok(diff) = both {
                if rel(c8v, diff) > 1e-12 {
                    return Err(format!("c8 = {c8v} differs from c3(2g) - 2 c3(g) = {diff}"));
                }
            }
        }
        Ok(())
    }
}
