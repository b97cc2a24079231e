//! Analytic objects defined by integrals: the Levy exponent and model
//! description, the resolvent density u^(p), the potential difference
//! v, and the integral representations of the constants (c5, c3, c8,
//! r, q). All quadrature routes through [`quad`].

pub mod quad;

mod integrals;
mod model;

pub use integrals::{constant_integral, constant_integral_tol, IntegralName};
pub use model::{LevyModel, ModelKind};
pub use quad::{adaptive_quad, Domain, QuadratureResult};

use thiserror::Error;

use crate::specfun::SpecFunError;
use quad::Incomplete;

/// Default relative tolerance for smooth integrands.
pub const SMOOTH_TOL: f64 = 1e-10;
/// Default relative tolerance for singular or oscillatory integrands.
pub const SINGULAR_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("quadrature did not converge: best estimate {best}, error bound {error_estimate} after {evaluations} evaluations")]
    NonConvergence {
        best: f64,
        error_estimate: f64,
        evaluations: u64,
    },
    #[error("model fails the resolvent integrability condition: {0}")]
    Integrability(String),
    #[error("invalid {what}: {detail}")]
    InvalidArgument { what: &'static str, detail: String },
    #[error("{constant}: parameter {value} outside required range ({lo}, {hi})")]
    Regime {
        constant: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error("unknown integral name `{0}`")]
    UnknownIntegral(String),
}

impl From<Incomplete> for AnalysisError {
    fn from(inc: Incomplete) -> Self {
        AnalysisError::NonConvergence {
            best: inc.best,
            error_estimate: inc.error_estimate,
            evaluations: inc.evaluations,
        }
    }
}

/// Resolvent density u^(p)(x) = (1/pi) int_0^inf cos(xi x)/(p + Psi(xi)) dxi.
pub fn resolvent_u(model: &LevyModel, p: f64, x: f64) -> Result<f64, AnalysisError> {
    resolvent_u_tol(model, p, x, SINGULAR_TOL * 1e-2)
}

pub fn resolvent_u_tol(model: &LevyModel, p: f64, x: f64, tol: f64) -> Result<f64, AnalysisError> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(AnalysisError::InvalidArgument {
            what: "p",
            detail: format!("resolvent parameter must be positive, got {p}"),
        });
    }
    model.ensure_resolvent_gate()?;
    let x = x.abs();
    let mut evals = 0u64;
    let mut g = |xi: f64| 1.0 / (p + model.psi(xi));
    let value = if x == 0.0 {
        // No oscillation: head up to the decay scale, geometric tail.
        let cut = decay_scale(model, p);
        let (head, _) = quad::adaptive_finite(&mut g, 0.0, cut, tol, 0.0, &mut evals)?;
        let (tail, _) = quad::tail_monotone_quad(&mut g, cut, tol, &mut evals)?;
        head + tail
    } else {
        let (v, _) = quad::oscillatory_cos_tail(&mut g, x, 0.0, tol, &mut evals)?;
        v
    };
    Ok(value / std::f64::consts::PI)
}

/// Smallest power-of-two xi with Psi(xi) >= p, doubled; 1/(p + Psi) is
/// safely in its decaying regime past this point.
fn decay_scale(model: &LevyModel, p: f64) -> f64 {
    let mut xi = 1.0f64;
    for _ in 0..120 {
        if model.psi(xi) >= p {
            return 2.0 * xi;
        }
        xi *= 2.0;
    }
    xi
}

/// Potential difference v(x) = (1/pi) int_0^inf (1 - cos(xi x))/Psi(xi) dxi,
/// the p -> 0 limit of u^(p)(0) - u^(p)(x).
pub fn v_potential(model: &LevyModel, x: f64) -> Result<f64, AnalysisError> {
    v_potential_tol(model, x, SINGULAR_TOL * 1e-2)
}

pub fn v_potential_tol(model: &LevyModel, x: f64, tol: f64) -> Result<f64, AnalysisError> {
    model.ensure_resolvent_gate()?;
    if x == 0.0 {
        return Ok(0.0);
    }
    let x = x.abs();
    let mut evals = 0u64;
    // Split at the first cosine zero: the (1 - cos)/Psi head keeps the
    // removable 0/0 together; past it, 1/Psi and cos/Psi separate into
    // a monotone tail and an oscillatory one.
    let z0 = 0.5 * std::f64::consts::PI / x;
    let mut head_f = |xi: f64| {
        let s = (0.5 * xi * x).sin();
        2.0 * s * s / model.psi(xi)
    };
    let (head, _) = quad::adaptive_finite(&mut head_f, 0.0, z0, tol, 0.0, &mut evals)?;
    let mut inv_psi = |xi: f64| 1.0 / model.psi(xi);
    let (tail, _) = quad::tail_monotone_quad(&mut inv_psi, z0, tol, &mut evals)?;
    let (osc, _) = quad::oscillatory_cos_tail(&mut inv_psi, x, z0, tol, &mut evals)?;
    Ok((head + tail - osc) / std::f64::consts::PI)
}

/// The p -> 0 resolvent limit data: u^(p)(0) - u^(p)(x) per p, plus
/// p u^(p)(0), which must decrease toward 0.
#[derive(Debug, Clone)]
pub struct ResolventLimit {
    pub differences: Vec<f64>,
    pub p_u0: Vec<f64>,
}

pub fn resolvent_limit_check(
    model: &LevyModel,
    p_sequence: &[f64],
    x: f64,
) -> Result<ResolventLimit, AnalysisError> {
    if p_sequence.is_empty() || p_sequence.windows(2).any(|w| w[1] >= w[0]) || p_sequence.iter().any(|&p| p <= 0.0) {
        return Err(AnalysisError::InvalidArgument {
            what: "p_sequence",
            detail: "must be strictly decreasing and positive".into(),
        });
    }
    let mut differences = Vec::with_capacity(p_sequence.len());
    let mut p_u0 = Vec::with_capacity(p_sequence.len());
    for &p in p_sequence {
        let u0 = resolvent_u(model, p, 0.0)?;
        let ux = resolvent_u(model, p, x)?;
        differences.push(u0 - ux);
        p_u0.push(p * u0);
    }
    Ok(ResolventLimit { differences, p_u0 })
}
