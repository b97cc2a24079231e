//! Symmetric Levy process descriptions: exponent, diffusion
//! coefficient and Levy density, with the numeric admissibility gates.

use std::sync::{Arc, OnceLock};

use crate::specfun::{self, Alpha};

use super::quad;
use super::AnalysisError;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind {
    Stable { alpha: Alpha },
    Brownian { sigma2: f64 },
    Custom,
}

/// A symmetric Levy process: exponent Psi with Psi(xi) = Psi(-xi) >= 0
/// and Psi(0) = 0, diffusion coefficient sigma^2, and (when present) a
/// symmetric Levy measure density on R \ {0}. Immutable after
/// construction; evaluation is safe from any thread.
#[derive(Clone)]
pub struct LevyModel {
    kind: ModelKind,
    sigma2: f64,
    psi: RealFn,
    levy_density: Option<RealFn>,
    // Resolved once: None = pass, Some(msg) = fail with reason.
    resolvent_gate: Arc<OnceLock<Option<String>>>,
}

impl std::fmt::Debug for LevyModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LevyModel")
            .field("kind", &self.kind)
            .field("sigma2", &self.sigma2)
            .finish()
    }
}

impl LevyModel {
    /// Symmetric alpha-stable model: Psi(xi) = |xi|^alpha, Levy density
    /// c5(alpha) |z|^(-alpha-1) for alpha < 2. At alpha = 2 the process
    /// is sqrt(2) times a standard Brownian motion: no jump part.
    pub fn stable(alpha: Alpha) -> Result<Self, AnalysisError> {
        let a = alpha.get();
        let psi: RealFn = Arc::new(move |xi: f64| xi.abs().powf(a));
        let (sigma2, levy_density): (f64, Option<RealFn>) = if alpha.is_brownian_boundary() {
            (2.0, None)
        } else {
            let c5 = specfun::c5(alpha)?;
            (
                0.0,
                Some(Arc::new(move |z: f64| c5 * z.abs().powf(-a - 1.0)) as RealFn),
            )
        };
        Ok(LevyModel {
            kind: ModelKind::Stable { alpha },
            sigma2,
            psi,
            levy_density,
            resolvent_gate: Arc::new(OnceLock::new()),
        })
    }

    /// Brownian motion with Psi(xi) = sigma^2 xi^2 / 2; sigma2 = 1 is
    /// the standard case with u^(p)(x) = exp(-sqrt(2p)|x|)/sqrt(2p).
    pub fn brownian(sigma2: f64) -> Result<Self, AnalysisError> {
        if !(sigma2 > 0.0) {
            return Err(AnalysisError::InvalidArgument {
                what: "sigma2",
                detail: format!("diffusion coefficient must be positive, got {sigma2}"),
            });
        }
        Ok(LevyModel {
            kind: ModelKind::Brownian { sigma2 },
            sigma2,
            psi: Arc::new(move |xi: f64| 0.5 * sigma2 * xi * xi),
            levy_density: None,
            resolvent_gate: Arc::new(OnceLock::new()),
        })
    }

    /// Custom symmetric model. Checks Psi symmetry, positivity and
    /// Psi(0) = 0 on a sample grid, and when a Levy density is given,
    /// the integrability of (1 ^ z^2) against it.
    pub fn custom<P>(psi: P, levy_density: Option<RealFn>, sigma2: f64) -> Result<Self, AnalysisError>
    where
        P: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if sigma2 < 0.0 {
            return Err(AnalysisError::InvalidArgument {
                what: "sigma2",
                detail: format!("must be non-negative, got {sigma2}"),
            });
        }
        if psi(0.0).abs() > 1e-12 {
            return Err(AnalysisError::InvalidArgument {
                what: "psi",
                detail: format!("Psi(0) = {} is not 0", psi(0.0)),
            });
        }
        for xi in [0.25, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0] {
            let (p, m) = (psi(xi), psi(-xi));
            if !(p >= 0.0) || !(m >= 0.0) {
                return Err(AnalysisError::InvalidArgument {
                    what: "psi",
                    detail: format!("Psi({xi}) = {p} negative or NaN"),
                });
            }
            if (p - m).abs() > 1e-12 * (1.0 + p.abs()) {
                return Err(AnalysisError::InvalidArgument {
                    what: "psi",
                    detail: format!("not symmetric at xi = {xi}: {p} vs {m}"),
                });
            }
        }
        if let Some(density) = &levy_density {
            check_levy_integrability(density)?;
        }
        Ok(LevyModel {
            kind: ModelKind::Custom,
            sigma2,
            psi: Arc::new(psi),
            levy_density,
            resolvent_gate: Arc::new(OnceLock::new()),
        })
    }

    #[inline]
    pub fn psi(&self, xi: f64) -> f64 {
        (self.psi)(xi)
    }

    pub fn levy_density(&self, z: f64) -> Option<f64> {
        self.levy_density.as_ref().map(|f| f(z))
    }

    pub fn has_levy_density(&self) -> bool {
        self.levy_density.is_some()
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    /// The standing resolvent assumption int dxi/(1 + Psi) < inf,
    /// decided numerically once per model: integrate geometric blocks
    /// [10^k, 10^(k+1)] up to 10^5 and require the block ratio to fall
    /// clearly below 1 (a divergent 1/Psi ~ 1/xi tail gives ratio 1).
    pub fn ensure_resolvent_gate(&self) -> Result<(), AnalysisError> {
        let verdict = self.resolvent_gate.get_or_init(|| {
            let mut f = |xi: f64| 1.0 / (1.0 + self.psi(xi));
            let mut evals = 0u64;
            let mut blocks = Vec::new();
            let mut lo = 1.0f64;
            for _ in 0..5 {
                let hi = lo * 10.0;
                match quad::adaptive_finite(&mut f, lo, hi, 1e-9, 1e-9, &mut evals) {
                    Ok((v, _)) => blocks.push(v),
                    Err(_) => return Some("tail block quadrature did not converge".into()),
                }
                lo = hi;
            }
            let last = blocks[blocks.len() - 1];
            let prev = blocks[blocks.len() - 2];
            if prev <= 0.0 {
                return None; // integrand already vanished
            }
            let ratio = last / prev;
            if ratio < 0.985 {
                None
            } else {
                Some(format!(
                    "tail blocks of 1/(1+Psi) over [1e3,1e4] and [1e4,1e5] have ratio {ratio:.4}; \
                     int dxi/(1+Psi) looks divergent"
                ))
            }
        });
        match verdict {
            None => Ok(()),
            Some(msg) => Err(AnalysisError::Integrability(msg.clone())),
        }
    }
}

/// Numeric check of int (1 ^ z^2) nu(dz) < inf for custom densities:
/// z^2 nu near 0 (flattened against an algebraic singularity) plus the
/// monotone nu tail.
fn check_levy_integrability(density: &RealFn) -> Result<(), AnalysisError> {
    let mut evals = 0u64;
    let d = density.clone();
    // Probe the small-z exponent from sample points to pick the
    // flattening power: nu ~ c z^(-s) gives z^2 nu ~ z^(2-s).
    let (z1, z2) = (1e-4f64, 2e-4f64);
    let (n1, n2) = (d(z1), d(z2));
    if !n1.is_finite() || !n2.is_finite() || n1 < 0.0 || n2 < 0.0 {
        return Err(AnalysisError::InvalidArgument {
            what: "levy_density",
            detail: "density must be finite and non-negative near 0".into(),
        });
    }
    let s = if n1 > 0.0 && n2 > 0.0 {
        (n1 / n2).ln() / (z2 / z1).ln()
    } else {
        0.0
    };
    let small_exp = 2.0 - s;
    if small_exp <= -1.0 {
        return Err(AnalysisError::Integrability(format!(
            "z^2 nu(z) ~ z^{small_exp:.3} near 0 is not integrable"
        )));
    }
    let mut small = |z: f64| z * z * d(z);
    quad::power_flattened_left(&mut small, 1.0, small_exp.min(2.0), 1e-8, &mut evals)
        .map_err(AnalysisError::from)?;
    let mut tail = |z: f64| d(z);
    let (t, _) = quad::tail_monotone_quad(&mut tail, 1.0, 1e-8, &mut evals).map_err(|_| {
        AnalysisError::Integrability("nu tail beyond 1 does not converge".into())
    })?;
    if !t.is_finite() {
        return Err(AnalysisError::Integrability("nu tail is infinite".into()));
    }
    Ok(())
}
