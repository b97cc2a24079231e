//! Monte Carlo verification of the pathwise decomposition identities:
//! Tanaka formula, martingale brackets, submartingale and Dirichlet
//! decompositions, symmetric powers, the Ito-Tanaka corollary and the
//! local-time mean, each as a pass/fail report with standard errors.

mod checks;

pub use checks::*;

use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::localtime::LocalTimeError;
use crate::report::VerificationReport;
use crate::sampler::{SamplerError, SeedStream};
use crate::specfun::{Alpha, SpecFunError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    LocalTime(#[from] LocalTimeError),
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Shared Monte Carlo configuration. Defaults reproduce the reference
/// desk-scale runs; the bias-sensitive knobs (epsilon, n_steps) are
/// tuned so that estimator bias stays well inside the statistical
/// gates at n_paths = 10^4.
#[derive(Debug, Clone)]
pub struct McConfig {
    pub t_end: f64,
    pub n_steps: usize,
    pub n_paths: u64,
    /// Bin half-width override; None picks each check's canonical
    /// value (2^-9 for single-level residuals, 2^-5 for the local-time
    /// mean target).
    pub epsilon: Option<f64>,
    /// Odd point count of the level grid for field-based checks.
    pub grid_points: usize,
    /// Gate width in standard errors for unbiased comparisons.
    pub tolerance_multiple: f64,
    /// Path count for the zero-quadratic-variation probe.
    pub probe_paths: u64,
    pub seed: u64,
    /// Multiply the check's own constant by this factor (negative
    /// controls). None = honest run.
    pub fault_injection: Option<f64>,
}

impl McConfig {
    pub fn new(seed: u64) -> Self {
        McConfig {
            t_end: 1.0,
            n_steps: 1 << 14,
            n_paths: 10_000,
            epsilon: None,
            grid_points: 801,
            tolerance_multiple: 4.0,
            probe_paths: 1_000,
            seed,
            fault_injection: None,
        }
    }

    pub fn stream(&self) -> SeedStream {
        SeedStream::new(self.seed)
    }

    pub(crate) fn fault(&self) -> f64 {
        self.fault_injection.unwrap_or(1.0)
    }

    pub(crate) fn validate(&self) -> Result<(), HarnessError> {
        if self.t_end < 0.0 || !self.t_end.is_finite() {
            return Err(HarnessError::Config(format!("t_end = {}", self.t_end)));
        }
        if self.n_paths == 0 {
            return Err(HarnessError::Config("n_paths must be positive".into()));
        }
        if self.n_steps == 0 {
            return Err(HarnessError::Config("n_steps must be positive".into()));
        }
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0) {
                return Err(HarnessError::Config(format!("epsilon = {eps}")));
            }
        }
        Ok(())
    }
}

/// Parallel map over path indices with order-preserving collection;
/// reductions downstream run sequentially over the returned vector, so
/// results do not depend on the worker count.
pub(crate) fn par_paths<T: Send>(
    n: u64,
    f: impl Fn(u64) -> Result<T, HarnessError> + Sync + Send,
) -> Result<Vec<T>, HarnessError> {
    (0..n).into_par_iter().map(f).collect()
}

/// Checks the harness knows how to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckName {
    CharacteristicFunction,
    Identities,
    Tanaka,
    Bracket,
    MomentScaling,
    Submartingale,
    Dirichlet,
    SymmetricPower,
    ItoTanaka,
    LocalTimeMean,
}

impl CheckName {
    pub const ALL: [CheckName; 10] = [
        CheckName::CharacteristicFunction,
        CheckName::Identities,
        CheckName::Tanaka,
        CheckName::Bracket,
        CheckName::MomentScaling,
        CheckName::Submartingale,
        CheckName::Dirichlet,
        CheckName::SymmetricPower,
        CheckName::ItoTanaka,
        CheckName::LocalTimeMean,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckName::CharacteristicFunction => "charfn",
            CheckName::Identities => "identities",
            CheckName::Tanaka => "tanaka",
            CheckName::Bracket => "bracket",
            CheckName::MomentScaling => "moment",
            CheckName::Submartingale => "submartingale",
            CheckName::Dirichlet => "dirichlet",
            CheckName::SymmetricPower => "sympower",
            CheckName::ItoTanaka => "itotanaka",
            CheckName::LocalTimeMean => "localtime",
        }
    }
}

impl FromStr for CheckName {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CheckName::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown check `{s}`")))
    }
}

/// Canonical per-check gamma for a given alpha, used when the caller
/// does not pin one.
pub fn canonical_gamma(check: CheckName, alpha: Alpha) -> Option<f64> {
    let a = alpha.get();
    match check {
        CheckName::MomentScaling => Some(a / 2.0),
        CheckName::Submartingale => Some(a - 0.3),
        CheckName::Dirichlet => Some(0.75 * (a - 1.0)),
        CheckName::SymmetricPower => Some(a - 1.0),
        _ => None,
    }
}

/// Runs the named checks in order. The characteristic-function gate
/// always runs first: a mis-parametrized sampler silently corrupts
/// every other verdict, so a gate failure aborts the rest.
pub fn run_suite(
    alpha: Alpha,
    gamma: Option<f64>,
    checks: &[CheckName],
    cfg: &McConfig,
) -> Result<Vec<VerificationReport>, HarnessError> {
    cfg.validate()?;
    let mut reports = Vec::new();

    let gate = characteristic_gate(alpha, cfg);
    let gate_failed = !gate.pass;
    reports.push(gate);
    if gate_failed {
        return Ok(reports);
    }

    for &check in checks {
        let g = gamma.or_else(|| canonical_gamma(check, alpha));
        match check {
            CheckName::CharacteristicFunction => {} // already ran as the gate
            CheckName::Identities => {
                let (a, b) = crate::sampler::identity_checks(
                    alpha,
                    cfg.n_paths.max(10_000),
                    &cfg.stream().derive(derivation::IDENTITIES),
                )?;
                reports.push(a);
                reports.push(b);
            }
            CheckName::Tanaka => {
                let out = tanaka_check(alpha, 0.0, cfg)?;
                reports.push(out.report);
                reports.push(out.probe.to_report("tanaka_martingale_probe", alpha.get()));
            }
            CheckName::Bracket => reports.push(bracket_check(alpha, 0.0, cfg)?),
            CheckName::MomentScaling => {
                reports.push(moment_scaling_check(alpha, g.unwrap(), cfg)?)
            }
            CheckName::Submartingale => {
                reports.push(submartingale_decomposition_check(alpha, g.unwrap(), 0.0, cfg)?)
            }
            CheckName::Dirichlet => {
                let out = dirichlet_decomposition_check(alpha, g.unwrap(), 0.0, cfg)?;
                reports.push(out.report);
                reports.push(out.qv_report);
            }
            CheckName::SymmetricPower => {
                let out = symmetric_power_check(alpha, g.unwrap(), cfg)?;
                reports.push(out.residual);
                reports.push(out.odd_moment);
                reports.push(out.probe.to_report("sympower_martingale_probe", alpha.get()));
            }
            CheckName::ItoTanaka => {
                // Triangular hat over [-1, 1] on eight bins.
                let edges: Vec<f64> = (0..=8).map(|i| -1.0 + 0.25 * i as f64).collect();
                let weights: Vec<f64> = edges
                    .windows(2)
                    .map(|w| {
                        let c = 0.5 * (w[0] + w[1]);
                        1.0 - c.abs()
                    })
                    .collect();
                reports.push(ito_tanaka_check(alpha, &edges, &weights, cfg)?);
            }
            CheckName::LocalTimeMean => {
                let out = local_time_mean_check(alpha, cfg, 1)?;
                reports.push(out.report);
            }
        }
    }
    Ok(reports)
}

/// Fixed derivation-path constants so that every check draws from an
/// independent substream of the run seed.
pub(crate) mod derivation {
    pub const GATE: u64 = 1;
    pub const IDENTITIES: u64 = 2;
    pub const TANAKA: u64 = 3;
    pub const BRACKET: u64 = 4;
    pub const MOMENT: u64 = 5;
    pub const SUBMARTINGALE: u64 = 6;
    pub const DIRICHLET: u64 = 7;
    pub const SYMPOWER: u64 = 8;
    pub const ITO_TANAKA: u64 = 9;
    pub const LOCAL_TIME: u64 = 10;
    pub const QV_PROBE: u64 = 11;
    pub const DIVERGENCE: u64 = 12;
}
