//! Exact-in-law sampling: symmetric alpha-stable variates, positive
//! alpha/2-stable variates, and process paths on uniform grids with
//! reproducible seed streams. No Euler error: grid increments carry
//! the exact increment law, so only local-time estimation downstream
//! has discretization bias.

mod stream;

pub use stream::{SeedStream, VariateRng};

use std::collections::BTreeMap;
use std::io::Write;

use thiserror::Error;

use crate::report::{mean_se, VerificationReport};
use crate::specfun::Alpha;

const PI: f64 = std::f64::consts::PI;

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("beta = {0} outside the open interval (1/2, 1) for the positive stable transform")]
    BetaRange(f64),
    #[error("invalid {what}: {detail}")]
    Invalid { what: &'static str, detail: String },
    #[error("identity checks need at least {min} samples per side, got {got}")]
    TooFewSamples { min: u64, got: u64 },
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// One draw with characteristic function exp(-|lambda|^alpha), by the
/// Chambers-Mallows-Stuck transform of a uniform angle and an
/// exponential variate. At alpha = 2 the transform reduces exactly to
/// a centered Gaussian with variance 2.
pub fn stable_variate(alpha: Alpha, rng: &mut VariateRng) -> f64 {
    let a = alpha.get();
    let v = PI * (rng.uniform_open() - 0.5);
    let w = rng.exponential();
    if alpha.is_brownian_boundary() {
        return 2.0 * v.sin() * w.sqrt();
    }
    let lead = (a * v).sin() / v.cos().powf(1.0 / a);
    let tail = (((1.0 - a) * v).cos() / w).powf((1.0 - a) / a);
    lead * tail
}

/// One positive beta-stable draw with Laplace transform exp(-xi^beta),
/// beta = alpha/2 in (1/2, 1), by Kanter's transform. The boundary
/// beta = 1 (the degenerate constant) is rejected.
pub fn positive_stable_variate(beta: f64, rng: &mut VariateRng) -> Result<f64, SamplerError> {
    if !(beta > 0.5 && beta < 1.0) {
        return Err(SamplerError::BetaRange(beta));
    }
    let v = PI * rng.uniform_open();
    let w = rng.exponential();
    let rest = 1.0 - beta;
    let a = (beta * v).sin().powf(beta / rest) * (rest * v).sin() / v.sin().powf(1.0 / rest);
    Ok((a / w).powf(rest / beta))
}

/// One trajectory on a uniform grid over [0, t_end], X_0 = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub alpha: Alpha,
    pub t_end: f64,
    /// n_steps + 1 grid values, values[0] = 0.
    pub values: Vec<f64>,
    /// Reproducibility token of the generating stream.
    pub seed: u64,
}

impl SamplePath {
    pub fn n_steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn dt(&self) -> f64 {
        self.t_end / self.n_steps() as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t_end * k as f64 / self.n_steps() as f64
    }

    pub fn terminal(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// CSV dump: header `t,x`, one row per grid point, 17 significant
    /// digits so values round-trip exactly.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,x")?;
        for (k, v) in self.values.iter().enumerate() {
            writeln!(w, "{:.16e},{:.16e}", self.time(k), v)?;
        }
        Ok(())
    }
}

/// Exact i.i.d.-increment simulation: increments are distributed as
/// (t_end/n_steps)^(1/alpha) times a standard stable variate.
pub fn simulate_path(
    alpha: Alpha,
    t_end: f64,
    n_steps: usize,
    stream: &SeedStream,
) -> Result<SamplePath, SamplerError> {
    if !(t_end > 0.0) {
        return Err(SamplerError::Invalid {
            what: "t_end",
            detail: format!("must be positive, got {t_end}"),
        });
    }
    if n_steps == 0 {
        return Err(SamplerError::Invalid {
            what: "n_steps",
            detail: "must be at least 1".into(),
        });
    }
    let scale = (t_end / n_steps as f64).powf(1.0 / alpha.get());
    let mut rng = stream.variates();
    let mut values = Vec::with_capacity(n_steps + 1);
    values.push(0.0);
    let mut x = 0.0;
    for _ in 0..n_steps {
        x += scale * stable_variate(alpha, &mut rng);
        values.push(x);
    }
    Ok(SamplePath {
        alpha,
        t_end,
        values,
        seed: stream.token(),
    })
}

/// Sampler self-test gate: the empirical cosine characteristic
/// function of X_1 must match exp(-|lambda|^alpha) at each probe
/// frequency within `tol_multiple` standard errors. A wrong
/// parametrization of the transform fails this immediately.
pub fn characteristic_function_check(
    alpha: Alpha,
    n: u64,
    stream: &SeedStream,
    lambdas: &[f64],
    tol_multiple: f64,
) -> VerificationReport {
    let mut rng = stream.variates();
    let draws: Vec<f64> = (0..n).map(|_| stable_variate(alpha, &mut rng)).collect();
    let mut diagnostics = BTreeMap::new();
    let mut worst: Option<(f64, f64, f64, f64)> = None; // (ratio, mc, target, se)
    for &lam in lambdas {
        let samples: Vec<f64> = draws.iter().map(|x| (lam * x).cos()).collect();
        let (mean, se) = mean_se(&samples);
        let target = (-lam.abs().powf(alpha.get())).exp();
        let ratio = (mean - target).abs() / se;
        diagnostics.insert(format!("gap_se_ratio_lambda_{lam}"), ratio);
        if worst.map(|w| ratio > w.0).unwrap_or(true) {
            worst = Some((ratio, mean, target, se));
        }
    }
    let (_, mc, target, se) = worst.unwrap();
    VerificationReport::from_mc(
        "characteristic_function",
        alpha.get(),
        None,
        None,
        n,
        mc,
        target,
        se,
        tol_multiple,
        diagnostics,
    )
}

/// Two-sample moment bank comparison: for each order q, compare
/// mean |lhs|^q against mean |rhs|^q at `tol_multiple` combined
/// standard errors. The report carries the worst order.
fn moment_bank_report(
    name: &str,
    alpha: Alpha,
    orders: &[f64],
    lhs: &[f64],
    rhs: &[f64],
    tol_multiple: f64,
) -> VerificationReport {
    let mut diagnostics = BTreeMap::new();
    let mut worst: Option<(f64, f64, f64, f64)> = None;
    for &q in orders {
        let a: Vec<f64> = lhs.iter().map(|x| x.abs().powf(q)).collect();
        let b: Vec<f64> = rhs.iter().map(|x| x.abs().powf(q)).collect();
        let (ma, sa) = mean_se(&a);
        let (mb, sb) = mean_se(&b);
        let se = (sa * sa + sb * sb).sqrt();
        let ratio = (ma - mb).abs() / se;
        diagnostics.insert(format!("gap_se_ratio_q_{q}"), ratio);
        if worst.map(|w| ratio > w.0).unwrap_or(true) {
            worst = Some((ratio, ma, mb, se));
        }
    }
    let (_, mc, target, se) = worst.unwrap();
    VerificationReport::from_mc(
        name,
        alpha.get(),
        None,
        None,
        lhs.len() as u64,
        mc,
        target,
        se,
        tol_multiple,
        diagnostics,
    )
}

/// Distributional identities behind the moment formula:
///   (Z / Y^(alpha/2))^(alpha/2) has the law of Z            (first report)
///   X^(alpha) has the law of sqrt(2) U sqrt(Y^(alpha/2))    (second report)
/// with Z exponential, U standard normal, all independent. Both are
/// checked by moment banks of orders {1/4, 1/2, 1}. At alpha = 2 the
/// positive-stable factor degenerates, so the reports are marked as
/// boundary skips.
pub fn identity_checks(
    alpha: Alpha,
    n: u64,
    stream: &SeedStream,
) -> Result<(VerificationReport, VerificationReport), SamplerError> {
    const MIN: u64 = 10_000;
    if n < MIN {
        return Err(SamplerError::TooFewSamples { min: MIN, got: n });
    }
    if alpha.is_brownian_boundary() {
        return Ok((
            VerificationReport::boundary_skip("e510_moments", 2.0, None),
            VerificationReport::boundary_skip("e520_moments", 2.0, None),
        ));
    }
    let beta = alpha.get() / 2.0;
    let orders = [0.25, 0.5, 1.0];

    let mut rng = stream.derive(0).variates();
    let mut ratio_side = Vec::with_capacity(n as usize);
    let mut z_side = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let z = rng.exponential();
        let y = positive_stable_variate(beta, &mut rng)?;
        ratio_side.push((z / y).powf(beta));
        z_side.push(rng.exponential());
    }
    let first = moment_bank_report("e510_moments", alpha, &orders, &ratio_side, &z_side, 4.0);

    let mut rng = stream.derive(1).variates();
    let mut stable_side = Vec::with_capacity(n as usize);
    let mut composed_side = Vec::with_capacity(n as usize);
    for _ in 0..n {
        stable_side.push(stable_variate(alpha, &mut rng));
        let u = rng.standard_normal();
        let y = positive_stable_variate(beta, &mut rng)?;
        composed_side.push(2f64.sqrt() * u * y.sqrt());
    }
    let second = moment_bank_report("e520_moments", alpha, &orders, &stable_side, &composed_side, 4.0);

    Ok((first, second))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{gamma_fn, moment_m};

    fn alpha(v: f64) -> Alpha {
        Alpha::new(v).unwrap()
    }

    fn draws(a: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = SeedStream::new(seed).variates();
        (0..n).map(|_| stable_variate(alpha(a), &mut rng)).collect()
    }

    #[test]
    fn gaussian_boundary_variance_two() {
        let xs = draws(2.0, 100_000, 11);
        let (mean, _) = mean_se(&xs);
        let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let (var, se_var) = mean_se(&sq);
        assert!(mean.abs() < 0.02);
        assert!((var - 2.0).abs() < 4.0 * se_var, "var {var} +- {se_var}");
    }

    #[test]
    fn fractional_moment_matches_formula() {
        let xs = draws(1.5, 100_000, 12);
        let half: Vec<f64> = xs.iter().map(|x| x.abs().sqrt()).collect();
        let (m, se) = mean_se(&half);
        let want = moment_m(alpha(1.5), 0.5).unwrap();
        assert!((m - want).abs() < 4.0 * se, "{m} vs {want} (se {se})");
    }

    #[test]
    fn characteristic_function_gate_passes() {
        let rep = characteristic_function_check(
            alpha(1.5),
            100_000,
            &SeedStream::new(13),
            &[0.5, 1.0, 2.0],
            4.0,
        );
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn characteristic_function_gate_catches_wrong_parametrization() {
        // A deliberately mis-parametrized transform (alpha used where
        // 1/alpha belongs) must fail the gate: this is the pitfall the
        // gate exists for.
        let a = 1.5f64;
        let mut rng = SeedStream::new(14).variates();
        let n = 100_000;
        let mut bad = Vec::with_capacity(n);
        for _ in 0..n {
            let v = PI * (rng.uniform_open() - 0.5);
            let w = rng.exponential();
            let lead = (v / a).sin() / v.cos().powf(a);
            let tail = (((1.0 - a) * v).cos() / w).powf((1.0 - a) / a);
            bad.push(lead * tail);
        }
        let samples: Vec<f64> = bad.iter().map(|x| x.cos()).collect();
        let (mean, se) = mean_se(&samples);
        let target = (-1f64).exp();
        assert!((mean - target).abs() > 4.0 * se);
    }

    #[test]
    fn symmetry_of_signs() {
        let xs = draws(1.5, 100_000, 15);
        let signs: Vec<f64> = xs.iter().map(|x| x.signum()).collect();
        let (m, se) = mean_se(&signs);
        assert!(m.abs() < 4.0 * se);
    }

    #[test]
    fn moment_blowup_near_alpha() {
        // E|X|^gamma diverges as gamma -> alpha: the estimate just
        // below the boundary dwarfs the mid-range one.
        let xs = draws(1.5, 100_000, 16);
        let near: f64 = xs.iter().map(|x| x.abs().powf(1.49)).sum::<f64>() / xs.len() as f64;
        let mid: f64 = xs.iter().map(|x| x.abs().powf(0.75)).sum::<f64>() / xs.len() as f64;
        assert!(near > 2.0 * mid, "near {near}, mid {mid}");
    }

    #[test]
    fn positive_stable_laplace_transform() {
        let mut rng = SeedStream::new(17).variates();
        let n = 100_000;
        let ys: Vec<f64> = (0..n)
            .map(|_| positive_stable_variate(0.75, &mut rng).unwrap())
            .collect();
        assert!(ys.iter().all(|&y| y > 0.0));
        let lap: Vec<f64> = ys.iter().map(|y| (-y).exp()).collect();
        let (m, se) = mean_se(&lap);
        let want = (-1f64).exp();
        assert!((m - want).abs() < 4.0 * se, "{m} vs {want}");
        // E Y^0.3 = Gamma(1 - 0.4)/Gamma(1 - 0.3) for beta = 3/4.
        let mom: Vec<f64> = ys.iter().map(|y| y.powf(0.3)).collect();
        let (m, se) = mean_se(&mom);
        let want = gamma_fn(0.6).unwrap() / gamma_fn(0.7).unwrap();
        assert!((m - want).abs() < 4.0 * se, "{m} vs {want}");
    }

    #[test]
    fn positive_stable_rejects_boundary() {
        let mut rng = SeedStream::new(18).variates();
        assert!(matches!(
            positive_stable_variate(1.0, &mut rng),
            Err(SamplerError::BetaRange(_))
        ));
        assert!(positive_stable_variate(0.5, &mut rng).is_err());
    }

    #[test]
    fn identity_checks_pass_at_alpha_15() {
        let (a, b) = identity_checks(alpha(1.5), 100_000, &SeedStream::new(19)).unwrap();
        assert!(a.pass, "{}", a.table_line());
        assert!(b.pass, "{}", b.table_line());
    }

    #[test]
    fn identity_checks_preconditions_and_boundary() {
        assert!(matches!(
            identity_checks(alpha(1.5), 0, &SeedStream::new(20)),
            Err(SamplerError::TooFewSamples { .. })
        ));
        let (a, b) = identity_checks(alpha(2.0), 100_000, &SeedStream::new(20)).unwrap();
        assert!(a.is_boundary_skip() && b.is_boundary_skip());
    }

    #[test]
    fn path_shape_and_determinism() {
        let stream = SeedStream::new(21).derive(4);
        let p = simulate_path(alpha(1.5), 1.0, 64, &stream).unwrap();
        assert_eq!(p.values.len(), 65);
        assert_eq!(p.values[0], 0.0);
        assert_eq!(p.seed, stream.token());
        let q = simulate_path(alpha(1.5), 1.0, 64, &stream).unwrap();
        assert_eq!(p, q);
        let r = simulate_path(alpha(1.5), 1.0, 64, &SeedStream::new(21).derive(5)).unwrap();
        assert_ne!(p.values, r.values);
    }

    #[test]
    fn single_step_path_is_scaled_variate() {
        let stream = SeedStream::new(22);
        let p = simulate_path(alpha(1.5), 2.0, 1, &stream).unwrap();
        let mut rng = stream.variates();
        let want = 2f64.powf(1.0 / 1.5) * stable_variate(alpha(1.5), &mut rng);
        assert_eq!(p.values[1].to_bits(), want.to_bits());
    }

    #[test]
    fn terminal_moment_over_ensemble() {
        // Terminal law is exact in n_steps; this exercises aggregation.
        let root = SeedStream::new(23);
        let terminals: Vec<f64> = (0..10_000)
            .map(|i| simulate_path(alpha(1.5), 1.0, 1024, &root.derive(i)).unwrap().terminal())
            .collect();
        let m07: Vec<f64> = terminals.iter().map(|x| x.abs().powf(0.7)).collect();
        let (m, se) = mean_se(&m07);
        let want = moment_m(alpha(1.5), 0.7).unwrap();
        assert!((m - want).abs() < 4.0 * se, "{m} vs {want}");
    }

    #[test]
    fn scaling_law_between_horizons() {
        // c^(-1/alpha) X_ct must match X_t in law; compare E|.|^0.5 of
        // rescaled t=2 terminals against t=1 terminals.
        let root = SeedStream::new(24);
        let n = 10_000;
        let t1: Vec<f64> = (0..n)
            .map(|i| simulate_path(alpha(1.5), 1.0, 64, &root.derive(i)).unwrap().terminal())
            .collect();
        let c = 2f64.powf(-1.0 / 1.5);
        let t2: Vec<f64> = (0..n)
            .map(|i| {
                c * simulate_path(alpha(1.5), 2.0, 64, &root.derive(n + i)).unwrap().terminal()
            })
            .collect();
        let a: Vec<f64> = t1.iter().map(|x| x.abs().sqrt()).collect();
        let b: Vec<f64> = t2.iter().map(|x| x.abs().sqrt()).collect();
        let (ma, sa) = mean_se(&a);
        let (mb, sb) = mean_se(&b);
        assert!((ma - mb).abs() < 4.0 * (sa * sa + sb * sb).sqrt());
    }

    #[test]
    fn invalid_path_parameters() {
        let s = SeedStream::new(25);
        assert!(simulate_path(alpha(1.5), 0.0, 8, &s).is_err());
        assert!(simulate_path(alpha(1.5), 1.0, 0, &s).is_err());
    }

    #[test]
    fn csv_dump_shape() {
        let p = simulate_path(alpha(1.5), 1.0, 4, &SeedStream::new(26)).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[0], "t,x");
        assert!(lines[1].starts_with("0.0000000000000000e0,0.0000000000000000e0"));
    }
}
