//! The decomposition checks. Each one simulates an ensemble, builds
//! whatever local-time machinery it needs, and reduces per-path values
//! in path-index order into a report.

use std::collections::BTreeMap;

use crate::analysis::{constant_integral, IntegralName};
use crate::localtime::{
    estimate_field, grid_with_points, pv_centered_at, pv_symmetric_at,
};
use crate::report::{mean_se, MartingaleProbe, VerificationReport};
use crate::sampler::{simulate_path, stable_variate, SamplePath};
use crate::specfun::{self, Alpha};

use super::{derivation, par_paths, HarnessError, McConfig};

/// Single-level occupation estimates at the given times.
fn local_time_at_level(
    path: &SamplePath,
    x: f64,
    epsilon: f64,
    t_grid: &[f64],
) -> Result<Vec<f64>, HarnessError> {
    let field = estimate_field(path, &[x], epsilon, t_grid)?;
    Ok(field.values[0].clone())
}

/// Left Riemann sum of |X_s - x|^power with the central-bin cap: steps
/// inside the bin contribute `cap` instead of the singular value.
fn capped_time_integral(path: &SamplePath, x: f64, power: f64, epsilon: f64, cap: f64) -> f64 {
    let dt = path.dt();
    let n = path.n_steps();
    let mut sum = 0.0;
    for &v in &path.values[..n] {
        let d = (v - x).abs();
        sum += if d <= epsilon { cap } else { d.powf(power) };
    }
    sum * dt
}

/// Bin-average cap (1/2eps) int_{-eps}^{eps} |y|^power dy, the
/// occupation-consistent replacement value; only for power > -1.
fn bin_average_cap(epsilon: f64, power: f64) -> f64 {
    debug_assert!(power > -1.0);
    epsilon.powf(power) / (power + 1.0)
}

fn sym_power(a: f64, gamma: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a.signum() * a.abs().powf(gamma)
    }
}

/// Closed tail of the centered p.v. integral beyond the truncation
/// radius R. Outside the visited range L^(x+z) = 0, so the integrand
/// is -L^x |z|^(-e) there and
/// int_{|z|>R} = -L^x 2 R^(1-e)/(e-1) exactly. With e barely above 1
/// this tail decays like R^(1-e) and dominates the grid part; no
/// affordable grid could absorb it by widening. The occupation the
/// path does leave beyond R is rare-excursion mass, quantified in the
/// residual gate.
fn pv_far_tail(l_level: f64, truncation: f64, exponent: f64) -> f64 {
    -l_level * 2.0 * truncation.powf(1.0 - exponent) / (exponent - 1.0)
}

/// Covariance probe E[(N_t - N_s) g(path up to s)] over an ensemble of
/// residual increments and functional values.
pub fn martingale_probe(
    s: f64,
    t: f64,
    increments: &[f64],
    functionals: &[(&str, Vec<f64>)],
    tol_multiple: f64,
) -> MartingaleProbe {
    let mut names = Vec::new();
    let mut covariances = Vec::new();
    let mut std_errors = Vec::new();
    for (name, g) in functionals {
        let products: Vec<f64> = increments.iter().zip(g).map(|(d, v)| d * v).collect();
        let (m, se) = mean_se(&products);
        names.push((*name).to_owned());
        covariances.push(m);
        std_errors.push(se);
    }
    MartingaleProbe {
        s,
        t,
        functionals: names,
        covariances,
        std_errors,
        tolerance_multiple: tol_multiple,
    }
}

/// Canonical bin half-width for single-level occupation checks; small
/// enough that the starting-point smoothing deficit (~ eps^(alpha-1))
/// stays inside the statistical gates at 10^4 paths.
const LEVEL_EPSILON: f64 = 0.001953125; // 2^-9
/// Bin half-width pinned by the local-time mean target.
const MEAN_EPSILON: f64 = 0.03125; // 2^-5

pub struct TanakaOutcome {
    pub report: VerificationReport,
    pub probe: MartingaleProbe,
}

/// Tanaka residual N = |X_t - x|^(alpha-1) - |x|^(alpha-1) - c1 L^x_t:
/// mean zero at the gate, plus the covariance probe of the martingale
/// property at s = t/2.
pub fn tanaka_check(alpha: Alpha, x: f64, cfg: &McConfig) -> Result<TanakaOutcome, HarnessError> {
    cfg.validate()?;
    if cfg.t_end == 0.0 {
        // All terms vanish identically.
        let report = VerificationReport::from_mc(
            "tanaka_mean_zero",
            alpha.get(),
            None,
            Some(x),
            0,
            0.0,
            0.0,
            0.0,
            cfg.tolerance_multiple,
            BTreeMap::new(),
        );
        let probe = martingale_probe(0.0, 0.0, &[], &[], cfg.tolerance_multiple);
        return Ok(TanakaOutcome { report, probe });
    }
    if cfg.n_steps % 2 != 0 {
        return Err(HarnessError::Config(
            "tanaka probe checkpoint t/2 needs an even step count".into(),
        ));
    }
    let epsilon = cfg_epsilon(cfg, LEVEL_EPSILON);
    let c1_eff = specfun::c1(alpha)? * cfg.fault();
    let am1 = alpha.get() - 1.0;
    let half = cfg.n_steps / 2;
    let t = cfg.t_end;
    let t_half = t * half as f64 / cfg.n_steps as f64;
    let root = cfg.stream().derive(derivation::TANAKA);

    let rows = par_paths(cfg.n_paths, |i| {
        let path = simulate_path(alpha, t, cfg.n_steps, &root.derive(i))?;
        let l = local_time_at_level(&path, x, epsilon, &[t_half, t])?;
        let xs = path.values[half];
        let xt = path.terminal();
        let n_t = (xt - x).abs().powf(am1) - x.abs().powf(am1) - c1_eff * l[1];
        let n_s = (xs - x).abs().powf(am1) - x.abs().powf(am1) - c1_eff * l[0];
        Ok((n_t, n_t - n_s, xs.signum(), xs.abs().min(1.0)))
    })?;

    let residuals: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let increments: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let g_sign: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let g_clip: Vec<f64> = rows.iter().map(|r| r.3).collect();

    let (mean, se) = mean_se(&residuals);
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("dt".into(), t / cfg.n_steps as f64);
    diagnostics.insert("epsilon".into(), epsilon);
    diagnostics.insert("c1_effective".into(), c1_eff);
    let report = VerificationReport::from_mc(
        "tanaka_mean_zero",
        alpha.get(),
        None,
        Some(x),
        cfg.n_paths,
        mean,
        0.0,
        se,
        cfg.tolerance_multiple,
        diagnostics,
    );
    let probe = martingale_probe(
        t_half,
        t,
        &increments,
        &[("sign_xs", g_sign), ("clip_xs", g_clip)],
        cfg.tolerance_multiple,
    );
    Ok(TanakaOutcome { report, probe })
}

/// Bracket identity E[(N^x_t)^2] = c2 E int_0^t |X_s - x|^(alpha-2) ds:
/// the variance of the Tanaka residual against the capped Riemann sum,
/// as a ratio gated in [0.9, 1.1].
pub fn bracket_check(alpha: Alpha, x: f64, cfg: &McConfig) -> Result<VerificationReport, HarnessError> {
    cfg.validate()?;
    if alpha.is_brownian_boundary() {
        return Ok(VerificationReport::boundary_skip("bracket_ratio", 2.0, None));
    }
    let epsilon = cfg_epsilon(cfg, LEVEL_EPSILON);
    let c1 = specfun::c1(alpha)?;
    let c2_eff = specfun::c2(alpha)? * cfg.fault();
    let a = alpha.get();
    let power = a - 2.0;
    let cap = bin_average_cap(epsilon, power);
    let t = cfg.t_end;
    let root = cfg.stream().derive(derivation::BRACKET);

    let rows = par_paths(cfg.n_paths, |i| {
        let path = simulate_path(alpha, t, cfg.n_steps, &root.derive(i))?;
        let l = local_time_at_level(&path, x, epsilon, &[t])?;
        let n = (path.terminal() - x).abs().powf(a - 1.0) - x.abs().powf(a - 1.0) - c1 * l[0];
        let s = capped_time_integral(&path, x, power, epsilon, cap);
        Ok((n, s))
    })?;

    let residuals: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let sums: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let (mean_n, _) = mean_se(&residuals);
    let centered_sq: Vec<f64> = residuals.iter().map(|n| (n - mean_n) * (n - mean_n)).collect();
    let (variance, se_var) = mean_se(&centered_sq);
    let (mean_s, se_s) = mean_se(&sums);

    let ratio = variance / (c2_eff * mean_s);
    let rel_se = ((se_var / variance).powi(2) + (se_s / mean_s).powi(2)).sqrt();
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("variance".into(), variance);
    diagnostics.insert("time_integral_mean".into(), mean_s);
    diagnostics.insert("c2_effective".into(), c2_eff);
    diagnostics.insert("cap".into(), cap);
    diagnostics.insert("epsilon".into(), epsilon);
    diagnostics.insert("ratio_rel_se".into(), rel_se);
    Ok(VerificationReport::from_relative(
        "bracket_ratio",
        a,
        None,
        Some(x),
        cfg.n_paths,
        ratio,
        1.0,
        ratio.abs() * rel_se,
        0.1,
        diagnostics,
    ))
}

fn cfg_epsilon(cfg: &McConfig, canonical: f64) -> f64 {
    cfg.epsilon.unwrap_or(canonical)
}

/// E|X_t|^gamma against t^(gamma/alpha) m_gamma.
pub fn moment_scaling_check(
    alpha: Alpha,
    gamma: f64,
    cfg: &McConfig,
) -> Result<VerificationReport, HarnessError> {
    cfg.validate()?;
    if !(0.0..alpha.get()).contains(&gamma) {
        return Err(HarnessError::Config(format!(
            "moment order gamma = {gamma} outside [0, alpha)"
        )));
    }
    let t = cfg.t_end;
    let target = t.powf(gamma / alpha.get()) * specfun::moment_m(alpha, gamma)? * cfg.fault();
    let root = cfg.stream().derive(derivation::MOMENT);
    let scale = t.powf(1.0 / alpha.get());
    let draws = par_paths(cfg.n_paths, |i| {
        let mut rng = root.derive(i).variates();
        Ok((scale * stable_variate(alpha, &mut rng)).abs().powf(gamma))
    })?;
    let (mean, se) = mean_se(&draws);
    Ok(VerificationReport::from_mc(
        "moment_scaling",
        alpha.get(),
        Some(gamma),
        None,
        cfg.n_paths,
        mean,
        target,
        se,
        cfg.tolerance_multiple,
        BTreeMap::new(),
    ))
}

/// Doob-Meyer regime alpha-1 < gamma < alpha:
/// E|X_t - x|^gamma - |x|^gamma = c3 E int_0^t |X_s - x|^(gamma-alpha) ds,
/// checked as a paired per-path difference. The exact moment identity
/// m_gamma = c3 (alpha/gamma) m_(gamma-alpha) rides along in the
/// diagnostics.
pub fn submartingale_decomposition_check(
    alpha: Alpha,
    gamma: f64,
    x: f64,
    cfg: &McConfig,
) -> Result<VerificationReport, HarnessError> {
    cfg.validate()?;
    let a = alpha.get();
    let c3_eff = specfun::c3(alpha, gamma)? * cfg.fault();
    let epsilon = cfg_epsilon(cfg, LEVEL_EPSILON);
    let power = gamma - a;
    let cap = bin_average_cap(epsilon, power);
    let t = cfg.t_end;
    let root = cfg.stream().derive(derivation::SUBMARTINGALE);

    let diffs = par_paths(cfg.n_paths, |i| {
        let path = simulate_path(alpha, t, cfg.n_steps, &root.derive(i))?;
        let lhs = (path.terminal() - x).abs().powf(gamma) - x.abs().powf(gamma);
        let rhs = c3_eff * capped_time_integral(&path, x, power, epsilon, cap);
        Ok(lhs - rhs)
    })?;
    let (mean, se) = mean_se(&diffs);

    let mut diagnostics = BTreeMap::new();
    let m_g = specfun::moment_m(alpha, gamma)?;
    let m_shift = specfun::moment_m(alpha, gamma - a)?;
    let identity_rhs = specfun::c3(alpha, gamma)? * (a / gamma) * m_shift;
    diagnostics.insert("identity_lhs_m_gamma".into(), m_g);
    diagnostics.insert("identity_rhs".into(), identity_rhs);
    diagnostics.insert(
        "identity_rel_gap".into(),
        (m_g - identity_rhs).abs() / m_g,
    );
    diagnostics.insert("epsilon".into(), epsilon);
    diagnostics.insert("cap".into(), cap);
    diagnostics.insert("c3_effective".into(), c3_eff);

    Ok(VerificationReport::from_mc(
        "submartingale_decomposition",
        a,
        Some(gamma),
        Some(x),
        cfg.n_paths,
        mean,
        0.0,
        se,
        cfg.tolerance_multiple,
        diagnostics,
    ))
}

pub struct DirichletOutcome {
    pub report: VerificationReport,
    pub qv_report: VerificationReport,
    /// Median sum of squared compensator increments per partition size.
    pub qv_medians: Vec<f64>,
}

/// Dirichlet regime (alpha-1)/2 < gamma < alpha-1: the compensator is
/// the principal-value functional A = c4 int dz |z|^(gamma-alpha)
/// (L^(x+z) - L^x) with c4 = c1/r, and the residual
/// |X_t - x|^gamma - |x|^gamma - A has mean zero. The 5 SE gate leaves
/// room for the documented p.v. estimator bias. A zero-quadratic-
/// variation probe over partition sizes {8, 32, 128} rides along.
pub fn dirichlet_decomposition_check(
    alpha: Alpha,
    gamma: f64,
    x: f64,
    cfg: &McConfig,
) -> Result<DirichletOutcome, HarnessError> {
    cfg.validate()?;
    let a = alpha.get();
    let r = constant_integral(IntegralName::R, alpha, Some(gamma))?;
    let c4_eff = specfun::c4_from_r(alpha, gamma, r)? * cfg.fault();
    let exponent = a - gamma;
    let t = cfg.t_end;
    let (centers, epsilon) = grid_with_points(alpha, t, cfg.grid_points);
    let truncation = *centers.last().unwrap() - x.abs();
    let root = cfg.stream().derive(derivation::DIRICHLET);

    let rows = par_paths(cfg.n_paths, |i| {
        let path = simulate_path(alpha, t, cfg.n_steps, &root.derive(i))?;
        let field = estimate_field(&path, &centers, epsilon, &[t])?;
        let pv = pv_centered_at(&field, 0, x, exponent, truncation)?;
        let tail = pv_far_tail(field.level_value(x, 0)?, truncation, exponent);
        let n = (path.terminal() - x).abs().powf(gamma) - x.abs().powf(gamma)
            - c4_eff * (pv.value + tail);
        Ok((n, (pv.sensitivity.1 - pv.value).abs()))
    })?;
    let residuals: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let sensitivities: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let (mean, se) = mean_se(&residuals);
    let (mean_sens, _) = mean_se(&sensitivities);

    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("r".into(), r);
    diagnostics.insert("c4_effective".into(), c4_eff);
    diagnostics.insert("epsilon".into(), epsilon);
    diagnostics.insert("dt".into(), t / cfg.n_steps as f64);
    diagnostics.insert("truncation".into(), truncation);
    diagnostics.insert("mean_cutoff_sensitivity".into(), mean_sens);
    if c4_eff.abs() * mean_sens > 5.0 * se {
        diagnostics.insert("cutoff_sensitivity_flag".into(), 1.0);
    }
    let report = VerificationReport::from_mc(
        "dirichlet_residual",
        a,
        Some(gamma),
        Some(x),
        cfg.n_paths,
        mean,
        0.0,
        se,
        5.0,
        diagnostics,
    );

    let qv_medians = zero_qv_medians(alpha, gamma, x, cfg, &[8, 32, 128])?;
    let mut qv_diag = BTreeMap::new();
    for (k, m) in [8usize, 32, 128].iter().zip(&qv_medians) {
        qv_diag.insert(format!("qv_median_k{k}"), *m);
    }
    // Encoded monotonicity gate: the worst consecutive ratio must sit
    // in [0, 1), i.e. within 4 * 0.125 of 0.5.
    let worst_ratio = qv_medians
        .windows(2)
        .map(|w| w[1] / w[0])
        .fold(f64::MIN, f64::max);
    let qv_report = VerificationReport::from_mc(
        "dirichlet_zero_qv",
        a,
        Some(gamma),
        Some(x),
        cfg.probe_paths,
        worst_ratio,
        0.5,
        0.125,
        4.0,
        qv_diag,
    );
    Ok(DirichletOutcome {
        report,
        qv_report,
        qv_medians,
    })
}

/// Median over paths of sum_j (A_(t_j) - A_(t_(j-1)))^2 for each
/// partition size, computed from one field per path with the finest
/// partition as its time grid.
fn zero_qv_medians(
    alpha: Alpha,
    gamma: f64,
    x: f64,
    cfg: &McConfig,
    partitions: &[usize],
) -> Result<Vec<f64>, HarnessError> {
    let finest = *partitions.iter().max().unwrap();
    if cfg.n_steps % finest != 0 {
        return Err(HarnessError::Config(format!(
            "n_steps = {} must be divisible by the finest partition {finest}",
            cfg.n_steps
        )));
    }
    for &k in partitions {
        if finest % k != 0 {
            return Err(HarnessError::Config(
                "partition sizes must divide the finest one".into(),
            ));
        }
    }
    let a = alpha.get();
    let r = constant_integral(IntegralName::R, alpha, Some(gamma))?;
    let c4 = specfun::c4_from_r(alpha, gamma, r)?;
    let exponent = a - gamma;
    let t = cfg.t_end;
    let (centers, epsilon) = grid_with_points(alpha, t, cfg.grid_points);
    let truncation = *centers.last().unwrap() - x.abs();
    let t_grid: Vec<f64> = (1..=finest).map(|j| t * j as f64 / finest as f64).collect();
    let root = cfg.stream().derive(derivation::QV_PROBE);

    let per_path = par_paths(cfg.probe_paths, |i| {
        let path = simulate_path(alpha, t, cfg.n_steps, &root.derive(i))?;
        let field = estimate_field(&path, &centers, epsilon, &t_grid)?;
        let compensator: Vec<f64> = (0..finest)
            .map(|j| -> Result<f64, HarnessError> {
                let tail = pv_far_tail(field.level_value(x, j)?, truncation, exponent);
                let pv = pv_centered_at(&field, j, x, exponent, truncation)?;
                Ok(c4 * (pv.value + tail))
            })
            .collect::<Result<_, _>>()?;
        let sums: Vec<f64> = partitions
            .iter()
            .map(|&k| {
                let stride = finest / k;
                let mut prev = 0.0;
                let mut s = 0.0;
                for j in 1..=k {
                    let a_j = compensator[j * stride - 1];
                    s += (a_j - prev) * (a_j - prev);
                    prev = a_j;
                }
                s
            })
            .collect();
        Ok(sums)
    })?;

    Ok((0..partitions.len())
        .map(|idx| {
            let mut vals: Vec<f64> = per_path.iter().map(|row| row[idx]).collect();
            vals.sort_by(f64::total_cmp);
            let n = vals.len();
            if n % 2 == 1 {
                vals[n / 2]
            } else {
                0.5 * (vals[n / 2 - 1] + vals[n / 2])
            }
        })
        .collect())
}

/// Ensemble means of the naive capped Riemann sum of
/// |X_s - x|^(gamma-alpha) for gamma < alpha-1, at successively halved
/// bin widths. The underlying integral is infinite, so the means must
/// grow monotonically as the cap refines; common paths across levels
/// make the growth pathwise-deterministic.
pub fn divergence_probe(
    alpha: Alpha,
    gamma: f64,
    x: f64,
    cfg: &McConfig,
    levels: usize,
) -> Result<Vec<f64>, HarnessError> {
    cfg.validate()?;
    let a = alpha.get();
    if !(gamma > 0.0 && gamma < a - 1.0) {
        return Err(HarnessError::Config(format!(
            "divergence probe needs 0 < gamma < alpha-1, got {gamma}"
        )));
    }
    let power = gamma - a; // < -1: no bin average exists, cap at the edge value
    let t = cfg.t_end;
    let base_eps = cfg_epsilon(cfg, MEAN_EPSILON);
    let root = cfg.stream().derive(derivation::DIVERGENCE);

    let rows = par_paths(cfg.probe_paths, |i| {
        let path = simulate_path(alpha, t, cfg.n_steps, &root.derive(i))?;
        let sums: Vec<f64> = (0..levels)
            .map(|l| {
                let eps = base_eps / 2f64.powi(l as i32);
                capped_time_integral(&path, x, power, eps, eps.powf(power))
            })
            .collect();
        Ok(sums)
    })?;
    Ok((0..levels)
        .map(|l| rows.iter().map(|r| r[l]).sum::<f64>() / rows.len() as f64)
        .collect())
}

pub struct SymmetricPowerOutcome {
    pub residual: VerificationReport,
    pub odd_moment: VerificationReport,
    pub probe: MartingaleProbe,
}

/// Symmetric-power decomposition
/// q X_t^(gamma,*) = N + c1 p.v. int_0^t ds / X_s^(alpha-gamma,*):
/// the residual and the raw odd moment both have mean zero by
/// symmetry, so the substantive verdict is the martingale probe on the
/// residual increments.
pub fn symmetric_power_check(
    alpha: Alpha,
    gamma: f64,
    cfg: &McConfig,
) -> Result<SymmetricPowerOutcome, HarnessError> {
    cfg.validate()?;
    if cfg.n_steps % 2 != 0 {
        return Err(HarnessError::Config(
            "symmetric-power probe checkpoint t/2 needs an even step count".into(),
        ));
    }
    let a = alpha.get();
    let q_eff = constant_integral(IntegralName::Q, alpha, Some(gamma))? * cfg.fault();
    let c1 = specfun::c1(alpha)?;
    let theta = a - gamma;
    let t = cfg.t_end;
    let half = cfg.n_steps / 2;
    let t_half = t * half as f64 / cfg.n_steps as f64;
    let (centers, epsilon) = grid_with_points(alpha, t, cfg.grid_points);
    let root = cfg.stream().derive(derivation::SYMPOWER);

    let rows = par_paths(cfg.n_paths, |i| {
        let path = simulate_path(alpha, t, cfg.n_steps, &root.derive(i))?;
        let field = estimate_field(&path, &centers, epsilon, &[t_half, t])?;
        let pv_s = pv_symmetric_at(&field, 0, theta)?;
        let pv_t = pv_symmetric_at(&field, 1, theta)?;
        let xs = path.values[half];
        let xt = path.terminal();
        let odd = q_eff * sym_power(xt, gamma);
        let n_t = odd - c1 * pv_t.value;
        let n_s = q_eff * sym_power(xs, gamma) - c1 * pv_s.value;
        Ok((n_t, n_t - n_s, odd, xs.signum(), xs.abs().min(1.0)))
    })?;

    let residuals: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let increments: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let odd: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let g_sign: Vec<f64> = rows.iter().map(|r| r.3).collect();
    let g_clip: Vec<f64> = rows.iter().map(|r| r.4).collect();

    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("q_effective".into(), q_eff);
    diagnostics.insert("theta".into(), theta);
    diagnostics.insert("epsilon".into(), epsilon);
    let (mean, se) = mean_se(&residuals);
    let residual = VerificationReport::from_mc(
        "sympower_residual",
        a,
        Some(gamma),
        None,
        cfg.n_paths,
        mean,
        0.0,
        se,
        cfg.tolerance_multiple,
        diagnostics,
    );
    let (mean_odd, se_odd) = mean_se(&odd);
    let odd_moment = VerificationReport::from_mc(
        "sympower_odd_moment",
        a,
        Some(gamma),
        None,
        cfg.n_paths,
        mean_odd,
        0.0,
        se_odd,
        cfg.tolerance_multiple,
        BTreeMap::new(),
    );
    let probe = martingale_probe(
        t_half,
        t,
        &increments,
        &[("sign_xs", g_sign), ("clip_xs", g_clip)],
        cfg.tolerance_multiple,
    );
    Ok(SymmetricPowerOutcome {
        residual,
        odd_moment,
        probe,
    })
}

/// Ito-Tanaka corollary for a compactly supported step function f:
/// F(X_t) = F(0) + int f(x) N^x_t dx + c1 int_0^t f(X_s) ds with
/// F(y) = int f(x) |y - x|^(alpha-1) dx. The martingale term has mean
/// zero, so the residual mean is gated at the usual multiple.
pub fn ito_tanaka_check(
    alpha: Alpha,
    bin_edges: &[f64],
    weights: &[f64],
    cfg: &McConfig,
) -> Result<VerificationReport, HarnessError> {
    cfg.validate()?;
    if bin_edges.len() != weights.len() + 1 || bin_edges.windows(2).any(|w| w[1] <= w[0]) {
        return Err(HarnessError::Config(
            "bin edges must be strictly increasing with one more entry than weights".into(),
        ));
    }
    let span = 4.0 * cfg.t_end.max(f64::MIN_POSITIVE).powf(1.0 / alpha.get());
    if bin_edges[0] < -span || *bin_edges.last().unwrap() > span {
        return Err(HarnessError::Config(format!(
            "step function support exceeds the level grid span +-{span}"
        )));
    }
    let a = alpha.get();
    let c1_eff = specfun::c1(alpha)? * cfg.fault();
    let t = cfg.t_end;

    // F(y) = sum_b w_b (g(y - a_b) - g(y - b_b)) / alpha with
    // g(u) = sgn(u) |u|^alpha, from the closed-form bin integral.
    let g = move |u: f64| sym_power(u, a);
    let big_f = {
        let edges = bin_edges.to_vec();
        let w = weights.to_vec();
        move |y: f64| -> f64 {
            let mut s = 0.0;
            for (b, &wb) in w.iter().enumerate() {
                s += wb * (g(y - edges[b]) - g(y - edges[b + 1]));
            }
            s / a
        }
    };
    let little_f = {
        let edges = bin_edges.to_vec();
        let w = weights.to_vec();
        move |y: f64| -> f64 {
            if y < edges[0] || y >= *edges.last().unwrap() {
                return 0.0;
            }
            let b = edges.partition_point(|&e| e <= y) - 1;
            w.get(b).copied().unwrap_or(0.0)
        }
    };
    let f0 = big_f(0.0);
    let root = cfg.stream().derive(derivation::ITO_TANAKA);
    let dt = t / cfg.n_steps as f64;
    let residuals = par_paths(cfg.n_paths, |i| {
        let path = simulate_path(alpha, t, cfg.n_steps, &root.derive(i))?;
        let occupation: f64 = path.values[..cfg.n_steps].iter().map(|&v| little_f(v)).sum::<f64>() * dt;
        Ok(big_f(path.terminal()) - f0 - c1_eff * occupation)
    })?;
    let (mean, se) = mean_se(&residuals);
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("c1_effective".into(), c1_eff);
    diagnostics.insert("bins".into(), weights.len() as f64);
    Ok(VerificationReport::from_mc(
        "ito_tanaka_residual",
        a,
        None,
        None,
        cfg.n_paths,
        mean,
        0.0,
        se,
        cfg.tolerance_multiple,
        diagnostics,
    ))
}

pub struct LocalTimeMeanOutcome {
    pub report: VerificationReport,
    /// |estimate - target| at the base discretization and each
    /// refinement level (dt and eps both halved per level).
    pub level_errors: Vec<f64>,
}

/// E L^0_t against (alpha/(alpha-1)) c0 t^((alpha-1)/alpha), at 10%
/// relative tolerance (the estimator bias is part of the deal), plus a
/// refinement trend: halving dt and eps must shrink the error.
pub fn local_time_mean_check(
    alpha: Alpha,
    cfg: &McConfig,
    refinement_levels: usize,
) -> Result<LocalTimeMeanOutcome, HarnessError> {
    cfg.validate()?;
    let a = alpha.get();
    let t = cfg.t_end;
    if t == 0.0 {
        let report = VerificationReport::from_relative(
            "local_time_mean",
            a,
            None,
            Some(0.0),
            0,
            0.0,
            0.0,
            0.0,
            0.10,
            BTreeMap::new(),
        );
        return Ok(LocalTimeMeanOutcome {
            report,
            level_errors: vec![],
        });
    }
    let target =
        (a / (a - 1.0)) * specfun::c0(alpha)? * t.powf((a - 1.0) / a) * cfg.fault();
    let base_eps = cfg_epsilon(cfg, MEAN_EPSILON);
    let root = cfg.stream().derive(derivation::LOCAL_TIME);

    let mut level_errors = Vec::new();
    let mut base_report = None;
    for level in 0..=refinement_levels {
        let eps = base_eps / 2f64.powi(level as i32);
        let steps = cfg.n_steps << level;
        let means = par_paths(cfg.n_paths, |i| {
            let path = simulate_path(alpha, t, steps, &root.derive(level as u64).derive(i))?;
            Ok(local_time_at_level(&path, 0.0, eps, &[t])?[0])
        })?;
        let (mean, se) = mean_se(&means);
        level_errors.push((mean - target).abs());
        if level == 0 {
            let mut diagnostics = BTreeMap::new();
            diagnostics.insert("dt".into(), t / steps as f64);
            diagnostics.insert("epsilon".into(), eps);
            diagnostics.insert("target".into(), target);
            base_report = Some(VerificationReport::from_relative(
                "local_time_mean",
                a,
                None,
                Some(0.0),
                cfg.n_paths,
                mean,
                target,
                se,
                0.10,
                diagnostics,
            ));
        }
    }
    Ok(LocalTimeMeanOutcome {
        report: base_report.unwrap(),
        level_errors,
    })
}

/// The sampler self-test gate run at suite entry.
pub fn characteristic_gate(alpha: Alpha, cfg: &McConfig) -> VerificationReport {
    crate::sampler::characteristic_function_check(
        alpha,
        100_000,
        &cfg.stream().derive(derivation::GATE),
        &[0.5, 1.0, 2.0],
        cfg.tolerance_multiple,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{run_suite, CheckName};

    fn alpha(v: f64) -> Alpha {
        Alpha::new(v).unwrap()
    }

    /// Small but honest configuration for unit tests; the acceptance
    /// suite runs the full-size references.
    fn small_cfg(seed: u64) -> McConfig {
        let mut cfg = McConfig::new(seed);
        cfg.n_paths = 2_000;
        cfg.n_steps = 1 << 12;
        cfg.grid_points = 401;
        cfg.probe_paths = 300;
        cfg
    }

    #[test]
    fn tanaka_passes_and_fault_fails() {
        let cfg = small_cfg(101);
        let out = tanaka_check(alpha(1.5), 0.0, &cfg).unwrap();
        assert!(out.report.pass, "{}", out.report.table_line());
        assert!(out.probe.pass());

        let mut bad = cfg.clone();
        bad.fault_injection = Some(1.2);
        let out = tanaka_check(alpha(1.5), 0.0, &bad).unwrap();
        assert!(!out.report.pass, "corrupted c1 must fail the mean check");
    }

    #[test]
    fn tanaka_far_level_degenerates() {
        let cfg = small_cfg(102);
        let out = tanaka_check(alpha(1.5), 25.0, &cfg).unwrap();
        assert!(out.report.pass, "{}", out.report.table_line());
        // Local time at a far level is essentially never collected.
        assert!(out.report.mc_estimate.abs() < 1.0);
    }

    #[test]
    fn tanaka_zero_horizon_trivial() {
        let mut cfg = small_cfg(103);
        cfg.t_end = 0.0;
        let out = tanaka_check(alpha(1.5), 0.0, &cfg).unwrap();
        assert!(out.report.pass);
        assert_eq!(out.report.mc_estimate, 0.0);
    }

    #[test]
    fn bracket_ratio_near_one() {
        let mut cfg = small_cfg(104);
        cfg.n_paths = 4_000;
        let rep = bracket_check(alpha(1.5), 0.0, &cfg).unwrap();
        assert!(rep.pass, "{}", rep.table_line());

        let mut bad = cfg.clone();
        bad.fault_injection = Some(1.5);
        let rep = bracket_check(alpha(1.5), 0.0, &bad).unwrap();
        assert!(!rep.pass);
    }

    #[test]
    fn bracket_skipped_at_brownian_boundary() {
        let rep = bracket_check(alpha(2.0), 0.0, &small_cfg(105)).unwrap();
        assert!(rep.is_boundary_skip());
    }

    #[test]
    fn moment_scaling_cases() {
        let mut cfg = small_cfg(106);
        cfg.n_paths = 100_000;
        cfg.t_end = 2.0;
        let rep = moment_scaling_check(alpha(1.5), 0.7, &cfg).unwrap();
        assert!(rep.pass, "{}", rep.table_line());
        // gamma = 0: both sides exactly 1.
        let rep = moment_scaling_check(alpha(1.5), 0.0, &cfg).unwrap();
        assert!(rep.pass && rep.mc_estimate == 1.0 && rep.analytic_target == 1.0);
        // Gaussian boundary cross-check E|X_1| = 2/sqrt(pi).
        cfg.t_end = 1.0;
        let rep = moment_scaling_check(alpha(2.0), 1.0, &cfg).unwrap();
        assert!(rep.pass);
        assert!((rep.analytic_target - 2.0 / std::f64::consts::PI.sqrt()).abs() < 1e-14);
        // Fault injection shifts the target by far more than the gate.
        cfg.fault_injection = Some(1.2);
        let rep = moment_scaling_check(alpha(1.5), 0.7, &cfg).unwrap();
        assert!(!rep.pass);
        assert!(moment_scaling_check(alpha(1.5), 1.7, &cfg).is_err());
    }

    #[test]
    fn submartingale_identity_and_mc() {
        let cfg = small_cfg(107);
        let rep = submartingale_decomposition_check(alpha(1.5), 1.2, 0.0, &cfg).unwrap();
        assert!(rep.pass, "{}", rep.table_line());
        assert!(rep.diagnostics["identity_rel_gap"] < 1e-12);

        // Var(D) is infinite at gamma = 1.2 (2 gamma > alpha), so the
        // empirical SE runs wide; the control needs a 2x fault and a
        // bigger ensemble to clear it decisively.
        let mut bad = cfg.clone();
        bad.n_paths = 4_000;
        bad.fault_injection = Some(2.0);
        let rep = submartingale_decomposition_check(alpha(1.5), 1.2, 0.0, &bad).unwrap();
        assert!(!rep.pass);
    }

    #[test]
    fn submartingale_near_boundary_inflated_se() {
        // Toward gamma = alpha the residual tail index alpha/gamma
        // approaches 1 and the sample mean stops concentrating at any
        // desk-scale n (at gamma = alpha - 0.01 the check is
        // statistically vacuous). gamma = 1.35 is the practical edge:
        // the SE inflates to several times the mid-regime value and
        // the gate still resolves.
        let mut cfg = small_cfg(108);
        cfg.n_paths = 4_000;
        let rep = submartingale_decomposition_check(alpha(1.5), 1.35, 0.0, &cfg).unwrap();
        assert!(rep.pass, "{}", rep.table_line());
        let mid = submartingale_decomposition_check(alpha(1.5), 1.1, 0.0, &cfg).unwrap();
        assert!(rep.std_error > 2.0 * mid.std_error, "SE must inflate near the boundary");
    }

    #[test]
    fn submartingale_vanishes_at_small_horizon() {
        let mut cfg = small_cfg(109);
        cfg.t_end = 1e-3;
        cfg.n_paths = 4_000;
        let gamma = 1.2;
        let rep = submartingale_decomposition_check(alpha(1.5), gamma, 0.0, &cfg).unwrap();
        let scale = 10.0 * cfg.t_end.powf(gamma / 1.5);
        assert!(rep.mc_estimate.abs() < scale, "{}", rep.mc_estimate);
        assert!(rep.pass);
    }

    #[test]
    fn submartingale_regime_error() {
        let cfg = small_cfg(110);
        assert!(submartingale_decomposition_check(alpha(1.5), 0.4, 0.0, &cfg).is_err());
    }

    #[test]
    fn dirichlet_residual_and_probes() {
        let mut cfg = small_cfg(111);
        cfg.n_paths = 1_500;
        let out = dirichlet_decomposition_check(alpha(1.6), 0.45, 0.0, &cfg).unwrap();
        assert!(out.report.pass, "{}", out.report.table_line());
        assert_eq!(out.report.tolerance_multiple, 5.0);
        assert!(
            out.qv_medians.windows(2).all(|w| w[1] < w[0]),
            "zero-QV medians not decreasing: {:?}",
            out.qv_medians
        );
        assert!(out.qv_report.pass);

        let mut bad = cfg.clone();
        bad.fault_injection = Some(1.5);
        let out = dirichlet_decomposition_check(alpha(1.6), 0.45, 0.0, &bad).unwrap();
        assert!(!out.report.pass);
    }

    #[test]
    fn divergence_probe_grows_monotonically() {
        let mut cfg = small_cfg(112);
        cfg.probe_paths = 400;
        let means = divergence_probe(alpha(1.6), 0.45, 0.0, &cfg, 3).unwrap();
        assert!(
            means.windows(2).all(|w| w[1] > w[0]),
            "capped sums must grow under refinement: {means:?}"
        );
        assert!(divergence_probe(alpha(1.6), 0.8, 0.0, &cfg, 3).is_err());
    }

    #[test]
    fn symmetric_power_outcome() {
        let mut cfg = small_cfg(113);
        cfg.n_paths = 2_000;
        let out = symmetric_power_check(alpha(1.5), 0.5, &cfg).unwrap();
        assert!(out.residual.pass, "{}", out.residual.table_line());
        assert!(out.odd_moment.pass, "{}", out.odd_moment.table_line());
        assert!(out.probe.pass());

        // Corrupting q leaves both mean-zero gates untouched (every
        // term is odd), so the probe is the negative control.
        let mut bad = cfg.clone();
        bad.n_paths = 5_000;
        bad.fault_injection = Some(2.0);
        let out = symmetric_power_check(alpha(1.5), 0.5, &bad).unwrap();
        assert!(
            !out.probe.pass(),
            "corrupted q must break the martingale probe: {:?}",
            out.probe
        );
    }

    #[test]
    fn ito_tanaka_cases() {
        let mut cfg = small_cfg(114);
        cfg.n_paths = 2_000;
        // f = 0: residual identically zero.
        let rep = ito_tanaka_check(alpha(1.5), &[-0.5, 0.5], &[0.0], &cfg).unwrap();
        assert!(rep.pass && rep.mc_estimate == 0.0);
        // Triangular hat over [-1, 1].
        let edges: Vec<f64> = (0..=8).map(|i| -1.0 + 0.25 * i as f64).collect();
        let weights: Vec<f64> = edges
            .windows(2)
            .map(|w| 1.0 - (0.5 * (w[0] + w[1])).abs())
            .collect();
        let rep = ito_tanaka_check(alpha(1.5), &edges, &weights, &cfg).unwrap();
        assert!(rep.pass, "{}", rep.table_line());
        // Single-bin indicator: the binned Tanaka reduction.
        let rep = ito_tanaka_check(alpha(1.5), &[-0.05, 0.05], &[1.0], &cfg).unwrap();
        assert!(rep.pass, "{}", rep.table_line());
        // Support beyond the grid span.
        assert!(ito_tanaka_check(alpha(1.5), &[-9.0, 9.0], &[1.0], &cfg).is_err());
        // Fault injection.
        cfg.fault_injection = Some(1.5);
        let rep = ito_tanaka_check(alpha(1.5), &edges, &weights, &cfg).unwrap();
        assert!(!rep.pass);
    }

    #[test]
    fn local_time_mean_within_ten_percent() {
        // The relative bias of the occupation estimator at level 0 is
        // -0.617 sqrt(eps) (exact); eps = 2^-6 sits at -7.7%, inside
        // the 10% gate. The canonical eps = 2^-5 lands at -10.9% and is
        // covered by the acceptance suite as a documented shortfall.
        let mut cfg = small_cfg(115);
        cfg.n_paths = 2_000;
        cfg.n_steps = 1 << 14;
        cfg.epsilon = Some(2f64.powi(-6));
        let out = local_time_mean_check(alpha(1.5), &cfg, 0).unwrap();
        assert!(out.report.pass, "{}", out.report.table_line());

        let mut bad = cfg.clone();
        bad.fault_injection = Some(1.2);
        let out = local_time_mean_check(alpha(1.5), &bad, 0).unwrap();
        assert!(!out.report.pass);
    }

    #[test]
    fn suite_runs_and_is_deterministic() {
        let mut cfg = McConfig::new(424242);
        cfg.n_paths = 400;
        cfg.n_steps = 1 << 10;
        cfg.grid_points = 201;
        cfg.probe_paths = 100;
        let checks = [
            CheckName::Tanaka,
            CheckName::MomentScaling,
            CheckName::ItoTanaka,
        ];
        let a = run_suite(alpha(1.5), None, &checks, &cfg).unwrap();
        let b = run_suite(alpha(1.5), None, &checks, &cfg).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.mc_estimate.to_bits(), y.mc_estimate.to_bits());
            assert_eq!(x.std_error.to_bits(), y.std_error.to_bits());
        }
        assert_eq!(a[0].name, "characteristic_function");
    }

    #[test]
    fn suite_independent_of_thread_count() {
        let mut cfg = McConfig::new(7);
        cfg.n_paths = 300;
        cfg.n_steps = 1 << 10;
        cfg.grid_points = 201;
        cfg.probe_paths = 50;
        let run_in_pool = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| run_suite(alpha(1.5), None, &[CheckName::Tanaka], &cfg).unwrap())
        };
        let one = run_in_pool(1);
        let four = run_in_pool(4);
        for (x, y) in one.iter().zip(&four) {
            assert_eq!(x.mc_estimate.to_bits(), y.mc_estimate.to_bits());
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = small_cfg(116);
        cfg.n_paths = 0;
        assert!(matches!(
            tanaka_check(alpha(1.5), 0.0, &cfg),
            Err(HarnessError::Config(_))
        ));
    }
}
