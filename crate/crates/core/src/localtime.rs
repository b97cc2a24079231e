//! Local-time estimation from sampled paths and the principal-value
//! functionals built from local-time differences.
//!
//! The estimator is the central-bin occupation density
//! L^x_t ~ (1/2 eps) Leb{s <= t : |X_s - x| <= eps}, with the time
//! measure taken as a left-endpoint Riemann sum over the path grid.
//! It is unbiased for the occupation measure itself; all bias comes
//! from eps-smoothing and grid discretization, both surfaced to the
//! caller.

use thiserror::Error;

use crate::sampler::SamplePath;

#[derive(Debug, Error)]
pub enum LocalTimeError {
    #[error("invalid {what}: {detail}")]
    Invalid { what: &'static str, detail: String },
    #[error("time {t} is not a grid point of the path (step {dt})")]
    TimeOffGrid { t: f64, dt: f64 },
    #[error("grid coverage: {0}")]
    GridCoverage(String),
    #[error("test function must vanish at the grid boundary")]
    Support,
    #[error("principal-value exponent {value} outside admissible range ({lo}, {hi})")]
    PvRegime { value: f64, lo: f64, hi: f64 },
}

/// Estimated L^x_t on a space x time grid.
#[derive(Debug, Clone)]
pub struct LocalTimeField {
    pub x_centers: Vec<f64>,
    pub epsilon: f64,
    pub t_grid: Vec<f64>,
    /// values[i][j] ~ L^{x_i}_{t_j}.
    pub values: Vec<Vec<f64>>,
    /// Reproducibility token of the source path.
    pub source_seed: u64,
    /// Set when the bias gate dt <= eps^alpha was violated: an
    /// alpha-stable path can then cross a bin between grid points
    /// unobserved with non-negligible probability.
    pub bias_warning: bool,
}

/// Principal-value estimate with its cutoff bookkeeping.
#[derive(Debug, Clone, Copy)]
pub struct PrincipalValueEstimate {
    pub value: f64,
    /// Radius below which the integrand is constant-extrapolated.
    pub inner_cutoff: f64,
    pub truncation_radius: f64,
    pub exponent: f64,
    /// Values recomputed at (half, double) the inner cutoff. The grid
    /// floors the half side: with nothing between cutoff/2 and cutoff
    /// it equals the base value.
    pub sensitivity: (f64, f64),
}

/// Occupation-density estimate of the local-time field.
pub fn estimate_field(
    path: &SamplePath,
    x_centers: &[f64],
    epsilon: f64,
    t_grid: &[f64],
) -> Result<LocalTimeField, LocalTimeError> {
    if !(epsilon > 0.0) {
        return Err(LocalTimeError::Invalid {
            what: "epsilon",
            detail: format!("bin half-width must be positive, got {epsilon}"),
        });
    }
    if x_centers.is_empty() || x_centers.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LocalTimeError::Invalid {
            what: "x_centers",
            detail: "must be non-empty and strictly increasing".into(),
        });
    }
    if t_grid.is_empty() || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LocalTimeError::Invalid {
            what: "t_grid",
            detail: "must be non-empty and strictly increasing".into(),
        });
    }
    let dt = path.dt();
    let mut snapshot_steps = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let k = (t / dt).round();
        if (t - k * dt).abs() > 1e-9 * path.t_end.max(1.0) || k < 0.0 || k > path.n_steps() as f64 {
            return Err(LocalTimeError::TimeOffGrid { t, dt });
        }
        snapshot_steps.push(k as usize);
    }
    let bias_warning = dt > epsilon.powf(path.alpha.get());

    let n_x = x_centers.len();
    let n_t = t_grid.len();
    let mut counts = vec![0u32; n_x];
    let mut values = vec![vec![0.0f64; n_t]; n_x];
    let weight = dt / (2.0 * epsilon);

    let mut j = 0usize;
    for k in 0..=path.n_steps() {
        while j < n_t && snapshot_steps[j] == k {
            for i in 0..n_x {
                values[i][j] = counts[i] as f64 * weight;
            }
            j += 1;
        }
        if k == path.n_steps() {
            break;
        }
        // Left endpoint of step k occupies [k dt, (k+1) dt).
        let x = path.values[k];
        let lo = x_centers.partition_point(|&c| c < x - epsilon);
        let hi = x_centers.partition_point(|&c| c <= x + epsilon);
        for c in counts[lo..hi].iter_mut() {
            *c += 1;
        }
    }
    debug_assert_eq!(j, n_t);

    Ok(LocalTimeField {
        x_centers: x_centers.to_vec(),
        epsilon,
        t_grid: t_grid.to_vec(),
        values,
        source_seed: path.seed,
        bias_warning,
    })
}

impl LocalTimeField {
    /// Sum_i 2 eps L[i][j]: equals t_j up to a time step and boundary
    /// slack when the grid covers the path range.
    pub fn occupation_mass(&self, time_index: usize) -> f64 {
        self.values.iter().map(|row| row[time_index]).sum::<f64>() * 2.0 * self.epsilon
    }

    /// Type invariants: non-negativity and monotonicity in time.
    pub fn check_invariants(&self) -> Result<(), String> {
        for (i, row) in self.values.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !(v >= 0.0) {
                    return Err(format!("negative local time at [{i}][{j}]: {v}"));
                }
                if j > 0 && v < row[j - 1] {
                    return Err(format!("local time decreasing in t at [{i}][{j}]"));
                }
            }
        }
        Ok(())
    }

    /// Estimated L^x at a grid level and time column.
    pub fn level_value(&self, x: f64, time_index: usize) -> Result<f64, LocalTimeError> {
        let i = self.center_index(x)?;
        Ok(self.values[i][time_index])
    }

    fn center_index(&self, x: f64) -> Result<usize, LocalTimeError> {
        let i = self.x_centers.partition_point(|&c| c < x);
        for cand in [i.wrapping_sub(1), i] {
            if let Some(&c) = self.x_centers.get(cand) {
                if (c - x).abs() <= 1e-9 * (1.0 + x.abs()) {
                    return Ok(cand);
                }
            }
        }
        Err(LocalTimeError::GridCoverage(format!(
            "level x = {x} is not a grid node"
        )))
    }
}

/// |time integral - space integral| of a bounded test function over
/// the occupation identity, at the field's final time.
pub fn occupation_residual(
    path: &SamplePath,
    field: &LocalTimeField,
    f: impl Fn(f64) -> f64,
) -> Result<f64, LocalTimeError> {
    let n = field.x_centers.len();
    for idx in [0, 1, n - 2, n - 1] {
        if f(field.x_centers[idx]) != 0.0 {
            return Err(LocalTimeError::Support);
        }
    }
    let j = field.t_grid.len() - 1;
    let t_j = field.t_grid[j];
    let dt = path.dt();
    let steps = (t_j / dt).round() as usize;
    let time_side: f64 = path.values[..steps].iter().map(|&x| f(x)).sum::<f64>() * dt;
    let space_side: f64 = field
        .x_centers
        .iter()
        .enumerate()
        .map(|(i, &x)| f(x) * field.values[i][j] * 2.0 * field.epsilon)
        .sum();
    Ok((time_side - space_side).abs())
}

/// Universal envelope of the centered principal-value exponent
/// alpha - gamma over the Dirichlet regime, for every alpha in (1,2).
const PV_CENTERED_LO: f64 = 1.0;
const PV_CENTERED_HI: f64 = 1.5;

/// p.v. integral of the local-time difference around a level x:
/// int dz |z|^(-exponent) (L^(x+z)_t - L^x_t), trapezoid over the
/// grid with the innermost segment on each side constant-extended
/// toward 0, at the field's final time.
pub fn pv_centered(
    field: &LocalTimeField,
    x: f64,
    exponent: f64,
    truncation: f64,
) -> Result<PrincipalValueEstimate, LocalTimeError> {
    pv_centered_at(field, field.t_grid.len() - 1, x, exponent, truncation)
}

/// Same, at an arbitrary time column.
pub fn pv_centered_at(
    field: &LocalTimeField,
    time_index: usize,
    x: f64,
    exponent: f64,
    truncation: f64,
) -> Result<PrincipalValueEstimate, LocalTimeError> {
    if !(exponent > PV_CENTERED_LO && exponent < PV_CENTERED_HI) {
        return Err(LocalTimeError::PvRegime {
            value: exponent,
            lo: PV_CENTERED_LO,
            hi: PV_CENTERED_HI,
        });
    }
    let i0 = field.center_index(x)?;
    let span_lo = field.x_centers[0];
    let span_hi = *field.x_centers.last().unwrap();
    if x - truncation < span_lo - 1e-12 || x + truncation > span_hi + 1e-12 {
        return Err(LocalTimeError::GridCoverage(format!(
            "x +- truncation [{}, {}] exceeds grid [{span_lo}, {span_hi}]",
            x - truncation,
            x + truncation
        )));
    }
    let col: Vec<f64> = field.values.iter().map(|row| row[time_index]).collect();
    let l0 = col[i0];
    // Integrand over signed offsets, one sorted list per side.
    let side = |range: Box<dyn Iterator<Item = usize>>| -> Vec<(f64, f64)> {
        range
            .map(|i| {
                let z = field.x_centers[i] - x;
                (z.abs(), z.abs().powf(-exponent) * (col[i] - l0))
            })
            .filter(|&(az, _)| az <= truncation + 1e-12)
            .collect()
    };
    let left: Vec<(f64, f64)> = side(Box::new((0..i0).rev()));
    let right: Vec<(f64, f64)> = side(Box::new(i0 + 1..field.x_centers.len()));

    // Trapezoid outward from the cutoff plus the constant-extended
    // rectangle on [0, cutoff]; `skip` drops the innermost nodes for
    // the sensitivity recomputation.
    let one_side = |pts: &[(f64, f64)], skip: usize| -> f64 {
        if pts.len() <= skip {
            return 0.0;
        }
        let pts = &pts[skip..];
        let mut s = pts[0].0 * pts[0].1;
        for w in pts.windows(2) {
            s += 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0);
        }
        s
    };
    let value = one_side(&left, 0) + one_side(&right, 0);
    let double = one_side(&left, 1) + one_side(&right, 1);
    let inner_cutoff = match (left.first(), right.first()) {
        (Some(l), Some(r)) => l.0.min(r.0),
        (Some(l), None) => l.0,
        (None, Some(r)) => r.0,
        (None, None) => 0.0,
    };
    Ok(PrincipalValueEstimate {
        value,
        inner_cutoff,
        truncation_radius: truncation,
        exponent,
        // Nothing sits below one grid spacing: the half-cutoff value
        // is floored at the base value.
        sensitivity: (value, double),
    })
}

/// Symmetric principal value p.v. int_0^t ds / X_s^(theta,*) as the
/// local-time functional int_0^inf dz z^(-theta) (L^z_t - L^(-z)_t),
/// at the field's final time. Requires a grid symmetric about 0.
pub fn pv_symmetric(
    field: &LocalTimeField,
    theta: f64,
) -> Result<PrincipalValueEstimate, LocalTimeError> {
    pv_symmetric_at(field, field.t_grid.len() - 1, theta)
}

pub fn pv_symmetric_at(
    field: &LocalTimeField,
    time_index: usize,
    theta: f64,
) -> Result<PrincipalValueEstimate, LocalTimeError> {
    // theta < (alpha+1)/2 <= 3/2 for every alpha in (1,2].
    if !(theta > 0.0 && theta < 1.5) {
        return Err(LocalTimeError::PvRegime {
            value: theta,
            lo: 0.0,
            hi: 1.5,
        });
    }
    let n = field.x_centers.len();
    if n % 2 == 0 {
        return Err(LocalTimeError::GridCoverage(
            "grid must have an odd point count centered at 0".into(),
        ));
    }
    let i0 = n / 2;
    let scale = field.x_centers[n - 1].abs().max(1.0);
    for k in 0..=i0 {
        if (field.x_centers[i0 + k] + field.x_centers[i0 - k]).abs() > 1e-9 * scale {
            return Err(LocalTimeError::GridCoverage(
                "grid is not symmetric about 0".into(),
            ));
        }
    }
    let col: Vec<f64> = field.values.iter().map(|row| row[time_index]).collect();
    let pts: Vec<(f64, f64)> = (1..=i0)
        .map(|k| {
            let z = field.x_centers[i0 + k];
            (z, z.powf(-theta) * (col[i0 + k] - col[i0 - k]))
        })
        .collect();
    let eval = |skip: usize| -> f64 {
        if pts.len() <= skip {
            return 0.0;
        }
        let pts = &pts[skip..];
        let mut s = pts[0].0 * pts[0].1;
        for w in pts.windows(2) {
            s += 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0);
        }
        s
    };
    let value = eval(0);
    Ok(PrincipalValueEstimate {
        value,
        inner_cutoff: pts.first().map(|p| p.0).unwrap_or(0.0),
        truncation_radius: field.x_centers[n - 1],
        exponent: theta,
        sensitivity: (value, eval(1)),
    })
}

/// Log-log regression slope of max_x |L^(x+y) - L^x| against dyadic
/// offsets y; a statistical indication of the Holder exponent. `None`
/// for fields with no variation ("flat").
pub fn holder_probe(field: &LocalTimeField) -> Option<f64> {
    let j = field.t_grid.len() - 1;
    let col: Vec<f64> = field.values.iter().map(|row| row[j]).collect();
    let n = col.len();
    let h = field.x_centers[1] - field.x_centers[0];
    let mut pts = Vec::new();
    for m in [1usize, 2, 4, 8, 16] {
        if m >= n {
            break;
        }
        let mut max_d = 0.0f64;
        for i in 0..n - m {
            max_d = max_d.max((col[i + m] - col[i]).abs());
        }
        if max_d > 0.0 {
            pts.push(((m as f64 * h).ln(), max_d.ln()));
        }
    }
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

/// Default estimation grid: 401 centers spanning +-4 t^(1/alpha) with
/// bins tiling the line (eps = spacing / 2).
pub fn default_grid(alpha: crate::specfun::Alpha, t_end: f64) -> (Vec<f64>, f64) {
    grid_with_points(alpha, t_end, 401)
}

pub fn grid_with_points(
    alpha: crate::specfun::Alpha,
    t_end: f64,
    n_points: usize,
) -> (Vec<f64>, f64) {
    let half_span = 4.0 * t_end.powf(1.0 / alpha.get());
    let n = if n_points % 2 == 0 { n_points + 1 } else { n_points };
    let h = 2.0 * half_span / (n - 1) as f64;
    let centers = (0..n)
        .map(|i| -half_span + i as f64 * h)
        .collect::<Vec<_>>();
    (centers, h / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{simulate_path, SeedStream};
    use crate::specfun::Alpha;

    fn alpha(v: f64) -> Alpha {
        Alpha::new(v).unwrap()
    }

    fn synthetic_path(values: Vec<f64>, t_end: f64) -> SamplePath {
        SamplePath {
            alpha: alpha(1.5),
            t_end,
            values,
            seed: 0,
        }
    }

    /// Field with a single prescribed column (t_grid = [t]).
    fn synthetic_field(x_centers: Vec<f64>, epsilon: f64, column: Vec<f64>, t: f64) -> LocalTimeField {
        LocalTimeField {
            values: column.into_iter().map(|v| vec![v]).collect(),
            x_centers,
            epsilon,
            t_grid: vec![t],
            source_seed: 0,
            bias_warning: false,
        }
    }

    #[test]
    fn unit_speed_path_has_unit_occupation_density() {
        let n = 1000;
        let values: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
        let path = synthetic_path(values, 1.0);
        let field = estimate_field(&path, &[0.5], 0.01, &[1.0]).unwrap();
        let l = field.values[0][0];
        assert!((l - 1.0).abs() <= 0.06, "L = {l}");
    }

    #[test]
    fn flat_path_never_leaves_origin_bin() {
        let path = synthetic_path(vec![0.0; 65], 1.0);
        let field = estimate_field(&path, &[-0.5, 0.5], 0.1, &[0.5, 1.0]).unwrap();
        assert_eq!(field.values[0], vec![0.0, 0.0]);
        assert_eq!(field.values[1], vec![0.0, 0.0]);
    }

    #[test]
    fn invariants_and_occupation_identity_on_simulated_path() {
        let path = simulate_path(alpha(1.5), 1.0, 4096, &SeedStream::new(31)).unwrap();
        let span = path.values.iter().fold(0.0f64, |m, v| m.max(v.abs())) + 0.5;
        let n = 501;
        let h = 2.0 * span / (n - 1) as f64;
        let centers: Vec<f64> = (0..n).map(|i| -span + i as f64 * h).collect();
        let t_grid = [0.25, 0.5, 1.0];
        let field = estimate_field(&path, &centers, h / 2.0, &t_grid).unwrap();
        field.check_invariants().unwrap();
        for (j, &t) in t_grid.iter().enumerate() {
            let mass = field.occupation_mass(j);
            assert!(
                mass <= t + 1e-9 && mass >= t - 2.0 * path.dt() - 1e-9,
                "t = {t}: mass {mass}"
            );
        }
    }

    #[test]
    fn additivity_against_suffix_count_oracle() {
        let path = simulate_path(alpha(1.5), 1.0, 512, &SeedStream::new(32)).unwrap();
        let centers: Vec<f64> = (-40..=40).map(|i| i as f64 * 0.1).collect();
        let eps = 0.05;
        let field = estimate_field(&path, &centers, eps, &[0.5, 1.0]).unwrap();
        let dt = path.dt();
        for (i, &x) in centers.iter().enumerate() {
            let suffix = path.values[256..512]
                .iter()
                .filter(|&&v| (v - x).abs() <= eps)
                .count() as f64
                * dt
                / (2.0 * eps);
            let diff = field.values[i][1] - field.values[i][0];
            assert!((diff - suffix).abs() < 1e-12, "level {x}");
        }
    }

    #[test]
    fn bias_gate_flags_coarse_grids() {
        let path = simulate_path(alpha(1.5), 1.0, 16, &SeedStream::new(33)).unwrap();
        let field = estimate_field(&path, &[0.0], 0.05, &[1.0]).unwrap();
        assert!(field.bias_warning); // dt = 1/16 > 0.05^1.5
        let path = simulate_path(alpha(1.5), 1.0, 4096, &SeedStream::new(33)).unwrap();
        let field = estimate_field(&path, &[0.0], 0.05, &[1.0]).unwrap();
        assert!(!field.bias_warning);
    }

    #[test]
    fn off_grid_time_rejected() {
        let path = simulate_path(alpha(1.5), 1.0, 64, &SeedStream::new(34)).unwrap();
        assert!(matches!(
            estimate_field(&path, &[0.0], 0.1, &[0.013]),
            Err(LocalTimeError::TimeOffGrid { .. })
        ));
    }

    #[test]
    fn residual_vanishes_for_bin_indicators() {
        let path = simulate_path(alpha(1.5), 1.0, 1024, &SeedStream::new(35)).unwrap();
        let (centers, eps) = grid_with_points(alpha(1.5), 1.0, 201);
        let field = estimate_field(&path, &centers, eps, &[1.0]).unwrap();
        let mid = centers[100];
        let one_bin = move |x: f64| if (x - mid).abs() <= eps { 1.0 } else { 0.0 };
        let r = occupation_residual(&path, &field, one_bin).unwrap();
        assert!(r < 1e-12, "single bin residual {r}");
        let next = centers[101];
        let two_bins =
            move |x: f64| if (x - mid).abs() <= eps || (x - next).abs() <= eps { 1.0 } else { 0.0 };
        let r = occupation_residual(&path, &field, two_bins).unwrap();
        assert!(r < 1e-12, "additivity residual {r}");
    }

    #[test]
    fn residual_bounded_for_smooth_bump() {
        let path = simulate_path(alpha(1.5), 1.0, 4096, &SeedStream::new(36)).unwrap();
        let (centers, eps) = grid_with_points(alpha(1.5), 1.0, 401);
        let field = estimate_field(&path, &centers, eps, &[1.0]).unwrap();
        // Bump over ~20 bins around 0; sup |f| = 1, sup |f'| = 1/(10 eps).
        let w = 10.0 * eps;
        let bump = move |x: f64| {
            let u = x / w;
            if u.abs() < 1.0 {
                (1.0 - u * u).powi(2)
            } else {
                0.0
            }
        };
        let r = occupation_residual(&path, &field, bump).unwrap();
        let bound = 2.0 * path.dt() + eps / w * 1.0;
        assert!(r <= bound, "residual {r} vs bound {bound}");
    }

    #[test]
    fn residual_support_error() {
        let path = simulate_path(alpha(1.5), 1.0, 64, &SeedStream::new(37)).unwrap();
        let (centers, eps) = grid_with_points(alpha(1.5), 1.0, 101);
        let field = estimate_field(&path, &centers, eps, &[1.0]).unwrap();
        assert!(matches!(
            occupation_residual(&path, &field, |_| 1.0),
            Err(LocalTimeError::Support)
        ));
    }

    #[test]
    fn pv_centered_zero_for_constant_field() {
        let centers: Vec<f64> = (-50..=50).map(|i| i as f64 * 0.04).collect();
        let field = synthetic_field(centers.clone(), 0.02, vec![0.7; centers.len()], 1.0);
        let pv = pv_centered(&field, 0.0, 1.2, 1.5).unwrap();
        assert_eq!(pv.value, 0.0);
        assert_eq!(pv.sensitivity, (0.0, 0.0));
    }

    #[test]
    fn pv_centered_symmetric_field_doubles_one_side() {
        let centers: Vec<f64> = (-50..=50).map(|i| i as f64 * 0.04).collect();
        let column: Vec<f64> = centers.iter().map(|&c| 1.0 / (1.0 + c * c)).collect();
        let field = synthetic_field(centers, 0.02, column.clone(), 1.0);
        let pv = pv_centered(&field, 0.0, 1.2, 1.5).unwrap();
        // One-sided evaluation by hand on the right nodes.
        let mut right: Vec<(f64, f64)> = (51..101)
            .map(|i| {
                let z = (i as f64 - 50.0) * 0.04;
                (z, z.powf(-1.2) * (column[i] - column[50]))
            })
            .filter(|p| p.0 <= 1.5)
            .collect();
        right.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut one = right[0].0 * right[0].1;
        for w in right.windows(2) {
            one += 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0);
        }
        assert!((pv.value - 2.0 * one).abs() < 1e-12);
    }

    #[test]
    fn pv_centered_regime_and_coverage_errors() {
        let centers: Vec<f64> = (-10..=10).map(|i| i as f64 * 0.1).collect();
        let field = synthetic_field(centers.clone(), 0.05, vec![0.0; centers.len()], 1.0);
        assert!(matches!(
            pv_centered(&field, 0.0, 0.9, 0.5),
            Err(LocalTimeError::PvRegime { .. })
        ));
        assert!(matches!(
            pv_centered(&field, 0.0, 1.2, 5.0),
            Err(LocalTimeError::GridCoverage(_))
        ));
        assert!(matches!(
            pv_centered(&field, 0.033, 1.2, 0.5),
            Err(LocalTimeError::GridCoverage(_))
        ));
    }

    #[test]
    fn pv_symmetric_zero_for_even_field() {
        let centers: Vec<f64> = (-50..=50).map(|i| i as f64 * 0.02).collect();
        let column: Vec<f64> = centers.iter().map(|&c| (1.0 - c.abs()).max(0.0)).collect();
        let field = synthetic_field(centers, 0.01, column, 1.0);
        let pv = pv_symmetric(&field, 1.0).unwrap();
        assert_eq!(pv.value, 0.0);
    }

    #[test]
    fn pv_symmetric_linear_difference_integrates_exactly() {
        // L^z - L^(-z) = z on [0,1] with theta = 1: integrand is 1,
        // so the integral over (0,1] is exactly 1.
        let n = 50;
        let centers: Vec<f64> = (-n..=n).map(|i| i as f64 / n as f64).collect();
        let column: Vec<f64> = centers.iter().map(|&c| c.max(0.0)).collect();
        let field = synthetic_field(centers, 0.01, column, 1.0);
        let pv = pv_symmetric(&field, 1.0).unwrap();
        assert!((pv.value - 1.0).abs() < 1e-12, "{}", pv.value);
        assert!((pv.inner_cutoff - 0.02).abs() < 1e-12);
    }

    #[test]
    fn pv_symmetric_requires_symmetric_grid() {
        let field = synthetic_field(vec![-0.2, 0.0, 0.3], 0.1, vec![0.0; 3], 1.0);
        assert!(matches!(
            pv_symmetric(&field, 1.0),
            Err(LocalTimeError::GridCoverage(_))
        ));
        let field = synthetic_field(vec![-0.2, 0.2], 0.1, vec![0.0; 2], 1.0);
        assert!(pv_symmetric(&field, 1.0).is_err());
    }

    #[test]
    fn holder_probe_flat_and_linear() {
        let centers: Vec<f64> = (-50..=50).map(|i| i as f64 * 0.02).collect();
        let flat = synthetic_field(centers.clone(), 0.01, vec![0.3; centers.len()], 1.0);
        assert!(holder_probe(&flat).is_none());
        let tent: Vec<f64> = centers.iter().map(|&c| (1.0 - c.abs()).max(0.0)).collect();
        let field = synthetic_field(centers, 0.01, tent, 1.0);
        let slope = holder_probe(&field).unwrap();
        assert!((slope - 1.0).abs() < 1e-9, "slope {slope}");
    }

    #[test]
    fn holder_probe_orders_roughness_by_alpha()  {
        // Smoother local times for larger alpha: median slope at 1.9
        // beats 1.2 (comparative, fixed seeds).
        let slope_for = |a: f64, seed: u64| -> f64 {
            let mut slopes: Vec<f64> = (0..8)
                .map(|i| {
                    let path =
                        simulate_path(alpha(a), 1.0, 8192, &SeedStream::new(seed).derive(i)).unwrap();
                    let (centers, eps) = grid_with_points(alpha(a), 1.0, 401);
                    let field = estimate_field(&path, &centers, eps, &[1.0]).unwrap();
                    holder_probe(&field).unwrap()
                })
                .collect();
            slopes.sort_by(f64::total_cmp);
            0.5 * (slopes[3] + slopes[4])
        };
        assert!(slope_for(1.9, 40) > slope_for(1.2, 40));
    }

    #[test]
    fn default_grid_shape() {
        let (centers, eps) = default_grid(alpha(1.5), 1.0);
        assert_eq!(centers.len(), 401);
        assert!((centers[0] + 4.0).abs() < 1e-12);
        assert!((centers[400] - 4.0).abs() < 1e-12);
        let h = centers[1] - centers[0];
        assert!((eps - h / 2.0).abs() < 1e-15);
        assert!((centers[200]).abs() < 1e-12);
    }
}
