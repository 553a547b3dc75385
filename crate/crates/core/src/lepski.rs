//! Variance-adaptive mean estimation: confidence intervals built under a
//! grid of candidate variance bounds are intersected from the largest bound
//! downward, and the estimate is the midpoint of the smallest non-empty
//! intersection. The confidence budget is split over the grid by a coding
//! distribution.

use crate::error::{conditions, Error, Result};
use crate::influence::InfluenceKind;
use crate::mean_catoni::{solve_mean, Sample};

/// Geometric grid of candidate variance bounds `V rho^{2k}`, `|k| <= s`,
/// each carrying coding mass `1/(2s+1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricGrid {
    pub v_ref: f64,
    pub rho: f64,
    pub s: u32,
}

impl GeometricGrid {
    pub fn new(v_ref: f64, rho: f64, s: u32) -> Result<Self> {
        if !(v_ref > 0.0) || !v_ref.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "reference variance must be positive, got {v_ref}"
            )));
        }
        if !(rho > 1.0) || !rho.is_finite() {
            return Err(Error::InvalidParameter(format!("grid ratio must exceed 1, got {rho}")));
        }
        Ok(GeometricGrid { v_ref, rho, s })
    }

    pub fn len(&self) -> usize {
        2 * self.s as usize + 1
    }

    /// Always false: a grid has at least its reference point.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid points in increasing order.
    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (-(self.s as i64)..=self.s as i64).map(|k| self.v_ref * self.rho.powi(2 * k as i32))
    }

    /// Whether `v` lies within the covered range `|log(v/V)| <= 2 s log rho`.
    pub fn covers(&self, v: f64) -> bool {
        v > 0.0 && (v / self.v_ref).ln().abs() <= 2.0 * self.s as f64 * self.rho.ln() + 1e-12
    }
}

/// Coding mass of the geometric grid: `1/(2s+1)` for `|k| <= s`.
pub fn nu_geometric_mass(grid: &GeometricGrid, k: i64) -> Result<f64> {
    if k.unsigned_abs() > grid.s as u64 {
        return Err(Error::Domain(format!("grid index {k} outside |k| <= {}", grid.s)));
    }
    Ok(1.0 / grid.len() as f64)
}

/// Mantissa depth beyond which a ratio is treated as not finitely coded.
const DYADIC_DEPTH_LIMIT: u32 = 48;

/// Coding mass of the dyadic distribution: writing `v_max / V = 2^s m` with
/// `m = sum_{k=0}^d c_k 2^{-k}`, `c_0 = c_d = 1`, the mass is
/// `2^{-2(d-1)} / (5 (|s|+2)(|s|+3))`. Ratios needing more than 48 mantissa
/// bits (or not positive and finite) get mass 0.
pub fn nu_dyadic_mass(v_max: f64, v_ref: f64) -> f64 {
    if !(v_ref > 0.0) || !v_ref.is_finite() || !(v_max > 0.0) || !v_max.is_finite() {
        return 0.0;
    }
    let ratio = v_max / v_ref;
    if !ratio.is_finite() || ratio <= 0.0 {
        return 0.0;
    }
    // exact binary decomposition of the f64 ratio
    let bits = ratio.to_bits();
    let raw_exp = ((bits >> 52) & 0x7FF) as i64;
    if raw_exp == 0 {
        return 0.0; // subnormal: deeper than any reasonable code
    }
    let mantissa = (bits & ((1u64 << 52) - 1)) | (1u64 << 52);
    let s = raw_exp - 1023;
    let depth = 52 - mantissa.trailing_zeros();
    if depth > DYADIC_DEPTH_LIMIT {
        return 0.0;
    }
    let s_abs = s.unsigned_abs() as f64;
    2f64.powi(-2 * (depth as i32 - 1)) / (5.0 * (s_abs + 2.0) * (s_abs + 3.0))
}

/// One confidence interval of the adaptive family.
#[derive(Debug, Clone, Copy)]
pub struct GridInterval {
    pub v_max: f64,
    pub center: f64,
    pub halfwidth: f64,
}

/// Adaptive estimate with the per-point intervals and the final
/// intersection it was read from.
#[derive(Debug, Clone)]
pub struct AdaptiveResult {
    pub theta_tilde: f64,
    pub intervals: Vec<GridInterval>,
    pub final_interval: (f64, f64),
}

/// Homogeneous deviation factor `B(eps) = sqrt(2 log(1/eps) / (n (1 - 2
/// log(1/eps)/n)))`; the known-variance halfwidth is `B(eps) sqrt(v)`.
fn homogeneous_bound(epsilon: f64, n: u64) -> Option<f64> {
    let l = (1.0 / epsilon).ln();
    let nf = n as f64;
    if nf <= 2.0 * l {
        return None;
    }
    Some((2.0 * l / (nf * (1.0 - 2.0 * l / nf))).sqrt())
}

/// Variance-adaptive mean estimate over a geometric grid. Builds
/// `I(v_k) = theta_hat(v_k) +/- B(eps nu) sqrt(v_k)` at every grid point,
/// intersects the suffix families from the largest bound downward, and
/// returns the midpoint of the smallest non-empty intersection.
pub fn adaptive_estimate(
    sample: &Sample,
    epsilon: f64,
    grid: &GeometricGrid,
    kind: InfluenceKind,
) -> Result<AdaptiveResult> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1/2), got {epsilon}"
        )));
    }
    let n = sample.len() as u64;
    let eps_point = epsilon / grid.len() as f64;
    let bound = homogeneous_bound(eps_point, n).ok_or_else(|| Error::Infeasible {
        condition: conditions::GRID_SAMPLE_SIZE,
        detail: format!(
            "n = {n} makes every grid interval the whole line (need n > {:.2})",
            2.0 * (1.0 / eps_point).ln()
        ),
    })?;
    let tol = sample.default_tolerance();
    let nf = n as f64;
    let l = (1.0 / eps_point).ln();

    let intervals: Vec<GridInterval> = grid
        .points()
        .map(|v_k| {
            // scale tuned to v_k at the per-point confidence
            let eta2 = bound * bound * v_k;
            let alpha = (2.0 * l / (nf * (v_k + eta2))).sqrt();
            let solve = solve_mean(sample, alpha, kind, tol)?;
            Ok(GridInterval { v_max: v_k, center: solve.theta, halfwidth: bound * v_k.sqrt() })
        })
        .collect::<Result<_>>()?;

    // suffix intersections from the largest bound downward
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    let mut best: Option<(f64, f64)> = None;
    for interval in intervals.iter().rev() {
        lo = lo.max(interval.center - interval.halfwidth);
        hi = hi.min(interval.center + interval.halfwidth);
        if lo <= hi {
            best = Some((lo, hi));
        } else {
            break; // nested family: once empty, all longer suffixes are empty
        }
    }
    let (lo, hi) = best.expect("the one-interval suffix is never empty");
    Ok(AdaptiveResult { theta_tilde: 0.5 * (lo + hi), intervals, final_interval: (lo, hi) })
}

/// Deviation bound of the adaptive estimate at the true variance `v`:
/// `2 rho B(eps/(2s+1)) sqrt(v)`, valid while `v` lies in the grid range.
pub fn adaptive_halfwidth(v: f64, grid: &GeometricGrid, epsilon: f64, n: u64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1/2), got {epsilon}"
        )));
    }
    if !grid.covers(v) {
        return Err(Error::Domain(format!(
            "v = {v} outside the grid range around {}",
            grid.v_ref
        )));
    }
    let eps_point = epsilon / grid.len() as f64;
    let bound = homogeneous_bound(eps_point, n).ok_or_else(|| Error::Infeasible {
        condition: conditions::GRID_SAMPLE_SIZE,
        detail: format!("n = {n}, need n > {:.2}", 2.0 * (1.0 / eps_point).ln()),
    })?;
    Ok(2.0 * grid.rho * bound * v.sqrt())
}
