//! Overlap areas between scaled target modes and the training policy, and the
//! gain/drop bookkeeping built on them.

use super::{tv_distance, GaussianComponent, GaussianMixture, Grid, MixtureError};

/// Mass threshold beyond the grid ends above which an overlap result is
/// flagged as potentially inaccurate.
const TAIL_WARN_MASS: f64 = 1e-6;

/// Result of an overlap quadrature. `value` is clamped to [0, 1]; `raw`
/// keeps the unclamped quadrature value (overshoot is ~1e-12 at most).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapValue {
    pub value: f64,
    pub raw: f64,
    /// Set when either density holds more than 1e-6 mass outside the grid.
    pub tail_warning: bool,
}

/// Normalized overlap between a weighted target mode and a policy:
/// (1/weight) * integral min{weight * N(y; comp), policy(y)} dy.
pub fn overlap_area(
    weight: f64,
    comp: &GaussianComponent,
    policy: &GaussianMixture,
    grid: &Grid,
) -> Result<OverlapValue, MixtureError> {
    if !(weight > 0.0 && weight < 1.0) {
        return Err(MixtureError::WeightOutOfRange(weight));
    }
    let integrand: Vec<f64> = grid
        .points()
        .map(|y| (weight * comp.density(y)).min(policy.density(y)))
        .collect();
    let raw = grid.trapezoid(&integrand) / weight;
    let tail_warning = comp.tail_mass_outside(grid.lo(), grid.hi()) > TAIL_WARN_MASS
        || policy.tail_mass_outside(grid.lo(), grid.hi()) > TAIL_WARN_MASS;
    Ok(OverlapValue {
        value: raw.clamp(0.0, 1.0),
        raw,
        tail_warning,
    })
}

/// Same overlap expressed through the total variation distance:
/// 1/2 + 1/(2 w) - TV(w * comp, policy)/w on the shared grid.
pub fn overlap_area_tv_form(
    weight: f64,
    comp: &GaussianComponent,
    policy: &GaussianMixture,
    grid: &Grid,
) -> Result<f64, MixtureError> {
    if !(weight > 0.0 && weight < 1.0) {
        return Err(MixtureError::WeightOutOfRange(weight));
    }
    let scaled: Vec<f64> = grid.points().map(|y| weight * comp.density(y)).collect();
    let pol: Vec<f64> = policy.density_on(grid);
    let tv = tv_distance(&scaled, &pol, grid)?;
    Ok(0.5 + 0.5 / weight - tv / weight)
}

/// Terminal-state overlap report with the gain/drop deltas.
///
/// gain = s_new(T) - s_new(0) measures target-task learning; drop =
/// s_old(0) - s_old(T) measures forgetting. Both are reported unclamped.
/// (The TV identity expresses gain as the *decrease* of the normalized TV
/// to the scaled new mode; the sign convention here follows the overlap
/// definition, which is the authoritative one.)
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapReport {
    pub s_old: f64,
    pub s_new: f64,
    pub gain: f64,
    pub drop: f64,
}

/// Assembles gain and drop from initial/terminal overlap values.
pub fn gain_drop(s_old_0: f64, s_old_t: f64, s_new_0: f64, s_new_t: f64) -> OverlapReport {
    OverlapReport {
        s_old: s_old_t,
        s_new: s_new_t,
        gain: s_new_t - s_new_0,
        drop: s_old_0 - s_old_t,
    }
}
