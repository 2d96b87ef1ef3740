//! Univariate Gaussian mixtures and the grid functionals used to score them.
//!
//! Policies and targets in the continuous simulations are weighted sums of
//! univariate Gaussians. Learning progress is measured through overlap areas
//! between the training policy and individual target modes, evaluated by
//! composite trapezoidal quadrature on a uniform grid.

mod gaussian;
mod grid;
mod overlap;

pub use gaussian::{GaussianComponent, GaussianMixture};
pub use grid::{kl_grid, tv_distance, Grid};
pub use overlap::{gain_drop, overlap_area, overlap_area_tv_form, OverlapReport, OverlapValue};

use thiserror::Error;

/// Density values below this floor are treated as zero before any log.
pub const DENSITY_FLOOR: f64 = 1e-300;

/// Errors from mixture construction and grid functionals.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MixtureError {
    #[error("standard deviation must be strictly positive and finite, got {0}")]
    InvalidStd(f64),
    #[error("mixture weights must sum to 1 within 1e-12 (sum = {0})")]
    UnnormalizedWeights(f64),
    #[error("weight {0} outside [0, 1]")]
    WeightOutOfRange(f64),
    #[error("weights and components differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("mixture must have at least one component")]
    Empty,
    #[error("non-finite input value {0}")]
    NonFinite(f64),
    #[error("invalid grid: lo = {lo}, hi = {hi}, n_points = {n_points}")]
    InvalidGrid { lo: f64, hi: f64, n_points: usize },
    #[error("density arrays differ in length: {0} vs {1}")]
    GridLengthMismatch(usize, usize),
    #[error("negative density value {value} at grid index {index}")]
    NegativeDensity { index: usize, value: f64 },
}

/// Standard normal CDF via the Abramowitz-Stegun 7.1.26 erf approximation
/// (absolute error ~1.5e-7, enough for tail-mass warning thresholds).
pub(crate) fn normal_cdf(z: f64) -> f64 {
    let x = z / std::f64::consts::SQRT_2;
    let t = 1.0 / (1.0 + 0.3275911 * x.abs());
    let poly = t
        * (0.254829592
            + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    let erf = 1.0 - poly * (-x * x).exp();
    let erf = if x < 0.0 { -erf } else { erf };
    0.5 * (1.0 + erf)
}
