//! Detection of sparse variance contamination in Gaussian samples.
//!
//! The observation model is a two-component Gaussian scale mixture: each of
//! `n` iid values is standard normal with probability `1 - epsilon` and
//! `N(0, sigma^2)` with probability `epsilon`. Testing `epsilon = 0` against
//! `epsilon > 0, sigma != 1` admits four classical detectors - the
//! likelihood ratio, the two-sided chi-squared variance test, an extremes
//! (min/max) test, and the higher criticism statistic - whose asymptotic
//! detectable regions under the parameterization `epsilon = n^-beta` are
//! known in closed form.
//!
//! The crate provides:
//!
//! * [`model`] - mixture parameters, asymptotic regimes, deterministic
//!   sampling, and the CDF of absolute values;
//! * [`numerics`] - tail-accurate special functions (normal survival,
//!   folded-normal CDF, chi-squared CDF via the incomplete gamma);
//! * [`statistics`] - the four test statistics with closed-form p-values
//!   where they exist;
//! * [`theory`] - detection boundaries, likelihood-ratio second moments,
//!   and region classification;
//! * [`montecarlo`] - null calibration tables, Monte Carlo p-values,
//!   empirical power and risk, all deterministically parallel;
//! * [`experiments`] - the preset power scenarios with CSV/SVG output;
//! * [`cli`] - the `scalemix` binary's subcommands.
//!
//! Start with the `examples/` directory: each example is a small runnable
//! program exercising one capability.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod model;
pub mod montecarlo;
pub mod numerics;
pub mod rng;
pub mod statistics;
pub mod theory;

pub use error::{Error, Result};
pub use experiments::{Preset, ResultRow, ScenarioConfig};
pub use model::{mixture_abs_cdf, resolve_regime, sample, MixtureParams, RegimeSpec, Sample, Side};
pub use montecarlo::{
    calibrate_null, empirical_power, estimate_risk, mc_p_value, NullCalibration, PowerEstimate,
};
pub use numerics::Probability;
pub use statistics::{
    chi_squared_test, extremes_test, higher_criticism, log_likelihood_ratio, CalibrationKind,
    TestId, TestOutcome,
};
pub use theory::{classify, detection_boundary, second_moment_l, w_moments, BoundaryVerdict, Verdict};
