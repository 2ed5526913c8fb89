//! Risk evaluation: exact enumeration, Monte Carlo, worst-case search and
//! constant calibration.
//!
//! Monte Carlo runs are deterministic in `(seed, trials)`: trial `t` draws
//! from its own ChaCha8 stream ([`crate::sample::trial_rng`]`(seed, t)`),
//! per-trial losses are collected in trial order, and the reduction is a
//! sequential pass over that vector. The thread count never changes a result.

mod calibrate;
mod exact;
mod monte_carlo;
mod search;

use serde::Serialize;

pub use calibrate::{calibrate_constant, Calibration, CalibrationMethod, CalibrationPoint};
pub use exact::{exact_risk_univariate, ENUMERATION_CAP};
pub use monte_carlo::{
    mc_risk_conditional, mc_risk_semisupervised, mc_risk_univariate, Sampling,
    SemiSupervisedConfig,
};
pub use search::{simplex_grid, worst_case_risk, SearchConfig, WorstCase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskMethod {
    Exact,
    MonteCarlo,
}

/// An expected loss with its standard error (zero for exact values).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
    pub method: RiskMethod,
}

impl RiskEstimate {
    pub fn exact(mean: f64) -> Self {
        Self {
            mean,
            std_error: 0.0,
            trials: 0,
            method: RiskMethod::Exact,
        }
    }

    /// Sample mean and standard error (unbiased variance) of per-trial losses.
    pub fn from_samples(losses: &[f64]) -> Self {
        let trials = losses.len();
        let mean = losses.iter().sum::<f64>() / trials as f64;
        let var = if trials > 1 {
            losses.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>() / (trials - 1) as f64
        } else {
            0.0
        };
        Self {
            mean,
            std_error: (var / trials as f64).sqrt(),
            trials,
            method: RiskMethod::MonteCarlo,
        }
    }

    /// `sqrt(se_a² + se_b²)`.
    pub fn joint_std_error(&self, other: &RiskEstimate) -> f64 {
        self.std_error.hypot(other.std_error)
    }
}
