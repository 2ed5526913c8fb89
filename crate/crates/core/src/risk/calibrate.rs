use serde::Serialize;

use crate::bounds::{Provenance, RiskConstant};
use crate::error::{Error, Result};
use crate::estimators::EstimatorSpec;
use crate::losses::{LossKind, LossSpec};
use crate::pmf::Pmf;

use super::{exact_risk_univariate, mc_risk_univariate, RiskEstimate};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum CalibrationMethod {
    Exact,
    MonteCarlo { trials: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationPoint {
    pub n: usize,
    pub risk: RiskEstimate,
    /// `risk · n^e`.
    pub constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub constant: RiskConstant,
    pub points: Vec<CalibrationPoint>,
}

/// Fits `risk(n) ≈ C·n^{-e}` with the slope fixed (`e = p/2` for ℓᵖₚ, 1 for
/// f-divergences) from risks evaluated at the uniform distribution, and
/// returns the constant at the largest `n`.
pub fn calibrate_constant(
    spec: &EstimatorSpec,
    loss: &LossSpec,
    k: usize,
    n_list: &[usize],
    method: CalibrationMethod,
) -> Result<Calibration> {
    if n_list.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "calibration needs at least 3 sample sizes, got {}",
            n_list.len()
        )));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) || n_list[0] == 0 {
        return Err(Error::InvalidParameter(
            "calibration sample sizes must be positive and increasing".into(),
        ));
    }
    let uniform = Pmf::uniform(k)?;
    let exponent = loss.rate_exponent();
    let points = n_list
        .iter()
        .map(|&n| {
            let risk = match method {
                CalibrationMethod::Exact => exact_risk_univariate(spec, loss, &uniform, n)?,
                CalibrationMethod::MonteCarlo { trials, seed } => {
                    mc_risk_univariate(spec, loss, &uniform, n, trials, seed)?
                }
            };
            Ok(CalibrationPoint {
                n,
                risk,
                constant: risk.mean * (n as f64).powf(exponent),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let value = points.last().expect("non-empty").constant;
    Ok(Calibration {
        constant: RiskConstant {
            value,
            loss_kind: LossKind::from(loss),
            k,
            provenance: Provenance::Calibrated,
        },
        points,
    })
}
