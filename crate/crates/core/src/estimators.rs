//! Univariate estimators and their compositions.
//!
//! The composition construction is per bucket: for every `x` the labeled
//! pairs with first coordinate `x` are reduced to y-counts, and the same
//! univariate rule is applied to each bucket independently. The joint
//! estimate multiplies these rows by a marginal estimate built from the
//! x-observations (unlabeled only, or pooled with the labeled x's).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pmf::{ConditionalPmf, JointPmf, Pmf};
use crate::sample::{CountVector, SampleSet};

/// A rule mapping a count vector to a pmf.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimatorSpec {
    /// `T_x / total`.
    Empirical,
    /// `(T_x + β) / (total + kβ)`.
    AddConstant { beta: f64 },
    /// `(T_x + √total/k) / (total + √total)`, the ℓ²₂ equalizer rule.
    MinimaxL2,
}

impl EstimatorSpec {
    pub fn add_constant(beta: f64) -> Result<Self> {
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "add-constant beta must be finite and non-negative, got {beta}"
            )));
        }
        Ok(EstimatorSpec::AddConstant { beta })
    }

    pub fn description(&self) -> String {
        match self {
            EstimatorSpec::Empirical => "empirical frequencies".into(),
            EstimatorSpec::AddConstant { beta } => format!("add-constant (beta = {beta})"),
            EstimatorSpec::MinimaxL2 => "l2 minimax (add sqrt(n)/k)".into(),
        }
    }
}

impl fmt::Display for EstimatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimatorSpec::Empirical => write!(f, "empirical"),
            EstimatorSpec::AddConstant { beta } => write!(f, "add_constant:{beta}"),
            EstimatorSpec::MinimaxL2 => write!(f, "minimax_l2"),
        }
    }
}

impl FromStr for EstimatorSpec {
    type Err = Error;

    /// Accepts `empirical`, `minimax_l2`, `add_constant:<beta>` (also `add_constant`, β = 1).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase().replace('-', "_");
        match s.as_str() {
            "empirical" => Ok(EstimatorSpec::Empirical),
            "minimax_l2" => Ok(EstimatorSpec::MinimaxL2),
            "add_constant" | "laplace" => Self::add_constant(1.0),
            _ => {
                let beta = s
                    .strip_prefix("add_constant:")
                    .and_then(|b| b.parse::<f64>().ok())
                    .ok_or_else(|| Error::InvalidParameter(format!("unknown estimator '{s}'")))?;
                Self::add_constant(beta)
            }
        }
    }
}

/// Writes the estimate for `counts` into `out` (length `k`).
pub(crate) fn estimate_into(spec: &EstimatorSpec, counts: &[u64], out: &mut [f64]) -> Result<()> {
    let k = counts.len() as f64;
    let total: u64 = counts.iter().sum();
    let n = total as f64;
    match *spec {
        EstimatorSpec::Empirical => {
            if total == 0 {
                return Err(Error::EmptySampleNoPrior);
            }
            for (o, &c) in out.iter_mut().zip(counts) {
                *o = c as f64 / n;
            }
        }
        EstimatorSpec::AddConstant { beta } => {
            if total == 0 && beta == 0.0 {
                return Err(Error::EmptySampleNoPrior);
            }
            if total == 0 {
                out.fill(1.0 / k);
            } else {
                let denom = n + k * beta;
                for (o, &c) in out.iter_mut().zip(counts) {
                    *o = (c as f64 + beta) / denom;
                }
            }
        }
        EstimatorSpec::MinimaxL2 => {
            if total == 0 {
                out.fill(1.0 / k);
            } else {
                let root = n.sqrt();
                let (shift, denom) = (root / k, n + root);
                for (o, &c) in out.iter_mut().zip(counts) {
                    *o = (c as f64 + shift) / denom;
                }
            }
        }
    }
    Ok(())
}

/// Applies a univariate rule to a count vector.
///
/// With no observations, `add_constant(β > 0)` and `minimax_l2` return the
/// uniform pmf; `empirical` (and `add_constant(0)`) fail.
pub fn apply_univariate(spec: &EstimatorSpec, counts: &CountVector) -> Result<Pmf> {
    let mut out = vec![0.0; counts.k()];
    estimate_into(spec, counts.counts(), &mut out)?;
    Pmf::new(out)
}

/// Row `x` is `spec` applied to the y-counts of bucket `x`.
pub fn conditional_from_counts(
    spec: &EstimatorSpec,
    bucket_counts: &[CountVector],
) -> Result<ConditionalPmf> {
    let rows = bucket_counts
        .iter()
        .map(|c| apply_univariate(spec, c))
        .collect::<Result<Vec<_>>>()?;
    ConditionalPmf::new(rows)
}

pub fn conditional_composition(spec: &EstimatorSpec, s: &SampleSet) -> Result<ConditionalPmf> {
    conditional_from_counts(spec, &s.labeled_y_counts())
}

/// `q̂_X(x)·q̂_{Y|X=x}(y)` from x-counts and per-bucket y-counts.
pub fn joint_from_counts(
    marginal_spec: &EstimatorSpec,
    cond_spec: &EstimatorSpec,
    x_counts: &CountVector,
    bucket_counts: &[CountVector],
) -> Result<JointPmf> {
    let marginal = apply_univariate(marginal_spec, x_counts)?;
    let conditional = conditional_from_counts(cond_spec, bucket_counts)?;
    crate::pmf::joint_from_parts(&marginal, &conditional)
}

/// The joint composition estimate from a sample set.
///
/// With `pool_x` the marginal uses all `n + m` x-observations; otherwise
/// only the unlabeled ones.
pub fn joint_composition(
    marginal_spec: &EstimatorSpec,
    cond_spec: &EstimatorSpec,
    s: &SampleSet,
    pool_x: bool,
) -> Result<JointPmf> {
    let mut x_counts = s.unlabeled_counts();
    if pool_x {
        x_counts = x_counts.merged(&s.labeled_x_counts())?;
    }
    joint_from_counts(marginal_spec, cond_spec, &x_counts, &s.labeled_y_counts())
}
