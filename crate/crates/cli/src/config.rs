//! Sweep configuration, read from TOML.
//!
//! | Key           | Type            | Default          |
//! |---------------|-----------------|------------------|
//! | `loss`        | string          | required         |
//! | `k_x`, `k_y`  | integer ≥ 2     | 2                |
//! | `m_list`      | integers > 0    | required         |
//! | `n_list`      | integers > 0    | required         |
//! | `pairing`     | product \| zip  | product          |
//! | `trials`      | integer ≥ 100   | 10000            |
//! | `seed`        | integer         | 0                |
//! | `delta`       | real, δ·k_y < 1 | 0.01             |
//! | `marginal`    | estimator       | per loss, below  |
//! | `conditional` | estimator       | per loss, below  |
//! | `pool_x`      | bool            | true             |
//! | `joint`       | k_x rows of k_y | uniform          |
//! | `worst_case`  | bool            | false            |
//! | `search_resolution`, `search_iterations` | integers | 4, 2 |
//! | `csv_out`, `json_out` | paths   | none             |
//!
//! Default estimators: `minimax_l2` for `l2`, `empirical` for other ℓᵖₚ,
//! `add_constant:1` for f-divergences.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use semisup::estimators::EstimatorSpec;
use semisup::losses::LossSpec;
use semisup::pmf::{JointPmf, SimplexConstraint};

use crate::error::{CliError, CliResult};

pub const MIN_TRIALS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pairing {
    /// Every m with every n.
    #[default]
    Product,
    /// `m_list[i]` with `n_list[i]`.
    Zip,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub loss: String,
    #[serde(default = "two")]
    pub k_x: usize,
    #[serde(default = "two")]
    pub k_y: usize,
    pub m_list: Vec<i64>,
    pub n_list: Vec<i64>,
    #[serde(default)]
    pub pairing: Pairing,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    pub marginal: Option<String>,
    pub conditional: Option<String>,
    #[serde(default = "yes")]
    pub pool_x: bool,
    pub joint: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub worst_case: bool,
    #[serde(default = "default_resolution")]
    pub search_resolution: usize,
    #[serde(default = "default_iterations")]
    pub search_iterations: usize,
    pub csv_out: Option<PathBuf>,
    pub json_out: Option<PathBuf>,
}

fn two() -> usize {
    2
}
fn yes() -> bool {
    true
}
fn default_trials() -> usize {
    10_000
}
fn default_delta() -> f64 {
    0.01
}
fn default_resolution() -> usize {
    4
}
fn default_iterations() -> usize {
    2
}

/// A config that passed [`ExperimentConfig::validate`].
#[derive(Debug, Clone)]
pub struct Experiment {
    pub loss: LossSpec,
    pub k_x: usize,
    pub k_y: usize,
    pub points: Vec<(usize, usize)>,
    pub marginal: EstimatorSpec,
    pub conditional: EstimatorSpec,
    pub joint: JointPmf,
    pub constraint: SimplexConstraint,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Config(vec![format!("{}: {e}", path.display())]))
    }

    fn default_estimator(loss: &LossSpec) -> EstimatorSpec {
        match loss {
            LossSpec::Lp(p) if *p == 2.0 => EstimatorSpec::MinimaxL2,
            LossSpec::Lp(_) => EstimatorSpec::Empirical,
            LossSpec::FDiv(_) => EstimatorSpec::AddConstant { beta: 1.0 },
        }
    }

    /// Checks every field and reports all violations at once.
    pub fn validate(&self) -> CliResult<Experiment> {
        let mut errors = Vec::new();
        let loss = LossSpec::parse(&self.loss)
            .map_err(|e| errors.push(format!("loss: {e}")))
            .ok();
        for (name, k) in [("k_x", self.k_x), ("k_y", self.k_y)] {
            if k < 2 {
                errors.push(format!("{name} = {k} must be at least 2"));
            }
        }
        for (name, list) in [("m_list", &self.m_list), ("n_list", &self.n_list)] {
            if list.is_empty() {
                errors.push(format!("{name} is empty"));
            }
            for (i, v) in list.iter().enumerate() {
                if *v <= 0 {
                    errors.push(format!("{name}[{i}] = {v} must be positive"));
                }
            }
        }
        if self.pairing == Pairing::Zip && self.m_list.len() != self.n_list.len() {
            errors.push(format!(
                "pairing = \"zip\" needs m_list and n_list of equal length ({} vs {})",
                self.m_list.len(),
                self.n_list.len()
            ));
        }
        if self.trials < MIN_TRIALS {
            errors.push(format!("trials = {} must be at least {MIN_TRIALS}", self.trials));
        }
        if !(0.0..1.0).contains(&self.delta) {
            errors.push(format!("delta = {} must lie in [0, 1)", self.delta));
        } else if self.delta * self.k_y as f64 >= 1.0 {
            errors.push(format!("delta·k_y = {} must be below 1", self.delta * self.k_y as f64));
        }
        if self.search_resolution < 2 {
            errors.push(format!(
                "search_resolution = {} must be at least 2",
                self.search_resolution
            ));
        }
        let parse_est = |name: &str, v: &Option<String>, errors: &mut Vec<String>| match v {
            None => loss.as_ref().map(Self::default_estimator),
            Some(s) => s
                .parse::<EstimatorSpec>()
                .map_err(|e| errors.push(format!("{name}: {e}")))
                .ok(),
        };
        let marginal = parse_est("marginal", &self.marginal, &mut errors);
        let conditional = parse_est("conditional", &self.conditional, &mut errors);
        if let (Some(l), Some(EstimatorSpec::Empirical)) = (&loss, conditional) {
            if l.is_fdiv() {
                errors.push(
                    "conditional = empirical has infinite f-divergence risk; use add_constant or minimax_l2"
                        .into(),
                );
            }
        }
        let joint = match &self.joint {
            None => JointPmf::uniform(self.k_x.max(2), self.k_y.max(2)).ok(),
            Some(table) => {
                if table.len() != self.k_x || table.iter().any(|r| r.len() != self.k_y) {
                    errors.push(format!("joint must be {} rows of {} entries", self.k_x, self.k_y));
                    None
                } else {
                    JointPmf::from_table(table)
                        .map_err(|e| errors.push(format!("joint: {e}")))
                        .ok()
                }
            }
        };
        let constraint = SimplexConstraint::new(self.delta.clamp(0.0, 0.999)).unwrap_or_default();
        if let (Some(l), Some(j)) = (&loss, &joint) {
            if l.is_fdiv() && j.min_entry() < self.delta {
                errors.push(format!(
                    "joint has an entry {} below delta = {} (f-divergence runs are restricted to the floored simplex)",
                    j.min_entry(),
                    self.delta
                ));
            }
        }
        if !errors.is_empty() {
            return Err(CliError::Config(errors));
        }
        let (loss, marginal, conditional, joint) = (
            loss.expect("checked"),
            marginal.expect("checked"),
            conditional.expect("checked"),
            joint.expect("checked"),
        );
        let ms: Vec<usize> = self.m_list.iter().map(|&v| v as usize).collect();
        let ns: Vec<usize> = self.n_list.iter().map(|&v| v as usize).collect();
        let points = match self.pairing {
            Pairing::Product => ms.iter().flat_map(|&m| ns.iter().map(move |&n| (m, n))).collect(),
            Pairing::Zip => ms.into_iter().zip(ns).collect(),
        };
        Ok(Experiment {
            loss,
            k_x: self.k_x,
            k_y: self.k_y,
            points,
            marginal,
            conditional,
            joint,
            constraint,
        })
    }
}
