use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Args;
use serde::Serialize;

use semisup::bounds::{default_calibration_sizes, predicted_risk, RiskConstant};
use semisup::losses::LossSpec;
use semisup::pmf::JointPmf;
use semisup::risk::{
    calibrate_constant, mc_risk_semisupervised, worst_case_risk, CalibrationMethod, SearchConfig,
    SemiSupervisedConfig,
};

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{CliError, CliResult};
use crate::output::emit;
use crate::GlobalOpts;

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// TOML experiment config.
    pub config: PathBuf,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub m: usize,
    pub n: usize,
    pub loss: String,
    pub risk_mc: f64,
    pub risk_se: f64,
    pub risk_theory: f64,
    pub ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_case_argmax: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_case_risk: Option<f64>,
}

#[derive(Debug, Serialize)]
struct SweepResult<'a> {
    config: &'a ExperimentConfig,
    version: &'static str,
    wall_time_seconds: f64,
    constant: &'a RiskConstant,
    records: &'a [SweepRecord],
}

/// The univariate constant of the conditional estimator on the y alphabet.
fn theory_constant(exp: &Experiment) -> CliResult<RiskConstant> {
    Ok(match &exp.loss {
        LossSpec::Lp(_) => {
            calibrate_constant(
                &exp.conditional,
                &exp.loss,
                exp.k_y,
                &default_calibration_sizes(exp.k_y),
                CalibrationMethod::Exact,
            )?
            .constant
        }
        LossSpec::FDiv(g) => RiskConstant::f_divergence(g, exp.k_y)?,
    })
}

fn semisup_config(exp: &Experiment, cfg: &ExperimentConfig, m: usize, n: usize) -> SemiSupervisedConfig {
    let mut sc = SemiSupervisedConfig::new(exp.conditional, exp.loss.clone(), m, n)
        .trials(cfg.trials)
        .seed(cfg.seed);
    sc.marginal = exp.marginal;
    sc.pool_x = cfg.pool_x;
    if exp.loss.is_fdiv() {
        sc.constraint = Some(exp.constraint);
    }
    sc
}

pub fn run_experiment(cfg: &ExperimentConfig) -> CliResult<(Vec<SweepRecord>, RiskConstant)> {
    let exp = cfg.validate()?;
    let constant = theory_constant(&exp)?;
    let mut records = Vec::with_capacity(exp.points.len());
    for &(m, n) in &exp.points {
        let sc = semisup_config(&exp, cfg, m, n);
        let mc = mc_risk_semisupervised(&sc, &exp.joint)?;
        let theory = predicted_risk(&exp.loss, exp.k_x, exp.k_y, m, &constant)?;
        let ratio = if theory > 0.0 { mc.mean / theory } else { f64::NAN };
        let (mut argmax, mut worst) = (None, None);
        if cfg.worst_case {
            let search = SearchConfig {
                grid_resolution: cfg.search_resolution,
                refine_iterations: cfg.search_iterations,
                constraint: if exp.loss.is_fdiv() {
                    exp.constraint
                } else {
                    Default::default()
                },
                seed: cfg.seed,
            };
            let wc = worst_case_risk(
                |cells| {
                    let p = JointPmf::from_cells(exp.k_x, exp.k_y, cells.to_vec())?;
                    mc_risk_semisupervised(&sc, &p)
                },
                exp.k_x * exp.k_y,
                &search,
            )?;
            argmax = Some(wc.argmax);
            worst = Some(wc.risk.mean);
        }
        records.push(SweepRecord {
            m,
            n,
            loss: exp.loss.label(),
            risk_mc: mc.mean,
            risk_se: mc.std_error,
            risk_theory: theory,
            ratio,
            worst_case_argmax: argmax,
            worst_case_risk: worst,
        });
    }
    Ok((records, constant))
}

pub fn records_to_csv(records: &[SweepRecord]) -> String {
    let mut out = String::from("m,n,loss,risk_mc,risk_se,risk_theory,ratio\n");
    for r in records {
        out += &format!(
            "{},{},{},{},{},{},{}\n",
            r.m, r.n, r.loss, r.risk_mc, r.risk_se, r.risk_theory, r.ratio
        );
    }
    out
}

pub fn run(args: &SweepArgs, global: &GlobalOpts) -> CliResult<ExitCode> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(s) = global.seed {
        cfg.seed = s;
    }
    if let Some(t) = global.trials {
        cfg.trials = t;
    }
    if let Some(d) = global.delta {
        cfg.delta = d;
    }
    let start = Instant::now();
    let (records, constant) = run_experiment(&cfg)?;
    let csv = records_to_csv(&records);
    let json = serde_json::to_string_pretty(&SweepResult {
        config: &cfg,
        version: env!("CARGO_PKG_VERSION"),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        constant: &constant,
        records: &records,
    })
    .map_err(|e| CliError::Data(e.to_string()))?
        + "\n";
    if let Some(p) = &cfg.csv_out {
        std::fs::write(p, &csv).map_err(|e| CliError::io(p, e))?;
    }
    if let Some(p) = &cfg.json_out {
        std::fs::write(p, &json).map_err(|e| CliError::io(p, e))?;
    }
    emit(global.out.as_deref(), if global.json { &json } else { &csv })?;
    Ok(ExitCode::SUCCESS)
}
