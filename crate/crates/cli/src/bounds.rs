use std::process::ExitCode;

use clap::Args;
use serde::Serialize;

use semisup::bounds::{
    bernstein_limit, bernstein_poly, build_risk_table_with, default_calibration_sizes, g_np, h_np,
    h_np_prediction, DEFAULT_CROSSOVER,
};
use semisup::estimators::EstimatorSpec;
use semisup::losses::LossSpec;
use semisup::risk::{calibrate_constant, CalibrationMethod};

use crate::error::{CliError, CliResult};
use crate::output::{aligned, emit};
use crate::{parse_estimator, GlobalOpts};

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// Number of unlabeled draws n.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Loss exponent p in [1, 2].
    #[arg(long, default_value_t = 1.5)]
    pub p: f64,
    /// Points x in [0, 1], comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.3, 0.5, 0.9])]
    pub x: Vec<f64>,
    /// Alphabet size of the risk table.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Estimator behind r_i (default: empirical for p < 2, minimax_l2 for p = 2).
    #[arg(long)]
    pub estimator: Option<String>,
    /// First index served by the asymptotic branch of the table.
    #[arg(long, default_value_t = DEFAULT_CROSSOVER)]
    pub crossover: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsRow {
    pub x: f64,
    pub h_np: f64,
    pub g_np: f64,
    pub gap_ratio: f64,
    pub prediction: f64,
    /// `n·(B_n(t^{3/4}, x) − x^{3/4})`.
    pub bernstein_scaled: f64,
    pub bernstein_limit: f64,
}

#[derive(Debug, Serialize)]
struct BoundsOutput<'a> {
    n: usize,
    p: f64,
    k: usize,
    estimator: String,
    constant: f64,
    warnings: &'a [String],
    rows: &'a [BoundsRow],
}

fn check_args(args: &BoundsArgs) -> CliResult<()> {
    let mut errors = Vec::new();
    if args.n == 0 {
        errors.push("--n must be at least 1".to_string());
    }
    if !(1.0..=2.0).contains(&args.p) {
        errors.push(format!("--p = {} must lie in [1, 2]", args.p));
    }
    if args.k < 2 {
        errors.push(format!("--k = {} must be at least 2", args.k));
    }
    if args.x.is_empty() {
        errors.push("--x needs at least one point".into());
    }
    for x in &args.x {
        if !(0.0..=1.0).contains(x) {
            errors.push(format!("--x entry {x} is outside [0, 1]"));
        }
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(CliError::Usage(errors.join("; ")))
    }
}

fn t34(t: f64) -> f64 {
    t.powf(0.75)
}

fn t34_second(t: f64) -> f64 {
    -0.1875 * t.powf(-1.25)
}

pub fn run(args: &BoundsArgs, global: &GlobalOpts) -> CliResult<ExitCode> {
    check_args(args)?;
    let estimator = match &args.estimator {
        Some(s) => parse_estimator(s)?,
        None if args.p < 2.0 => EstimatorSpec::Empirical,
        None => EstimatorSpec::MinimaxL2,
    };
    let loss = LossSpec::lp(args.p)?;
    let cal = calibrate_constant(
        &estimator,
        &loss,
        args.k,
        &default_calibration_sizes(args.k),
        CalibrationMethod::Exact,
    )?;
    let table = build_risk_table_with(&estimator, &loss, args.k, args.n, args.crossover, &cal.constant)?;
    let c = cal.constant.value;

    let fvals: Vec<f64> = (0..=args.n).map(|i| t34(i as f64 / args.n as f64)).collect();
    let mut rows = Vec::with_capacity(args.x.len());
    for &x in &args.x {
        let h = h_np(x, args.n, args.p, &table)?;
        let g = g_np(x, args.n, args.p, &table)?;
        let b = bernstein_poly(&fvals, x)?;
        rows.push(BoundsRow {
            x,
            h_np: h,
            g_np: g,
            gap_ratio: if h > 0.0 { (h - g).abs() / h } else { 0.0 },
            prediction: h_np_prediction(x, args.n, args.p, c),
            bernstein_scaled: args.n as f64 * (b - t34(x)),
            bernstein_limit: if x > 0.0 && x < 1.0 {
                bernstein_limit(x, t34_second(x))
            } else {
                0.0
            },
        });
    }

    let body = if global.json {
        serde_json::to_string_pretty(&BoundsOutput {
            n: args.n,
            p: args.p,
            k: args.k,
            estimator: estimator.to_string(),
            constant: c,
            warnings: table.warnings(),
            rows: &rows,
        })
        .map_err(|e| CliError::Data(e.to_string()))?
            + "\n"
    } else if global.csv {
        let mut out = String::from("h_np,g_np,gap_ratio,prediction\n");
        for r in &rows {
            out += &format!("{},{},{},{}\n", r.h_np, r.g_np, r.gap_ratio, r.prediction);
        }
        out
    } else {
        let cells: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    format!("{}", r.x),
                    format!("{:.6e}", r.h_np),
                    format!("{:.6e}", r.g_np),
                    format!("{:.4}", r.gap_ratio),
                    format!("{:.6e}", r.prediction),
                    format!("{:.5}", r.bernstein_scaled),
                    format!("{:.5}", r.bernstein_limit),
                ]
            })
            .collect();
        let mut out = format!(
            "n = {}, p = {}, k = {}, estimator {estimator}, C = {c:.6}\n",
            args.n, args.p, args.k
        );
        out += &aligned(
            &["x", "H", "G", "|H-G|/H", "C(x/n)^(p/2)", "n(B_n-f)", "limit"],
            &cells,
        );
        out += "Bernstein columns use f(t) = t^(3/4).\n";
        for w in table.warnings() {
            out += &format!("warning: {w}\n");
        }
        out
    };
    emit(global.out.as_deref(), &body)?;
    Ok(ExitCode::SUCCESS)
}
