use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Args;
use serde::Serialize;

use semisup::estimators::{joint_composition, EstimatorSpec};
use semisup::pmf::JointPmf;
use semisup::sample::SampleSet;

use crate::error::{CliError, CliResult};
use crate::output::{aligned, emit};
use crate::{parse_estimator, GlobalOpts};

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Sample file: CSV with header `x,y`; unlabeled rows leave y empty.
    pub input: PathBuf,
    /// Size of the x alphabet (inferred from the data when omitted).
    #[arg(long)]
    pub kx: Option<usize>,
    /// Size of the y alphabet (inferred from the data when omitted).
    #[arg(long)]
    pub ky: Option<usize>,
    /// Estimator for the x marginal.
    #[arg(long, default_value = "empirical")]
    pub marginal: String,
    /// Estimator applied to each conditional row.
    #[arg(long, default_value = "add_constant:1")]
    pub conditional: String,
    /// Estimate the marginal from unlabeled x's only.
    #[arg(long)]
    pub no_pool_x: bool,
}

/// Labeled pairs and unlabeled x's read from a sample file.
#[derive(Debug, Default)]
pub struct RawSamples {
    pub labeled: Vec<(usize, usize)>,
    pub unlabeled: Vec<usize>,
}

fn parse_symbol(field: &str, what: &str, line: u64) -> CliResult<usize> {
    field
        .trim()
        .parse()
        .map_err(|_| CliError::Data(format!("line {line}: {what} = '{field}' is not a non-negative integer")))
}

pub fn read_samples(path: &Path) -> CliResult<RawSamples> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
        .clone();
    if headers.is_empty() {
        return Ok(RawSamples::default());
    }
    if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "y" {
        return Err(CliError::Data(format!(
            "{}: line 1: expected header 'x,y', found '{}'",
            path.display(),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut samples = RawSamples::default();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let line = record.position().map_or(0, |p| p.line());
        match record.len() {
            1 => samples.unlabeled.push(parse_symbol(&record[0], "x", line)?),
            2 => {
                let x = parse_symbol(&record[0], "x", line)?;
                if record[1].is_empty() {
                    samples.unlabeled.push(x);
                } else {
                    samples.labeled.push((x, parse_symbol(&record[1], "y", line)?));
                }
            }
            n => {
                return Err(CliError::Data(format!(
                    "line {line}: expected 2 fields, found {n}"
                )))
            }
        }
    }
    Ok(samples)
}

/// Alphabet sizes from flags, or the largest symbol seen + 1 (at least 2).
fn alphabet_sizes(raw: &RawSamples, kx: Option<usize>, ky: Option<usize>) -> CliResult<(usize, usize)> {
    let empty = raw.labeled.is_empty() && raw.unlabeled.is_empty();
    let max_x = raw
        .labeled
        .iter()
        .map(|p| p.0)
        .chain(raw.unlabeled.iter().copied())
        .max();
    let max_y = raw.labeled.iter().map(|p| p.1).max();
    let k_x = match (kx, max_x) {
        (Some(k), _) => k,
        (None, Some(m)) => (m + 1).max(2),
        (None, None) if empty => {
            return Err(CliError::Usage(
                "the sample file has no rows: pass --kx and --ky explicitly".into(),
            ))
        }
        (None, None) => 2,
    };
    let k_y = match (ky, max_y) {
        (Some(k), _) => k,
        (None, Some(m)) => (m + 1).max(2),
        (None, None) => {
            return Err(CliError::Usage(
                "no labeled rows to infer the y alphabet from: pass --ky".into(),
            ))
        }
    };
    Ok((k_x, k_y))
}

#[derive(Debug, Serialize)]
struct EstimateOutput<'a> {
    k_x: usize,
    k_y: usize,
    m: usize,
    n: usize,
    marginal_estimator: String,
    conditional_estimator: String,
    pool_x: bool,
    marginal: Vec<f64>,
    conditional: Vec<Vec<f64>>,
    joint: &'a [f64],
}

pub fn joint_to_csv(joint: &JointPmf) -> String {
    let mut out = String::from("x,y,probability\n");
    for x in 0..joint.k_x() {
        for y in 0..joint.k_y() {
            out += &format!("{x},{y},{}\n", joint.get(x, y));
        }
    }
    out
}

pub fn run(args: &EstimateArgs, global: &GlobalOpts) -> CliResult<ExitCode> {
    let marginal: EstimatorSpec = parse_estimator(&args.marginal)?;
    let conditional: EstimatorSpec = parse_estimator(&args.conditional)?;
    let raw = read_samples(&args.input)?;
    let (k_x, k_y) = alphabet_sizes(&raw, args.kx, args.ky)?;
    let (m, n) = (raw.labeled.len(), raw.unlabeled.len());
    let samples = SampleSet::new(raw.labeled, raw.unlabeled, k_x, k_y)?;
    let pool_x = !args.no_pool_x;
    let joint = joint_composition(&marginal, &conditional, &samples, pool_x)?;
    let px = joint.marginal_x();
    let cond = joint.conditional();

    let body = if global.json {
        let out = EstimateOutput {
            k_x,
            k_y,
            m,
            n,
            marginal_estimator: marginal.to_string(),
            conditional_estimator: conditional.to_string(),
            pool_x,
            marginal: px.weights().to_vec(),
            conditional: cond.rows().iter().map(|r| r.weights().to_vec()).collect(),
            joint: joint.cells(),
        };
        serde_json::to_string_pretty(&out).expect("serializable") + "\n"
    } else {
        joint_to_csv(&joint)
    };

    let rows: Vec<Vec<String>> = (0..k_x)
        .map(|x| {
            let mut row = vec![x.to_string(), format!("{:.6}", px.weights()[x])];
            row.extend(cond.row(x).weights().iter().map(|w| format!("{w:.6}")));
            row
        })
        .collect();
    let mut header = vec!["x".to_string(), "q_X(x)".to_string()];
    header.extend((0..k_y).map(|y| format!("q(y={y}|x)")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let summary = format!(
        "m = {m} labeled, n = {n} unlabeled, marginal {marginal}, conditional {conditional}, pool_x {pool_x}\n{}",
        aligned(&header, &rows)
    );
    // keep stdout machine-readable when the estimate itself goes there
    if global.out.is_some() {
        print!("{summary}");
    } else {
        eprint!("{summary}");
    }
    emit(global.out.as_deref(), &body)?;
    Ok(ExitCode::SUCCESS)
}
