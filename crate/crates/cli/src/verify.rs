use std::process::ExitCode;

use clap::Args;

use semisup::losses::FGenerator;
use semisup::verify::{run_suite, Report, Suite, VerifyOptions};

use crate::error::{CliError, CliResult};
use crate::output::{aligned, emit};
use crate::GlobalOpts;

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// lp, fdiv, bounds or all.
    pub suite: String,
    /// Labeled sample size of the composition checks (n = 50·m).
    #[arg(long)]
    pub m: Option<usize>,
    /// Restrict the fdiv suite to these generators (repeatable).
    #[arg(long = "generator")]
    pub generators: Vec<String>,
    /// Replace a generator's f'' by a constant, NAME=VALUE (fault injection).
    #[arg(long = "perturb-f-second", value_name = "NAME=VALUE")]
    pub perturb: Vec<String>,
}

fn generators(args: &VerifyArgs) -> CliResult<Vec<FGenerator>> {
    let mut gens = if args.generators.is_empty() {
        VerifyOptions::default().generators
    } else {
        args.generators
            .iter()
            .map(|n| FGenerator::by_name(n).map_err(|e| CliError::Usage(e.to_string())))
            .collect::<CliResult<_>>()?
    };
    for spec in &args.perturb {
        let (name, value) = spec
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--perturb-f-second expects NAME=VALUE, got '{spec}'")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("--perturb-f-second: '{value}' is not a number")))?;
        let name = name.trim().to_ascii_lowercase();
        let slot = gens
            .iter_mut()
            .find(|g| g.name() == name)
            .ok_or_else(|| CliError::Usage(format!("--perturb-f-second: generator '{name}' is not in the suite")))?;
        *slot = slot.clone().with_f_second(move |_| value);
    }
    Ok(gens)
}

fn render_table(report: &Report) -> String {
    let rows: Vec<Vec<String>> = report
        .checks
        .iter()
        .map(|c| {
            vec![
                if c.passed { "PASS" } else { "FAIL" }.to_string(),
                c.id.clone(),
                format!("{:.6}", c.measured),
                format!("{:.6}", c.target),
                format!("{}", c.tolerance),
                c.relation.to_string(),
            ]
        })
        .collect();
    let failed = report.failures().count();
    format!(
        "{}{} checks, {} failed\n",
        aligned(&["status", "check", "measured", "target", "tolerance", "relation"], &rows),
        report.checks.len(),
        failed
    )
}

fn render_csv(report: &Report) -> String {
    let mut out = String::from("id,name,measured,target,tolerance,relation,passed\n");
    for c in &report.checks {
        out += &format!(
            "{},\"{}\",{},{},{},{:?},{}\n",
            c.id, c.name, c.measured, c.target, c.tolerance, c.relation, c.passed
        );
    }
    out
}

pub fn run(args: &VerifyArgs, global: &GlobalOpts) -> CliResult<ExitCode> {
    let suite: Suite = args
        .suite
        .parse()
        .map_err(|e: semisup::Error| CliError::Usage(e.to_string()))?;
    let defaults = VerifyOptions::default();
    let opts = VerifyOptions {
        seed: global.seed.unwrap_or(defaults.seed),
        trials: global.trials.unwrap_or(defaults.trials),
        m: args.m.unwrap_or(defaults.m),
        generators: generators(args)?,
        delta: global.delta.unwrap_or(defaults.delta),
    };
    let report = run_suite(suite, &opts)?;
    let body = if global.json {
        serde_json::to_string_pretty(&report).map_err(|e| CliError::Data(e.to_string()))? + "\n"
    } else if global.csv {
        render_csv(&report)
    } else {
        render_table(&report)
    };
    emit(global.out.as_deref(), &body)?;
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
