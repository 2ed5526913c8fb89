//! Packaged numerical checks grouped into suites.
//!
//! | Suite    | Checks                                                                 |
//! |----------|------------------------------------------------------------------------|
//! | `lp`     | C₂ calibration, ℓ²₂ and ℓ¹ composition ratios, risk non-increasing in n |
//! | `fdiv`   | per generator: validation, calibrated vs formula C_f, composition ratio |
//! | `bounds` | H^n_p limit, H/G gap, Bernstein limit, tail bounds, bar risk vs MC      |
//! | `all`    | the three above                                                        |
//!
//! Every check records what was measured, the target, the tolerance and
//! the relation used to compare them, so a report can be printed or
//! serialized without re-deriving anything.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::bounds::{
    bar_risk_lp, bernstein_limit, bernstein_poly, binomial_tail_bounds, build_risk_table,
    build_risk_table_with, g_np, h_np, predicted_risk, RiskConstant, DEFAULT_CROSSOVER,
};
use crate::error::{Error, Result};
use crate::estimators::EstimatorSpec;
use crate::losses::{validate_generator, default_validation_grid, Builtin, FGenerator, LossSpec};
use crate::numeric::{binomial_weights, LogFactorials};
use crate::pmf::{JointPmf, SimplexConstraint};
use crate::risk::{
    calibrate_constant, mc_risk_conditional, mc_risk_semisupervised, CalibrationMethod,
    SemiSupervisedConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Lp,
    Fdiv,
    Bounds,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lp" => Ok(Suite::Lp),
            "fdiv" => Ok(Suite::Fdiv),
            "bounds" => Ok(Suite::Bounds),
            "all" => Ok(Suite::All),
            other => Err(Error::InvalidParameter(format!(
                "unknown suite '{other}' (expected lp, fdiv, bounds or all)"
            ))),
        }
    }
}

/// How `measured` is compared with `target`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `|measured − target| ≤ tolerance`
    Within,
    /// `|measured/target − 1| ≤ tolerance`
    WithinRelative,
    /// `measured ≤ target + tolerance`
    AtMost,
    /// `measured ≥ target − tolerance`
    AtLeast,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Within => "|m-t|<=tol",
            Relation::WithinRelative => "|m/t-1|<=tol",
            Relation::AtMost => "m<=t+tol",
            Relation::AtLeast => "m>=t-tol",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub id: String,
    pub name: String,
    pub measured: f64,
    pub target: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub passed: bool,
}

impl Check {
    pub fn new(
        id: impl Into<String>,
        name: impl Into<String>,
        measured: f64,
        target: f64,
        tolerance: f64,
        relation: Relation,
    ) -> Self {
        let passed = match relation {
            Relation::Within => (measured - target).abs() <= tolerance,
            Relation::WithinRelative => (measured / target - 1.0).abs() <= tolerance,
            Relation::AtMost => measured <= target + tolerance,
            Relation::AtLeast => measured >= target - tolerance,
        };
        Self {
            id: id.into(),
            name: name.into(),
            measured,
            target,
            tolerance,
            relation,
            passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Monte Carlo trials per risk estimate.
    pub trials: usize,
    /// Labeled sample size of the composition checks (`n = 50·m`).
    pub m: usize,
    /// Generators exercised by the `fdiv` suite.
    pub generators: Vec<FGenerator>,
    pub delta: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 200_000,
            m: 800,
            generators: Builtin::ALL.iter().map(|&b| FGenerator::builtin(b)).collect(),
            delta: 0.01,
        }
    }
}

const CALIBRATION_SIZES: [usize; 3] = [100, 1_000, 10_000];
const UNLABELED_PER_LABELED: usize = 50;

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<Report> {
    let checks = match suite {
        Suite::Lp => lp_checks(opts)?,
        Suite::Fdiv => fdiv_checks(opts)?,
        Suite::Bounds => bounds_checks(opts)?,
        Suite::All => {
            let mut all = lp_checks(opts)?;
            all.extend(fdiv_checks(opts)?);
            all.extend(bounds_checks(opts)?);
            all
        }
    };
    Ok(Report { suite, checks })
}

fn calibrated(spec: EstimatorSpec, loss: &LossSpec, k: usize) -> Result<RiskConstant> {
    Ok(calibrate_constant(&spec, loss, k, &CALIBRATION_SIZES, CalibrationMethod::Exact)?.constant)
}

fn composition_ratio(
    spec: EstimatorSpec,
    loss: &LossSpec,
    constant: &RiskConstant,
    opts: &VerifyOptions,
) -> Result<f64> {
    let p = JointPmf::uniform(2, 2)?;
    let mut cfg = SemiSupervisedConfig::new(spec, loss.clone(), opts.m, UNLABELED_PER_LABELED * opts.m)
        .trials(opts.trials)
        .seed(opts.seed);
    if loss.is_fdiv() {
        cfg.constraint = Some(SimplexConstraint::new(opts.delta)?);
    }
    let risk = mc_risk_semisupervised(&cfg, &p)?;
    Ok(risk.mean / predicted_risk(loss, 2, 2, opts.m, constant)?)
}

fn lp_checks(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let l2 = LossSpec::Lp(2.0);
    let c2 = calibrated(EstimatorSpec::MinimaxL2, &l2, 2)?;
    checks.push(Check::new(
        "lp.c2_calibration",
        "C2 (minimax_l2, k=2, n=1e4) vs 1-1/k",
        c2.value,
        0.5,
        0.02,
        Relation::WithinRelative,
    ));
    checks.push(Check::new(
        "lp.l2_composition",
        format!("l2^2 minimax_l2 composition risk / prediction at m={}", opts.m),
        composition_ratio(EstimatorSpec::MinimaxL2, &l2, &c2, opts)?,
        1.0,
        0.10,
        Relation::Within,
    ));

    let l1 = LossSpec::Lp(1.0);
    let c1 = calibrated(EstimatorSpec::Empirical, &l1, 2)?;
    checks.push(Check::new(
        "lp.l1_composition",
        format!("l1 empirical composition risk / prediction at m={}", opts.m),
        composition_ratio(EstimatorSpec::Empirical, &l1, &c1, opts)?,
        1.0,
        0.15,
        Relation::Within,
    ));

    let p = JointPmf::uniform(2, 2)?;
    let at = |n: usize| {
        let cfg = SemiSupervisedConfig::new(EstimatorSpec::MinimaxL2, l2.clone(), 200, n)
            .trials(opts.trials)
            .seed(opts.seed);
        mc_risk_semisupervised(&cfg, &p)
    };
    let (small, large) = (at(100)?, at(10_000)?);
    checks.push(Check::new(
        "lp.unlabeled_helps",
        "risk(m=200, n=1e4) - risk(m=200, n=1e2), tolerance 4 joint SE",
        large.mean - small.mean,
        0.0,
        4.0 * large.joint_std_error(&small),
        Relation::AtMost,
    ));
    Ok(checks)
}

fn fdiv_checks(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let grid = default_validation_grid();
    for g in &opts.generators {
        let name = g.name().to_string();
        let report = validate_generator(g, &grid);
        let failed = report.conditions.iter().filter(|c| !c.passed).count();
        checks.push(Check::new(
            format!("fdiv.{name}.validation"),
            format!("{name}: failed generator conditions"),
            failed as f64,
            0.0,
            0.0,
            Relation::AtMost,
        ));

        let loss = LossSpec::FDiv(g.clone());
        let formula = RiskConstant::f_divergence(g, 2)?;
        let cal = calibrated(EstimatorSpec::AddConstant { beta: 1.0 }, &loss, 2)?;
        checks.push(Check::new(
            format!("fdiv.{name}.c_f"),
            format!("{name}: calibrated add-one constant (k=2, n=1e4) vs f''(1)(k-1)/2"),
            cal.value,
            formula.value,
            0.02,
            Relation::WithinRelative,
        ));
        checks.push(Check::new(
            format!("fdiv.{name}.composition"),
            format!("{name}: add-one composition risk / (k_x C_f / m) at m={}", opts.m),
            composition_ratio(EstimatorSpec::AddConstant { beta: 1.0 }, &loss, &formula, opts)?,
            1.0,
            0.15,
            Relation::Within,
        ));
    }
    Ok(checks)
}

fn bounds_checks(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let n = 4000;
    for (spec, p) in [
        (EstimatorSpec::Empirical, 1.0),
        (EstimatorSpec::Empirical, 1.5),
        (EstimatorSpec::MinimaxL2, 2.0),
    ] {
        let loss = LossSpec::Lp(p);
        let c = calibrated(spec, &loss, 2)?;
        let table = build_risk_table_with(&spec, &loss, 2, n, DEFAULT_CROSSOVER, &c)?;
        for x in [0.1, 0.3, 0.5, 0.9] {
            let h = h_np(x, n, p, &table)?;
            checks.push(Check::new(
                format!("bounds.h_limit.p{p}.x{x}"),
                format!("H^n_p(x) n^(p/2) / (C_p x^(p/2)), n={n}, p={p}, x={x}"),
                h * (n as f64).powf(p / 2.0) / (c.value * x.powf(p / 2.0)),
                1.0,
                0.05,
                Relation::Within,
            ));
        }
    }

    let p = 1.5;
    let table = build_risk_table(&EstimatorSpec::Empirical, &LossSpec::Lp(p), 2, 4000, DEFAULT_CROSSOVER)?;
    let sizes = [500usize, 1000, 2000, 4000];
    let mut pts = Vec::new();
    let mut worst_scaled = 0.0f64;
    for &n in &sizes {
        let h = h_np(0.3, n, p, &table)?;
        let g = g_np(0.3, n, p, &table)?;
        let gap = (h - g).abs() / h;
        worst_scaled = worst_scaled.max(gap * (n as f64).ln().sqrt());
        pts.push(((1.0 / (n as f64).ln().sqrt()).ln(), gap.ln()));
    }
    checks.push(Check::new(
        "bounds.hg_gap_bounded",
        "max |H-G|/H * sqrt(ln n) over n in {500..4000}, x=0.3, p=1.5",
        worst_scaled,
        5.0,
        0.0,
        Relation::AtMost,
    ));
    checks.push(Check::new(
        "bounds.hg_gap_exponent",
        "fitted exponent of |H-G|/H against 1/sqrt(ln n)",
        ls_slope(&pts),
        0.0,
        0.0,
        Relation::AtLeast,
    ));

    let (bn, x) = (1600usize, 0.3);
    let f = |t: f64| t.powf(0.75);
    let fvals: Vec<f64> = (0..=bn).map(|i| f(i as f64 / bn as f64)).collect();
    checks.push(Check::new(
        "bounds.bernstein_limit",
        "n (B_n(f,x) - f(x)) vs x(1-x) f''(x)/2, f=t^(3/4), x=0.3, n=1600",
        bn as f64 * (bernstein_poly(&fvals, x)? - f(x)),
        bernstein_limit(x, -3.0 / 16.0 * x.powf(-1.25)),
        0.05,
        Relation::WithinRelative,
    ));

    let lf = LogFactorials::new(100);
    let w = binomial_weights(100, 0.1, &lf);
    for lambda in [2.0, 4.0, 6.0] {
        let b = binomial_tail_bounds(10.0, lambda)?;
        let below: f64 = (0..=100).filter(|&i| i as f64 <= 10.0 - lambda).map(|i| w[i]).sum();
        let above: f64 = (0..=100).filter(|&i| i as f64 >= 10.0 + lambda).map(|i| w[i]).sum();
        checks.push(Check::new(
            format!("bounds.tail_lower.l{lambda}"),
            format!("P(X <= 10-{lambda}) vs bound, X~Bin(100,0.1)"),
            below,
            b.lower,
            0.0,
            Relation::AtMost,
        ));
        checks.push(Check::new(
            format!("bounds.tail_upper.l{lambda}"),
            format!("P(X >= 10+{lambda}) vs bound, X~Bin(100,0.1)"),
            above,
            b.upper,
            0.0,
            Relation::AtMost,
        ));
    }

    let m = 50;
    let l2 = LossSpec::Lp(2.0);
    let table = build_risk_table(&EstimatorSpec::MinimaxL2, &l2, 2, m, m + 1)?;
    let bar = bar_risk_lp(m, 2.0, &table, 2)?;
    let mc = mc_risk_conditional(
        &EstimatorSpec::MinimaxL2,
        &l2,
        &JointPmf::uniform(2, 2)?,
        m,
        opts.trials,
        opts.seed,
    )?;
    checks.push(Check::new(
        "bounds.bar_risk_vs_mc",
        "MC conditional-composition risk vs bar_risk_lp (m=50, p=2, k_x=2), tolerance 4 SE",
        mc.mean,
        bar.uniform,
        4.0 * mc.std_error,
        Relation::Within,
    ));
    Ok(checks)
}

/// Least-squares slope of `y` on `x`.
fn ls_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}
