use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{estimate_into, joint_composition, EstimatorSpec};
use crate::losses::LossSpec;
use crate::pmf::{JointPmf, Pmf, SimplexConstraint};
use crate::sample::{multinomial_counts, sample_joint_with, sample_marginal_with, trial_rng, SampleSet};

use super::RiskEstimate;

fn check_trials(trials: usize) -> Result<()> {
    if trials < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 trials, got {trials}"
        )));
    }
    Ok(())
}

/// Runs `trial(rng)` for each trial index on its own stream; ordered reduction.
fn run_trials<F>(trials: usize, seed: u64, trial: F) -> Result<RiskEstimate>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> Result<f64> + Sync,
{
    check_trials(trials)?;
    let losses = (0..trials as u64)
        .into_par_iter()
        .map(|t| trial(&mut trial_rng(seed, t)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(RiskEstimate::from_samples(&losses))
}

/// Monte Carlo estimate of `E loss(p, q̂(U^n))`.
pub fn mc_risk_univariate(
    spec: &EstimatorSpec,
    loss: &LossSpec,
    p: &Pmf,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<RiskEstimate> {
    let weights = p.weights();
    run_trials(trials, seed, |rng| {
        let counts = multinomial_counts(weights, n as u64, rng);
        let mut estimate = vec![0.0; weights.len()];
        estimate_into(spec, &counts, &mut estimate)?;
        loss.evaluate(weights, &estimate)
    })
}

/// How each simulated dataset is generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Draw the sufficient counts directly (multinomial via conditional binomials).
    #[default]
    Counts,
    /// Draw every sample by inverse CDF and count them.
    Samples,
}

/// Settings for [`mc_risk_semisupervised`].
#[derive(Debug, Clone)]
pub struct SemiSupervisedConfig {
    pub marginal: EstimatorSpec,
    pub conditional: EstimatorSpec,
    pub loss: LossSpec,
    /// Labeled sample size.
    pub m: usize,
    /// Unlabeled sample size.
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub pool_x: bool,
    /// Declared `Δ_δ` context; checked for f-divergence losses.
    pub constraint: Option<SimplexConstraint>,
    pub sampling: Sampling,
}

impl SemiSupervisedConfig {
    /// Same estimator for marginal and conditional, pooled x, count sampling.
    pub fn new(estimator: EstimatorSpec, loss: LossSpec, m: usize, n: usize) -> Self {
        Self {
            marginal: estimator,
            conditional: estimator,
            loss,
            m,
            n,
            trials: 10_000,
            seed: 0,
            pool_x: true,
            constraint: None,
            sampling: Sampling::Counts,
        }
    }

    pub fn trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

fn check_constraint(loss: &LossSpec, constraint: Option<SimplexConstraint>, p: &JointPmf) -> Result<()> {
    if let (true, Some(c)) = (loss.is_fdiv(), constraint) {
        c.check(p.cells())?;
    }
    Ok(())
}

/// Per-trial buffers for the count-level composition.
struct Scratch {
    x_counts: Vec<u64>,
    marginal: Vec<f64>,
    row: Vec<f64>,
    joint: Vec<f64>,
}

impl Scratch {
    fn new(k_x: usize, k_y: usize) -> Self {
        Self {
            x_counts: vec![0; k_x],
            marginal: vec![0.0; k_x],
            row: vec![0.0; k_y],
            joint: vec![0.0; k_x * k_y],
        }
    }
}

/// Joint composition from labeled cell counts and unlabeled x-counts, into `s.joint`.
fn compose_counts(
    cfg: &SemiSupervisedConfig,
    k_y: usize,
    labeled_cells: &[u64],
    unlabeled: &[u64],
    s: &mut Scratch,
) -> Result<()> {
    for (x, xc) in s.x_counts.iter_mut().enumerate() {
        *xc = unlabeled[x];
        if cfg.pool_x {
            *xc += labeled_cells[x * k_y..(x + 1) * k_y].iter().sum::<u64>();
        }
    }
    estimate_into(&cfg.marginal, &s.x_counts, &mut s.marginal)?;
    for (x, &qx) in s.marginal.iter().enumerate() {
        estimate_into(&cfg.conditional, &labeled_cells[x * k_y..(x + 1) * k_y], &mut s.row)?;
        for (cell, &qy) in s.joint[x * k_y..(x + 1) * k_y].iter_mut().zip(&s.row) {
            *cell = qx * qy;
        }
    }
    Ok(())
}

/// Monte Carlo estimate of `E loss(p_XY, q̂_XY(U^n, L^m))` for the joint composition.
///
/// Each trial draws `L^m` from `p` and `U^n` from its x-marginal, builds the
/// joint composition, and scores it against `p` (ℓᵖₚ, or `D_f(p ‖ q̂)`).
pub fn mc_risk_semisupervised(cfg: &SemiSupervisedConfig, p: &JointPmf) -> Result<RiskEstimate> {
    check_constraint(&cfg.loss, cfg.constraint, p)?;
    let (k_x, k_y) = (p.k_x(), p.k_y());
    let px = p.marginal_x();
    match cfg.sampling {
        Sampling::Counts => run_trials(cfg.trials, cfg.seed, |rng| {
            let labeled = multinomial_counts(p.cells(), cfg.m as u64, rng);
            let unlabeled = multinomial_counts(px.weights(), cfg.n as u64, rng);
            let mut s = Scratch::new(k_x, k_y);
            compose_counts(cfg, k_y, &labeled, &unlabeled, &mut s)?;
            cfg.loss.evaluate(p.cells(), &s.joint)
        }),
        Sampling::Samples => run_trials(cfg.trials, cfg.seed, |rng| {
            let labeled = sample_joint_with(p, cfg.m, rng);
            let unlabeled = sample_marginal_with(&px, cfg.n, rng);
            let set = SampleSet::new(labeled, unlabeled, k_x, k_y)?;
            let q = joint_composition(&cfg.marginal, &cfg.conditional, &set, cfg.pool_x)?;
            cfg.loss.evaluate(p.cells(), q.cells())
        }),
    }
}

/// Monte Carlo estimate of `E loss(p_XY, p_X · q̂_{Y|X}(L^m))`: the conditional
/// composition scored with the true marginal.
///
/// For f-divergences this is the conditional divergence
/// `Σ_x p_X(x) D_f(p_{Y|X=x} ‖ q̂_{Y|X=x})`.
pub fn mc_risk_conditional(
    spec: &EstimatorSpec,
    loss: &LossSpec,
    p: &JointPmf,
    m: usize,
    trials: usize,
    seed: u64,
) -> Result<RiskEstimate> {
    let k_y = p.k_y();
    let px = p.marginal_x();
    run_trials(trials, seed, |rng| {
        let labeled = multinomial_counts(p.cells(), m as u64, rng);
        let mut row = vec![0.0; k_y];
        let mut joint = vec![0.0; p.cells().len()];
        for (x, &w) in px.weights().iter().enumerate() {
            estimate_into(spec, &labeled[x * k_y..(x + 1) * k_y], &mut row)?;
            for (cell, &qy) in joint[x * k_y..(x + 1) * k_y].iter_mut().zip(&row) {
                *cell = w * qy;
            }
        }
        loss.evaluate(p.cells(), &joint)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::losses::{Builtin, FGenerator};
    use crate::risk::exact_risk_univariate;

    fn bernoulli(p: f64) -> Pmf {
        Pmf::new(vec![p, 1.0 - p]).unwrap()
    }

    #[test]
    fn agrees_with_exact_bernoulli() {
        let (spec, loss) = (EstimatorSpec::Empirical, LossSpec::Lp(2.0));
        let mc = mc_risk_univariate(&spec, &loss, &bernoulli(0.5), 2, 100_000, 1).unwrap();
        assert!((mc.mean - 0.25).abs() <= 4.0 * mc.std_error, "{mc:?}");
        let exact = exact_risk_univariate(&spec, &loss, &bernoulli(0.5), 2).unwrap();
        assert!((exact.mean - 0.25).abs() < 1e-15);
    }

    #[test]
    fn point_mass_gives_zero() {
        let mc = mc_risk_univariate(
            &EstimatorSpec::Empirical,
            &LossSpec::Lp(1.0),
            &Pmf::point_mass(2, 0).unwrap(),
            10,
            100,
            3,
        )
        .unwrap();
        assert_eq!((mc.mean, mc.std_error), (0.0, 0.0));
    }

    #[test]
    fn deterministic_in_seed() {
        let p = Pmf::new(vec![0.2, 0.8]).unwrap();
        let run = |seed| {
            mc_risk_univariate(&EstimatorSpec::MinimaxL2, &LossSpec::Lp(1.0), &p, 10, 500, seed)
                .unwrap()
        };
        assert_eq!(run(5).mean.to_bits(), run(5).mean.to_bits());
        assert_ne!(run(5).mean, run(6).mean);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let p = JointPmf::from_cells(2, 2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let cfg = SemiSupervisedConfig::new(
            EstimatorSpec::add_constant(1.0).unwrap(),
            LossSpec::FDiv(FGenerator::builtin(Builtin::Kl)),
            20,
            200,
        )
        .trials(2_000)
        .seed(17);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| mc_risk_semisupervised(&cfg, &p).unwrap())
        };
        let (a, b) = (run(1), run(4));
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }

    #[test]
    fn count_and_sample_modes_agree() {
        let p = JointPmf::from_cells(2, 3, vec![0.1, 0.15, 0.05, 0.3, 0.2, 0.2]).unwrap();
        let mut cfg = SemiSupervisedConfig::new(EstimatorSpec::MinimaxL2, LossSpec::Lp(1.0), 30, 120)
            .trials(20_000)
            .seed(2);
        let counts = mc_risk_semisupervised(&cfg, &p).unwrap();
        cfg.sampling = Sampling::Samples;
        let samples = mc_risk_semisupervised(&cfg, &p).unwrap();
        let se = counts.joint_std_error(&samples);
        assert!((counts.mean - samples.mean).abs() <= 4.0 * se, "{counts:?} {samples:?}");
    }

    #[test]
    fn empirical_conditional_with_no_labels_fails() {
        let p = JointPmf::uniform(2, 2).unwrap();
        let mut cfg = SemiSupervisedConfig::new(EstimatorSpec::Empirical, LossSpec::Lp(2.0), 0, 100);
        cfg.trials = 10;
        assert_eq!(mc_risk_semisupervised(&cfg, &p), Err(Error::EmptySampleNoPrior));
    }

    #[test]
    fn constraint_is_enforced_for_divergences() {
        let p = JointPmf::from_cells(2, 2, vec![0.005, 0.295, 0.3, 0.4]).unwrap();
        let mut cfg = SemiSupervisedConfig::new(
            EstimatorSpec::add_constant(1.0).unwrap(),
            LossSpec::FDiv(FGenerator::builtin(Builtin::Kl)),
            10,
            10,
        );
        cfg.trials = 10;
        cfg.constraint = Some(SimplexConstraint::new(0.01).unwrap());
        assert!(matches!(
            mc_risk_semisupervised(&cfg, &p),
            Err(Error::ConstraintViolated { .. })
        ));
        // the floor is irrelevant for lp losses
        cfg.loss = LossSpec::Lp(2.0);
        assert!(mc_risk_semisupervised(&cfg, &p).is_ok());
    }

    #[test]
    fn risk_vanishes_with_large_samples() {
        let p = JointPmf::from_cells(2, 2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        for loss in [
            LossSpec::Lp(2.0),
            LossSpec::FDiv(FGenerator::builtin(Builtin::Chi2)),
        ] {
            let cfg = SemiSupervisedConfig::new(
                EstimatorSpec::add_constant(1.0).unwrap(),
                loss,
                100_000,
                1_000_000,
            )
            .trials(200);
            let r = mc_risk_semisupervised(&cfg, &p).unwrap();
            assert!(r.mean < 1e-4, "{r:?}");
        }
    }

    #[test]
    fn too_few_trials() {
        let p = Pmf::uniform(2).unwrap();
        assert!(mc_risk_univariate(&EstimatorSpec::MinimaxL2, &LossSpec::Lp(2.0), &p, 3, 1, 0).is_err());
    }
}
