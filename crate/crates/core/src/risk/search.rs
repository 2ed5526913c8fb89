use rand::seq::SliceRandom;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{composition_count, Compositions};
use crate::pmf::SimplexConstraint;
use crate::sample::trial_rng;

use super::RiskEstimate;

/// Largest simplex grid [`worst_case_risk`] will evaluate.
const GRID_CAP: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchConfig {
    /// Grid entries are multiples of `1/grid_resolution` of the free mass.
    pub grid_resolution: usize,
    /// Sweeps of pairwise mass-transfer ascent after the grid pass.
    pub refine_iterations: usize,
    pub constraint: SimplexConstraint,
    /// Seeds the pair visiting order of the ascent.
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            grid_resolution: 20,
            refine_iterations: 20,
            constraint: SimplexConstraint::NONE,
            seed: 0,
        }
    }
}

/// Best point found by [`worst_case_risk`]; its value is a lower bound on the true maximum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstCase {
    pub argmax: Vec<f64>,
    pub risk: RiskEstimate,
    pub evaluations: usize,
    pub uniform_is_best: bool,
}

/// All points `δ + (1 − dim·δ)·c/resolution` with `c` a composition of `resolution`.
pub fn simplex_grid(dim: usize, resolution: usize, constraint: SimplexConstraint) -> Result<Vec<Vec<f64>>> {
    if resolution < 2 {
        return Err(Error::InvalidParameter(format!(
            "grid resolution {resolution} must be at least 2"
        )));
    }
    constraint.check_alphabet(dim)?;
    let size = composition_count(resolution, dim);
    if size > GRID_CAP {
        return Err(Error::EnumerationTooLarge {
            size,
            cap: GRID_CAP,
        });
    }
    let delta = constraint.delta();
    let free = 1.0 - dim as f64 * delta;
    Ok(Compositions::new(resolution as u64, dim)
        .map(|c| {
            c.iter()
                .map(|&ci| delta + free * ci as f64 / resolution as f64)
                .collect()
        })
        .collect())
}

/// Heuristic maximization of `risk_fn` over the (restricted) simplex of dimension `dim`.
///
/// A regular grid pass is followed by coordinate-pairwise mass-transfer
/// ascent from the best grid point; the step halves after a sweep with no
/// improvement. The uniform point is always evaluated and returned when it
/// is strictly better. For a joint `k_x × k_y` problem pass `dim = k_x·k_y`
/// and read the point row-major.
pub fn worst_case_risk<F>(risk_fn: F, dim: usize, cfg: &SearchConfig) -> Result<WorstCase>
where
    F: Fn(&[f64]) -> Result<RiskEstimate>,
{
    let grid = simplex_grid(dim, cfg.grid_resolution, cfg.constraint)?;
    let mut evaluations = 0usize;
    let mut eval = |p: &[f64]| {
        evaluations += 1;
        risk_fn(p)
    };

    let mut best_point = grid[0].clone();
    let mut best = eval(&best_point)?;
    for point in grid.iter().skip(1) {
        let r = eval(point)?;
        if r.mean > best.mean {
            best = r;
            best_point.clone_from(point);
        }
    }

    let delta = cfg.constraint.delta();
    let mut step = (1.0 - dim as f64 * delta) / cfg.grid_resolution as f64;
    let mut pairs: Vec<(usize, usize)> = (0..dim)
        .flat_map(|i| (0..dim).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let mut rng = trial_rng(cfg.seed, 0);
    for _ in 0..cfg.refine_iterations {
        pairs.shuffle(&mut rng);
        let mut improved = false;
        for &(to, from) in &pairs {
            let amount = step.min(best_point[from] - delta);
            if amount <= 0.0 {
                continue;
            }
            let mut candidate = best_point.clone();
            candidate[from] -= amount;
            candidate[to] += amount;
            let r = eval(&candidate)?;
            if r.mean > best.mean {
                best = r;
                best_point = candidate;
                improved = true;
            }
        }
        if !improved {
            step /= 2.0;
        }
    }

    let uniform = vec![1.0 / dim as f64; dim];
    let at_uniform = eval(&uniform)?;
    let uniform_is_best = at_uniform.mean > best.mean;
    if uniform_is_best {
        best = at_uniform;
        best_point = uniform;
    }
    Ok(WorstCase {
        argmax: best_point,
        risk: best,
        evaluations,
        uniform_is_best,
    })
}
