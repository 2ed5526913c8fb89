//! Labeled/unlabeled sample containers, counting, and seeded generation.
//!
//! # Random generation
//!
//! All randomness comes from ChaCha8 ([`rand_chacha::ChaCha8Rng`]): a
//! counter-based stream cipher with a 64-bit stream id. The generator for
//! `(seed, stream)` is `ChaCha8Rng::seed_from_u64(seed)` followed by
//! `set_stream(stream)`; see [`trial_rng`]. Monte Carlo trial `t` always uses
//! stream `t`, so results do not depend on how trials are scheduled.
//!
//! Symbol draws use inverse-CDF sampling: one `f64` uniform in `[0, 1)` per
//! draw, mapped through the cumulative weights.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pmf::{JointPmf, Pmf};

/// The per-trial generator: ChaCha8 keyed by `seed`, positioned on stream `stream`.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Per-symbol counts `T_x`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountVector {
    counts: Vec<u64>,
    total: u64,
}

impl CountVector {
    pub fn new(counts: Vec<u64>) -> Self {
        let total = counts.iter().sum();
        Self { counts, total }
    }

    pub fn zeros(k: usize) -> Self {
        Self::new(vec![0; k])
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }

    /// Elementwise sum; the alphabets must agree.
    pub fn merged(&self, other: &CountVector) -> Result<CountVector> {
        if self.k() != other.k() {
            return Err(Error::DimensionMismatch {
                expected: self.k(),
                found: other.k(),
            });
        }
        Ok(CountVector::new(
            self.counts.iter().zip(&other.counts).map(|(a, b)| a + b).collect(),
        ))
    }
}

pub fn counts_from_samples(samples: &[usize], k: usize) -> Result<CountVector> {
    let mut counts = vec![0u64; k];
    for &s in samples {
        *counts
            .get_mut(s)
            .ok_or(Error::SymbolOutOfRange { symbol: s, k })? += 1;
    }
    Ok(CountVector::new(counts))
}

/// Labeled pairs `L^m` and unlabeled symbols `U^n` over alphabets `k_x`, `k_y`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSet {
    labeled: Vec<(usize, usize)>,
    unlabeled: Vec<usize>,
    k_x: usize,
    k_y: usize,
}

impl SampleSet {
    pub fn new(
        labeled: Vec<(usize, usize)>,
        unlabeled: Vec<usize>,
        k_x: usize,
        k_y: usize,
    ) -> Result<Self> {
        for k in [k_x, k_y] {
            if k < 2 {
                return Err(Error::AlphabetTooSmall { k });
            }
        }
        for &(x, y) in &labeled {
            if x >= k_x {
                return Err(Error::SymbolOutOfRange { symbol: x, k: k_x });
            }
            if y >= k_y {
                return Err(Error::SymbolOutOfRange { symbol: y, k: k_y });
            }
        }
        if let Some(&x) = unlabeled.iter().find(|&&x| x >= k_x) {
            return Err(Error::SymbolOutOfRange { symbol: x, k: k_x });
        }
        Ok(Self {
            labeled,
            unlabeled,
            k_x,
            k_y,
        })
    }

    pub fn labeled(&self) -> &[(usize, usize)] {
        &self.labeled
    }

    pub fn unlabeled(&self) -> &[usize] {
        &self.unlabeled
    }

    pub fn k_x(&self) -> usize {
        self.k_x
    }

    pub fn k_y(&self) -> usize {
        self.k_y
    }

    pub fn m(&self) -> usize {
        self.labeled.len()
    }

    pub fn n(&self) -> usize {
        self.unlabeled.len()
    }

    /// Counts of the unlabeled x-symbols.
    pub fn unlabeled_counts(&self) -> CountVector {
        counts_from_samples(&self.unlabeled, self.k_x).expect("validated symbols")
    }

    /// Counts of the x-coordinates of labeled pairs.
    pub fn labeled_x_counts(&self) -> CountVector {
        let xs: Vec<usize> = self.labeled.iter().map(|&(x, _)| x).collect();
        counts_from_samples(&xs, self.k_x).expect("validated symbols")
    }

    /// Per-x counts of the y-values in each labeled bucket.
    pub fn labeled_y_counts(&self) -> Vec<CountVector> {
        split_labeled_by_x(self)
            .iter()
            .map(|bucket| counts_from_samples(bucket, self.k_y).expect("validated symbols"))
            .collect()
    }
}

/// Bucket `x` holds the y-values of labeled pairs with first coordinate `x`, in input order.
pub fn split_labeled_by_x(s: &SampleSet) -> Vec<Vec<usize>> {
    let mut buckets = vec![Vec::new(); s.k_x];
    for &(x, y) in &s.labeled {
        buckets[x].push(y);
    }
    buckets
}

fn cumulative(weights: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    weights
        .iter()
        .map(|w| {
            acc += w;
            acc
        })
        .collect()
}

/// Inverse-CDF lookup; zero-mass symbols are never returned.
fn inverse_cdf(cdf: &[f64], u: f64) -> usize {
    let total = *cdf.last().expect("non-empty");
    let target = u * total;
    let i = cdf.partition_point(|&c| c <= target);
    // floating slack at the top end: fall back to the last symbol with mass
    if i >= cdf.len() {
        let mut j = cdf.len() - 1;
        while j > 0 && cdf[j] == cdf[j - 1] {
            j -= 1;
        }
        j
    } else {
        i
    }
}

pub fn sample_marginal_with<R: Rng + ?Sized>(p: &Pmf, n: usize, rng: &mut R) -> Vec<usize> {
    let cdf = cumulative(p.weights());
    (0..n).map(|_| inverse_cdf(&cdf, rng.random::<f64>())).collect()
}

/// `n` i.i.d. draws from `p` using stream 0 of `seed`.
pub fn sample_marginal(p: &Pmf, n: usize, seed: u64) -> Vec<usize> {
    sample_marginal_with(p, n, &mut trial_rng(seed, 0))
}

pub fn sample_joint_with<R: Rng + ?Sized>(
    p: &JointPmf,
    m: usize,
    rng: &mut R,
) -> Vec<(usize, usize)> {
    let cdf = cumulative(p.cells());
    let k_y = p.k_y();
    (0..m)
        .map(|_| {
            let cell = inverse_cdf(&cdf, rng.random::<f64>());
            (cell / k_y, cell % k_y)
        })
        .collect()
}

/// `m` i.i.d. labeled pairs from `p` (row-major cell order) using stream 0 of `seed`.
pub fn sample_joint(p: &JointPmf, m: usize, seed: u64) -> Vec<(usize, usize)> {
    sample_joint_with(p, m, &mut trial_rng(seed, 0))
}

/// Multinomial(n, weights) counts drawn as a chain of conditional binomials.
///
/// Distributionally identical to counting `n` inverse-CDF draws, at a cost
/// independent of `n`.
pub fn multinomial_counts<R: Rng + ?Sized>(weights: &[f64], n: u64, rng: &mut R) -> Vec<u64> {
    let mut counts = vec![0u64; weights.len()];
    let mut remaining_n = n;
    let mut remaining_mass: f64 = weights.iter().sum();
    let last_positive = weights.iter().rposition(|&w| w > 0.0);
    for (i, &w) in weights.iter().enumerate() {
        if remaining_n == 0 {
            break;
        }
        if Some(i) == last_positive {
            counts[i] = remaining_n;
            break;
        }
        if w <= 0.0 {
            continue;
        }
        let prob = (w / remaining_mass).clamp(0.0, 1.0);
        let draw = Binomial::new(remaining_n, prob)
            .expect("probability clamped to [0, 1]")
            .sample(rng);
        counts[i] = draw;
        remaining_n -= draw;
        remaining_mass -= w;
    }
    counts
}
