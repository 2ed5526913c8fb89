//! Probability mass functions over dense alphabets `0..k`.
//!
//! Every value that survives construction satisfies its invariants: entries
//! are finite and non-negative and sum to one within [`SUM_TOLERANCE`].
//! Raw input is accepted when its sum is within [`INPUT_TOLERANCE`] of one
//! and is rescaled if needed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `Σ w = 1` held by every constructed pmf.
pub const SUM_TOLERANCE: f64 = 1e-12;
/// Tolerance on `Σ w = 1` for accepting raw input without explicit normalization.
pub const INPUT_TOLERANCE: f64 = 1e-9;

fn check_weights(weights: &[f64]) -> Result<f64> {
    if weights.len() < 2 {
        return Err(Error::AlphabetTooSmall { k: weights.len() });
    }
    for (index, &value) in weights.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFiniteWeight { index, value });
        }
        if value < 0.0 {
            return Err(Error::NegativeWeight { index, value });
        }
    }
    Ok(weights.iter().sum())
}

/// A pmf over `0..k`, `k ≥ 2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pmf {
    weights: Vec<f64>,
}

impl Pmf {
    /// Accepts weights summing to one within `1e-9`; near-misses are rescaled.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let sum = check_weights(&weights)?;
        if (sum - 1.0).abs() > INPUT_TOLERANCE {
            return Err(Error::SumOutOfTolerance { sum });
        }
        Ok(Self::rescaled(weights, sum))
    }

    /// Normalizes arbitrary non-negative weights with positive total.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let sum = check_weights(&weights)?;
        if sum <= 0.0 {
            return Err(Error::SumOutOfTolerance { sum });
        }
        Ok(Self::rescaled(weights, sum))
    }

    fn rescaled(mut weights: Vec<f64>, sum: f64) -> Self {
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            weights.iter_mut().for_each(|w| *w /= sum);
        }
        Self { weights }
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::AlphabetTooSmall { k });
        }
        Ok(Self {
            weights: vec![1.0 / k as f64; k],
        })
    }

    /// Unit mass at `symbol`.
    pub fn point_mass(k: usize, symbol: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::AlphabetTooSmall { k });
        }
        if symbol >= k {
            return Err(Error::SymbolOutOfRange { symbol, k });
        }
        let mut weights = vec![0.0; k];
        weights[symbol] = 1.0;
        Ok(Self { weights })
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }

    pub fn min_entry(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl std::ops::Index<usize> for Pmf {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.weights[i]
    }
}

impl<'de> Deserialize<'de> for Pmf {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let weights = Vec::<f64>::deserialize(d)?;
        Pmf::new(weights).map_err(serde::de::Error::custom)
    }
}

/// Rows `p_{Y|X=x}` for `x ∈ 0..k_x`, each a pmf over `0..k_y`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalPmf {
    rows: Vec<Pmf>,
}

impl ConditionalPmf {
    pub fn new(rows: Vec<Pmf>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::AlphabetTooSmall { k: 0 });
        };
        let k_y = first.k();
        if let Some(bad) = rows.iter().find(|r| r.k() != k_y) {
            return Err(Error::DimensionMismatch {
                expected: k_y,
                found: bad.k(),
            });
        }
        Ok(Self { rows })
    }

    pub fn k_x(&self) -> usize {
        self.rows.len()
    }

    pub fn k_y(&self) -> usize {
        self.rows[0].k()
    }

    pub fn rows(&self) -> &[Pmf] {
        &self.rows
    }

    pub fn row(&self, x: usize) -> &Pmf {
        &self.rows[x]
    }
}

/// A joint pmf stored row-major as a `k_x × k_y` table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointPmf {
    k_x: usize,
    k_y: usize,
    cells: Vec<f64>,
}

impl JointPmf {
    /// Builds from a row-major table; both alphabet sizes must be at least 2.
    pub fn from_table(table: &[Vec<f64>]) -> Result<Self> {
        let k_x = table.len();
        let k_y = table.first().map_or(0, Vec::len);
        if let Some(bad) = table.iter().find(|r| r.len() != k_y) {
            return Err(Error::DimensionMismatch {
                expected: k_y,
                found: bad.len(),
            });
        }
        Self::from_cells(k_x, k_y, table.concat())
    }

    pub fn from_cells(k_x: usize, k_y: usize, cells: Vec<f64>) -> Result<Self> {
        if k_x < 2 {
            return Err(Error::AlphabetTooSmall { k: k_x });
        }
        if k_y < 2 {
            return Err(Error::AlphabetTooSmall { k: k_y });
        }
        if cells.len() != k_x * k_y {
            return Err(Error::DimensionMismatch {
                expected: k_x * k_y,
                found: cells.len(),
            });
        }
        let pmf = Pmf::new(cells)?;
        Ok(Self {
            k_x,
            k_y,
            cells: pmf.into_weights(),
        })
    }

    pub fn uniform(k_x: usize, k_y: usize) -> Result<Self> {
        let n = k_x * k_y;
        Self::from_cells(k_x, k_y, vec![1.0 / n as f64; n])
    }

    pub fn k_x(&self) -> usize {
        self.k_x
    }

    pub fn k_y(&self) -> usize {
        self.k_y
    }

    /// Row-major cell probabilities.
    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.cells[x * self.k_y + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.cells[x * self.k_y..(x + 1) * self.k_y]
    }

    pub fn table(&self) -> Vec<Vec<f64>> {
        self.cells.chunks(self.k_y).map(<[f64]>::to_vec).collect()
    }

    pub fn marginal_x(&self) -> Pmf {
        let w: Vec<f64> = self.cells.chunks(self.k_y).map(|r| r.iter().sum()).collect();
        Pmf::normalized(w).expect("marginal of a valid joint pmf")
    }

    /// `p_{Y|X}`; rows with zero marginal mass are set to uniform.
    pub fn conditional(&self) -> ConditionalPmf {
        let rows = self
            .cells
            .chunks(self.k_y)
            .map(|r| {
                let s: f64 = r.iter().sum();
                if s > 0.0 {
                    Pmf::normalized(r.to_vec()).expect("non-negative row")
                } else {
                    Pmf::uniform(self.k_y).expect("k_y >= 2")
                }
            })
            .collect();
        ConditionalPmf { rows }
    }

    pub fn min_entry(&self) -> f64 {
        self.cells.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// The joint as a flat pmf over `k_x·k_y` cells.
    pub fn as_pmf(&self) -> Pmf {
        Pmf {
            weights: self.cells.clone(),
        }
    }
}

/// `table[x][y] = marginal[x] · conditional[x][y]`.
pub fn joint_from_parts(marginal: &Pmf, conditional: &ConditionalPmf) -> Result<JointPmf> {
    if marginal.k() != conditional.k_x() {
        return Err(Error::DimensionMismatch {
            expected: marginal.k(),
            found: conditional.k_x(),
        });
    }
    let cells = marginal
        .weights()
        .iter()
        .zip(conditional.rows())
        .flat_map(|(&px, row)| row.weights().iter().map(move |&q| px * q))
        .collect();
    JointPmf::from_cells(marginal.k(), conditional.k_y(), cells)
}

/// The restricted simplex `{p : p(x) ≥ δ for all x}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimplexConstraint {
    delta: f64,
}

impl SimplexConstraint {
    pub const NONE: Self = Self { delta: 0.0 };

    pub fn new(delta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&delta) || !delta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "simplex floor {delta} must lie in [0, 1)"
            )));
        }
        Ok(Self { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Whether the floor is feasible for an alphabet of size `k` (`δ·k < 1`).
    pub fn check_alphabet(&self, k: usize) -> Result<()> {
        if self.delta * k as f64 >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "simplex floor {} infeasible for alphabet size {k}",
                self.delta
            )));
        }
        Ok(())
    }

    pub fn check(&self, weights: &[f64]) -> Result<()> {
        let min_entry = weights.iter().copied().fold(f64::INFINITY, f64::min);
        if min_entry < self.delta {
            return Err(Error::ConstraintViolated {
                min_entry,
                delta: self.delta,
            });
        }
        Ok(())
    }
}

impl Default for SimplexConstraint {
    fn default() -> Self {
        Self::NONE
    }
}
