use crate::error::{Error, Result};
use crate::estimators::{estimate_into, EstimatorSpec};
use crate::losses::LossSpec;
use crate::numeric::{composition_count, Compositions, LogFactorials};
use crate::pmf::Pmf;

use super::RiskEstimate;

/// Largest number of count vectors [`exact_risk_univariate`] will enumerate.
pub const ENUMERATION_CAP: f64 = 1e7;

/// `Σ_t Mult(n; p)(t) · loss(p, q̂(t))` over every count vector with `Σ t = n`.
///
/// Multinomial probabilities are formed in log space. Outcomes that are
/// impossible under `p` (positive count on a zero-mass symbol) are skipped;
/// every possible outcome is evaluated, so an infinite loss on a
/// reachable outcome surfaces as an error.
pub fn exact_risk_univariate(
    spec: &EstimatorSpec,
    loss: &LossSpec,
    p: &Pmf,
    n: usize,
) -> Result<RiskEstimate> {
    let k = p.k();
    let size = composition_count(n, k);
    if size > ENUMERATION_CAP {
        return Err(Error::EnumerationTooLarge {
            size,
            cap: ENUMERATION_CAP,
        });
    }
    let lf = LogFactorials::new(n);
    let ln_p: Vec<f64> = p.weights().iter().map(|w| w.ln()).collect();
    let mut estimate = vec![0.0; k];

    let mut risk = Neumaier::default();
    let mut mass = Neumaier::default();
    for t in Compositions::new(n as u64, k) {
        let mut log_w = lf.ln_factorial(n);
        let mut possible = true;
        for (&c, &lp) in t.iter().zip(&ln_p) {
            if c == 0 {
                continue;
            }
            if lp == f64::NEG_INFINITY {
                possible = false;
                break;
            }
            log_w += c as f64 * lp - lf.ln_factorial(c as usize);
        }
        if !possible {
            continue;
        }
        estimate_into(spec, &t, &mut estimate)?;
        let w = log_w.exp();
        risk.add(w * loss.evaluate(p.weights(), &estimate)?);
        mass.add(w);
    }
    // dividing by the enumerated mass cancels the rounding in ln(n!)
    Ok(RiskEstimate::exact(risk.total() / mass.total()))
}

/// Neumaier-compensated running sum.
#[derive(Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, term: f64) {
        let s = self.sum + term;
        self.comp += if self.sum.abs() >= term.abs() {
            (self.sum - s) + term
        } else {
            (term - s) + self.sum
        };
        self.sum = s;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}
