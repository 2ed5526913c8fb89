//! Closed-form risk quantities built on a table of univariate risks `r_i`.
//!
//! | Quantity                | Definition                                              |
//! |-------------------------|---------------------------------------------------------|
//! | [`h_np`]                | `Σ_i C(n,i) r_i x^{i+p} (1−x)^{n−i}`                    |
//! | [`g_np`]                | `Σ_i C(n,i) r_i x^i (i/n)^p (1−x)^{n−i}`                |
//! | [`bar_risk_lp`]         | `Σ_x H^m_p(p_x)` at uniform `p_X`                       |
//! | [`bar_risk_f`]          | `Σ_x p_x Σ_i C(m,i) p_x^i (1−p_x)^{m−i} r_i` at uniform |
//! | [`bernstein_poly`]      | `Σ_i C(n,i) f(i/n) x^i (1−x)^{n−i}`                     |
//! | [`predicted_risk`], ℓᵖₚ | `k_x^{1−p/2} · C · m^{−p/2}`                            |
//! | [`predicted_risk`], f   | `k_x · C / m`                                           |
//!
//! Every binomially weighted sum is formed term by term in log space and
//! reduced with [`pairwise_sum`].
//!
//! A table entry `r_0` is the risk of an estimator that has seen no data.
//! By convention it outputs the uniform distribution and is scored at a
//! corner of the simplex, which is where a convex loss of the uniform
//! estimate is largest. For ℓ²₂ with `k = 2` this gives 0.5; for KL it is `ln k`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::EstimatorSpec;
use crate::losses::{FGenerator, LossKind, LossSpec};
use crate::numeric::{binomial_weights, composition_count, pairwise_sum, Compositions, LogFactorials};
use crate::pmf::Pmf;
use crate::risk::{calibrate_constant, exact_risk_univariate, CalibrationMethod};

/// Default first index served by the asymptotic branch of a hybrid table.
pub const DEFAULT_CROSSOVER: usize = 41;

/// Relative mismatch at the crossover above which a table carries a warning.
pub const CONTINUITY_TOLERANCE: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// `C_f = f″(1)(k−1)/2`.
    Formula,
    Calibrated,
}

/// First-order constant `C` in `r_n ≈ C·n^{-e}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskConstant {
    pub value: f64,
    pub loss_kind: LossKind,
    pub k: usize,
    pub provenance: Provenance,
}

impl RiskConstant {
    pub fn new(value: f64, loss_kind: LossKind, k: usize, provenance: Provenance) -> Result<Self> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "risk constant must be positive and finite, got {value}"
            )));
        }
        Ok(Self {
            value,
            loss_kind,
            k,
            provenance,
        })
    }

    /// `C_f = f″(1)(k−1)/2`.
    pub fn f_divergence(g: &FGenerator, k: usize) -> Result<Self> {
        Self::new(
            g.curvature_constant(k),
            LossKind::Fdiv {
                generator: g.name().to_string(),
            },
            k,
            Provenance::Formula,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TableSource {
    Exact,
    CalibratedAsymptotic,
    /// Exact below `crossover`, `C·i^{-e}` at and above.
    Hybrid { crossover: usize },
}

/// Univariate risks `r_0, …, r_{n_max}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskTable {
    values: Vec<f64>,
    loss_kind: LossKind,
    source: TableSource,
    warnings: Vec<String>,
}

impl RiskTable {
    pub fn new(values: Vec<f64>, loss_kind: LossKind, source: TableSource) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::TableTooShort { len: 0, needed: 1 });
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::InvalidParameter(format!(
                "risk table entry r_{i} = {v} is not a finite non-negative number"
            )));
        }
        Ok(Self {
            values,
            loss_kind,
            source,
            warnings: Vec::new(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n_max(&self) -> usize {
        self.values.len() - 1
    }

    pub fn loss_kind(&self) -> &LossKind {
        &self.loss_kind
    }

    pub fn source(&self) -> TableSource {
        self.source
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    fn covers(&self, n: usize) -> Result<()> {
        if self.values.len() <= n {
            return Err(Error::TableTooShort {
                len: self.values.len(),
                needed: n + 1,
            });
        }
        Ok(())
    }
}

/// Risk of the uniform estimate at a point mass.
pub fn zero_sample_risk(loss: &LossSpec, k: usize) -> Result<f64> {
    let corner = Pmf::point_mass(k, 0)?;
    let uniform = Pmf::uniform(k)?;
    loss.evaluate(corner.weights(), uniform.weights())
}

/// Sample sizes used when a table calibrates its own constant: the largest
/// `n ≤ 10⁴` whose enumeration stays under 2·10⁶ outcomes, and its quarter and half.
pub fn default_calibration_sizes(k: usize) -> Vec<usize> {
    let mut top = 10_000usize;
    while top > 8 && composition_count(top, k) > 2e6 {
        top = top * 9 / 10;
    }
    vec![top / 4, top / 2, top]
}

/// Builds `r_0..=r_{n_max}` at the uniform distribution, calibrating the
/// asymptotic constant with [`default_calibration_sizes`] when needed.
///
/// `crossover > n_max` yields a fully exact table.
pub fn build_risk_table(
    spec: &EstimatorSpec,
    loss: &LossSpec,
    k: usize,
    n_max: usize,
    crossover: usize,
) -> Result<RiskTable> {
    if crossover > n_max {
        return build_table(spec, loss, k, n_max, crossover, None);
    }
    let cal = calibrate_constant(
        spec,
        loss,
        k,
        &default_calibration_sizes(k),
        CalibrationMethod::Exact,
    )?;
    build_table(spec, loss, k, n_max, crossover, Some(&cal.constant))
}

/// As [`build_risk_table`] with a supplied constant for the asymptotic branch.
pub fn build_risk_table_with(
    spec: &EstimatorSpec,
    loss: &LossSpec,
    k: usize,
    n_max: usize,
    crossover: usize,
    constant: &RiskConstant,
) -> Result<RiskTable> {
    if constant.k != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: constant.k,
        });
    }
    build_table(spec, loss, k, n_max, crossover, Some(constant))
}

fn build_table(
    spec: &EstimatorSpec,
    loss: &LossSpec,
    k: usize,
    n_max: usize,
    crossover: usize,
    constant: Option<&RiskConstant>,
) -> Result<RiskTable> {
    let uniform = Pmf::uniform(k)?;
    let exponent = loss.rate_exponent();
    let exact_end = crossover.min(n_max + 1);
    let mut values = Vec::with_capacity(n_max + 1);
    values.push(zero_sample_risk(loss, k)?);
    for i in 1..exact_end {
        values.push(exact_risk_univariate(spec, loss, &uniform, i)?.mean);
    }
    for i in exact_end.max(1)..=n_max {
        let c = constant.expect("asymptotic branch needs a constant").value;
        values.push(c * (i as f64).powf(-exponent));
    }
    let source = if crossover > n_max {
        TableSource::Exact
    } else if crossover <= 1 {
        TableSource::CalibratedAsymptotic
    } else {
        TableSource::Hybrid { crossover }
    };
    let mut table = RiskTable::new(values, LossKind::from(loss), source)?;
    if let (TableSource::Hybrid { crossover }, Some(c)) = (source, constant) {
        let last_exact = table.values[crossover - 1];
        let asymptotic = c.value * ((crossover - 1) as f64).powf(-exponent);
        let rel = (last_exact - asymptotic).abs() / asymptotic;
        if rel > CONTINUITY_TOLERANCE {
            table.warnings.push(format!(
                "exact r_{} = {last_exact:.6e} differs from C·i^-e = {asymptotic:.6e} by {:.1}%",
                crossover - 1,
                100.0 * rel
            ));
        }
    }
    Ok(table)
}

fn check_unit(x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidParameter(format!("x = {x} outside [0, 1]")));
    }
    Ok(())
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidParameter(format!("exponent p = {p} must be ≥ 1")));
    }
    Ok(())
}

/// `H^n_p(x)`.
pub fn h_np(x: f64, n: usize, p: f64, table: &RiskTable) -> Result<f64> {
    check_unit(x)?;
    check_exponent(p)?;
    table.covers(n)?;
    let lf = LogFactorials::new(n);
    Ok(h_with(x, n, p, table.values(), &lf))
}

fn h_with(x: f64, n: usize, p: f64, r: &[f64], lf: &LogFactorials) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let xp = x.powf(p);
    let terms: Vec<f64> = binomial_weights(n, x, lf)
        .iter()
        .zip(r)
        .map(|(w, ri)| w * xp * ri)
        .collect();
    pairwise_sum(&terms)
}

/// `G^n_p(x)`; requires `n ≥ 1`.
pub fn g_np(x: f64, n: usize, p: f64, table: &RiskTable) -> Result<f64> {
    check_unit(x)?;
    check_exponent(p)?;
    if n == 0 {
        return Err(Error::InvalidParameter("G^n_p needs n ≥ 1".into()));
    }
    table.covers(n)?;
    let lf = LogFactorials::new(n);
    let terms: Vec<f64> = binomial_weights(n, x, &lf)
        .iter()
        .zip(table.values())
        .enumerate()
        .map(|(i, (w, ri))| {
            if i == 0 {
                0.0
            } else {
                w * (i as f64 / n as f64).powf(p) * ri
            }
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

/// `C·(x/n)^{p/2}`, the first-order value of `H^n_p(x)`.
pub fn h_np_prediction(x: f64, n: usize, p: f64, constant: f64) -> f64 {
    constant * (x / n as f64).powf(p / 2.0)
}

/// A bar risk at uniform `p_X` together with the best value seen on a grid over `p_X`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BarRisk {
    pub uniform: f64,
    pub grid_max: f64,
    pub grid_argmax: Vec<f64>,
}

/// Grid over `p_X` used for the cross-check: resolution 100 (coarsened
/// until the grid has at most 10⁶ points).
fn cross_check<F: Fn(f64) -> f64>(k_x: usize, per_cell: F) -> (f64, Vec<f64>) {
    let mut res = 100usize;
    while res > 2 && composition_count(res, k_x) > 1e6 {
        res /= 2;
    }
    let lookup: Vec<f64> = (0..=res).map(|j| per_cell(j as f64 / res as f64)).collect();
    let mut best = f64::NEG_INFINITY;
    let mut argmax = Vec::new();
    for c in Compositions::new(res as u64, k_x) {
        let v: f64 = c.iter().map(|&j| lookup[j as usize]).sum();
        if v > best {
            best = v;
            argmax = c.iter().map(|&j| j as f64 / res as f64).collect();
        }
    }
    (best, argmax)
}

fn check_kx(k_x: usize) -> Result<()> {
    if k_x == 0 {
        return Err(Error::AlphabetTooSmall { k: 0 });
    }
    Ok(())
}

/// `k_x · H^m_p(1/k_x)`, with a grid maximum over `p_X` of `Σ_x H^m_p(p_x)`.
pub fn bar_risk_lp(m: usize, p: f64, table: &RiskTable, k_x: usize) -> Result<BarRisk> {
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("exponent p = {p} outside [1, 2]")));
    }
    if !matches!(table.loss_kind(), LossKind::Lp { p: tp } if *tp == p) {
        return Err(Error::InvalidParameter(format!(
            "bar_risk_lp with p = {p} needs an ℓ^{p} risk table"
        )));
    }
    check_kx(k_x)?;
    table.covers(m)?;
    let lf = LogFactorials::new(m);
    let r = table.values();
    let h = |x: f64| h_with(x, m, p, r, &lf);
    let uniform = k_x as f64 * h(1.0 / k_x as f64);
    let (grid_max, grid_argmax) = if k_x == 1 {
        (uniform, vec![1.0])
    } else {
        cross_check(k_x, h)
    };
    Ok(BarRisk {
        uniform,
        grid_max,
        grid_argmax,
    })
}

/// `Σ_i Bin(m, 1/k_x)(i)·r_i`, with a grid maximum over `p_X`.
pub fn bar_risk_f(m: usize, table: &RiskTable, k_x: usize) -> Result<BarRisk> {
    if !matches!(table.loss_kind(), LossKind::Fdiv { .. }) {
        return Err(Error::InvalidParameter(
            "bar_risk_f needs an f-divergence risk table".into(),
        ));
    }
    check_kx(k_x)?;
    table.covers(m)?;
    let lf = LogFactorials::new(m);
    let r = &table.values()[..=m];
    let cell = |x: f64| {
        let terms: Vec<f64> = binomial_weights(m, x, &lf)
            .iter()
            .zip(r)
            .map(|(w, ri)| w * ri)
            .collect();
        x * pairwise_sum(&terms)
    };
    let uniform = k_x as f64 * cell(1.0 / k_x as f64);
    let (grid_max, grid_argmax) = if k_x == 1 {
        (uniform, vec![1.0])
    } else {
        cross_check(k_x, cell)
    };
    Ok(BarRisk {
        uniform,
        grid_max,
        grid_argmax,
    })
}

/// `B_n(f, x)` from `f(i/n)`, `i = 0..=n`.
pub fn bernstein_poly(fvals: &[f64], x: f64) -> Result<f64> {
    check_unit(x)?;
    if fvals.len() < 2 {
        return Err(Error::InvalidParameter(
            "Bernstein polynomial needs n ≥ 1 (at least two values)".into(),
        ));
    }
    let n = fvals.len() - 1;
    let lf = LogFactorials::new(n);
    let terms: Vec<f64> = binomial_weights(n, x, &lf)
        .iter()
        .zip(fvals)
        .map(|(w, f)| if *w == 0.0 { 0.0 } else { w * f })
        .collect();
    Ok(pairwise_sum(&terms))
}

/// Limit of `n·(B_n(f,x) − f(x))`: `x(1−x)f″(x)/2`.
pub fn bernstein_limit(x: f64, f_second_at_x: f64) -> f64 {
    x * (1.0 - x) * f_second_at_x / 2.0
}

/// Chung-type binomial tail bounds for a sum of independent Bernoullis with mean `E`:
///
/// * `lower`: `P(X ≤ E − λ) ≤ e^{−λ²/(2E)}`
/// * `upper`: `P(X ≥ E + λ) ≤ e^{−λ²/(2(E+λ/3))}`
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailBounds {
    pub lower: f64,
    pub upper: f64,
}

pub fn binomial_tail_bounds(expectation: f64, lambda: f64) -> Result<TailBounds> {
    if !(expectation >= 0.0 && lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tail bounds need E ≥ 0 and λ ≥ 0, got E = {expectation}, λ = {lambda}"
        )));
    }
    if lambda == 0.0 {
        return Ok(TailBounds {
            lower: 1.0,
            upper: 1.0,
        });
    }
    let l2 = lambda * lambda;
    Ok(TailBounds {
        lower: (-l2 / (2.0 * expectation)).exp(),
        upper: (-l2 / (2.0 * (expectation + lambda / 3.0))).exp(),
    })
}

/// First-order semi-supervised risk from the univariate constant of the conditional alphabet.
pub fn predicted_risk(
    loss: &LossSpec,
    k_x: usize,
    k_y: usize,
    m: usize,
    constant: &RiskConstant,
) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidParameter("prediction needs m ≥ 1".into()));
    }
    if constant.k != k_y {
        return Err(Error::DimensionMismatch {
            expected: k_y,
            found: constant.k,
        });
    }
    let (kx, m) = (k_x as f64, m as f64);
    Ok(match loss {
        LossSpec::Lp(p) => kx.powf(1.0 - p / 2.0) * constant.value * m.powf(-p / 2.0),
        LossSpec::FDiv(_) => kx * constant.value / m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::losses::Builtin;
    use proptest::prelude::*;

    fn lp_table(p: f64, values: Vec<f64>) -> RiskTable {
        RiskTable::new(values, LossKind::Lp { p }, TableSource::Exact).unwrap()
    }

    fn binom_pmf(n: usize, x: f64) -> Vec<f64> {
        // direct product form, independent of the log-space path
        let mut out = vec![0.0; n + 1];
        let mut c = 1.0f64;
        for i in 0..=n {
            if i > 0 {
                c = c * (n - i + 1) as f64 / i as f64;
            }
            out[i] = c * x.powi(i as i32) * (1.0 - x).powi((n - i) as i32);
        }
        out
    }

    #[test]
    fn h_small_cases() {
        let t = lp_table(2.0, vec![0.7, 0.3]);
        assert_eq!(h_np(0.0, 1, 2.0, &t).unwrap(), 0.0);
        for &x in &[0.2, 0.5, 0.9, 1.0] {
            let expect = 0.7 * x * x * (1.0 - x) + 0.3 * x * x * x;
            assert!((h_np(x, 1, 2.0, &t).unwrap() - expect).abs() < 1e-15);
        }
        assert!(matches!(
            h_np(0.3, 2, 2.0, &t),
            Err(Error::TableTooShort { len: 2, needed: 3 })
        ));
    }

    #[test]
    fn g_small_cases() {
        let t = lp_table(1.0, vec![0.7, 0.3]);
        assert_eq!(g_np(0.0, 1, 1.0, &t).unwrap(), 0.0);
        for &x in &[0.2, 0.5, 1.0] {
            assert!((g_np(x, 1, 1.0, &t).unwrap() - 0.3 * x).abs() < 1e-15);
        }
    }

    #[test]
    fn h_and_g_match_direct_sums() {
        let r: Vec<f64> = (0..=30).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let t = lp_table(1.5, r.clone());
        for &x in &[0.1, 0.37, 0.8] {
            let w = binom_pmf(30, x);
            let h: f64 = (0..=30).map(|i| w[i] * x.powf(1.5) * r[i]).sum();
            let g: f64 = (1..=30).map(|i| w[i] * (i as f64 / 30.0).powf(1.5) * r[i]).sum();
            assert!((h_np(x, 30, 1.5, &t).unwrap() - h).abs() < 1e-14);
            assert!((g_np(x, 30, 1.5, &t).unwrap() - g).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_sample_convention() {
        assert!((zero_sample_risk(&LossSpec::Lp(2.0), 2).unwrap() - 0.5).abs() < 1e-15);
        let kl = LossSpec::FDiv(FGenerator::builtin(Builtin::Kl));
        assert!((zero_sample_risk(&kl, 3).unwrap() - 3f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn exact_table_entries() {
        let t = build_risk_table(&EstimatorSpec::MinimaxL2, &LossSpec::Lp(2.0), 2, 10, 11).unwrap();
        assert_eq!(t.source(), TableSource::Exact);
        assert_eq!(t.values()[0], 0.5);
        let e = build_risk_table(&EstimatorSpec::Empirical, &LossSpec::Lp(2.0), 2, 10, 11).unwrap();
        assert!((e.values()[1] - 0.5).abs() < 1e-15);
        for table in [&t, &e] {
            assert!(table.values()[1..].windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn hybrid_table_and_continuity_warning() {
        let kl = LossSpec::FDiv(FGenerator::builtin(Builtin::Kl));
        let t = build_risk_table(&EstimatorSpec::AddConstant { beta: 1.0 }, &kl, 2, 200, 41).unwrap();
        assert_eq!(t.source(), TableSource::Hybrid { crossover: 41 });
        assert_eq!(t.n_max(), 200);
        assert!(t.warnings().is_empty(), "{:?}", t.warnings());
        // at uniform p add-one shrinks toward the truth, so r_1 < r_2 here;
        // from i = 2 each branch is non-increasing and the step at the
        // crossover is bounded by the continuity check
        assert!(t.values()[1] < t.values()[2]);
        assert!(t.values()[2..41].windows(2).all(|w| w[1] <= w[0]));
        assert!(t.values()[41..].windows(2).all(|w| w[1] <= w[0]));
        // the equalizer risk 0.5/(1+√40)² sits ~29% below 0.49/40
        let l2 = build_risk_table(&EstimatorSpec::MinimaxL2, &LossSpec::Lp(2.0), 2, 100, 41).unwrap();
        assert_eq!(l2.warnings().len(), 1, "{:?}", l2.warnings());
        let c = RiskConstant::new(0.5, LossKind::Lp { p: 2.0 }, 2, Provenance::Calibrated).unwrap();
        let asym = build_risk_table_with(&EstimatorSpec::MinimaxL2, &LossSpec::Lp(2.0), 2, 10, 0, &c)
            .unwrap();
        assert_eq!(asym.source(), TableSource::CalibratedAsymptotic);
        assert!((asym.values()[4] - 0.125).abs() < 1e-15);
    }

    #[test]
    fn bar_risk_lp_degenerate_cases() {
        let t = lp_table(1.5, vec![0.8, 0.4, 0.2, 0.1]);
        let one = bar_risk_lp(3, 1.5, &t, 1).unwrap();
        assert!((one.uniform - 0.1).abs() < 1e-15);
        let zero = bar_risk_lp(0, 1.5, &t, 4).unwrap();
        assert!((zero.uniform - 4.0 * 0.25f64.powf(1.5) * 0.8).abs() < 1e-15);
        assert!(bar_risk_lp(4, 1.5, &t, 2).is_err());
        assert!(bar_risk_lp(2, 2.0, &t, 2).is_err());
    }

    #[test]
    fn bar_risk_f_degenerate_cases() {
        let kl = FGenerator::builtin(Builtin::Kl);
        let t = RiskTable::new(
            vec![0.9, 0.5, 0.3, 0.2],
            LossKind::Fdiv {
                generator: kl.name().into(),
            },
            TableSource::Exact,
        )
        .unwrap();
        assert!((bar_risk_f(0, &t, 3).unwrap().uniform - 0.9).abs() < 1e-15);
        assert!((bar_risk_f(3, &t, 1).unwrap().uniform - 0.2).abs() < 1e-15);
        // m = 2, k_x = 2: (0.9 + 2·0.5 + 0.3)/4
        assert!((bar_risk_f(2, &t, 2).unwrap().uniform - 0.55).abs() < 1e-15);
    }

    #[test]
    fn bar_risk_lp_approaches_first_order_prediction() {
        let c2 = calibrate_constant(
            &EstimatorSpec::MinimaxL2,
            &LossSpec::Lp(2.0),
            2,
            &[100, 1000, 10_000],
            CalibrationMethod::Exact,
        )
        .unwrap()
        .constant;
        let ratio = |m: usize| {
            let table = build_risk_table(&EstimatorSpec::MinimaxL2, &LossSpec::Lp(2.0), 2, m, m + 1).unwrap();
            let bar = bar_risk_lp(m, 2.0, &table, 2).unwrap();
            bar.uniform / predicted_risk(&LossSpec::Lp(2.0), 2, 2, m, &c2).unwrap()
        };
        // each bucket holds ~m/2 labels and the equalizer risk (1−1/k)/(1+√i)²
        // is still far from (1−1/k)/i at i ≈ 25
        let r50 = ratio(50);
        assert!((0.65..0.80).contains(&r50), "{r50}");
        let r2000 = ratio(2000);
        assert!((r2000 - 1.0).abs() <= 0.10, "{r2000}");
        assert!((r2000 - 1.0).abs() < (r50 - 1.0).abs());
        // against the constant at the bucket size the m = 50 value is already first order
        let c_bucket = calibrate_constant(
            &EstimatorSpec::MinimaxL2,
            &LossSpec::Lp(2.0),
            2,
            &[5, 10, 25],
            CalibrationMethod::Exact,
        )
        .unwrap()
        .constant;
        let table = build_risk_table(&EstimatorSpec::MinimaxL2, &LossSpec::Lp(2.0), 2, 50, 51).unwrap();
        let bar = bar_risk_lp(50, 2.0, &table, 2).unwrap().uniform;
        let pred = predicted_risk(&LossSpec::Lp(2.0), 2, 2, 50, &c_bucket).unwrap();
        assert!((bar / pred - 1.0).abs() <= 0.10, "{bar} vs {pred}");
    }

    #[test]
    fn bar_risk_f_matches_first_order_prediction() {
        let kl = FGenerator::builtin(Builtin::Kl);
        let loss = LossSpec::FDiv(kl.clone());
        let table = build_risk_table(&EstimatorSpec::AddConstant { beta: 1.0 }, &loss, 2, 100, 41).unwrap();
        let bar = bar_risk_f(100, &table, 2).unwrap();
        let pred = predicted_risk(&loss, 2, 2, 100, &RiskConstant::f_divergence(&kl, 2).unwrap()).unwrap();
        assert!((bar.uniform / pred - 1.0).abs() <= 0.10, "{} vs {pred}", bar.uniform);
    }

    #[test]
    fn uniform_maximizes_bar_risk_below_p_two() {
        for (spec, p) in [(EstimatorSpec::Empirical, 1.0), (EstimatorSpec::Empirical, 1.5)] {
            let table = build_risk_table(&spec, &LossSpec::Lp(p), 2, 50, 51).unwrap();
            for k_x in [2, 3] {
                let bar = bar_risk_lp(50, p, &table, k_x).unwrap();
                assert!(bar.uniform >= bar.grid_max - 1e-12, "p={p} k_x={k_x}: {bar:?}");
            }
        }
    }

    #[test]
    fn p_two_bar_risk_peaks_at_a_corner_for_small_m() {
        // at p = 2 the first-order objective is flat in p_X; the next-order
        // term of the equalizer risk favours concentrating p_X
        let table = build_risk_table(&EstimatorSpec::MinimaxL2, &LossSpec::Lp(2.0), 2, 50, 51).unwrap();
        let bar = bar_risk_lp(50, 2.0, &table, 2).unwrap();
        assert!(bar.grid_max > bar.uniform);
        assert!(bar.uniform / bar.grid_max > 0.9, "{bar:?}");
    }

    #[test]
    fn bernstein_reproduces_affine_functions() {
        for n in [1usize, 7, 60] {
            let ident: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
            let ones = vec![1.0; n + 1];
            for &x in &[0.0, 0.13, 0.5, 0.99, 1.0] {
                assert!((bernstein_poly(&ident, x).unwrap() - x).abs() < 1e-13);
                assert!((bernstein_poly(&ones, x).unwrap() - 1.0).abs() < 1e-14);
            }
        }
        assert!(bernstein_poly(&[1.0], 0.5).is_err());
    }

    #[test]
    fn bernstein_second_order_limit() {
        let f = |t: f64| t.powf(0.75);
        let x = 0.3;
        let limit = bernstein_limit(x, -3.0 / 16.0 * x.powf(-1.25));
        let mut prev = f64::INFINITY;
        for n in [100usize, 400, 1600] {
            let vals: Vec<f64> = (0..=n).map(|i| f(i as f64 / n as f64)).collect();
            let scaled = n as f64 * (bernstein_poly(&vals, x).unwrap() - f(x));
            let rel = (scaled / limit - 1.0).abs();
            assert!(rel < prev);
            prev = rel;
        }
        assert!(prev <= 0.05);
    }

    #[test]
    fn tail_bound_examples() {
        assert_eq!(
            binomial_tail_bounds(3.0, 0.0).unwrap(),
            TailBounds { lower: 1.0, upper: 1.0 }
        );
        let b = binomial_tail_bounds(10.0, 10.0).unwrap();
        assert!((b.lower - (-5.0f64).exp()).abs() < 1e-15);
        assert!((b.upper - (-3.75f64).exp()).abs() < 1e-15);
        assert!(binomial_tail_bounds(-1.0, 1.0).is_err());
    }

    #[test]
    fn tail_bounds_dominate_binomial_100_tenth() {
        let w = binom_pmf(100, 0.1);
        for lambda in [2.0, 4.0, 6.0] {
            let b = binomial_tail_bounds(10.0, lambda).unwrap();
            let below: f64 = (0..=100).filter(|&i| i as f64 <= 10.0 - lambda).map(|i| w[i]).sum();
            let above: f64 = (0..=100).filter(|&i| i as f64 >= 10.0 + lambda).map(|i| w[i]).sum();
            assert!(below <= b.lower, "λ={lambda}");
            assert!(above <= b.upper, "λ={lambda}");
        }
    }

    #[test]
    fn predicted_risk_examples() {
        let kl = FGenerator::builtin(Builtin::Kl);
        let c = RiskConstant::f_divergence(&kl, 2).unwrap();
        assert_eq!(c.value, 0.5);
        let r = predicted_risk(&LossSpec::FDiv(kl), 2, 2, 100, &c).unwrap();
        assert!((r - 0.01).abs() < 1e-15);
        let c2 = RiskConstant::new(0.49, LossKind::Lp { p: 2.0 }, 4, Provenance::Calibrated).unwrap();
        let r = predicted_risk(&LossSpec::Lp(2.0), 3, 4, 70, &c2).unwrap();
        assert!((r - 0.49 / 70.0).abs() < 1e-15);
        let c1 = RiskConstant::new(1.0, LossKind::Lp { p: 1.0 }, 2, Provenance::Calibrated).unwrap();
        let r = predicted_risk(&LossSpec::Lp(1.0), 4, 2, 100, &c1).unwrap();
        assert!((r - 0.2).abs() < 1e-15);
        assert!(predicted_risk(&LossSpec::Lp(1.0), 4, 3, 100, &c1).is_err());
        assert!(RiskConstant::new(0.0, LossKind::Lp { p: 1.0 }, 2, Provenance::Calibrated).is_err());
    }

    #[test]
    fn hg_gap_is_small_and_shrinking() {
        let table = build_risk_table(&EstimatorSpec::Empirical, &LossSpec::Lp(1.5), 2, 4000, 41).unwrap();
        let x = 0.3;
        let mut gaps = Vec::new();
        for n in [500usize, 1000, 2000, 4000] {
            let h = h_np(x, n, 1.5, &table).unwrap();
            let g = g_np(x, n, 1.5, &table).unwrap();
            let scaled = (h - g).abs() / h * (n as f64).ln().sqrt();
            assert!(scaled <= 5.0, "n={n}: {scaled}");
            gaps.push((h - g).abs() / h);
        }
        assert!(gaps.windows(2).all(|w| w[1] <= w[0]), "{gaps:?}");
    }

    proptest! {
        #[test]
        fn h_is_monotone_in_table(
            base in proptest::collection::vec(0.0f64..1.0, 21),
            bump in proptest::collection::vec(0.0f64..0.5, 21),
            x in 0.0f64..=1.0,
            p in 1.0f64..=2.0,
        ) {
            let lo = lp_table(p, base.clone());
            let hi = lp_table(p, base.iter().zip(&bump).map(|(a, b)| a + b).collect());
            prop_assert!(h_np(x, 20, p, &lo).unwrap() <= h_np(x, 20, p, &hi).unwrap() + 1e-15);
            prop_assert!(g_np(x, 20, p, &lo).unwrap() <= g_np(x, 20, p, &hi).unwrap() + 1e-15);
        }

        #[test]
        fn bernstein_partition_of_unity(n in 1usize..200, x in 0.0f64..=1.0) {
            let ones = vec![1.0; n + 1];
            prop_assert!((bernstein_poly(&ones, x).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}
