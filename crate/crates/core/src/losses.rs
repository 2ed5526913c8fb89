//! ℓᵖₚ losses and f-divergences.
//!
//! | Generator    | f(t)              | f″(1) | f(0⁺) | t·f′(t) at 0⁺ |
//! |--------------|-------------------|-------|-------|---------------|
//! | `kl`         | t ln t            | 1     | 0     | 0             |
//! | `chi2`       | (t − 1)²          | 2     | 1     | 0             |
//! | `hellinger2` | (√t − 1)²         | 1/2   | 1     | 0             |
//! | `lecam`      | (1 − t)/(2t + 2)  | 1/4   | 1/2   | 0             |
//!
//! These are the standard textbook generators. KL is measured in nats.
//! The Le Cam generator gives `D = ¼ Σ (p − q)²/(p + q)`; other
//! normalizations of Le Cam are not provided.
//!
//! Orientation: `D_f(p ‖ q) = Σ_x q(x) f(p(x)/q(x))`, where `p` is the true
//! distribution and `q` the estimate. Zero cells follow the continuous
//! extension of `f`:
//!
//! * `p(x) = q(x) = 0` contributes 0;
//! * `p(x) = 0 < q(x)` contributes `q(x)·f(0⁺)`;
//! * `q(x) = 0 < p(x)` is an [`Error::AbsoluteContinuityViolation`].

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pmf::{ConditionalPmf, Pmf};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The four generators shipped with the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Builtin {
    Kl,
    Chi2,
    Hellinger2,
    LeCam,
}

impl Builtin {
    pub const ALL: [Builtin; 4] = [Builtin::Kl, Builtin::Chi2, Builtin::Hellinger2, Builtin::LeCam];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Kl => "kl",
            Builtin::Chi2 => "chi2",
            Builtin::Hellinger2 => "hellinger2",
            Builtin::LeCam => "lecam",
        }
    }
}

impl std::str::FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kl" => Ok(Builtin::Kl),
            "chi2" => Ok(Builtin::Chi2),
            "hellinger2" => Ok(Builtin::Hellinger2),
            "lecam" => Ok(Builtin::LeCam),
            _ => Err(Error::UnknownGenerator(s.to_string())),
        }
    }
}

/// A convex generator `f` with `f(1) = 0`, its first two derivatives, and its
/// boundary limits at `0⁺`.
#[derive(Clone)]
pub struct FGenerator {
    name: String,
    f: RealFn,
    f_prime: RealFn,
    f_second: RealFn,
    f_at_zero: f64,
    tf_prime_at_zero: f64,
}

impl fmt::Debug for FGenerator {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt.debug_struct("FGenerator")
            .field("name", &self.name)
            .field("f_second_at_one", &self.f_second(1.0))
            .field("f_at_zero", &self.f_at_zero)
            .field("tf_prime_at_zero", &self.tf_prime_at_zero)
            .finish()
    }
}

impl FGenerator {
    /// A user-supplied generator. Nothing is checked here; run
    /// [`validate_generator`] before trusting it.
    pub fn custom(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        f_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
        f_second: impl Fn(f64) -> f64 + Send + Sync + 'static,
        f_at_zero: f64,
        tf_prime_at_zero: f64,
    ) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
            f_prime: Arc::new(f_prime),
            f_second: Arc::new(f_second),
            f_at_zero,
            tf_prime_at_zero,
        }
    }

    pub fn builtin(which: Builtin) -> Self {
        match which {
            Builtin::Kl => Self::custom(
                "kl",
                |t| if t == 0.0 { 0.0 } else { t * t.ln() },
                |t| t.ln() + 1.0,
                |t| 1.0 / t,
                0.0,
                0.0,
            ),
            Builtin::Chi2 => Self::custom(
                "chi2",
                |t| (t - 1.0) * (t - 1.0),
                |t| 2.0 * (t - 1.0),
                |_| 2.0,
                1.0,
                0.0,
            ),
            Builtin::Hellinger2 => Self::custom(
                "hellinger2",
                |t| (t.sqrt() - 1.0).powi(2),
                |t| 1.0 - 1.0 / t.sqrt(),
                |t| 0.5 * t.powf(-1.5),
                1.0,
                0.0,
            ),
            Builtin::LeCam => Self::custom(
                "lecam",
                |t| (1.0 - t) / (2.0 * t + 2.0),
                |t| -1.0 / ((t + 1.0) * (t + 1.0)),
                |t| 2.0 / (t + 1.0).powi(3),
                0.5,
                0.0,
            ),
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        Ok(Self::builtin(name.parse()?))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn f(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    #[inline]
    pub fn f_prime(&self, t: f64) -> f64 {
        (self.f_prime)(t)
    }

    #[inline]
    pub fn f_second(&self, t: f64) -> f64 {
        (self.f_second)(t)
    }

    pub fn f_at_zero(&self) -> f64 {
        self.f_at_zero
    }

    pub fn tf_prime_at_zero(&self) -> f64 {
        self.tf_prime_at_zero
    }

    /// Replaces the second derivative, keeping everything else.
    pub fn with_f_second(mut self, f_second: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.f_second = Arc::new(f_second);
        self
    }

    pub fn with_f_prime(mut self, f_prime: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.f_prime = Arc::new(f_prime);
        self
    }

    /// Univariate first-order constant `f″(1)(k − 1)/2`.
    pub fn curvature_constant(&self, k: usize) -> f64 {
        self.f_second(1.0) * (k as f64 - 1.0) / 2.0
    }
}

/// Serializable tag for a loss family, used in tables and reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossKind {
    Lp { p: f64 },
    Fdiv { generator: String },
}

impl LossKind {
    /// Same as [`LossSpec::rate_exponent`].
    pub fn rate_exponent(&self) -> f64 {
        match self {
            LossKind::Lp { p } => p / 2.0,
            LossKind::Fdiv { .. } => 1.0,
        }
    }
}

impl From<&LossSpec> for LossKind {
    fn from(loss: &LossSpec) -> Self {
        match loss {
            LossSpec::Lp(p) => LossKind::Lp { p: *p },
            LossSpec::FDiv(g) => LossKind::Fdiv {
                generator: g.name().to_string(),
            },
        }
    }
}

/// Which loss a risk is measured in.
#[derive(Debug, Clone)]
pub enum LossSpec {
    /// `Σ |a − b|^p` with `p ∈ [1, 2]`.
    Lp(f64),
    /// `D_f(truth ‖ estimate)`.
    FDiv(FGenerator),
}

impl LossSpec {
    pub fn lp(p: f64) -> Result<Self> {
        check_exponent(p)?;
        Ok(LossSpec::Lp(p))
    }

    pub fn fdiv(g: FGenerator) -> Self {
        LossSpec::FDiv(g)
    }

    /// Parses `l1`, `l2`, `lp:<p>`, or a builtin generator name.
    pub fn parse(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "l1" => Self::lp(1.0),
            "l2" => Self::lp(2.0),
            _ => match lower.strip_prefix("lp:") {
                Some(p) => {
                    let p: f64 = p
                        .parse()
                        .map_err(|_| Error::InvalidParameter(format!("bad exponent in '{s}'")))?;
                    Self::lp(p)
                }
                None => Ok(Self::FDiv(FGenerator::by_name(&lower)?)),
            },
        }
    }

    pub fn label(&self) -> String {
        match self {
            LossSpec::Lp(p) => format!("lp:{p}"),
            LossSpec::FDiv(g) => g.name().to_string(),
        }
    }

    /// Rate exponent `e` in `risk ≍ C·n^{-e}`: `p/2` for ℓᵖₚ, 1 for f-divergences.
    pub fn rate_exponent(&self) -> f64 {
        match self {
            LossSpec::Lp(p) => p / 2.0,
            LossSpec::FDiv(_) => 1.0,
        }
    }

    pub fn is_fdiv(&self) -> bool {
        matches!(self, LossSpec::FDiv(_))
    }

    /// Loss between a true distribution and an estimate given as raw slices.
    pub fn evaluate(&self, truth: &[f64], estimate: &[f64]) -> Result<f64> {
        if truth.len() != estimate.len() {
            return Err(Error::DimensionMismatch {
                expected: truth.len(),
                found: estimate.len(),
            });
        }
        match self {
            LossSpec::Lp(p) => Ok(lp_slices(*p, truth, estimate)),
            LossSpec::FDiv(g) => f_divergence_slices(g, truth, estimate),
        }
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "loss exponent {p} outside [1, 2]"
        )));
    }
    Ok(())
}

fn lp_slices(p: f64, a: &[f64], b: &[f64]) -> f64 {
    if p == 2.0 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
    } else if p == 1.0 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
    } else {
        a.iter().zip(b).map(|(x, y)| (x - y).abs().powf(p)).sum()
    }
}

pub(crate) fn f_divergence_slices(g: &FGenerator, p: &[f64], q: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for (index, (&pi, &qi)) in p.iter().zip(q).enumerate() {
        if qi == 0.0 {
            if pi > 0.0 {
                return Err(Error::AbsoluteContinuityViolation { index });
            }
            continue;
        }
        total += if pi == 0.0 {
            qi * g.f_at_zero()
        } else {
            qi * g.f(pi / qi)
        };
    }
    Ok(total)
}

/// `Σ_x |a(x) − b(x)|^p`.
pub fn lp_loss(p: f64, a: &Pmf, b: &Pmf) -> Result<f64> {
    check_exponent(p)?;
    if a.k() != b.k() {
        return Err(Error::DimensionMismatch {
            expected: a.k(),
            found: b.k(),
        });
    }
    Ok(lp_slices(p, a.weights(), b.weights()))
}

/// `D_f(p ‖ q) = Σ_x q(x) f(p(x)/q(x))`.
pub fn f_divergence(g: &FGenerator, p: &Pmf, q: &Pmf) -> Result<f64> {
    if p.k() != q.k() {
        return Err(Error::DimensionMismatch {
            expected: p.k(),
            found: q.k(),
        });
    }
    f_divergence_slices(g, p.weights(), q.weights())
}

/// `Σ_x p_X(x) D_f(p_{Y|X=x} ‖ q_{Y|X=x})`; rows with `p_X(x) = 0` are skipped.
pub fn conditional_f_divergence(
    g: &FGenerator,
    p: &ConditionalPmf,
    q: &ConditionalPmf,
    px: &Pmf,
) -> Result<f64> {
    if p.k_x() != q.k_x() || p.k_x() != px.k() {
        return Err(Error::DimensionMismatch {
            expected: px.k(),
            found: if p.k_x() != px.k() { p.k_x() } else { q.k_x() },
        });
    }
    if p.k_y() != q.k_y() {
        return Err(Error::DimensionMismatch {
            expected: p.k_y(),
            found: q.k_y(),
        });
    }
    let mut total = 0.0;
    for (row, &w) in px.weights().iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let d = f_divergence_slices(g, p.row(row).weights(), q.row(row).weights()).map_err(
            |e| match e {
                Error::AbsoluteContinuityViolation { index } => {
                    Error::ConditionalContinuityViolation { row, index }
                }
                other => other,
            },
        )?;
        total += w * d;
    }
    Ok(total)
}

/// Outcome of one regularity check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Per-condition results of [`validate_generator`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorReport {
    pub generator: String,
    pub conditions: Vec<Condition>,
}

impl GeneratorReport {
    pub fn passed(&self) -> bool {
        self.conditions.iter().all(|c| c.passed)
    }

    pub fn condition(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

/// Geometric grid of `points` values in `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && points >= 2);
    let ratio = (hi / lo).ln() / (points - 1) as f64;
    (0..points).map(|i| lo * (ratio * i as f64).exp()).collect()
}

/// Default validation grid: 60 log-spaced points on `[1e-2, 20]`.
pub fn default_validation_grid() -> Vec<f64> {
    log_grid(1e-2, 20.0, 60)
}

const DERIVATIVE_TOL: f64 = 1e-6;

fn central_difference(h_scale: f64, t: f64, func: impl Fn(f64) -> f64) -> f64 {
    let h = h_scale * t.max(1e-3);
    (func(t + h) - func(t - h)) / (2.0 * h)
}

/// Checks the regularity conditions on `g` over `grid ⊂ (0, T]`.
///
/// Conditions: `f(1) = 0`; convexity (secant test on consecutive grid
/// triples); strict convexity (`f″(1) > 0` and every secant gap positive);
/// `f′` and `f″` agree with central differences of `f` and `f′` to within
/// `1e-6` relative (floored at 1); the boundary limits are finite.
pub fn validate_generator(g: &FGenerator, grid: &[f64]) -> GeneratorReport {
    let mut conditions = Vec::new();
    let mut push = |name, passed, detail: String| conditions.push(Condition { name, passed, detail });

    let grid_ok = grid.len() >= 3 && grid.iter().all(|&t| t > 0.0 && t.is_finite());
    let mut pts = grid.to_vec();
    pts.sort_by(f64::total_cmp);
    pts.dedup();

    let f1 = g.f(1.0);
    push("f_one_is_zero", f1.abs() <= 1e-12, format!("f(1) = {f1:e}"));

    // secant gap at each interior point: positive for strictly convex f
    let gaps: Vec<(f64, f64, f64)> = pts
        .windows(3)
        .map(|w| {
            let (a, b, c) = (w[0], w[1], w[2]);
            let (fa, fb, fc) = (g.f(a), g.f(b), g.f(c));
            let chord = ((c - b) * fa + (b - a) * fc) / (c - a);
            let scale = fa.abs().max(fb.abs()).max(fc.abs()).max(1.0);
            (b, chord - fb, scale)
        })
        .collect();
    let worst = gaps
        .iter()
        .map(|&(b, gap, scale)| (b, gap / scale))
        .min_by(|x, y| x.1.total_cmp(&y.1));
    let convex = grid_ok && gaps.iter().all(|&(_, gap, scale)| gap >= -1e-12 * scale);
    push(
        "convex",
        convex,
        match worst {
            Some((b, r)) => format!("min relative secant gap {r:e} at t = {b}"),
            None => "grid needs at least 3 distinct positive points".into(),
        },
    );
    let curvature = g.f_second(1.0);
    let strict = grid_ok
        && curvature > 0.0
        && gaps.iter().all(|&(_, gap, scale)| gap > 1e-12 * scale);
    push("strictly_convex", strict, format!("f''(1) = {curvature}"));

    let mut worst_d1: (f64, f64) = (0.0, 0.0);
    let mut worst_d2: (f64, f64) = (0.0, 0.0);
    for &t in &pts {
        let fd1 = central_difference(1e-5, t, |s| g.f(s));
        let err1 = (g.f_prime(t) - fd1).abs() / g.f_prime(t).abs().max(1.0);
        if !(err1 <= worst_d1.1) {
            worst_d1 = (t, err1);
        }
        let fd2 = central_difference(1e-5, t, |s| g.f_prime(s));
        let err2 = (g.f_second(t) - fd2).abs() / g.f_second(t).abs().max(1.0);
        if !(err2 <= worst_d2.1) {
            worst_d2 = (t, err2);
        }
    }
    push(
        "first_derivative",
        grid_ok && worst_d1.1 <= DERIVATIVE_TOL,
        format!("max relative error {:e} at t = {}", worst_d1.1, worst_d1.0),
    );
    push(
        "second_derivative",
        grid_ok && worst_d2.1 <= DERIVATIVE_TOL,
        format!("max relative error {:e} at t = {}", worst_d2.1, worst_d2.0),
    );
    push(
        "boundary_limits_finite",
        g.f_at_zero().is_finite() && g.tf_prime_at_zero().is_finite(),
        format!(
            "f(0+) = {}, t f'(t) at 0+ = {}",
            g.f_at_zero(),
            g.tf_prime_at_zero()
        ),
    );

    GeneratorReport {
        generator: g.name().to_string(),
        conditions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pmf(w: &[f64]) -> Pmf {
        Pmf::new(w.to_vec()).unwrap()
    }

    #[test]
    fn lp_examples() {
        let a = pmf(&[0.5, 0.5]);
        assert_eq!(lp_loss(2.0, &a, &a).unwrap(), 0.0);
        assert_eq!(lp_loss(2.0, &a, &pmf(&[0.25, 0.75])).unwrap(), 0.125);
        assert_eq!(lp_loss(1.0, &pmf(&[1.0, 0.0]), &pmf(&[0.0, 1.0])).unwrap(), 2.0);
        assert!(matches!(
            lp_loss(1.0, &a, &pmf(&[0.2, 0.3, 0.5])),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(lp_loss(2.5, &a, &a).is_err());
    }

    #[test]
    fn f_divergence_examples() {
        let p = pmf(&[0.5, 0.5]);
        let q = pmf(&[0.25, 0.75]);
        let kl = FGenerator::builtin(Builtin::Kl);
        let chi2 = FGenerator::builtin(Builtin::Chi2);
        for b in Builtin::ALL {
            assert_eq!(f_divergence(&FGenerator::builtin(b), &p, &p).unwrap(), 0.0);
        }
        // 0.5 ln 2 + 0.5 ln(2/3) = 0.5 ln(4/3)
        let want = 0.5 * (4.0f64 / 3.0).ln();
        assert!((f_divergence(&kl, &p, &q).unwrap() - want).abs() < 1e-15);
        assert!((want - 0.143841).abs() < 1e-6);
        // (0.25)²/0.25 + (0.25)²/0.75 = 1/4 + 1/12
        assert!((f_divergence(&chi2, &p, &q).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_cell_conventions() {
        let chi2 = FGenerator::builtin(Builtin::Chi2);
        // p = 0 < q: q·f(0) = 0.5·1
        let d = f_divergence(&chi2, &pmf(&[1.0, 0.0]), &pmf(&[0.5, 0.5])).unwrap();
        assert!((d - (0.5 * 1.0 + 0.5 * 1.0)).abs() < 1e-15);
        // p = q = 0 contributes nothing
        let d = f_divergence(&chi2, &pmf(&[0.5, 0.5, 0.0]), &pmf(&[0.5, 0.5, 0.0])).unwrap();
        assert_eq!(d, 0.0);
        assert!(matches!(
            f_divergence(&chi2, &pmf(&[0.5, 0.5]), &pmf(&[1.0, 0.0])),
            Err(Error::AbsoluteContinuityViolation { index: 1 })
        ));
    }

    #[test]
    fn conditional_examples() {
        let kl = FGenerator::builtin(Builtin::Kl);
        let p = ConditionalPmf::new(vec![pmf(&[0.5, 0.5]), pmf(&[0.1, 0.9])]).unwrap();
        let q = ConditionalPmf::new(vec![pmf(&[0.25, 0.75]), pmf(&[0.3, 0.7])]).unwrap();
        assert_eq!(
            conditional_f_divergence(&kl, &p, &p, &pmf(&[0.3, 0.7])).unwrap(),
            0.0
        );
        let d0 = f_divergence(&kl, p.row(0), q.row(0)).unwrap();
        let d1 = f_divergence(&kl, p.row(1), q.row(1)).unwrap();
        let delta0 = conditional_f_divergence(&kl, &p, &q, &pmf(&[1.0, 0.0])).unwrap();
        assert_eq!(delta0, d0);
        let mix = conditional_f_divergence(&kl, &p, &q, &pmf(&[0.5, 0.5])).unwrap();
        assert!((mix - (d0 + d1) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn conditional_reports_offending_row() {
        let kl = FGenerator::builtin(Builtin::Kl);
        let p = ConditionalPmf::new(vec![pmf(&[0.5, 0.5]), pmf(&[0.5, 0.5])]).unwrap();
        let q = ConditionalPmf::new(vec![pmf(&[0.5, 0.5]), pmf(&[1.0, 0.0])]).unwrap();
        assert!(matches!(
            conditional_f_divergence(&kl, &p, &q, &pmf(&[0.5, 0.5])),
            Err(Error::ConditionalContinuityViolation { row: 1, index: 1 })
        ));
        // the bad row carries no weight, so it is never evaluated
        assert_eq!(
            conditional_f_divergence(&kl, &p, &q, &pmf(&[1.0, 0.0])).unwrap(),
            0.0
        );
    }

    #[test]
    fn builtin_values() {
        let kl = FGenerator::builtin(Builtin::Kl);
        assert_eq!((kl.f(1.0), kl.f_prime(1.0), kl.f_second(1.0)), (0.0, 1.0, 1.0));
        assert_eq!(FGenerator::builtin(Builtin::Chi2).f_at_zero(), 1.0);
        assert_eq!(FGenerator::builtin(Builtin::Hellinger2).f_second(1.0), 0.5);
        assert_eq!(FGenerator::builtin(Builtin::LeCam).f_second(1.0), 0.25);
        assert!(matches!(
            FGenerator::by_name("renyi"),
            Err(Error::UnknownGenerator(_))
        ));
    }

    #[test]
    fn builtin_curvature_matches_finite_difference() {
        // second central difference of f at t = 1
        let h = 1e-4;
        for b in Builtin::ALL {
            let g = FGenerator::builtin(b);
            let fd = (g.f(1.0 + h) - 2.0 * g.f(1.0) + g.f(1.0 - h)) / (h * h);
            assert!((fd - g.f_second(1.0)).abs() < 1e-6, "{}: {fd}", g.name());
        }
    }

    #[test]
    fn boundary_limits_match_small_t() {
        for b in Builtin::ALL {
            let g = FGenerator::builtin(b);
            let t = 1e-12;
            assert!((g.f(t) - g.f_at_zero()).abs() < 1e-5, "{}", g.name());
            assert!((t * g.f_prime(t) - g.tf_prime_at_zero()).abs() < 1e-5, "{}", g.name());
        }
    }

    #[test]
    fn validation_accepts_builtins() {
        for b in Builtin::ALL {
            let report = validate_generator(&FGenerator::builtin(b), &default_validation_grid());
            assert!(report.passed(), "{report:?}");
        }
    }

    #[test]
    fn validation_rejects_affine() {
        let affine = FGenerator::custom("affine", |t| t - 1.0, |_| 1.0, |_| 0.0, -1.0, 0.0);
        let report = validate_generator(&affine, &default_validation_grid());
        assert!(!report.condition("strictly_convex").unwrap().passed);
        assert!(report.condition("convex").unwrap().passed);
        assert!(!report.passed());
    }

    #[test]
    fn validation_catches_wrong_derivative() {
        let bad = FGenerator::builtin(Builtin::Kl).with_f_prime(|t| t.ln() + 1.1);
        let report = validate_generator(&bad, &default_validation_grid());
        assert!(!report.condition("first_derivative").unwrap().passed);
        let bad = FGenerator::builtin(Builtin::LeCam).with_f_second(|_| 0.5);
        let report = validate_generator(&bad, &default_validation_grid());
        assert!(!report.condition("second_derivative").unwrap().passed);
    }

    #[test]
    fn loss_spec_parsing() {
        assert!(matches!(LossSpec::parse("l2").unwrap(), LossSpec::Lp(p) if p == 2.0));
        assert!(matches!(LossSpec::parse("lp:1.5").unwrap(), LossSpec::Lp(p) if p == 1.5));
        assert!(matches!(LossSpec::parse("KL").unwrap(), LossSpec::FDiv(_)));
        assert!(LossSpec::parse("lp:3").is_err());
        assert!(LossSpec::parse("tv").is_err());
    }

    fn simplex(k: usize, floor: f64) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.0f64..1.0, k).prop_map(move |w| {
            let total: f64 = w.iter().sum::<f64>().max(1e-300);
            let free = 1.0 - floor * k as f64;
            w.iter().map(|x| floor + free * x / total).collect()
        })
    }

    fn pair(floor: f64) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (2usize..7).prop_flat_map(move |k| (simplex(k, 0.0), simplex(k, floor)))
    }

    fn builtins() -> Vec<FGenerator> {
        Builtin::ALL.iter().map(|&b| FGenerator::builtin(b)).collect()
    }

    proptest! {
        #[test]
        fn non_negative((p, q) in pair(1e-6)) {
            for g in builtins() {
                prop_assert!(f_divergence_slices(&g, &p, &q).unwrap() >= -1e-12);
            }
            for e in [1.0, 1.5, 2.0] {
                prop_assert!(lp_slices(e, &p, &q) >= 0.0);
            }
        }

        #[test]
        fn identity((p, _) in pair(0.0)) {
            for g in builtins() {
                prop_assert_eq!(f_divergence_slices(&g, &p, &p).unwrap(), 0.0);
            }
            prop_assert_eq!(lp_slices(1.5, &p, &p), 0.0);
        }

        #[test]
        fn ordering_chain((p, q) in pair(0.05)) {
            let d = |b| f_divergence_slices(&FGenerator::builtin(b), &p, &q).unwrap();
            let (lecam, h2, kl, chi2) = (d(Builtin::LeCam), d(Builtin::Hellinger2), d(Builtin::Kl), d(Builtin::Chi2));
            prop_assert!(lecam <= h2 + 1e-12 && h2 <= kl + 1e-12 && kl <= chi2 + 1e-12);
        }

        #[test]
        fn quadratic_near_diagonal(
            q in (2usize..7).prop_flat_map(|k| simplex(k, 0.05)),
            seed in proptest::collection::vec(-1.0f64..1.0, 6),
        ) {
            let k = q.len();
            let mean: f64 = q.iter().zip(&seed).map(|(a, b)| a * b).sum();
            let u: Vec<f64> = seed[..k].iter().map(|z| z - mean).collect();
            let scale = u.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            prop_assume!(scale > 1e-3);
            for eps in [1e-3, 1e-4] {
                let p: Vec<f64> = q.iter().zip(&u).map(|(qi, ui)| qi * (1.0 + eps * ui / scale)).collect();
                let chi: f64 = p.iter().zip(&q).map(|(a, b)| (a - b) * (a - b) / b).sum();
                for g in builtins() {
                    let d = f_divergence_slices(&g, &p, &q).unwrap();
                    prop_assert!((d / (g.f_second(1.0) / 2.0 * chi) - 1.0).abs() <= 0.02);
                }
            }
        }
    }
}
