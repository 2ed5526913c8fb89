//! Estimation of discrete joint distributions from a few labeled pairs and
//! many unlabeled inputs.
//!
//! The joint estimate is a composition `q̂_XY = q̂_X · q̂_{Y|X}`: the
//! marginal is estimated from every observed `x`, and each conditional row
//! from the labels that fell in that `x` bucket.
//!
//! | Module         | Contents                                                         |
//! |----------------|------------------------------------------------------------------|
//! | [`pmf`]        | validated pmfs, conditionals, joints, the `Δ_δ` floor            |
//! | [`sample`]     | count vectors, sample sets, seeded sampling                      |
//! | [`losses`]     | ℓᵖₚ, f-divergences, generator validation                         |
//! | [`estimators`] | empirical, add-constant, ℓ²₂-minimax rules and the composition   |
//! | [`risk`]       | exact enumeration, Monte Carlo, worst-case search, calibration   |
//! | [`bounds`]     | `H^n_p`, `G^n_p`, bar risks, Bernstein, tail bounds, predictions |
//! | [`verify`]     | packaged numerical checks with pass/fail reports                 |
//!
//! ```
//! use semisup::{estimators::EstimatorSpec, pmf::Pmf, risk::exact_risk_univariate, losses::LossSpec};
//!
//! let p = Pmf::new(vec![0.3, 0.7]).unwrap();
//! let r = exact_risk_univariate(&EstimatorSpec::MinimaxL2, &LossSpec::Lp(2.0), &p, 4).unwrap();
//! assert!((r.mean - 1.0 / 18.0).abs() < 1e-15);
//! ```

pub mod bounds;
pub mod error;
pub mod estimators;
pub mod losses;
pub mod numeric;
pub mod pmf;
pub mod risk;
pub mod sample;
pub mod verify;

pub use error::{Error, Result};
