//! Browser bindings for `semisup`.
//!
//! | Export             | Returns (JSON)                                              |
//! |--------------------|-------------------------------------------------------------|
//! | `divergences`      | ℓ¹, ℓ²₂ and every builtin f-divergence between two pmfs      |
//! | `mixture_curve`    | `H^n_p(x)·n^{p/2}`, `G^n_p(x)·n^{p/2}` and `C·x^{p/2}` over x |
//! | `composition_risk` | Monte Carlo joint risk vs labeled size m, with the prediction |
//!
//! Each export is a thin wrapper around a plain Rust function of the same
//! name with an `_json` suffix, so the logic is testable off the browser.
//! Inputs arrive as numbers or comma-separated lists; errors come back as
//! rejected promises carrying the message.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use semisup::bounds::{
    build_risk_table_with, default_calibration_sizes, g_np, h_np, predicted_risk, RiskConstant,
};
use semisup::estimators::EstimatorSpec;
use semisup::losses::{Builtin, FGenerator, LossSpec};
use semisup::pmf::{JointPmf, Pmf, SimplexConstraint};
use semisup::risk::{calibrate_constant, mc_risk_semisupervised, CalibrationMethod, SemiSupervisedConfig};

type Res<T> = std::result::Result<T, String>;

fn parse_list(s: &str) -> Res<Vec<f64>> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| format!("'{t}' is not a number")))
        .collect()
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("plain data serializes")
}

#[derive(Debug, Serialize)]
struct Divergence {
    name: String,
    value: f64,
}

/// Losses between `p` and `q`; both lists are normalized first.
pub fn divergences_json(p: &str, q: &str) -> Res<String> {
    let p = Pmf::normalized(parse_list(p)?).map_err(|e| format!("p: {e}"))?;
    let q = Pmf::normalized(parse_list(q)?).map_err(|e| format!("q: {e}"))?;
    if p.k() != q.k() {
        return Err(format!("p has {} entries, q has {}", p.k(), q.k()));
    }
    let mut losses = vec![LossSpec::lp(1.0).unwrap(), LossSpec::lp(2.0).unwrap()];
    losses.extend(Builtin::ALL.iter().map(|&b| LossSpec::fdiv(FGenerator::builtin(b))));
    let out: Vec<Divergence> = losses
        .iter()
        .map(|l| Divergence {
            name: l.label(),
            value: l.evaluate(p.weights(), q.weights()).unwrap_or(f64::INFINITY),
        })
        .collect();
    Ok(to_json(&out))
}

#[derive(Debug, Serialize)]
struct MixtureCurve {
    n: usize,
    p: f64,
    constant: f64,
    x: Vec<f64>,
    h_scaled: Vec<f64>,
    g_scaled: Vec<f64>,
    prediction: Vec<f64>,
}

/// Evenly spaced x in (0, 1], `points` of them, for the ℓᵖₚ table of the
/// empirical estimator (minimax_l2 at p = 2) on a binary alphabet.
pub fn mixture_curve_json(n: usize, p: f64, points: usize) -> Res<String> {
    if !(1..=5000).contains(&n) {
        return Err("n must lie in 1..=5000".into());
    }
    if !(2..=400).contains(&points) {
        return Err("points must lie in 2..=400".into());
    }
    let loss = LossSpec::lp(p).map_err(|e| e.to_string())?;
    let spec = if p < 2.0 {
        EstimatorSpec::Empirical
    } else {
        EstimatorSpec::MinimaxL2
    };
    let k = 2;
    let cal = calibrate_constant(&spec, &loss, k, &default_calibration_sizes(k), CalibrationMethod::Exact)
        .map_err(|e| e.to_string())?;
    let c = cal.constant.value;
    let table = build_risk_table_with(&spec, &loss, k, n, 41, &cal.constant).map_err(|e| e.to_string())?;
    let scale = (n as f64).powf(p / 2.0);
    let x: Vec<f64> = (1..=points).map(|i| i as f64 / points as f64).collect();
    let mut curve = MixtureCurve {
        n,
        p,
        constant: c,
        x: x.clone(),
        h_scaled: Vec::with_capacity(points),
        g_scaled: Vec::with_capacity(points),
        prediction: Vec::with_capacity(points),
    };
    for &xi in &x {
        curve.h_scaled.push(h_np(xi, n, p, &table).map_err(|e| e.to_string())? * scale);
        curve.g_scaled.push(g_np(xi, n, p, &table).map_err(|e| e.to_string())? * scale);
        curve.prediction.push(c * xi.powf(p / 2.0));
    }
    Ok(to_json(&curve))
}

#[derive(Debug, Serialize)]
struct RiskPoint {
    m: usize,
    n: usize,
    risk: f64,
    std_error: f64,
    prediction: f64,
}

/// Uniform joint on `k_x × k_y`, `n = ratio·m`, first-order-optimal estimators per loss.
pub fn composition_risk_json(
    loss: &str,
    k_x: usize,
    k_y: usize,
    m_list: &str,
    ratio: usize,
    trials: usize,
    seed: u64,
) -> Res<String> {
    let loss = LossSpec::parse(loss).map_err(|e| e.to_string())?;
    if !(2..=6).contains(&k_x) || !(2..=6).contains(&k_y) {
        return Err("alphabet sizes must lie in 2..=6".into());
    }
    if !(100..=20_000).contains(&trials) {
        return Err("trials must lie in 100..=20000".into());
    }
    let ms: Vec<usize> = parse_list(m_list)?
        .into_iter()
        .map(|v| {
            if v >= 1.0 && v.fract() == 0.0 && v <= 1e5 {
                Ok(v as usize)
            } else {
                Err(format!("m = {v} must be a whole number in 1..=100000"))
            }
        })
        .collect::<Res<_>>()?;
    let spec = match &loss {
        LossSpec::Lp(p) if *p == 2.0 => EstimatorSpec::MinimaxL2,
        LossSpec::Lp(_) => EstimatorSpec::Empirical,
        LossSpec::FDiv(_) => EstimatorSpec::AddConstant { beta: 1.0 },
    };
    let constant = match &loss {
        LossSpec::Lp(_) => {
            calibrate_constant(&spec, &loss, k_y, &default_calibration_sizes(k_y), CalibrationMethod::Exact)
                .map_err(|e| e.to_string())?
                .constant
        }
        LossSpec::FDiv(g) => RiskConstant::f_divergence(g, k_y).map_err(|e| e.to_string())?,
    };
    let joint = JointPmf::uniform(k_x, k_y).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(ms.len());
    for m in ms {
        let n = m * ratio;
        let mut cfg = SemiSupervisedConfig::new(spec, loss.clone(), m, n)
            .trials(trials)
            .seed(seed);
        if loss.is_fdiv() {
            cfg.constraint = Some(SimplexConstraint::new(0.01).map_err(|e| e.to_string())?);
        }
        let r = mc_risk_semisupervised(&cfg, &joint).map_err(|e| e.to_string())?;
        out.push(RiskPoint {
            m,
            n,
            risk: r.mean,
            std_error: r.std_error,
            prediction: predicted_risk(&loss, k_x, k_y, m, &constant).map_err(|e| e.to_string())?,
        });
    }
    Ok(to_json(&out))
}

#[wasm_bindgen]
pub fn divergences(p: &str, q: &str) -> Result<String, JsValue> {
    divergences_json(p, q).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn mixture_curve(n: usize, p: f64, points: usize) -> Result<String, JsValue> {
    mixture_curve_json(n, p, points).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn composition_risk(
    loss: &str,
    k_x: usize,
    k_y: usize,
    m_list: &str,
    ratio: usize,
    trials: usize,
    seed: u64,
) -> Result<String, JsValue> {
    composition_risk_json(loss, k_x, k_y, m_list, ratio, trials, seed).map_err(|e| JsValue::from_str(&e))
}
