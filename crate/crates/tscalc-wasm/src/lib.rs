//! Browser bindings: thin JSON-in/JSON-out wrappers over the core engine
//! for the static demo page in `www/`. The `*_impl` functions carry the
//! logic with plain string errors so they also run (and test) on the host;
//! the exported wrappers convert errors to JS exceptions.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use tscalc::monomials::{MonomialKind, MonomialTable};
use tscalc::oscillation::{
    conclude, criterion_windows, divergence_check, threshold_closed_form, ExampleId,
    ExampleParams, Verdict,
};
use tscalc::scale::{GridWindow, TimeScale};
use tscalc::simulate::{example_spec, step_ivp};

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn build_scale(kind: &str, step_or_ratio: f64, anchor: f64) -> Result<TimeScale, String> {
    match kind {
        "uniform" => TimeScale::uniform(step_or_ratio, anchor).map_err(err),
        "geometric" => TimeScale::geometric(step_or_ratio, anchor).map_err(err),
        other => Err(format!(
            "unknown scale kind {other:?}; expected uniform or geometric"
        )),
    }
}

#[derive(Serialize)]
struct Curve {
    k: usize,
    values: Vec<f64>,
}

#[derive(Serialize)]
struct CurveSet {
    t: Vec<f64>,
    curves: Vec<Curve>,
}

fn monomial_curves_impl(
    kind: &str,
    step_or_ratio: f64,
    anchor: f64,
    max_k: usize,
    points: usize,
    shifted: bool,
) -> Result<String, String> {
    if !(1..=12).contains(&max_k) {
        return Err("max_k must lie in 1..=12".into());
    }
    if !(2..=4096).contains(&points) {
        return Err("points must lie in 2..=4096".into());
    }
    let ts = build_scale(kind, step_or_ratio, anchor)?;
    let window = GridWindow::new(ts, 0, points as i64 - 1).map_err(err)?;
    let family = if shifted { MonomialKind::G } else { MonomialKind::H };
    let table = MonomialTable::first_arg(&window, 0, max_k, family).map_err(err)?;
    let curves = (0..=max_k)
        .map(|k| {
            Ok(Curve {
                k,
                values: table.row(k).map_err(err)?.to_vec(),
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    let set = CurveSet {
        t: window.points().collect(),
        curves,
    };
    serde_json::to_string(&set).map_err(err)
}

/// Generalized monomial curves `m_k(t, t0)` for k = 0..=max_k over `points`
/// grid points; `shifted` selects the sigma-shifted family.
#[wasm_bindgen]
pub fn monomial_curves(
    kind: &str,
    step_or_ratio: f64,
    anchor: f64,
    max_k: usize,
    points: usize,
    shifted: bool,
) -> Result<String, JsError> {
    monomial_curves_impl(kind, step_or_ratio, anchor, max_k, points, shifted)
        .map_err(|e| JsError::new(&e))
}

#[derive(Serialize)]
struct CriterionOut {
    threshold_lhs: f64,
    threshold_rhs: f64,
    threshold_satisfied: bool,
    liminf: serde_json::Value,
    limsup: serde_json::Value,
    divergence: String,
    conclusion: String,
    notes: Vec<String>,
}

fn enum_str(v: impl Serialize) -> Result<String, String> {
    Ok(serde_json::to_value(v)
        .map_err(err)?
        .as_str()
        .unwrap_or("inconclusive")
        .to_string())
}

fn q_criterion_impl(
    q: f64,
    n: usize,
    b0: f64,
    beta0: f64,
    depth: i64,
    gamma: f64,
) -> Result<String, String> {
    if !(4..=200).contains(&depth) {
        return Err("depth must lie in 4..=200".into());
    }
    let params = ExampleParams {
        n,
        q,
        b0,
        beta0,
        ..ExampleParams::default()
    };
    let threshold = threshold_closed_form(ExampleId::QDifference, &params).map_err(err)?;
    let (spec, _) = example_spec(ExampleId::QDifference, &params, 0.0).map_err(err)?;
    let i0 = spec.scale.index_of(spec.t0).map_err(err)?;
    let window = GridWindow::new(spec.scale.clone(), i0, i0 + depth).map_err(err)?;
    let (liminf, limsup) = criterion_windows(&spec, gamma, &window).map_err(err)?;
    let divergence = divergence_check(&spec, &window).map_err(err)?;
    let satisfied = liminf.verdict == Verdict::Satisfied && limsup.verdict == Verdict::Satisfied;
    let conclusion = conclude(spec.n, spec.range_tag, satisfied, divergence.verdict);
    let out = CriterionOut {
        threshold_lhs: threshold.lhs,
        threshold_rhs: threshold.rhs,
        threshold_satisfied: threshold.satisfied,
        liminf: serde_json::to_value(&liminf).map_err(err)?,
        limsup: serde_json::to_value(&limsup).map_err(err)?,
        divergence: enum_str(divergence.verdict)?,
        conclusion: enum_str(conclusion.conclusion)?,
        notes: conclusion.notes,
    };
    serde_json::to_string(&out).map_err(err)
}

/// Oscillation criteria for the q-grid example: closed-form threshold,
/// both window averages with their traces, and the combined verdict.
#[wasm_bindgen]
pub fn q_criterion(
    q: f64,
    n: usize,
    b0: f64,
    beta0: f64,
    depth: i64,
    gamma: f64,
) -> Result<String, JsError> {
    q_criterion_impl(q, n, b0, beta0, depth, gamma).map_err(|e| JsError::new(&e))
}

#[derive(Serialize)]
struct SimOut {
    t: Vec<f64>,
    x: Vec<f64>,
    z: Vec<f64>,
    sign_changes: usize,
    trend: serde_json::Value,
    snap_events: usize,
}

fn simulate_example_impl(
    example: &str,
    n: usize,
    q: f64,
    a0: f64,
    b0: f64,
    beta0: f64,
    horizon: usize,
) -> Result<String, String> {
    let id = ExampleId::parse(example).map_err(err)?;
    if !(8..=20000).contains(&horizon) {
        return Err("horizon must lie in 8..=20000".into());
    }
    let params = ExampleParams {
        n,
        q,
        a0,
        b0,
        beta0,
        ..ExampleParams::default()
    };
    let (spec, init) = example_spec(id, &params, 0.01).map_err(err)?;
    let trace = step_ivp(&spec, &init, horizon).map_err(err)?;
    let out = SimOut {
        t: trace.x.window().points().collect(),
        x: trace.x.values().to_vec(),
        z: trace.z.values().to_vec(),
        sign_changes: trace.sign_changes,
        trend: serde_json::to_value(trace.trend).map_err(err)?,
        snap_events: trace.snap_events,
    };
    serde_json::to_string(&out).map_err(err)
}

/// Step one worked example forward and return the solution trace.
#[wasm_bindgen]
pub fn simulate_example(
    example: &str,
    n: usize,
    q: f64,
    a0: f64,
    b0: f64,
    beta0: f64,
    horizon: usize,
) -> Result<String, JsError> {
    simulate_example_impl(example, n, q, a0, b0, beta0, horizon).map_err(|e| JsError::new(&e))
}
