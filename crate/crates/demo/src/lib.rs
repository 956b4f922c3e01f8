//! Browser bindings. Each exported function returns a JSON string; the plain
//! Rust functions underneath are what the native tests exercise.

use aggdp::bound::audit;
use aggdp::generators::{coarse_grid_aggregation, counterexample, gridworld};
use aggdp::io::round12;
use serde::Serialize;
use wasm_bindgen::prelude::*;

const TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleView {
    pub alpha: f64,
    pub delta: f64,
    pub j_star: Vec<f64>,
    pub r_star: Vec<f64>,
    pub j_tilde: Vec<f64>,
    pub epsilon: f64,
    pub bound: f64,
    pub actual_error: f64,
    pub condition_holds: bool,
    pub bound_satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub delta: f64,
    pub epsilon: f64,
    pub bound: f64,
    pub actual_error: f64,
    pub condition_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoarseGridView {
    pub j_star: Vec<f64>,
    pub j_tilde: Vec<f64>,
    /// 1-based cells used as representative states.
    pub representatives: Vec<usize>,
    pub epsilon: f64,
    pub bound: f64,
    pub actual_error: f64,
}

fn rounded(values: &[f64]) -> Vec<f64> {
    values.iter().copied().map(round12).collect()
}

pub fn counterexample_view(alpha: f64, delta: f64) -> Result<CounterexampleView, String> {
    let (mdp, arch) = counterexample(alpha, delta).map_err(|e| e.to_string())?;
    let a = audit(&mdp, &arch, TOL).map_err(|e| e.to_string())?;
    Ok(CounterexampleView {
        alpha,
        delta,
        j_star: rounded(&a.j_star),
        r_star: rounded(&a.r_star),
        j_tilde: rounded(&a.j_tilde),
        epsilon: round12(a.epsilon),
        bound: round12(a.bound),
        actual_error: round12(a.actual_error),
        condition_holds: a.condition_holds,
        bound_satisfied: a.bound_satisfied,
    })
}

/// Audits the counterexample at `steps + 1` evenly spaced values of delta in
/// `[0, 1]`.
pub fn sweep(alpha: f64, steps: usize) -> Result<Vec<SweepRow>, String> {
    if steps == 0 {
        return Err("steps must be positive".into());
    }
    (0..=steps)
        .map(|k| {
            let v = counterexample_view(alpha, k as f64 / steps as f64)?;
            Ok(SweepRow {
                delta: round12(v.delta),
                epsilon: v.epsilon,
                bound: v.bound,
                actual_error: v.actual_error,
                condition_holds: v.condition_holds,
            })
        })
        .collect()
}

/// A `1 x width` corridor with the target at the right end, approximated by
/// linear interpolation between representative cells `spacing` apart.
pub fn coarse_grid_view(
    width: usize,
    alpha: f64,
    noise: f64,
    spacing: usize,
) -> Result<CoarseGridView, String> {
    if width == 0 {
        return Err("width must be positive".into());
    }
    let mdp = gridworld(width, 1, alpha, noise, (width - 1, 0)).map_err(|e| e.to_string())?;
    let arch = coarse_grid_aggregation(width, 1, spacing).map_err(|e| e.to_string())?;
    let a = audit(&mdp, &arch, TOL).map_err(|e| e.to_string())?;
    let representatives = (0..arch.num_aggregate())
        .map(|x| arch.disaggregation_row(x)[0].0 + 1)
        .collect();
    Ok(CoarseGridView {
        j_star: rounded(&a.j_star),
        j_tilde: rounded(&a.j_tilde),
        representatives,
        epsilon: round12(a.epsilon),
        bound: round12(a.bound),
        actual_error: round12(a.actual_error),
    })
}

fn to_js<T: Serialize>(value: Result<T, String>) -> Result<String, JsError> {
    let value = value.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = auditCounterexample)]
pub fn audit_counterexample(alpha: f64, delta: f64) -> Result<String, JsError> {
    to_js(counterexample_view(alpha, delta))
}

#[wasm_bindgen(js_name = sweepDelta)]
pub fn sweep_delta(alpha: f64, steps: usize) -> Result<String, JsError> {
    to_js(sweep(alpha, steps))
}

#[wasm_bindgen(js_name = coarseGrid)]
pub fn coarse_grid(
    width: usize,
    alpha: f64,
    noise: f64,
    spacing: usize,
) -> Result<String, JsError> {
    to_js(coarse_grid_view(width, alpha, noise, spacing))
}
