//! Browser bindings: each export takes plain arguments and returns a JSON
//! string, or throws a string describing the error.

use hyperlinear::amalgam::claim2_check;
use hyperlinear::approx::ApproxRep;
use hyperlinear::moments::{hull_membership, PairMoments};
use hyperlinear::optimizer::{brute_force_diagonal, solve, FunctionalCoeffs, SolveOptions};
use hyperlinear::words::{format, normalize_step_iv, parse};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Largest order accepted for the trace, to keep the page responsive.
const MAX_ORDER: usize = 32;
const MAX_OPT_DIM: usize = 16;

fn numbers(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad number {:?}: {e}", t.trim())))
        .collect()
}

fn pairs_json(pm: &PairMoments) -> serde_json::Value {
    let n = pm.n();
    (1..=n)
        .flat_map(|i| (i..=n).map(move |j| (i, j)))
        .map(|(i, j)| json!({"i": i, "j": j, "lambda": pm.get(i, j)}))
        .collect()
}

pub fn trace_json(word: &str, n: usize) -> Result<String, String> {
    if !(1..=MAX_ORDER).contains(&n) {
        return Err(format!("order must be between 1 and {MAX_ORDER}"));
    }
    let w = parse(word).map_err(|e| e.to_string())?;
    let normal = normalize_step_iv(&w).map_err(|e| e.to_string())?;
    let rep = ApproxRep::build(n).map_err(|e| e.to_string())?;
    let r = claim2_check(&w, &rep).map_err(|e| e.to_string())?;
    Ok(json!({
        "word": format(&w),
        "normal_form": format(&normal),
        "n": n,
        "tau_re": r.tau_re,
        "tau_im": r.tau_im,
        "abs_tau": r.abs_tau,
        "is_identity": r.is_identity,
        "a13": r.a13.satisfied,
        "wraps": r.wraps,
    })
    .to_string())
}

pub fn optimize_json(n: usize, dim: usize, coeffs: &str, restarts: usize, seed: u64) -> Result<String, String> {
    if !(1..=MAX_OPT_DIM).contains(&dim) || restarts == 0 || restarts > 64 {
        return Err(format!("need 1 ≤ dim ≤ {MAX_OPT_DIM} and 1 ≤ restarts ≤ 64"));
    }
    let a = FunctionalCoeffs::new(n, numbers(coeffs)?).map_err(|e| e.to_string())?;
    let state = solve(&a, dim, &SolveOptions { restarts, seed, ..SolveOptions::default() }).map_err(|e| e.to_string())?;
    let trajectory: Vec<f64> = state.trajectory.iter().map(|p| p.objective).collect();
    Ok(json!({
        "objective": state.objective,
        "converged": state.converged,
        "sweeps": state.sweeps,
        "moments": pairs_json(&state.moments()),
        "brute_force": brute_force_diagonal(&a, dim).ok(),
        "trajectory": trajectory,
    })
    .to_string())
}

pub fn hull_json(n: usize, lambda: &str) -> Result<String, String> {
    let pm = PairMoments::new(n, numbers(lambda)?).map_err(|e| e.to_string())?;
    let r = hull_membership(&pm).map_err(|e| e.to_string())?;
    let weights: Vec<_> = r
        .weights
        .iter()
        .map(|&(s, w)| json!({"subset": (1..=n).filter(|i| (s >> (i - 1)) & 1 == 1).collect::<Vec<_>>(), "weight": w}))
        .collect();
    Ok(json!({"member": r.member, "residual": r.residual, "weights": weights, "certificate": r.certificate}).to_string())
}

#[wasm_bindgen]
pub fn trace(word: &str, n: usize) -> Result<String, JsValue> {
    trace_json(word, n).map_err(JsValue::from)
}

#[wasm_bindgen]
pub fn optimize(n: usize, dim: usize, coeffs: &str, restarts: usize, seed: u64) -> Result<String, JsValue> {
    optimize_json(n, dim, coeffs, restarts, seed).map_err(JsValue::from)
}

#[wasm_bindgen]
pub fn hull(n: usize, lambda: &str) -> Result<String, JsValue> {
    hull_json(n, lambda).map_err(JsValue::from)
}
