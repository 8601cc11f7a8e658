//! Browser bindings: three small computations, each returning a JSON string
//! for the static page in `www/`. Everything runs on one thread.

use ising_rc::bounds::decay_rate_bound;
use ising_rc::estimators::{estimate_rdm, exact_ground_rdm, exact_thermal_rdm, SlitRun};
use ising_rc::percolation::estimate_connectivity;
use ising_rc::quantum_oracle::entropy;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

// Keeps the page responsive; the exact solver handles more.
const MAX_DEMO_SITES: u32 = 12;
const MAX_DEMO_SWEEPS: u32 = 200_000;

fn finish(r: Result<Value, String>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

fn text<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Exact ground-state reduced state of the block of length L + 1 in a chain
/// of 2m + L + 1 sites at λ = θ, δ = 1: spectrum and entropy.
#[wasm_bindgen]
pub fn exact_entropy(theta: f64, m: u32, l: u32) -> Result<String, JsError> {
    finish(exact_entropy_json(theta, m, l))
}

pub fn exact_entropy_json(theta: f64, m: u32, l: u32) -> Result<Value, String> {
    if 2 * m + l + 1 > MAX_DEMO_SITES {
        return Err(format!("2m + L + 1 must be at most {MAX_DEMO_SITES}"));
    }
    let (rho, gap) = exact_ground_rdm(m, l, theta, 1.0).map_err(text)?;
    Ok(json!({ "spectrum": rho.spectrum().values, "entropy": entropy(&rho), "gap": gap }))
}

/// Frequency of the unit time segment at the origin reaching the boundary of
/// the box of radius m, next to the branching lower bound on its decay rate.
#[wasm_bindgen]
pub fn connectivity(lambda: f64, delta: f64, m_max: u32, trials: u32, seed: u32) -> Result<String, JsError> {
    finish(connectivity_json(lambda, delta, m_max, trials, seed))
}

pub fn connectivity_json(lambda: f64, delta: f64, m_max: u32, trials: u32, seed: u32) -> Result<Value, String> {
    if !(1..=20).contains(&m_max) {
        return Err("m must be between 1 and 20".into());
    }
    let rows: Vec<Value> = (1..=m_max)
        .map(|m| {
            estimate_connectivity(lambda, delta, m, u64::from(trials), u64::from(seed) ^ u64::from(m) << 32)
                .map(|e| json!({ "m": m, "p": e.p, "se": e.se }))
                .map_err(text)
        })
        .collect::<Result<_, _>>()?;
    let bound = decay_rate_bound(lambda, delta).ok().map(|b| b.gamma_lower);
    Ok(json!({ "rows": rows, "gamma_lower": bound }))
}

/// Monte Carlo slit-box estimate of the thermal reduced state against the
/// exact one, entry by entry.
#[wasm_bindgen]
pub fn rdm_check(theta: f64, m: u32, l: u32, beta: f64, sweeps: u32, seed: u32) -> Result<String, JsError> {
    finish(rdm_check_json(theta, m, l, beta, sweeps, seed))
}

pub fn rdm_check_json(theta: f64, m: u32, l: u32, beta: f64, sweeps: u32, seed: u32) -> Result<Value, String> {
    if 2 * m + l + 1 > MAX_DEMO_SITES || l > 3 {
        return Err(format!("need L ≤ 3 and 2m + L + 1 ≤ {MAX_DEMO_SITES}"));
    }
    if sweeps > MAX_DEMO_SWEEPS {
        return Err(format!("at most {MAX_DEMO_SWEEPS} sweeps"));
    }
    let run = SlitRun {
        sweeps: u64::from(sweeps),
        burn_in: Some(u64::from(sweeps / 10)),
        chains: 2,
        seed: u64::from(seed),
        workers: 1,
        ..SlitRun::new(m, l, beta, theta, 1.0)
    };
    let est = estimate_rdm(&run).map_err(text)?;
    let exact = exact_thermal_rdm(m, l, beta, theta, 1.0).map_err(text)?;
    let d = est.dim();
    let entries: Vec<Value> = (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .map(|(i, j)| json!({ "i": i, "j": j, "mc": est.rho.get(i, j), "se": est.se.get(i, j), "exact": exact.get(i, j) }))
        .collect();
    Ok(json!({
        "entries": entries,
        "entropy": est.entropy,
        "entropy_se": est.entropy_se,
        "exact_entropy": entropy(&exact),
        "max_z": est.max_z(exact.operator()),
    }))
}
