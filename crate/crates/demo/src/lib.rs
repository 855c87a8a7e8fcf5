//! WebAssembly bindings behind `www/index.html`.
//!
//! Each export takes and returns JSON strings. The `*_json` functions hold the
//! logic and are plain Rust so they can be tested natively.

use crowdsense::{overlap_quality, run, task_weight, PolicyKind, ScenarioSpec};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

const POLICIES: [&str; 5] = ["diversity_ucb", "old_ucb", "epsilon_greedy:0.1", "epsilon_greedy:0.5", "random"];

/// Largest scenario the page will build, to keep the tab responsive.
const MAX_TASKS: usize = 400;
const MAX_WORKERS: usize = 60;

#[derive(Deserialize)]
#[serde(default)]
struct CurveRequest {
    kappa: f64,
    lambda: f64,
    rounds: u64,
    qualities: Vec<f64>,
    gammas: Vec<f64>,
}

impl Default for CurveRequest {
    fn default() -> Self {
        Self {
            kappa: 0.4,
            lambda: 5.0,
            rounds: 30,
            qualities: vec![0.8, 0.6, 0.5, 0.3],
            gammas: vec![0.0, 0.5, 1.0, 2.0, 5.0],
        }
    }
}

#[derive(Serialize)]
struct Curves {
    /// Weight relative to the initial weight after `m` covered rounds.
    weight: Vec<f64>,
    /// For each gamma, the combined quality of the first 1, 2, ... workers.
    overlap: Vec<OverlapSeries>,
}

#[derive(Serialize)]
struct OverlapSeries {
    gamma: f64,
    quality: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(default)]
struct CompareRequest {
    tasks: usize,
    workers: usize,
    k: usize,
    budget: f64,
    kappa: f64,
    gamma: f64,
    r: usize,
    seed: u64,
}

impl Default for CompareRequest {
    fn default() -> Self {
        Self {
            tasks: 120,
            workers: 20,
            k: 7,
            budget: 300.0,
            kappa: 0.4,
            gamma: 1.0,
            r: 2,
            seed: 0,
        }
    }
}

impl CompareRequest {
    fn spec(&self) -> Result<ScenarioSpec, String> {
        if self.tasks > MAX_TASKS || self.workers > MAX_WORKERS {
            return Err(format!("the demo is limited to {MAX_TASKS} tasks and {MAX_WORKERS} workers"));
        }
        let spec = ScenarioSpec {
            num_tasks: self.tasks,
            num_workers: self.workers,
            workers_per_round: Some(self.k),
            budget: self.budget,
            kappa: self.kappa,
            gamma: self.gamma,
            r: self.r,
            seed: self.seed,
            plane_size_m: 4000.0,
            ..Default::default()
        };
        spec.validate().map_err(|e| e.to_string())?;
        Ok(spec)
    }
}

#[derive(Serialize)]
struct PolicyOutcome {
    policy: String,
    rounds: u64,
    total_weighted_quality: f64,
    normalized_entropy: f64,
    spent: f64,
    /// Cumulative weighted quality after each round.
    cumulative: Vec<f64>,
    /// Rounds in which each task was covered.
    coverage: Vec<u64>,
}

fn parse<T: for<'de> Deserialize<'de> + Default>(request: &str) -> Result<T, String> {
    if request.trim().is_empty() {
        return Ok(T::default());
    }
    serde_json::from_str(request).map_err(|e| format!("bad request: {e}"))
}

pub fn curves_json(request: &str) -> Result<String, String> {
    let req: CurveRequest = parse(request)?;
    let weight = (0..=req.rounds)
        .map(|m| task_weight(m, 1.0, req.kappa, req.lambda))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    if req.qualities.iter().any(|q| !(0.0..=1.0).contains(q)) {
        return Err("qualities must lie in [0, 1]".into());
    }
    if req.gammas.iter().any(|g| !(*g >= 0.0)) {
        return Err("gamma must be non-negative".into());
    }
    let overlap = req
        .gammas
        .iter()
        .map(|&gamma| OverlapSeries {
            gamma,
            quality: (1..=req.qualities.len())
                .map(|n| overlap_quality(&req.qualities[..n], gamma))
                .collect(),
        })
        .collect();
    Ok(serde_json::to_string(&Curves { weight, overlap }).expect("curves serialize"))
}

fn simulate(request: &str, policies: &[&str]) -> Result<Vec<PolicyOutcome>, String> {
    let req: CompareRequest = parse(request)?;
    let scenario = req.spec()?.build().map_err(|e| e.to_string())?;
    policies
        .iter()
        .map(|name| {
            let kind: PolicyKind = name.parse().map_err(|e: crowdsense::Error| e.to_string())?;
            let res = run(&scenario, kind, req.seed).map_err(|e| e.to_string())?;
            let mut acc = 0.0;
            let cumulative = res
                .records
                .iter()
                .map(|r| {
                    acc += r.weighted_utility;
                    acc
                })
                .collect();
            Ok(PolicyOutcome {
                policy: name.to_string(),
                rounds: res.rounds,
                total_weighted_quality: res.total_weighted_quality,
                normalized_entropy: res.normalized_entropy,
                spent: res.total_cost(),
                cumulative,
                coverage: res.coverage_counts,
            })
        })
        .collect()
}

pub fn compare_json(request: &str) -> Result<String, String> {
    Ok(serde_json::to_string(&simulate(request, &POLICIES)?).expect("outcomes serialize"))
}

pub fn coverage_json(request: &str, policy: &str) -> Result<String, String> {
    let mut out = simulate(request, &[policy])?;
    Ok(serde_json::to_string(&out.remove(0)).expect("outcome serializes"))
}

/// Weight decay and overlap quality curves.
#[wasm_bindgen]
pub fn curves(request: &str) -> Result<String, JsValue> {
    curves_json(request).map_err(|e| JsValue::from_str(&e))
}

/// Runs every policy on one synthetic scenario.
#[wasm_bindgen]
pub fn compare(request: &str) -> Result<String, JsValue> {
    compare_json(request).map_err(|e| JsValue::from_str(&e))
}

/// Per-task coverage counts of a single policy.
#[wasm_bindgen]
pub fn coverage(request: &str, policy: &str) -> Result<String, JsValue> {
    coverage_json(request, policy).map_err(|e| JsValue::from_str(&e))
}
