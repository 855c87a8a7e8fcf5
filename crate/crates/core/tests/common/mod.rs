#![allow(dead_code)]

use crowdsense::rng::stream;
use crowdsense::{Hyperparameters, QualityDistribution, Scenario, Task, WorkerOption, WorkerTruth};
use rand::seq::index;
use rand::Rng;

/// Shape limits for random enumerable instances.
#[derive(Clone, Copy)]
pub struct Limits {
    pub max_workers: usize,
    pub max_options: usize,
    pub max_tasks: usize,
    pub max_k: usize,
}

pub const SMALL: Limits = Limits {
    max_workers: 6,
    max_options: 2,
    max_tasks: 8,
    max_k: 3,
};

/// Random instance with Beta qualities, costs `eps_i * |tasks|` and normalized weights.
pub fn random_instance(seed: u64, lim: Limits) -> Scenario {
    let mut rng = stream(seed, 0xfeed, &[]);
    let n = rng.random_range(2..=lim.max_workers);
    let m = rng.random_range(2..=lim.max_tasks);
    let k = rng.random_range(1..=lim.max_k.min(n));
    let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.01..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let tasks = raw
        .iter()
        .enumerate()
        .map(|(id, w)| Task {
            id,
            initial_weight: w / total,
        })
        .collect();
    let mut workers = Vec::new();
    let mut options = Vec::new();
    for i in 0..n {
        let eps: f64 = rng.random_range(0.01..1.0);
        workers.push(WorkerTruth {
            worker_id: i,
            cost_factor: eps,
            quality: QualityDistribution::Beta {
                mean: rng.random_range(0.05..0.95),
                concentration: 4.0,
            },
        });
        for l in 0..rng.random_range(1..=lim.max_options) {
            let size = rng.random_range(1..=m);
            let mut ids = index::sample(&mut rng, m, size).into_vec();
            ids.sort_unstable();
            options.push(WorkerOption {
                worker_id: i,
                option_id: l,
                cost: eps * size as f64,
                task_ids: ids,
            });
        }
    }
    let hyper = Hyperparameters {
        kappa: 0.4,
        gamma: 1.0,
        lambda: 5.0,
        r: k,
        k,
        budget: 100.0,
    };
    Scenario::new(tasks, workers, options, hyper, seed).expect("valid instance")
}

/// Objective value written out directly from its definition: for every task,
/// the coverers' values sorted descending, max plus gamma times the top-`r` sum.
pub fn naive_value(
    scenario: &Scenario,
    pairs: &[(usize, usize)],
    weights: &[f64],
    values: &[f64],
    gamma: f64,
    r: usize,
) -> f64 {
    let mut total = 0.0;
    for j in 0..scenario.num_tasks() {
        let mut qs: Vec<f64> = pairs
            .iter()
            .filter(|&&(w, o)| scenario.options_of(w)[o].task_ids.contains(&j))
            .map(|&(w, _)| values[w])
            .collect();
        if qs.is_empty() {
            continue;
        }
        qs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let top: f64 = qs.iter().take(r).sum();
        total += weights[j] * (qs[0] + gamma * top) / (1.0 + gamma);
    }
    total
}

/// Every `K`-subset of workers with every option assignment, as pair lists.
pub fn all_selections(scenario: &Scenario, k: usize) -> Vec<Vec<(usize, usize)>> {
    fn rec(s: &Scenario, k: usize, start: usize, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for w in start..s.num_workers() {
            for o in 0..s.options_of(w).len() {
                cur.push((w, o));
                rec(s, k, w + 1, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(scenario, k, 0, &mut Vec::new(), &mut out);
    out
}

pub fn cost_of(scenario: &Scenario, pairs: &[(usize, usize)]) -> f64 {
    pairs.iter().map(|&(w, o)| scenario.options_of(w)[o].cost).sum()
}
