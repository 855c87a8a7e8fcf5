//! Problem instance and the ground-truth utility model.
//!
//! A [`Scenario`] is immutable once built. Per-run mutable truth (coverage
//! counters, decayed task weights, remaining budget) lives in [`WorldState`].

use std::collections::BTreeMap;
use std::ops::Range;

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{invalid_param, Error, Result};
use crate::selection::Selection;

/// Version tag written into every serialized scenario.
pub const SCENARIO_VERSION: &str = "scenario_v1";

/// Tolerance used when checking that initial weights are normalized.
const WEIGHT_SUM_TOL: f64 = 1e-9;

/// Realized per-(worker, task) qualities of one round.
pub type RealizedQualities = BTreeMap<(usize, usize), f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: usize,
    pub initial_weight: f64,
}

/// A bundle of tasks a worker offers to perform for a fixed cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkerOption {
    pub worker_id: usize,
    pub option_id: usize,
    pub task_ids: Vec<usize>,
    pub cost: f64,
}

/// Bounded distribution of a worker's per-task sensing quality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QualityDistribution {
    /// Beta distribution parameterized by its mean and concentration `alpha + beta`.
    Beta { mean: f64, concentration: f64 },
    /// Always yields the same value.
    PointMass { value: f64 },
}

impl QualityDistribution {
    pub fn mean(&self) -> f64 {
        match *self {
            QualityDistribution::Beta { mean, .. } => mean,
            QualityDistribution::PointMass { value } => value,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            QualityDistribution::Beta {
                mean,
                concentration,
            } => {
                if !(mean > 0.0 && mean < 1.0) {
                    return Err(invalid_param("quality mean", format!("{mean} not in (0, 1)")));
                }
                if !(concentration > 0.0 && concentration.is_finite()) {
                    return Err(invalid_param(
                        "quality concentration",
                        format!("{concentration} must be positive"),
                    ));
                }
            }
            QualityDistribution::PointMass { value } => {
                if !(0.0..=1.0).contains(&value) {
                    return Err(invalid_param("quality value", format!("{value} not in [0, 1]")));
                }
            }
        }
        Ok(())
    }

    pub fn sampler(&self) -> QualitySampler {
        match *self {
            QualityDistribution::Beta {
                mean,
                concentration,
            } => QualitySampler::Beta(
                Beta::new(mean * concentration, (1.0 - mean) * concentration)
                    .expect("validated beta parameters"),
            ),
            QualityDistribution::PointMass { value } => QualitySampler::Point(value),
        }
    }
}

/// Prepared sampler for a [`QualityDistribution`].
#[derive(Debug, Clone)]
pub enum QualitySampler {
    Beta(Beta<f64>),
    Point(f64),
}

impl QualitySampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            QualitySampler::Beta(beta) => beta.sample(rng).clamp(0.0, 1.0),
            QualitySampler::Point(v) => *v,
        }
    }
}

/// Hidden per-worker truth: cost factor and quality distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkerTruth {
    pub worker_id: usize,
    pub cost_factor: f64,
    pub quality: QualityDistribution,
}

impl WorkerTruth {
    pub fn quality_mean(&self) -> f64 {
        self.quality.mean()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    /// Diversity ratio: asymptotic fraction of a task's weight after unbounded repetition.
    pub kappa: f64,
    /// Overlapping factor.
    pub gamma: f64,
    /// Decay scale of the repetition penalty.
    pub lambda: f64,
    /// Accuracy parameter: batch size and overlap-contributor cap of the greedy.
    pub r: usize,
    /// Workers recruited per round.
    pub k: usize,
    pub budget: f64,
}

impl Hyperparameters {
    fn validate(&self, num_workers: usize) -> Result<()> {
        if !(0.0..=1.0).contains(&self.kappa) {
            return Err(invalid_param("kappa", format!("{} not in [0, 1]", self.kappa)));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(invalid_param("gamma", format!("{} must be >= 0", self.gamma)));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(invalid_param("lambda", format!("{} must be > 0", self.lambda)));
        }
        if self.k == 0 || self.k > num_workers {
            return Err(invalid_param(
                "K",
                format!("{} must be in [1, N] with N = {num_workers}", self.k),
            ));
        }
        if self.r == 0 || self.r > self.k {
            return Err(invalid_param("r", format!("{} must be in [1, K = {}]", self.r, self.k)));
        }
        if !(self.budget > 0.0 && self.budget.is_finite()) {
            return Err(invalid_param("budget", format!("{} must be > 0", self.budget)));
        }
        Ok(())
    }
}

/// Serialized form of a [`Scenario`].
#[derive(Serialize, Deserialize)]
struct ScenarioRepr {
    version: String,
    tasks: Vec<Task>,
    workers: Vec<WorkerTruth>,
    options: Vec<WorkerOption>,
    hyperparameters: Hyperparameters,
    rng_seed: u64,
}

/// Immutable problem instance.
///
/// Options are stored flat, sorted by `(worker_id, option_id)`, with
/// `option_id` running `0..L_i` for each worker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScenarioRepr", into = "ScenarioRepr")]
pub struct Scenario {
    tasks: Vec<Task>,
    workers: Vec<WorkerTruth>,
    options: Vec<WorkerOption>,
    hyper: Hyperparameters,
    rng_seed: u64,
    ranges: Vec<Range<usize>>,
}

impl Scenario {
    pub fn new(
        tasks: Vec<Task>,
        workers: Vec<WorkerTruth>,
        mut options: Vec<WorkerOption>,
        hyper: Hyperparameters,
        rng_seed: u64,
    ) -> Result<Self> {
        let m = tasks.len();
        let n = workers.len();
        if m == 0 {
            return Err(Error::InvalidScenario("no tasks".into()));
        }
        if n == 0 {
            return Err(Error::InvalidScenario("no workers".into()));
        }
        for (j, task) in tasks.iter().enumerate() {
            if task.id != j {
                return Err(Error::InvalidScenario(format!("task {j} has id {}", task.id)));
            }
            if !(task.initial_weight > 0.0 && task.initial_weight <= 1.0) {
                return Err(Error::InvalidScenario(format!(
                    "task {j} initial weight {} not in (0, 1]",
                    task.initial_weight
                )));
            }
        }
        let total: f64 = tasks.iter().map(|t| t.initial_weight).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidScenario(format!(
                "initial weights sum to {total}, expected 1"
            )));
        }
        for (i, worker) in workers.iter().enumerate() {
            if worker.worker_id != i {
                return Err(Error::InvalidScenario(format!(
                    "worker {i} has id {}",
                    worker.worker_id
                )));
            }
            if !(worker.cost_factor > 0.0 && worker.cost_factor.is_finite()) {
                return Err(Error::InvalidScenario(format!(
                    "worker {i} cost factor {} must be positive",
                    worker.cost_factor
                )));
            }
            worker.quality.validate()?;
        }

        options.sort_by_key(|o| (o.worker_id, o.option_id));
        let mut ranges = vec![0..0; n];
        let mut start = 0;
        while start < options.len() {
            let worker = options[start].worker_id;
            if worker >= n {
                return Err(Error::InvalidScenario(format!(
                    "option references unknown worker {worker}"
                )));
            }
            let mut end = start;
            while end < options.len() && options[end].worker_id == worker {
                if options[end].option_id != end - start {
                    return Err(Error::InvalidScenario(format!(
                        "worker {worker} option ids are not contiguous from 0"
                    )));
                }
                end += 1;
            }
            ranges[worker] = start..end;
            start = end;
        }
        for (i, range) in ranges.iter().enumerate() {
            if range.is_empty() {
                return Err(Error::InvalidScenario(format!("worker {i} has no options")));
            }
        }
        for opt in &options {
            let mut ids = opt.task_ids.clone();
            ids.sort_unstable();
            ids.dedup();
            if ids.is_empty() || ids.len() != opt.task_ids.len() {
                return Err(Error::InvalidScenario(format!(
                    "option ({}, {}) task set is empty or has duplicates",
                    opt.worker_id, opt.option_id
                )));
            }
            if ids.last().is_some_and(|&j| j >= m) {
                return Err(Error::InvalidScenario(format!(
                    "option ({}, {}) references an unknown task",
                    opt.worker_id, opt.option_id
                )));
            }
            let expected = workers[opt.worker_id].cost_factor * opt.task_ids.len() as f64;
            if !(opt.cost > 0.0) || (opt.cost - expected).abs() > 1e-9 * expected.max(1.0) {
                return Err(Error::InvalidScenario(format!(
                    "option ({}, {}) cost {} does not equal cost factor x size = {expected}",
                    opt.worker_id, opt.option_id, opt.cost
                )));
            }
        }
        hyper.validate(n)?;

        Ok(Self {
            tasks,
            workers,
            options,
            hyper,
            rng_seed,
            ranges,
        })
    }

    /// Same instance with different hyperparameters.
    pub fn with_hyperparameters(&self, hyper: Hyperparameters) -> Result<Self> {
        hyper.validate(self.workers.len())?;
        Ok(Self {
            hyper,
            ..self.clone()
        })
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn workers(&self) -> &[WorkerTruth] {
        &self.workers
    }

    /// All options, sorted by `(worker_id, option_id)`.
    pub fn options(&self) -> &[WorkerOption] {
        &self.options
    }

    pub fn options_of(&self, worker: usize) -> &[WorkerOption] {
        &self.options[self.ranges[worker].clone()]
    }

    pub fn option(&self, worker: usize, option: usize) -> Option<&WorkerOption> {
        self.options_of(worker).get(option)
    }

    /// Position of `(worker, option)` in [`Scenario::options`].
    pub fn option_index(&self, worker: usize, option: usize) -> usize {
        self.ranges[worker].start + option
    }

    pub fn hyper(&self) -> &Hyperparameters {
        &self.hyper
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn num_tasks(&self) -> usize {
        self.tasks.len()
    }

    pub fn num_workers(&self) -> usize {
        self.workers.len()
    }

    /// `L`: the largest number of options any worker offers.
    pub fn max_options(&self) -> usize {
        self.ranges.iter().map(|r| r.len()).max().unwrap_or(0)
    }

    pub fn initial_weights(&self) -> Vec<f64> {
        self.tasks.iter().map(|t| t.initial_weight).collect()
    }

    pub fn quality_means(&self) -> Vec<f64> {
        self.workers.iter().map(|w| w.quality_mean()).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

impl TryFrom<ScenarioRepr> for Scenario {
    type Error = Error;

    fn try_from(repr: ScenarioRepr) -> Result<Self> {
        if repr.version != SCENARIO_VERSION {
            return Err(Error::InvalidScenario(format!(
                "unsupported version `{}`, expected `{SCENARIO_VERSION}`",
                repr.version
            )));
        }
        Scenario::new(
            repr.tasks,
            repr.workers,
            repr.options,
            repr.hyperparameters,
            repr.rng_seed,
        )
    }
}

impl From<Scenario> for ScenarioRepr {
    fn from(s: Scenario) -> Self {
        ScenarioRepr {
            version: SCENARIO_VERSION.to_string(),
            tasks: s.tasks,
            workers: s.workers,
            options: s.options,
            hyperparameters: s.hyper,
            rng_seed: s.rng_seed,
        }
    }
}

/// Mutable per-run truth.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    /// Number of rounds in which each task was covered.
    pub coverage_counts: Vec<u64>,
    /// Decayed weight of each task for the current round.
    pub current_weights: Vec<f64>,
    pub remaining_budget: f64,
    /// Rounds played so far.
    pub round: u64,
    pub cumulative_utility: f64,
}

impl WorldState {
    pub fn new(scenario: &Scenario) -> Self {
        Self {
            coverage_counts: vec![0; scenario.num_tasks()],
            current_weights: scenario.initial_weights(),
            remaining_budget: scenario.hyper().budget,
            round: 0,
            cumulative_utility: 0.0,
        }
    }
}

/// Decayed weight of a task covered in `coverage_count` earlier rounds.
pub fn task_weight(coverage_count: u64, initial_weight: f64, kappa: f64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(invalid_param("lambda", format!("{lambda} must be > 0")));
    }
    if !(0.0..=1.0).contains(&kappa) {
        return Err(invalid_param("kappa", format!("{kappa} not in [0, 1]")));
    }
    if !(initial_weight > 0.0) {
        return Err(invalid_param("initial_weight", format!("{initial_weight} must be > 0")));
    }
    Ok(decayed_weight(coverage_count, initial_weight, kappa, lambda))
}

#[inline]
pub(crate) fn decayed_weight(m: u64, w1: f64, kappa: f64, lambda: f64) -> f64 {
    ((1.0 - kappa) * (-(m as f64) / lambda).exp() + kappa) * w1
}

/// Increments the coverage counter of every task covered by the selection
/// (once per round, however many workers cover it) and refreshes the weights.
pub fn update_coverage(scenario: &Scenario, selection: &Selection, world: &mut WorldState) {
    let mut covered = vec![false; scenario.num_tasks()];
    for &(w, o) in &selection.chosen {
        for &j in &scenario.options_of(w)[o].task_ids {
            covered[j] = true;
        }
    }
    let h = scenario.hyper();
    for (j, hit) in covered.into_iter().enumerate() {
        if hit {
            world.coverage_counts[j] += 1;
            world.current_weights[j] = decayed_weight(
                world.coverage_counts[j],
                scenario.tasks()[j].initial_weight,
                h.kappa,
                h.lambda,
            );
        }
    }
}

/// Completion quality of a task sensed by several workers in one round:
/// interpolates between the best single quality (`gamma = 0`) and the sum
/// (`gamma -> inf`).
///
/// Panics on an empty slice; an uncovered task contributes nothing and is
/// handled by the caller.
pub fn overlap_quality(qualities: &[f64], gamma: f64) -> f64 {
    assert!(!qualities.is_empty(), "overlap_quality needs at least one coverer");
    let max = qualities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = qualities.iter().sum();
    (max + gamma * sum) / (1.0 + gamma)
}

/// Realized weighted completion quality of a round under the current weights.
pub fn round_utility(
    scenario: &Scenario,
    selection: &Selection,
    realized: &RealizedQualities,
    world: &WorldState,
) -> f64 {
    let mut per_task: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for &(w, o) in &selection.chosen {
        for &j in &scenario.options_of(w)[o].task_ids {
            let q = *realized
                .get(&(w, j))
                .unwrap_or_else(|| panic!("missing realized quality for worker {w} task {j}"));
            per_task.entry(j).or_default().push(q);
        }
    }
    let gamma = scenario.hyper().gamma;
    per_task
        .iter()
        .map(|(&j, qs)| world.current_weights[j] * overlap_quality(qs, gamma))
        .sum()
}
