use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Scenario;

/// Options recruited in one round: at most one `(worker_id, option_id)`
/// pair per worker, kept sorted by worker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub chosen: Vec<(usize, usize)>,
    pub total_cost: f64,
}

impl Selection {
    pub fn empty() -> Self {
        Self {
            chosen: Vec::new(),
            total_cost: 0.0,
        }
    }

    /// Validates the pairs against the scenario and sums their costs.
    pub fn new(scenario: &Scenario, mut chosen: Vec<(usize, usize)>) -> Result<Self> {
        chosen.sort_unstable();
        for pair in chosen.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::InvalidScenario(format!(
                    "worker {} selected more than once",
                    pair[0].0
                )));
            }
        }
        let mut total_cost = 0.0;
        for &(w, o) in &chosen {
            if w >= scenario.num_workers() {
                return Err(Error::InvalidScenario(format!("unknown worker {w}")));
            }
            let opt = scenario
                .option(w, o)
                .ok_or_else(|| Error::InvalidScenario(format!("worker {w} has no option {o}")))?;
            total_cost += opt.cost;
        }
        Ok(Self { chosen, total_cost })
    }

    /// Builds from pairs already known to be valid for `scenario`.
    pub(crate) fn from_valid(scenario: &Scenario, mut chosen: Vec<(usize, usize)>) -> Self {
        chosen.sort_unstable();
        let total_cost = chosen
            .iter()
            .map(|&(w, o)| scenario.options_of(w)[o].cost)
            .sum();
        Self { chosen, total_cost }
    }

    pub fn len(&self) -> usize {
        self.chosen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chosen.is_empty()
    }

    pub fn contains_worker(&self, worker: usize) -> bool {
        self.chosen.binary_search_by_key(&worker, |&(w, _)| w).is_ok()
    }

    /// Every distinct task covered by the selection, ascending.
    pub fn covered_tasks(&self, scenario: &Scenario) -> Vec<usize> {
        let mut tasks: Vec<usize> = self
            .chosen
            .iter()
            .flat_map(|&(w, o)| scenario.options_of(w)[o].task_ids.iter().copied())
            .collect();
        tasks.sort_unstable();
        tasks.dedup();
        tasks
    }

    /// At most one option per worker and exactly `k` workers.
    pub fn is_feasible(&self, k: usize) -> bool {
        self.chosen.len() == k && self.chosen.windows(2).all(|p| p[0].0 < p[1].0)
    }
}
