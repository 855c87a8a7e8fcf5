//! Optimistic overlap-aware utility `U_r` of a candidate selection.
//!
//! Per task, the coverers' values `v` enter as `(max(v) + gamma * top_r(v)) / (1 + gamma)`,
//! where `top_r` sums only the `r` largest values. With `r >= K` this is the
//! exact overlap quality; with `r = 1` overlaps add nothing beyond the best coverer.

use crate::bandit::BanditState;
use crate::model::Scenario;

/// Stand-in for an infinite UCB index so that gain arithmetic stays finite.
pub const UNEXPLORED_VALUE: f64 = 1e6;

/// Task weights and per-worker values against which selections are scored.
#[derive(Debug, Clone)]
pub struct Objective {
    pub weights: Vec<f64>,
    /// Value of each worker on any task it covers (UCB index or true mean).
    pub values: Vec<f64>,
    pub gamma: f64,
    pub r: usize,
}

impl Objective {
    pub fn new(weights: Vec<f64>, values: Vec<f64>, gamma: f64, r: usize) -> Self {
        let values = values
            .into_iter()
            .map(|v| if v.is_finite() { v } else { UNEXPLORED_VALUE })
            .collect();
        Self {
            weights,
            values,
            gamma,
            r: r.max(1),
        }
    }

    /// UCB objective of the learner for the given task weights.
    pub fn ucb(state: &BanditState, weights: Vec<f64>, scenario: &Scenario, r: usize) -> Self {
        let k = scenario.hyper().k;
        let values = (0..scenario.num_workers())
            .map(|i| state.ucb_quality(i, k))
            .collect();
        Self::new(weights, values, scenario.hyper().gamma, r)
    }

    /// Scores `pairs` from scratch by gathering every task's coverers.
    pub fn evaluate(&self, scenario: &Scenario, pairs: &[(usize, usize)]) -> f64 {
        let mut per_task: Vec<Vec<f64>> = vec![Vec::new(); scenario.num_tasks()];
        for &(w, o) in pairs {
            for &j in &scenario.options_of(w)[o].task_ids {
                per_task[j].push(self.values[w]);
            }
        }
        per_task
            .iter_mut()
            .enumerate()
            .filter(|(_, vs)| !vs.is_empty())
            .map(|(j, vs)| {
                vs.sort_unstable_by(|a, b| b.total_cmp(a));
                vs.truncate(self.r);
                self.weights[j] * top_value(vs, self.gamma)
            })
            .sum()
    }
}

/// Value of a task given its (descending, already truncated) top contributors.
#[inline]
pub(crate) fn top_value(top: &[f64], gamma: f64) -> f64 {
    match top.first() {
        None => 0.0,
        Some(&max) => (max + gamma * top.iter().sum::<f64>()) / (1.0 + gamma),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::{hyper, toy_scenario};

    #[test]
    fn single_worker_collapses_to_weighted_value() {
        let s = toy_scenario(&[0.2, 0.3, 0.5], &[vec![vec![0, 2]]], &[0.5], hyper(1, 1));
        let obj = Objective::new(vec![0.2, 0.3, 0.5], vec![0.9], 1.0, 1);
        assert!((obj.evaluate(&s, &[(0, 0)]) - 0.7 * 0.9).abs() < 1e-12);
    }

    #[test]
    fn truncation_keeps_largest_contributors() {
        let s = toy_scenario(
            &[1.0],
            &[vec![vec![0]], vec![vec![0]], vec![vec![0]]],
            &[0.5; 3],
            hyper(3, 2),
        );
        let pairs = [(0, 0), (1, 0), (2, 0)];
        let r2 = Objective::new(vec![1.0], vec![0.9, 0.8, 0.7], 1.0, 2);
        assert!((r2.evaluate(&s, &pairs) - 1.3).abs() < 1e-12);
        let r3 = Objective::new(vec![1.0], vec![0.9, 0.8, 0.7], 1.0, 3);
        assert!((r3.evaluate(&s, &pairs) - (0.9 + 2.4) / 2.0).abs() < 1e-12);
        let r1 = Objective::new(vec![1.0], vec![0.9, 0.8, 0.7], 1.0, 1);
        assert!((r1.evaluate(&s, &pairs) - 0.9).abs() < 1e-12);
    }

    #[test]
    fn infinite_values_are_capped() {
        let obj = Objective::new(vec![1.0], vec![f64::INFINITY, 0.5], 1.0, 1);
        assert_eq!(obj.values[0], UNEXPLORED_VALUE);
    }
}
