//! Learner statistics, the UCB quality index and the selection entry points.

use crate::error::{Error, Result};
use crate::exhaustive::brute_force_best;
use crate::greedy::greedy_fill;
use crate::model::{RealizedQualities, Scenario, WorldState};
use crate::objective::Objective;
use crate::selection::Selection;

/// What the learner knows about worker qualities.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditState {
    /// Times each option was chosen, indexed `[worker][option]`.
    pub option_counts: Vec<Vec<u64>>,
    /// Quality samples observed per worker.
    pub sample_counts: Vec<u64>,
    /// Running mean of observed qualities per worker.
    pub quality_means: Vec<f64>,
    pub total_samples: u64,
}

impl BanditState {
    pub fn new(scenario: &Scenario) -> Self {
        let n = scenario.num_workers();
        Self {
            option_counts: (0..n)
                .map(|i| vec![0; scenario.options_of(i).len()])
                .collect(),
            sample_counts: vec![0; n],
            quality_means: vec![0.0; n],
            total_samples: 0,
        }
    }

    /// Folds one round of observed qualities into the counters and means.
    ///
    /// Every selected option must have a quality for each of its tasks;
    /// qualities outside `[0, 1]` are rejected before anything is updated.
    pub fn record_round(
        &mut self,
        scenario: &Scenario,
        selection: &Selection,
        realized: &RealizedQualities,
    ) -> Result<()> {
        let mut sums = Vec::with_capacity(selection.len());
        for &(w, o) in &selection.chosen {
            let opt = &scenario.options_of(w)[o];
            let mut sum = 0.0;
            for &j in &opt.task_ids {
                let q = *realized.get(&(w, j)).ok_or_else(|| {
                    Error::InvalidScenario(format!("no realized quality for worker {w} task {j}"))
                })?;
                if !(0.0..=1.0).contains(&q) {
                    return Err(Error::QualityOutOfRange {
                        worker: w,
                        task: j,
                        value: q,
                    });
                }
                sum += q;
            }
            sums.push((w, o, sum, opt.task_ids.len() as u64));
        }
        for (w, o, sum, size) in sums {
            let n = self.sample_counts[w];
            self.quality_means[w] = (self.quality_means[w] * n as f64 + sum) / (n + size) as f64;
            self.sample_counts[w] = n + size;
            self.option_counts[w][o] += 1;
            self.total_samples += size;
        }
        Ok(())
    }

    /// Optimistic quality index `mean + sqrt((K + 1) ln(total) / n_i)`;
    /// infinite for a worker that has never been observed.
    pub fn ucb_quality(&self, worker: usize, k: usize) -> f64 {
        let n = self.sample_counts[worker];
        if n == 0 {
            return f64::INFINITY;
        }
        let total = self.total_samples.max(1) as f64;
        self.quality_means[worker] + ((k as f64 + 1.0) * total.ln() / n as f64).sqrt()
    }
}

/// `U_r` of a candidate under the learner's UCB indices and current weights.
pub fn ucb_round_utility(
    candidate: &Selection,
    state: &BanditState,
    world: &WorldState,
    scenario: &Scenario,
    r: usize,
) -> f64 {
    Objective::ucb(state, world.current_weights.clone(), scenario, r).evaluate(scenario, &candidate.chosen)
}

/// Budgeted, batch-greedy UCB selection for the next round; `None` once the
/// remaining budget cannot fund `K` workers.
pub fn greedy_select(state: &BanditState, world: &WorldState, scenario: &Scenario) -> Option<Selection> {
    let h = scenario.hyper();
    let objective = Objective::ucb(state, world.current_weights.clone(), scenario, h.r);
    greedy_fill(scenario, &objective, world.remaining_budget, h.k)
}

/// Exact maximizer of `U` (all overlaps counted) among affordable `K`-selections.
pub fn brute_force_select(
    state: &BanditState,
    world: &WorldState,
    scenario: &Scenario,
) -> Result<Option<Selection>> {
    let h = scenario.hyper();
    let objective = Objective::ucb(state, world.current_weights.clone(), scenario, h.k);
    Ok(brute_force_best(scenario, &objective, world.remaining_budget, h.k)?.map(|(s, _)| s))
}

/// Fresh learner plus the bootstrap rounds that observe every worker once.
///
/// Workers are taken in index order with option 0, `K` per round; the last
/// round is padded with the lowest-index workers not already in it.
pub fn initialize_rounds(scenario: &Scenario) -> (BanditState, Vec<Selection>) {
    let n = scenario.num_workers();
    let k = scenario.hyper().k;
    let mut rounds = Vec::with_capacity(n.div_ceil(k));
    let mut next = 0;
    while next < n {
        let mut workers: Vec<usize> = (next..(next + k).min(n)).collect();
        next += k;
        let mut pad = 0;
        while workers.len() < k {
            if !workers.contains(&pad) {
                workers.push(pad);
            }
            pad += 1;
        }
        let pairs = workers.into_iter().map(|w| (w, 0)).collect();
        rounds.push(Selection::from_valid(scenario, pairs));
    }
    (BanditState::new(scenario), rounds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::{hyper, toy_scenario};

    fn scenario_n(n: usize, k: usize) -> Scenario {
        let opts: Vec<Vec<Vec<usize>>> = (0..n).map(|i| vec![vec![i % 4], vec![0, 1, 2]]).collect();
        toy_scenario(&[0.25; 4], &opts, &vec![0.5; n], hyper(k, 1))
    }

    #[test]
    fn running_mean_examples() {
        let s = toy_scenario(
            &[0.2; 5],
            &[vec![vec![0, 1], vec![2, 3, 4]], vec![vec![0]]],
            &[0.5, 0.5],
            hyper(1, 1),
        );
        let mut st = BanditState::new(&s);
        let sel = Selection::new(&s, vec![(0, 0)]).unwrap();
        let q: RealizedQualities = [((0, 0), 0.4), ((0, 1), 0.6)].into_iter().collect();
        st.record_round(&s, &sel, &q).unwrap();
        assert!((st.quality_means[0] - 0.5).abs() < 1e-12);
        assert_eq!(st.sample_counts[0], 2);

        let sel = Selection::new(&s, vec![(0, 1)]).unwrap();
        let q: RealizedQualities = [((0, 2), 1.0), ((0, 3), 1.0), ((0, 4), 1.0)].into_iter().collect();
        st.record_round(&s, &sel, &q).unwrap();
        assert!((st.quality_means[0] - 0.8).abs() < 1e-12);
        assert_eq!(st.sample_counts[0], 5);
        assert_eq!(st.option_counts[0], vec![1, 1]);
        assert_eq!(st.total_samples, 5);

        assert_eq!(st.sample_counts[1], 0);
        assert_eq!(st.quality_means[1], 0.0);
    }

    #[test]
    fn record_round_rejects_out_of_range_quality() {
        let s = toy_scenario(&[1.0], &[vec![vec![0]]], &[0.5], hyper(1, 1));
        let mut st = BanditState::new(&s);
        let sel = Selection::new(&s, vec![(0, 0)]).unwrap();
        let q: RealizedQualities = [((0, 0), 1.2)].into_iter().collect();
        assert!(matches!(
            st.record_round(&s, &sel, &q),
            Err(Error::QualityOutOfRange { .. })
        ));
        assert_eq!(st, BanditState::new(&s));
    }

    #[test]
    fn ucb_examples() {
        let s = scenario_n(2, 2);
        let mut st = BanditState::new(&s);
        assert_eq!(st.ucb_quality(0, 2), f64::INFINITY);
        st.quality_means = vec![0.5, 0.5];
        st.sample_counts = vec![10, 10];
        st.total_samples = 100;
        assert!((st.ucb_quality(0, 2) - 1.675_394_000_238_4).abs() < 1e-5);
        assert_eq!(st.ucb_quality(0, 2), st.ucb_quality(1, 2));
    }

    #[test]
    fn bootstrap_partitions_and_pads() {
        let (_, rounds) = initialize_rounds(&scenario_n(6, 3));
        let workers: Vec<Vec<usize>> = rounds
            .iter()
            .map(|s| s.chosen.iter().map(|p| p.0).collect())
            .collect();
        assert_eq!(workers, vec![vec![0, 1, 2], vec![3, 4, 5]]);

        let (_, rounds) = initialize_rounds(&scenario_n(5, 3));
        let workers: Vec<Vec<usize>> = rounds
            .iter()
            .map(|s| s.chosen.iter().map(|p| p.0).collect())
            .collect();
        assert_eq!(workers, vec![vec![0, 1, 2], vec![0, 3, 4]]);
        assert!(rounds.iter().all(|s| s.chosen.iter().all(|p| p.1 == 0)));
    }

    #[test]
    fn bootstrap_observes_every_worker() {
        let s = scenario_n(7, 3);
        let (mut st, rounds) = initialize_rounds(&s);
        for sel in &rounds {
            assert!(sel.is_feasible(3));
            let q: RealizedQualities = sel
                .chosen
                .iter()
                .flat_map(|&(w, o)| s.options_of(w)[o].task_ids.iter().map(move |&j| ((w, j), 0.5)))
                .collect();
            st.record_round(&s, sel, &q).unwrap();
        }
        assert!(st.sample_counts.iter().all(|&n| n >= 1));
    }
}
