//! Recruitment policies: the diversity- and overlap-aware UCB greedy and the
//! baselines it is compared against.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::bandit::{greedy_select, BanditState};
use crate::error::{invalid_param, Error};
use crate::greedy::{fill_in_order, greedy_fill, CostLadder};
use crate::model::{Scenario, WorldState};
use crate::objective::Objective;
use crate::rng::{stream, TAG_POLICY};
use crate::selection::Selection;

/// Draws before a random policy gives up on rejection sampling.
const MAX_REJECTIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyKind {
    /// UCB greedy on decayed weights with `r`-accurate overlaps.
    DiversityUcb,
    /// UCB greedy on static initial weights, ignoring overlaps (`r = 1`).
    OldUcb,
    /// Random exploration for the first `epsilon * B` of spend, then the top
    /// options by mean-quality-per-cost.
    EpsilonGreedy { epsilon: f64 },
    /// A uniformly random affordable selection every round.
    Random,
}

impl PolicyKind {
    /// Whether the run starts with the rounds that observe every worker once.
    pub fn uses_bootstrap(&self) -> bool {
        !matches!(self, PolicyKind::Random)
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyKind::DiversityUcb => f.write_str("diversity_ucb"),
            PolicyKind::OldUcb => f.write_str("old_ucb"),
            PolicyKind::EpsilonGreedy { epsilon } => write!(f, "epsilon_greedy:{epsilon}"),
            PolicyKind::Random => f.write_str("random"),
        }
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim() {
            "diversity_ucb" => Ok(PolicyKind::DiversityUcb),
            "old_ucb" => Ok(PolicyKind::OldUcb),
            "random" => Ok(PolicyKind::Random),
            other => {
                let eps = other
                    .strip_prefix("epsilon_greedy:")
                    .ok_or_else(|| invalid_param("policy", format!("unknown policy `{other}`")))?;
                let epsilon: f64 = eps
                    .parse()
                    .map_err(|_| invalid_param("policy", format!("bad epsilon in `{other}`")))?;
                if !(0.0..=1.0).contains(&epsilon) {
                    return Err(invalid_param("epsilon", format!("{epsilon} not in [0, 1]")));
                }
                Ok(PolicyKind::EpsilonGreedy { epsilon })
            }
        }
    }
}

/// A policy together with its private random stream.
#[derive(Debug, Clone)]
pub struct Policy {
    kind: PolicyKind,
    rng: ChaCha8Rng,
}

impl Policy {
    pub fn new(kind: PolicyKind, seed: u64) -> Self {
        Self {
            kind,
            rng: stream(seed, TAG_POLICY, &[]),
        }
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    /// Next round's selection, or `None` once the budget is exhausted.
    pub fn select(&mut self, state: &BanditState, world: &WorldState, scenario: &Scenario) -> Option<Selection> {
        let h = scenario.hyper();
        match self.kind {
            PolicyKind::DiversityUcb => greedy_select(state, world, scenario),
            PolicyKind::OldUcb => {
                let objective = Objective::ucb(state, scenario.initial_weights(), scenario, 1);
                greedy_fill(scenario, &objective, world.remaining_budget, h.k)
            }
            PolicyKind::EpsilonGreedy { epsilon } => {
                let spent = h.budget - world.remaining_budget;
                if spent < epsilon * h.budget {
                    random_selection(scenario, world.remaining_budget, h.k, &mut self.rng)
                } else {
                    exploit_by_mean_ratio(state, scenario, world.remaining_budget)
                }
            }
            PolicyKind::Random => random_selection(scenario, world.remaining_budget, h.k, &mut self.rng),
        }
    }
}

/// Top-`K` options by `sum_j w_j^1 * mean_i / cost`, one per worker.
fn exploit_by_mean_ratio(state: &BanditState, scenario: &Scenario, budget: f64) -> Option<Selection> {
    let weights = scenario.initial_weights();
    let mut scored: Vec<(f64, (usize, usize))> = scenario
        .options()
        .iter()
        .map(|opt| {
            let w: f64 = opt.task_ids.iter().map(|&j| weights[j]).sum();
            (w * state.quality_means[opt.worker_id] / opt.cost, (opt.worker_id, opt.option_id))
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let ranked: Vec<(usize, usize)> = scored.into_iter().map(|(_, p)| p).collect();
    fill_in_order(scenario, &ranked, budget, scenario.hyper().k)
}

/// Uniformly random `K` workers with a uniformly random option each,
/// resampled until affordable.
pub(crate) fn random_selection(
    scenario: &Scenario,
    budget: f64,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Option<Selection> {
    let ladder = CostLadder::new(scenario);
    if ladder.min_completion(k, |_| false) > budget {
        return None;
    }
    let n = scenario.num_workers();
    for _ in 0..MAX_REJECTIONS {
        let pairs: Vec<(usize, usize)> = index::sample(rng, n, k)
            .into_iter()
            .map(|w| (w, rng.random_range(0..scenario.options_of(w).len())))
            .collect();
        let sel = Selection::from_valid(scenario, pairs);
        if sel.total_cost <= budget {
            return Some(sel);
        }
    }
    // Only a thin slice of selections is affordable: build one worker at a
    // time, keeping a cheapest completion available after each pick.
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut used = vec![false; n];
    let mut pairs = Vec::with_capacity(k);
    let mut spent = 0.0;
    for w in order {
        if pairs.len() == k {
            break;
        }
        let need_after = k - pairs.len() - 1;
        let feasible: Vec<usize> = scenario
            .options_of(w)
            .iter()
            .enumerate()
            .filter(|(_, opt)| {
                spent + opt.cost + ladder.min_completion(need_after, |x| used[x] || x == w) <= budget
            })
            .map(|(o, _)| o)
            .collect();
        if feasible.is_empty() {
            continue;
        }
        let o = feasible[rng.random_range(0..feasible.len())];
        used[w] = true;
        spent += scenario.options_of(w)[o].cost;
        pairs.push((w, o));
    }
    (pairs.len() == k).then(|| Selection::from_valid(scenario, pairs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::{hyper, toy_scenario};

    #[test]
    fn policy_strings_round_trip() {
        for s in ["diversity_ucb", "old_ucb", "epsilon_greedy:0.1", "epsilon_greedy:0.5", "random"] {
            let kind: PolicyKind = s.parse().unwrap();
            assert_eq!(kind.to_string(), s);
        }
        assert!("epsilon_greedy:1.5".parse::<PolicyKind>().is_err());
        assert!("epsilon_greedy".parse::<PolicyKind>().is_err());
        assert!("thompson".parse::<PolicyKind>().is_err());
    }

    #[test]
    fn random_selection_is_feasible_and_reproducible() {
        let opts: Vec<Vec<Vec<usize>>> = (0..6).map(|i| vec![vec![i % 3], vec![0, 1, 2]]).collect();
        let s = toy_scenario(&[0.3, 0.3, 0.4], &opts, &[0.5; 6], hyper(3, 1));
        let draw = |seed| {
            let mut rng = stream(seed, TAG_POLICY, &[]);
            (0..20)
                .map(|_| random_selection(&s, 100.0, 3, &mut rng).unwrap())
                .collect::<Vec<_>>()
        };
        let a = draw(11);
        assert_eq!(a, draw(11));
        assert!(a.iter().all(|sel| sel.is_feasible(3)));
        // tight budget: only single-task options fit
        let mut rng = stream(3, TAG_POLICY, &[]);
        for _ in 0..20 {
            let sel = random_selection(&s, 3.0, 3, &mut rng).unwrap();
            assert!(sel.total_cost <= 3.0);
        }
        assert!(random_selection(&s, 2.5, 3, &mut rng).is_none());
    }
}
