//! Round loop, run metrics, alpha-regret and parameter sweeps.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::bandit::{initialize_rounds, BanditState};
use crate::error::{invalid_param, Error, Result};
use crate::exhaustive::{brute_force_best, check_enumerable, for_each_selection};
use crate::model::{
    decayed_weight, round_utility, update_coverage, QualitySampler, RealizedQualities, Scenario,
    WorldState,
};
use crate::objective::Objective;
use crate::policy::{Policy, PolicyKind};
use crate::rng::{stream, TAG_QUALITY};
use crate::selection::Selection;
use crate::stats::{mean, std_dev};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    /// Zero-based round index.
    pub round: u64,
    pub selection: Selection,
    pub realized_qualities: RealizedQualities,
    /// Realized weighted completion quality under this round's weights.
    pub weighted_utility: f64,
    pub cost: f64,
    pub remaining_budget_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub records: Vec<RoundRecord>,
    pub total_weighted_quality: f64,
    pub rounds: u64,
    /// Zero when nothing was covered or there is a single task.
    pub normalized_entropy: f64,
    pub coverage_counts: Vec<u64>,
    pub policy_label: String,
    pub seed: u64,
}

impl RunResult {
    pub fn total_cost(&self) -> f64 {
        self.records.iter().map(|r| r.cost).sum()
    }
}

/// Simulates `policy` on `scenario` until the budget can no longer fund a
/// round. Qualities are drawn from streams keyed by `(seed, round, worker,
/// task)`, so every policy sees the same draws for the same seed.
pub fn run(scenario: &Scenario, policy: PolicyKind, seed: u64) -> Result<RunResult> {
    let samplers: Vec<QualitySampler> = scenario.workers().iter().map(|w| w.quality.sampler()).collect();
    let mut world = WorldState::new(scenario);
    let mut agent = Policy::new(policy, seed);
    let (mut learner, bootstrap) = if policy.uses_bootstrap() {
        initialize_rounds(scenario)
    } else {
        (BanditState::new(scenario), Vec::new())
    };
    let mut bootstrap = bootstrap.into_iter();
    let mut records = Vec::new();

    loop {
        let selection = match bootstrap.next() {
            Some(sel) => sel,
            None => match agent.select(&learner, &world, scenario) {
                Some(sel) => sel,
                None => break,
            },
        };
        if selection.total_cost > world.remaining_budget {
            break;
        }
        let round = world.round;
        let mut realized = RealizedQualities::new();
        for &(w, o) in &selection.chosen {
            for &j in &scenario.options_of(w)[o].task_ids {
                let mut rng = stream(seed, TAG_QUALITY, &[round, w as u64, j as u64]);
                realized.insert((w, j), samplers[w].sample(&mut rng));
            }
        }
        let utility = round_utility(scenario, &selection, &realized, &world);
        update_coverage(scenario, &selection, &mut world);
        learner.record_round(scenario, &selection, &realized)?;
        world.remaining_budget -= selection.total_cost;
        world.cumulative_utility += utility;
        world.round += 1;
        records.push(RoundRecord {
            round,
            cost: selection.total_cost,
            selection,
            realized_qualities: realized,
            weighted_utility: utility,
            remaining_budget_after: world.remaining_budget,
        });
    }

    let normalized_entropy = normalized_entropy(&world.coverage_counts, scenario.num_tasks()).unwrap_or(0.0);
    Ok(RunResult {
        total_weighted_quality: records.iter().map(|r| r.weighted_utility).sum(),
        rounds: records.len() as u64,
        records,
        normalized_entropy,
        coverage_counts: world.coverage_counts,
        policy_label: policy.to_string(),
        seed,
    })
}

/// Base-`M` Shannon entropy of the coverage distribution, in `[0, 1]`.
pub fn normalized_entropy(coverage_counts: &[u64], num_tasks: usize) -> Result<f64> {
    if num_tasks < 2 {
        return Err(Error::UndefinedEntropy("needs at least two tasks"));
    }
    let total: u64 = coverage_counts.iter().sum();
    if total == 0 {
        return Err(Error::UndefinedEntropy("no task was ever covered"));
    }
    let h: f64 = coverage_counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total as f64;
            -p * p.ln()
        })
        .sum();
    Ok((h / (num_tasks as f64).ln()).clamp(0.0, 1.0))
}

/// Which weight trajectory the fixed comparator is scored against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ComparatorWeights {
    /// The weights the learner's own run produced, round by round.
    #[default]
    LearnerTrajectory,
    /// The weights the comparator would produce by playing itself every round.
    OwnTrajectory,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretReport {
    pub alpha: f64,
    pub regret: f64,
    /// Best fixed selection under the true mean qualities.
    pub comparator: Selection,
    pub comparator_total: f64,
    pub learner_total: f64,
    /// Gap between the best and second-best selection (initial weights).
    pub delta_min: f64,
    /// Gap between the best and the worst selection (initial weights).
    pub delta_max: f64,
}

/// Alpha-regret of a run against the best fixed `K`-selection, scored with
/// the true mean qualities on the learner's weight trajectory.
pub fn alpha_regret(run: &RunResult, scenario: &Scenario, alpha: f64) -> Result<RegretReport> {
    alpha_regret_with(run, scenario, alpha, ComparatorWeights::default())
}

pub fn alpha_regret_with(
    run: &RunResult,
    scenario: &Scenario,
    alpha: f64,
    mode: ComparatorWeights,
) -> Result<RegretReport> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(invalid_param("alpha", format!("{alpha} not in [0, 1]")));
    }
    let h = scenario.hyper();
    check_enumerable(scenario, h.k)?;
    let means = scenario.quality_means();
    let exact = scenario.num_workers();
    let m = scenario.num_tasks();

    // Replay the learner's weight trajectory.
    let mut world = WorldState::new(scenario);
    let mut cumulative = vec![0.0; m];
    let mut learner_total = 0.0;
    for rec in &run.records {
        let obj = Objective::new(world.current_weights.clone(), means.clone(), h.gamma, exact);
        learner_total += obj.evaluate(scenario, &rec.selection.chosen);
        for (acc, w) in cumulative.iter_mut().zip(&world.current_weights) {
            *acc += w;
        }
        update_coverage(scenario, &rec.selection, &mut world);
    }

    let initial = Objective::new(scenario.initial_weights(), means.clone(), h.gamma, exact);
    let (comparator, comparator_total) = match mode {
        ComparatorWeights::LearnerTrajectory => {
            let obj = Objective::new(cumulative, means.clone(), h.gamma, exact);
            brute_force_best(scenario, &obj, h.budget, h.k)?
                .ok_or_else(|| Error::InvalidScenario("no affordable K-selection".into()))?
        }
        ComparatorWeights::OwnTrajectory => {
            // Covered every round, each task of the comparator decays on the same
            // schedule, so its total is the initial-weight value times that schedule's sum.
            let (sel, value) = brute_force_best(scenario, &initial, h.budget, h.k)?
                .ok_or_else(|| Error::InvalidScenario("no affordable K-selection".into()))?;
            let decay: f64 = (0..run.rounds).map(|t| decayed_weight(t, 1.0, h.kappa, h.lambda)).sum();
            (sel, value * decay)
        }
    };

    let (delta_min, delta_max) = selection_gaps(scenario, &initial, h.budget, h.k)?;
    Ok(RegretReport {
        alpha,
        regret: alpha * comparator_total - learner_total,
        comparator,
        comparator_total,
        learner_total,
        delta_min,
        delta_max,
    })
}

/// Mean alpha-regret of one policy at one budget.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretPoint {
    pub budget: f64,
    pub runs: usize,
    pub mean_regret: f64,
    pub std_regret: f64,
    pub mean_rounds: f64,
}

/// Alpha-regret of `policy` on `scenario` at each budget, averaged over seeds.
pub fn regret_curve(
    scenario: &Scenario,
    policy: PolicyKind,
    budgets: &[f64],
    seeds: &[u64],
    alpha: f64,
    mode: ComparatorWeights,
) -> Result<Vec<RegretPoint>> {
    check_enumerable(scenario, scenario.hyper().k)?;
    let jobs: Vec<(usize, u64)> = (0..budgets.len())
        .flat_map(|b| seeds.iter().map(move |&s| (b, s)))
        .collect();
    let exec = |&(b, seed): &(usize, u64)| -> Result<(f64, u64)> {
        let hyper = crate::model::Hyperparameters {
            budget: budgets[b],
            ..*scenario.hyper()
        };
        let sc = scenario.with_hyperparameters(hyper)?;
        let res = run(&sc, policy, seed)?;
        Ok((alpha_regret_with(&res, &sc, alpha, mode)?.regret, res.rounds))
    };
    #[cfg(feature = "parallel")]
    let results: Vec<Result<(f64, u64)>> = {
        use rayon::prelude::*;
        jobs.par_iter().map(exec).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<(f64, u64)>> = jobs.iter().map(exec).collect();
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(budgets
        .iter()
        .enumerate()
        .map(|(b, &budget)| {
            let chunk = &results[b * seeds.len()..(b + 1) * seeds.len()];
            let regrets: Vec<f64> = chunk.iter().map(|r| r.0).collect();
            let rounds: Vec<f64> = chunk.iter().map(|r| r.1 as f64).collect();
            RegretPoint {
                budget,
                runs: chunk.len(),
                mean_regret: mean(&regrets),
                std_regret: std_dev(&regrets),
                mean_rounds: mean(&rounds),
            }
        })
        .collect())
}

/// `(best - second best, best - worst)` over affordable `K`-selections.
fn selection_gaps(scenario: &Scenario, objective: &Objective, budget: f64, k: usize) -> Result<(f64, f64)> {
    let mut values = Vec::new();
    for_each_selection(scenario, k, |pairs, cost| {
        if cost <= budget {
            values.push(objective.evaluate(scenario, pairs));
        }
    })?;
    if values.len() < 2 {
        return Ok((0.0, 0.0));
    }
    values.sort_by(|a, b| b.total_cmp(a));
    Ok((values[0] - values[1], values[0] - values[values.len() - 1]))
}

/// Scenario parameters a sweep may vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum SweepParam {
    Budget,
    K,
    Kappa,
    Gamma,
    R,
    N,
    M,
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "budget" | "B" => SweepParam::Budget,
            "K" | "k" => SweepParam::K,
            "kappa" => SweepParam::Kappa,
            "gamma" => SweepParam::Gamma,
            "r" => SweepParam::R,
            "N" => SweepParam::N,
            "M" => SweepParam::M,
            other => return Err(invalid_param("sweep", format!("`{other}` is not a sweepable parameter"))),
        })
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::Budget => "budget",
            SweepParam::K => "K",
            SweepParam::Kappa => "kappa",
            SweepParam::Gamma => "gamma",
            SweepParam::R => "r",
            SweepParam::N => "N",
            SweepParam::M => "M",
        })
    }
}

/// One grid point: parameter overrides applied to the scenario template.
pub type GridPoint = Vec<(SweepParam, f64)>;

/// Cartesian product of the value lists, in parameter order.
pub fn expand_grid(grid: &BTreeMap<SweepParam, Vec<f64>>) -> Vec<GridPoint> {
    let mut points: Vec<GridPoint> = vec![Vec::new()];
    for (&param, values) in grid {
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push((param, v));
                    q
                })
            })
            .collect();
    }
    points
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub cell: usize,
    pub policy: usize,
    pub seed: u64,
    /// Scenario used by the run, when it could be built.
    pub scenario: Option<Scenario>,
    pub result: std::result::Result<RunResult, String>,
}

/// Runs every `(grid point, policy, seed)` combination. `build` makes the
/// scenario for a grid point and seed; failures are reported per run.
/// Outcomes come back sorted by `(cell, policy, seed position)`.
pub fn sweep<F>(points: &[GridPoint], policies: &[PolicyKind], seeds: &[u64], build: F) -> Vec<SweepOutcome>
where
    F: Fn(&GridPoint, u64) -> Result<Scenario> + Sync,
{
    let jobs: Vec<(usize, usize, usize)> = (0..points.len())
        .flat_map(|c| (0..policies.len()).flat_map(move |p| (0..seeds.len()).map(move |s| (c, p, s))))
        .collect();
    let exec = |&(c, p, s): &(usize, usize, usize)| {
        let seed = seeds[s];
        let (scenario, result) = match build(&points[c], seed) {
            Ok(sc) => {
                let res = run(&sc, policies[p], seed).map_err(|e| e.to_string());
                (Some(sc), res)
            }
            Err(e) => (None, Err(e.to_string())),
        };
        SweepOutcome {
            cell: c,
            policy: p,
            seed,
            scenario,
            result,
        }
    };
    #[cfg(feature = "parallel")]
    let outcomes: Vec<SweepOutcome> = {
        use rayon::prelude::*;
        jobs.par_iter().map(exec).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<SweepOutcome> = jobs.iter().map(exec).collect();
    outcomes
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub cell: usize,
    pub policy: String,
    pub runs: usize,
    pub failures: usize,
    pub mean_total_weighted_quality: f64,
    pub std_total_weighted_quality: f64,
    pub mean_normalized_entropy: f64,
    pub std_normalized_entropy: f64,
    pub mean_rounds: f64,
    pub std_rounds: f64,
}

/// Per `(cell, policy)` means and sample standard deviations.
pub fn summarize(outcomes: &[SweepOutcome], policies: &[PolicyKind]) -> Vec<CellSummary> {
    let mut groups: BTreeMap<(usize, usize), Vec<&SweepOutcome>> = BTreeMap::new();
    for o in outcomes {
        groups.entry((o.cell, o.policy)).or_default().push(o);
    }
    groups
        .into_iter()
        .map(|((cell, policy), group)| {
            let ok: Vec<&RunResult> = group.iter().filter_map(|o| o.result.as_ref().ok()).collect();
            let totals: Vec<f64> = ok.iter().map(|r| r.total_weighted_quality).collect();
            let entropies: Vec<f64> = ok.iter().map(|r| r.normalized_entropy).collect();
            let rounds: Vec<f64> = ok.iter().map(|r| r.rounds as f64).collect();
            CellSummary {
                cell,
                policy: policies[policy].to_string(),
                runs: group.len(),
                failures: group.len() - ok.len(),
                mean_total_weighted_quality: mean(&totals),
                std_total_weighted_quality: std_dev(&totals),
                mean_normalized_entropy: mean(&entropies),
                std_normalized_entropy: std_dev(&entropies),
                mean_rounds: mean(&rounds),
                std_rounds: std_dev(&rounds),
            }
        })
        .collect()
}
