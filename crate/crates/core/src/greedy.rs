//! Budget-feasible batch greedy on the gain-to-cost ratio.
//!
//! Each step adds the batch of `min(r, K - |chosen|)` options from distinct,
//! not yet recruited workers that maximizes
//! `(U_r(chosen + batch) - U_r(chosen)) / cost(batch)`. Only batches that
//! still leave room to complete a `K`-selection within the budget compete.
//!
//! The argmax is exact. Because `U_r` is monotone submodular, a batch's gain
//! never exceeds the sum of its members' individual gains, which gives the
//! branch-and-bound pruning rule used by [`best_batch`]: a batch can only
//! reach ratio `rho` if the members' `gain - rho * cost` sum to at least zero.

use crate::model::Scenario;
use crate::objective::{top_value, Objective};
use crate::selection::Selection;

/// Relative tolerance under which two ratios count as tied.
const TIE_TOL: f64 = 1e-12;

/// Workers ordered by their cheapest option, for completion-cost lower bounds.
pub(crate) struct CostLadder {
    order: Vec<(f64, usize)>,
    cheapest: Vec<usize>,
}

impl CostLadder {
    pub(crate) fn new(scenario: &Scenario) -> Self {
        let cheapest: Vec<usize> = (0..scenario.num_workers())
            .map(|w| {
                let opts = scenario.options_of(w);
                (0..opts.len())
                    .min_by(|&a, &b| opts[a].cost.total_cmp(&opts[b].cost).then(a.cmp(&b)))
                    .expect("every worker has an option")
            })
            .collect();
        let mut order: Vec<(f64, usize)> = cheapest
            .iter()
            .enumerate()
            .map(|(w, &o)| (scenario.options_of(w)[o].cost, w))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        Self { order, cheapest }
    }

    /// Cheapest cost of recruiting `need` more workers, skipping excluded ones.
    pub(crate) fn min_completion(&self, need: usize, excluded: impl Fn(usize) -> bool) -> f64 {
        if need == 0 {
            return 0.0;
        }
        let mut left = need;
        let mut total = 0.0;
        for &(cost, w) in &self.order {
            if excluded(w) {
                continue;
            }
            total += cost;
            left -= 1;
            if left == 0 {
                return total;
            }
        }
        f64::INFINITY
    }

    pub(crate) fn cheapest_option(&self, worker: usize) -> usize {
        self.cheapest[worker]
    }

    /// Workers in ascending order of cheapest option cost.
    pub(crate) fn workers(&self) -> impl Iterator<Item = usize> + '_ {
        self.order.iter().map(|&(_, w)| w)
    }
}

/// Per-task top-`r` values of the workers recruited so far.
struct Cover {
    tops: Vec<Vec<f64>>,
    extra: Vec<Vec<f64>>,
    touched: Vec<usize>,
    buf: Vec<f64>,
}

impl Cover {
    fn new(num_tasks: usize) -> Self {
        Self {
            tops: vec![Vec::new(); num_tasks],
            extra: vec![Vec::new(); num_tasks],
            touched: Vec::new(),
            buf: Vec::new(),
        }
    }

    fn merged_value(buf: &mut Vec<f64>, top: &[f64], extra: &[f64], r: usize, gamma: f64) -> f64 {
        buf.clear();
        buf.extend_from_slice(top);
        buf.extend_from_slice(extra);
        buf.sort_unstable_by(|a, b| b.total_cmp(a));
        buf.truncate(r);
        top_value(buf, gamma)
    }

    /// Increase of `U_r` if the given options were added.
    fn gain(&mut self, scenario: &Scenario, objective: &Objective, options: &[usize]) -> f64 {
        for &idx in options {
            let opt = &scenario.options()[idx];
            let v = objective.values[opt.worker_id];
            for &j in &opt.task_ids {
                if self.extra[j].is_empty() {
                    self.touched.push(j);
                }
                self.extra[j].push(v);
            }
        }
        let mut gain = 0.0;
        for &j in &self.touched {
            let before = top_value(&self.tops[j], objective.gamma);
            let after = Self::merged_value(&mut self.buf, &self.tops[j], &self.extra[j], objective.r, objective.gamma);
            gain += objective.weights[j] * (after - before);
            self.extra[j].clear();
        }
        self.touched.clear();
        gain
    }

    fn add(&mut self, scenario: &Scenario, objective: &Objective, idx: usize) {
        let opt = &scenario.options()[idx];
        let v = objective.values[opt.worker_id];
        for &j in &opt.task_ids {
            let top = &mut self.tops[j];
            top.push(v);
            top.sort_unstable_by(|a, b| b.total_cmp(a));
            top.truncate(objective.r);
        }
    }
}

#[derive(Clone, Copy)]
struct Candidate {
    idx: usize,
    worker: usize,
    option: usize,
    cost: f64,
    gain: f64,
}

struct BestBatch {
    ratio: f64,
    key: Vec<(usize, usize)>,
    members: Vec<usize>,
}

/// Whether `(ratio, key)` beats the incumbent: higher ratio, or a tie with a
/// lexicographically smaller key.
fn improves(best: &Option<BestBatch>, ratio: f64, key: &[(usize, usize)]) -> bool {
    match best {
        None => true,
        Some(b) => {
            let tol = TIE_TOL * b.ratio.abs().max(1.0);
            if ratio > b.ratio + tol {
                true
            } else if ratio >= b.ratio - tol {
                key < b.key.as_slice()
            } else {
                false
            }
        }
    }
}

struct Step<'a> {
    scenario: &'a Scenario,
    objective: &'a Objective,
    ladder: &'a CostLadder,
    cands: Vec<Candidate>,
    used: &'a [bool],
    spent: f64,
    budget: f64,
    /// Workers still needed after this batch.
    after: usize,
    size: usize,
    best: Option<BestBatch>,
}

impl Step<'_> {
    fn feasible(&self, members: &[usize]) -> bool {
        let batch_cost: f64 = members.iter().map(|&p| self.cands[p].cost).sum();
        let completion = self.ladder.min_completion(self.after, |w| {
            self.used[w] || members.iter().any(|&p| self.cands[p].worker == w)
        });
        self.spent + batch_cost + completion <= self.budget
    }

    fn consider(&mut self, members: &[usize], cover: &mut Cover) {
        let cost: f64 = members.iter().map(|&p| self.cands[p].cost).sum();
        let gain = if members.len() == 1 {
            self.cands[members[0]].gain
        } else {
            let idxs: Vec<usize> = members.iter().map(|&p| self.cands[p].idx).collect();
            cover.gain(self.scenario, self.objective, &idxs)
        };
        let ratio = gain / cost;
        let mut key: Vec<(usize, usize)> = members
            .iter()
            .map(|&p| (self.cands[p].worker, self.cands[p].option))
            .collect();
        key.sort_unstable();
        if improves(&self.best, ratio, &key) && self.feasible(members) {
            self.best = Some(BestBatch {
                ratio,
                key,
                members: members.to_vec(),
            });
        }
    }
}

/// Exact ratio-maximizing feasible batch of `step.size` candidates.
fn best_batch(step: &mut Step<'_>, cover: &mut Cover) -> Option<Vec<usize>> {
    let n = step.cands.len();
    // Seed with the batch of best individual ratios and with the cheapest batch.
    let mut by_ratio: Vec<usize> = (0..n).collect();
    by_ratio.sort_by(|&a, &b| {
        let (ca, cb) = (&step.cands[a], &step.cands[b]);
        (cb.gain / cb.cost)
            .total_cmp(&(ca.gain / ca.cost))
            .then((ca.worker, ca.option).cmp(&(cb.worker, cb.option)))
    });
    let mut seed = Vec::with_capacity(step.size);
    for &p in &by_ratio {
        if seed.len() == step.size {
            break;
        }
        if seed.iter().all(|&q: &usize| step.cands[q].worker != step.cands[p].worker) {
            seed.push(p);
        }
    }
    if seed.len() == step.size {
        step.consider(&seed, cover);
    }
    let cheapest: Vec<usize> = step
        .ladder
        .workers()
        .filter(|&w| !step.used[w])
        .take(step.size)
        .filter_map(|w| {
            let o = step.ladder.cheapest_option(w);
            step.cands.iter().position(|c| c.worker == w && c.option == o)
        })
        .collect();
    if cheapest.len() == step.size {
        step.consider(&cheapest, cover);
    }

    let rho = step.best.as_ref().map_or(0.0, |b| b.ratio).max(0.0);
    let mut order: Vec<(f64, usize)> = (0..n)
        .map(|p| (step.cands[p].gain - rho * step.cands[p].cost, p))
        .collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let slack = TIE_TOL * rho.max(1.0);
    let mut members = Vec::with_capacity(step.size);
    search(step, cover, &order, 0, 0.0, &mut members, slack);
    step.best.take().map(|b| b.members)
}

fn search(
    step: &mut Step<'_>,
    cover: &mut Cover,
    order: &[(f64, usize)],
    start: usize,
    partial: f64,
    members: &mut Vec<usize>,
    slack: f64,
) {
    let remaining = step.size - members.len();
    for pos in start..order.len() {
        let (h, p) = order[pos];
        let window_end = (pos + remaining).min(order.len());
        let bound = partial + h + order[pos + 1..window_end].iter().map(|e| e.0).sum::<f64>();
        if bound < -slack * step.size as f64 {
            break;
        }
        let worker = step.cands[p].worker;
        if members.iter().any(|&q| step.cands[q].worker == worker) {
            continue;
        }
        members.push(p);
        if remaining == 1 {
            step.consider(members, cover);
        } else {
            search(step, cover, order, pos + 1, partial + h, members, slack);
        }
        members.pop();
    }
}

/// Cost of the cheapest `K`-selection, infinite when there are fewer than `K` workers.
pub fn min_selection_cost(scenario: &Scenario, k: usize) -> f64 {
    CostLadder::new(scenario).min_completion(k, |_| false)
}

/// Greedy `K`-selection under `objective`, or `None` when the budget cannot
/// fund any `K` workers.
pub fn greedy_fill(scenario: &Scenario, objective: &Objective, budget: f64, k: usize) -> Option<Selection> {
    greedy_fill_scored(scenario, objective, budget, k).map(|(sel, _)| sel)
}

/// [`greedy_fill`] plus the objective value of the result, accumulated from
/// the batch gains as the selection was built.
pub fn greedy_fill_scored(
    scenario: &Scenario,
    objective: &Objective,
    budget: f64,
    k: usize,
) -> Option<(Selection, f64)> {
    let ladder = CostLadder::new(scenario);
    if ladder.min_completion(k, |_| false) > budget {
        return None;
    }
    let mut cover = Cover::new(scenario.num_tasks());
    let mut used = vec![false; scenario.num_workers()];
    let mut chosen = Vec::with_capacity(k);
    let mut spent = 0.0;
    let mut value = 0.0;

    while chosen.len() < k {
        let size = objective.r.min(k - chosen.len());
        let mut cands = Vec::new();
        for (idx, opt) in scenario.options().iter().enumerate() {
            if used[opt.worker_id] {
                continue;
            }
            cands.push(Candidate {
                idx,
                worker: opt.worker_id,
                option: opt.option_id,
                cost: opt.cost,
                gain: cover.gain(scenario, objective, &[idx]),
            });
        }
        let mut step = Step {
            scenario,
            objective,
            ladder: &ladder,
            cands,
            used: &used,
            spent,
            budget,
            after: k - chosen.len() - size,
            size,
            best: None,
        };
        let members = best_batch(&mut step, &mut cover)?;
        let picked: Vec<Candidate> = members.iter().map(|&p| step.cands[p]).collect();
        let idxs: Vec<usize> = picked.iter().map(|c| c.idx).collect();
        value += cover.gain(scenario, objective, &idxs);
        for c in picked {
            used[c.worker] = true;
            spent += c.cost;
            cover.add(scenario, objective, c.idx);
            chosen.push((c.worker, c.option));
        }
    }
    Some((Selection::from_valid(scenario, chosen), value))
}

/// Walks `ranked` candidates in order, keeping each one whose worker is new
/// and whose cost still leaves a feasible completion. Falls back to cheapest
/// options if the ranking runs out.
pub(crate) fn fill_in_order(
    scenario: &Scenario,
    ranked: &[(usize, usize)],
    budget: f64,
    k: usize,
) -> Option<Selection> {
    let ladder = CostLadder::new(scenario);
    if ladder.min_completion(k, |_| false) > budget {
        return None;
    }
    let mut used = vec![false; scenario.num_workers()];
    let mut chosen = Vec::with_capacity(k);
    let mut spent = 0.0;
    let fallback: Vec<(usize, usize)> = ladder.workers().map(|w| (w, ladder.cheapest_option(w))).collect();
    for &(w, o) in ranked.iter().chain(fallback.iter()) {
        if chosen.len() == k {
            break;
        }
        if used[w] {
            continue;
        }
        let cost = scenario.options_of(w)[o].cost;
        let completion = ladder.min_completion(k - chosen.len() - 1, |x| used[x] || x == w);
        if spent + cost + completion <= budget {
            used[w] = true;
            spent += cost;
            chosen.push((w, o));
        }
    }
    (chosen.len() == k).then(|| Selection::from_valid(scenario, chosen))
}
