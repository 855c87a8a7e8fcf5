//! Exhaustive enumeration of `K`-selections, used as an exact oracle.

use crate::error::{Error, Result};
use crate::model::Scenario;
use crate::objective::Objective;
use crate::selection::Selection;

/// Largest selection space the enumerators accept.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

/// Number of `K`-selections (worker subsets times option choices), saturating.
pub fn selection_space_size(scenario: &Scenario, k: usize) -> u128 {
    // Elementary symmetric polynomial of the per-worker option counts.
    let mut e = vec![0u128; k + 1];
    e[0] = 1;
    for w in 0..scenario.num_workers() {
        let l = scenario.options_of(w).len() as u128;
        for d in (1..=k).rev() {
            e[d] = e[d].saturating_add(e[d - 1].saturating_mul(l));
        }
    }
    e[k]
}

pub fn check_enumerable(scenario: &Scenario, k: usize) -> Result<()> {
    let count = selection_space_size(scenario, k);
    if count > ENUMERATION_LIMIT {
        return Err(Error::EnumerationGuard {
            count,
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(())
}

/// Calls `visit(pairs, cost)` for every `K`-selection in lexicographic order
/// of its sorted `(worker, option)` pairs.
pub fn for_each_selection(
    scenario: &Scenario,
    k: usize,
    mut visit: impl FnMut(&[(usize, usize)], f64),
) -> Result<()> {
    check_enumerable(scenario, k)?;
    let mut pairs = Vec::with_capacity(k);
    walk(scenario, k, 0, 0.0, &mut pairs, &mut visit);
    Ok(())
}

fn walk(
    scenario: &Scenario,
    k: usize,
    first: usize,
    cost: f64,
    pairs: &mut Vec<(usize, usize)>,
    visit: &mut impl FnMut(&[(usize, usize)], f64),
) {
    if pairs.len() == k {
        visit(pairs, cost);
        return;
    }
    let n = scenario.num_workers();
    let still = k - pairs.len();
    for w in first..=n.saturating_sub(still) {
        for (o, opt) in scenario.options_of(w).iter().enumerate() {
            pairs.push((w, o));
            walk(scenario, k, w + 1, cost + opt.cost, pairs, visit);
            pairs.pop();
        }
    }
}

/// The affordable `K`-selection with the largest objective value; ties go to
/// the lexicographically smallest selection.
pub fn brute_force_best(
    scenario: &Scenario,
    objective: &Objective,
    budget: f64,
    k: usize,
) -> Result<Option<(Selection, f64)>> {
    let mut best: Option<(Vec<(usize, usize)>, f64)> = None;
    for_each_selection(scenario, k, |pairs, cost| {
        if cost > budget {
            return;
        }
        let value = objective.evaluate(scenario, pairs);
        let better = match &best {
            None => true,
            Some((_, b)) => value > b + 1e-12 * b.abs().max(1.0),
        };
        if better {
            best = Some((pairs.to_vec(), value));
        }
    })?;
    Ok(best.map(|(pairs, value)| (Selection::from_valid(scenario, pairs), value)))
}
