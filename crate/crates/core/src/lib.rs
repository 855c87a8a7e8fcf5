//! Budgeted worker recruitment for mobile crowdsensing as a combinatorial
//! bandit, with decaying task weights and overlap-aware sensing quality.
//!
//! The usual entry points are [`ScenarioSpec::build`] to obtain a [`Scenario`],
//! [`run`] to simulate a policy on it and [`alpha_regret`] to score the run.

mod bandit;
mod error;
mod exhaustive;
mod greedy;
mod model;
mod objective;
mod policy;
pub mod rng;
mod scenario;
mod selection;
mod sim;
pub mod stats;

pub use bandit::{brute_force_select, greedy_select, initialize_rounds, ucb_round_utility, BanditState};
pub use error::{Error, Result};
pub use exhaustive::{brute_force_best, check_enumerable, for_each_selection, selection_space_size, ENUMERATION_LIMIT};
pub use greedy::{greedy_fill, greedy_fill_scored, min_selection_cost};
pub use model::{
    overlap_quality, round_utility, task_weight, update_coverage, Hyperparameters, QualityDistribution,
    QualitySampler, RealizedQualities, Scenario, Task, WorkerOption, WorkerTruth, WorldState, SCENARIO_VERSION,
};
pub use objective::{Objective, UNEXPLORED_VALUE};
pub use policy::{Policy, PolicyKind};
pub use scenario::{
    build_from_trace, build_from_trace_detailed, build_synthetic, haversine_m, parse_trace, ScenarioSpec,
    TracePoint, TraceScenario, EARTH_RADIUS_M, GRID_CELL_M, MAX_MALFORMED_FRACTION, MIN_NEAR_VISITS,
};
pub use selection::Selection;
pub use sim::{
    alpha_regret, alpha_regret_with, expand_grid, normalized_entropy, regret_curve, run, summarize, sweep,
    CellSummary, ComparatorWeights, GridPoint, RegretPoint, RegretReport, RoundRecord, RunResult, SweepOutcome, SweepParam,
};
