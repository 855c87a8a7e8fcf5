mod common;

use common::{all_selections, cost_of, naive_value, random_instance, Limits, SMALL};
use crowdsense::*;
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn with_hyper(s: &Scenario, f: impl FnOnce(&mut Hyperparameters)) -> Scenario {
    let mut h = *s.hyper();
    f(&mut h);
    s.with_hyperparameters(h).unwrap()
}

fn check_run(s: &Scenario, run: &RunResult) {
    let h = s.hyper();
    assert!(run.total_cost() <= h.budget + 1e-9);
    for rec in &run.records {
        assert!(rec.selection.is_feasible(h.k), "infeasible selection {:?}", rec.selection);
        assert!((rec.cost - cost_of(s, &rec.selection.chosen)).abs() < 1e-9);
        assert!(rec.remaining_budget_after >= -1e-9);
        assert!(rec.weighted_utility <= h.k as f64 + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn weight_stays_between_floor_and_start(m in 0u64..200, w1 in 1e-6f64..1.0, kappa in 0.0f64..=1.0, lambda in 0.1f64..50.0) {
        let w = task_weight(m, w1, kappa, lambda).unwrap();
        let next = task_weight(m + 1, w1, kappa, lambda).unwrap();
        prop_assert!(w <= w1 + 1e-15 && w >= kappa * w1 - 1e-15);
        prop_assert!(next <= w + 1e-15);
    }

    #[test]
    fn overlap_sandwich_and_gamma_monotone(qs in prop::collection::vec(0.0f64..=1.0, 1..8), g in 0.0f64..10.0, dg in 0.0f64..5.0) {
        let max = qs.iter().copied().fold(0.0, f64::max);
        let sum: f64 = qs.iter().sum();
        let v = overlap_quality(&qs, g);
        prop_assert!(max - 1e-12 <= v && v <= sum + 1e-12);
        let v2 = overlap_quality(&qs, g + dg);
        prop_assert!(v2 >= v - 1e-12);
        if sum > max + 1e-9 && dg > 1e-6 {
            prop_assert!(v2 > v);
        }
    }

    #[test]
    fn round_utility_matches_naive_loop(seed in 0u64..10_000) {
        let s = random_instance(seed, SMALL);
        let run = run(&s, PolicyKind::Random, seed).unwrap();
        let mut world = WorldState::new(&s);
        for rec in &run.records {
            // Double loop over tasks and chosen options.
            let mut naive = 0.0;
            for j in 0..s.num_tasks() {
                let qs: Vec<f64> = rec.selection.chosen.iter()
                    .filter(|&&(w, o)| s.options_of(w)[o].task_ids.contains(&j))
                    .map(|&(w, _)| rec.realized_qualities[&(w, j)])
                    .collect();
                if !qs.is_empty() {
                    naive += world.current_weights[j] * overlap_quality(&qs, s.hyper().gamma);
                }
            }
            prop_assert!((naive - rec.weighted_utility).abs() < TOL);
            prop_assert!((round_utility(&s, &rec.selection, &rec.realized_qualities, &world) - naive).abs() < TOL);
            update_coverage(&s, &rec.selection, &mut world);
        }
        prop_assert_eq!(&world.coverage_counts, &run.coverage_counts);
    }

    #[test]
    fn sample_counts_consistent_with_option_counts(seed in 0u64..10_000) {
        let s = random_instance(seed, SMALL);
        let run = run(&s, PolicyKind::Random, seed).unwrap();
        let mut state = BanditState::new(&s);
        for rec in &run.records {
            state.record_round(&s, &rec.selection, &rec.realized_qualities).unwrap();
            for w in 0..s.num_workers() {
                let from_options: u64 = state.option_counts[w].iter().enumerate()
                    .map(|(o, &c)| c * s.options_of(w)[o].task_ids.len() as u64)
                    .sum();
                prop_assert_eq!(from_options, state.sample_counts[w]);
                if state.sample_counts[w] > 0 {
                    prop_assert!((0.0..=1.0).contains(&state.quality_means[w]));
                }
            }
            prop_assert_eq!(state.total_samples, state.sample_counts.iter().sum::<u64>());
        }
    }

    #[test]
    fn truncated_value_grows_with_r(seed in 0u64..10_000) {
        let s = random_instance(seed, SMALL);
        let weights = s.initial_weights();
        let values = s.quality_means();
        let k = s.hyper().k;
        for pairs in all_selections(&s, k).into_iter().take(50) {
            let mut prev = f64::NEG_INFINITY;
            for r in 1..=k {
                let v = Objective::new(weights.clone(), values.clone(), 1.0, r).evaluate(&s, &pairs);
                prop_assert!((v - naive_value(&s, &pairs, &weights, &values, 1.0, r)).abs() < TOL);
                prop_assert!(v >= prev - 1e-12);
                prev = v;
            }
        }
    }

    #[test]
    fn greedy_is_feasible_and_never_beats_brute_force(seed in 0u64..10_000, budget_frac in 0.0f64..1.5) {
        let s = random_instance(seed, SMALL);
        let k = s.hyper().k;
        let sels = all_selections(&s, k);
        let max_cost = sels.iter().map(|p| cost_of(&s, p)).fold(0.0, f64::max);
        let budget = budget_frac * max_cost;
        let obj = Objective::new(s.initial_weights(), s.quality_means(), s.hyper().gamma, k);
        let greedy = greedy_fill(&s, &obj, budget, k);
        let brute = brute_force_best(&s, &obj, budget, k).unwrap();
        let any_affordable = sels.iter().any(|p| cost_of(&s, p) <= budget);
        prop_assert_eq!(greedy.is_some(), any_affordable);
        prop_assert_eq!(brute.is_some(), any_affordable);
        if let (Some(g), Some((b, bv))) = (greedy, brute) {
            prop_assert!(g.is_feasible(k) && g.total_cost <= budget + 1e-12);
            prop_assert!(b.total_cost <= budget + 1e-12);
            prop_assert!(obj.evaluate(&s, &g.chosen) <= bv + TOL);
        }
    }

    #[test]
    fn greedy_ignores_a_common_cost_scale(seed in 0u64..10_000, scale in 0.01f64..100.0) {
        let s = random_instance(seed, SMALL);
        let k = s.hyper().k;
        let workers: Vec<WorkerTruth> = s.workers().iter().cloned()
            .map(|w| WorkerTruth { cost_factor: w.cost_factor * scale, ..w })
            .collect();
        let options: Vec<WorkerOption> = s.options().iter().cloned()
            .map(|o| WorkerOption { cost: o.cost * scale, ..o })
            .collect();
        let hyper = Hyperparameters { budget: s.hyper().budget * scale, ..*s.hyper() };
        let scaled = Scenario::new(s.tasks().to_vec(), workers, options, hyper, s.rng_seed()).unwrap();
        let obj = Objective::new(s.initial_weights(), s.quality_means(), 1.0, k);
        let a = greedy_fill(&s, &obj, 1e9, k).unwrap();
        let b = greedy_fill(&scaled, &obj, 1e9, k).unwrap();
        prop_assert_eq!(a.chosen, b.chosen);
    }

    #[test]
    fn every_policy_respects_budget(seed in 0u64..10_000, budget in 0.05f64..20.0) {
        let s = with_hyper(&random_instance(seed, SMALL), |h| h.budget = budget);
        for p in ["diversity_ucb", "old_ucb", "epsilon_greedy:0.1", "epsilon_greedy:0.5", "random"] {
            let run = run(&s, p.parse().unwrap(), seed).unwrap();
            check_run(&s, &run);
        }
    }
}

#[test]
fn static_weights_and_single_contributor_match_old_ucb() {
    for seed in 0..40 {
        let lim = Limits { max_workers: 12, max_options: 3, max_tasks: 20, max_k: 5 };
        let s = with_hyper(&random_instance(seed, lim), |h| {
            h.kappa = 1.0;
            h.r = 1;
            h.budget = 40.0;
        });
        let a = run(&s, PolicyKind::DiversityUcb, seed).unwrap();
        let b = run(&s, PolicyKind::OldUcb, seed).unwrap();
        assert_eq!(a.rounds, b.rounds);
        for (x, y) in a.records.iter().zip(&b.records) {
            assert_eq!(x.selection, y.selection, "seed {seed} round {}", x.round);
        }
    }
}

#[test]
fn runs_are_reproducible() {
    let spec = ScenarioSpec { num_tasks: 60, num_workers: 12, plane_size_m: 2_000.0, budget: 60.0, seed: 4, ..Default::default() };
    let s = spec.build().unwrap();
    for p in ["diversity_ucb", "old_ucb", "epsilon_greedy:0.5", "random"] {
        let kind: PolicyKind = p.parse().unwrap();
        let a = run(&s, kind, 9).unwrap();
        assert_eq!(a, run(&s, kind, 9).unwrap());
        assert!(a.rounds > 0);
        check_run(&s, &a);
    }
}

#[test]
fn policies_share_quality_draws() {
    let s = random_instance(17, SMALL);
    let a = run(&s, PolicyKind::Random, 5).unwrap();
    let b = run(&s, PolicyKind::DiversityUcb, 5).unwrap();
    for ra in &a.records {
        for rb in b.records.iter().filter(|rb| rb.round == ra.round) {
            for (key, q) in &ra.realized_qualities {
                if let Some(q2) = rb.realized_qualities.get(key) {
                    assert_eq!(q, q2);
                }
            }
        }
    }
}

#[test]
fn sweep_single_point_matches_run() {
    let s = random_instance(3, SMALL);
    let out = sweep(&[vec![]], &[PolicyKind::DiversityUcb], &[7, 8], |_, _| Ok(s.clone()));
    assert_eq!(out.len(), 2);
    assert_eq!(out[0].result.as_ref().unwrap(), &run(&s, PolicyKind::DiversityUcb, 7).unwrap());
    assert_eq!(out[1].result.as_ref().unwrap().seed, 8);
}
