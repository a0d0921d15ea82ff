//! Cross-checks between the exact solver, the LP relaxation, the rounding
//! repair, and the enumeration oracle on randomized tiny instances, plus
//! full-scale smoke runs of the default highway scenario.

use pgs_core::pgs::test_support::{random_tiny_instance, single_bs_instance};
use pgs_core::pgs::{
    build_model, check_solution, enumerate_oracle, heuristic_round, solve_exact,
    solve_lp_relaxation, PgsError, PgsInstance, SolveLimits, SolveStatus, SOLVE_TOL,
};
use pgs_core::streaming::QualityLadder;

fn exact(instance: &PgsInstance) -> pgs_core::pgs::PgsSolution {
    let model = build_model(instance).unwrap();
    solve_exact(&model, &SolveLimits::default(), SOLVE_TOL)
}

#[test]
fn exact_matches_oracle_on_random_instances() {
    let mut feasible = 0;
    let mut infeasible = 0;
    for seed in 0..40 {
        let instance = random_tiny_instance(seed);
        let oracle = enumerate_oracle(&instance).unwrap();
        let solved = exact(&instance);
        assert_eq!(
            oracle.status, solved.status,
            "seed {seed}: oracle {:?} vs exact {:?} ({:?})",
            oracle.status, solved.status, solved.infeasibility_note
        );
        match oracle.status {
            SolveStatus::Optimal => {
                feasible += 1;
                let diff = (oracle.objective.unwrap() - solved.objective.unwrap()).abs();
                assert!(diff <= 1e-6, "seed {seed}: objectives differ by {diff}");
            }
            _ => infeasible += 1,
        }
    }
    assert!(feasible >= 20, "only {feasible} feasible instances");
    assert!(infeasible >= 1, "want at least one infeasible case, got {infeasible}");
}

#[test]
fn sandwich_bound_exact_heuristic() {
    for seed in 100..140 {
        let instance = random_tiny_instance(seed);
        let model = build_model(&instance).unwrap();
        let Ok((bound, fractional)) = solve_lp_relaxation(&model) else {
            continue;
        };
        let solved = solve_exact(&model, &SolveLimits::default(), SOLVE_TOL);
        let repaired = heuristic_round(&model, &fractional);
        if solved.status != SolveStatus::Optimal || repaired.status != SolveStatus::Heuristic {
            continue;
        }
        let exact_obj = solved.objective.unwrap();
        let heur_obj = repaired.objective.unwrap();
        assert!(bound <= exact_obj + 1e-6, "seed {seed}: bound {bound} > exact {exact_obj}");
        assert!(
            exact_obj <= heur_obj + 1e-6,
            "seed {seed}: exact {exact_obj} > heuristic {heur_obj}"
        );
    }
}

#[test]
fn solutions_satisfy_all_constraints() {
    for seed in 200..230 {
        let instance = random_tiny_instance(seed);
        let solved = exact(&instance);
        if solved.status != SolveStatus::Optimal {
            continue;
        }
        let checks = check_solution(
            &instance,
            solved.allocation.as_ref().unwrap(),
            solved.quality.as_ref().unwrap(),
            SOLVE_TOL,
        )
        .unwrap();
        for check in checks {
            assert!(
                check.ok,
                "seed {seed}: {} violated by {} at {}",
                check.family, check.worst, check.detail
            );
        }
    }
}

#[test]
fn objective_monotone_in_quality_target() {
    let ladder = QualityLadder::new(vec![0.25e6, 0.5e6]).unwrap();
    let mut rates = vec![1.5e6; 12];
    rates.extend(vec![0.8e6; 12]);
    let mut prev = 0.0;
    for step in 0..=4 {
        let l_req = 1.0 + step as f64 * 0.25;
        let instance = single_bs_instance(vec![rates.clone()], ladder.clone(), 6.0, l_req, None);
        let solved = exact(&instance);
        assert_eq!(solved.status, SolveStatus::Optimal, "l_req {l_req}");
        let obj = solved.objective.unwrap();
        assert!(obj >= prev - 1e-9, "objective dropped at l_req {l_req}: {obj} < {prev}");
        prev = obj;
    }
}

#[test]
fn objective_invariant_under_common_rate_and_ladder_scaling() {
    for seed in [7u64, 21, 33] {
        let instance = random_tiny_instance(seed);
        if instance.prebuffer_cap_bits.is_some() {
            continue;
        }
        let base = exact(&instance);
        for factor in [0.5, 3.0] {
            let scaled_rates: Vec<Vec<f64>> = (0..instance.rates.n_users())
                .map(|i| {
                    (1..=instance.rates.n_slots())
                        .map(|t| instance.rates.rate_bps(i, t) * factor)
                        .collect()
                })
                .collect();
            let scaled_ladder = QualityLadder::new(
                instance.ladder.bitrates_bps().iter().map(|b| b * factor).collect(),
            )
            .unwrap();
            let scaled = PgsInstance::with_ids(
                pgs_core::radio::RateMatrix::from_rates(scaled_rates, instance.rates.slot_s),
                instance.assoc.clone(),
                scaled_ladder,
                instance.schedule.clone(),
                instance.l_req,
                None,
                instance.user_ids.clone(),
            )
            .unwrap();
            let scaled_sol = exact(&scaled);
            assert_eq!(base.status, scaled_sol.status, "seed {seed} factor {factor}");
            if base.status == SolveStatus::Optimal {
                let a = base.objective.unwrap();
                let b = scaled_sol.objective.unwrap();
                assert!(
                    (a - b).abs() <= 1e-6 * a.max(1.0),
                    "seed {seed} factor {factor}: {a} vs {b}"
                );
            }
        }
    }
}

#[test]
fn oracle_rejects_when_too_large() {
    let rates = vec![vec![5e6; 60]; 6];
    let ladder = QualityLadder::new(vec![0.25e6, 0.5e6]).unwrap();
    let instance = single_bs_instance(rates, ladder, 2.0, 1.0, None);
    assert!(matches!(enumerate_oracle(&instance), Err(PgsError::OracleTooLarge(_, _))));
}

#[test]
fn full_scale_default_scenario_solves() {
    use pgs_core::radio::RadioParams;
    use pgs_core::scenario::{generate_highway_scenario, HighwayParams};

    let scenario = generate_highway_scenario(&HighwayParams {
        n_vehicles: 10,
        ..HighwayParams::default()
    })
    .unwrap();
    let instance = PgsInstance::from_scenario(
        &scenario,
        &RadioParams::default(),
        QualityLadder::default_four_level(),
        10.0,
        3.0,
        None,
    )
    .unwrap();
    let model = build_model(&instance).unwrap();
    let start = std::time::Instant::now();
    let solved = solve_exact(&model, &SolveLimits { time_limit_s: 300.0, node_limit: 50_000 }, SOLVE_TOL);
    let elapsed = start.elapsed().as_secs_f64();
    assert_eq!(solved.status, SolveStatus::Optimal, "{:?}", solved.infeasibility_note);
    let objective = solved.objective.unwrap();
    // LP relaxation is tight at integer targets on this scenario
    assert!(
        (objective - solved.lp_bound.unwrap()).abs() <= 1e-5 * objective,
        "gap {} vs {}",
        objective,
        solved.lp_bound.unwrap()
    );
    let checks = check_solution(
        &instance,
        solved.allocation.as_ref().unwrap(),
        solved.quality.as_ref().unwrap(),
        SOLVE_TOL,
    )
    .unwrap();
    for check in checks {
        assert!(check.ok, "{} violated by {}", check.family, check.worst);
    }
    eprintln!(
        "full-scale solve: objective {objective:.4} in {elapsed:.1}s, {} LPs, {} pivots",
        solved.stats.nodes, solved.stats.lp_pivots
    );
}
