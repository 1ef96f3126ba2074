//! Property tests over generated instances: parser round trips, verifier
//! gating, solver/enumeration agreement, memory discipline, and report
//! arithmetic.

use planmem::domain::{
    canonicalize_plan, exact_match, ActorKind, Constraint, ConstraintSet, Mode, Plan, QMem,
    QMemEntry, SessionConfig, TaskKind, TimeOfDay, Verdict, Violation,
};
use planmem::evalharness::generate::{generate_instance, make_infeasible, Difficulty};
use planmem::evalharness::{coverage_from_counts, instance_seed};
use planmem::fixtures::same_items_any_order;
use planmem::orchestrate::{run_session, validate_trace, AgentBundle};
use planmem::queryparse::{
    parse_constraints_text, parse_plan_text, parse_query, parse_time, render_constraints,
    render_plan,
};
use planmem::solve::{enumerate_all, mutation_catalogue, solve};
use planmem::verify::verify;
use proptest::prelude::*;

fn task_kinds() -> impl Strategy<Value = TaskKind> {
    prop_oneof![
        Just(TaskKind::TripPlanning),
        Just(TaskKind::CalendarScheduling),
        Just(TaskKind::MeetingPlanning),
    ]
}

fn difficulties() -> impl Strategy<Value = Difficulty> {
    (2usize..=4, 8u32..=13, any::<bool>())
        .prop_map(|(size, horizon, unique)| Difficulty { size, horizon, unique })
}

fn instances() -> impl Strategy<Value = (TaskKind, planmem::domain::QueryInstance)> {
    (task_kinds(), difficulties(), 0u64..1_000_000).prop_map(|(kind, difficulty, seed)| {
        let instance = generate_instance(kind, difficulty, seed)
            .expect("generation succeeds for in-range difficulties");
        (kind, instance)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rendered_queries_and_constraints_round_trip((kind, instance) in instances()) {
        let (cs, _) = parse_query(kind, &instance.query_text).unwrap();
        let rendered = render_constraints(&cs);
        let (back, _) = parse_constraints_text(kind, &rendered).unwrap();
        prop_assert!(same_items_any_order(&back, &cs), "constraint text diverged:\n{rendered}");
    }

    #[test]
    fn golden_plans_are_accepted_and_render_losslessly((kind, instance) in instances()) {
        let (cs, _) = parse_query(kind, &instance.query_text).unwrap();
        let golden = instance.golden_plan.unwrap();
        let verdict = verify(&cs, &golden).unwrap();
        prop_assert!(verdict.accepted, "golden rejected: {:?}", verdict.violations);
        prop_assert_eq!(verdict.score, 100);
        prop_assert!(verdict.violations.is_empty());
        prop_assert!(exact_match(&golden, &golden).unwrap());

        let text = render_plan(&golden);
        let back = parse_plan_text(kind, &text).unwrap();
        prop_assert_eq!(&back, &golden, "{}", text);
        let canon = canonicalize_plan(&golden).unwrap();
        prop_assert_eq!(canonicalize_plan(&canon).unwrap(), canon);
    }

    #[test]
    fn mutants_are_rejected_with_reasons((kind, instance) in instances()) {
        let (cs, _) = parse_query(kind, &instance.query_text).unwrap();
        let golden = instance.golden_plan.unwrap();
        for (_, mutant) in mutation_catalogue(&cs, &golden) {
            let verdict = verify(&cs, &mutant).unwrap();
            prop_assert!(!verdict.accepted);
            prop_assert!(verdict.score < 100);
            prop_assert!(!verdict.violations.is_empty());
            prop_assert!(verdict.violations.iter().all(|v| !v.reason.trim().is_empty()));
            prop_assert!(!exact_match(&mutant, &golden).unwrap_or(false));
        }
    }

    #[test]
    fn dropping_side_constraints_never_adds_violations(
        (kind, instance) in (
            prop_oneof![Just(TaskKind::TripPlanning), Just(TaskKind::CalendarScheduling)],
            difficulties(),
            0u64..1_000_000,
        ).prop_map(|(kind, difficulty, seed)| {
            (kind, generate_instance(kind, difficulty, seed).unwrap())
        }),
        selector in any::<proptest::sample::Index>(),
    ) {
        let (cs, _) = parse_query(kind, &instance.query_text).unwrap();
        let golden = instance.golden_plan.unwrap();
        let stays = cs.items.iter().filter(|c| matches!(c, Constraint::CityStay { .. })).count();
        let droppable: Vec<usize> = cs
            .items
            .iter()
            .enumerate()
            .filter(|(_, c)| match c {
                Constraint::CityStay { .. } => stays > 1,
                Constraint::FixedWindow { .. }
                | Constraint::BusyInterval { .. }
                | Constraint::Preference { .. } => true,
                _ => false,
            })
            .map(|(i, _)| i)
            .collect();
        prop_assume!(!droppable.is_empty());
        let drop_at = droppable[selector.index(droppable.len())];
        let mut reduced_items = cs.items.clone();
        reduced_items.remove(drop_at);
        let reduced = ConstraintSet::new(kind, reduced_items, cs.source).unwrap();

        let mut plans = vec![golden.clone()];
        plans.extend(mutation_catalogue(&cs, &golden).into_iter().map(|(_, plan)| plan));
        for plan in plans {
            let before = verify(&cs, &plan).unwrap().violations.len();
            let after = verify(&reduced, &plan).unwrap().violations.len();
            prop_assert!(after <= before, "dropping item {drop_at} added violations");
        }
    }

    #[test]
    fn verdict_acceptance_is_exactly_perfect_score(
        score in any::<u8>(),
        reasons in proptest::collection::vec(".{1,20}", 0..4),
    ) {
        let violations: Vec<Violation> =
            reasons.into_iter().map(|reason| Violation { constraint_index: None, reason }).collect();
        let had_violations = !violations.is_empty();
        let verdict = Verdict::new(score, violations);
        prop_assert!(verdict.score <= 100);
        if had_violations {
            prop_assert!(verdict.score <= 99);
        }
        prop_assert_eq!(verdict.accepted, verdict.score == 100 && verdict.violations.is_empty());
    }

    #[test]
    fn qmem_appends_failures_in_turn_order(scores in proptest::collection::vec(0u8..100, 1..8)) {
        let mut qmem = QMem::default();
        for (i, score) in scores.iter().enumerate() {
            let entry = QMemEntry {
                turn: i as u32 + 1,
                plan: Plan::Calendar {
                    day: "monday".into(),
                    start: TimeOfDay::hm(9, 0),
                    end: TimeOfDay::hm(10, 0),
                },
                score: *score,
                violations: vec![],
            };
            qmem.push(entry).unwrap();
            prop_assert_eq!(qmem.len(), i + 1);
        }
        let accepted = QMemEntry {
            turn: scores.len() as u32 + 1,
            plan: Plan::Calendar {
                day: "monday".into(),
                start: TimeOfDay::hm(9, 0),
                end: TimeOfDay::hm(10, 0),
            },
            score: 100,
            violations: vec![],
        };
        prop_assert!(qmem.push(accepted).is_err(), "accepted attempts must not be logged");
        let stale = QMemEntry {
            turn: 1,
            plan: Plan::Calendar {
                day: "monday".into(),
                start: TimeOfDay::hm(9, 0),
                end: TimeOfDay::hm(10, 0),
            },
            score: 10,
            violations: vec![],
        };
        prop_assert!(qmem.push(stale).is_err(), "turns must increase");
        qmem.clear();
        prop_assert!(qmem.is_empty());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solve_agrees_with_enumeration(
        kind in prop_oneof![Just(TaskKind::TripPlanning), Just(TaskKind::CalendarScheduling)],
        difficulty in difficulties(),
        seed in 0u64..1_000_000,
    ) {
        let instance = generate_instance(kind, difficulty, seed).unwrap();
        let (cs, _) = parse_query(kind, &instance.query_text).unwrap();
        let solved = solve(&cs).unwrap();
        let enumerated = enumerate_all(&cs, 2).unwrap();
        prop_assert_eq!(solved.is_none(), enumerated.is_empty());
        prop_assert_eq!(solved.as_ref(), enumerated.first());

        let hard = make_infeasible(&cs).unwrap().unwrap();
        prop_assert!(solve(&hard).unwrap().is_none());
        prop_assert!(enumerate_all(&hard, 2).unwrap().is_empty());
    }

    #[test]
    fn sessions_produce_valid_traces_under_any_mode(
        (kind, instance) in instances(),
        mode in prop_oneof![
            Just(Mode::SingleAgent),
            Just(Mode::SelfReflect),
            Just(Mode::MultiRound),
            Just(Mode::MultiRoundCMem),
            Just(Mode::Full),
        ],
        error_rate in 0.0f64..=1.0,
        seed in any::<u64>(),
    ) {
        let config = SessionConfig {
            mode,
            actor_kind: ActorKind::Noisy { error_rate },
            seed,
            ..SessionConfig::default()
        };
        let mut bundle = AgentBundle::symbolic(&config).unwrap();
        let trace = run_session(&mut bundle, &instance, &config).unwrap();
        prop_assert!(validate_trace(&trace).is_ok(), "{:?}", validate_trace(&trace));
        prop_assert_eq!(trace.task_kind, kind);
        if trace.accepted {
            let (cs, _) = parse_query(kind, &instance.query_text).unwrap();
            let plan = trace.final_plan.as_ref().unwrap();
            prop_assert!(verify(&cs, plan).unwrap().accepted);
        }
    }
}

proptest! {
    #[test]
    fn coverage_rows_are_internally_consistent(
        increments in proptest::collection::vec((1u32..4, 0u64..50, 0u64..50), 1..8),
        extra_queries in 0u64..100,
        extra_successes in 0u64..50,
    ) {
        let mut cap = 0u32;
        let mut finished = 0u64;
        let mut successes = 0u64;
        let mut counts = Vec::new();
        for (cap_step, finish_step, success_step) in increments {
            cap += cap_step;
            finished += finish_step.max(success_step);
            successes += success_step;
            counts.push((cap, finished, successes));
        }
        let total_queries = finished + extra_queries.max(extra_successes);
        let total_successes = successes + extra_successes;
        let rows = coverage_from_counts(total_queries, total_successes, &counts).unwrap();
        prop_assert_eq!(rows.len(), counts.len());
        for pair in rows.windows(2) {
            prop_assert!(pair[1].successes >= pair[0].successes);
            prop_assert_eq!(
                pair[1].delta_successes,
                Some(pair[1].successes as i64 - pair[0].successes as i64)
            );
        }
        prop_assert_eq!(rows[0].delta_successes, None);
        for row in &rows {
            prop_assert!(row.pct_of_dataset <= 100.0);
            prop_assert!(row.pct_of_all_successes <= 100.0);
            prop_assert!(row.successes_remaining >= 0);
            prop_assert_eq!(
                row.successes_remaining,
                total_successes as i64 - row.successes as i64
            );
        }
    }

    #[test]
    fn clock_renderings_parse_back(minutes in 0u16..1440) {
        let t = TimeOfDay(minutes);
        prop_assert_eq!(parse_time(&t.fmt_24h()), Some(t));
        prop_assert_eq!(parse_time(&t.fmt_12h()), Some(t));
        prop_assert_eq!(parse_time(&t.fmt_12h_spaced()), Some(t));
    }

    #[test]
    fn per_session_seeds_are_stable_and_distinct(
        master in any::<u64>(),
        run in 0u32..8,
        id in "[a-z]{1,12}",
    ) {
        prop_assert_eq!(instance_seed(master, run, &id), instance_seed(master, run, &id));
        prop_assert_ne!(instance_seed(master, run, &id), instance_seed(master, run + 1, &id));
    }
}
