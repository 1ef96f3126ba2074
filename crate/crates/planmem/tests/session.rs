//! End-to-end sessions over the LLM path with scripted, flaky, and replayed
//! transports: prompt assembly per mode, reply parsing, retry behavior, and
//! deterministic replay.

use planmem::domain::{
    ActorKind, ExtractorKind, FeedbackScope, Mode, QueryInstance, SessionConfig, TaskKind,
    VerifierKind,
};
use planmem::fixtures;
use planmem::llmio::{
    llm_bundle, FlakyTransport, RecordingTransport, ReplayStore, ReplayTransport, Retry,
    ScriptedTransport, SharedTransport,
};
use planmem::orchestrate::{run_session, validate_trace};
use planmem::queryparse::{render_plan, render_query};
use planmem::solve::solve;
use std::sync::Arc;
use std::time::Duration;

const CLEAN_REPLY: &str = "Score: 100\nViolated Constraints: None\n";

fn llm_config(mode: Mode) -> SessionConfig {
    SessionConfig {
        mode,
        actor_kind: ActorKind::Llm,
        verifier_kind: VerifierKind::Llm,
        extractor_kind: ExtractorKind::Llm,
        seed: 11,
        ..SessionConfig::default()
    }
}

/// The twelve-day trip from the shared fixtures, posed as a query instance.
fn twelve_day_trip() -> QueryInstance {
    let cs = fixtures::trip_verify_constraints();
    QueryInstance {
        id: "trip-twelve".to_string(),
        task_kind: TaskKind::TripPlanning,
        query_text: render_query(&cs),
        golden_plan: Some(solve(&cs).unwrap().expect("the fixture trip is satisfiable")),
        few_shot: None,
    }
}

fn golden_reply(instance: &QueryInstance) -> String {
    render_plan(instance.golden_plan.as_ref().unwrap())
}

fn scripted(replies: &[&str]) -> Arc<ScriptedTransport> {
    Arc::new(ScriptedTransport::new(replies.iter().map(|r| r.to_string()).collect()))
}

#[test]
fn full_mode_feeds_constraints_and_failures_back_to_the_actor() {
    let instance = twelve_day_trip();
    let config = llm_config(Mode::Full);
    let transport = scripted(&[
        fixtures::TRIP_CONSTRAINTS_TEXT,
        fixtures::TRIP_SOLUTION_TEXT,
        fixtures::TRIP_VERIFIER_REPLY,
        &golden_reply(&instance),
        CLEAN_REPLY,
    ]);
    let mut bundle = llm_bundle(&config, transport.clone(), "scripted-model");
    let trace = run_session(&mut bundle, &instance, &config).unwrap();

    validate_trace(&trace).unwrap();
    assert!(trace.accepted);
    assert_eq!(trace.turns_used, 2);
    assert_eq!(trace.exact_match, Some(true));
    let first = trace.turns[0].verdict.as_ref().unwrap();
    assert_eq!(first.score, 90);
    assert_eq!(first.violations.len(), 1);
    assert!(first.violations[0].reason.contains("Munich"));

    let requests = transport.requests_seen();
    assert_eq!(requests.len(), 5);
    for request in &requests {
        assert_eq!(request.model, "scripted-model");
        assert_eq!(request.messages.len(), 1);
    }
    let temperatures: Vec<f64> = requests.iter().map(|r| r.temperature).collect();
    assert_eq!(temperatures, vec![0.1, 0.7, 0.0, 0.7, 0.0]);

    let extractor_prompt = &requests[0].messages[0].content;
    assert!(extractor_prompt.contains(&instance.query_text.trim_end().to_string()));
    assert!(extractor_prompt.contains("constraint"));

    let actor_first = &requests[1].messages[0].content;
    assert!(actor_first.contains("Constraints:"));
    assert!(actor_first.contains("12 days"));
    assert!(!actor_first.contains("Previous Errors:"));
    assert!(!actor_first.contains("Your previous attempt:"));

    let verifier_first = &requests[2].messages[0].content;
    assert!(verifier_first.contains("Proposed solution:"));
    assert!(verifier_first.contains("Visit Munich"));
    assert!(verifier_first.contains("Score: [integer number"));

    let actor_second = &requests[3].messages[0].content;
    assert!(actor_second.contains("Constraints:"));
    assert!(actor_second.contains("Previous Errors:"));
    assert!(actor_second.contains("Attempt 1 (score 90)"));
    assert!(actor_second.contains("Munich visit duration is incorrect"));
    assert!(actor_second.contains("Do not repeat the same errors."));
    assert!(!actor_second.contains("Your previous attempt:"));
}

#[test]
fn single_agent_prompts_carry_no_memory() {
    let instance = twelve_day_trip();
    let config = llm_config(Mode::SingleAgent);
    let transport = scripted(&[
        fixtures::TRIP_CONSTRAINTS_TEXT,
        &golden_reply(&instance),
        CLEAN_REPLY,
    ]);
    let mut bundle = llm_bundle(&config, transport.clone(), "scripted-model");
    let trace = run_session(&mut bundle, &instance, &config).unwrap();

    validate_trace(&trace).unwrap();
    assert!(trace.accepted);
    assert_eq!(trace.turns_used, 1);
    let requests = transport.requests_seen();
    assert_eq!(requests.len(), 3);
    let actor_prompt = &requests[1].messages[0].content;
    assert!(!actor_prompt.contains("Constraints:"));
    assert!(!actor_prompt.contains("Previous Errors:"));
    assert!(!actor_prompt.contains("Your previous attempt:"));
    assert!(actor_prompt.contains("Query:"));
}

#[test]
fn self_reflect_shows_only_the_previous_attempt() {
    let instance = twelve_day_trip();
    let config = llm_config(Mode::SelfReflect);
    let transport = scripted(&[
        fixtures::TRIP_CONSTRAINTS_TEXT,
        fixtures::TRIP_SOLUTION_TEXT,
        fixtures::TRIP_VERIFIER_REPLY,
        &golden_reply(&instance),
        CLEAN_REPLY,
    ]);
    let mut bundle = llm_bundle(&config, transport.clone(), "scripted-model");
    let trace = run_session(&mut bundle, &instance, &config).unwrap();

    validate_trace(&trace).unwrap();
    assert!(trace.accepted);
    let requests = transport.requests_seen();
    let actor_second = &requests[3].messages[0].content;
    assert!(actor_second.contains("Your previous attempt:"));
    assert!(actor_second.contains("Visit Munich"));
    assert!(!actor_second.contains("Constraints:"));
    assert!(!actor_second.contains("Previous Errors:"));
}

#[test]
fn multi_round_drops_constraints_after_the_first_turn() {
    let instance = twelve_day_trip();
    let config = llm_config(Mode::MultiRound);
    let transport = scripted(&[
        fixtures::TRIP_CONSTRAINTS_TEXT,
        fixtures::TRIP_SOLUTION_TEXT,
        fixtures::TRIP_VERIFIER_REPLY,
        &golden_reply(&instance),
        CLEAN_REPLY,
    ]);
    let mut bundle = llm_bundle(&config, transport.clone(), "scripted-model");
    let trace = run_session(&mut bundle, &instance, &config).unwrap();

    validate_trace(&trace).unwrap();
    assert!(trace.accepted);
    let requests = transport.requests_seen();
    let actor_first = &requests[1].messages[0].content;
    assert!(actor_first.contains("Constraints:"));
    let actor_second = &requests[3].messages[0].content;
    assert!(!actor_second.contains("Constraints:"));
    assert!(actor_second.contains("Previous Errors:"));
    assert!(actor_second.contains("- Munich visit duration is incorrect"));
    assert!(!actor_second.contains("Attempt 1"), "multi-round feedback is unlabeled");
}

#[test]
fn latest_only_scope_trims_accumulated_feedback() {
    let instance = twelve_day_trip();
    let second_failure = "Score: 50\nViolated Constraints: The Munich stay is still short.\n";
    let replies = [
        fixtures::TRIP_CONSTRAINTS_TEXT,
        fixtures::TRIP_SOLUTION_TEXT,
        fixtures::TRIP_VERIFIER_REPLY,
        fixtures::TRIP_SOLUTION_TEXT,
        second_failure,
        &golden_reply(&instance),
        CLEAN_REPLY,
    ];

    let mut config = llm_config(Mode::Full);
    config.feedback_scope = FeedbackScope::LatestOnly;
    let transport = scripted(&replies);
    let mut bundle = llm_bundle(&config, transport.clone(), "scripted-model");
    let trace = run_session(&mut bundle, &instance, &config).unwrap();
    assert!(trace.accepted);
    assert_eq!(trace.turns_used, 3);
    let third = &transport.requests_seen()[5].messages[0].content;
    assert!(third.contains("Attempt 2 (score 50)"));
    assert!(!third.contains("Attempt 1"), "latest-only must hide older attempts");

    let config = llm_config(Mode::Full);
    let transport = scripted(&replies);
    let mut bundle = llm_bundle(&config, transport.clone(), "scripted-model");
    let trace = run_session(&mut bundle, &instance, &config).unwrap();
    assert!(trace.accepted);
    let third = &transport.requests_seen()[5].messages[0].content;
    assert!(third.contains("Attempt 1 (score 90)"));
    assert!(third.contains("Attempt 2 (score 50)"));
}

#[test]
fn transient_transport_failures_are_retried() {
    let instance = twelve_day_trip();
    let config = llm_config(Mode::SingleAgent);
    let inner = scripted(&[
        fixtures::TRIP_CONSTRAINTS_TEXT,
        &golden_reply(&instance),
        CLEAN_REPLY,
    ]);
    let flaky: SharedTransport = Arc::new(FlakyTransport::new(inner.clone(), 2));
    let transport: SharedTransport =
        Arc::new(Retry::new(flaky, 3, Duration::from_millis(1)));
    let mut bundle = llm_bundle(&config, transport, "scripted-model");
    let trace = run_session(&mut bundle, &instance, &config).unwrap();
    assert!(trace.accepted);
    assert_eq!(inner.requests_seen().len(), 3, "failures happen before the script is consumed");
}

#[test]
fn unparseable_extraction_aborts_the_session() {
    let instance = twelve_day_trip();
    let config = llm_config(Mode::Full);
    let transport = scripted(&["I cannot help with that."]);
    let mut bundle = llm_bundle(&config, transport, "scripted-model");
    let trace = run_session(&mut bundle, &instance, &config).unwrap();

    validate_trace(&trace).unwrap();
    assert!(!trace.accepted);
    assert!(trace.turns.is_empty());
    assert!(trace.extraction_error.is_some());
    assert_eq!(trace.exact_match, Some(false));
}

#[test]
fn out_of_range_scores_are_clamped() {
    let instance = twelve_day_trip();
    let config = llm_config(Mode::Full);
    let transport = scripted(&[
        fixtures::TRIP_CONSTRAINTS_TEXT,
        &golden_reply(&instance),
        "Score: 240\nViolated Constraints: None\n",
    ]);
    let mut bundle = llm_bundle(&config, transport, "scripted-model");
    let trace = run_session(&mut bundle, &instance, &config).unwrap();
    assert!(trace.accepted);
    assert_eq!(trace.turns[0].verdict.as_ref().unwrap().score, 100);
}

#[test]
fn recorded_sessions_replay_deterministically() {
    let instance = twelve_day_trip();
    let config = llm_config(Mode::Full);
    let dir = tempfile::tempdir().unwrap();

    let inner = scripted(&[
        fixtures::TRIP_CONSTRAINTS_TEXT,
        fixtures::TRIP_SOLUTION_TEXT,
        fixtures::TRIP_VERIFIER_REPLY,
        &golden_reply(&instance),
        CLEAN_REPLY,
    ]);
    let store = ReplayStore::new(dir.path()).unwrap();
    let recording: SharedTransport = Arc::new(RecordingTransport::new(inner, store));
    let mut bundle = llm_bundle(&config, recording, "scripted-model");
    let recorded = run_session(&mut bundle, &instance, &config).unwrap();
    assert!(recorded.accepted);
    assert_eq!(ReplayStore::new(dir.path()).unwrap().len(), 5);

    let mut replays = Vec::new();
    for _ in 0..2 {
        let replay: SharedTransport =
            Arc::new(ReplayTransport::new(ReplayStore::new(dir.path()).unwrap()));
        let mut bundle = llm_bundle(&config, replay, "scripted-model");
        replays.push(run_session(&mut bundle, &instance, &config).unwrap());
    }
    let dump = |t| serde_json::to_string(t).unwrap();
    assert_eq!(dump(&replays[0]), dump(&replays[1]));
    assert_eq!(dump(&recorded), dump(&replays[0]));

    let other = QueryInstance {
        id: "calendar-foreign".to_string(),
        task_kind: TaskKind::CalendarScheduling,
        query_text: fixtures::CALENDAR_QUERY.to_string(),
        golden_plan: Some(fixtures::calendar_golden_plan()),
        few_shot: None,
    };
    let replay: SharedTransport =
        Arc::new(ReplayTransport::new(ReplayStore::new(dir.path()).unwrap()));
    let mut bundle = llm_bundle(&config, replay, "scripted-model");
    let missed = run_session(&mut bundle, &other, &config).unwrap();
    assert!(!missed.accepted);
    let reason = missed.extraction_error.expect("unrecorded requests must not invent replies");
    assert!(reason.contains("no recorded reply"), "{reason}");
}
