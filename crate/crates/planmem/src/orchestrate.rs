//! The session engine: one extractor, one actor, and one verifier wired
//! through the two per-query memories.
//!
//! A session runs up to `max_turns` propose/verify rounds for a single
//! query. The constraint memory is built once from the extractor's output;
//! every rejected plan is appended to the failure log together with its
//! score and violations. A plan is accepted only at score 100 with no
//! violations. The [`Mode`] ladder controls which memory slots the actor is
//! shown, not which agents run: extraction and verification always happen,
//! so ablations differ only in actor-visible context. Both memories are
//! cleared when the session ends, whatever the outcome.

use crate::domain::{
    CMem, ConstraintSet, DomainError, FeedbackScope, MemoryView, Mode, Plan, QMem, QMemEntry,
    QueryInstance, SessionConfig, SessionTrace, TaskKind, TimeOfDay, TripSegment, TurnRecord,
    Verdict,
};
use crate::queryparse;
use itertools::Itertools;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("constraint extraction failed: {0}")]
    Extraction(String),
    #[error("plan proposal failed: {0}")]
    Proposal(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

#[derive(Debug, Error)]
pub enum OrchestrateError {
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Turns a natural-language query into a structured constraint set.
pub trait Extractor {
    fn extract(&self, instance: &QueryInstance) -> Result<ConstraintSet, AgentError>;
}

/// Everything an actor may look at when proposing a plan.
pub struct TurnContext<'a> {
    pub instance: &'a QueryInstance,
    pub turn: u32,
    pub view: &'a MemoryView,
    /// The failed attempts the mode lets this actor see, oldest first.
    pub visible_entries: &'a [QMemEntry],
}

/// Proposes one candidate plan per turn.
pub trait Actor {
    fn propose(&mut self, ctx: &TurnContext<'_>, rng: &mut ChaCha8Rng)
        -> Result<Plan, AgentError>;
}

/// Scores a candidate plan against the constraint memory.
pub trait Verifier {
    fn assess(
        &self,
        constraints: &ConstraintSet,
        plan: &Plan,
        instance: &QueryInstance,
    ) -> Result<Verdict, AgentError>;
}

/// The three agents a session runs with.
pub struct AgentBundle {
    pub extractor: Box<dyn Extractor + Send>,
    pub actor: Box<dyn Actor + Send>,
    pub verifier: Box<dyn Verifier + Send>,
}

impl AgentBundle {
    /// Builds the all-symbolic bundle described by the config. LLM-backed
    /// roles cannot be built here; they need a transport.
    pub fn symbolic(config: &SessionConfig) -> Result<AgentBundle, OrchestrateError> {
        let extractor: Box<dyn Extractor + Send> = match config.extractor_kind {
            crate::domain::ExtractorKind::Symbolic => Box::new(SymbolicExtractor),
            crate::domain::ExtractorKind::Llm => {
                return Err(DomainError::InvalidConfig(
                    "an LLM extractor needs a transport; build the bundle from the llmio module"
                        .into(),
                )
                .into())
            }
        };
        let actor: Box<dyn Actor + Send> = match config.actor_kind {
            crate::domain::ActorKind::Oracle => Box::new(OracleActor),
            crate::domain::ActorKind::Noisy { error_rate } => {
                Box::new(NoisyActor { error_rate })
            }
            crate::domain::ActorKind::AlwaysFail => Box::new(AlwaysFailActor),
            crate::domain::ActorKind::Llm => {
                return Err(DomainError::InvalidConfig(
                    "an LLM actor needs a transport; build the bundle from the llmio module"
                        .into(),
                )
                .into())
            }
        };
        let verifier: Box<dyn Verifier + Send> = match config.verifier_kind {
            crate::domain::VerifierKind::Symbolic => Box::new(SymbolicVerifier),
            crate::domain::VerifierKind::Llm => {
                return Err(DomainError::InvalidConfig(
                    "an LLM verifier needs a transport; build the bundle from the llmio module"
                        .into(),
                )
                .into())
            }
        };
        Ok(AgentBundle { extractor, actor, verifier })
    }
}

/// The two per-query memories. Exposed so callers can observe the reset at
/// session end.
#[derive(Debug, Default)]
pub struct SessionState {
    pub cmem: Option<CMem>,
    pub qmem: QMem,
}

impl SessionState {
    pub fn is_reset(&self) -> bool {
        self.cmem.is_none() && self.qmem.is_empty()
    }
}

/// Clears both memories.
pub fn reset_session(state: &mut SessionState) {
    state.cmem = None;
    state.qmem.clear();
}

/// Renders one failed attempt with its score and violation bullets.
pub fn render_qmem_entry(entry: &QMemEntry) -> String {
    let mut out = format!("Attempt {} (score {}):\n", entry.turn, entry.score);
    out.push_str(&queryparse::render_plan(&entry.plan));
    for violation in &entry.violations {
        out.push_str(&format!("- {}\n", violation.reason));
    }
    out
}

/// Renders the full failure log, oldest attempt first.
pub fn render_qmem(entries: &[QMemEntry]) -> String {
    entries.iter().map(render_qmem_entry).join("\n")
}

fn render_errors_only(entry: &QMemEntry) -> String {
    entry
        .violations
        .iter()
        .map(|v| format!("- {}\n", v.reason))
        .collect()
}

/// Fills the actor-facing memory slots for one turn according to the mode.
pub fn apply_mode(
    mode: Mode,
    scope: FeedbackScope,
    turn: u32,
    cmem: &CMem,
    qmem: &QMem,
) -> MemoryView {
    let mut view = MemoryView::default();
    let last = qmem.entries().last();
    match mode {
        Mode::SingleAgent => {}
        Mode::SelfReflect => {
            view.previous_attempt_text = last.map(|e| queryparse::render_plan(&e.plan));
        }
        Mode::MultiRound => {
            if turn == 1 {
                view.cmem_text = Some(cmem.rendered_text.clone());
            }
            view.latest_errors_text = last.map(render_errors_only);
        }
        Mode::MultiRoundCMem => {
            view.cmem_text = Some(cmem.rendered_text.clone());
            view.latest_errors_text = last.map(render_errors_only);
        }
        Mode::Full => {
            view.cmem_text = Some(cmem.rendered_text.clone());
            let entries = qmem.entries();
            if !entries.is_empty() {
                let shown = match scope {
                    FeedbackScope::Accumulated => entries,
                    FeedbackScope::LatestOnly => &entries[entries.len() - 1..],
                };
                view.qmem_errors_text = Some(render_qmem(shown));
            }
        }
    }
    view
}

/// The slice of the failure log the mode lets the actor see.
pub fn visible_entries(mode: Mode, scope: FeedbackScope, qmem: &QMem) -> &[QMemEntry] {
    let entries = qmem.entries();
    let latest = || {
        if entries.is_empty() {
            &entries[..0]
        } else {
            &entries[entries.len() - 1..]
        }
    };
    match mode {
        Mode::SingleAgent => &entries[..0],
        Mode::SelfReflect | Mode::MultiRound | Mode::MultiRoundCMem => latest(),
        Mode::Full => match scope {
            FeedbackScope::Accumulated => entries,
            FeedbackScope::LatestOnly => latest(),
        },
    }
}

/// Runs one complete session with fresh memories.
pub fn run_session(
    bundle: &mut AgentBundle,
    instance: &QueryInstance,
    config: &SessionConfig,
) -> Result<SessionTrace, OrchestrateError> {
    let mut state = SessionState::default();
    let trace = run_session_with_state(bundle, instance, config, &mut state)?;
    debug_assert!(state.is_reset());
    Ok(trace)
}

/// Runs one session against caller-owned memories. The memories are cleared
/// before the first turn and again when the session ends.
pub fn run_session_with_state(
    bundle: &mut AgentBundle,
    instance: &QueryInstance,
    config: &SessionConfig,
    state: &mut SessionState,
) -> Result<SessionTrace, OrchestrateError> {
    config.validate()?;
    reset_session(state);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let max_turns = match config.mode {
        Mode::SingleAgent => 1,
        _ => config.max_turns,
    };

    let constraints = match bundle.extractor.extract(instance) {
        Ok(cs) => cs,
        Err(err) => {
            reset_session(state);
            return Ok(SessionTrace {
                instance_id: instance.id.clone(),
                task_kind: instance.task_kind,
                mode: config.mode,
                cmem_text: None,
                turns: Vec::new(),
                accepted: false,
                turns_used: 0,
                final_plan: None,
                exact_match: instance.golden_plan.as_ref().map(|_| false),
                seed: config.seed,
                extraction_error: Some(err.to_string()),
            });
        }
    };
    let rendered = queryparse::render_constraints(&constraints);
    state.cmem = Some(CMem::new(constraints, rendered.clone()));

    let mut turns: Vec<TurnRecord> = Vec::new();
    let mut accepted_plan: Option<Plan> = None;
    let mut last_plan: Option<Plan> = None;

    for turn in 1..=max_turns {
        let cmem = state.cmem.as_ref().expect("constraint memory is set for the session");
        let view = apply_mode(config.mode, config.feedback_scope, turn, cmem, &state.qmem);
        let visible: Vec<QMemEntry> =
            visible_entries(config.mode, config.feedback_scope, &state.qmem).to_vec();
        let qmem_len = state.qmem.len() as u32;
        let ctx = TurnContext { instance, turn, view: &view, visible_entries: &visible };
        let plan = match bundle.actor.propose(&ctx, &mut rng) {
            Ok(plan) => plan,
            Err(err) => {
                turns.push(TurnRecord {
                    turn,
                    view,
                    qmem_len,
                    plan: None,
                    verdict: None,
                    error: Some(err.to_string()),
                });
                continue;
            }
        };
        let verdict = match bundle.verifier.assess(&cmem.constraints, &plan, instance) {
            Ok(verdict) => verdict,
            Err(err) => {
                turns.push(TurnRecord {
                    turn,
                    view,
                    qmem_len,
                    plan: Some(plan.clone()),
                    verdict: None,
                    error: Some(err.to_string()),
                });
                last_plan = Some(plan);
                continue;
            }
        };
        turns.push(TurnRecord {
            turn,
            view,
            qmem_len,
            plan: Some(plan.clone()),
            verdict: Some(verdict.clone()),
            error: None,
        });
        last_plan = Some(plan.clone());
        if verdict.accepted {
            accepted_plan = Some(plan);
            break;
        }
        state.qmem.push(QMemEntry {
            turn,
            plan,
            score: verdict.score,
            violations: verdict.violations,
        })?;
    }

    let accepted = accepted_plan.is_some();
    let final_plan = accepted_plan.or(last_plan);
    let exact_match = match (&instance.golden_plan, &final_plan) {
        (Some(golden), Some(plan)) => {
            Some(crate::domain::exact_match(golden, plan).unwrap_or(false))
        }
        (Some(_), None) => Some(false),
        (None, _) => None,
    };
    let trace = SessionTrace {
        instance_id: instance.id.clone(),
        task_kind: instance.task_kind,
        mode: config.mode,
        cmem_text: Some(rendered),
        turns_used: turns.len() as u32,
        turns,
        accepted,
        final_plan,
        exact_match,
        seed: config.seed,
        extraction_error: None,
    };
    reset_session(state);
    Ok(trace)
}

/// Checks a finished trace against the protocol rules: turns strictly
/// increase, nothing runs after acceptance, acceptance happens only at
/// score 100 with no violations, the failure log grows by exactly one entry
/// per rejected plan, and any constraint text shown to the actor matches
/// the session's constraint memory.
pub fn validate_trace(trace: &SessionTrace) -> Result<(), String> {
    let mut last_turn = 0u32;
    let mut accepted_seen = false;
    let mut failures = 0u32;
    for rec in &trace.turns {
        if accepted_seen {
            return Err(format!("turn {} ran after a plan was accepted", rec.turn));
        }
        if rec.turn <= last_turn {
            return Err(format!("turn {} does not follow turn {last_turn}", rec.turn));
        }
        last_turn = rec.turn;
        if rec.qmem_len != failures {
            return Err(format!(
                "turn {} saw {} logged failures but {} rejected plans came before it",
                rec.turn, rec.qmem_len, failures
            ));
        }
        if let Some(text) = &rec.view.cmem_text {
            if trace.cmem_text.as_deref() != Some(text.as_str()) {
                return Err(format!(
                    "turn {} shows constraint text that differs from the session's",
                    rec.turn
                ));
            }
        }
        match &rec.verdict {
            Some(verdict) => {
                let should_accept = verdict.score == 100 && verdict.violations.is_empty();
                if verdict.accepted != should_accept {
                    return Err(format!(
                        "turn {} verdict acceptance is inconsistent with its score",
                        rec.turn
                    ));
                }
                if verdict.accepted {
                    accepted_seen = true;
                } else {
                    failures += 1;
                }
            }
            None if rec.error.is_none() => {
                return Err(format!("turn {} has neither a verdict nor an error", rec.turn))
            }
            None => {}
        }
    }
    if trace.accepted != accepted_seen {
        return Err("trace acceptance flag disagrees with its verdicts".to_string());
    }
    if trace.accepted && trace.final_plan.is_none() {
        return Err("accepted trace has no final plan".to_string());
    }
    if trace.turns_used != trace.turns.len() as u32 {
        return Err(format!(
            "turns_used is {} but {} turns were recorded",
            trace.turns_used,
            trace.turns.len()
        ));
    }
    if trace.extraction_error.is_some() && !trace.turns.is_empty() {
        return Err("aborted extraction must not record turns".to_string());
    }
    Ok(())
}

/// Parses the query with the template grammar.
pub struct SymbolicExtractor;

impl Extractor for SymbolicExtractor {
    fn extract(&self, instance: &QueryInstance) -> Result<ConstraintSet, AgentError> {
        queryparse::parse_query(instance.task_kind, &instance.query_text)
            .map(|(cs, _)| cs)
            .map_err(|e| AgentError::Extraction(e.to_string()))
    }
}

/// Scores plans with the deterministic checker.
pub struct SymbolicVerifier;

impl Verifier for SymbolicVerifier {
    fn assess(
        &self,
        constraints: &ConstraintSet,
        plan: &Plan,
        _instance: &QueryInstance,
    ) -> Result<Verdict, AgentError> {
        crate::verify::verify(constraints, plan).map_err(|e| AgentError::Verification(e.to_string()))
    }
}

fn parse_own_constraints(instance: &QueryInstance) -> Result<ConstraintSet, AgentError> {
    queryparse::parse_query(instance.task_kind, &instance.query_text)
        .map(|(cs, _)| cs)
        .map_err(|e| AgentError::Proposal(e.to_string()))
}

/// Always proposes a correct plan when one exists. Reads the query itself
/// rather than the constraint memory, so it works in every mode.
pub struct OracleActor;

impl Actor for OracleActor {
    fn propose(
        &mut self,
        ctx: &TurnContext<'_>,
        _rng: &mut ChaCha8Rng,
    ) -> Result<Plan, AgentError> {
        let cs = parse_own_constraints(ctx.instance)?;
        crate::solve::solve(&cs)
            .map_err(|e| AgentError::Proposal(e.to_string()))?
            .ok_or_else(|| AgentError::Proposal("no feasible plan exists".to_string()))
    }
}

/// Corrupts the correct plan with probability `error_rate`, avoiding any
/// plan it can see in the failure log.
pub struct NoisyActor {
    pub error_rate: f64,
}

impl Actor for NoisyActor {
    fn propose(
        &mut self,
        ctx: &TurnContext<'_>,
        rng: &mut ChaCha8Rng,
    ) -> Result<Plan, AgentError> {
        let cs = parse_own_constraints(ctx.instance)?;
        crate::solve::noisy_actor_step(&cs, ctx.visible_entries, self.error_rate, rng)
            .map_err(|e| AgentError::Proposal(e.to_string()))
    }
}

/// Emits a deterministically rejected plan every turn; the floor baseline.
pub struct AlwaysFailActor;

impl Actor for AlwaysFailActor {
    fn propose(
        &mut self,
        ctx: &TurnContext<'_>,
        _rng: &mut ChaCha8Rng,
    ) -> Result<Plan, AgentError> {
        let cs = parse_own_constraints(ctx.instance)?;
        Ok(always_failing_plan(&cs))
    }
}

/// A plan the deterministic checker is guaranteed to reject.
pub fn always_failing_plan(cs: &ConstraintSet) -> Plan {
    match cs.task_kind {
        TaskKind::TripPlanning => {
            let total = cs
                .items
                .iter()
                .find_map(|c| match c {
                    crate::domain::Constraint::TotalDuration { days } => Some(*days),
                    _ => None,
                })
                .unwrap_or(1);
            let city = cs
                .items
                .iter()
                .find_map(|c| match c {
                    crate::domain::Constraint::CityStay { city, .. } => Some(city.clone()),
                    _ => None,
                })
                .unwrap_or_else(|| "Nowhere".to_string());
            Plan::Trip {
                segments: vec![TripSegment { city, start_day: 1, end_day: total + 1 }],
            }
        }
        TaskKind::CalendarScheduling => {
            let mut day = "Monday".to_string();
            let mut duration = 30u16;
            let mut start = TimeOfDay::hm(9, 0);
            for item in &cs.items {
                match item {
                    crate::domain::Constraint::MeetingDay { day: d } => day = d.clone(),
                    crate::domain::Constraint::MeetingDuration { minutes } => {
                        duration = *minutes as u16
                    }
                    crate::domain::Constraint::WorkHours { start: ws, .. } => start = *ws,
                    _ => {}
                }
            }
            let end = TimeOfDay((start.0 + duration + 30).min(TimeOfDay::DAY_END.0));
            Plan::Calendar { day, start, end }
        }
        TaskKind::MeetingPlanning => {
            if crate::solve::max_friends_met(cs).unwrap_or(0) == 0 {
                Plan::Meeting {
                    events: vec![crate::domain::MeetingEvent {
                        friend: "Nobody".to_string(),
                        location: "Nowhere".to_string(),
                        meet_start: TimeOfDay::hm(0, 0),
                        meet_end: TimeOfDay::hm(0, 1),
                    }],
                }
            } else {
                Plan::Meeting { events: vec![] }
            }
        }
    }
}

/// Replays a fixed sequence of plans; for tests.
pub struct ScriptedActor {
    plans: VecDeque<Plan>,
}

impl ScriptedActor {
    pub fn new(plans: Vec<Plan>) -> ScriptedActor {
        ScriptedActor { plans: plans.into() }
    }
}

impl Actor for ScriptedActor {
    fn propose(
        &mut self,
        _ctx: &TurnContext<'_>,
        _rng: &mut ChaCha8Rng,
    ) -> Result<Plan, AgentError> {
        self.plans
            .pop_front()
            .ok_or_else(|| AgentError::Proposal("scripted actor ran out of plans".to_string()))
    }
}
