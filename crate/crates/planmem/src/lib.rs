//! Dual-memory plan-refine loop for natural-language planning tasks.
//!
//! The crate is organized around a three-agent protocol: a constraint
//! extractor turns a query into a structured constraint set, an actor
//! proposes candidate plans, and a verifier scores each candidate against
//! the constraints. Two per-query memories connect the turns: a constraint
//! memory fixed for the whole session and an append-only log of failed
//! attempts. Both reset when the session ends.
//!
//! Symbolic backends (template parser, deterministic verifier, exhaustive
//! solver, seeded noisy actor) make every part of the loop testable without
//! network access; LLM-backed agents speak the same traits and add a
//! content-addressed replay store for reproducible runs.

pub mod domain;
pub mod evalharness;
pub mod fixtures;
pub mod llmio;
pub mod orchestrate;
pub mod queryparse;
pub mod solve;
pub mod verify;

pub use domain::{
    canonicalize_plan, exact_match, ActorKind, CMem, Constraint, ConstraintSet, ConstraintSource,
    DomainError, ExtractorKind, FeedbackScope, FewShotExample, MeetingEvent, MemoryView, Mode,
    Plan, QMem, QMemEntry, QueryInstance, SessionConfig, SessionTrace, TaskKind, Temperatures,
    TimeOfDay, TripSegment, TurnRecord, Verdict, VerifierKind, Violation,
};
