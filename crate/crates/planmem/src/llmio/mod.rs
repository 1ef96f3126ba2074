//! LLM-backed agents: prompt templates, reply parsing, and the chat
//! transport stack.
//!
//! Templates are plain paragraph lists with named slots. A paragraph whose
//! slot has no value this turn is omitted entirely, which is how one actor
//! template serves every ablation mode: the constraint and feedback
//! paragraphs simply disappear when the mode withholds them.

pub mod transport;

pub use transport::{
    request_hash, ChatMessage, ChatReply, ChatRequest, FlakyTransport, LiveSettings,
    LiveTransport, RecordingTransport, ReplayStore, ReplayTransport, Retry, ScriptedTransport,
    SharedTransport, Transport, TransportError,
};

use crate::domain::{
    ConstraintSet, FewShotExample, Plan, QueryInstance, TaskKind, Verdict, Violation,
};
use crate::orchestrate::{Actor, AgentBundle, AgentError, Extractor, TurnContext, Verifier};
use crate::queryparse;
use itertools::Itertools;
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use std::sync::LazyLock;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("template error: {0}")]
    Template(String),
    #[error("could not parse verifier reply: {0}")]
    ReplyParse(String),
    #[error("could not parse extracted constraints: {0}")]
    ExtractionParse(String),
    #[error(transparent)]
    Transport(#[from] TransportError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PromptRole {
    Extractor,
    Actor,
    Verifier,
}

/// A prompt body made of blank-line-separated paragraphs with `{slot}`
/// placeholders.
#[derive(Debug, Clone)]
pub struct PromptTemplate {
    pub role: PromptRole,
    pub body: String,
}

/// Values available to fill a template with. `None` means the slot has no
/// content this turn and its paragraphs are dropped.
#[derive(Debug, Clone, Default)]
pub struct PromptSlots {
    pub query: Option<String>,
    pub constraints: Option<String>,
    pub solution: Option<String>,
    pub errors: Option<String>,
    pub few_shot: Option<String>,
    pub previous_attempt: Option<String>,
}

const SLOT_NAMES: [&str; 6] =
    ["query", "constraints", "solution", "errors", "few_shot", "previous_attempt"];

fn slot_value<'a>(slots: &'a PromptSlots, name: &str) -> Option<&'a str> {
    let field = match name {
        "query" => &slots.query,
        "constraints" => &slots.constraints,
        "solution" => &slots.solution,
        "errors" => &slots.errors,
        "few_shot" => &slots.few_shot,
        "previous_attempt" => &slots.previous_attempt,
        _ => return None,
    };
    field.as_deref()
}

/// Renders a template: paragraphs whose slots are unfilled are dropped,
/// everything else is substituted. `{query}` is always mandatory and
/// `{solution}` is mandatory for verifier templates.
pub fn build_prompt(template: &PromptTemplate, slots: &PromptSlots) -> Result<String, LlmError> {
    if !template.body.contains("{query}") {
        return Err(LlmError::Template("template body must reference {query}".to_string()));
    }
    if slots.query.is_none() {
        return Err(LlmError::Template("the {query} slot is required".to_string()));
    }
    if template.role == PromptRole::Verifier {
        if !template.body.contains("{solution}") {
            return Err(LlmError::Template(
                "verifier templates must reference {solution}".to_string(),
            ));
        }
        if slots.solution.is_none() {
            return Err(LlmError::Template(
                "the {solution} slot is required for the verifier".to_string(),
            ));
        }
    }
    let mut kept: Vec<String> = Vec::new();
    for paragraph in template.body.split("\n\n") {
        let mut text = paragraph.to_string();
        let mut dropped = false;
        for name in SLOT_NAMES {
            let placeholder = format!("{{{name}}}");
            if !paragraph.contains(&placeholder) {
                continue;
            }
            match slot_value(slots, name) {
                Some(value) => text = text.replace(&placeholder, value.trim_end()),
                None => {
                    dropped = true;
                    break;
                }
            }
        }
        if !dropped {
            kept.push(text);
        }
    }
    Ok(kept.join("\n\n"))
}

pub fn default_extractor_template() -> PromptTemplate {
    PromptTemplate {
        role: PromptRole::Extractor,
        body: "\
You extract scheduling constraints from planning queries. Do not solve the problem.

Here are worked examples:
{few_shot}

Query:
{query}

List every constraint stated in the query as a numbered list, grouped by type, \
using the same wording conventions as the examples."
            .to_string(),
    }
}

pub fn default_actor_template() -> PromptTemplate {
    PromptTemplate {
        role: PromptRole::Actor,
        body: "\
You write plans that satisfy every stated requirement.

Here are worked examples:
{few_shot}

Query:
{query}

Constraints:
{constraints}

Your previous attempt:
{previous_attempt}

Previous Errors:
{errors}
Do not repeat the same errors.

Write the final plan, one step per line, with no commentary."
            .to_string(),
    }
}

pub fn default_verifier_template() -> PromptTemplate {
    PromptTemplate {
        role: PromptRole::Verifier,
        body: "\
You are a strict plan checker. Check the proposed solution against every constraint.

Query:
{query}

Constraints:
{constraints}

Proposed solution:
{solution}

Reply in exactly this format:
Score: [integer number, reward score between 0 and 100]
Violated Constraints: [string, list any constraints that the plan violates or any errors \
in the plan, and provide the reason why each constraint was violated]"
            .to_string(),
    }
}

static SCORE_LINE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^\s*score\s*:\s*(.*)$").expect("static regex"));
static VIOLATIONS_LINE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)^\s*(?:violated constraints|errors)\s*:\s*(.*)$").expect("static regex")
});
static FIRST_INT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"-?\d+").expect("static regex"));
static ENUMERATOR: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\s*\d+[.)]\s*").expect("static regex"));

fn none_like(text: &str) -> bool {
    matches!(
        text.trim().trim_end_matches('.').to_ascii_lowercase().as_str(),
        "" | "none" | "n/a" | "na" | "-" | "[]" | "null" | "nothing" | "no violations"
            | "no violations found"
    )
}

fn push_violation(violations: &mut Vec<Violation>, line: &str) {
    let text = line.trim().trim_start_matches(['-', '*', '•']).trim();
    let text = ENUMERATOR.replace(text, "");
    let text = text.trim().trim_start_matches('[').trim_end_matches(']').trim();
    if none_like(text) {
        return;
    }
    violations.push(Violation { constraint_index: None, reason: text.to_string() });
}

/// Parses a verifier reply of the `Score:` / `Violated Constraints:` shape.
///
/// Scores outside `[0, 100]` are clamped with a logged warning; a reply
/// with no score line is an error. A score of 100 alongside violations is
/// demoted by [`Verdict::new`].
pub fn parse_verifier_reply(text: &str) -> Result<Verdict, LlmError> {
    let mut score: Option<i64> = None;
    let mut violations: Vec<Violation> = Vec::new();
    let mut in_violations = false;
    for line in text.lines() {
        if let Some(caps) = SCORE_LINE.captures(line) {
            in_violations = false;
            if score.is_some() {
                continue;
            }
            let rest = caps[1].trim();
            let rest = rest.trim_start_matches('[').trim_end_matches(']');
            match FIRST_INT.find(rest).and_then(|m| m.as_str().parse::<i64>().ok()) {
                Some(value) => score = Some(value),
                None => {
                    return Err(LlmError::ReplyParse(format!(
                        "score line carries no integer: {line:?}"
                    )))
                }
            }
            continue;
        }
        if let Some(caps) = VIOLATIONS_LINE.captures(line) {
            in_violations = true;
            push_violation(&mut violations, &caps[1]);
            continue;
        }
        if in_violations {
            push_violation(&mut violations, line);
        }
    }
    let raw = score
        .ok_or_else(|| LlmError::ReplyParse("reply has no Score: line".to_string()))?;
    let clamped = raw.clamp(0, 100) as u8;
    if raw != clamped as i64 {
        log::warn!("verifier reported score {raw}; clamped to {clamped}");
    }
    Ok(Verdict::new(clamped, violations))
}

/// Renders a verdict back into the reply shape; `parse_verifier_reply`
/// recovers the same score and violation count.
pub fn render_verdict_text(verdict: &Verdict) -> String {
    let mut out = format!("Score: {}\n", verdict.score);
    match verdict.violations.as_slice() {
        [] => out.push_str("Violated Constraints: None\n"),
        [only] => out.push_str(&format!("Violated Constraints: {}\n", only.reason)),
        many => {
            out.push_str("Violated Constraints:\n");
            for violation in many {
                out.push_str(&format!("- {}\n", violation.reason));
            }
        }
    }
    out
}

/// Parses an extractor reply written in the numbered constraint-list style.
pub fn parse_extractor_reply(kind: TaskKind, text: &str) -> Result<ConstraintSet, LlmError> {
    queryparse::parse_constraints_text(kind, text)
        .map(|(cs, _)| cs)
        .map_err(|e| LlmError::ExtractionParse(e.to_string()))
}

/// Renders few-shot examples for the `{few_shot}` slot.
pub fn render_few_shot(examples: &[FewShotExample]) -> String {
    examples
        .iter()
        .map(|ex| {
            format!(
                "Example query:\n{}\nExample plan:\n{}",
                ex.query_text.trim_end(),
                ex.plan_text.trim_end()
            )
        })
        .join("\n\n")
}

fn chat_request(
    model: &str,
    temperature: f64,
    max_tokens: Option<u32>,
    prompt: String,
) -> ChatRequest {
    ChatRequest {
        model: model.to_string(),
        temperature,
        messages: vec![ChatMessage::user(prompt)],
        max_tokens,
    }
}

/// Extracts constraints by prompting a chat model.
pub struct LlmExtractor {
    pub transport: SharedTransport,
    pub template: PromptTemplate,
    pub model: String,
    pub temperature: f64,
    pub max_tokens: Option<u32>,
}

impl Extractor for LlmExtractor {
    fn extract(&self, instance: &QueryInstance) -> Result<ConstraintSet, AgentError> {
        let slots = PromptSlots {
            query: Some(instance.query_text.clone()),
            few_shot: instance.few_shot.as_deref().map(render_few_shot),
            ..PromptSlots::default()
        };
        let prompt =
            build_prompt(&self.template, &slots).map_err(|e| AgentError::Extraction(e.to_string()))?;
        let request = chat_request(&self.model, self.temperature, self.max_tokens, prompt);
        let reply =
            self.transport.send(&request).map_err(|e| AgentError::Extraction(e.to_string()))?;
        parse_extractor_reply(instance.task_kind, &reply.text)
            .map_err(|e| AgentError::Extraction(e.to_string()))
    }
}

/// Proposes plans by prompting a chat model with whatever memory slots the
/// mode exposes.
pub struct LlmActor {
    pub transport: SharedTransport,
    pub template: PromptTemplate,
    pub model: String,
    pub temperature: f64,
    pub max_tokens: Option<u32>,
}

impl Actor for LlmActor {
    fn propose(
        &mut self,
        ctx: &TurnContext<'_>,
        _rng: &mut ChaCha8Rng,
    ) -> Result<Plan, AgentError> {
        let view = ctx.view;
        let slots = PromptSlots {
            query: Some(ctx.instance.query_text.clone()),
            constraints: view.cmem_text.clone(),
            errors: view.qmem_errors_text.clone().or_else(|| view.latest_errors_text.clone()),
            previous_attempt: view.previous_attempt_text.clone(),
            few_shot: ctx.instance.few_shot.as_deref().map(render_few_shot),
            ..PromptSlots::default()
        };
        let prompt =
            build_prompt(&self.template, &slots).map_err(|e| AgentError::Proposal(e.to_string()))?;
        let request = chat_request(&self.model, self.temperature, self.max_tokens, prompt);
        let reply =
            self.transport.send(&request).map_err(|e| AgentError::Proposal(e.to_string()))?;
        queryparse::parse_plan_text(ctx.instance.task_kind, &reply.text)
            .map_err(|e| AgentError::Proposal(e.to_string()))
    }
}

/// Scores plans by prompting a chat model and parsing its reply.
pub struct LlmVerifier {
    pub transport: SharedTransport,
    pub template: PromptTemplate,
    pub model: String,
    pub temperature: f64,
    pub max_tokens: Option<u32>,
}

impl Verifier for LlmVerifier {
    fn assess(
        &self,
        constraints: &ConstraintSet,
        plan: &Plan,
        instance: &QueryInstance,
    ) -> Result<Verdict, AgentError> {
        let slots = PromptSlots {
            query: Some(instance.query_text.clone()),
            constraints: Some(queryparse::render_constraints(constraints)),
            solution: Some(queryparse::render_plan(plan)),
            ..PromptSlots::default()
        };
        let prompt = build_prompt(&self.template, &slots)
            .map_err(|e| AgentError::Verification(e.to_string()))?;
        let request = chat_request(&self.model, self.temperature, self.max_tokens, prompt);
        let reply =
            self.transport.send(&request).map_err(|e| AgentError::Verification(e.to_string()))?;
        parse_verifier_reply(&reply.text).map_err(|e| AgentError::Verification(e.to_string()))
    }
}

/// Builds a bundle where roles marked `Llm` in the config talk through the
/// given transport and all other roles stay symbolic.
pub fn llm_bundle(
    config: &crate::domain::SessionConfig,
    transport: SharedTransport,
    model: &str,
) -> AgentBundle {
    let extractor: Box<dyn Extractor + Send> = match config.extractor_kind {
        crate::domain::ExtractorKind::Symbolic => Box::new(crate::orchestrate::SymbolicExtractor),
        crate::domain::ExtractorKind::Llm => Box::new(LlmExtractor {
            transport: transport.clone(),
            template: default_extractor_template(),
            model: model.to_string(),
            temperature: config.temperatures.extractor,
            max_tokens: None,
        }),
    };
    let actor: Box<dyn Actor + Send> = match config.actor_kind {
        crate::domain::ActorKind::Oracle => Box::new(crate::orchestrate::OracleActor),
        crate::domain::ActorKind::Noisy { error_rate } => {
            Box::new(crate::orchestrate::NoisyActor { error_rate })
        }
        crate::domain::ActorKind::AlwaysFail => Box::new(crate::orchestrate::AlwaysFailActor),
        crate::domain::ActorKind::Llm => Box::new(LlmActor {
            transport: transport.clone(),
            template: default_actor_template(),
            model: model.to_string(),
            temperature: config.temperatures.actor,
            max_tokens: None,
        }),
    };
    let verifier: Box<dyn Verifier + Send> = match config.verifier_kind {
        crate::domain::VerifierKind::Symbolic => Box::new(crate::orchestrate::SymbolicVerifier),
        crate::domain::VerifierKind::Llm => Box::new(LlmVerifier {
            transport,
            template: default_verifier_template(),
            model: model.to_string(),
            temperature: config.temperatures.verifier,
            max_tokens: None,
        }),
    };
    AgentBundle { extractor, actor, verifier }
}
