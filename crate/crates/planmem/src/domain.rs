//! Core data model shared by every other module: task kinds, constraints,
//! plans, verdicts, the two per-query memories, session configuration and
//! traces, plus plan canonicalization and exact-match comparison.
//!
//! All times are integer minutes since midnight and all itinerary days are
//! 1-based integers, so every check in the crate is exact arithmetic.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// The three planning task families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    TripPlanning,
    CalendarScheduling,
    MeetingPlanning,
}

impl TaskKind {
    pub const ALL: [TaskKind; 3] = [
        TaskKind::TripPlanning,
        TaskKind::CalendarScheduling,
        TaskKind::MeetingPlanning,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TaskKind::TripPlanning => "trip",
            TaskKind::CalendarScheduling => "calendar",
            TaskKind::MeetingPlanning => "meeting",
        }
    }

    pub fn parse(s: &str) -> Option<TaskKind> {
        match s.trim().to_ascii_lowercase().as_str() {
            "trip" | "trip_planning" | "tripplanning" => Some(TaskKind::TripPlanning),
            "calendar" | "calendar_scheduling" | "calendarscheduling" => {
                Some(TaskKind::CalendarScheduling)
            }
            "meeting" | "meeting_planning" | "meetingplanning" => Some(TaskKind::MeetingPlanning),
            _ => None,
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Minutes since midnight, in `[0, 1440]`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct TimeOfDay(pub u16);

impl TimeOfDay {
    pub const DAY_END: TimeOfDay = TimeOfDay(24 * 60);

    pub fn hm(hours: u16, minutes: u16) -> TimeOfDay {
        TimeOfDay(hours * 60 + minutes)
    }

    pub fn minutes(&self) -> u16 {
        self.0
    }

    /// 24-hour rendering, zero-padded: `09:00`, `14:30`.
    pub fn fmt_24h(&self) -> String {
        format!("{:02}:{:02}", self.0 / 60, self.0 % 60)
    }

    /// 12-hour rendering without a space: `9:00AM`, `1:30PM`.
    pub fn fmt_12h(&self) -> String {
        let (h24, m) = (self.0 / 60, self.0 % 60);
        let suffix = if h24 < 12 || h24 == 24 { "AM" } else { "PM" };
        let h = match h24 % 12 {
            0 => 12,
            h => h,
        };
        format!("{h}:{m:02}{suffix}")
    }

    /// 12-hour rendering with a space before the meridiem: `9:00 AM`.
    pub fn fmt_12h_spaced(&self) -> String {
        let s = self.fmt_12h();
        let split = s.len() - 2;
        format!("{} {}", &s[..split], &s[split..])
    }
}

impl fmt::Display for TimeOfDay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fmt_24h())
    }
}

/// One task-specific requirement extracted from a query.
///
/// The variants form three disjoint families, one per [`TaskKind`];
/// [`Constraint::task_kind`] reports the family a variant belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Constraint {
    // Trip planning.
    TotalDuration { days: u32 },
    CityStay { city: String, days: u32 },
    FixedWindow { city: String, start_day: u32, end_day: u32, reason: String },
    DirectFlightsOnly,
    /// Undirected direct-flight connection between two cities.
    FlightEdge { city_a: String, city_b: String },

    // Calendar scheduling.
    Participants { names: Vec<String> },
    MeetingDuration { minutes: u32 },
    MeetingDay { day: String },
    WorkHours { start: TimeOfDay, end: TimeOfDay },
    BusyInterval { person: String, start: TimeOfDay, end: TimeOfDay },
    Preference { text: String },
    FeasibilityAsserted { flag: bool },

    // Meeting planning.
    ArrivalAt { location: String, time: TimeOfDay },
    TravelTime { from: String, to: String, minutes: u32 },
    Availability { friend: String, location: String, start: TimeOfDay, end: TimeOfDay },
    MinMeetingDuration { friend: String, minutes: u32 },
    OptimizationGoal,
}

impl Constraint {
    pub fn task_kind(&self) -> TaskKind {
        use Constraint::*;
        match self {
            TotalDuration { .. } | CityStay { .. } | FixedWindow { .. } | DirectFlightsOnly
            | FlightEdge { .. } => TaskKind::TripPlanning,
            Participants { .. } | MeetingDuration { .. } | MeetingDay { .. } | WorkHours { .. }
            | BusyInterval { .. } | Preference { .. } | FeasibilityAsserted { .. } => {
                TaskKind::CalendarScheduling
            }
            ArrivalAt { .. } | TravelTime { .. } | Availability { .. }
            | MinMeetingDuration { .. } | OptimizationGoal => TaskKind::MeetingPlanning,
        }
    }
}

/// Where a constraint set came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintSource {
    SymbolicParse,
    LlmExtract,
}

/// An ordered list of constraints for one task, validated on construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub task_kind: TaskKind,
    pub items: Vec<Constraint>,
    pub source: ConstraintSource,
}

impl ConstraintSet {
    pub fn new(
        task_kind: TaskKind,
        items: Vec<Constraint>,
        source: ConstraintSource,
    ) -> Result<ConstraintSet, DomainError> {
        for (i, item) in items.iter().enumerate() {
            if item.task_kind() != task_kind {
                return Err(DomainError::ConstraintFamily {
                    index: i,
                    expected: task_kind,
                    found: item.task_kind(),
                });
            }
            match item {
                Constraint::CityStay { days, .. } if *days == 0 => {
                    return Err(DomainError::InvalidConstraint {
                        index: i,
                        reason: "city stay must be at least one day".into(),
                    })
                }
                Constraint::TotalDuration { days } if *days == 0 => {
                    return Err(DomainError::InvalidConstraint {
                        index: i,
                        reason: "total duration must be at least one day".into(),
                    })
                }
                Constraint::TravelTime { minutes, .. } if *minutes == 0 => {
                    return Err(DomainError::InvalidConstraint {
                        index: i,
                        reason: "travel time must be positive".into(),
                    })
                }
                Constraint::WorkHours { start, end }
                | Constraint::BusyInterval { start, end, .. }
                | Constraint::Availability { start, end, .. }
                    if start >= end =>
                {
                    return Err(DomainError::InvalidConstraint {
                        index: i,
                        reason: format!("interval start {start} is not before end {end}"),
                    })
                }
                _ => {}
            }
        }

        match task_kind {
            TaskKind::TripPlanning => {
                let totals: Vec<u32> = items
                    .iter()
                    .filter_map(|c| match c {
                        Constraint::TotalDuration { days } => Some(*days),
                        _ => None,
                    })
                    .collect();
                if totals.len() != 1 {
                    return Err(DomainError::Cardinality {
                        what: "TotalDuration",
                        expected: 1,
                        found: totals.len(),
                    });
                }
                let total = totals[0];
                for (i, item) in items.iter().enumerate() {
                    if let Constraint::FixedWindow { start_day, end_day, .. } = item {
                        if *start_day < 1 || *end_day > total || start_day > end_day {
                            return Err(DomainError::InvalidConstraint {
                                index: i,
                                reason: format!(
                                    "fixed window day {start_day}..{end_day} must lie within 1..{total}"
                                ),
                            });
                        }
                    }
                }
            }
            TaskKind::CalendarScheduling => {
                let durations =
                    items.iter().filter(|c| matches!(c, Constraint::MeetingDuration { .. })).count();
                if durations != 1 {
                    return Err(DomainError::Cardinality {
                        what: "MeetingDuration",
                        expected: 1,
                        found: durations,
                    });
                }
                let days =
                    items.iter().filter(|c| matches!(c, Constraint::MeetingDay { .. })).count();
                if days != 1 {
                    return Err(DomainError::Cardinality {
                        what: "MeetingDay",
                        expected: 1,
                        found: days,
                    });
                }
            }
            TaskKind::MeetingPlanning => {
                let mut seen: Vec<(String, String)> = Vec::new();
                for (i, item) in items.iter().enumerate() {
                    if let Constraint::TravelTime { from, to, .. } = item {
                        let key = (fold_name(from), fold_name(to));
                        if seen.contains(&key) {
                            return Err(DomainError::InvalidConstraint {
                                index: i,
                                reason: format!("duplicate travel leg {from} -> {to}"),
                            });
                        }
                        seen.push(key);
                    }
                }
            }
        }

        Ok(ConstraintSet { task_kind, items, source })
    }
}

/// One leg of a trip itinerary. The flight day is shared: the next segment
/// starts on the same day this one ends.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TripSegment {
    pub city: String,
    pub start_day: u32,
    pub end_day: u32,
}

impl TripSegment {
    pub fn stay_days(&self) -> u32 {
        self.end_day - self.start_day + 1
    }
}

/// One scheduled meeting with a friend at a location.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MeetingEvent {
    pub friend: String,
    pub location: String,
    pub meet_start: TimeOfDay,
    pub meet_end: TimeOfDay,
}

/// A structured candidate solution for one task family.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Plan {
    Trip { segments: Vec<TripSegment> },
    Calendar { day: String, start: TimeOfDay, end: TimeOfDay },
    Meeting { events: Vec<MeetingEvent> },
}

impl Plan {
    pub fn task_kind(&self) -> TaskKind {
        match self {
            Plan::Trip { .. } => TaskKind::TripPlanning,
            Plan::Calendar { .. } => TaskKind::CalendarScheduling,
            Plan::Meeting { .. } => TaskKind::MeetingPlanning,
        }
    }
}

/// One constraint violation reported by a verifier.
///
/// `constraint_index` points into the verified [`ConstraintSet`]; it is
/// `None` for structural problems not tied to a single constraint item
/// (e.g. a gap in an itinerary) and for violations parsed from LLM text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint_index: Option<usize>,
    pub reason: String,
}

/// Verifier output: reward score in `[0, 100]` plus the violation list.
///
/// Construction normalizes the invariant `accepted <=> (score == 100 and no
/// violations)`: a score of 100 alongside violations is demoted to 99.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub score: u8,
    pub violations: Vec<Violation>,
    pub accepted: bool,
}

impl Verdict {
    pub fn new(score: u8, violations: Vec<Violation>) -> Verdict {
        let mut score = score.min(100);
        if !violations.is_empty() {
            score = score.min(99);
        }
        let accepted = score == 100 && violations.is_empty();
        Verdict { score, violations, accepted }
    }
}

/// Constraint Memory: fixed for the lifetime of one query session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CMem {
    pub constraints: ConstraintSet,
    pub rendered_text: String,
    pub created_turn: u32,
}

impl CMem {
    pub fn new(constraints: ConstraintSet, rendered_text: String) -> CMem {
        CMem { constraints, rendered_text, created_turn: 1 }
    }
}

/// One failed attempt: the plan, its score, and the violations found.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QMemEntry {
    pub turn: u32,
    pub plan: Plan,
    pub score: u8,
    pub violations: Vec<Violation>,
}

/// Query-feedback Memory: append-only log of failed attempts within a session.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QMem {
    entries: Vec<QMemEntry>,
}

impl QMem {
    pub fn new() -> QMem {
        QMem::default()
    }

    /// Appends a failed attempt. Only rejected plans may be recorded and
    /// turns must be strictly increasing.
    pub fn push(&mut self, entry: QMemEntry) -> Result<(), DomainError> {
        if entry.score >= 100 {
            return Err(DomainError::QMemAcceptedEntry { turn: entry.turn });
        }
        if let Some(last) = self.entries.last() {
            if entry.turn <= last.turn {
                return Err(DomainError::QMemTurnOrder {
                    last: last.turn,
                    pushed: entry.turn,
                });
            }
        }
        self.entries.push(entry);
        Ok(())
    }

    pub fn entries(&self) -> &[QMemEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }
}

/// Ablation ladder for what the actor gets to see across turns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Actor only, a single turn, no memories.
    SingleAgent,
    /// Multi-turn resampling; the actor sees its own previous attempt but no
    /// constraints and no verifier feedback.
    SelfReflect,
    /// Extractor and verifier run; constraints shown at turn 1 only, plus
    /// the latest turn's violations.
    MultiRound,
    /// Constraints shown at every turn, latest violations only.
    MultiRoundCMem,
    /// Constraints at every turn plus the full accumulated failure log.
    Full,
}

impl Mode {
    pub fn parse(s: &str) -> Option<Mode> {
        match s.trim().to_ascii_lowercase().as_str() {
            "single" | "single_agent" => Some(Mode::SingleAgent),
            "reflect" | "self_reflect" => Some(Mode::SelfReflect),
            "multi" | "multi_round" => Some(Mode::MultiRound),
            "cmem" | "multi_round_cmem" => Some(Mode::MultiRoundCMem),
            "full" => Some(Mode::Full),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::SingleAgent => "single",
            Mode::SelfReflect => "reflect",
            Mode::MultiRound => "multi",
            Mode::MultiRoundCMem => "cmem",
            Mode::Full => "full",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActorKind {
    Oracle,
    Noisy { error_rate: f64 },
    /// Emits a deterministically invalid plan every turn; used for floor
    /// baselines in the harness.
    AlwaysFail,
    Llm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifierKind {
    Symbolic,
    Llm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractorKind {
    Symbolic,
    Llm,
}

/// How much of QMem the actor sees in Full mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackScope {
    /// All accumulated failures, turn-labeled.
    #[default]
    Accumulated,
    /// Only the most recent failure.
    LatestOnly,
}

/// Per-role sampling temperatures, forwarded to LLM backends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Temperatures {
    pub extractor: f64,
    pub verifier: f64,
    pub actor: f64,
}

impl Default for Temperatures {
    fn default() -> Temperatures {
        Temperatures { extractor: 0.1, verifier: 0.0, actor: 0.7 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub max_turns: u32,
    pub mode: Mode,
    pub actor_kind: ActorKind,
    pub verifier_kind: VerifierKind,
    pub extractor_kind: ExtractorKind,
    pub temperatures: Temperatures,
    pub feedback_scope: FeedbackScope,
    pub seed: u64,
}

impl Default for SessionConfig {
    fn default() -> SessionConfig {
        SessionConfig {
            max_turns: 5,
            mode: Mode::Full,
            actor_kind: ActorKind::Oracle,
            verifier_kind: VerifierKind::Symbolic,
            extractor_kind: ExtractorKind::Symbolic,
            temperatures: Temperatures::default(),
            feedback_scope: FeedbackScope::default(),
            seed: 0,
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<(), DomainError> {
        if self.max_turns == 0 {
            return Err(DomainError::InvalidConfig("max_turns must be at least 1".into()));
        }
        if let ActorKind::Noisy { error_rate } = self.actor_kind {
            if !(0.0..=1.0).contains(&error_rate) {
                return Err(DomainError::InvalidConfig(format!(
                    "noisy error_rate {error_rate} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// A single benchmark problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryInstance {
    pub id: String,
    pub task_kind: TaskKind,
    pub query_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub golden_plan: Option<Plan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub few_shot: Option<Vec<FewShotExample>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FewShotExample {
    pub query_text: String,
    pub plan_text: String,
}

/// What the actor gets to see on one turn, as rendered text slots.
///
/// Which slots are filled depends on the session [`Mode`]: `cmem_text`
/// carries the constraint memory, `qmem_errors_text` the accumulated
/// failure log, `latest_errors_text` only the most recent turn's
/// violations, and `previous_attempt_text` the last proposed plan without
/// verifier feedback.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryView {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cmem_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qmem_errors_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latest_errors_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub previous_attempt_text: Option<String>,
}

impl MemoryView {
    pub fn is_empty(&self) -> bool {
        self.cmem_text.is_none()
            && self.qmem_errors_text.is_none()
            && self.latest_errors_text.is_none()
            && self.previous_attempt_text.is_none()
    }
}

/// Record of one turn inside a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnRecord {
    pub turn: u32,
    /// The memory slots shown to the actor this turn.
    #[serde(default)]
    pub view: MemoryView,
    /// Number of logged failed attempts at the start of the turn.
    #[serde(default)]
    pub qmem_len: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<Plan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    /// Set when the actor or verifier failed and the turn was consumed
    /// without a verdict.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Full per-query record of one session run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionTrace {
    pub instance_id: String,
    pub task_kind: TaskKind,
    pub mode: Mode,
    /// The constraint memory rendered once at session start, when extraction
    /// succeeded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cmem_text: Option<String>,
    pub turns: Vec<TurnRecord>,
    pub accepted: bool,
    pub turns_used: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_plan: Option<Plan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_match: Option<bool>,
    pub seed: u64,
    /// Set when constraint extraction failed and the session was aborted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extraction_error: Option<String>,
}

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("constraint {index} belongs to {found}, not {expected}")]
    ConstraintFamily { index: usize, expected: TaskKind, found: TaskKind },
    #[error("invalid constraint at index {index}: {reason}")]
    InvalidConstraint { index: usize, reason: String },
    #[error("expected exactly {expected} {what} constraint(s), found {found}")]
    Cardinality { what: &'static str, expected: usize, found: usize },
    #[error("cannot canonicalize plan: {0}")]
    Canonicalization(String),
    #[error("task kind mismatch: {left} vs {right}")]
    TypeMismatch { left: TaskKind, right: TaskKind },
    #[error("QMem only records failed attempts; turn {turn} had a passing score")]
    QMemAcceptedEntry { turn: u32 },
    #[error("QMem turns must increase: last {last}, pushed {pushed}")]
    QMemTurnOrder { last: u32, pushed: u32 },
    #[error("invalid session config: {0}")]
    InvalidConfig(String),
}

/// Case-fold and trim a name for canonical comparison.
pub fn fold_name(name: &str) -> String {
    name.trim().to_lowercase()
}

/// Compare two names under canonical folding.
pub fn name_eq(a: &str, b: &str) -> bool {
    fold_name(a) == fold_name(b)
}

/// Normal form of a plan: names case-folded and trimmed, structure checked.
///
/// Idempotent. Fails on structurally malformed plans: trip segments that do
/// not start on day 1, are not contiguous under the shared-flight-day
/// convention, or run backwards; calendar slots or meeting events with
/// non-positive length; meeting events out of chronological order.
pub fn canonicalize_plan(plan: &Plan) -> Result<Plan, DomainError> {
    match plan {
        Plan::Trip { segments } => {
            if segments.is_empty() {
                return Err(DomainError::Canonicalization("trip plan has no segments".into()));
            }
            let mut out = Vec::with_capacity(segments.len());
            for (i, seg) in segments.iter().enumerate() {
                if seg.end_day < seg.start_day {
                    return Err(DomainError::Canonicalization(format!(
                        "segment {} ({}) ends on day {} before it starts on day {}",
                        i + 1,
                        seg.city.trim(),
                        seg.end_day,
                        seg.start_day
                    )));
                }
                if i == 0 {
                    if seg.start_day != 1 {
                        return Err(DomainError::Canonicalization(format!(
                            "first segment ({}) starts on day {}, not day 1",
                            seg.city.trim(),
                            seg.start_day
                        )));
                    }
                } else if seg.start_day != segments[i - 1].end_day {
                    return Err(DomainError::Canonicalization(format!(
                        "segment {} ({}) starts on day {} but the previous segment ends on day {}",
                        i + 1,
                        seg.city.trim(),
                        seg.start_day,
                        segments[i - 1].end_day
                    )));
                }
                out.push(TripSegment {
                    city: fold_name(&seg.city),
                    start_day: seg.start_day,
                    end_day: seg.end_day,
                });
            }
            Ok(Plan::Trip { segments: out })
        }
        Plan::Calendar { day, start, end } => {
            if start >= end {
                return Err(DomainError::Canonicalization(format!(
                    "calendar slot {start}-{end} has non-positive length"
                )));
            }
            Ok(Plan::Calendar { day: fold_name(day), start: *start, end: *end })
        }
        Plan::Meeting { events } => {
            let mut out = Vec::with_capacity(events.len());
            let mut prev_start: Option<TimeOfDay> = None;
            for ev in events {
                if ev.meet_start >= ev.meet_end {
                    return Err(DomainError::Canonicalization(format!(
                        "meeting with {} at {}-{} has non-positive length",
                        ev.friend.trim(),
                        ev.meet_start,
                        ev.meet_end
                    )));
                }
                if let Some(prev) = prev_start {
                    if ev.meet_start <= prev {
                        return Err(DomainError::Canonicalization(format!(
                            "meeting with {} at {} is not strictly after the previous meeting",
                            ev.friend.trim(),
                            ev.meet_start
                        )));
                    }
                }
                prev_start = Some(ev.meet_start);
                out.push(MeetingEvent {
                    friend: fold_name(&ev.friend),
                    location: fold_name(&ev.location),
                    meet_start: ev.meet_start,
                    meet_end: ev.meet_end,
                });
            }
            Ok(Plan::Meeting { events: out })
        }
    }
}

/// True iff the two plans are structurally equal after canonicalization.
pub fn exact_match(candidate: &Plan, golden: &Plan) -> Result<bool, DomainError> {
    if candidate.task_kind() != golden.task_kind() {
        return Err(DomainError::TypeMismatch {
            left: candidate.task_kind(),
            right: golden.task_kind(),
        });
    }
    Ok(canonicalize_plan(candidate)? == canonicalize_plan(golden)?)
}
