//! Deterministic constraint extraction from templated query text, constraint
//! rendering for prompts, and parsing of textual plans into [`Plan`] values.
//!
//! The grammar is template-based: each sentence form the query generator can
//! emit has a matching pattern rule here. Sentences that match no rule become
//! diagnostics rather than errors, because extractor replies arriving over
//! the LLM path are noisier than generated datasets.

use crate::domain::{
    Constraint, ConstraintSet, ConstraintSource, MeetingEvent, Plan, TaskKind, TimeOfDay,
    TripSegment,
};
use regex::Regex;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::sync::LazyLock;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("query text is empty")]
    EmptyQuery,
    #[error("query lacks a {missing} constraint")]
    IncompleteQuery { missing: &'static str },
    #[error("no recognizable plan lines; first offending line: {line:?}")]
    PlanText { line: String },
    #[error("no constraints recognized in the text")]
    NoConstraints,
    #[error(transparent)]
    Domain(#[from] crate::domain::DomainError),
}

/// A span of input that matched no template rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnrecognizedSpan {
    pub offset: usize,
    pub length: usize,
    pub text: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseDiagnostics {
    pub unrecognized_spans: Vec<UnrecognizedSpan>,
    pub warnings: Vec<String>,
}

impl ParseDiagnostics {
    fn note_unrecognized(&mut self, offset: usize, text: &str) {
        self.unrecognized_spans.push(UnrecognizedSpan {
            offset,
            length: text.len(),
            text: text.to_string(),
        });
    }
}

const TIME: &str = r"\d{1,2}:\d{2}\s*(?:[AaPp][Mm])?|\d{1,2}\s*[AaPp][Mm]";

fn re(pattern: &str) -> Regex {
    Regex::new(pattern).expect("static pattern compiles")
}

static TRIP_TOTAL: LazyLock<Regex> = LazyLock::new(|| {
    re(r"(?i)^you plan to visit (\d+) (?:european )?cit(?:y|ies) for (\d+) days? in total\.?$")
});
static TRIP_DIRECT: LazyLock<Regex> =
    LazyLock::new(|| re(r"(?i)^you only take direct flights to commute between cities\.?$"));
static TRIP_STAY: LazyLock<Regex> = LazyLock::new(|| {
    re(r"(?i)^you (?:would like|plan|want) to (?:visit|stay in) (.+?) for (\d+) days?\.?$")
});
static TRIP_WINDOW: LazyLock<Regex> =
    LazyLock::new(|| re(r"(?i)^you want to (.+?) in (.+?) between day (\d+) and day (\d+)\.?$"));
static TRIP_EDGES: LazyLock<Regex> =
    LazyLock::new(|| re(r"(?i)^here are the cities that have direct flights:\s*(.+?)\.?$"));
static TRIP_FIND: LazyLock<Regex> = LazyLock::new(|| re(r"(?i)^find a trip plan\b.*$"));

static CAL_HEAD: LazyLock<Regex> = LazyLock::new(|| {
    re(&format!(
        r"(?i)^you need to schedule a meeting for (.+?) for (.+?) between the work hours of ({TIME}) to ({TIME}) on (\w+)\.?$"
    ))
});
static CAL_SCHED_HEADER: LazyLock<Regex> =
    LazyLock::new(|| re(r"(?i)^here are the existing schedules\b.*$"));
static CAL_BUSY: LazyLock<Regex> = LazyLock::new(|| {
    re(r"(?i)^(.+?) has (?:meetings?|blocked (?:his|her|their) calendar) on (\w+) during (.+?)[;.]?$")
});
static CAL_FREE: LazyLock<Regex> = LazyLock::new(|| {
    re(r"(?i)^(\S+)(?:'s calendar is wide open the entire day| is free the entire day| has no meetings the whole day)\s*[;.]?$")
});
static CAL_PREF: LazyLock<Regex> =
    LazyLock::new(|| re(r"(?i)^.+\bwould (?:rather|prefer)\b.*$"));
static CAL_FIND: LazyLock<Regex> = LazyLock::new(|| re(r"(?i)^find a time\b.*$"));

static MEET_GOAL: LazyLock<Regex> = LazyLock::new(|| {
    re(r"(?i)^you are visiting .+ want to meet as many friends as possible\.?\s*$")
});
static MEET_SOLVE: LazyLock<Regex> =
    LazyLock::new(|| re(r"(?i)^solve the problem by considering\b.*$"));
static MEET_TRAVEL_HEADER: LazyLock<Regex> =
    LazyLock::new(|| re(r"(?i)^travel distances \(in minutes\):$"));
static MEET_TRAVEL: LazyLock<Regex> =
    LazyLock::new(|| re(r"^(.+?)\s*(?:→|->)\s*(.+?):\s*(\d+)\s*(?:minutes?)?\.?$"));
static MEET_ARRIVE: LazyLock<Regex> =
    LazyLock::new(|| re(&format!(r"(?i)^you arrive at (.+?) at ({TIME})\.?$")));
static MEET_AVAIL: LazyLock<Regex> = LazyLock::new(|| {
    re(&format!(r"(?i)^(\S+) will be at (.+?) from ({TIME})\s*(?:to|[-–—])\s*({TIME})\.?$"))
});
static MEET_MINDUR: LazyLock<Regex> = LazyLock::new(|| {
    re(r"(?i)^you(?:'d| would) like to meet (\S+) for a minimum of (\d+) minutes\.?$")
});

/// Parses `"14:30"`, `"9:00AM"`, `"1:30 PM"`, or `"9AM"` into minutes since
/// midnight. Hours without minutes require a meridiem suffix.
pub fn parse_time(s: &str) -> Option<TimeOfDay> {
    static RE: LazyLock<Regex> =
        LazyLock::new(|| re(r"^(\d{1,2})(?::(\d{2}))?\s*([AaPp][Mm])?$"));
    let caps = RE.captures(s.trim())?;
    let hours: u16 = caps[1].parse().ok()?;
    let minutes: u16 = caps.get(2).map_or(Some(0), |m| m.as_str().parse().ok())?;
    if minutes >= 60 {
        return None;
    }
    let total = match caps.get(3) {
        Some(mer) => {
            if hours < 1 || hours > 12 {
                return None;
            }
            let base = hours % 12;
            let shifted =
                if mer.as_str().to_ascii_lowercase().starts_with('p') { base + 12 } else { base };
            shifted * 60 + minutes
        }
        None => {
            caps.get(2)?;
            hours * 60 + minutes
        }
    };
    (total <= 24 * 60).then_some(TimeOfDay(total))
}

/// Splits `"11:00–12:00"` or `"9:00 to 17:00"` into a time pair.
fn parse_time_range(s: &str) -> Option<(TimeOfDay, TimeOfDay)> {
    static RE: LazyLock<Regex> =
        LazyLock::new(|| re(&format!(r"^({TIME})\s*(?:to|[-–—])\s*({TIME})$")));
    let caps = RE.captures(s.trim())?;
    Some((parse_time(&caps[1])?, parse_time(&caps[2])?))
}

fn parse_duration_phrase(s: &str) -> Option<u32> {
    let s = s.trim().to_ascii_lowercase();
    if s == "one hour" || s == "an hour" || s == "1 hour" {
        return Some(60);
    }
    if s == "half an hour" {
        return Some(30);
    }
    static MINUTES: LazyLock<Regex> = LazyLock::new(|| re(r"^(\d+) minutes?$"));
    static HOURS: LazyLock<Regex> = LazyLock::new(|| re(r"^(\d+) hours?$"));
    if let Some(caps) = MINUTES.captures(&s) {
        return caps[1].parse().ok();
    }
    if let Some(caps) = HOURS.captures(&s) {
        return caps[1].parse::<u32>().ok().map(|h| h * 60);
    }
    None
}

fn split_names(list: &str) -> Vec<String> {
    list.split(',')
        .flat_map(|part| part.split(" and "))
        .map(|name| name.trim().trim_start_matches("and ").trim())
        .filter(|name| !name.is_empty())
        .map(str::to_string)
        .collect()
}

/// Trimmed, non-empty line segments of the input with their byte offsets.
/// Lines that fail to match as a whole are later retried sentence by
/// sentence, so compact single-line queries still parse.
fn line_segments(text: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut offset = 0;
    for raw in text.split_inclusive('\n') {
        let line = raw.trim_end_matches(['\n', '\r']);
        let trimmed = line.trim_start();
        let lead = line.len() - trimmed.len();
        let trimmed = trimmed.trim_end();
        if !trimmed.is_empty() {
            out.push((offset + lead, trimmed));
        }
        offset += raw.len();
    }
    out
}

fn sentence_splits(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = 0;
    for (idx, _) in line.match_indices(". ") {
        out.push((start, line[start..=idx].trim()));
        start = idx + 2;
    }
    if start < line.len() {
        out.push((start, line[start..].trim()));
    }
    out.retain(|(_, s)| !s.is_empty());
    out
}

fn strip_bullet(line: &str) -> &str {
    line.trim_start_matches(['-', '–', '—', '*', '•', '~']).trim_start()
}

/// Extracts the constraint set stated by a templated query.
///
/// Constraints are emitted in the order their source sentences appear; the
/// calendar `Preference` item defaults to `"None"` and is appended last when
/// the query states no preference. Unmatched sentences are reported through
/// [`ParseDiagnostics`], not treated as failures.
pub fn parse_query(
    task_kind: TaskKind,
    text: &str,
) -> Result<(ConstraintSet, ParseDiagnostics), ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::EmptyQuery);
    }
    let mut items = Vec::new();
    let mut diags = ParseDiagnostics::default();
    let mut ctx = QueryContext::default();

    for (offset, line) in line_segments(text) {
        let bare = strip_bullet(line);
        if parse_query_sentence(task_kind, bare, &mut items, &mut diags, &mut ctx) {
            continue;
        }
        let sentences = sentence_splits(bare);
        if sentences.len() > 1
            && sentences.iter().all(|(_, s)| {
                parse_query_sentence(task_kind, s, &mut items, &mut diags, &mut ctx)
            })
        {
            continue;
        }
        diags.note_unrecognized(offset, line);
    }

    finish_query(task_kind, &mut items, &mut diags, &ctx)?;
    let set = ConstraintSet::new(task_kind, items, ConstraintSource::SymbolicParse)?;
    Ok((set, diags))
}

#[derive(Default)]
struct QueryContext {
    stated_city_count: Option<u32>,
    meeting_day: Option<String>,
    has_preference: bool,
}

fn parse_query_sentence(
    task_kind: TaskKind,
    sentence: &str,
    items: &mut Vec<Constraint>,
    diags: &mut ParseDiagnostics,
    ctx: &mut QueryContext,
) -> bool {
    match task_kind {
        TaskKind::TripPlanning => parse_trip_sentence(sentence, items, ctx),
        TaskKind::CalendarScheduling => parse_calendar_sentence(sentence, items, diags, ctx),
        TaskKind::MeetingPlanning => parse_meeting_sentence(sentence, items),
    }
}

fn parse_trip_sentence(
    sentence: &str,
    items: &mut Vec<Constraint>,
    ctx: &mut QueryContext,
) -> bool {
    if let Some(caps) = TRIP_TOTAL.captures(sentence) {
        ctx.stated_city_count = caps[1].parse().ok();
        if let Ok(days) = caps[2].parse() {
            items.push(Constraint::TotalDuration { days });
            return true;
        }
        return false;
    }
    if TRIP_DIRECT.is_match(sentence) {
        items.push(Constraint::DirectFlightsOnly);
        return true;
    }
    if let Some(caps) = TRIP_STAY.captures(sentence) {
        if let Ok(days) = caps[2].parse() {
            items.push(Constraint::CityStay { city: caps[1].to_string(), days });
            return true;
        }
        return false;
    }
    if let Some(caps) = TRIP_WINDOW.captures(sentence) {
        match (caps[3].parse(), caps[4].parse()) {
            (Ok(start_day), Ok(end_day)) => {
                items.push(Constraint::FixedWindow {
                    city: caps[2].to_string(),
                    start_day,
                    end_day,
                    reason: caps[1].to_string(),
                });
                return true;
            }
            _ => return false,
        }
    }
    if let Some(caps) = TRIP_EDGES.captures(sentence) {
        let mut any = false;
        for pair in caps[1].split([';', ',']) {
            let pair = pair.trim();
            if pair.is_empty() {
                continue;
            }
            if let Some((a, b)) = pair.split_once(" and ") {
                items.push(Constraint::FlightEdge {
                    city_a: a.trim().to_string(),
                    city_b: b.trim().to_string(),
                });
                any = true;
            }
        }
        return any;
    }
    TRIP_FIND.is_match(sentence)
}

fn parse_calendar_sentence(
    sentence: &str,
    items: &mut Vec<Constraint>,
    diags: &mut ParseDiagnostics,
    ctx: &mut QueryContext,
) -> bool {
    if let Some(caps) = CAL_HEAD.captures(sentence) {
        let names = split_names(&caps[1]);
        let minutes = match parse_duration_phrase(&caps[2]) {
            Some(m) => m,
            None => return false,
        };
        let (start, end) = match (parse_time(&caps[3]), parse_time(&caps[4])) {
            (Some(s), Some(e)) => (s, e),
            _ => return false,
        };
        ctx.meeting_day = Some(caps[5].to_string());
        items.push(Constraint::Participants { names });
        items.push(Constraint::MeetingDuration { minutes });
        items.push(Constraint::WorkHours { start, end });
        items.push(Constraint::MeetingDay { day: caps[5].to_string() });
        return true;
    }
    if CAL_SCHED_HEADER.is_match(sentence) || CAL_FIND.is_match(sentence) {
        return true;
    }
    if sentence.to_ascii_lowercase().contains("there exists a solution") {
        items.push(Constraint::FeasibilityAsserted { flag: true });
        return true;
    }
    if CAL_FREE.is_match(sentence) {
        return true;
    }
    if let Some(caps) = CAL_BUSY.captures(sentence) {
        let person = caps[1].trim().to_string();
        if let Some(day) = &ctx.meeting_day {
            if !crate::domain::name_eq(day, &caps[2]) {
                diags.warnings.push(format!(
                    "schedule for {person} names {} but the meeting day is {day}",
                    &caps[2]
                ));
            }
        }
        let mut any = false;
        for range in caps[3].split(',') {
            if let Some((start, end)) = parse_time_range(range) {
                items.push(Constraint::BusyInterval { person: person.clone(), start, end });
                any = true;
            }
        }
        return any;
    }
    if CAL_PREF.is_match(sentence) {
        items.push(Constraint::Preference {
            text: sentence.trim_end_matches(['.', ';']).to_string(),
        });
        ctx.has_preference = true;
        return true;
    }
    false
}

fn parse_meeting_sentence(sentence: &str, items: &mut Vec<Constraint>) -> bool {
    if MEET_GOAL.is_match(sentence) {
        items.push(Constraint::OptimizationGoal);
        return true;
    }
    if MEET_SOLVE.is_match(sentence) || MEET_TRAVEL_HEADER.is_match(sentence) {
        return true;
    }
    if let Some(caps) = MEET_ARRIVE.captures(sentence) {
        if let Some(time) = parse_time(&caps[2]) {
            items.push(Constraint::ArrivalAt { location: caps[1].to_string(), time });
            return true;
        }
        return false;
    }
    if let Some(caps) = MEET_AVAIL.captures(sentence) {
        match (parse_time(&caps[3]), parse_time(&caps[4])) {
            (Some(start), Some(end)) => {
                items.push(Constraint::Availability {
                    friend: caps[1].to_string(),
                    location: caps[2].to_string(),
                    start,
                    end,
                });
                return true;
            }
            _ => return false,
        }
    }
    if let Some(caps) = MEET_MINDUR.captures(sentence) {
        if let Ok(minutes) = caps[2].parse() {
            items.push(Constraint::MinMeetingDuration { friend: caps[1].to_string(), minutes });
            return true;
        }
        return false;
    }
    if let Some(caps) = MEET_TRAVEL.captures(sentence) {
        if let Ok(minutes) = caps[3].parse() {
            items.push(Constraint::TravelTime {
                from: caps[1].trim().to_string(),
                to: caps[2].trim().to_string(),
                minutes,
            });
            return true;
        }
        return false;
    }
    false
}

fn finish_query(
    task_kind: TaskKind,
    items: &mut Vec<Constraint>,
    diags: &mut ParseDiagnostics,
    ctx: &QueryContext,
) -> Result<(), ParseError> {
    match task_kind {
        TaskKind::TripPlanning => {
            if !items.iter().any(|c| matches!(c, Constraint::TotalDuration { .. })) {
                return Err(ParseError::IncompleteQuery { missing: "TotalDuration" });
            }
            let stays =
                items.iter().filter(|c| matches!(c, Constraint::CityStay { .. })).count() as u32;
            if let Some(stated) = ctx.stated_city_count {
                if stated != stays {
                    diags.warnings.push(format!(
                        "query names {stated} cities but lists {stays} stay durations"
                    ));
                }
            }
        }
        TaskKind::CalendarScheduling => {
            if !items.iter().any(|c| matches!(c, Constraint::MeetingDuration { .. })) {
                return Err(ParseError::IncompleteQuery { missing: "MeetingDuration" });
            }
            if !items.iter().any(|c| matches!(c, Constraint::MeetingDay { .. })) {
                return Err(ParseError::IncompleteQuery { missing: "MeetingDay" });
            }
            if !ctx.has_preference {
                items.push(Constraint::Preference { text: "None".to_string() });
            }
        }
        TaskKind::MeetingPlanning => {
            if !items.iter().any(|c| matches!(c, Constraint::ArrivalAt { .. })) {
                return Err(ParseError::IncompleteQuery { missing: "ArrivalAt" });
            }
        }
    }
    Ok(())
}

fn fmt_24h_short(t: TimeOfDay) -> String {
    format!("{}:{:02}", t.0 / 60, t.0 % 60)
}

fn days_word(n: u32) -> &'static str {
    if n == 1 {
        "day"
    } else {
        "days"
    }
}

fn join_names(names: &[String]) -> String {
    match names {
        [] => String::new(),
        [one] => one.clone(),
        [a, b] => format!("{a} and {b}"),
        [rest @ .., last] => format!("{}, and {last}", rest.join(", ")),
    }
}

/// Renders a constraint set back into the templated query language that
/// [`parse_query`] accepts. Round-trips exactly for parser-produced sets.
pub fn render_query(cs: &ConstraintSet) -> String {
    match cs.task_kind {
        TaskKind::TripPlanning => render_trip_query(cs),
        TaskKind::CalendarScheduling => render_calendar_query(cs),
        TaskKind::MeetingPlanning => render_meeting_query(cs),
    }
}

fn render_trip_query(cs: &ConstraintSet) -> String {
    let city_count =
        cs.items.iter().filter(|c| matches!(c, Constraint::CityStay { .. })).count();
    let edges: Vec<String> = cs
        .items
        .iter()
        .filter_map(|c| match c {
            Constraint::FlightEdge { city_a, city_b } => Some(format!("{city_a} and {city_b}")),
            _ => None,
        })
        .collect();
    let mut out = String::new();
    let mut edges_done = false;
    for item in &cs.items {
        match item {
            Constraint::TotalDuration { days } => {
                let _ = writeln!(
                    out,
                    "You plan to visit {city_count} European cities for {days} {} in total.",
                    days_word(*days)
                );
            }
            Constraint::DirectFlightsOnly => {
                out.push_str("You only take direct flights to commute between cities.\n");
            }
            Constraint::CityStay { city, days } => {
                let _ = writeln!(
                    out,
                    "You would like to visit {city} for {days} {}.",
                    days_word(*days)
                );
            }
            Constraint::FixedWindow { city, start_day, end_day, reason } => {
                let _ = writeln!(
                    out,
                    "You want to {reason} in {city} between day {start_day} and day {end_day}."
                );
            }
            Constraint::FlightEdge { .. } => {
                if !edges_done {
                    let _ = writeln!(
                        out,
                        "Here are the cities that have direct flights: {}.",
                        edges.join("; ")
                    );
                    edges_done = true;
                }
            }
            _ => {}
        }
    }
    out
}

fn render_calendar_query(cs: &ConstraintSet) -> String {
    let mut participants: &[String] = &[];
    let mut duration = 0;
    let mut day = "";
    let mut hours = None;
    for item in &cs.items {
        match item {
            Constraint::Participants { names } => participants = names,
            Constraint::MeetingDuration { minutes } => duration = *minutes,
            Constraint::MeetingDay { day: d } => day = d,
            Constraint::WorkHours { start, end } => hours = Some((*start, *end)),
            _ => {}
        }
    }
    let (ws, we) = hours.unwrap_or((TimeOfDay::hm(0, 0), TimeOfDay::DAY_END));
    let duration_phrase = match duration {
        60 => "one hour".to_string(),
        30 => "half an hour".to_string(),
        m => format!("{m} minutes"),
    };
    let mut out = format!(
        "You need to schedule a meeting for {} for {duration_phrase} between the work hours of {} to {} on {day}.\n",
        join_names(participants),
        fmt_24h_short(ws),
        fmt_24h_short(we),
    );
    out.push_str("Here are the existing schedules for everyone during the day:\n");
    for person in participants {
        let ranges: Vec<String> = cs
            .items
            .iter()
            .filter_map(|c| match c {
                Constraint::BusyInterval { person: p, start, end }
                    if crate::domain::name_eq(p, person) =>
                {
                    Some(format!("{}–{}", fmt_24h_short(*start), fmt_24h_short(*end)))
                }
                _ => None,
            })
            .collect();
        if ranges.is_empty() {
            let _ = writeln!(out, "- {person} has no meetings the whole day;");
        } else {
            let _ = writeln!(out, "- {person} has meetings on {day} during {};", ranges.join(", "));
        }
    }
    for item in &cs.items {
        match item {
            Constraint::Preference { text } if text != "None" => {
                let mut line = text.clone();
                if !line.ends_with('.') {
                    line.push('.');
                }
                let _ = writeln!(out, "{line}");
            }
            Constraint::FeasibilityAsserted { flag: true } => {
                out.push_str(
                    "There exists a solution that works with everyone's schedule and constraints.\n",
                );
            }
            _ => {}
        }
    }
    out
}

fn render_meeting_query(cs: &ConstraintSet) -> String {
    let mut out = String::new();
    let mut travel_header_done = false;
    for item in &cs.items {
        match item {
            Constraint::OptimizationGoal => {
                out.push_str(
                    "You are visiting San Francisco for the day and want to meet as many friends as possible.\n",
                );
                out.push_str(
                    "Solve the problem by considering various schedules and picking the best one to optimize your goals.\n",
                );
            }
            Constraint::TravelTime { from, to, minutes } => {
                if !travel_header_done {
                    out.push_str("Travel distances (in minutes):\n");
                    travel_header_done = true;
                }
                let _ = writeln!(out, "- {from} → {to}: {minutes}");
            }
            Constraint::ArrivalAt { location, time } => {
                let _ = writeln!(out, "You arrive at {location} at {}.", time.fmt_12h());
            }
            Constraint::Availability { friend, location, start, end } => {
                let _ = writeln!(
                    out,
                    "{friend} will be at {location} from {} to {}.",
                    start.fmt_12h(),
                    end.fmt_12h()
                );
            }
            Constraint::MinMeetingDuration { friend, minutes } => {
                let _ = writeln!(
                    out,
                    "You'd like to meet {friend} for a minimum of {minutes} minutes."
                );
            }
            _ => {}
        }
    }
    out
}

/// Renders a constraint set as a grouped, numbered plaintext list, the form
/// used for constraint memory and for agent prompts.
pub fn render_constraints(cs: &ConstraintSet) -> String {
    match cs.task_kind {
        TaskKind::TripPlanning => render_trip_constraints(cs),
        TaskKind::CalendarScheduling => render_calendar_constraints(cs),
        TaskKind::MeetingPlanning => render_meeting_constraints(cs),
    }
}

struct NumberedList {
    out: String,
    next: usize,
}

impl NumberedList {
    fn new() -> NumberedList {
        NumberedList { out: String::new(), next: 1 }
    }

    fn line(&mut self, text: &str) {
        let _ = writeln!(self.out, "{}. {text}", self.next);
        self.next += 1;
    }

    fn group(&mut self, header: &str, subs: &[String]) {
        if subs.is_empty() {
            return;
        }
        let _ = writeln!(self.out, "{}. {header}", self.next);
        self.next += 1;
        for sub in subs {
            let _ = writeln!(self.out, "   - {sub}");
        }
    }
}

fn render_trip_constraints(cs: &ConstraintSet) -> String {
    let mut list = NumberedList::new();
    let windows: Vec<(&str, u32, u32, &str)> = cs
        .items
        .iter()
        .filter_map(|c| match c {
            Constraint::FixedWindow { city, start_day, end_day, reason } => {
                Some((city.as_str(), *start_day, *end_day, reason.as_str()))
            }
            _ => None,
        })
        .collect();
    for item in &cs.items {
        if let Constraint::TotalDuration { days } = item {
            list.line(&format!("Total trip duration: {days} {}", days_word(*days)));
        }
    }
    let stays: Vec<String> = cs
        .items
        .iter()
        .filter_map(|c| match c {
            Constraint::CityStay { city, days } => {
                let annotation = windows
                    .iter()
                    .find(|(w, ..)| crate::domain::name_eq(w, city))
                    .map(|(_, s, e, _)| format!(" (Day {s}–{e})"))
                    .unwrap_or_default();
                Some(format!("{city}: {days} {}{annotation}", days_word(*days)))
            }
            _ => None,
        })
        .collect();
    list.group("Visit durations per city:", &stays);
    match windows.as_slice() {
        [] => {}
        [(city, s, e, reason)] => {
            list.line(&format!("Fixed-date events: {reason} in {city} between Day {s}–{e}"));
        }
        many => {
            let subs: Vec<String> = many
                .iter()
                .map(|(city, s, e, reason)| format!("{reason} in {city} between Day {s}–{e}"))
                .collect();
            list.group("Fixed-date events:", &subs);
        }
    }
    let mut flights = Vec::new();
    if cs.items.iter().any(|c| matches!(c, Constraint::DirectFlightsOnly)) {
        flights.push("Direct flights only".to_string());
    }
    let edges: Vec<String> = cs
        .items
        .iter()
        .filter_map(|c| match c {
            Constraint::FlightEdge { city_a, city_b } => Some(format!("{city_a}–{city_b}")),
            _ => None,
        })
        .collect();
    if !edges.is_empty() {
        flights.push(format!("Direct flight connections: {}", edges.join(", ")));
    }
    list.group("Flight constraints:", &flights);
    list.out
}

fn render_calendar_constraints(cs: &ConstraintSet) -> String {
    let mut list = NumberedList::new();
    for item in &cs.items {
        if let Constraint::Participants { names } = item {
            list.line(&format!("Meeting Participants: {}", names.join(", ")));
        }
    }
    for item in &cs.items {
        if let Constraint::MeetingDuration { minutes } = item {
            let phrase = if *minutes >= 60 && minutes % 60 == 0 {
                let h = minutes / 60;
                format!("{h} hour{} ({minutes} minutes)", if h == 1 { "" } else { "s" })
            } else {
                format!("{minutes} minutes")
            };
            list.line(&format!("Meeting Duration: {phrase}"));
        }
    }
    for item in &cs.items {
        if let Constraint::MeetingDay { day } = item {
            list.line(&format!("Meeting Day: {day}"));
        }
    }
    for item in &cs.items {
        if let Constraint::WorkHours { start, end } = item {
            list.line(&format!("Allowed Meeting Hours: {start}–{end}"));
        }
    }
    let mut people: Vec<String> = Vec::new();
    for item in &cs.items {
        if let Constraint::BusyInterval { person, .. } = item {
            if !people.iter().any(|p| crate::domain::name_eq(p, person)) {
                people.push(person.clone());
            }
        }
    }
    let blocked: Vec<String> = people
        .iter()
        .map(|person| {
            let ranges: Vec<String> = cs
                .items
                .iter()
                .filter_map(|c| match c {
                    Constraint::BusyInterval { person: p, start, end }
                        if crate::domain::name_eq(p, person) =>
                    {
                        Some(format!("{start}–{end}"))
                    }
                    _ => None,
                })
                .collect();
            format!("{person}: {}", ranges.join(", "))
        })
        .collect();
    list.group("Blocked Schedules:", &blocked);
    for item in &cs.items {
        if let Constraint::Preference { text } = item {
            list.line(&format!("Meeting Preferences: {text}"));
        }
    }
    for item in &cs.items {
        if let Constraint::FeasibilityAsserted { flag } = item {
            list.line(&format!("Feasibility: {}", if *flag { "True" } else { "False" }));
        }
    }
    list.out
}

fn render_meeting_constraints(cs: &ConstraintSet) -> String {
    let mut list = NumberedList::new();
    let arrivals: Vec<String> = cs
        .items
        .iter()
        .filter_map(|c| match c {
            Constraint::ArrivalAt { location, time } => {
                Some(format!("You arrive at {location} at {}", time.fmt_12h_spaced()))
            }
            _ => None,
        })
        .collect();
    list.group("Arrival Time Constraint:", &arrivals);
    let travel: Vec<String> = cs
        .items
        .iter()
        .filter_map(|c| match c {
            Constraint::TravelTime { from, to, minutes } => {
                Some(format!("{from} → {to}: {minutes} minutes"))
            }
            _ => None,
        })
        .collect();
    list.group("Travel Time Constraints:", &travel);
    let avail: Vec<String> = cs
        .items
        .iter()
        .filter_map(|c| match c {
            Constraint::Availability { friend, location, start, end } => Some(format!(
                "{friend} is at {location} from {} to {}",
                start.fmt_12h_spaced(),
                end.fmt_12h_spaced()
            )),
            _ => None,
        })
        .collect();
    list.group("Availability Constraint:", &avail);
    let durations: Vec<String> = cs
        .items
        .iter()
        .filter_map(|c| match c {
            Constraint::MinMeetingDuration { friend, minutes } => {
                Some(format!("You want to meet {friend} for at least {minutes} minutes"))
            }
            _ => None,
        })
        .collect();
    list.group("Meeting Duration Constraint:", &durations);
    if cs.items.iter().any(|c| matches!(c, Constraint::OptimizationGoal)) {
        list.group(
            "Optimization Goal:",
            &["Maximize the number of friends met during the day by considering various schedules"
                .to_string()],
        );
    }
    list.out
}

static LIST_MARKER: LazyLock<Regex> = LazyLock::new(|| re(r"^\d+\.\s*"));
static CON_TOTAL: LazyLock<Regex> =
    LazyLock::new(|| re(r"(?i)^total trip duration:\s*(\d+) days?$"));
static CON_STAY: LazyLock<Regex> =
    LazyLock::new(|| re(r"(?i)^(.+?):\s*(\d+) days?(?:\s*\(day (\d+)[–—-](\d+)\))?$"));
static CON_EVENT: LazyLock<Regex> =
    LazyLock::new(|| re(r"(?i)^(.+?) in (.+?) between day (\d+)(?:\s*(?:[–—-]|to|and)\s*|\s+and\s+day\s+)(\d+)$"));
static CON_CONNECTIONS: LazyLock<Regex> =
    LazyLock::new(|| re(r"(?i)^direct flight connections:\s*(.+)$"));
static CON_PARTICIPANTS: LazyLock<Regex> =
    LazyLock::new(|| re(r"(?i)^meeting participants:\s*(.+)$"));
static CON_DURATION: LazyLock<Regex> = LazyLock::new(|| re(r"(?i)^meeting duration:\s*(.+)$"));
static CON_DAY: LazyLock<Regex> = LazyLock::new(|| re(r"(?i)^meeting day:\s*(\w+)$"));
static CON_HOURS: LazyLock<Regex> = LazyLock::new(|| {
    re(&format!(
        r"(?i)^allowed meeting hours:\s*(?:between\s+)?({TIME})\s*(?:and|to|[–—-])\s*({TIME})$"
    ))
});
static CON_PREF: LazyLock<Regex> = LazyLock::new(|| re(r"(?i)^meeting preferences:\s*(.+)$"));
static CON_FEAS: LazyLock<Regex> =
    LazyLock::new(|| re(r"(?i)^feasibility:\s*(true|false)\b.*$"));
static CON_BUSY_PERSON: LazyLock<Regex> = LazyLock::new(|| re(r"^(.+?):\s*(\d.+)$"));
static CON_ARRIVE: LazyLock<Regex> =
    LazyLock::new(|| re(&format!(r"(?i)^you arrive at (.+?) at ({TIME})$")));
static CON_AVAIL: LazyLock<Regex> = LazyLock::new(|| {
    re(&format!(r"(?i)^(\S+) is at (.+?) from ({TIME})\s*(?:to|[–—-])\s*({TIME})$"))
});
static CON_MINDUR: LazyLock<Regex> = LazyLock::new(|| {
    re(r"(?i)^you want to meet (\S+) for at least (\d+) minutes$")
});

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Stays,
    Events,
    Flights,
    Blocked,
    Arrival,
    Travel,
    Availability,
    MinDuration,
    Goal,
}

/// Parses a rendered constraint list back into a [`ConstraintSet`].
///
/// This is the lenient inverse of [`render_constraints`], used for
/// LLM-extracted constraint text: unparseable lines become diagnostics and
/// only a fully empty result is an error.
pub fn parse_constraints_text(
    task_kind: TaskKind,
    text: &str,
) -> Result<(ConstraintSet, ParseDiagnostics), ParseError> {
    let mut items: Vec<Constraint> = Vec::new();
    let mut diags = ParseDiagnostics::default();
    let mut section = Section::None;
    let mut pending_windows: Vec<(String, u32, u32)> = Vec::new();
    let mut goal_emitted = false;

    for (offset, raw_line) in line_segments(text) {
        let numbered = LIST_MARKER.replace(raw_line, "");
        let is_sub = raw_line.starts_with([' ', '-', '–', '—', '*', '•', '~'])
            && numbered.len() == raw_line.len();
        let line = strip_bullet(numbered.trim()).trim_end_matches('.').trim();
        if line.is_empty() {
            continue;
        }
        let lower = line.to_ascii_lowercase();

        if let Some(rest) = header_rest(&lower, line, "fixed-date events:")
            .or_else(|| header_rest(&lower, line, "timing constraints:"))
        {
            section = Section::Events;
            if !rest.is_empty() {
                if !parse_constraint_line(Section::Events, rest, &mut items, &mut pending_windows)
                {
                    diags.note_unrecognized(offset, raw_line);
                }
            }
            continue;
        }
        if lower.starts_with("visit durations per city") {
            section = Section::Stays;
            continue;
        }
        if lower.starts_with("flight constraints") {
            section = Section::Flights;
            continue;
        }
        if lower.starts_with("blocked schedules") {
            section = Section::Blocked;
            continue;
        }
        if lower.starts_with("arrival time constraint") {
            section = Section::Arrival;
            continue;
        }
        if lower.starts_with("travel time constraint") {
            section = Section::Travel;
            continue;
        }
        if lower.starts_with("availability constraint") {
            section = Section::Availability;
            continue;
        }
        if lower.starts_with("meeting duration constraint") {
            section = Section::MinDuration;
            continue;
        }
        if lower.starts_with("optimization goal") {
            section = Section::Goal;
            if !goal_emitted {
                items.push(Constraint::OptimizationGoal);
                goal_emitted = true;
            }
            continue;
        }

        if parse_top_level_constraint(line, &mut items) {
            section = Section::None;
            continue;
        }
        let effective = if is_sub { section } else { Section::None };
        if parse_constraint_line(effective, line, &mut items, &mut pending_windows) {
            continue;
        }
        if effective == Section::None
            && section != Section::None
            && parse_constraint_line(section, line, &mut items, &mut pending_windows)
        {
            continue;
        }
        if section == Section::Goal {
            continue;
        }
        diags.note_unrecognized(offset, raw_line);
    }

    for (city, start_day, end_day) in pending_windows {
        let dup = items.iter().any(|c| {
            matches!(c, Constraint::FixedWindow { city: w, start_day: s, end_day: e, .. }
                if crate::domain::name_eq(w, &city) && *s == start_day && *e == end_day)
        });
        if !dup {
            items.push(Constraint::FixedWindow {
                city,
                start_day,
                end_day,
                reason: "a fixed-date event".to_string(),
            });
        }
    }

    if items.is_empty() {
        return Err(ParseError::NoConstraints);
    }
    let set = ConstraintSet::new(task_kind, items, ConstraintSource::LlmExtract)?;
    Ok((set, diags))
}

fn header_rest<'a>(lower: &str, line: &'a str, header: &str) -> Option<&'a str> {
    lower.starts_with(header).then(|| line[header.len()..].trim())
}

fn parse_top_level_constraint(line: &str, items: &mut Vec<Constraint>) -> bool {
    if let Some(caps) = CON_TOTAL.captures(line) {
        if let Ok(days) = caps[1].parse() {
            items.push(Constraint::TotalDuration { days });
            return true;
        }
    }
    if let Some(caps) = CON_PARTICIPANTS.captures(line) {
        items.push(Constraint::Participants { names: split_names(&caps[1]) });
        return true;
    }
    if let Some(caps) = CON_DURATION.captures(line) {
        static PAREN: LazyLock<Regex> = LazyLock::new(|| re(r"\((\d+) minutes?\)"));
        let phrase = caps[1].trim();
        let minutes = PAREN
            .captures(phrase)
            .and_then(|c| c[1].parse().ok())
            .or_else(|| parse_duration_phrase(phrase));
        if let Some(minutes) = minutes {
            items.push(Constraint::MeetingDuration { minutes });
            return true;
        }
    }
    if let Some(caps) = CON_DAY.captures(line) {
        items.push(Constraint::MeetingDay { day: caps[1].to_string() });
        return true;
    }
    if let Some(caps) = CON_HOURS.captures(line) {
        if let (Some(start), Some(end)) = (parse_time(&caps[1]), parse_time(&caps[2])) {
            items.push(Constraint::WorkHours { start, end });
            return true;
        }
    }
    if let Some(caps) = CON_PREF.captures(line) {
        items.push(Constraint::Preference { text: caps[1].trim().to_string() });
        return true;
    }
    if let Some(caps) = CON_FEAS.captures(line) {
        items.push(Constraint::FeasibilityAsserted {
            flag: caps[1].eq_ignore_ascii_case("true"),
        });
        return true;
    }
    false
}

fn parse_constraint_line(
    section: Section,
    line: &str,
    items: &mut Vec<Constraint>,
    pending_windows: &mut Vec<(String, u32, u32)>,
) -> bool {
    match section {
        Section::Stays => {
            if let Some(caps) = CON_STAY.captures(line) {
                if let Ok(days) = caps[2].parse() {
                    items.push(Constraint::CityStay { city: caps[1].trim().to_string(), days });
                    if let (Some(s), Some(e)) = (caps.get(3), caps.get(4)) {
                        if let (Ok(s), Ok(e)) = (s.as_str().parse(), e.as_str().parse()) {
                            pending_windows.push((caps[1].trim().to_string(), s, e));
                        }
                    }
                    return true;
                }
            }
            false
        }
        Section::Events => {
            if let Some(caps) = CON_EVENT.captures(line) {
                if let (Ok(start_day), Ok(end_day)) = (caps[3].parse(), caps[4].parse()) {
                    items.push(Constraint::FixedWindow {
                        city: caps[2].trim().to_string(),
                        start_day,
                        end_day,
                        reason: caps[1].trim().to_string(),
                    });
                    return true;
                }
            }
            false
        }
        Section::Flights => {
            let lower = line.to_ascii_lowercase();
            if lower == "direct flights only" {
                items.push(Constraint::DirectFlightsOnly);
                return true;
            }
            if let Some(caps) = CON_CONNECTIONS.captures(line) {
                let mut any = false;
                for pair in caps[1].split(',') {
                    let pair = pair.trim();
                    let split = pair
                        .split_once(['–', '—'])
                        .or_else(|| pair.split_once('-'))
                        .or_else(|| pair.split_once(" and "));
                    if let Some((a, b)) = split {
                        items.push(Constraint::FlightEdge {
                            city_a: a.trim().to_string(),
                            city_b: b.trim().to_string(),
                        });
                        any = true;
                    }
                }
                return any;
            }
            false
        }
        Section::Blocked => {
            if let Some(caps) = CON_BUSY_PERSON.captures(line) {
                let person = caps[1].trim().to_string();
                let mut any = false;
                for range in caps[2].split(',') {
                    if let Some((start, end)) = parse_time_range(range) {
                        items.push(Constraint::BusyInterval {
                            person: person.clone(),
                            start,
                            end,
                        });
                        any = true;
                    }
                }
                return any;
            }
            false
        }
        Section::Arrival => {
            if let Some(caps) = CON_ARRIVE.captures(line) {
                if let Some(time) = parse_time(&caps[2]) {
                    items.push(Constraint::ArrivalAt { location: caps[1].to_string(), time });
                    return true;
                }
            }
            false
        }
        Section::Travel => {
            if let Some(caps) = MEET_TRAVEL.captures(line) {
                if let Ok(minutes) = caps[3].parse() {
                    items.push(Constraint::TravelTime {
                        from: caps[1].trim().to_string(),
                        to: caps[2].trim().to_string(),
                        minutes,
                    });
                    return true;
                }
            }
            false
        }
        Section::Availability => {
            if let Some(caps) = CON_AVAIL.captures(line) {
                if let (Some(start), Some(end)) = (parse_time(&caps[3]), parse_time(&caps[4])) {
                    items.push(Constraint::Availability {
                        friend: caps[1].to_string(),
                        location: caps[2].trim().to_string(),
                        start,
                        end,
                    });
                    return true;
                }
            }
            false
        }
        Section::MinDuration => {
            if let Some(caps) = CON_MINDUR.captures(line) {
                if let Ok(minutes) = caps[2].parse() {
                    items.push(Constraint::MinMeetingDuration {
                        friend: caps[1].to_string(),
                        minutes,
                    });
                    return true;
                }
            }
            false
        }
        Section::Goal | Section::None => false,
    }
}

/// Renders a plan in the line-per-step style that [`parse_plan_text`]
/// accepts; parsing the result reproduces the plan exactly.
pub fn render_plan(plan: &Plan) -> String {
    match plan {
        Plan::Trip { segments } => {
            let mut out = String::new();
            for (i, seg) in segments.iter().enumerate() {
                if i > 0 {
                    let _ = writeln!(
                        out,
                        "Day {}: Fly from {} to {}.",
                        seg.start_day,
                        segments[i - 1].city,
                        seg.city
                    );
                }
                let range = if seg.start_day == seg.end_day {
                    format!("Day {}", seg.start_day)
                } else {
                    format!("Day {}-{}", seg.start_day, seg.end_day)
                };
                let stay = seg.stay_days();
                if i == 0 {
                    let _ = writeln!(
                        out,
                        "{range}: Arrive in {} and visit for {stay} {}.",
                        seg.city,
                        days_word(stay)
                    );
                } else {
                    let _ = writeln!(
                        out,
                        "{range}: Visit {} for {stay} {}.",
                        seg.city,
                        days_word(stay)
                    );
                }
            }
            out
        }
        Plan::Calendar { day, start, end } => {
            format!("Proposed meeting time: {day}, {start}-{end}\n")
        }
        Plan::Meeting { events } => {
            if events.is_empty() {
                return "You do not meet any friends.\n".to_string();
            }
            let mut out = String::new();
            for ev in events {
                let _ = writeln!(
                    out,
                    "You meet {} at {} from {} to {}.",
                    ev.friend,
                    ev.location,
                    ev.meet_start.fmt_12h(),
                    ev.meet_end.fmt_12h()
                );
            }
            out
        }
    }
}

static PLAN_DAY: LazyLock<Regex> =
    LazyLock::new(|| re(r"(?i)^day\s+(\d+)(?:\s*[–—-]\s*(?:day\s+)?(\d+))?\s*:\s*(.+)$"));
static PLAN_TRIP_ARRIVE: LazyLock<Regex> =
    LazyLock::new(|| re(r"(?i)^arrive in (.+?)(?: and visit.*| for \d+ days?.*)?\.?$"));
static PLAN_TRIP_VISIT: LazyLock<Regex> =
    LazyLock::new(|| re(r"(?i)^(?:visit|stay in) (.+?)(?: for \d+ days?.*)?\.?$"));
static PLAN_CAL: LazyLock<Regex> = LazyLock::new(|| {
    re(&format!(
        r"(?i)\b(monday|tuesday|wednesday|thursday|friday|saturday|sunday)(?:\s*,|\s+from)?\s*({TIME})\s*(?:to|[-–—])\s*({TIME})"
    ))
});
static PLAN_MEET_START: LazyLock<Regex> =
    LazyLock::new(|| re(&format!(r"(?i)^you start at (.+?) at ({TIME})\.?$")));
static PLAN_MEET_TRAVEL: LazyLock<Regex> = LazyLock::new(|| {
    re(&format!(
        r"(?i)^you travel to (.+?)(?: in \d+ minutes)?(?:,| and)? arriv(?:e|ing) at ({TIME})\.?$"
    ))
});
static PLAN_MEET_WAIT: LazyLock<Regex> =
    LazyLock::new(|| re(&format!(r"(?i)^you wait until ({TIME})\.?$")));
static PLAN_MEET_EVENT: LazyLock<Regex> = LazyLock::new(|| {
    re(&format!(
        r"(?i)^(?:you )?meet (\S+?)(?: at (.+?))?(?: for \d+ minutes)?,?\s*(?:from )?\s*({TIME})\s*(?:to|[-–—])\s*({TIME})\.?$"
    ))
});
static PLAN_MEET_NONE: LazyLock<Regex> =
    LazyLock::new(|| re(r"(?i)do not meet any friends"));

/// Parses free-form plan text into a structured [`Plan`].
///
/// Tolerant of hyphen or dash day ranges, 12- or 24-hour clocks, and list
/// markers; lines that are not plan steps are skipped. Fails only when no
/// plan step is recognized at all.
pub fn parse_plan_text(task_kind: TaskKind, text: &str) -> Result<Plan, ParseError> {
    let first_line = || {
        ParseError::PlanText {
            line: line_segments(text).first().map(|(_, l)| l.to_string()).unwrap_or_default(),
        }
    };
    match task_kind {
        TaskKind::TripPlanning => {
            let mut segments = Vec::new();
            for (_, line) in line_segments(text) {
                let line = strip_bullet(line).trim_matches('*');
                let Some(caps) = PLAN_DAY.captures(line) else { continue };
                let start_day: u32 = match caps[1].parse() {
                    Ok(d) => d,
                    Err(_) => continue,
                };
                let end_day: u32 = caps
                    .get(2)
                    .and_then(|m| m.as_str().parse().ok())
                    .unwrap_or(start_day);
                let rest = caps[3].trim();
                if rest.to_ascii_lowercase().starts_with("fly") {
                    continue;
                }
                let city = PLAN_TRIP_ARRIVE
                    .captures(rest)
                    .or_else(|| PLAN_TRIP_VISIT.captures(rest))
                    .map(|c| c[1].trim().to_string());
                if let Some(city) = city {
                    segments.push(TripSegment { city, start_day, end_day });
                }
            }
            if segments.is_empty() {
                return Err(first_line());
            }
            Ok(Plan::Trip { segments })
        }
        TaskKind::CalendarScheduling => {
            let caps = PLAN_CAL.captures(text).ok_or_else(first_line)?;
            let (start, end) = match (parse_time(&caps[2]), parse_time(&caps[3])) {
                (Some(s), Some(e)) => (s, e),
                _ => return Err(first_line()),
            };
            Ok(Plan::Calendar { day: caps[1].to_string(), start, end })
        }
        TaskKind::MeetingPlanning => {
            let mut events = Vec::new();
            let mut location = String::new();
            let mut saw_none = false;
            for (_, line) in line_segments(text) {
                let line = strip_bullet(line).trim_matches('*');
                if PLAN_MEET_NONE.is_match(line) {
                    saw_none = true;
                    continue;
                }
                if let Some(caps) = PLAN_MEET_START.captures(line) {
                    location = caps[1].trim().to_string();
                    continue;
                }
                if let Some(caps) = PLAN_MEET_TRAVEL.captures(line) {
                    location = caps[1].trim().to_string();
                    continue;
                }
                if PLAN_MEET_WAIT.is_match(line) {
                    continue;
                }
                if let Some(caps) = PLAN_MEET_EVENT.captures(line) {
                    let at = caps
                        .get(2)
                        .map(|m| m.as_str().trim().to_string())
                        .unwrap_or_else(|| location.clone());
                    if at.is_empty() {
                        continue;
                    }
                    if let (Some(start), Some(end)) =
                        (parse_time(&caps[3]), parse_time(&caps[4]))
                    {
                        location = at.clone();
                        events.push(MeetingEvent {
                            friend: caps[1].to_string(),
                            location: at,
                            meet_start: start,
                            meet_end: end,
                        });
                    }
                }
            }
            if events.is_empty() && !saw_none {
                return Err(first_line());
            }
            Ok(Plan::Meeting { events })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn trip_query_extraction_matches_expected_fields() {
        let (cs, diags) = parse_query(TaskKind::TripPlanning, fixtures::TRIP_QUERY).unwrap();
        assert_eq!(cs.items, fixtures::trip_query_constraints().items);
        assert!(diags.unrecognized_spans.is_empty(), "{diags:?}");
        assert!(diags.warnings.is_empty(), "{diags:?}");
    }

    #[test]
    fn calendar_query_extraction_matches_expected_fields() {
        let (cs, diags) =
            parse_query(TaskKind::CalendarScheduling, fixtures::CALENDAR_QUERY).unwrap();
        assert_eq!(cs.items, fixtures::calendar_query_constraints().items);
        assert!(diags.unrecognized_spans.is_empty(), "{diags:?}");
    }

    #[test]
    fn meeting_query_extraction_matches_expected_fields() {
        let (cs, diags) =
            parse_query(TaskKind::MeetingPlanning, fixtures::MEETING_QUERY).unwrap();
        assert_eq!(cs.items, fixtures::meeting_query_constraints().items);
        assert!(diags.unrecognized_spans.is_empty(), "{diags:?}");
    }

    #[test]
    fn missing_total_duration_is_reported_by_family() {
        let err = parse_query(
            TaskKind::TripPlanning,
            "You would like to visit Rome for 3 days.",
        )
        .unwrap_err();
        assert!(matches!(err, ParseError::IncompleteQuery { missing: "TotalDuration" }));
    }

    #[test]
    fn unmatched_sentences_become_diagnostics() {
        let text = format!("{}\nBring comfortable shoes.\n", fixtures::TRIP_QUERY.trim_end());
        let (cs, diags) = parse_query(TaskKind::TripPlanning, &text).unwrap();
        assert_eq!(cs.items.len(), 8);
        assert_eq!(diags.unrecognized_spans.len(), 1);
        assert_eq!(diags.unrecognized_spans[0].text, "Bring comfortable shoes.");
        assert_eq!(
            &text[diags.unrecognized_spans[0].offset..][..diags.unrecognized_spans[0].length],
            "Bring comfortable shoes."
        );
    }

    #[test]
    fn query_render_round_trips() {
        for (kind, text) in [
            (TaskKind::TripPlanning, fixtures::TRIP_QUERY),
            (TaskKind::CalendarScheduling, fixtures::CALENDAR_QUERY),
            (TaskKind::MeetingPlanning, fixtures::MEETING_QUERY),
        ] {
            let (cs, _) = parse_query(kind, text).unwrap();
            let rendered = render_query(&cs);
            let (back, diags) = parse_query(kind, &rendered).unwrap();
            assert_eq!(back.items, cs.items, "{rendered}");
            assert!(diags.unrecognized_spans.is_empty(), "{rendered}");
        }
    }

    #[test]
    fn constraint_rendering_keeps_key_lines() {
        let cs = fixtures::trip_query_constraints();
        let text = render_constraints(&cs);
        assert!(text.contains("Total trip duration: 14 days"), "{text}");
        assert!(text.contains("Florence: 6 days (Day 9–14)"), "{text}");
        assert!(text.contains("Direct flight connections: Barcelona–Florence, Helsinki–Barcelona"), "{text}");
        let cal = render_constraints(&fixtures::calendar_query_constraints());
        assert!(cal.contains("Meeting Preferences: None"), "{cal}");
        assert!(cal.contains("Meeting Duration: 1 hour (60 minutes)"), "{cal}");
    }

    #[test]
    fn constraint_text_round_trips_as_a_set() {
        for cs in [
            fixtures::trip_query_constraints(),
            fixtures::calendar_query_constraints(),
            fixtures::meeting_query_constraints(),
            fixtures::trip_verify_constraints(),
            fixtures::calendar_verify_constraints(),
            fixtures::meeting_verify_constraints(),
        ] {
            let text = render_constraints(&cs);
            let (back, diags) = parse_constraints_text(cs.task_kind, &text).unwrap();
            assert!(diags.unrecognized_spans.is_empty(), "{text}\n{diags:?}");
            assert!(
                fixtures::same_items_any_order(&back, &cs),
                "round trip changed items:\n{text}\n{:#?}\nvs\n{:#?}",
                back.items,
                cs.items
            );
        }
    }

    #[test]
    fn verifier_style_constraint_text_parses() {
        let (cs, diags) =
            parse_constraints_text(TaskKind::TripPlanning, fixtures::TRIP_CONSTRAINTS_TEXT)
                .unwrap();
        assert!(diags.unrecognized_spans.is_empty(), "{diags:?}");
        assert!(fixtures::same_items_any_order(&cs, &fixtures::trip_verify_constraints()));

        let (cal, _) = parse_constraints_text(
            TaskKind::CalendarScheduling,
            fixtures::CALENDAR_CONSTRAINTS_TEXT,
        )
        .unwrap();
        assert!(fixtures::same_items_any_order(&cal, &fixtures::calendar_verify_constraints()));

        let (meet, _) =
            parse_constraints_text(TaskKind::MeetingPlanning, fixtures::MEETING_CONSTRAINTS_TEXT)
                .unwrap();
        assert!(fixtures::same_items_any_order(&meet, &fixtures::meeting_verify_constraints()));
    }

    #[test]
    fn trip_plan_text_parses_day_ranges() {
        let plan = parse_plan_text(TaskKind::TripPlanning, fixtures::TRIP_SOLUTION_TEXT).unwrap();
        assert_eq!(plan, fixtures::trip_flawed_plan());
    }

    #[test]
    fn calendar_plan_text_parses() {
        let plan = parse_plan_text(
            TaskKind::CalendarScheduling,
            "Proposed meeting time: Monday, 12:00–13:00",
        )
        .unwrap();
        assert_eq!(
            plan,
            Plan::Calendar {
                day: "Monday".into(),
                start: TimeOfDay::hm(12, 0),
                end: TimeOfDay::hm(13, 0)
            }
        );
    }

    #[test]
    fn meeting_plan_text_parses_inline_style() {
        let plan = parse_plan_text(
            TaskKind::MeetingPlanning,
            "meet Ronald at Russian Hill 3:15PM–4:00PM",
        )
        .unwrap();
        assert_eq!(
            plan,
            Plan::Meeting {
                events: vec![MeetingEvent {
                    friend: "Ronald".into(),
                    location: "Russian Hill".into(),
                    meet_start: TimeOfDay::hm(15, 15),
                    meet_end: TimeOfDay::hm(16, 0),
                }]
            }
        );
    }

    #[test]
    fn meeting_plan_narrative_tracks_location() {
        let text = "You start at Marina District at 9:00AM.\n\
                    You travel to Mission District in 20 minutes and arrive at 9:20AM.\n\
                    You wait until 10:30AM.\n\
                    You meet Stephanie for 120 minutes from 10:30AM to 12:30PM.\n";
        let plan = parse_plan_text(TaskKind::MeetingPlanning, text).unwrap();
        assert_eq!(
            plan,
            Plan::Meeting {
                events: vec![MeetingEvent {
                    friend: "Stephanie".into(),
                    location: "Mission District".into(),
                    meet_start: TimeOfDay::hm(10, 30),
                    meet_end: TimeOfDay::hm(12, 30),
                }]
            }
        );
    }

    #[test]
    fn plan_text_error_names_first_line() {
        let err = parse_plan_text(TaskKind::TripPlanning, "I think the plan is fine.")
            .unwrap_err();
        assert!(matches!(err, ParseError::PlanText { ref line } if line == "I think the plan is fine."));
    }

    #[test]
    fn plan_render_round_trips() {
        let plans = [
            fixtures::trip_golden_plan(),
            Plan::Calendar {
                day: "monday".into(),
                start: TimeOfDay::hm(14, 30),
                end: TimeOfDay::hm(15, 30),
            },
            fixtures::meeting_golden_plan(),
            Plan::Meeting { events: vec![] },
        ];
        for plan in plans {
            let text = render_plan(&plan);
            let back = parse_plan_text(plan.task_kind(), &text).unwrap();
            assert_eq!(back, plan, "{text}");
        }
    }

    #[test]
    fn time_parsing_accepts_both_clocks() {
        assert_eq!(parse_time("14:30"), Some(TimeOfDay::hm(14, 30)));
        assert_eq!(parse_time("9:00AM"), Some(TimeOfDay::hm(9, 0)));
        assert_eq!(parse_time("1:30 PM"), Some(TimeOfDay::hm(13, 30)));
        assert_eq!(parse_time("12:00PM"), Some(TimeOfDay::hm(12, 0)));
        assert_eq!(parse_time("12:15AM"), Some(TimeOfDay::hm(0, 15)));
        assert_eq!(parse_time("9AM"), Some(TimeOfDay::hm(9, 0)));
        assert_eq!(parse_time("9"), None);
        assert_eq!(parse_time("25:00"), None);
    }
}
