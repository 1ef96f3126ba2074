//! Deterministic plan checking: every checkable constraint yields a
//! [`CheckOutcome`], and the verdict score is `floor(100 * satisfied /
//! checkable)`.
//!
//! Checking is tolerant of malformed plans. Structural problems such as
//! itinerary gaps or unknown travel legs are reported as outcomes with no
//! constraint index instead of errors, so that a noisy actor's proposals
//! always receive a verdict.

use crate::domain::{fold_name, name_eq, Constraint, ConstraintSet, Plan, TaskKind, Verdict, Violation};
use std::collections::{BTreeSet, HashMap};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("constraint set is for {expected} but the plan is for {actual}")]
    TypeMismatch { expected: TaskKind, actual: TaskKind },
    #[error("constraint set has no checkable items")]
    EmptyConstraints,
    #[error(transparent)]
    Solve(#[from] crate::solve::SolveError),
}

/// The result of checking one constraint (or one structural property, in
/// which case `constraint_index` is `None`) against a plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOutcome {
    pub constraint_index: Option<usize>,
    pub satisfied: bool,
    pub reason: String,
}

impl CheckOutcome {
    fn ok(constraint_index: Option<usize>) -> CheckOutcome {
        CheckOutcome { constraint_index, satisfied: true, reason: String::new() }
    }

    fn violated(constraint_index: Option<usize>, reason: String) -> CheckOutcome {
        CheckOutcome { constraint_index, satisfied: false, reason }
    }
}

/// Scores a set of check outcomes: `floor(100 * satisfied / total)`.
///
/// ```
/// use planmem::verify::{compute_score, CheckOutcome};
/// let outcomes: Vec<CheckOutcome> = (0..8)
///     .map(|i| CheckOutcome { constraint_index: Some(i), satisfied: i != 0, reason: String::new() })
///     .collect();
/// assert_eq!(compute_score(&outcomes).unwrap(), 87);
/// ```
pub fn compute_score(outcomes: &[CheckOutcome]) -> Result<u8, VerifyError> {
    if outcomes.is_empty() {
        return Err(VerifyError::EmptyConstraints);
    }
    let satisfied = outcomes.iter().filter(|o| o.satisfied).count();
    Ok((satisfied * 100 / outcomes.len()) as u8)
}

/// Checks a plan against a constraint set and returns the scored verdict.
pub fn verify(cs: &ConstraintSet, plan: &Plan) -> Result<Verdict, VerifyError> {
    let outcomes = check_plan(cs, plan)?;
    let score = compute_score(&outcomes)?;
    let violations = outcomes
        .into_iter()
        .filter(|o| !o.satisfied)
        .map(|o| Violation { constraint_index: o.constraint_index, reason: o.reason })
        .collect();
    Ok(Verdict::new(score, violations))
}

/// Evaluates every checkable constraint plus structural plan properties.
pub fn check_plan(cs: &ConstraintSet, plan: &Plan) -> Result<Vec<CheckOutcome>, VerifyError> {
    if cs.items.is_empty() {
        return Err(VerifyError::EmptyConstraints);
    }
    let outcomes = match (plan, cs.task_kind) {
        (Plan::Trip { segments }, TaskKind::TripPlanning) => check_trip(cs, segments),
        (Plan::Calendar { day, start, end }, TaskKind::CalendarScheduling) => {
            check_calendar(cs, day, *start, *end)
        }
        (Plan::Meeting { events }, TaskKind::MeetingPlanning) => check_meeting(cs, events)?,
        _ => {
            return Err(VerifyError::TypeMismatch {
                expected: cs.task_kind,
                actual: plan.task_kind(),
            })
        }
    };
    if outcomes.is_empty() {
        return Err(VerifyError::EmptyConstraints);
    }
    Ok(outcomes)
}

fn check_trip(cs: &ConstraintSet, segments: &[crate::domain::TripSegment]) -> Vec<CheckOutcome> {
    let mut outcomes = Vec::new();
    let mut structure_ok = !segments.is_empty();
    match segments.first() {
        Some(first) if first.start_day != 1 => {
            outcomes.push(CheckOutcome::violated(
                None,
                format!(
                    "The itinerary does not start on Day 1: {} starts on Day {}.",
                    first.city, first.start_day
                ),
            ));
            structure_ok = false;
        }
        None => outcomes.push(CheckOutcome::violated(
            None,
            "The itinerary contains no segments.".to_string(),
        )),
        _ => {}
    }
    for seg in segments {
        if seg.end_day < seg.start_day {
            outcomes.push(CheckOutcome::violated(
                None,
                format!(
                    "The {} segment ends on Day {} before it starts on Day {}.",
                    seg.city, seg.end_day, seg.start_day
                ),
            ));
            structure_ok = false;
        }
    }
    for pair in segments.windows(2) {
        if pair[1].start_day != pair[0].end_day {
            outcomes.push(CheckOutcome::violated(
                None,
                format!(
                    "The itinerary is not contiguous: {} starts on Day {} but the previous city ends on Day {}.",
                    pair[1].city, pair[1].start_day, pair[0].end_day
                ),
            ));
            structure_ok = false;
        }
    }

    let mut city_days: HashMap<String, BTreeSet<u32>> = HashMap::new();
    let mut first_range: HashMap<String, (u32, u32)> = HashMap::new();
    for seg in segments {
        let key = fold_name(&seg.city);
        if seg.end_day >= seg.start_day {
            city_days.entry(key.clone()).or_default().extend(seg.start_day..=seg.end_day);
        }
        first_range.entry(key).or_insert((seg.start_day, seg.end_day));
    }
    let edges: Vec<(String, String)> = cs
        .items
        .iter()
        .filter_map(|c| match c {
            Constraint::FlightEdge { city_a, city_b } => {
                Some((fold_name(city_a), fold_name(city_b)))
            }
            _ => None,
        })
        .collect();

    for (idx, item) in cs.items.iter().enumerate() {
        let idx = Some(idx);
        match item {
            Constraint::TotalDuration { days } => {
                let last_end = segments.last().map_or(0, |s| s.end_day);
                if structure_ok && last_end == *days {
                    outcomes.push(CheckOutcome::ok(idx));
                } else if !structure_ok {
                    outcomes.push(CheckOutcome::violated(
                        idx,
                        "Total trip duration cannot be confirmed: the itinerary is not a contiguous chain from Day 1.".to_string(),
                    ));
                } else {
                    outcomes.push(CheckOutcome::violated(
                        idx,
                        format!(
                            "Total trip duration is incorrect: the itinerary covers {last_end} days but the trip lasts {days} days."
                        ),
                    ));
                }
            }
            Constraint::CityStay { city, days } => {
                let key = fold_name(city);
                let covered: u32 = segments
                    .iter()
                    .filter(|s| fold_name(&s.city) == key && s.end_day >= s.start_day)
                    .map(|s| s.stay_days())
                    .sum();
                if !first_range.contains_key(&key) {
                    outcomes.push(CheckOutcome::violated(
                        idx,
                        format!(
                            "{city} is missing from the itinerary: {days} days are required."
                        ),
                    ));
                } else if covered == *days {
                    outcomes.push(CheckOutcome::ok(idx));
                } else {
                    let (s, e) = first_range[&key];
                    outcomes.push(CheckOutcome::violated(
                        idx,
                        format!(
                            "{city} visit duration is incorrect: the plan states {days} days but the itinerary covers {covered} days (Day {s}–{e})."
                        ),
                    ));
                }
            }
            Constraint::FixedWindow { city, start_day, end_day, reason } => {
                let key = fold_name(city);
                let present = city_days.get(&key);
                let covered = present
                    .map(|days| (*start_day..=*end_day).all(|d| days.contains(&d)))
                    .unwrap_or(false);
                if covered {
                    outcomes.push(CheckOutcome::ok(idx));
                } else if let Some((s, e)) = first_range.get(&key) {
                    outcomes.push(CheckOutcome::violated(
                        idx,
                        format!(
                            "You cannot {reason} in {city} between Day {start_day}–{end_day}: the plan has {city} only on Day {s}–{e}."
                        ),
                    ));
                } else {
                    outcomes.push(CheckOutcome::violated(
                        idx,
                        format!(
                            "The plan never visits {city}, so you cannot {reason} there between Day {start_day}–{end_day}."
                        ),
                    ));
                }
            }
            Constraint::DirectFlightsOnly => {
                let mut missing = Vec::new();
                for pair in segments.windows(2) {
                    let a = fold_name(&pair[0].city);
                    let b = fold_name(&pair[1].city);
                    if a == b {
                        continue;
                    }
                    let connected = edges
                        .iter()
                        .any(|(x, y)| (*x == a && *y == b) || (*x == b && *y == a));
                    if !connected {
                        missing.push(format!(
                            "There is no direct flight between {} and {}.",
                            pair[0].city, pair[1].city
                        ));
                    }
                }
                if missing.is_empty() {
                    outcomes.push(CheckOutcome::ok(idx));
                } else {
                    outcomes.push(CheckOutcome::violated(idx, missing.join(" ")));
                }
            }
            _ => {}
        }
    }
    outcomes
}

fn check_calendar(
    cs: &ConstraintSet,
    plan_day: &str,
    start: crate::domain::TimeOfDay,
    end: crate::domain::TimeOfDay,
) -> Vec<CheckOutcome> {
    let mut outcomes = Vec::new();
    let positive = end > start;
    if !positive {
        outcomes.push(CheckOutcome::violated(
            None,
            format!("The proposed meeting ends at {end} before it starts at {start}."),
        ));
    }
    for (idx, item) in cs.items.iter().enumerate() {
        let idx = Some(idx);
        match item {
            Constraint::MeetingDuration { minutes } => {
                let actual = if positive { (end.0 - start.0) as u32 } else { 0 };
                if positive && actual == *minutes {
                    outcomes.push(CheckOutcome::ok(idx));
                } else {
                    outcomes.push(CheckOutcome::violated(
                        idx,
                        format!(
                            "Meeting duration is incorrect: the proposed meeting lasts {actual} minutes but {minutes} minutes are required."
                        ),
                    ));
                }
            }
            Constraint::MeetingDay { day } => {
                if name_eq(day, plan_day) {
                    outcomes.push(CheckOutcome::ok(idx));
                } else {
                    outcomes.push(CheckOutcome::violated(
                        idx,
                        format!(
                            "Meeting day is incorrect: the meeting is proposed on {plan_day} but must be on {day}."
                        ),
                    ));
                }
            }
            Constraint::WorkHours { start: ws, end: we } => {
                if start >= *ws && end <= *we && positive {
                    outcomes.push(CheckOutcome::ok(idx));
                } else {
                    outcomes.push(CheckOutcome::violated(
                        idx,
                        format!(
                            "The proposed meeting time of {start}–{end} is outside the work hours of {ws}–{we}."
                        ),
                    ));
                }
            }
            Constraint::BusyInterval { person, start: bs, end: be } => {
                let overlap = positive && start < *be && *bs < end;
                if overlap {
                    outcomes.push(CheckOutcome::violated(
                        idx,
                        format!(
                            "{person} is busy from {bs} to {be}, overlapping with the proposed meeting time of {start}–{end}."
                        ),
                    ));
                } else {
                    outcomes.push(CheckOutcome::ok(idx));
                }
            }
            _ => {}
        }
    }
    outcomes
}

fn check_meeting(
    cs: &ConstraintSet,
    events: &[crate::domain::MeetingEvent],
) -> Result<Vec<CheckOutcome>, VerifyError> {
    let mut outcomes = Vec::new();
    let travel: HashMap<(String, String), u32> = cs
        .items
        .iter()
        .filter_map(|c| match c {
            Constraint::TravelTime { from, to, minutes } => {
                Some(((fold_name(from), fold_name(to)), *minutes))
            }
            _ => None,
        })
        .collect();
    let known_friend = |name: &str| {
        cs.items.iter().any(|c| {
            matches!(c, Constraint::Availability { friend, .. } if name_eq(friend, name))
        })
    };

    for ev in events {
        if ev.meet_end <= ev.meet_start {
            outcomes.push(CheckOutcome::violated(
                None,
                format!("The meeting with {} does not have positive length.", ev.friend),
            ));
        }
        if !known_friend(&ev.friend) {
            outcomes.push(CheckOutcome::violated(
                None,
                format!("The plan meets {}, who is not in the list of friends.", ev.friend),
            ));
        }
    }
    for pair in events.windows(2) {
        let (prev, next) = (&pair[0], &pair[1]);
        if fold_name(&prev.location) == fold_name(&next.location) {
            if next.meet_start < prev.meet_end {
                outcomes.push(CheckOutcome::violated(
                    None,
                    format!(
                        "The meetings with {} and {} overlap.",
                        prev.friend, next.friend
                    ),
                ));
            }
        } else if !travel.contains_key(&(fold_name(&prev.location), fold_name(&next.location))) {
            outcomes.push(CheckOutcome::violated(
                None,
                format!(
                    "No travel time is known from {} to {}.",
                    prev.location, next.location
                ),
            ));
        }
    }

    for (idx, item) in cs.items.iter().enumerate() {
        let idx = Some(idx);
        match item {
            Constraint::ArrivalAt { location, time } => {
                let Some(first) = events.first() else {
                    outcomes.push(CheckOutcome::ok(idx));
                    continue;
                };
                let here = fold_name(location);
                let there = fold_name(&first.location);
                let reachable = if here == there {
                    Some(time.0 as u32)
                } else {
                    travel.get(&(here, there)).map(|tt| time.0 as u32 + tt)
                };
                match reachable {
                    Some(at) if (first.meet_start.0 as u32) >= at => {
                        outcomes.push(CheckOutcome::ok(idx))
                    }
                    Some(at) => outcomes.push(CheckOutcome::violated(
                        idx,
                        format!(
                            "You arrive at {location} at {} and cannot reach {} by {}: the earliest arrival is {} minutes later.",
                            time.fmt_12h_spaced(),
                            first.location,
                            first.meet_start.fmt_12h_spaced(),
                            at - first.meet_start.0 as u32
                        ),
                    )),
                    None => outcomes.push(CheckOutcome::violated(
                        idx,
                        format!(
                            "You arrive at {location} at {} and there is no known travel time to {}.",
                            time.fmt_12h_spaced(),
                            first.location
                        ),
                    )),
                }
            }
            Constraint::TravelTime { from, to, minutes } => {
                let mut reason = None;
                for pair in events.windows(2) {
                    let (prev, next) = (&pair[0], &pair[1]);
                    if !name_eq(&prev.location, from) || !name_eq(&next.location, to) {
                        continue;
                    }
                    let gap = next.meet_start.0 as i64 - prev.meet_end.0 as i64;
                    if gap < *minutes as i64 {
                        reason = Some(format!(
                            "Travel from {from} to {to} takes {minutes} minutes, but the plan allows only {gap} minutes between the meeting with {} (ends {}) and the meeting with {} (starts {}).",
                            prev.friend,
                            prev.meet_end.fmt_12h_spaced(),
                            next.friend,
                            next.meet_start.fmt_12h_spaced()
                        ));
                        break;
                    }
                }
                match reason {
                    Some(reason) => outcomes.push(CheckOutcome::violated(idx, reason)),
                    None => outcomes.push(CheckOutcome::ok(idx)),
                }
            }
            Constraint::Availability { friend, location, start, end } => {
                let mut reason = None;
                for ev in events.iter().filter(|ev| name_eq(&ev.friend, friend)) {
                    if !name_eq(&ev.location, location) {
                        reason = Some(format!(
                            "{friend} is at {location} from {} to {}, but the plan meets {friend} at {}.",
                            start.fmt_12h_spaced(),
                            end.fmt_12h_spaced(),
                            ev.location
                        ));
                        break;
                    }
                    if ev.meet_start < *start || ev.meet_end > *end {
                        reason = Some(format!(
                            "{friend} is only at {location} from {} to {}, but the plan meets {friend} from {} to {}.",
                            start.fmt_12h_spaced(),
                            end.fmt_12h_spaced(),
                            ev.meet_start.fmt_12h_spaced(),
                            ev.meet_end.fmt_12h_spaced()
                        ));
                        break;
                    }
                }
                match reason {
                    Some(reason) => outcomes.push(CheckOutcome::violated(idx, reason)),
                    None => outcomes.push(CheckOutcome::ok(idx)),
                }
            }
            Constraint::MinMeetingDuration { friend, minutes } => {
                let matching: Vec<&crate::domain::MeetingEvent> =
                    events.iter().filter(|ev| name_eq(&ev.friend, friend)).collect();
                if matching.is_empty() {
                    outcomes.push(CheckOutcome::ok(idx));
                    continue;
                }
                let total: u32 = matching
                    .iter()
                    .filter(|ev| ev.meet_end > ev.meet_start)
                    .map(|ev| (ev.meet_end.0 - ev.meet_start.0) as u32)
                    .sum();
                if total >= *minutes {
                    outcomes.push(CheckOutcome::ok(idx));
                } else {
                    let first = matching[0];
                    outcomes.push(CheckOutcome::violated(
                        idx,
                        format!(
                            "Meeting Duration Constraint: The meeting with {friend} only lasts {total} minutes (from {} to {}), which is less than the required minimum duration of {minutes} minutes.",
                            first.meet_start.fmt_12h_spaced(),
                            first.meet_end.fmt_12h_spaced()
                        ),
                    ));
                }
            }
            Constraint::OptimizationGoal => {
                let best = crate::solve::max_friends_met(cs)?;
                let mut met: Vec<String> = Vec::new();
                for ev in events {
                    let key = fold_name(&ev.friend);
                    if !met.contains(&key) {
                        met.push(key);
                    }
                }
                if met.len() >= best {
                    outcomes.push(CheckOutcome::ok(idx));
                } else {
                    outcomes.push(CheckOutcome::violated(
                        idx,
                        format!(
                            "The plan meets {} friends but {best} can be met; the goal is to maximize the number of friends met.",
                            met.len()
                        ),
                    ));
                }
            }
            _ => {}
        }
    }
    Ok(outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{ConstraintSource, TimeOfDay, TripSegment};
    use crate::fixtures;

    #[test]
    fn golden_plans_score_one_hundred() {
        let cases = [
            (fixtures::trip_query_constraints(), fixtures::trip_golden_plan()),
            (fixtures::calendar_query_constraints(), fixtures::calendar_golden_plan()),
            (fixtures::meeting_query_constraints(), fixtures::meeting_golden_plan()),
        ];
        for (cs, plan) in cases {
            let verdict = verify(&cs, &plan).unwrap();
            assert!(verdict.accepted, "{:?}", verdict.violations);
            assert_eq!(verdict.score, 100);
        }
    }

    #[test]
    fn short_munich_stay_is_flagged() {
        let verdict =
            verify(&fixtures::trip_verify_constraints(), &fixtures::trip_flawed_plan()).unwrap();
        assert!(!verdict.accepted);
        assert_eq!(verdict.score, 66);
        let reasons: Vec<&str> = verdict.violations.iter().map(|v| v.reason.as_str()).collect();
        assert!(reasons.contains(
            &"Munich visit duration is incorrect: the plan states 5 days but the itinerary covers 4 days (Day 7–10)."
        ), "{reasons:?}");
        assert!(reasons.contains(
            &"Tallinn visit duration is incorrect: the plan states 2 days but the itinerary covers 3 days (Day 10–12)."
        ), "{reasons:?}");
    }

    #[test]
    fn busy_overlap_is_flagged() {
        let verdict =
            verify(&fixtures::calendar_verify_constraints(), &fixtures::calendar_flawed_plan())
                .unwrap();
        assert!(!verdict.accepted);
        assert_eq!(verdict.score, 90);
        assert_eq!(verdict.violations.len(), 1);
        assert_eq!(
            verdict.violations[0].reason,
            "Samantha is busy from 12:00 to 15:00, overlapping with the proposed meeting time of 12:00–13:00."
        );
    }

    #[test]
    fn short_meeting_is_flagged() {
        let verdict =
            verify(&fixtures::meeting_verify_constraints(), &fixtures::meeting_flawed_plan())
                .unwrap();
        assert!(!verdict.accepted);
        assert_eq!(verdict.score, 83);
        assert_eq!(verdict.violations.len(), 1);
        assert_eq!(
            verdict.violations[0].reason,
            "Meeting Duration Constraint: The meeting with Ronald only lasts 45 minutes (from 3:15 PM to 4:00 PM), which is less than the required minimum duration of 105 minutes."
        );
    }

    #[test]
    fn non_contiguous_trip_gets_structural_violations() {
        let cs = fixtures::trip_verify_constraints();
        let plan = Plan::Trip {
            segments: vec![
                TripSegment { city: "Seville".into(), start_day: 1, end_day: 7 },
                TripSegment { city: "Munich".into(), start_day: 9, end_day: 12 },
            ],
        };
        let verdict = verify(&cs, &plan).unwrap();
        assert!(!verdict.accepted);
        assert!(verdict
            .violations
            .iter()
            .any(|v| v.constraint_index.is_none() && v.reason.contains("not contiguous")));
    }

    #[test]
    fn kind_mismatch_is_an_error() {
        let cs = fixtures::trip_query_constraints();
        let err = verify(&cs, &fixtures::calendar_golden_plan()).unwrap_err();
        assert!(matches!(err, VerifyError::TypeMismatch { .. }));
    }

    #[test]
    fn empty_constraints_are_an_error() {
        let cs = crate::domain::ConstraintSet::new(
            TaskKind::MeetingPlanning,
            vec![],
            ConstraintSource::SymbolicParse,
        )
        .unwrap();
        let err = verify(&cs, &Plan::Meeting { events: vec![] }).unwrap_err();
        assert!(matches!(err, VerifyError::EmptyConstraints));
    }

    #[test]
    fn unknown_travel_leg_is_flagged_without_index() {
        let cs = fixtures::meeting_verify_constraints();
        let plan = Plan::Meeting {
            events: vec![
                crate::domain::MeetingEvent {
                    friend: "Ronald".into(),
                    location: "Russian Hill".into(),
                    meet_start: TimeOfDay::hm(15, 15),
                    meet_end: TimeOfDay::hm(17, 0),
                },
                crate::domain::MeetingEvent {
                    friend: "Ronald".into(),
                    location: "Alamo Square".into(),
                    meet_start: TimeOfDay::hm(18, 0),
                    meet_end: TimeOfDay::hm(19, 0),
                },
            ],
        };
        let verdict = verify(&cs, &plan).unwrap();
        assert!(verdict
            .violations
            .iter()
            .any(|v| v.constraint_index.is_none() && v.reason.contains("No travel time")));
    }
}
