//! Exhaustive oracle solvers and the seeded noisy actor.
//!
//! All searches visit candidates in a fixed order (document order of the
//! constraints, lexicographic order of permutations, ascending times), so
//! the same constraint set always yields the same plan.
//!
//! Conventions: trip itineraries visit each city in one contiguous segment,
//! calendar slots start on the half hour, and meeting schedules see each
//! friend at most once. The verifier accepts some plans outside these
//! conventions (for example split stays); the solver and enumerator do not
//! produce them.

use crate::domain::{
    fold_name, Constraint, ConstraintSet, MeetingEvent, Plan, QMemEntry, TaskKind, TimeOfDay,
    TripSegment,
};
use itertools::Itertools;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use thiserror::Error;

/// Search cap: trips with more cities than this are rejected rather than
/// permuted.
pub const MAX_TRIP_CITIES: usize = 10;
/// Search cap: meeting instances with more friends than this are rejected.
pub const MAX_MEETING_FRIENDS: usize = 10;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("instance too large: {count} {what} exceeds the cap of {cap}")]
    InstanceTooLarge { what: &'static str, count: usize, cap: usize },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("no plan satisfies the constraints")]
    Infeasible,
}

/// Finds one plan scoring 100, or `None` when the instance is unsatisfiable.
pub fn solve(cs: &ConstraintSet) -> Result<Option<Plan>, SolveError> {
    match cs.task_kind {
        TaskKind::TripPlanning => solve_trip(cs),
        TaskKind::CalendarScheduling => Ok(solve_calendar(cs)),
        TaskKind::MeetingPlanning => Ok(meeting_search(cs)?.map(|(_, plan)| plan)),
    }
}

/// Enumerates distinct valid plans in deterministic order, up to `limit`.
pub fn enumerate_all(cs: &ConstraintSet, limit: usize) -> Result<Vec<Plan>, SolveError> {
    if limit == 0 {
        return Err(SolveError::Argument("enumeration limit must be positive".to_string()));
    }
    match cs.task_kind {
        TaskKind::TripPlanning => enumerate_trip(cs, limit),
        TaskKind::CalendarScheduling => Ok(enumerate_calendar(cs, limit)),
        TaskKind::MeetingPlanning => enumerate_meeting(cs, limit),
    }
}

/// The largest number of distinct friends any feasible schedule can meet.
pub fn max_friends_met(cs: &ConstraintSet) -> Result<usize, SolveError> {
    if cs.task_kind != TaskKind::MeetingPlanning {
        return Err(SolveError::Argument(format!(
            "max_friends_met applies to meeting scheduling, not {}",
            cs.task_kind
        )));
    }
    Ok(meeting_search(cs)?.map_or(0, |(k, _)| k))
}

struct TripTables {
    stays: Vec<(String, u32)>,
    total: u32,
    windows: Vec<(String, u32, u32)>,
    edges: Vec<(String, String)>,
    direct_only: bool,
}

fn trip_tables(cs: &ConstraintSet) -> Result<TripTables, SolveError> {
    let mut tables = TripTables {
        stays: Vec::new(),
        total: 0,
        windows: Vec::new(),
        edges: Vec::new(),
        direct_only: false,
    };
    for item in &cs.items {
        match item {
            Constraint::TotalDuration { days } => tables.total = *days,
            Constraint::CityStay { city, days } => tables.stays.push((city.clone(), *days)),
            Constraint::FixedWindow { city, start_day, end_day, .. } => {
                tables.windows.push((fold_name(city), *start_day, *end_day))
            }
            Constraint::DirectFlightsOnly => tables.direct_only = true,
            Constraint::FlightEdge { city_a, city_b } => {
                tables.edges.push((fold_name(city_a), fold_name(city_b)))
            }
            _ => {}
        }
    }
    if tables.stays.len() > MAX_TRIP_CITIES {
        return Err(SolveError::InstanceTooLarge {
            what: "cities",
            count: tables.stays.len(),
            cap: MAX_TRIP_CITIES,
        });
    }
    Ok(tables)
}

fn trip_order_to_plan(tables: &TripTables, order: &[usize]) -> Option<Plan> {
    let mut segments = Vec::with_capacity(order.len());
    let mut day = 1u32;
    for &i in order {
        let (city, stay) = &tables.stays[i];
        let end = day + stay - 1;
        segments.push(TripSegment { city: city.clone(), start_day: day, end_day: end });
        day = end;
    }
    if segments.last().map_or(0, |s| s.end_day) != tables.total {
        return None;
    }
    for (city, ws, we) in &tables.windows {
        let seg = segments.iter().find(|s| fold_name(&s.city) == *city)?;
        if seg.start_day > *ws || seg.end_day < *we {
            return None;
        }
    }
    if tables.direct_only {
        for pair in segments.windows(2) {
            let a = fold_name(&pair[0].city);
            let b = fold_name(&pair[1].city);
            let connected = tables
                .edges
                .iter()
                .any(|(x, y)| (*x == a && *y == b) || (*x == b && *y == a));
            if !connected {
                return None;
            }
        }
    }
    Some(Plan::Trip { segments })
}

fn solve_trip(cs: &ConstraintSet) -> Result<Option<Plan>, SolveError> {
    let tables = trip_tables(cs)?;
    if tables.stays.is_empty() {
        return Ok(None);
    }
    let n = tables.stays.len();
    for order in (0..n).permutations(n) {
        if let Some(plan) = trip_order_to_plan(&tables, &order) {
            return Ok(Some(plan));
        }
    }
    Ok(None)
}

fn enumerate_trip(cs: &ConstraintSet, limit: usize) -> Result<Vec<Plan>, SolveError> {
    let tables = trip_tables(cs)?;
    let mut plans = Vec::new();
    if tables.stays.is_empty() {
        return Ok(plans);
    }
    let n = tables.stays.len();
    let mut seen = std::collections::HashSet::new();
    for order in (0..n).permutations(n) {
        if let Some(plan) = trip_order_to_plan(&tables, &order) {
            let key = serde_json::to_string(&crate::domain::canonicalize_plan(&plan).expect(
                "solver plans are canonical",
            ))
            .expect("plans serialize");
            if seen.insert(key) {
                plans.push(plan);
                if plans.len() == limit {
                    break;
                }
            }
        }
    }
    Ok(plans)
}

struct CalendarTables {
    day: String,
    duration: u16,
    work_start: TimeOfDay,
    work_end: TimeOfDay,
    busy: Vec<(TimeOfDay, TimeOfDay)>,
}

fn calendar_tables(cs: &ConstraintSet) -> CalendarTables {
    let mut tables = CalendarTables {
        day: "Monday".to_string(),
        duration: 30,
        work_start: TimeOfDay(0),
        work_end: TimeOfDay::DAY_END,
        busy: Vec::new(),
    };
    for item in &cs.items {
        match item {
            Constraint::MeetingDuration { minutes } => tables.duration = *minutes as u16,
            Constraint::MeetingDay { day } => tables.day = day.clone(),
            Constraint::WorkHours { start, end } => {
                tables.work_start = *start;
                tables.work_end = *end;
            }
            Constraint::BusyInterval { start, end, .. } => tables.busy.push((*start, *end)),
            _ => {}
        }
    }
    tables
}

fn calendar_slot_free(tables: &CalendarTables, start: TimeOfDay, end: TimeOfDay) -> bool {
    tables.busy.iter().all(|(bs, be)| start >= *be || end <= *bs)
}

fn enumerate_calendar(cs: &ConstraintSet, limit: usize) -> Vec<Plan> {
    let tables = calendar_tables(cs);
    let mut plans = Vec::new();
    let mut start = tables.work_start;
    while start.0 + tables.duration <= tables.work_end.0 {
        let end = TimeOfDay(start.0 + tables.duration);
        if calendar_slot_free(&tables, start, end) {
            plans.push(Plan::Calendar { day: tables.day.clone(), start, end });
            if plans.len() == limit {
                break;
            }
        }
        start = TimeOfDay(start.0 + 30);
    }
    plans
}

fn solve_calendar(cs: &ConstraintSet) -> Option<Plan> {
    enumerate_calendar(cs, 1).into_iter().next()
}

struct Friend {
    name: String,
    location: String,
    window_start: TimeOfDay,
    window_end: TimeOfDay,
    min_minutes: u32,
}

struct MeetingTables {
    arrival: Option<(String, TimeOfDay)>,
    friends: Vec<Friend>,
    travel: HashMap<(String, String), u32>,
}

fn meeting_tables(cs: &ConstraintSet) -> Result<MeetingTables, SolveError> {
    let mut tables =
        MeetingTables { arrival: None, friends: Vec::new(), travel: HashMap::new() };
    for item in &cs.items {
        match item {
            Constraint::ArrivalAt { location, time } => {
                tables.arrival.get_or_insert((location.clone(), *time));
            }
            Constraint::Availability { friend, location, start, end } => {
                tables.friends.push(Friend {
                    name: friend.clone(),
                    location: location.clone(),
                    window_start: *start,
                    window_end: *end,
                    min_minutes: 1,
                });
            }
            Constraint::TravelTime { from, to, minutes } => {
                tables.travel.insert((fold_name(from), fold_name(to)), *minutes);
            }
            _ => {}
        }
    }
    for item in &cs.items {
        if let Constraint::MinMeetingDuration { friend, minutes } = item {
            if let Some(f) =
                tables.friends.iter_mut().find(|f| fold_name(&f.name) == fold_name(friend))
            {
                f.min_minutes = *minutes;
            }
        }
    }
    if tables.friends.len() > MAX_MEETING_FRIENDS {
        return Err(SolveError::InstanceTooLarge {
            what: "friends",
            count: tables.friends.len(),
            cap: MAX_MEETING_FRIENDS,
        });
    }
    Ok(tables)
}

fn travel_minutes(tables: &MeetingTables, from: &str, to: &str) -> Option<u32> {
    let (a, b) = (fold_name(from), fold_name(to));
    if a == b {
        Some(0)
    } else {
        tables.travel.get(&(a, b)).copied()
    }
}

/// Greedily schedules the given friend order at the earliest feasible times.
fn schedule_order(tables: &MeetingTables, order: &[usize]) -> Option<Vec<MeetingEvent>> {
    let (mut here, mut now) = match &tables.arrival {
        Some((loc, t)) => (loc.clone(), t.0 as u32),
        None if order.is_empty() => (String::new(), 0),
        None => return None,
    };
    let mut events = Vec::with_capacity(order.len());
    for &i in order {
        let f = &tables.friends[i];
        let tt = travel_minutes(tables, &here, &f.location)?;
        let start = (now + tt).max(f.window_start.0 as u32);
        let end = start + f.min_minutes;
        if end > f.window_end.0 as u32 {
            return None;
        }
        events.push(MeetingEvent {
            friend: f.name.clone(),
            location: f.location.clone(),
            meet_start: TimeOfDay(start as u16),
            meet_end: TimeOfDay(end as u16),
        });
        here = f.location.clone();
        now = end;
    }
    Some(events)
}

/// Finds the best achievable friend count and a canonical witness schedule.
/// Ties at the same count break by earliest finish time, then by friend-name
/// sequence.
fn meeting_search(cs: &ConstraintSet) -> Result<Option<(usize, Plan)>, SolveError> {
    let tables = meeting_tables(cs)?;
    let n = tables.friends.len();
    for k in (0..=n).rev() {
        let mut best: Option<(u32, Vec<String>, Vec<MeetingEvent>)> = None;
        for combo in (0..n).combinations(k) {
            for order in combo.iter().copied().permutations(k) {
                let Some(events) = schedule_order(&tables, &order) else { continue };
                let finish = events.last().map_or(0, |ev| ev.meet_end.0 as u32);
                let names: Vec<String> =
                    events.iter().map(|ev| fold_name(&ev.friend)).collect();
                let better = match &best {
                    None => true,
                    Some((bf, bn, _)) => (finish, &names) < (*bf, bn),
                };
                if better {
                    best = Some((finish, names, events));
                }
            }
        }
        if let Some((_, _, events)) = best {
            return Ok(Some((k, Plan::Meeting { events })));
        }
    }
    Ok(None)
}

fn enumerate_meeting(cs: &ConstraintSet, limit: usize) -> Result<Vec<Plan>, SolveError> {
    let tables = meeting_tables(cs)?;
    let Some((k, _)) = meeting_search(cs)? else {
        return Ok(Vec::new());
    };
    if k == 0 {
        return Ok(vec![Plan::Meeting { events: vec![] }]);
    }
    let n = tables.friends.len();
    let mut plans = Vec::new();
    for combo in (0..n).combinations(k) {
        for order in combo.iter().copied().permutations(k) {
            enumerate_schedules(&tables, &order, 0, &mut Vec::new(), &mut plans, limit);
            if plans.len() == limit {
                return Ok(plans);
            }
        }
    }
    Ok(plans)
}

/// Depth-first search over meeting start times and durations for a fixed
/// friend order, in ascending time order.
fn enumerate_schedules(
    tables: &MeetingTables,
    order: &[usize],
    depth: usize,
    events: &mut Vec<MeetingEvent>,
    plans: &mut Vec<Plan>,
    limit: usize,
) {
    if plans.len() == limit {
        return;
    }
    if depth == order.len() {
        plans.push(Plan::Meeting { events: events.clone() });
        return;
    }
    let (here, now) = match events.last() {
        Some(ev) => (ev.location.clone(), ev.meet_end.0 as u32),
        None => match &tables.arrival {
            Some((loc, t)) => (loc.clone(), t.0 as u32),
            None => return,
        },
    };
    let f = &tables.friends[order[depth]];
    let Some(tt) = travel_minutes(tables, &here, &f.location) else { return };
    let lo = (now + tt).max(f.window_start.0 as u32);
    let window_end = f.window_end.0 as u32;
    if lo + f.min_minutes > window_end {
        return;
    }
    for start in lo..=(window_end - f.min_minutes) {
        for end in (start + f.min_minutes)..=window_end {
            events.push(MeetingEvent {
                friend: f.name.clone(),
                location: f.location.clone(),
                meet_start: TimeOfDay(start as u16),
                meet_end: TimeOfDay(end as u16),
            });
            enumerate_schedules(tables, order, depth + 1, events, plans, limit);
            events.pop();
            if plans.len() == limit {
                return;
            }
        }
    }
}

/// Named plan corruptions used by the noisy actor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MutationKind {
    ShiftTripSegment,
    ShrinkStay,
    SwapAdjacentCities,
    PickBusySlot,
    ShiftSlotOutsideHours,
    TruncateMeeting,
    DropEvent,
}

fn plans_equal(a: &Plan, b: &Plan) -> bool {
    match (crate::domain::canonicalize_plan(a), crate::domain::canonicalize_plan(b)) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}

/// Builds every applicable corruption of `base` that the checker would
/// reject. Each entry is distinct from the base plan and scores below 100.
pub fn mutation_catalogue(cs: &ConstraintSet, base: &Plan) -> Vec<(MutationKind, Plan)> {
    let mut candidates: Vec<(MutationKind, Plan)> = Vec::new();
    match base {
        Plan::Trip { segments } if !segments.is_empty() => {
            let mut shifted = segments.clone();
            if let Some(last) = shifted.last_mut() {
                last.end_day += 1;
            }
            candidates.push((MutationKind::ShiftTripSegment, Plan::Trip { segments: shifted }));

            if segments[0].stay_days() >= 2 {
                let mut shrunk = segments.clone();
                shrunk[0].end_day -= 1;
                for seg in shrunk.iter_mut().skip(1) {
                    seg.start_day -= 1;
                    seg.end_day -= 1;
                }
                candidates.push((MutationKind::ShrinkStay, Plan::Trip { segments: shrunk }));
            }

            if segments.len() >= 2 {
                let mut cities: Vec<String> =
                    segments.iter().map(|s| s.city.clone()).collect();
                cities.swap(0, 1);
                let mut lengths: Vec<u32> =
                    segments.iter().map(TripSegment::stay_days).collect();
                lengths.swap(0, 1);
                let mut day = segments[0].start_day;
                let mut swapped = Vec::with_capacity(segments.len());
                for (city, len) in cities.into_iter().zip(lengths) {
                    let end = day + len - 1;
                    swapped.push(TripSegment { city, start_day: day, end_day: end });
                    day = end;
                }
                candidates
                    .push((MutationKind::SwapAdjacentCities, Plan::Trip { segments: swapped }));
            }
        }
        Plan::Calendar { day, start, end } if end > start => {
            let dur = end.0 - start.0;
            let busy_start = cs.items.iter().find_map(|c| match c {
                Constraint::BusyInterval { start, .. } => Some(*start),
                _ => None,
            });
            if let Some(bs) = busy_start {
                if bs.0 + dur <= TimeOfDay::DAY_END.0 {
                    candidates.push((
                        MutationKind::PickBusySlot,
                        Plan::Calendar {
                            day: day.clone(),
                            start: bs,
                            end: TimeOfDay(bs.0 + dur),
                        },
                    ));
                }
            }
            let hours = cs.items.iter().find_map(|c| match c {
                Constraint::WorkHours { start, end } => Some((*start, *end)),
                _ => None,
            });
            if let Some((ws, we)) = hours {
                let outside = if we.0 + dur <= TimeOfDay::DAY_END.0 {
                    Some(we)
                } else if ws.0 >= dur {
                    Some(TimeOfDay(ws.0 - dur))
                } else {
                    None
                };
                if let Some(s) = outside {
                    candidates.push((
                        MutationKind::ShiftSlotOutsideHours,
                        Plan::Calendar {
                            day: day.clone(),
                            start: s,
                            end: TimeOfDay(s.0 + dur),
                        },
                    ));
                }
            }
        }
        Plan::Meeting { events } if !events.is_empty() => {
            let first = &events[0];
            if first.meet_end > first.meet_start {
                let dur = (first.meet_end.0 - first.meet_start.0) as u32;
                let mut truncated = events.clone();
                truncated[0].meet_end = TimeOfDay(first.meet_start.0 + (dur / 2).max(1) as u16);
                candidates.push((MutationKind::TruncateMeeting, Plan::Meeting { events: truncated }));
            }
            let mut dropped = events.clone();
            dropped.remove(0);
            candidates.push((MutationKind::DropEvent, Plan::Meeting { events: dropped }));
        }
        _ => {}
    }

    let mut mutants = Vec::new();
    for (kind, plan) in candidates {
        if plans_equal(&plan, base) {
            continue;
        }
        if mutants.iter().any(|(_, p)| plans_equal(p, &plan)) {
            continue;
        }
        match crate::verify::verify(cs, &plan) {
            Ok(verdict) if !verdict.accepted => mutants.push((kind, plan)),
            _ => {}
        }
    }
    mutants
}

/// One proposal from the seeded noisy actor.
///
/// With probability `error_rate` the actor corrupts the correct plan with a
/// mutation from [`mutation_catalogue`]; otherwise it proposes the correct
/// plan. It never proposes a plan canonically equal to one of the visible
/// failed attempts while an untried mutation or the correct plan remains.
pub fn noisy_actor_step(
    cs: &ConstraintSet,
    seen_attempts: &[QMemEntry],
    error_rate: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Plan, SolveError> {
    if !(0.0..=1.0).contains(&error_rate) {
        return Err(SolveError::Argument(format!(
            "error rate {error_rate} is outside [0, 1]"
        )));
    }
    let base = solve(cs)?.ok_or(SolveError::Infeasible)?;
    let u: f64 = rng.random();
    let seen: Vec<&Plan> = seen_attempts.iter().map(|e| &e.plan).collect();
    let fresh: Vec<Plan> = mutation_catalogue(cs, &base)
        .into_iter()
        .map(|(_, plan)| plan)
        .filter(|plan| !seen.iter().any(|s| plans_equal(s, plan)))
        .collect();
    let base_seen = seen.iter().any(|s| plans_equal(s, &base));
    if (u < error_rate || base_seen) && !fresh.is_empty() {
        let pick = rng.random_range(0..fresh.len());
        return Ok(fresh.into_iter().nth(pick).expect("index in range"));
    }
    Ok(base)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{ConstraintSource, QMemEntry, Violation};
    use crate::fixtures;
    use rand::SeedableRng;

    #[test]
    fn trip_solver_finds_the_expected_itinerary() {
        let plan = solve(&fixtures::trip_query_constraints()).unwrap().unwrap();
        assert_eq!(plan, fixtures::trip_golden_plan());
    }

    #[test]
    fn trip_solver_repairs_the_flawed_itinerary() {
        let plan = solve(&fixtures::trip_verify_constraints()).unwrap().unwrap();
        let Plan::Trip { segments } = &plan else { panic!("trip expected") };
        assert_eq!(
            segments
                .iter()
                .map(|s| (s.city.as_str(), s.start_day, s.end_day))
                .collect::<Vec<_>>(),
            vec![("Seville", 1, 7), ("Munich", 7, 11), ("Tallinn", 11, 12)]
        );
        assert!(crate::verify::verify(&fixtures::trip_verify_constraints(), &plan)
            .unwrap()
            .accepted);
    }

    #[test]
    fn calendar_solver_finds_the_first_open_slot() {
        let plan = solve(&fixtures::calendar_query_constraints()).unwrap().unwrap();
        assert_eq!(plan, fixtures::calendar_golden_plan());
    }

    #[test]
    fn meeting_solver_meets_stephanie() {
        let plan = solve(&fixtures::meeting_query_constraints()).unwrap().unwrap();
        assert_eq!(plan, fixtures::meeting_golden_plan());
    }

    #[test]
    fn meeting_search_maximizes_friend_count() {
        assert_eq!(max_friends_met(&fixtures::meeting_query_constraints()).unwrap(), 1);
        assert_eq!(max_friends_met(&fixtures::meeting_verify_constraints()).unwrap(), 1);
    }

    #[test]
    fn solved_plans_all_verify_at_one_hundred() {
        for cs in [
            fixtures::trip_query_constraints(),
            fixtures::trip_verify_constraints(),
            fixtures::calendar_query_constraints(),
            fixtures::calendar_verify_constraints(),
            fixtures::meeting_query_constraints(),
            fixtures::meeting_verify_constraints(),
        ] {
            let plan = solve(&cs).unwrap().unwrap();
            let verdict = crate::verify::verify(&cs, &plan).unwrap();
            assert!(verdict.accepted, "{:?}", verdict.violations);
        }
    }

    #[test]
    fn infeasible_trip_yields_none_and_empty_enumeration() {
        let mut items: Vec<crate::domain::Constraint> = fixtures::trip_query_constraints()
            .items
            .iter()
            .filter(|c| !matches!(c, Constraint::FlightEdge { .. }))
            .cloned()
            .collect();
        items.push(Constraint::FlightEdge {
            city_a: "Helsinki".into(),
            city_b: "Florence".into(),
        });
        let cs = ConstraintSet::new(
            TaskKind::TripPlanning,
            items,
            ConstraintSource::SymbolicParse,
        )
        .unwrap();
        assert!(solve(&cs).unwrap().is_none());
        assert!(enumerate_all(&cs, 5).unwrap().is_empty());
    }

    #[test]
    fn zero_limit_is_rejected() {
        let err = enumerate_all(&fixtures::trip_query_constraints(), 0).unwrap_err();
        assert!(matches!(err, SolveError::Argument(_)));
    }

    #[test]
    fn oversized_trip_is_rejected() {
        let mut items = vec![Constraint::TotalDuration { days: 40 }];
        for i in 0..11 {
            items.push(Constraint::CityStay { city: format!("City{i}"), days: 3 });
        }
        let cs = ConstraintSet::new(
            TaskKind::TripPlanning,
            items,
            ConstraintSource::SymbolicParse,
        )
        .unwrap();
        let err = solve(&cs).unwrap_err();
        assert!(matches!(err, SolveError::InstanceTooLarge { what: "cities", .. }));
    }

    #[test]
    fn enumeration_respects_the_limit() {
        let cs = ConstraintSet::new(
            TaskKind::CalendarScheduling,
            vec![
                Constraint::Participants { names: vec!["Ana".into(), "Bo".into()] },
                Constraint::MeetingDuration { minutes: 30 },
                Constraint::MeetingDay { day: "Tuesday".into() },
                Constraint::WorkHours { start: TimeOfDay::hm(9, 0), end: TimeOfDay::hm(17, 0) },
                Constraint::BusyInterval {
                    person: "Ana".into(),
                    start: TimeOfDay::hm(9, 0),
                    end: TimeOfDay::hm(12, 0),
                },
            ],
            ConstraintSource::SymbolicParse,
        )
        .unwrap();
        let all = enumerate_all(&cs, 100).unwrap();
        assert_eq!(all.len(), 10);
        let two = enumerate_all(&cs, 2).unwrap();
        assert_eq!(two.len(), 2);
        assert_eq!(&all[..2], &two[..]);
    }

    #[test]
    fn catalogue_mutants_are_fresh_and_rejected() {
        for cs in [
            fixtures::trip_query_constraints(),
            fixtures::calendar_query_constraints(),
            fixtures::meeting_query_constraints(),
        ] {
            let base = solve(&cs).unwrap().unwrap();
            let mutants = mutation_catalogue(&cs, &base);
            assert!(mutants.len() >= 2, "{:?}: {} mutants", cs.task_kind, mutants.len());
            for (kind, plan) in &mutants {
                assert!(!plans_equal(plan, &base), "{kind:?} equals the base plan");
                let verdict = crate::verify::verify(&cs, plan).unwrap();
                assert!(!verdict.accepted, "{kind:?} scored {}", verdict.score);
            }
        }
    }

    fn failed_attempt(turn: u32, plan: Plan) -> QMemEntry {
        QMemEntry {
            turn,
            plan,
            score: 10,
            violations: vec![Violation { constraint_index: None, reason: "bad".into() }],
        }
    }

    #[test]
    fn noisy_actor_is_deterministic_per_seed() {
        let cs = fixtures::trip_query_constraints();
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let pa = noisy_actor_step(&cs, &[], 0.5, &mut a).unwrap();
            let pb = noisy_actor_step(&cs, &[], 0.5, &mut b).unwrap();
            assert_eq!(pa, pb);
        }
    }

    #[test]
    fn noisy_actor_avoids_logged_attempts() {
        let cs = fixtures::calendar_query_constraints();
        let base = solve(&cs).unwrap().unwrap();
        let seen: Vec<QMemEntry> = mutation_catalogue(&cs, &base)
            .into_iter()
            .zip(1..)
            .map(|((_, plan), turn)| failed_attempt(turn, plan))
            .collect();
        assert!(!seen.is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let plan = noisy_actor_step(&cs, &seen, 1.0, &mut rng).unwrap();
            assert_eq!(plan, base, "all mutants are logged, only the base plan is fresh");
        }
    }

    #[test]
    fn noisy_actor_with_zero_error_rate_is_the_oracle() {
        let cs = fixtures::meeting_query_constraints();
        let base = solve(&cs).unwrap().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            assert_eq!(noisy_actor_step(&cs, &[], 0.0, &mut rng).unwrap(), base);
        }
    }

    #[test]
    fn noisy_actor_rejects_bad_error_rates() {
        let cs = fixtures::trip_query_constraints();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            noisy_actor_step(&cs, &[], 1.5, &mut rng),
            Err(SolveError::Argument(_))
        ));
    }

    #[test]
    fn enumerated_meeting_plans_verify_at_one_hundred() {
        let cs = fixtures::meeting_query_constraints();
        let plans = enumerate_all(&cs, 3).unwrap();
        assert!(!plans.is_empty());
        for plan in &plans {
            assert!(crate::verify::verify(&cs, plan).unwrap().accepted);
        }
    }
}
