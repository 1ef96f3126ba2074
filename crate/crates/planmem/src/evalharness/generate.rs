//! Seeded instance generation, plan-first: pick a valid plan, then emit
//! constraints that the plan satisfies, render the query text, and keep the
//! solved plan as the golden answer.
//!
//! In unique mode the constraints are tightened until exactly one valid
//! plan remains (under the solver's conventions), which makes exact-match
//! scoring meaningful for any correct solver.

use crate::domain::{
    Constraint, ConstraintSet, ConstraintSource, DomainError, QueryInstance, TaskKind, TimeOfDay,
};
use crate::queryparse;
use crate::solve::{self, SolveError};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub const CITY_POOL: [&str; 12] = [
    "Paris", "Rome", "Vienna", "Prague", "Lisbon", "Madrid", "Berlin", "Athens", "Dublin",
    "Budapest", "Amsterdam", "Stockholm",
];

pub const NAME_POOL: [&str; 12] = [
    "Arthur", "Beth", "Carlos", "Diane", "Ethan", "Fiona", "Gregory", "Hanna", "Ivan", "Julia",
    "Kevin", "Laura",
];

pub const LOCATION_POOL: [&str; 10] = [
    "Marina District",
    "Mission District",
    "Russian Hill",
    "Chinatown",
    "Alamo Square",
    "North Beach",
    "Sunset District",
    "Nob Hill",
    "Presidio",
    "Pacific Heights",
];

/// Phrases used for trip fixed-date events. They must not contain " in "
/// because the query grammar splits the event sentence on that word.
pub const EVENT_REASONS: [&str; 5] = [
    "meet a friend",
    "attend a wedding",
    "attend a workshop",
    "visit relatives",
    "attend an annual show",
];

const WEEKDAYS: [&str; 5] = ["Monday", "Tuesday", "Wednesday", "Thursday", "Friday"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Difficulty {
    /// Cities, participants, or friends depending on the family.
    pub size: usize,
    /// Trip length in days; the other families ignore it.
    pub horizon: u32,
    /// Tighten constraints until exactly one valid plan remains.
    pub unique: bool,
}

impl Default for Difficulty {
    fn default() -> Difficulty {
        Difficulty { size: 3, horizon: 10, unique: false }
    }
}

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("generation failed for {kind} with seed {seed}: {reason}")]
    Exhausted { kind: TaskKind, seed: u64, reason: String },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

const MAX_ATTEMPTS: u64 = 50;

/// Deterministically generates one instance. The same `(kind, difficulty,
/// seed)` triple always yields the same instance.
pub fn generate_instance(
    kind: TaskKind,
    difficulty: Difficulty,
    seed: u64,
) -> Result<QueryInstance, GenerateError> {
    let mut last_reason = "no attempts made".to_string();
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(
            seed.wrapping_add(attempt.wrapping_mul(0x9E37_79B9_7F4A_7C15)),
        );
        let cs = match build_constraints(kind, difficulty, &mut rng) {
            Ok(cs) => cs,
            Err(reason) => {
                last_reason = reason;
                continue;
            }
        };
        if difficulty.unique {
            match solve::enumerate_all(&cs, 2)?.len() {
                1 => {}
                n => {
                    last_reason = format!("{n} valid plans after tightening");
                    continue;
                }
            }
        }
        let Some(golden) = solve::solve(&cs)? else {
            last_reason = "constructed instance is unsatisfiable".to_string();
            continue;
        };
        let query_text = queryparse::render_query(&cs);
        let (reparsed, _) = match queryparse::parse_query(kind, &query_text) {
            Ok(parsed) => parsed,
            Err(err) => {
                last_reason = format!("rendered query failed to parse: {err}");
                continue;
            }
        };
        if !crate::fixtures::same_items_any_order(&reparsed, &cs) {
            last_reason = "rendered query did not round-trip".to_string();
            continue;
        }
        let id = format!(
            "{}-{}-{}x{}{}",
            kind.as_str(),
            seed,
            difficulty.size,
            difficulty.horizon,
            if difficulty.unique { "-u" } else { "" }
        );
        return Ok(QueryInstance {
            id,
            task_kind: kind,
            query_text,
            golden_plan: Some(golden),
            few_shot: None,
        });
    }
    Err(GenerateError::Exhausted { kind, seed, reason: last_reason })
}

/// Generates `count` instances with consecutive seeds.
pub fn generate_dataset(
    kind: TaskKind,
    difficulty: Difficulty,
    count: usize,
    seed: u64,
) -> Result<Vec<QueryInstance>, GenerateError> {
    (0..count)
        .map(|i| generate_instance(kind, difficulty, seed.wrapping_add(i as u64)))
        .collect()
}

fn build_constraints(
    kind: TaskKind,
    difficulty: Difficulty,
    rng: &mut ChaCha8Rng,
) -> Result<ConstraintSet, String> {
    match kind {
        TaskKind::TripPlanning => build_trip(difficulty, rng),
        TaskKind::CalendarScheduling => build_calendar(difficulty, rng),
        TaskKind::MeetingPlanning => build_meeting(difficulty, rng),
    }
}

fn build_trip(difficulty: Difficulty, rng: &mut ChaCha8Rng) -> Result<ConstraintSet, String> {
    let n = difficulty.size.clamp(2, solve::MAX_TRIP_CITIES.min(8));
    let min_total = n as u32 + 1;
    let total = difficulty.horizon.max(min_total);
    let mut cities: Vec<&str> = CITY_POOL.to_vec();
    cities.shuffle(rng);
    cities.truncate(n);

    let mut stays = vec![2u32; n];
    let mut extra = total + n as u32 - 1 - 2 * n as u32;
    while extra > 0 {
        stays[rng.random_range(0..n)] += 1;
        extra -= 1;
    }
    let mut segments = Vec::with_capacity(n);
    let mut day = 1u32;
    for i in 0..n {
        let end = day + stays[i] - 1;
        segments.push((cities[i], day, end));
        day = end;
    }

    let mut edges: Vec<(String, String)> = segments
        .windows(2)
        .map(|pair| (pair[0].0.to_string(), pair[1].0.to_string()))
        .collect();
    if !difficulty.unique && n >= 3 {
        edges.push((cities[0].to_string(), cities[2].to_string()));
    }

    let assemble = |windows: &[Constraint]| -> Result<ConstraintSet, String> {
        let mut items = vec![Constraint::TotalDuration { days: total }, Constraint::DirectFlightsOnly];
        for i in 0..n {
            items.push(Constraint::CityStay { city: cities[i].to_string(), days: stays[i] });
        }
        items.extend_from_slice(windows);
        for (a, b) in &edges {
            items.push(Constraint::FlightEdge { city_a: a.clone(), city_b: b.clone() });
        }
        ConstraintSet::new(TaskKind::TripPlanning, items, ConstraintSource::SymbolicParse)
            .map_err(|e| e.to_string())
    };

    if !difficulty.unique {
        return assemble(&[]);
    }
    let mut windows: Vec<Constraint> = Vec::new();
    loop {
        let cs = assemble(&windows)?;
        match solve::enumerate_all(&cs, 2).map_err(|e| e.to_string())?.len() {
            1 => return Ok(cs),
            _ if windows.len() == n => {
                return Err("trip stayed ambiguous with every window pinned".to_string())
            }
            _ => {
                let (city, start, end) = segments[windows.len()];
                let reason = EVENT_REASONS[rng.random_range(0..EVENT_REASONS.len())];
                windows.push(Constraint::FixedWindow {
                    city: city.to_string(),
                    start_day: start,
                    end_day: end,
                    reason: reason.to_string(),
                });
            }
        }
    }
}

fn build_calendar(difficulty: Difficulty, rng: &mut ChaCha8Rng) -> Result<ConstraintSet, String> {
    let n = difficulty.size.clamp(2, 6);
    let mut names: Vec<&str> = NAME_POOL.to_vec();
    names.shuffle(rng);
    names.truncate(n);
    let duration: u32 = if rng.random::<f64>() < 0.5 { 30 } else { 60 };
    let dur = duration as u16;
    let day = WEEKDAYS[rng.random_range(0..WEEKDAYS.len())];
    let (ws, we) = (TimeOfDay::hm(9, 0), TimeOfDay::hm(17, 0));

    let slots: Vec<u16> = (ws.0..we.0).step_by(30).filter(|s| s + dur <= we.0).collect();
    let chosen = slots[rng.random_range(0..slots.len())];

    let mut busy: Vec<(String, u16, u16)> = Vec::new();
    if difficulty.unique {
        for (i, &slot) in slots.iter().enumerate() {
            if slot == chosen {
                continue;
            }
            let cell = if slot < chosen { slot } else { slot + dur - 30 };
            busy.push((names[i % n].to_string(), cell, cell + 30));
        }
    } else {
        for name in &names {
            for _ in 0..rng.random_range(0..=2u32) {
                let start = slots[rng.random_range(0..slots.len())];
                let len = 30u16 * rng.random_range(1..=2u16);
                if start + len > we.0 {
                    continue;
                }
                if start < chosen + dur && chosen < start + len {
                    continue;
                }
                busy.push((name.to_string(), start, start + len));
            }
        }
    }

    let mut items = vec![
        Constraint::Participants { names: names.iter().map(|n| n.to_string()).collect() },
        Constraint::MeetingDuration { minutes: duration },
        Constraint::WorkHours { start: ws, end: we },
        Constraint::MeetingDay { day: day.to_string() },
    ];
    for (person, start, end) in busy {
        items.push(Constraint::BusyInterval {
            person,
            start: TimeOfDay(start),
            end: TimeOfDay(end),
        });
    }
    items.push(Constraint::Preference { text: "None".to_string() });
    ConstraintSet::new(TaskKind::CalendarScheduling, items, ConstraintSource::SymbolicParse)
        .map_err(|e| e.to_string())
}

fn build_meeting(difficulty: Difficulty, rng: &mut ChaCha8Rng) -> Result<ConstraintSet, String> {
    let n = difficulty.size.clamp(1, 5);
    let mut locations: Vec<&str> = LOCATION_POOL.to_vec();
    locations.shuffle(rng);
    locations.truncate(n + 1);
    let mut names: Vec<&str> = NAME_POOL.to_vec();
    names.shuffle(rng);
    names.truncate(n);

    let mut travel = Vec::new();
    for i in 0..locations.len() {
        for j in 0..locations.len() {
            if i != j {
                travel.push((locations[i], locations[j], rng.random_range(5..=25u32)));
            }
        }
    }
    let minutes = |from: &str, to: &str| {
        travel
            .iter()
            .find(|(a, b, _)| *a == from && *b == to)
            .map(|(_, _, m)| *m)
            .expect("travel matrix is complete")
    };

    let arrival = TimeOfDay::hm(9, 0);
    let mut current_loc = locations[0];
    let mut now = arrival.0 as u32;
    let mut friend_items: Vec<Constraint> = Vec::new();
    for i in 0..n {
        let here = locations[i + 1];
        let wait = if difficulty.unique { 0 } else { 15 * rng.random_range(0..=2u32) };
        let start = now + minutes(current_loc, here) + wait;
        let duration = 15 * rng.random_range(2..=6u32);
        let end = start + duration;
        if end > TimeOfDay::hm(21, 0).0 as u32 {
            return Err("schedule ran past the evening".to_string());
        }
        let (window_start, window_end) = if difficulty.unique {
            (start, end)
        } else {
            let pre = 15 * rng.random_range(0..=2u32);
            let post = 15 * rng.random_range(0..=2u32);
            (start.saturating_sub(pre), end + post)
        };
        friend_items.push(Constraint::Availability {
            friend: names[i].to_string(),
            location: here.to_string(),
            start: TimeOfDay(window_start as u16),
            end: TimeOfDay(window_end as u16),
        });
        friend_items.push(Constraint::MinMeetingDuration {
            friend: names[i].to_string(),
            minutes: duration,
        });
        current_loc = here;
        now = end;
    }

    let mut items = vec![Constraint::OptimizationGoal];
    for (from, to, m) in &travel {
        items.push(Constraint::TravelTime {
            from: from.to_string(),
            to: to.to_string(),
            minutes: *m,
        });
    }
    items.push(Constraint::ArrivalAt { location: locations[0].to_string(), time: arrival });
    items.extend(friend_items);
    ConstraintSet::new(TaskKind::MeetingPlanning, items, ConstraintSource::SymbolicParse)
        .map_err(|e| e.to_string())
}

/// Derives an unsatisfiable variant of a satisfiable instance: trips get an
/// extra day that no ordering can cover, calendars get a busy block across
/// the whole work window. Meeting instances have no unsatisfiable variant
/// because the empty schedule is always valid, so this returns `None`.
pub fn make_infeasible(cs: &ConstraintSet) -> Result<Option<ConstraintSet>, DomainError> {
    match cs.task_kind {
        TaskKind::TripPlanning => {
            let items = cs
                .items
                .iter()
                .map(|c| match c {
                    Constraint::TotalDuration { days } => {
                        Constraint::TotalDuration { days: days + 1 }
                    }
                    other => other.clone(),
                })
                .collect();
            Ok(Some(ConstraintSet::new(cs.task_kind, items, cs.source)?))
        }
        TaskKind::CalendarScheduling => {
            let (ws, we) = cs
                .items
                .iter()
                .find_map(|c| match c {
                    Constraint::WorkHours { start, end } => Some((*start, *end)),
                    _ => None,
                })
                .unwrap_or((TimeOfDay(0), TimeOfDay::DAY_END));
            let person = cs
                .items
                .iter()
                .find_map(|c| match c {
                    Constraint::Participants { names } => names.first().cloned(),
                    _ => None,
                })
                .unwrap_or_else(|| "Blocker".to_string());
            let mut items = cs.items.clone();
            items.push(Constraint::BusyInterval { person, start: ws, end: we });
            Ok(Some(ConstraintSet::new(cs.task_kind, items, cs.source)?))
        }
        TaskKind::MeetingPlanning => Ok(None),
    }
}
