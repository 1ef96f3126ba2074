//! Worked examples shared by unit tests, integration tests, and doc
//! examples: one query per task family with its expected constraint set,
//! plus a flawed plan per family with the feedback a reviewer would give.

use crate::domain::{
    Constraint, ConstraintSet, ConstraintSource, MeetingEvent, Plan, QueryInstance, TaskKind,
    TimeOfDay, TripSegment,
};

pub const TRIP_QUERY: &str = "\
You plan to visit 3 European cities for 14 days in total.
You only take direct flights to commute between cities.
You would like to visit Florence for 6 days.
You want to meet a friend in Florence between day 9 and day 14.
You would like to visit Barcelona for 5 days.
You would like to visit Helsinki for 5 days.
Here are the cities that have direct flights: Barcelona and Florence; Helsinki and Barcelona.
";

pub const CALENDAR_QUERY: &str = "\
You need to schedule a meeting for Michelle, Steven, and Jerry for one hour between the work hours of 9:00 to 17:00 on Monday.
Here are the existing schedules for everyone during the day:
- Michelle has meetings on Monday during 11:00–12:00;
- Steven has blocked their calendar on Monday during 9:00–9:30, 11:30–12:00, 13:30–14:00, 15:30–16:00;
- Jerry has blocked their calendar on Monday during 9:00–9:30, 10:00–11:00, 11:30–12:30, 13:00–14:30, 15:30–16:00, 16:30–17:00.
";

pub const MEETING_QUERY: &str = "\
You are visiting San Francisco for the day and want to meet as many friends as possible.
Solve the problem by considering various schedules and picking the best one to optimize your goals.
Travel distances (in minutes):
- Marina District → Mission District: 20
- Mission District → Marina District: 19
You arrive at Marina District at 9:00AM.
Stephanie will be at Mission District from 10:30AM to 1:30PM.
You'd like to meet Stephanie for a minimum of 120 minutes.
";

/// Constraint list for a twelve-day trip whose proposed itinerary shortens
/// the Munich stay; pairs with [`TRIP_SOLUTION_TEXT`].
pub const TRIP_CONSTRAINTS_TEXT: &str = "\
1. Total trip duration: 12 days
2. Visit durations per city:
   - Tallinn: 2 days (Day 11–12)
   - Seville: 7 days
   - Munich: 5 days
3. Timing constraints: meet friend in Tallinn between Day 11–12
4. Flight constraints:
   - Direct flights only
   - Direct flight connections: Seville–Munich, Munich–Tallinn
";

pub const TRIP_SOLUTION_TEXT: &str = "\
Here is the trip plan for visiting the 3 European cities for 12 days:
Day 1–7: Arrive in Seville and visit for 7 days.
Day 7: Fly from Seville to Munich.
Day 7–10: Visit Munich for 5 days.
Day 10: Fly from Munich to Tallinn.
Day 10–12: Visit Tallinn for 2 days.
";

pub const TRIP_VERIFIER_REPLY: &str = "\
Score: 90
Violated Constraints: Munich visit duration is incorrect: the plan states 5 days but the itinerary covers 4 days (Day 7–10).
";

pub const CALENDAR_CONSTRAINTS_TEXT: &str = "\
1. Meeting Participants: Arthur, Michael, and Samantha
2. Meeting Duration: 1 hour (60 minutes)
3. Meeting Day: Monday
4. Allowed Meeting Hours: Between 09:00 and 17:00
5. Blocked Schedules:
   - Arthur: 09:00–09:30, 10:30–12:00, 16:00–17:00
   - Michael: 13:00–13:30, 14:00–14:30
   - Samantha: 10:30–11:00, 12:00–15:00, 15:30–17:00
6. Meeting Preferences: None
7. Feasibility: True (explicitly stated \"there exists a solution\")
";

pub const CALENDAR_SOLUTION_TEXT: &str = "Proposed meeting time: Monday, 12:00–13:00\n";

pub const CALENDAR_VERIFIER_REPLY: &str = "\
Score: 0
Violated Constraints: Samantha is busy from 12:00 to 15:00, overlapping with the proposed meeting time of 12:00–13:00.
";

pub const MEETING_CONSTRAINTS_TEXT: &str = "\
1. Arrival Time Constraint:
   - You arrive at Chinatown at 9:00 AM
2. Travel Time Constraints:
   - Chinatown → Russian Hill: 7 minutes
   - Russian Hill → Chinatown: 9 minutes
3. Availability Constraint:
   - Ronald is at Russian Hill from 3:15 PM to 9:30 PM
4. Meeting Duration Constraint:
   - You want to meet Ronald for at least 105 minutes
5. Optimization Goal:
   - Maximize the number of friends met during the day by considering various schedules
";

pub const MEETING_SOLUTION_TEXT: &str =
    "You meet Ronald at Russian Hill from 3:15PM to 4:00PM.\n";

pub const MEETING_VERIFIER_REPLY: &str = "\
Score: 90
Violated Constraints: Meeting Duration Constraint: The meeting with Ronald only lasts 45 minutes (from 3:15 PM to 4:00 PM), which is less than the required minimum duration of 105 minutes.
";

fn set(task_kind: TaskKind, items: Vec<Constraint>) -> ConstraintSet {
    ConstraintSet::new(task_kind, items, ConstraintSource::SymbolicParse)
        .expect("fixture constraint set is valid")
}

/// The constraints stated by [`TRIP_QUERY`], in sentence order.
pub fn trip_query_constraints() -> ConstraintSet {
    set(
        TaskKind::TripPlanning,
        vec![
            Constraint::TotalDuration { days: 14 },
            Constraint::DirectFlightsOnly,
            Constraint::CityStay { city: "Florence".into(), days: 6 },
            Constraint::FixedWindow {
                city: "Florence".into(),
                start_day: 9,
                end_day: 14,
                reason: "meet a friend".into(),
            },
            Constraint::CityStay { city: "Barcelona".into(), days: 5 },
            Constraint::CityStay { city: "Helsinki".into(), days: 5 },
            Constraint::FlightEdge { city_a: "Barcelona".into(), city_b: "Florence".into() },
            Constraint::FlightEdge { city_a: "Helsinki".into(), city_b: "Barcelona".into() },
        ],
    )
}

/// The constraints stated by [`CALENDAR_QUERY`], in sentence order.
pub fn calendar_query_constraints() -> ConstraintSet {
    let busy = |person: &str, s: (u16, u16), e: (u16, u16)| Constraint::BusyInterval {
        person: person.into(),
        start: TimeOfDay::hm(s.0, s.1),
        end: TimeOfDay::hm(e.0, e.1),
    };
    set(
        TaskKind::CalendarScheduling,
        vec![
            Constraint::Participants {
                names: vec!["Michelle".into(), "Steven".into(), "Jerry".into()],
            },
            Constraint::MeetingDuration { minutes: 60 },
            Constraint::WorkHours { start: TimeOfDay::hm(9, 0), end: TimeOfDay::hm(17, 0) },
            Constraint::MeetingDay { day: "Monday".into() },
            busy("Michelle", (11, 0), (12, 0)),
            busy("Steven", (9, 0), (9, 30)),
            busy("Steven", (11, 30), (12, 0)),
            busy("Steven", (13, 30), (14, 0)),
            busy("Steven", (15, 30), (16, 0)),
            busy("Jerry", (9, 0), (9, 30)),
            busy("Jerry", (10, 0), (11, 0)),
            busy("Jerry", (11, 30), (12, 30)),
            busy("Jerry", (13, 0), (14, 30)),
            busy("Jerry", (15, 30), (16, 0)),
            busy("Jerry", (16, 30), (17, 0)),
            Constraint::Preference { text: "None".into() },
        ],
    )
}

/// The constraints stated by [`MEETING_QUERY`], in sentence order.
pub fn meeting_query_constraints() -> ConstraintSet {
    set(
        TaskKind::MeetingPlanning,
        vec![
            Constraint::OptimizationGoal,
            Constraint::TravelTime {
                from: "Marina District".into(),
                to: "Mission District".into(),
                minutes: 20,
            },
            Constraint::TravelTime {
                from: "Mission District".into(),
                to: "Marina District".into(),
                minutes: 19,
            },
            Constraint::ArrivalAt { location: "Marina District".into(), time: TimeOfDay::hm(9, 0) },
            Constraint::Availability {
                friend: "Stephanie".into(),
                location: "Mission District".into(),
                start: TimeOfDay::hm(10, 30),
                end: TimeOfDay::hm(13, 30),
            },
            Constraint::MinMeetingDuration { friend: "Stephanie".into(), minutes: 120 },
        ],
    )
}

/// The constraint set described by [`TRIP_CONSTRAINTS_TEXT`].
pub fn trip_verify_constraints() -> ConstraintSet {
    set(
        TaskKind::TripPlanning,
        vec![
            Constraint::TotalDuration { days: 12 },
            Constraint::CityStay { city: "Tallinn".into(), days: 2 },
            Constraint::CityStay { city: "Seville".into(), days: 7 },
            Constraint::CityStay { city: "Munich".into(), days: 5 },
            Constraint::FixedWindow {
                city: "Tallinn".into(),
                start_day: 11,
                end_day: 12,
                reason: "meet friend".into(),
            },
            Constraint::DirectFlightsOnly,
            Constraint::FlightEdge { city_a: "Seville".into(), city_b: "Munich".into() },
            Constraint::FlightEdge { city_a: "Munich".into(), city_b: "Tallinn".into() },
        ],
    )
}

/// The constraint set described by [`CALENDAR_CONSTRAINTS_TEXT`].
pub fn calendar_verify_constraints() -> ConstraintSet {
    let busy = |person: &str, s: (u16, u16), e: (u16, u16)| Constraint::BusyInterval {
        person: person.into(),
        start: TimeOfDay::hm(s.0, s.1),
        end: TimeOfDay::hm(e.0, e.1),
    };
    set(
        TaskKind::CalendarScheduling,
        vec![
            Constraint::Participants {
                names: vec!["Arthur".into(), "Michael".into(), "Samantha".into()],
            },
            Constraint::MeetingDuration { minutes: 60 },
            Constraint::MeetingDay { day: "Monday".into() },
            Constraint::WorkHours { start: TimeOfDay::hm(9, 0), end: TimeOfDay::hm(17, 0) },
            busy("Arthur", (9, 0), (9, 30)),
            busy("Arthur", (10, 30), (12, 0)),
            busy("Arthur", (16, 0), (17, 0)),
            busy("Michael", (13, 0), (13, 30)),
            busy("Michael", (14, 0), (14, 30)),
            busy("Samantha", (10, 30), (11, 0)),
            busy("Samantha", (12, 0), (15, 0)),
            busy("Samantha", (15, 30), (17, 0)),
            Constraint::Preference { text: "None".into() },
            Constraint::FeasibilityAsserted { flag: true },
        ],
    )
}

/// The constraint set described by [`MEETING_CONSTRAINTS_TEXT`].
pub fn meeting_verify_constraints() -> ConstraintSet {
    set(
        TaskKind::MeetingPlanning,
        vec![
            Constraint::ArrivalAt { location: "Chinatown".into(), time: TimeOfDay::hm(9, 0) },
            Constraint::TravelTime {
                from: "Chinatown".into(),
                to: "Russian Hill".into(),
                minutes: 7,
            },
            Constraint::TravelTime {
                from: "Russian Hill".into(),
                to: "Chinatown".into(),
                minutes: 9,
            },
            Constraint::Availability {
                friend: "Ronald".into(),
                location: "Russian Hill".into(),
                start: TimeOfDay::hm(15, 15),
                end: TimeOfDay::hm(21, 30),
            },
            Constraint::MinMeetingDuration { friend: "Ronald".into(), minutes: 105 },
            Constraint::OptimizationGoal,
        ],
    )
}

/// The unique plan satisfying [`trip_query_constraints`].
pub fn trip_golden_plan() -> Plan {
    Plan::Trip {
        segments: vec![
            TripSegment { city: "Helsinki".into(), start_day: 1, end_day: 5 },
            TripSegment { city: "Barcelona".into(), start_day: 5, end_day: 9 },
            TripSegment { city: "Florence".into(), start_day: 9, end_day: 14 },
        ],
    }
}

/// The itinerary written out in [`TRIP_SOLUTION_TEXT`]; its Munich and
/// Tallinn stays disagree with [`trip_verify_constraints`].
pub fn trip_flawed_plan() -> Plan {
    Plan::Trip {
        segments: vec![
            TripSegment { city: "Seville".into(), start_day: 1, end_day: 7 },
            TripSegment { city: "Munich".into(), start_day: 7, end_day: 10 },
            TripSegment { city: "Tallinn".into(), start_day: 10, end_day: 12 },
        ],
    }
}

/// The earliest slot satisfying [`calendar_query_constraints`].
pub fn calendar_golden_plan() -> Plan {
    Plan::Calendar {
        day: "Monday".into(),
        start: TimeOfDay::hm(14, 30),
        end: TimeOfDay::hm(15, 30),
    }
}

/// The slot proposed in [`CALENDAR_SOLUTION_TEXT`]; it overlaps one of the
/// blocked intervals in [`calendar_verify_constraints`].
pub fn calendar_flawed_plan() -> Plan {
    Plan::Calendar {
        day: "Monday".into(),
        start: TimeOfDay::hm(12, 0),
        end: TimeOfDay::hm(13, 0),
    }
}

/// The best schedule for [`meeting_query_constraints`].
pub fn meeting_golden_plan() -> Plan {
    Plan::Meeting {
        events: vec![MeetingEvent {
            friend: "Stephanie".into(),
            location: "Mission District".into(),
            meet_start: TimeOfDay::hm(10, 30),
            meet_end: TimeOfDay::hm(12, 30),
        }],
    }
}

/// The schedule written out in [`MEETING_SOLUTION_TEXT`]; it cuts the Ronald
/// meeting short of the minimum required by [`meeting_verify_constraints`].
pub fn meeting_flawed_plan() -> Plan {
    Plan::Meeting {
        events: vec![MeetingEvent {
            friend: "Ronald".into(),
            location: "Russian Hill".into(),
            meet_start: TimeOfDay::hm(15, 15),
            meet_end: TimeOfDay::hm(16, 0),
        }],
    }
}

/// The worked trip query packaged as a benchmark instance.
pub fn trip_instance() -> QueryInstance {
    QueryInstance {
        id: "trip-fixture".to_string(),
        task_kind: TaskKind::TripPlanning,
        query_text: TRIP_QUERY.to_string(),
        golden_plan: Some(trip_golden_plan()),
        few_shot: None,
    }
}

/// The worked calendar query packaged as a benchmark instance.
pub fn calendar_instance() -> QueryInstance {
    QueryInstance {
        id: "calendar-fixture".to_string(),
        task_kind: TaskKind::CalendarScheduling,
        query_text: CALENDAR_QUERY.to_string(),
        golden_plan: Some(calendar_golden_plan()),
        few_shot: None,
    }
}

/// The worked meeting query packaged as a benchmark instance.
pub fn meeting_instance() -> QueryInstance {
    QueryInstance {
        id: "meeting-fixture".to_string(),
        task_kind: TaskKind::MeetingPlanning,
        query_text: MEETING_QUERY.to_string(),
        golden_plan: Some(meeting_golden_plan()),
        few_shot: None,
    }
}

/// Compares two constraint sets as multisets of items, ignoring order and
/// source.
pub fn same_items_any_order(a: &ConstraintSet, b: &ConstraintSet) -> bool {
    if a.task_kind != b.task_kind || a.items.len() != b.items.len() {
        return false;
    }
    let key = |cs: &ConstraintSet| {
        let mut keys: Vec<String> = cs
            .items
            .iter()
            .map(|c| serde_json::to_string(c).expect("constraints serialize"))
            .collect();
        keys.sort();
        keys
    };
    key(a) == key(b)
}
