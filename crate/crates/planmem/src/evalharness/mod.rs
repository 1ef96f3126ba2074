//! Batch evaluation: run many sessions over a dataset, in parallel and
//! deterministically, then aggregate exact-match and solve-rate reports and
//! turn-budget coverage tables.

pub mod dataset;
pub mod generate;

use crate::domain::{
    Mode, QueryInstance, SessionConfig, SessionTrace, TaskKind,
};
use crate::orchestrate::{self, AgentBundle, OrchestrateError};
use dataset::DatasetError;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("invalid evaluation config: {0}")]
    Config(String),
    #[error(transparent)]
    Orchestrate(#[from] OrchestrateError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// Controls whether exact-match is scored against golden plans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmPolicy {
    /// Score when every instance has a golden plan, skip when none do,
    /// reject mixed datasets.
    #[default]
    Auto,
    /// Every instance must carry a golden plan.
    Require,
    /// Never score exact-match.
    Skip,
}

#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub session: SessionConfig,
    /// Independent repetitions over the whole dataset, reseeded per run.
    pub runs: u32,
    /// Rayon worker override; `None` uses the global pool.
    pub workers: Option<usize>,
    pub em_policy: EmPolicy,
}

impl Default for EvalConfig {
    fn default() -> EvalConfig {
        EvalConfig {
            session: SessionConfig::default(),
            runs: 1,
            workers: None,
            em_policy: EmPolicy::Auto,
        }
    }
}

/// Derives the per-session seed from the master seed, the run index, and the
/// instance id, so any (run, instance) pair can be replayed in isolation.
pub fn instance_seed(master_seed: u64, run: u32, instance_id: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master_seed.to_le_bytes());
    hasher.update(run.to_le_bytes());
    hasher.update(instance_id.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is long enough"))
}

/// Aggregate metrics for one task family. Percentages are on a 0 to 100
/// scale; `em_mean` and `em_std` are the mean and population standard
/// deviation of the per-run exact-match rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskReport {
    pub task_kind: TaskKind,
    pub instances: usize,
    pub runs: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub em_mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub em_std: Option<f64>,
    pub solve_rate: f64,
    /// Accepted sessions keyed by the turn the plan was accepted on.
    pub turn_histogram: BTreeMap<u32, u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub seed: u64,
    pub mode: Mode,
    pub tasks: Vec<TaskReport>,
}

#[derive(Debug, Clone)]
pub struct EvalOutcome {
    pub report: Report,
    /// One trace per (run, instance) job, in job order: all instances of run
    /// 0 in dataset order, then run 1, and so on.
    pub traces: Vec<SessionTrace>,
}

/// Runs every instance `config.runs` times and aggregates per-task metrics.
///
/// `make_bundle` builds a fresh agent bundle per job; bundles hold mutable
/// actor state, so they cannot be shared across parallel sessions.
pub fn evaluate(
    instances: &[QueryInstance],
    config: &EvalConfig,
    make_bundle: &(dyn Fn() -> Result<AgentBundle, OrchestrateError> + Sync),
) -> Result<EvalOutcome, EvalError> {
    if instances.is_empty() {
        return Err(EvalError::Config("the dataset is empty".to_string()));
    }
    if config.runs == 0 {
        return Err(EvalError::Config("runs must be at least 1".to_string()));
    }
    config.session.validate().map_err(|e| EvalError::Config(e.to_string()))?;
    let mut seen_ids = HashSet::new();
    for instance in instances {
        if !seen_ids.insert(instance.id.as_str()) {
            return Err(EvalError::Config(format!("duplicate instance id {:?}", instance.id)));
        }
    }

    let with_golden = instances.iter().filter(|i| i.golden_plan.is_some()).count();
    let score_em = match config.em_policy {
        EmPolicy::Skip => false,
        EmPolicy::Require => {
            if with_golden < instances.len() {
                return Err(EvalError::Config(format!(
                    "exact-match requires golden plans, but {} of {} instances have none",
                    instances.len() - with_golden,
                    instances.len()
                )));
            }
            true
        }
        EmPolicy::Auto => {
            if with_golden == 0 {
                false
            } else if with_golden == instances.len() {
                true
            } else {
                return Err(EvalError::Config(
                    "dataset mixes instances with and without golden plans; \
                     set the exact-match policy to require or skip"
                        .to_string(),
                ));
            }
        }
    };

    let jobs: Vec<(usize, u32, &QueryInstance)> = (0..config.runs)
        .flat_map(|run| instances.iter().map(move |instance| (run, instance)))
        .enumerate()
        .map(|(index, (run, instance))| (index, run, instance))
        .collect();

    let run_all = || -> Result<Vec<(usize, u32, SessionTrace)>, EvalError> {
        jobs.par_iter()
            .map(|&(index, run, instance)| {
                let mut bundle = make_bundle()?;
                let mut session = config.session.clone();
                session.seed = instance_seed(config.session.seed, run, &instance.id);
                let trace = orchestrate::run_session(&mut bundle, instance, &session)?;
                Ok((index, run, trace))
            })
            .collect()
    };
    let mut rows = match config.workers {
        Some(workers) => rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| EvalError::Config(e.to_string()))?
            .install(run_all),
        None => run_all(),
    }?;
    rows.sort_by_key(|&(index, _, _)| index);

    let mut tasks = Vec::new();
    for kind in TaskKind::ALL {
        let task_instances: Vec<&QueryInstance> =
            instances.iter().filter(|i| i.task_kind == kind).collect();
        if task_instances.is_empty() {
            continue;
        }
        let ids: HashSet<&str> = task_instances.iter().map(|i| i.id.as_str()).collect();
        let task_rows: Vec<&(usize, u32, SessionTrace)> =
            rows.iter().filter(|(_, _, t)| ids.contains(t.instance_id.as_str())).collect();
        let accepted = task_rows.iter().filter(|(_, _, t)| t.accepted).count();
        let solve_rate = 100.0 * accepted as f64 / task_rows.len() as f64;
        let mut turn_histogram = BTreeMap::new();
        for (_, _, trace) in &task_rows {
            if trace.accepted {
                *turn_histogram.entry(trace.turns_used).or_insert(0u64) += 1;
            }
        }
        let (em_mean, em_std) = if score_em {
            let per_run: Vec<f64> = (0..config.runs)
                .map(|run| {
                    let hits = task_rows
                        .iter()
                        .filter(|(_, r, t)| *r == run && t.exact_match == Some(true))
                        .count();
                    100.0 * hits as f64 / task_instances.len() as f64
                })
                .collect();
            let mean = per_run.iter().sum::<f64>() / per_run.len() as f64;
            let variance =
                per_run.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / per_run.len() as f64;
            (Some(mean), Some(variance.sqrt()))
        } else {
            (None, None)
        };
        tasks.push(TaskReport {
            task_kind: kind,
            instances: task_instances.len(),
            runs: config.runs,
            em_mean,
            em_std,
            solve_rate,
            turn_histogram,
        });
    }

    let report = Report { seed: config.session.seed, mode: config.session.mode, tasks };
    let traces = rows.into_iter().map(|(_, _, trace)| trace).collect();
    Ok(EvalOutcome { report, traces })
}

pub fn render_report_csv(report: &Report) -> String {
    let mut out =
        String::from("task,instances,runs,mode,seed,em_mean,em_std,solve_rate,turn_histogram\n");
    for task in &report.tasks {
        let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.2}"));
        let histogram = if task.turn_histogram.is_empty() {
            "-".to_string()
        } else {
            task.turn_histogram
                .iter()
                .map(|(turn, count)| format!("{turn}:{count}"))
                .collect::<Vec<_>>()
                .join(";")
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{:.2},{}",
            task.task_kind.as_str(),
            task.instances,
            task.runs,
            report.mode.as_str(),
            report.seed,
            opt(task.em_mean),
            opt(task.em_std),
            task.solve_rate,
            histogram,
        )
        .expect("writing to a string cannot fail");
    }
    out
}

/// One row of a turn-budget coverage table: of all sessions, how many ended
/// within `cap` turns and how many of those ended accepted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub cap: u32,
    pub queries_finished: u64,
    pub pct_of_dataset: f64,
    pub successes: u64,
    pub pct_of_all_successes: f64,
    /// Successes gained over the previous row; `None` on the first row.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_successes: Option<i64>,
    pub successes_remaining: i64,
}

/// Rounds `count / total` to a percentage with two decimals, half away from
/// zero, using integer arithmetic so ties like 1146/1600 round predictably.
fn pct(count: u64, total: u64) -> f64 {
    if total == 0 {
        return 0.0;
    }
    ((count * 10_000 + total / 2) / total) as f64 / 100.0
}

/// Builds a coverage table from precomputed `(cap, finished, successes)`
/// counts against dataset-wide totals.
pub fn coverage_from_counts(
    total_queries: u64,
    total_successes: u64,
    counts: &[(u32, u64, u64)],
) -> Result<Vec<CoverageRow>, EvalError> {
    if counts.is_empty() {
        return Err(EvalError::Config("coverage needs at least one turn cap".to_string()));
    }
    if total_successes > total_queries {
        return Err(EvalError::Config(format!(
            "{total_successes} successes exceed {total_queries} queries"
        )));
    }
    let mut rows = Vec::with_capacity(counts.len());
    let mut previous: Option<(u32, u64, u64)> = None;
    for &(cap, finished, successes) in counts {
        if successes > finished {
            return Err(EvalError::Config(format!(
                "cap {cap}: {successes} successes exceed {finished} finished queries"
            )));
        }
        if finished > total_queries || successes > total_successes {
            return Err(EvalError::Config(format!("cap {cap}: counts exceed the totals")));
        }
        if let Some((prev_cap, prev_finished, prev_successes)) = previous {
            if cap <= prev_cap {
                return Err(EvalError::Config(format!(
                    "turn caps must be strictly increasing: {prev_cap} then {cap}"
                )));
            }
            if finished < prev_finished || successes < prev_successes {
                return Err(EvalError::Config(format!(
                    "coverage counts must be non-decreasing at cap {cap}"
                )));
            }
        }
        rows.push(CoverageRow {
            cap,
            queries_finished: finished,
            pct_of_dataset: pct(finished, total_queries),
            successes,
            pct_of_all_successes: pct(successes, total_successes),
            delta_successes: previous.map(|(_, _, prev)| successes as i64 - prev as i64),
            successes_remaining: total_successes as i64 - successes as i64,
        });
        previous = Some((cap, finished, successes));
    }
    Ok(rows)
}

/// Builds a coverage table directly from session traces. A session counts as
/// finished within a cap when it used that many turns or fewer, accepted or
/// not; it counts as a success when it was also accepted.
pub fn coverage_table(
    traces: &[SessionTrace],
    caps: &[u32],
) -> Result<Vec<CoverageRow>, EvalError> {
    if traces.is_empty() {
        return Err(EvalError::Config("coverage needs at least one trace".to_string()));
    }
    let total = traces.len() as u64;
    let total_successes = traces.iter().filter(|t| t.accepted).count() as u64;
    let counts: Vec<(u32, u64, u64)> = caps
        .iter()
        .map(|&cap| {
            let finished = traces.iter().filter(|t| t.turns_used <= cap).count() as u64;
            let successes =
                traces.iter().filter(|t| t.accepted && t.turns_used <= cap).count() as u64;
            (cap, finished, successes)
        })
        .collect();
    coverage_from_counts(total, total_successes, &counts)
}

pub fn render_coverage_csv(rows: &[CoverageRow]) -> String {
    let mut out = String::from(
        "cap,queries_finished,pct_of_dataset,successes,pct_of_all_successes,\
         delta_successes,successes_remaining\n",
    );
    for row in rows {
        let delta = row.delta_successes.map_or_else(|| "-".to_string(), |d| d.to_string());
        writeln!(
            out,
            "{},{},{:.2},{},{:.2},{},{}",
            row.cap,
            row.queries_finished,
            row.pct_of_dataset,
            row.successes,
            row.pct_of_all_successes,
            delta,
            row.successes_remaining,
        )
        .expect("writing to a string cannot fail");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{ActorKind, Mode};
    use crate::fixtures;

    fn fixture_instances() -> Vec<QueryInstance> {
        vec![
            fixtures::trip_instance(),
            fixtures::calendar_instance(),
            fixtures::meeting_instance(),
        ]
    }

    fn oracle_config(runs: u32) -> EvalConfig {
        let mut config = EvalConfig { runs, ..EvalConfig::default() };
        config.session.seed = 9;
        config
    }

    #[test]
    fn instance_seed_separates_master_run_and_instance() {
        assert_eq!(instance_seed(1, 0, "a"), instance_seed(1, 0, "a"));
        assert_ne!(instance_seed(1, 0, "a"), instance_seed(2, 0, "a"));
        assert_ne!(instance_seed(1, 0, "a"), instance_seed(1, 1, "a"));
        assert_ne!(instance_seed(1, 0, "a"), instance_seed(1, 0, "b"));
    }

    #[test]
    fn oracle_evaluation_is_perfect() {
        let instances = fixture_instances();
        let config = oracle_config(2);
        let outcome =
            evaluate(&instances, &config, &|| AgentBundle::symbolic(&config.session)).unwrap();
        assert_eq!(outcome.traces.len(), 6);
        assert_eq!(outcome.report.tasks.len(), 3);
        for task in &outcome.report.tasks {
            assert_eq!(task.em_mean, Some(100.0));
            assert_eq!(task.em_std, Some(0.0));
            assert_eq!(task.solve_rate, 100.0);
            assert_eq!(task.turn_histogram.get(&1), Some(&2));
        }
        assert_eq!(outcome.report.seed, 9);
        let csv = render_report_csv(&outcome.report);
        assert!(csv.starts_with("task,instances,runs,mode,seed,"));
        assert!(csv.contains("trip,1,2,full,9,100.00,0.00,100.00,1:2"));
    }

    #[test]
    fn evaluation_is_deterministic_and_worker_independent() {
        let instances = fixture_instances();
        let base = oracle_config(2);
        let serial = EvalConfig { workers: Some(1), ..base.clone() };
        let wide = EvalConfig { workers: Some(4), ..base.clone() };
        let a = evaluate(&instances, &base, &|| AgentBundle::symbolic(&base.session)).unwrap();
        let b = evaluate(&instances, &serial, &|| AgentBundle::symbolic(&serial.session)).unwrap();
        let c = evaluate(&instances, &wide, &|| AgentBundle::symbolic(&wide.session)).unwrap();
        let dump = |o: &EvalOutcome| serde_json::to_string(&o.traces).unwrap();
        assert_eq!(dump(&a), dump(&b));
        assert_eq!(dump(&a), dump(&c));
        assert_eq!(render_report_csv(&a.report), render_report_csv(&c.report));
    }

    #[test]
    fn em_policy_gates_scoring() {
        let mut instances = fixture_instances();
        let config = oracle_config(1);
        let bundle = || AgentBundle::symbolic(&config.session);

        instances[1].golden_plan = None;
        let err = evaluate(&instances, &config, &bundle).unwrap_err();
        assert!(matches!(err, EvalError::Config(_)), "{err}");

        let skip = EvalConfig { em_policy: EmPolicy::Skip, ..config.clone() };
        let outcome = evaluate(&instances, &skip, &bundle).unwrap();
        assert!(outcome.report.tasks.iter().all(|t| t.em_mean.is_none() && t.em_std.is_none()));

        let require = EvalConfig { em_policy: EmPolicy::Require, ..config.clone() };
        let err = evaluate(&instances, &require, &bundle).unwrap_err();
        assert!(err.to_string().contains("golden"), "{err}");

        for instance in &mut instances {
            instance.golden_plan = None;
        }
        let outcome = evaluate(&instances, &config, &bundle).unwrap();
        assert!(outcome.report.tasks.iter().all(|t| t.em_mean.is_none()));
        assert!(outcome.report.tasks.iter().all(|t| t.solve_rate == 100.0));
    }

    #[test]
    fn duplicate_ids_and_empty_datasets_are_rejected() {
        let config = oracle_config(1);
        let bundle = || AgentBundle::symbolic(&config.session);
        let err = evaluate(&[], &config, &bundle).unwrap_err();
        assert!(err.to_string().contains("empty"), "{err}");

        let twice = vec![fixtures::trip_instance(), fixtures::trip_instance()];
        let err = evaluate(&twice, &config, &bundle).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");

        let zero_runs = EvalConfig { runs: 0, ..config.clone() };
        let err = evaluate(&fixture_instances(), &zero_runs, &bundle).unwrap_err();
        assert!(err.to_string().contains("runs"), "{err}");
    }

    #[test]
    fn bundle_factory_errors_propagate() {
        let mut config = oracle_config(1);
        config.session.actor_kind = ActorKind::Llm;
        let err = evaluate(&fixture_instances(), &config, &|| {
            AgentBundle::symbolic(&config.session)
        })
        .unwrap_err();
        assert!(matches!(err, EvalError::Orchestrate(_)), "{err}");
    }

    #[test]
    fn failing_actor_zeroes_the_report() {
        let instances = fixture_instances();
        let mut config = oracle_config(2);
        config.session.actor_kind = ActorKind::AlwaysFail;
        let outcome =
            evaluate(&instances, &config, &|| AgentBundle::symbolic(&config.session)).unwrap();
        for task in &outcome.report.tasks {
            assert_eq!(task.em_mean, Some(0.0));
            assert_eq!(task.solve_rate, 0.0);
            assert!(task.turn_histogram.is_empty());
        }
        assert!(outcome.traces.iter().all(|t| !t.accepted && t.turns_used == 5));
    }

    #[test]
    fn coverage_percentages_round_half_up_on_ties() {
        let rows = coverage_from_counts(
            1600,
            1159,
            &[(3, 1086, 1086), (4, 1111, 1111), (5, 1131, 1131), (6, 1146, 1146), (7, 1600, 1159)],
        )
        .unwrap();
        let dataset_pcts: Vec<f64> = rows.iter().map(|r| r.pct_of_dataset).collect();
        assert_eq!(dataset_pcts, vec![67.88, 69.44, 70.69, 71.63, 100.00]);
        let success_pcts: Vec<f64> = rows.iter().map(|r| r.pct_of_all_successes).collect();
        assert_eq!(success_pcts, vec![93.70, 95.86, 97.58, 98.88, 100.00]);
        let deltas: Vec<Option<i64>> = rows.iter().map(|r| r.delta_successes).collect();
        assert_eq!(deltas, vec![None, Some(25), Some(20), Some(15), Some(13)]);
        let remaining: Vec<i64> = rows.iter().map(|r| r.successes_remaining).collect();
        assert_eq!(remaining, vec![73, 48, 28, 13, 0]);
        let csv = render_coverage_csv(&rows);
        assert!(csv.contains("6,1146,71.63,1146,98.88,15,13"));
        assert!(csv.contains("3,1086,67.88,1086,93.70,-,73"));
    }

    #[test]
    fn coverage_rejects_inconsistent_counts() {
        for counts in [
            vec![],
            vec![(2u32, 5u64, 6u64)],
            vec![(2, 5, 5), (2, 6, 6)],
            vec![(2, 5, 5), (3, 4, 4)],
            vec![(2, 20, 5)],
        ] {
            assert!(coverage_from_counts(10, 8, &counts).is_err(), "{counts:?}");
        }
    }

    #[test]
    fn coverage_table_counts_finished_and_accepted_sessions() {
        let instances = fixture_instances();
        let mut config = oracle_config(1);
        let oracle =
            evaluate(&instances, &config, &|| AgentBundle::symbolic(&config.session)).unwrap();
        config.session.actor_kind = ActorKind::AlwaysFail;
        let failing =
            evaluate(&instances, &config, &|| AgentBundle::symbolic(&config.session)).unwrap();
        let mut traces = oracle.traces;
        traces.extend(failing.traces);

        let rows = coverage_table(&traces, &[1, 3, 5]).unwrap();
        assert_eq!(rows[0].queries_finished, 3);
        assert_eq!(rows[0].successes, 3);
        assert_eq!(rows[1].queries_finished, 3);
        assert_eq!(rows[2].queries_finished, 6);
        assert_eq!(rows[2].successes, 3);
        assert_eq!(rows[2].pct_of_all_successes, 100.0);
        assert_eq!(rows[2].successes_remaining, 0);
        assert_eq!(rows[1].delta_successes, Some(0));
    }

    #[test]
    fn report_mode_is_threaded_through() {
        let instances = vec![fixtures::trip_instance()];
        let mut config = oracle_config(1);
        config.session.mode = Mode::SelfReflect;
        let outcome =
            evaluate(&instances, &config, &|| AgentBundle::symbolic(&config.session)).unwrap();
        assert_eq!(outcome.report.mode, Mode::SelfReflect);
        assert!(render_report_csv(&outcome.report).contains(",reflect,"));
    }
}
