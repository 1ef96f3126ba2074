use clap::{Args, Parser, Subcommand};
use planmem::domain::{
    ActorKind, ExtractorKind, FeedbackScope, Mode, SessionConfig, SessionTrace, TaskKind,
    VerifierKind,
};
use planmem::evalharness::{self, dataset, generate, EmPolicy, EvalConfig};
use planmem::llmio::{
    llm_bundle, LiveSettings, LiveTransport, RecordingTransport, ReplayStore, ReplayTransport,
    Retry, SharedTransport,
};
use planmem::orchestrate::{run_session, AgentBundle, OrchestrateError};
use planmem::queryparse;
use std::error::Error;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

#[derive(Parser)]
#[command(
    name = "planmem",
    version,
    about = "Plan-refine sessions with constraint and failure memory over \
             trip, calendar, and meeting queries"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded dataset of query instances.
    Gen(GenArgs),
    /// Run one session against a single instance and print the playback.
    Run(RunArgs),
    /// Evaluate a dataset and write report.csv plus traces.jsonl.
    Eval(EvalArgs),
    /// Build a turn-budget coverage table from saved traces.
    Coverage(CoverageArgs),
    /// List or show entries of a recorded replay store.
    Replay(ReplayArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Task family: trip, calendar, or meeting.
    #[arg(long)]
    task: String,
    #[arg(long, default_value_t = 10)]
    count: usize,
    /// Cities, participants, or friends per instance.
    #[arg(long, default_value_t = 3)]
    size: usize,
    /// Trip length in days; ignored by the other families.
    #[arg(long, default_value_t = 10)]
    horizon: u32,
    /// Tighten constraints until exactly one valid plan remains.
    #[arg(long)]
    unique: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path, one JSON instance per line.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct SessionArgs {
    /// Ablation mode: single, reflect, multi, cmem, or full.
    #[arg(long, default_value = "full")]
    mode: String,
    /// Actor backend: oracle, noisy[=RATE], alwaysfail, or llm.
    #[arg(long, default_value = "oracle")]
    actor: String,
    /// Extractor backend: symbolic or llm.
    #[arg(long, default_value = "symbolic")]
    extractor: String,
    /// Verifier backend: symbolic or llm.
    #[arg(long, default_value = "symbolic")]
    verifier: String,
    /// Turn budget per session.
    #[arg(long, default_value_t = 5)]
    turns: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Failure feedback scope in full mode: accumulated or latest.
    #[arg(long, default_value = "accumulated")]
    feedback: String,
    /// Serve LLM calls from this replay directory instead of going live.
    #[arg(long)]
    replay_dir: Option<PathBuf>,
    /// Record live LLM calls into this directory.
    #[arg(long)]
    record_dir: Option<PathBuf>,
    /// Model name for live LLM calls; defaults to PLANMEM_MODEL.
    #[arg(long)]
    model: Option<String>,
}

#[derive(Args)]
struct RunArgs {
    /// Dataset to pick the instance from.
    #[arg(long)]
    dataset: PathBuf,
    /// Instance id; defaults to the first instance.
    #[arg(long)]
    id: Option<String>,
    #[command(flatten)]
    session: SessionArgs,
    /// Write the full session trace as JSON to this path.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[command(flatten)]
    session: SessionArgs,
    /// Independent repetitions over the dataset.
    #[arg(long, default_value_t = 1)]
    runs: u32,
    /// Worker thread override.
    #[arg(long)]
    workers: Option<usize>,
    /// Exact-match policy: auto, require, or skip.
    #[arg(long, default_value = "auto")]
    em_policy: String,
    /// Directory for report.csv and traces.jsonl.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Also write coverage.csv for these comma-separated turn caps.
    #[arg(long)]
    caps: Option<String>,
}

#[derive(Args)]
struct CoverageArgs {
    /// Traces written by eval, one JSON trace per line.
    #[arg(long)]
    traces: PathBuf,
    /// Comma-separated turn caps.
    #[arg(long, default_value = "1,2,3,4,5")]
    caps: String,
    /// Output path; prints to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    /// Replay store directory.
    #[arg(long)]
    dir: PathBuf,
    /// Print the full entry for this request hash instead of listing.
    #[arg(long)]
    hash: Option<String>,
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Run(args) => cmd_run(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Coverage(args) => cmd_coverage(args),
        Command::Replay(args) => cmd_replay(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn parse_task(s: &str) -> Result<TaskKind, Box<dyn Error>> {
    TaskKind::parse(s).ok_or_else(|| format!("unknown task {s:?}; use trip, calendar, or meeting").into())
}

fn parse_actor(s: &str) -> Result<ActorKind, Box<dyn Error>> {
    let lower = s.trim().to_ascii_lowercase();
    match lower.as_str() {
        "oracle" => return Ok(ActorKind::Oracle),
        "noisy" => return Ok(ActorKind::Noisy { error_rate: 0.5 }),
        "alwaysfail" | "always_fail" | "fail" => return Ok(ActorKind::AlwaysFail),
        "llm" => return Ok(ActorKind::Llm),
        _ => {}
    }
    if let Some(rate) = lower.strip_prefix("noisy=") {
        let error_rate: f64 = rate.parse().map_err(|_| format!("bad noisy rate {rate:?}"))?;
        return Ok(ActorKind::Noisy { error_rate });
    }
    Err(format!("unknown actor {s:?}; use oracle, noisy[=RATE], alwaysfail, or llm").into())
}

impl SessionArgs {
    fn config(&self) -> Result<SessionConfig, Box<dyn Error>> {
        let mode = Mode::parse(&self.mode)
            .ok_or_else(|| format!("unknown mode {:?}; use single, reflect, multi, cmem, or full", self.mode))?;
        let actor_kind = parse_actor(&self.actor)?;
        let extractor_kind = match self.extractor.trim().to_ascii_lowercase().as_str() {
            "symbolic" => ExtractorKind::Symbolic,
            "llm" => ExtractorKind::Llm,
            other => return Err(format!("unknown extractor {other:?}").into()),
        };
        let verifier_kind = match self.verifier.trim().to_ascii_lowercase().as_str() {
            "symbolic" => VerifierKind::Symbolic,
            "llm" => VerifierKind::Llm,
            other => return Err(format!("unknown verifier {other:?}").into()),
        };
        let feedback_scope = match self.feedback.trim().to_ascii_lowercase().as_str() {
            "accumulated" | "all" => FeedbackScope::Accumulated,
            "latest" | "latest_only" => FeedbackScope::LatestOnly,
            other => return Err(format!("unknown feedback scope {other:?}").into()),
        };
        let config = SessionConfig {
            max_turns: self.turns,
            mode,
            actor_kind,
            verifier_kind,
            extractor_kind,
            feedback_scope,
            seed: self.seed,
            ..SessionConfig::default()
        };
        config.validate()?;
        Ok(config)
    }

    fn needs_llm(&self, config: &SessionConfig) -> bool {
        config.actor_kind == ActorKind::Llm
            || config.extractor_kind == ExtractorKind::Llm
            || config.verifier_kind == VerifierKind::Llm
    }

    /// Builds the shared transport and model name when any agent is
    /// LLM-backed.
    fn transport(&self, config: &SessionConfig) -> Result<Option<(SharedTransport, String)>, Box<dyn Error>> {
        if !self.needs_llm(config) {
            return Ok(None);
        }
        if let Some(dir) = &self.replay_dir {
            let store = ReplayStore::new(dir)?;
            let model = self.model.clone().unwrap_or_else(|| "default".to_string());
            return Ok(Some((Arc::new(ReplayTransport::new(store)), model)));
        }
        let settings = LiveSettings::from_env()?;
        let model = self.model.clone().unwrap_or_else(|| settings.model.clone());
        let retries = settings.retries;
        let live: SharedTransport = Arc::new(LiveTransport::new(settings));
        let retried: SharedTransport = Arc::new(Retry::new(live, retries, Duration::from_millis(500)));
        let transport = match &self.record_dir {
            Some(dir) => {
                Arc::new(RecordingTransport::new(retried, ReplayStore::new(dir)?)) as SharedTransport
            }
            None => retried,
        };
        Ok(Some((transport, model)))
    }
}

fn bundle_for(
    config: &SessionConfig,
    transport: &Option<(SharedTransport, String)>,
) -> Result<AgentBundle, OrchestrateError> {
    match transport {
        Some((transport, model)) => Ok(llm_bundle(config, transport.clone(), model)),
        None => AgentBundle::symbolic(config),
    }
}

fn cmd_gen(args: GenArgs) -> Result<(), Box<dyn Error>> {
    let kind = parse_task(&args.task)?;
    let difficulty = generate::Difficulty {
        size: args.size,
        horizon: args.horizon,
        unique: args.unique,
    };
    let instances = generate::generate_dataset(kind, difficulty, args.count, args.seed)?;
    dataset::save_jsonl(&args.out, &instances)?;
    println!("wrote {} {} instances to {}", instances.len(), kind.as_str(), args.out.display());
    Ok(())
}

fn cmd_run(args: RunArgs) -> Result<(), Box<dyn Error>> {
    let instances = dataset::load_dataset(&args.dataset)?;
    let instance = match &args.id {
        Some(id) => instances
            .iter()
            .find(|i| &i.id == id)
            .ok_or_else(|| format!("no instance with id {id:?} in the dataset"))?,
        None => instances.first().ok_or("the dataset is empty")?,
    };
    let config = args.session.config()?;
    let transport = args.session.transport(&config)?;
    let mut bundle = bundle_for(&config, &transport)?;
    let trace = run_session(&mut bundle, instance, &config)?;

    println!("instance {} ({})", trace.instance_id, trace.task_kind.as_str());
    if let Some(err) = &trace.extraction_error {
        println!("extraction failed: {err}");
    }
    for turn in &trace.turns {
        match (&turn.verdict, &turn.error) {
            (Some(verdict), _) => println!(
                "turn {}: score {} ({} violation(s))",
                turn.turn,
                verdict.score,
                verdict.violations.len()
            ),
            (None, Some(err)) => println!("turn {}: agent error: {err}", turn.turn),
            (None, None) => println!("turn {}: no verdict", turn.turn),
        }
    }
    println!(
        "{} after {} turn(s)",
        if trace.accepted { "accepted" } else { "not accepted" },
        trace.turns_used
    );
    if let Some(plan) = &trace.final_plan {
        println!("final plan:\n{}", queryparse::render_plan(plan));
    }
    match trace.exact_match {
        Some(true) => println!("exact match: yes"),
        Some(false) => println!("exact match: no"),
        None => {}
    }
    if let Some(path) = &args.trace {
        std::fs::write(path, serde_json::to_string_pretty(&trace)? + "\n")?;
        println!("trace written to {}", path.display());
    }
    Ok(())
}

fn parse_caps(s: &str) -> Result<Vec<u32>, Box<dyn Error>> {
    s.split(',')
        .map(|part| part.trim().parse::<u32>().map_err(|_| format!("bad turn cap {part:?}").into()))
        .collect()
}

fn cmd_eval(args: EvalArgs) -> Result<(), Box<dyn Error>> {
    let instances = dataset::load_dataset(&args.dataset)?;
    let session = args.session.config()?;
    let transport = args.session.transport(&session)?;
    let em_policy = match args.em_policy.trim().to_ascii_lowercase().as_str() {
        "auto" => EmPolicy::Auto,
        "require" => EmPolicy::Require,
        "skip" => EmPolicy::Skip,
        other => return Err(format!("unknown exact-match policy {other:?}").into()),
    };
    let config = EvalConfig { session, runs: args.runs, workers: args.workers, em_policy };
    let outcome =
        evalharness::evaluate(&instances, &config, &|| bundle_for(&config.session, &transport))?;

    std::fs::create_dir_all(&args.out_dir)?;
    let report_csv = evalharness::render_report_csv(&outcome.report);
    std::fs::write(args.out_dir.join("report.csv"), &report_csv)?;
    dataset::save_jsonl(&args.out_dir.join("traces.jsonl"), &outcome.traces)?;
    if let Some(caps) = &args.caps {
        let caps = parse_caps(caps)?;
        let rows = evalharness::coverage_table(&outcome.traces, &caps)?;
        std::fs::write(args.out_dir.join("coverage.csv"), evalharness::render_coverage_csv(&rows))?;
    }
    print!("{report_csv}");
    println!("results written to {}", args.out_dir.display());
    Ok(())
}

fn cmd_coverage(args: CoverageArgs) -> Result<(), Box<dyn Error>> {
    let traces: Vec<SessionTrace> = dataset::load_jsonl(&args.traces)?;
    let caps = parse_caps(&args.caps)?;
    let rows = evalharness::coverage_table(&traces, &caps)?;
    let csv = evalharness::render_coverage_csv(&rows);
    match &args.out {
        Some(path) => {
            std::fs::write(path, &csv)?;
            println!("coverage written to {}", path.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_replay(args: ReplayArgs) -> Result<(), Box<dyn Error>> {
    if let Some(hash) = &args.hash {
        let path = args.dir.join(format!("{hash}.json"));
        let raw = std::fs::read_to_string(&path)
            .map_err(|e| format!("{}: {e}", path.display()))?;
        print!("{raw}");
        return Ok(());
    }
    let mut entries: Vec<(String, u64)> = Vec::new();
    for entry in std::fs::read_dir(&args.dir)? {
        let entry = entry?;
        let path = entry.path();
        if path.extension().is_some_and(|x| x == "json") {
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
            entries.push((stem, entry.metadata()?.len()));
        }
    }
    entries.sort();
    for (hash, size) in &entries {
        println!("{hash}  {size} bytes");
    }
    println!("{} recorded request(s)", entries.len());
    Ok(())
}
