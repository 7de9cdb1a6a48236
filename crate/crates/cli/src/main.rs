//! `loebench` command-line entry point.
//!
//! Exit codes: 0 success, 1 runtime error, 2 usage error, 3 session ended
//! unresolved, 4 transcript does not replay.

mod interact;

use std::fs;
use std::io::{self, IsTerminal};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use loebench_core::batch::{self, Assignment, ExperimentSpec, Overrides};
use loebench_core::config::{load_rules, load_table, load_templates, resolve_scenario};
use loebench_core::policy::PolicyKind;
use loebench_core::replay::{verify_text, VerifyTextError};
use loebench_core::transcript::to_jsonl;
use loebench_core::{DialogVariant, ScenarioConfig};
use loebench_server::ServerConfig;

const EXIT_RUNTIME: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_UNRESOLVED: u8 = 3;
const EXIT_DIVERGED: u8 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "loebench",
    version,
    about = "Levels-of-explanation dialog bench for a simulated sorting robot"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one session in the terminal.
    Interact(InteractArgs),
    /// Run scripted users over seeded sessions and report resolution rates.
    Batch(BatchArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
    /// Check that a recorded transcript replays byte-exact.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
struct OverrideArgs {
    /// Transition table file (JSON or TOML).
    #[arg(long)]
    table: Option<PathBuf>,
    /// Explanation template file (JSON or TOML).
    #[arg(long)]
    templates: Option<PathBuf>,
    /// Intent rule file (JSON or TOML).
    #[arg(long)]
    rules: Option<PathBuf>,
}

impl OverrideArgs {
    fn load(&self) -> Result<Overrides> {
        Ok(Overrides {
            table: self.table.as_deref().map(load_table).transpose()?,
            templates: self.templates.as_deref().map(load_templates).transpose()?,
            rules: self.rules.as_deref().map(load_rules).transpose()?,
        })
    }
}

#[derive(Debug, Args)]
struct InteractArgs {
    #[arg(long, default_value = "AD2")]
    variant: DialogVariant,
    /// Built-in scenario name or path to a scenario file.
    #[arg(long, default_value = "both_random_order")]
    scenario: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the transcript (JSONL) here when the session ends.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    overrides: OverrideArgs,
}

#[derive(Debug, Args)]
struct BatchArgs {
    /// Scripted user policy; repeat for several.
    #[arg(long = "policy", required = true)]
    policies: Vec<PolicyKind>,
    /// Dialog variant; repeat for several. Defaults to AD1 and AD2.
    #[arg(long = "variant")]
    variants: Vec<DialogVariant>,
    /// Scenario name or file; repeat for several. Defaults to both error scenarios.
    #[arg(long = "scenario")]
    scenarios: Vec<String>,
    /// Sessions (participants) per row.
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Seed of the first participant; participant i uses seed + i.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = batch::DEFAULT_TURN_CAP)]
    turn_cap: u32,
    /// `within`: every participant sees every variant; `between`: one variant each.
    #[arg(long, default_value = "within", value_parser = parse_assignment)]
    assignment: Assignment,
    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write each session's transcript into this directory.
    #[arg(long)]
    transcripts: Option<PathBuf>,
    #[command(flatten)]
    overrides: OverrideArgs,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, env = "LOEBENCH_ADDR", default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    /// Persist transcripts here and restore them on start.
    #[arg(long, env = "LOEBENCH_DATA_DIR")]
    data_dir: Option<PathBuf>,
    #[command(flatten)]
    overrides: OverrideArgs,
}

#[derive(Debug, Args)]
struct ReplayArgs {
    #[arg(long)]
    transcript: PathBuf,
}

fn parse_assignment(s: &str) -> Result<Assignment, String> {
    match s {
        "within" => Ok(Assignment::Within),
        "between" => Ok(Assignment::Between),
        _ => Err(format!("unknown assignment `{s}`, expected `within` or `between`")),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", render_error(&e));
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

/// Joins the error chain, skipping causes whose text the outer message already carries.
fn render_error(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if !out.contains(&msg) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&msg);
        }
    }
    out
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Interact(a) => run_interact(a),
        Command::Batch(a) => run_batch(a),
        Command::Serve(a) => run_serve(a),
        Command::Replay(a) => run_replay(&a.transcript),
    }
}

fn run_interact(a: InteractArgs) -> Result<u8> {
    let scenario = resolve_scenario(&a.scenario)?;
    let setup = a.overrides.load()?.setup(a.variant, scenario, a.seed);
    let stdin = io::stdin();
    let prompt = stdin.is_terminal();
    let session = interact::run(setup, stdin.lock(), io::stdout().lock(), prompt)?;
    if let Some(path) = &a.out {
        fs::write(path, to_jsonl(session.transcript())).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(if session.status() == loebench_core::SessionStatus::Resolved {
        0
    } else {
        EXIT_UNRESOLVED
    })
}

fn run_batch(a: BatchArgs) -> Result<u8> {
    let scenarios: Vec<ScenarioConfig> = if a.scenarios.is_empty() {
        vec![resolve_scenario("incorrect_item")?, resolve_scenario("out_of_range")?]
    } else {
        a.scenarios
            .iter()
            .map(|s| resolve_scenario(s))
            .collect::<Result<_, _>>()?
    };
    let spec = ExperimentSpec {
        policies: a.policies,
        variants: if a.variants.is_empty() {
            DialogVariant::ALL.to_vec()
        } else {
            a.variants
        },
        scenarios,
        n: a.n,
        seed: a.seed,
        turn_cap: a.turn_cap,
        assignment: a.assignment,
        overrides: a.overrides.load()?,
    };
    let report = batch::run_experiment(&spec)?;
    print!("{report}");
    if let Some(path) = &a.out {
        let json = serde_json::to_string_pretty(&report)?;
        fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(dir) = &a.transcripts {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut sessions = report.sessions.iter();
        for row in &report.rows {
            for rec in sessions.by_ref().take(row.n) {
                let name = format!("{}-{}-{}-{}.jsonl", row.policy, row.variant, row.scenario, rec.seed);
                let path = dir.join(name);
                fs::write(&path, to_jsonl(&rec.transcript)).with_context(|| format!("writing {}", path.display()))?;
            }
        }
    }
    Ok(0)
}

fn run_serve(a: ServeArgs) -> Result<u8> {
    tracing_subscriber::fmt().with_writer(io::stderr).init();
    let config = ServerConfig {
        defaults: a.overrides.load()?,
        data_dir: a.data_dir,
    };
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(loebench_server::serve(a.addr, config))
        .with_context(|| format!("serving on {}", a.addr))?;
    Ok(0)
}

fn run_replay(path: &Path) -> Result<u8> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    match verify_text(&text) {
        Ok(None) => {
            println!(
                "ok: {} records replay byte-exact",
                text.lines().filter(|l| !l.trim().is_empty()).count()
            );
            Ok(0)
        }
        Ok(Some(div)) => {
            println!("{div}");
            Ok(EXIT_DIVERGED)
        }
        Err(e @ (VerifyTextError::Parse(_) | VerifyTextError::Replay(_))) => {
            println!("transcript does not replay: {e}");
            Ok(EXIT_DIVERGED)
        }
    }
}
