use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use skyloop_core::episode::{is_stub_value, validate_value, ValidationMode};
use skyloop_core::harness::{
    aggregate, analyze, generate, read_corpus, read_sidecar, score_corpus, write_leaderboard, CorpusLine, HarnessError,
    Manifest, RunConfig, CORPUS_FILE, SCORES_FILE,
};

const LEADERBOARD_FILE: &str = "leaderboard.csv";
const ANALYTICS_FILE: &str = "analytics.json";

#[derive(Parser)]
#[command(name = "skyloop", version, about = "Generate, validate and score UAV mission dialogue corpora")]
struct Cli {
    /// More logging (repeat for debug output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run agents over the scenario set and write corpus.jsonl plus a manifest.
    Generate(GenerateArgs),
    /// Score a corpus into a per-episode sidecar.
    Score(ScoreArgs),
    /// Fold a scored corpus into a leaderboard CSV.
    Aggregate(AggregateArgs),
    /// Intent, tool, A2A and latency tables for a corpus.
    Analytics(AnalyticsArgs),
    /// Check episodes or a corpus against the schema and structural rules.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, env = "SKYLOOP_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, env = "SKYLOOP_SCENARIOS")]
    scenarios: Option<PathBuf>,
    /// Comma-separated agent names; `external:<command>` attaches a subprocess policy.
    #[arg(long, env = "SKYLOOP_AGENTS", value_delimiter = ',')]
    agents: Option<Vec<String>>,
    #[arg(long, env = "SKYLOOP_EPISODES_PER_SCENARIO")]
    episodes_per_scenario: Option<usize>,
    #[arg(long, env = "SKYLOOP_SEED")]
    seed: Option<u64>,
    #[arg(long, env = "SKYLOOP_EPISODE_SEEDS", value_delimiter = ',')]
    episode_seeds: Option<Vec<u64>>,
    #[arg(long, env = "SKYLOOP_OUT")]
    out: Option<PathBuf>,
    #[arg(long, env = "SKYLOOP_PARALLEL")]
    parallel: Option<usize>,
    #[arg(long, env = "SKYLOOP_CALIBRATION")]
    calibration: Option<PathBuf>,
    #[arg(long, env = "SKYLOOP_MAX_TURN_TOKENS")]
    max_turn_tokens: Option<u64>,
    /// Fixed timestamps so repeated runs are byte-identical.
    #[arg(long, env = "SKYLOOP_CANONICAL")]
    canonical: bool,
}

#[derive(Args)]
struct ModeArgs {
    #[arg(long, conflicts_with = "lenient")]
    strict: bool,
    /// Tolerate unknown fields.
    #[arg(long)]
    lenient: bool,
}

impl ModeArgs {
    fn mode(&self) -> ValidationMode {
        if self.lenient {
            ValidationMode::Lenient
        } else {
            ValidationMode::Strict
        }
    }
}

#[derive(Args)]
struct ScoreArgs {
    /// Run directory holding corpus.jsonl; the sidecar is written next to it.
    #[arg(long, env = "SKYLOOP_OUT", default_value = "out")]
    out: PathBuf,
    /// Corpus to score instead of <out>/corpus.jsonl.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[command(flatten)]
    mode: ModeArgs,
}

#[derive(Args)]
struct AggregateArgs {
    #[arg(long, env = "SKYLOOP_OUT", default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Episodes requested per model; read from the manifest when omitted.
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Args)]
struct AnalyticsArgs {
    #[arg(long, env = "SKYLOOP_OUT", default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Print the report as JSON instead of tables.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ValidateArgs {
    /// A single episode document or a JSONL corpus.
    path: PathBuf,
    #[command(flatten)]
    mode: ModeArgs,
}

fn build_config(a: GenerateArgs) -> Result<RunConfig, HarnessError> {
    let mut c = match &a.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(v) = a.scenarios {
        c.scenarios = v;
    }
    if let Some(v) = a.agents {
        c.agents = v.into_iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
    }
    if let Some(v) = a.episodes_per_scenario {
        c.episodes_per_scenario = v;
    }
    if let Some(v) = a.seed {
        c.seed = v;
    }
    if let Some(v) = a.episode_seeds {
        c.episode_seeds = v;
    }
    if let Some(v) = a.out {
        c.out = v;
    }
    if let Some(v) = a.parallel {
        c.parallel = v;
    }
    if let Some(v) = a.calibration {
        c.calibration = Some(v);
    }
    if let Some(v) = a.max_turn_tokens {
        c.max_turn_tokens = v;
    }
    c.canonical |= a.canonical;
    Ok(c)
}

fn cmd_generate(a: GenerateArgs) -> Result<(), HarnessError> {
    let config = build_config(a)?;
    let s = generate(&config)?;
    let m = &s.manifest;
    println!(
        "{} records in {} ({} generated, {} reused)",
        m.records,
        config.out.join(CORPUS_FILE).display(),
        s.generated,
        s.reused
    );
    for (agent, c) in &m.per_agent {
        println!("  {agent}: {} episodes, {} stubs, {} attempts", c.episodes, c.stubs, c.attempts);
    }
    Ok(())
}

fn cmd_score(a: ScoreArgs) -> Result<(), HarnessError> {
    let corpus = a.corpus.unwrap_or_else(|| a.out.join(CORPUS_FILE));
    std::fs::create_dir_all(&a.out).map_err(|e| HarnessError::Internal(format!("{}: {e}", a.out.display())))?;
    let out = a.out.join(SCORES_FILE);
    let s = score_corpus(&corpus, &out, a.mode.mode())?;
    println!(
        "{} records scored into {} (T_opt {}, {} valid, {} invalid, {} stubs, {} malformed)",
        s.records,
        out.display(),
        s.t_opt,
        s.valid,
        s.invalid,
        s.stubs,
        s.malformed
    );
    Ok(())
}

fn cmd_aggregate(a: AggregateArgs) -> Result<(), HarnessError> {
    let scores = a.scores.unwrap_or_else(|| a.out.join(SCORES_FILE));
    if !scores.exists() {
        return Err(HarnessError::Input(format!("no score sidecar at {}; run `skyloop score` first", scores.display())));
    }
    let records = read_sidecar(&scores)?;
    let budget = match a.budget {
        Some(b) => b,
        None => match Manifest::load(&a.out)? {
            Some(m) => m.episode_budget,
            None => {
                return Err(HarnessError::Usage(format!(
                    "no manifest in {}; pass --budget",
                    a.out.display()
                )))
            }
        },
    };
    let rows = aggregate(&records, budget)?;
    let path = a.out.join(LEADERBOARD_FILE);
    write_leaderboard(&rows, &path)?;
    for r in &rows {
        println!(
            "{:<24} alpha3_rel {:.3}  raw {:.3}  reliability {:.3}  coverage {:.3}  call_eff {:.3}",
            r.model, r.alpha3_rel, r.mean_alpha3, r.reliability, r.coverage, r.call_efficiency
        );
    }
    println!("leaderboard written to {}", path.display());
    Ok(())
}

fn cmd_analytics(a: AnalyticsArgs) -> Result<(), HarnessError> {
    let corpus = a.corpus.unwrap_or_else(|| a.out.join(CORPUS_FILE));
    let (lines, _) = read_corpus(&corpus, ValidationMode::Strict)?;
    let report = analyze(lines.iter().filter_map(CorpusLine::valid_episode));
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    if a.out.is_dir() {
        let path = a.out.join(ANALYTICS_FILE);
        std::fs::write(&path, format!("{text}\n")).map_err(|e| HarnessError::Internal(format!("{}: {e}", path.display())))?;
    }
    if a.json {
        println!("{text}");
    } else {
        print!("{}", report.render());
    }
    Ok(())
}

fn documents(path: &Path) -> Result<Vec<Result<Value, String>>, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Input(format!("{}: {e}", path.display())))?;
    if let Ok(v) = serde_json::from_str::<Value>(&text) {
        return Ok(vec![Ok(v)]);
    }
    Ok(text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| e.to_string()))
        .collect())
}

fn cmd_validate(a: ValidateArgs) -> Result<bool, HarnessError> {
    let mode = a.mode.mode();
    let (mut valid, mut invalid, mut stubs) = (0, 0, 0);
    for (i, doc) in documents(&a.path)?.into_iter().enumerate() {
        let v = match doc {
            Ok(v) => v,
            Err(e) => {
                invalid += 1;
                println!("record {}: malformed JSON: {e}", i + 1);
                continue;
            }
        };
        if is_stub_value(&v) {
            stubs += 1;
            continue;
        }
        let id = v.get("episode_id").and_then(Value::as_str).unwrap_or("?").to_string();
        let report = validate_value(&v, mode);
        if report.valid {
            valid += 1;
        } else {
            invalid += 1;
            for viol in &report.violations {
                println!("{id}: {:?} (turn {}): {}", viol.code, viol.turn, viol.message);
            }
        }
    }
    println!("{valid} valid, {invalid} invalid, {stubs} failure stubs");
    Ok(invalid == 0)
}

fn run(cli: Cli) -> Result<bool, HarnessError> {
    match cli.command {
        Command::Generate(a) => cmd_generate(a).map(|_| true),
        Command::Score(a) => cmd_score(a).map(|_| true),
        Command::Aggregate(a) => cmd_aggregate(a).map(|_| true),
        Command::Analytics(a) => cmd_analytics(a).map(|_| true),
        Command::Validate(a) => cmd_validate(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
