use std::collections::HashSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use slbench_core::analysis::{
    brute_force_learn, extensionally_equal, LEARNER_MAX_RULES, LEARNER_SPACE_LIMIT,
};
use slbench_core::sampler::characteristic_sample;
use slbench_core::Class;
use slbench_harness::benchmark::{build_benchmark, resample, BenchmarkSpec, Datapoint, SpecName};
use slbench_harness::client::{HttpClient, MockClient, ModelClient};
use slbench_harness::config::{ModelConfig, RetryPolicy};
use slbench_harness::leaderboard::{
    score_leaderboard, settings_csv, summary_csv, Grid, WeightMode,
};
use slbench_harness::prompt::build_prompt;
use slbench_harness::record::RunRecord;
use slbench_harness::runner::{run_benchmark, RunError, RunOptions};
use slbench_harness::store::{self, StoreError};

#[derive(Parser)]
#[command(
    name = "slbench",
    version,
    about = "Strictly local function learning benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark as JSONL.
    Gen(GenArgs),
    /// Re-draw the samples of a benchmark at another multiple.
    Sample(SampleArgs),
    /// Query a model on every datapoint and write run records.
    Run(RunArgs),
    /// Score saved responses against a benchmark.
    Eval(EvalArgs),
    /// Aggregate run records into leaderboard tables.
    Score(ScoreArgs),
    /// Cross-check datapoints with the brute-force learner (small settings only).
    OracleVerify(OracleArgs),
}

#[derive(Args)]
struct GridArgs {
    /// Comma-separated k values (default 2,3,4).
    #[arg(long, value_delimiter = ',')]
    k: Vec<usize>,
    /// Comma-separated alphabet sizes (default 5,6,7,8).
    #[arg(long, value_delimiter = ',')]
    sigma: Vec<usize>,
    /// Comma-separated rule counts (default 3,4,5).
    #[arg(long, value_delimiter = ',')]
    rules: Vec<usize>,
}

impl GridArgs {
    fn grid(&self) -> Grid {
        let d = Grid::default();
        let pick = |v: &Vec<usize>, def: Vec<usize>| if v.is_empty() { def } else { v.clone() };
        Grid {
            ks: pick(&self.k, d.ks),
            sigmas: pick(&self.sigma, d.sigmas),
            rule_counts: pick(&self.rules, d.rule_counts),
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value = "standard")]
    spec: SpecName,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sample multiple for the standard classes.
    #[arg(long, default_value_t = 2)]
    multiple: usize,
    /// Datapoints per setting (default 10 standard, 30 exploration).
    #[arg(long)]
    count: Option<usize>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    multiple: usize,
    /// Repeat the characteristic sample instead of adding fresh inputs.
    #[arg(long)]
    repeat: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// TOML model configuration; the key is read from MODEL_API_KEY.
    #[arg(long, required_unless_present = "mock")]
    model: Option<PathBuf>,
    /// Offline client instead of a model: `echo` answers with the ground
    /// truth, `empty` with an empty rule block.
    #[arg(long, value_parser = ["echo", "empty"])]
    mock: Option<String>,
    #[arg(long, default_value_t = 0)]
    shots: usize,
    #[arg(long, default_value_t = 0)]
    prompt_seed: u64,
    #[arg(long, default_value_t = 4)]
    concurrency: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// JSONL of run records or `{"id", "raw_response", "model"?}` lines.
    #[arg(long)]
    responses: PathBuf,
    /// Shots used when the responses were produced; only affects the
    /// recorded prompt for bare response lines.
    #[arg(long, default_value_t = 0)]
    shots: usize,
    #[arg(long, default_value_t = 0)]
    prompt_seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    records: PathBuf,
    #[arg(long, default_value = "linear")]
    weights: WeightMode,
    /// Print per-setting results instead of the class summary.
    #[arg(long)]
    settings: bool,
    /// Print the full leaderboard as JSON.
    #[arg(long, conflicts_with = "settings")]
    json: bool,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Length bound for the extensional comparison.
    #[arg(long, default_value_t = 4)]
    max_len: usize,
}

enum Failure {
    Usage(String),
    Transport(String),
    Data(String),
}

impl From<StoreError> for Failure {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Io { .. } => Failure::Usage(e.to_string()),
            StoreError::Malformed { .. } => Failure::Data(e.to_string()),
        }
    }
}

impl From<slbench_core::Error> for Failure {
    fn from(e: slbench_core::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

fn write_output<T: serde::Serialize>(out: Option<&Path>, items: &[T]) -> Result<(), Failure> {
    match out {
        Some(path) => Ok(store::persist(path, items)?),
        None => store::write_jsonl(std::io::stdout().lock(), items)
            .map_err(|e| Failure::Usage(format!("stdout: {e}"))),
    }
}

fn gen(args: GenArgs) -> Result<(), Failure> {
    let mut spec = BenchmarkSpec::named(args.spec, args.seed);
    if args.multiple == 0 {
        return Err(Failure::Usage("--multiple must be at least 1".into()));
    }
    if spec.name == SpecName::Standard {
        spec.multiple = args.multiple;
    }
    let grid = args.grid.grid();
    let count = args.count.unwrap_or(spec.grid[0].count);
    let classes: Vec<Class> = {
        let mut seen = Vec::new();
        for c in &spec.grid {
            if !seen.contains(&c.class) {
                seen.push(c.class);
            }
        }
        seen
    };
    spec.grid.clear();
    for class in classes {
        for &k in &grid.ks {
            for &alphabet_size in &grid.sigmas {
                for &num_rules in &grid.rule_counts {
                    spec.grid.push(slbench_harness::benchmark::GridCell {
                        class,
                        k,
                        alphabet_size,
                        num_rules,
                        count,
                    });
                }
            }
        }
    }
    let points = build_benchmark(&spec)?;
    log::info!("generated {} datapoints", points.len());
    write_output(args.out.as_deref(), &points)
}

fn sample(args: SampleArgs) -> Result<(), Failure> {
    if args.multiple == 0 {
        return Err(Failure::Usage("--multiple must be at least 1".into()));
    }
    let points: Vec<Datapoint> = store::load(&args.dataset)?;
    let resampled = points
        .iter()
        .map(|p| resample(p, args.multiple, args.repeat))
        .collect::<Result<Vec<_>, _>>()?;
    write_output(args.out.as_deref(), &resampled)
}

async fn run(args: RunArgs) -> Result<(), Failure> {
    let points: Vec<Datapoint> = store::load(&args.dataset)?;
    let (client, retry): (Box<dyn ModelClient>, RetryPolicy) = match (&args.mock, &args.model) {
        (Some(kind), _) => {
            let c = match kind.as_str() {
                "echo" => MockClient::echo(&points),
                _ => MockClient::fixed("<START>\n<END>\n"),
            };
            (Box::new(c), RetryPolicy::default())
        }
        (None, Some(path)) => {
            let config = ModelConfig::load(path).map_err(|e| Failure::Usage(e.to_string()))?;
            let retry = config.retry;
            let c = HttpClient::from_env(config).map_err(|e| Failure::Transport(e.to_string()))?;
            (Box::new(c), retry)
        }
        (None, None) => return Err(Failure::Usage("--model or --mock is required".into())),
    };
    let opts = RunOptions {
        shots: args.shots,
        prompt_seed: args.prompt_seed,
        concurrency: args.concurrency,
        retry,
    };
    let records = match run_benchmark(&points, client.as_ref(), &opts).await {
        Ok(r) => r,
        Err(RunError::Client(e)) => return Err(Failure::Transport(e.to_string())),
        Err(e @ RunError::Prompt { .. }) => return Err(Failure::Usage(e.to_string())),
    };
    write_output(args.out.as_deref(), &records)?;
    let failed = records
        .iter()
        .filter(|r| r.transport_error.is_some())
        .count();
    if failed > 0 {
        return Err(Failure::Transport(format!(
            "{failed} of {} datapoints could not be queried; their records are kept",
            records.len()
        )));
    }
    Ok(())
}

#[derive(Deserialize)]
struct ResponseLine {
    id: String,
    #[serde(alias = "response")]
    raw_response: Option<String>,
    #[serde(default)]
    model: Option<String>,
}

fn eval(args: EvalArgs) -> Result<(), Failure> {
    let points: Vec<Datapoint> = store::load(&args.dataset)?;
    let lines: Vec<serde_json::Value> = store::load(&args.responses)?;
    let mut records = Vec::with_capacity(lines.len());
    for (i, v) in lines.into_iter().enumerate() {
        let id = v
            .get("id")
            .and_then(|x| x.as_str())
            .unwrap_or_default()
            .to_string();
        let p = points.iter().find(|p| p.id == id).ok_or_else(|| {
            Failure::Data(format!("response line {}: unknown datapoint {id:?}", i + 1))
        })?;
        let record = match serde_json::from_value::<RunRecord>(v.clone()) {
            Ok(mut r) => {
                r.rescore(p);
                r
            }
            Err(_) => {
                let line: ResponseLine = serde_json::from_value(v)
                    .map_err(|e| Failure::Data(format!("response line {}: {e}", i + 1)))?;
                let prompt = build_prompt(p, args.shots, args.prompt_seed)?;
                let model = line.model.unwrap_or_else(|| "unknown".into());
                let mut r = RunRecord::scored(p, &model, &prompt, line.raw_response);
                r.id = line.id;
                r
            }
        };
        records.push(record);
    }
    write_output(args.out.as_deref(), &records)
}

fn score(args: ScoreArgs) -> Result<(), Failure> {
    let records: Vec<RunRecord> = store::load(&args.records)?;
    let boards = score_leaderboard(&records, args.weights, &args.grid.grid());
    let mut warned = HashSet::new();
    for b in &boards {
        for w in &b.warnings {
            if warned.insert(w.clone()) {
                log::warn!("{}: {w}", b.model);
            }
        }
    }
    let text = if args.json {
        serde_json::to_string_pretty(&boards).map_err(|e| Failure::Data(e.to_string()))? + "\n"
    } else if args.settings {
        settings_csv(&boards)
    } else {
        summary_csv(&boards)
    };
    std::io::stdout()
        .lock()
        .write_all(text.as_bytes())
        .map_err(|e| Failure::Usage(format!("stdout: {e}")))
}

fn oracle_verify(args: OracleArgs) -> Result<(), Failure> {
    let points: Vec<Datapoint> = store::load(&args.dataset)?;
    let (mut ok, mut skipped, mut failed) = (0, 0, 0);
    for p in &points {
        let space = p.alphabet.len().saturating_pow(p.k as u32);
        if space > LEARNER_SPACE_LIMIT || p.num_rules > LEARNER_MAX_RULES {
            skipped += 1;
            continue;
        }
        let truth = p.ruleset();
        let data = match p.class {
            Class::Iosl => p.dataset(),
            _ => characteristic_sample(&truth)?,
        };
        let verdict = match brute_force_learn(&data, p.class, p.k, p.num_rules)? {
            None => "no rule set found".to_string(),
            Some(g) if g.len() != p.num_rules => {
                format!("found {} rules, expected {}", g.len(), p.num_rules)
            }
            Some(g) if !extensionally_equal(&truth, &g, args.max_len)? => {
                format!("found a different function: {g}")
            }
            Some(_) => String::new(),
        };
        if verdict.is_empty() {
            ok += 1;
            println!("{}\tok", p.id);
        } else {
            failed += 1;
            println!("{}\tFAIL\t{verdict}", p.id);
        }
    }
    eprintln!("{ok} ok, {failed} failed, {skipped} skipped (beyond desk scale)");
    if failed > 0 {
        return Err(Failure::Data(format!(
            "{failed} datapoints disagree with the oracle"
        )));
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Sample(a) => sample(a),
        Command::Eval(a) => eval(a),
        Command::Score(a) => score(a),
        Command::OracleVerify(a) => oracle_verify(a),
        Command::Run(a) => match tokio::runtime::Runtime::new() {
            Ok(rt) => rt.block_on(run(a)),
            Err(e) => Err(Failure::Usage(e.to_string())),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Transport(m)) => {
            eprintln!("transport error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Data(m)) => {
            eprintln!("data error: {m}");
            ExitCode::from(3)
        }
    }
}
