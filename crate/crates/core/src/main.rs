use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use bandit_inertia::bounds::Family;
use bandit_inertia::figures;
use bandit_inertia::forge::{self, SingleChange};
use bandit_inertia::policy::registry;
use bandit_inertia::sim;
use bandit_inertia::verify::{self, CertifyParams, TheoremId};
use bandit_inertia::{Error, Instance, TieRule, DEFAULT_SEED};

#[derive(Parser)]
#[command(name = "inertia", version, about = "Piecewise-stationary bandit instances, simulation and regret certification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an adversarial instance and write it as JSON
    Forge(ForgeArgs),
    /// Run one episode and report its regret
    Simulate(RunArgs),
    /// Monte-Carlo estimate of expected regret
    Evaluate(RunArgs),
    /// Check a lower bound against exact or simulated regret
    Certify(CertifyArgs),
    /// Write the per-round data of an illustrative run as CSV
    Figure(FigureArgs),
}

#[derive(Args, Clone)]
struct Shape {
    /// ucb, etc, eg-early, eg-mid or restart
    #[arg(long)]
    kind: Option<String>,
    #[arg(long = "T")]
    horizon: Option<usize>,
    #[arg(long = "K", default_value_t = 2)]
    arms: usize,
    #[arg(long, default_value_t = 20)]
    m: usize,
    #[arg(long, default_value_t = 4)]
    d: usize,
    #[arg(long, default_value_t = 2)]
    gamma: usize,
    /// Construction embedded by `--kind restart`
    #[arg(long, default_value = "ucb")]
    inner: String,
}

#[derive(Args)]
struct ForgeArgs {
    #[command(flatten)]
    shape: Shape,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Instance JSON file; when absent the instance is forged from --kind
    #[arg(long)]
    instance: Option<PathBuf>,
    #[command(flatten)]
    shape: Shape,
    /// Policy designation, e.g. ucb-known, etc:m=20, eps-greedy:eps=0.1, restart:d=4:ucb-known
    #[arg(long)]
    policy: String,
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Per-round CSV trace (simulate only)
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long)]
    theorem: String,
    #[arg(long = "T", default_value_t = 1000)]
    horizon: usize,
    #[arg(long = "K", default_value_t = 2)]
    arms: usize,
    #[arg(long, default_value_t = 20)]
    m: usize,
    /// Comma-separated ε values
    #[arg(long, value_delimiter = ',')]
    eps: Vec<f64>,
    #[arg(long, default_value_t = 4)]
    d: usize,
    #[arg(long, default_value_t = 2)]
    gamma: usize,
    /// Policy family for the single-family restart bound: etc, eps-greedy or ucb
    #[arg(long, default_value = "ucb")]
    kind: String,
    #[arg(long, default_value_t = 10_000)]
    reps: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FigureArgs {
    #[arg(long)]
    id: u32,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Error(Error),
    Uncertified,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Uncertified) => ExitCode::from(3),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Error(e)) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            match &e {
                e if e.is_validation() => ExitCode::from(2),
                Error::Unknown { .. } => ExitCode::from(1),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn run(cmd: Command) -> Outcome {
    match cmd {
        Command::Forge(args) => forge_cmd(args),
        Command::Simulate(args) => simulate_cmd(args),
        Command::Evaluate(args) => evaluate_cmd(args),
        Command::Certify(args) => certify_cmd(args),
        Command::Figure(args) => figure_cmd(args),
    }
}

fn emit(output: Option<&Path>, text: &str) -> Outcome {
    match output {
        Some(path) => std::fs::write(path, format!("{text}\n")).map_err(|e| Failure::Error(e.into())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn forged(shape: &Shape) -> std::result::Result<(Instance, Option<serde_json::Value>), Failure> {
    let kind = shape.kind.as_deref().ok_or_else(|| Failure::Usage("--kind is required".into()))?;
    let horizon = shape.horizon.ok_or_else(|| Failure::Usage("--T is required".into()))?;
    let k = shape.arms;
    Ok(match kind {
        "ucb" => {
            let (inst, params) = forge::forge_ucb(horizon, k)?;
            (inst, Some(params.sidecar()))
        }
        "etc" => (forge::forge_etc(horizon, k, shape.m)?, None),
        "eg-early" => (forge::forge_eg_early(horizon, k)?, None),
        "eg-mid" => (forge::forge_eg_mid(horizon, k)?, None),
        "restart" => {
            let inner = match shape.inner.as_str() {
                "etc" => SingleChange::Etc { m: shape.m },
                other => other.parse()?,
            };
            (forge::forge_restart_composite(horizon, k, shape.d, shape.gamma, inner)?, None)
        }
        other => return Err(Failure::Usage(format!("unknown --kind `{other}`"))),
    })
}

fn sidecar_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.params.json"))
}

fn forge_cmd(args: ForgeArgs) -> Outcome {
    let (inst, sidecar) = forged(&args.shape)?;
    let text = inst.to_json()?;
    match &args.output {
        Some(path) => {
            emit(Some(path), &text)?;
            if let Some(params) = &sidecar {
                let side = serde_json::to_string_pretty(params).map_err(Error::from)?;
                emit(Some(&sidecar_path(path)), &side)?;
                println!("{side}");
            }
            Ok(())
        }
        None => emit(None, &text),
    }
}

fn load_instance(args: &RunArgs) -> std::result::Result<Instance, Failure> {
    match &args.instance {
        Some(path) => Ok(Instance::read(path)?),
        None => Ok(forged(&args.shape)?.0),
    }
}

fn simulate_cmd(args: RunArgs) -> Outcome {
    let inst = load_instance(&args)?;
    let spec = registry().parse(&args.policy)?;
    let traj = sim::run_episode(&inst, &spec, args.seed, TieRule::Uniform, args.trace.is_some())?;
    if let Some(path) = &args.trace {
        let mut out = BufWriter::new(File::create(path).map_err(Error::from)?);
        sim::write_trace_csv(&traj, &mut out)?;
        out.flush().map_err(Error::from)?;
    }
    let counts: Vec<usize> = (0..inst.arms).map(|k| traj.arms_played().filter(|&a| a == k).count()).collect();
    let summary = json!({
        "policy": spec.to_string(),
        "seed": args.seed,
        "regret": traj.regret,
        "pulls": counts,
        "ties_resolved": traj.ties_resolved,
    });
    emit(args.output.as_deref(), &serde_json::to_string_pretty(&summary).map_err(Error::from)?)
}

fn evaluate_cmd(args: RunArgs) -> Outcome {
    let inst = load_instance(&args)?;
    let spec = registry().parse(&args.policy)?;
    let report = sim::monte_carlo_regret(&inst, &spec, args.reps, args.seed)?;
    let out = json!({
        "policy": spec.to_string(),
        "instance": inst,
        "report": report,
    });
    emit(args.output.as_deref(), &serde_json::to_string_pretty(&out).map_err(Error::from)?)
}

fn certify_cmd(args: CertifyArgs) -> Outcome {
    let theorem: TheoremId = args.theorem.parse()?;
    let family = match args.kind.as_str() {
        "etc" => Family::Etc,
        "eps-greedy" | "eg" => Family::EpsGreedy,
        "ucb" => Family::Ucb,
        other => return Err(Failure::Usage(format!("unknown family `{other}`"))),
    };
    let params = CertifyParams {
        horizon: args.horizon,
        arms: args.arms,
        m: args.m,
        eps: args.eps,
        d: args.d,
        gamma: args.gamma,
        family,
    };
    let cert = verify::certify(theorem, &params, args.reps, args.seed)?;
    emit(args.output.as_deref(), &cert.to_json()?)?;
    if cert.pass {
        Ok(())
    } else {
        eprintln!("error: {} not certified (bound {})", cert.theorem, cert.bound);
        Err(Failure::Uncertified)
    }
}

fn figure_cmd(args: FigureArgs) -> Outcome {
    match &args.output {
        Some(path) => {
            let mut out = BufWriter::new(File::create(path).map_err(Error::from)?);
            figures::write_figure_data(args.id, args.seed, &mut out)?;
            out.flush().map_err(Error::from)?;
        }
        None => figures::write_figure_data(args.id, args.seed, io::stdout().lock())?,
    }
    Ok(())
}
