//! `goerw`: experiments on generalized once-excited random walks on trees.

mod config;
mod ops;
mod output;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ConfigFile, Experiment, Format, ListValue, Operation, Params};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid `{key}`: {msg}")]
    Usage { key: String, msg: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("refused: {0}")]
    Refusal(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage { .. } | CliError::Config(_) => 2,
            CliError::Refusal(_) | CliError::Io(_) => 1,
        }
    }
}

macro_rules! refusal_from {
    ($($t:ty),*) => {
        $( impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Refusal(e.to_string())
            }
        } )*
    };
}

refusal_from!(
    goerw::tree::TreeError,
    goerw::environment::EnvError,
    goerw::walk::WalkError,
    goerw::percolation::PercolationError,
    goerw::analysis::AnalysisError
);

#[derive(Debug, Parser)]
#[command(name = "goerw", version, about = "Generalized once-excited random walks on trees", long_about = None)]
#[command(
    after_help = "Tree specs: path:L=.. | regular:d=..,L=.. | poly:b=..,L=.. | random:k=..,min=..,L=..,seed=.. | file:PATH\n\
Env specs:  srw | const:lambda=..,mu=.. | alpha:point=.. | alpha:a1=..,a2=..,p=.. | alpha:values=x|y,probs=p|q | file:PATH\n\
GOERW_THREADS caps the number of worker threads. Exit codes: 0 success, 1 refusal, 2 usage error."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every operation.
#[derive(Debug, Args, Clone, Default)]
struct Common {
    /// Master seed; every random stream is derived from it
    #[arg(long)]
    seed: Option<u64>,
    /// Write `<operation>.csv` and `<operation>.json` here instead of printing
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Args, Clone, Default)]
struct TreeArg {
    /// Tree spec, e.g. poly:b=1.5,L=64
    #[arg(long)]
    tree: Option<String>,
    /// Truncation depth (overrides L in the tree spec)
    #[arg(long)]
    depth: Option<usize>,
}

#[derive(Debug, Args, Clone, Default)]
struct EnvArg {
    /// Environment spec, e.g. alpha:point=1 (default srw)
    #[arg(long)]
    env: Option<String>,
}

#[derive(Debug, Args, Clone, Default)]
struct GridArgs {
    /// γ values: a list `0.5,1,1.5` or a range `start:stop:step`
    #[arg(long)]
    gamma_grid: Option<ListValue>,
    /// Truncation depths, e.g. 8,16,2^10
    #[arg(long)]
    depths: Option<ListValue>,
    /// Smallest cutset sum that still counts as bounded below
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a tree and print it in the plain-text tree format
    GenTree {
        #[command(flatten)]
        tree: TreeArg,
        #[command(flatten)]
        common: Common,
    },
    /// Per-edge resistance, potential, ψ, Ψ and adapted conductance
    #[command(alias = "psi")]
    ComputePsi {
        #[command(flatten)]
        tree: TreeArg,
        #[command(flatten)]
        env: EnvArg,
        /// Report only the leftmost edge at this depth
        #[arg(long)]
        edge_depth: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Sample walks and report how each one stopped
    Simulate {
        #[command(flatten)]
        tree: TreeArg,
        #[command(flatten)]
        env: EnvArg,
        #[arg(long)]
        trials: Option<u64>,
        /// Step budget per walk (default 1000 when no other stop is given)
        #[arg(long)]
        steps: Option<u64>,
        #[arg(long)]
        hit_depth: Option<usize>,
        /// Stop after this many returns to the root
        #[arg(long)]
        returns: Option<u64>,
        /// Drive the walk with exponential clocks instead of direct sampling
        #[arg(long)]
        rubin: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo connection probabilities of the ruin percolation against Ψ
    Percolate {
        #[command(flatten)]
        tree: TreeArg,
        #[command(flatten)]
        env: EnvArg,
        #[arg(long)]
        trials: Option<u64>,
        /// Deepest edge to test (leftmost edge of each depth)
        #[arg(long)]
        edge_depth: Option<usize>,
        /// Dump this many full cluster samples instead of the connection table
        #[arg(long)]
        samples: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Branching-ruin number from cutset sums with weights |e|^-γ
    EstimateBr {
        #[command(flatten)]
        tree: TreeArg,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Transience index from cutset sums with weights Ψ(e)^γ
    EstimateRt {
        #[command(flatten)]
        tree: TreeArg,
        #[command(flatten)]
        env: EnvArg,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Max flow with capacities Ψ^γ and its energy under the adapted conductances
    FlowCheck {
        #[command(flatten)]
        tree: TreeArg,
        #[command(flatten)]
        env: EnvArg,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        depths: Option<ListValue>,
        #[command(flatten)]
        common: Common,
    },
    /// Escape-frequency diagnostic against the critical control tree
    PhaseScan {
        #[command(flatten)]
        tree: TreeArg,
        #[command(flatten)]
        env: EnvArg,
        #[arg(long)]
        trials: Option<u64>,
        /// Escape depth D
        #[arg(long)]
        escape_depth: Option<usize>,
        /// Step budget per walk
        #[arg(long)]
        horizon: Option<u64>,
        #[arg(long)]
        returns: Option<u64>,
        /// Refusal margin around the critical threshold 2 − m
        #[arg(long)]
        epsilon: Option<f64>,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Ruin probability of a birth–death chain with biases μ
    Gambler {
        /// Biases of states 1..N; the last entry only fixes N
        #[arg(long)]
        mu: Option<ListValue>,
        #[arg(long)]
        start: Option<usize>,
        /// Also estimate by Monte Carlo with this many trials
        #[arg(long)]
        trials: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Frequency of Ψ(e) leaving its concentration band, by depth
    Concentration {
        #[command(flatten)]
        tree: TreeArg,
        #[command(flatten)]
        env: EnvArg,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        depths: Option<ListValue>,
        /// Number of sampled environments
        #[arg(long)]
        trials: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Run the experiment described by a TOML file; flags override the file
    Run {
        config: PathBuf,
        #[command(flatten)]
        tree: TreeArg,
        #[command(flatten)]
        env: EnvArg,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        gamma_grid: Option<ListValue>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
}

fn with_tree(p: Params, t: TreeArg) -> Params {
    Params { tree: t.tree, depth: t.depth, ..p }
}

fn with_grid(p: Params, g: GridArgs) -> Params {
    Params { gamma_grid: g.gamma_grid, depths: g.depths, threshold: g.threshold, ..p }
}

/// Merged experiment and output settings.
fn resolve(cmd: Command) -> Result<(Experiment, Option<PathBuf>, Format), CliError> {
    let d = Params::default();
    let (operation, params, common, base) = match cmd {
        Command::GenTree { tree, common } => (Operation::GenTree, with_tree(d, tree), common, None),
        Command::ComputePsi { tree, env, edge_depth, common } => {
            (Operation::ComputePsi, with_tree(Params { env: env.env, edge_depth, ..d }, tree), common, None)
        }
        Command::Simulate { tree, env, trials, steps, hit_depth, returns, rubin, common } => {
            let p = Params { env: env.env, trials, steps, hit_depth, returns, rubin: rubin.then_some(true), ..d };
            (Operation::Simulate, with_tree(p, tree), common, None)
        }
        Command::Percolate { tree, env, trials, edge_depth, samples, common } => (
            Operation::Percolate,
            with_tree(Params { env: env.env, trials, edge_depth, samples, ..d }, tree),
            common,
            None,
        ),
        Command::EstimateBr { tree, grid, common } => {
            (Operation::EstimateBr, with_grid(with_tree(d, tree), grid), common, None)
        }
        Command::EstimateRt { tree, env, grid, common } => {
            (Operation::EstimateRt, with_grid(with_tree(Params { env: env.env, ..d }, tree), grid), common, None)
        }
        Command::FlowCheck { tree, env, gamma, depths, common } => {
            (Operation::FlowCheck, with_tree(Params { env: env.env, gamma, depths, ..d }, tree), common, None)
        }
        Command::PhaseScan { tree, env, trials, escape_depth, horizon, returns, epsilon, grid, common } => {
            let p = Params { env: env.env, trials, escape_depth, horizon, returns, epsilon, ..d };
            (Operation::PhaseScan, with_grid(with_tree(p, tree), grid), common, None)
        }
        Command::Gambler { mu, start, trials, common } => {
            (Operation::Gambler, Params { mu, start, trials, ..d }, common, None)
        }
        Command::Concentration { tree, env, epsilon, depths, trials, common } => {
            let p = Params { env: env.env, epsilon, depths, trials, ..d };
            (Operation::Concentration, with_tree(p, tree), common, None)
        }
        Command::Run { config, tree, env, trials, gamma_grid, epsilon, common } => {
            let file = ConfigFile::load(&config)?;
            let p = with_tree(Params { env: env.env, trials, gamma_grid, epsilon, ..d }, tree);
            (file.experiment.operation, p, common, Some(file))
        }
    };
    let (params, seed, out_dir, format) = match base {
        Some(file) => (
            file.params.overlay(params),
            common.seed.unwrap_or(file.experiment.seed),
            common.out_dir.or(file.output.out_dir),
            common.format.or(file.output.format),
        ),
        None => (params, common.seed.unwrap_or(0), common.out_dir, common.format),
    };
    Ok((Experiment { operation, seed, params }, out_dir, format.unwrap_or_default()))
}

fn threads_from_env() -> Result<(), CliError> {
    let Ok(v) = std::env::var("GOERW_THREADS") else {
        return Ok(());
    };
    let n: usize = v.parse().ok().filter(|&n| n > 0).ok_or_else(|| CliError::Usage {
        key: "GOERW_THREADS".into(),
        msg: format!("expected a positive integer, got `{v}`"),
    })?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Io(e.to_string()))
}

fn real_main(cli: Cli) -> Result<(), CliError> {
    threads_from_env()?;
    let (exp, out_dir, format) = resolve(cli.command)?;
    let report = ops::execute(&exp)?;
    for path in output::emit(&exp, &report, out_dir.as_deref(), format)? {
        eprintln!("wrote {}", path.display());
    }
    if let Some(v) = &report.verdict {
        eprintln!("verdict: {v}");
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match real_main(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("goerw: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
