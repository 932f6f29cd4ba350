//! Command-line arguments.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use reclogit_core::ModelKind;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(
    name = "reclogit",
    version,
    about = "Recursive logit route choice: estimation, evaluation, flows and counterfactual link removal",
    after_help = "Exit codes: 0 success, 2 input error (files, flags, configuration), \
                  3 numerical failure (singular value system, divergence, unreachable destination).\n\
                  Logging: RECLOGIT_LOG=error|warn|info|debug (default info) on standard error."
)]
pub struct Cli {
    /// Directory for outputs and the run manifest.
    #[arg(long, global = true, default_value = "reclogit-out")]
    pub out: PathBuf,
    /// Seed for every random choice (default 42, or the configuration's seed).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for value solves (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model by penalised maximum likelihood.
    Estimate(EstimateArgs),
    /// Log-likelihood, ACP, JSD and BLEU of fitted parameters.
    Evaluate(EvaluateArgs),
    /// Expected link flows and choice probabilities for one OD pair.
    ///
    /// Flows are written raw; for maps of flow concentration plot
    /// log(1 + 10000·F).
    Flow(FlowArgs),
    /// Most probable (greedy) route for each OD pair.
    Predict(PredictArgs),
    /// Fit RL, Res-RL and ResDGCN-RL on the built-in seven-node example and
    /// compare with the published tables.
    ReproduceToy,
    /// Write the normalised link proximity matrices as CSV.
    ExportProximities(ProximityArgs),
    /// Write the built-in example as network, trajectory and configuration
    /// files.
    ExportToy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Rl,
    Lsrl,
    Nrl,
    Resrl,
    Resdgcnrl,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Rl => ModelKind::Rl,
            ModelArg::Lsrl => ModelKind::LsRl,
            ModelArg::Nrl => ModelKind::Nrl,
            ModelArg::Resrl => ModelKind::ResRl,
            ModelArg::Resdgcnrl => ModelKind::ResDgcnRl,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    All,
    Train,
    Validation,
    Test,
}

#[derive(Debug, Args)]
pub struct NetworkArgs {
    /// Link table: link_id,tail_node,head_node,<attribute columns>.
    #[arg(long)]
    pub network: PathBuf,
    /// Optional node list (node_id column); links naming other nodes are
    /// rejected.
    #[arg(long)]
    pub nodes: Option<PathBuf>,
    /// Close these links (by id) before doing anything else.
    #[arg(long = "remove", value_name = "LINK_ID")]
    pub remove: Vec<String>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub net: NetworkArgs,
    /// Trajectories: traj_id,seq,link_id[,split] or traj_id,links[,split].
    #[arg(long)]
    pub trajs: PathBuf,
    /// Run configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    /// Earlier fit whose coefficients seed this one (for example an RL fit
    /// before a hybrid model).
    #[arg(long)]
    pub params: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub net: NetworkArgs,
    #[arg(long)]
    pub trajs: PathBuf,
    #[arg(long)]
    pub config: PathBuf,
    /// Fitted parameters (JSON).
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    /// Which trajectories to score.
    #[arg(long, value_enum, default_value = "all")]
    pub split: SplitArg,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    #[command(flatten)]
    pub net: NetworkArgs,
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    /// Origin link id.
    #[arg(long)]
    pub origin: String,
    /// Destination link id.
    #[arg(long)]
    pub destination: String,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub net: NetworkArgs,
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    /// CSV with origin,destination link ids.
    #[arg(long, conflicts_with_all = ["origin", "destination"])]
    pub ods: Option<PathBuf>,
    #[arg(long, requires = "destination")]
    pub origin: Option<String>,
    #[arg(long, requires = "origin")]
    pub destination: Option<String>,
    /// Step cap for route generation (default twice the link count).
    #[arg(long)]
    pub max_steps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ProximityArgs {
    #[command(flatten)]
    pub net: NetworkArgs,
}
