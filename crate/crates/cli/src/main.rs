//! `typnet`: build models from networks, check typicality axioms, extract
//! weighted knowledge bases, decide entailment and run property suites.
//!
//! Exit status: 0 when every check passes (or the query is entailed), 1
//! when a check fails, 2 on usage or input errors and 3 when an entailment
//! search exceeds its budget.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use typnet_core::entailment::{SearchMode, DEFAULT_BUDGET};
use typnet_core::CombinationFamily;

#[derive(Parser)]
#[command(name = "typnet", version, about = "Typicality reasoning over multilayer perceptrons")]
struct Cli {
    /// Emit machine-readable JSON instead of tables.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads (verdicts and counts never depend on it).
    #[arg(long, global = true, env = "TYPNET_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a network on a stimulus set and write the interpretation.
    BuildModel(BuildModelArgs),
    /// Check typicality axioms on an interpretation.
    Check(CheckArgs),
    /// Write the weighted knowledge base of a network.
    Extract(ExtractArgs),
    /// Decide entailment from a weighted knowledge base on a finite scale.
    Entail(EntailArgs),
    /// Check whether an interpretation is a faithful, coherent or
    /// phi-coherent model of a weighted knowledge base.
    Coherence(CoherenceArgs),
    /// Run a seeded property suite.
    Fuzz(FuzzArgs),
}

#[derive(Args)]
pub struct BuildModelArgs {
    #[arg(long)]
    pub network: PathBuf,
    /// CSV with one column per input and an optional leading `id` column.
    #[arg(long)]
    pub stimuli: PathBuf,
    /// Quantize inputs and activations onto C_n.
    #[arg(long)]
    pub grade: Option<u32>,
    /// Comma-separated concept names to keep.
    #[arg(long, value_delimiter = ',')]
    pub concepts: Option<Vec<String>>,
    #[arg(long, default_value = "goedel-involutive")]
    pub family: CombinationFamily,
    /// Name anonymous units `u<id>` instead of leaving them out.
    #[arg(long)]
    pub force_names: bool,
    /// Output file (standard output when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// An axiom such as `T(E) <: F >= 3/5`; may be repeated.
    #[arg(long)]
    pub axiom: Vec<String>,
    /// A `.kb` file whose strict axioms and assertions are checked.
    #[arg(long)]
    pub axioms: Option<PathBuf>,
    /// Override the family stored in the model.
    #[arg(long)]
    pub family: Option<CombinationFamily>,
    /// Quantize the model onto C_n before checking.
    #[arg(long)]
    pub grade: Option<u32>,
    /// Sweep thresholds `k1..k2` (or a single `k`) over the model's scale.
    #[arg(long)]
    pub thresholds: Option<String>,
}

#[derive(Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub network: PathBuf,
    /// `.kb` output file (standard output when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Activation sidecar; defaults to `<out>.activations.json` next to `--out`.
    #[arg(long)]
    pub activations: Option<PathBuf>,
    #[arg(long)]
    pub force_names: bool,
}

#[derive(Args)]
pub struct EntailArgs {
    #[arg(long)]
    pub kb: PathBuf,
    /// Activation sidecar (JSON object from concept name to activation).
    #[arg(long)]
    pub activations: Option<PathBuf>,
    /// Role-free query axiom.
    #[arg(long)]
    pub axiom: String,
    #[arg(long)]
    pub grade: u32,
    #[arg(long, default_value = "acyclic-grid")]
    pub mode: SearchMode,
    /// Largest number of valuations the search may enumerate.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    #[arg(long, default_value = "goedel-involutive")]
    pub family: CombinationFamily,
    /// Counterexample valuations to report (the count is always exact).
    #[arg(long, default_value_t = 10)]
    pub max_counterexamples: usize,
    /// Enumerate every valuation instead of pruning by interval bounds.
    #[arg(long)]
    pub no_prune: bool,
    /// Extra concept names to range over.
    #[arg(long, value_delimiter = ',')]
    pub concepts: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Kind {
    Faithful,
    Coherent,
    Phi,
}

#[derive(Args)]
pub struct CoherenceArgs {
    #[arg(long)]
    pub kb: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum)]
    pub kind: Kind,
    /// Activation sidecar, required for `--kind phi`.
    #[arg(long)]
    pub activations: Option<PathBuf>,
    /// Residual tolerance for fuzzy models.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long)]
    pub family: Option<CombinationFamily>,
    /// Violations to list.
    #[arg(long, default_value_t = 10)]
    pub show: usize,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Suite {
    Klm,
    Ft,
    Hierarchy,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ThresholdArg {
    One,
    Sampled,
}

#[derive(Args)]
pub struct FuzzArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    /// Trials (networks for the hierarchy suite).
    #[arg(long, default_value_t = 10_000)]
    pub iterations: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "goedel")]
    pub family: CombinationFamily,
    /// Degrees drawn on C_n; `0` draws real degrees.
    #[arg(long, default_value_t = 10)]
    pub grade: u32,
    #[arg(long, value_enum, default_value = "one")]
    pub threshold: ThresholdArg,
    /// Add a role and role restrictions.
    #[arg(long)]
    pub roles: bool,
    /// Activation of the hierarchy networks, e.g. `logistic` or `binary-step`.
    #[arg(long, default_value = "logistic")]
    pub activation: String,
    /// Stop at the first failing trial of these properties (comma-separated).
    #[arg(long, value_delimiter = ',')]
    pub hunt: Vec<String>,
    /// Write failing trials as replayable fixtures into this directory.
    #[arg(long)]
    pub fixtures: Option<PathBuf>,
}

/// What a command concluded, mapped onto the exit status.
pub enum Verdict {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let json = cli.json;
    let r = match cli.command {
        Command::BuildModel(a) => commands::build_model(&a, json),
        Command::Check(a) => commands::check(&a, json),
        Command::Extract(a) => commands::extract(&a, json),
        Command::Entail(a) => commands::entail(&a, json),
        Command::Coherence(a) => commands::coherence(&a, json),
        Command::Fuzz(a) => commands::fuzz(&a, json),
    };
    match r {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            let budget = e
                .chain()
                .any(|c| matches!(c.downcast_ref(), Some(typnet_core::Error::BudgetExceeded { .. })));
            ExitCode::from(if budget { 3 } else { 2 })
        }
    }
}
