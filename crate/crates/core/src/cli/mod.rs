//! Command-line front end.
//!
//! Every subcommand reads an optional flat JSON config (`--config`) and
//! applies its flags on top. Failures print a single line
//! `error: <code>: <message>` to stderr and exit nonzero.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{run, BUILD_ID};
pub use config::RunConfig;

use crate::error::Error;
use crate::metrics::Normalization;

#[derive(Debug, Parser)]
#[command(
    name = "dircomm",
    version,
    about = "Community types in two-group directed networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the rewiring dynamics and compare the long-time densities with the
    /// mean-field prediction.
    Simulate(SimulateArgs),
    /// Print the mean-field equilibrium as JSON.
    Meanfield(MeanfieldArgs),
    /// Classify a density matrix or an edge-list graph.
    Classify(ClassifyArgs),
    /// Classify a grid over the assortative-preference plane.
    Phase(PhaseArgs),
    /// Critical swap probability below which every preference pair is source-basin.
    Psstar(PsstarArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Flat JSON config; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to one per core.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub jobs: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub p_swap0: Option<f64>,
    #[arg(long)]
    pub p_swap1: Option<f64>,
    #[arg(long)]
    pub p_assort0: Option<f64>,
    #[arg(long)]
    pub p_assort1: Option<f64>,
    #[arg(long)]
    pub alpha0: Option<f64>,
    #[arg(long)]
    pub alpha1: Option<f64>,
    #[arg(long)]
    pub p_remove0: Option<f64>,
    #[arg(long)]
    pub p_remove1: Option<f64>,
    #[arg(long)]
    pub n0: Option<usize>,
    #[arg(long)]
    pub n1: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Sweeps of `N` steps each.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub sweeps: Option<u64>,
    /// Sweeps between recorded samples.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub sample_every: Option<u64>,
    /// Independent replicas; replica `i` uses seed `seed + i`.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub replicas: Option<u64>,
    /// Trailing fraction of the run averaged in the summary.
    #[arg(long)]
    pub window: Option<f64>,
    /// Edge probability of the initial Erdős–Rényi graph.
    #[arg(long)]
    pub q: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct MeanfieldArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, requires_all = ["w01", "w10", "w11"])]
    pub w00: Option<f64>,
    #[arg(long, requires_all = ["w00", "w10", "w11"])]
    pub w01: Option<f64>,
    #[arg(long, requires_all = ["w00", "w01", "w11"])]
    pub w10: Option<f64>,
    #[arg(long, requires_all = ["w00", "w01", "w10"])]
    pub w11: Option<f64>,
    /// JSON file holding `[[w00, w01], [w10, w11]]` or an object with an
    /// `omega` or `w` field of that shape.
    #[arg(long)]
    pub omega_file: Option<PathBuf>,
    /// Edge-list snapshot to measure.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Density normalization for `--graph`.
    #[arg(long, value_enum)]
    pub normalization: Option<NormArg>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum NormArg {
    PossiblePairs,
    PossiblePairsLargeN,
    DegreeProduct,
}

impl From<NormArg> for Normalization {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::PossiblePairs => Normalization::PossiblePairs,
            NormArg::PossiblePairsLargeN => Normalization::PossiblePairsLargeN,
            NormArg::DegreeProduct => Normalization::DegreeProduct,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct PhaseArgs {
    #[command(flatten)]
    pub common: Common,
    /// Degree ratio `z_0 / z_1`.
    #[arg(long)]
    pub b: Option<f64>,
    /// Size ratio `N_0 / N_1`.
    #[arg(long)]
    pub c: Option<f64>,
    /// Swap probability of a plane; repeat for several planes.
    #[arg(long = "p-swap")]
    pub p_swap: Vec<f64>,
    #[arg(long)]
    pub p_remove: Option<f64>,
    /// Cells per axis.
    #[arg(long)]
    pub resolution: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct PsstarArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    /// Bracket width at which bisection stops.
    #[arg(long)]
    pub tol: Option<f64>,
}

impl Common {
    fn flags(&self) -> RunConfig {
        RunConfig {
            out: self.out.clone(),
            seed: self.seed,
            jobs: self.jobs.map(|j| j as usize),
            ..Default::default()
        }
    }
}

impl ModelArgs {
    fn apply(&self, c: RunConfig) -> RunConfig {
        RunConfig {
            p_swap0: self.p_swap0,
            p_swap1: self.p_swap1,
            p_assort0: self.p_assort0,
            p_assort1: self.p_assort1,
            alpha0: self.alpha0,
            alpha1: self.alpha1,
            p_remove0: self.p_remove0,
            p_remove1: self.p_remove1,
            n0: self.n0,
            n1: self.n1,
            ..c
        }
    }
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Simulate(a) => &a.common,
            Command::Meanfield(a) => &a.common,
            Command::Classify(a) => &a.common,
            Command::Phase(a) => &a.common,
            Command::Psstar(a) => &a.common,
        }
    }

    /// Settings given on the command line.
    pub fn flags(&self) -> RunConfig {
        match self {
            Command::Simulate(a) => RunConfig {
                sweeps: a.sweeps,
                sample_every: a.sample_every,
                replicas: a.replicas.map(|r| r as usize),
                window: a.window,
                q: a.q,
                ..a.model.apply(a.common.flags())
            },
            Command::Meanfield(a) => a.model.apply(a.common.flags()),
            Command::Classify(a) => RunConfig {
                omega: a
                    .w00
                    .map(|w00| [[w00, a.w01.unwrap()], [a.w10.unwrap(), a.w11.unwrap()]]),
                omega_file: a.omega_file.clone(),
                graph: a.graph.clone(),
                normalization: a.normalization.map(Into::into),
                ..a.common.flags()
            },
            Command::Phase(a) => RunConfig {
                b: a.b,
                c: a.c,
                p_swap: (!a.p_swap.is_empty()).then(|| a.p_swap.clone()),
                p_remove: a.p_remove,
                resolution: a.resolution,
                ..a.common.flags()
            },
            Command::Psstar(a) => RunConfig {
                b: a.b,
                c: a.c,
                tol: a.tol,
                ..a.common.flags()
            },
        }
    }

    /// Config file entries overlaid with the command-line flags.
    pub fn resolve(&self) -> crate::Result<RunConfig> {
        let file = match &self.common().config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        file.overlay(self.flags())
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            let msg = e.kind().to_string();
            let detail = e
                .to_string()
                .lines()
                .next()
                .unwrap_or_default()
                .trim_start_matches("error: ")
                .to_string();
            report(&Error::Usage(if detail.is_empty() { msg } else { detail }));
            return 2;
        }
    };
    match run(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            report(&e);
            if matches!(e, Error::Usage(_)) {
                2
            } else {
                1
            }
        }
    }
}

fn report(e: &Error) {
    let msg = e.to_string().replace('\n', " ");
    eprintln!("error: {}: {msg}", e.code());
}
