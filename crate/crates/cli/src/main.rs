//! `dmrank`: score, rank, select and audit decision-makers by disparity and
//! uncertainty.

mod commands;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dmrank_core::report::DEFAULT_PRECISION;
use dmrank_core::{Flavor, UtilityKind};

#[derive(Debug, Parser)]
#[command(
    name = "dmrank",
    version,
    about = "Rank decision-makers by disparity and its Bayesian uncertainty"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Csv)]
    pub format: Format,

    /// Decimal places in rendered numbers.
    #[arg(long, global = true, default_value_t = DEFAULT_PRECISION)]
    pub precision: usize,

    /// Write to this file instead of standard output.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DisparityArg {
    Frequentist,
    Bayesian,
}

impl From<DisparityArg> for Flavor {
    fn from(d: DisparityArg) -> Self {
        match d {
            DisparityArg::Frequentist => Flavor::Frequentist,
            DisparityArg::Bayesian => Flavor::Bayesian,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UtilityArg {
    Topsis,
    Norm,
}

impl From<UtilityArg> for UtilityKind {
    fn from(u: UtilityArg) -> Self {
        match u {
            UtilityArg::Topsis => UtilityKind::Topsis,
            UtilityArg::Norm => UtilityKind::Norm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CriterionArg {
    StatisticalParity,
    EqualOpportunity,
    PredictiveParity,
}

#[derive(Debug, Clone, Args)]
pub struct Scoring {
    /// Disparity estimate.
    #[arg(long, value_enum, default_value_t = DisparityArg::Frequentist)]
    pub disparity: DisparityArg,

    /// Utility function used for ordering.
    #[arg(long, value_enum, default_value_t = UtilityArg::Topsis)]
    pub utility: UtilityArg,
}

#[derive(Debug, Clone, Args)]
pub struct InputFile {
    /// Delimited text file with a header row; `-` reads standard input.
    pub file: PathBuf,

    /// Tab-delimited input.
    #[arg(long)]
    pub tab: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score one decision-maker from the counts of two groups.
    Score {
        n_i: u64,
        k_i: u64,
        n_j: u64,
        k_j: u64,
        #[arg(long, value_enum, default_value_t = DisparityArg::Frequentist)]
        disparity: DisparityArg,
        /// Posterior mass of the reported credible intervals.
        #[arg(long, default_value_t = 0.95)]
        mass: f64,
    },
    /// Rank decision-makers listed as `label,n_i,k_i,n_j,k_j` rows.
    Rank {
        #[command(flatten)]
        input: InputFile,
        #[command(flatten)]
        scoring: Scoring,
        /// Numeric column ordering utility ties, higher first (e.g. accuracy).
        #[arg(long)]
        tie_key: Option<String>,
    },
    /// Print the decision-maker with the highest utility.
    Select {
        #[command(flatten)]
        input: InputFile,
        #[command(flatten)]
        scoring: Scoring,
    },
    /// Audit a file of outcomes or predictions under a fairness criterion.
    Audit {
        #[command(flatten)]
        input: InputFile,
        #[command(flatten)]
        scoring: Scoring,
        #[arg(long, value_enum)]
        criterion: CriterionArg,
        /// Cell value of the favorable outcome.
        #[arg(long)]
        favorable: String,
        /// Protected attribute column.
        #[arg(long, default_value = "group")]
        group_col: String,
        /// Ground-truth outcome column.
        #[arg(long, default_value = "outcome")]
        outcome_col: String,
        /// Prediction column.
        #[arg(long)]
        pred_col: Option<String>,
        /// Name of the audited decision-maker.
        #[arg(long, default_value = "decision-maker")]
        label: String,
    },
    /// Generate the exhaustive synthetic population of decision-makers.
    Synth {
        #[command(flatten)]
        scoring: Scoring,
        /// Group sizes, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [1u64, 5, 10, 50])]
        sizes: Vec<u64>,
        /// Only emit this many top and bottom ranked rows.
        #[arg(long)]
        extremes: Option<usize>,
    },
    /// Posterior density samples and credible interval for one group.
    Posterior {
        n: u64,
        k: u64,
        #[arg(long, default_value_t = 0.95)]
        mass: f64,
        /// Evenly spaced points on [0, 1].
        #[arg(long, default_value_t = 101)]
        samples: usize,
    },
    /// Points of the TOPSIS indifference curve at a utility level.
    Indiff {
        #[arg(allow_negative_numbers = true)]
        target: f64,
        /// Evenly spaced uncertainty values on [0, 1].
        #[arg(long, default_value_t = 101)]
        samples: usize,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut out: Box<dyn Write> = match &cli.output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let ctx = output::Ctx {
        format: cli.format,
        precision: cli.precision,
    };
    commands::dispatch(&cli.command, ctx, &mut out)?;
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
