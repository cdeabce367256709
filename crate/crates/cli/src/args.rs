use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "crnrob", version, about = "Robustness analysis of mass-action reaction networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    pub format: Format,

    /// Shorthand for `--format json`.
    #[arg(long, global = true)]
    pub json: bool,

    /// Write the main output to this file instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Seed for random starts of the uniqueness probe.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Maximum number of worker threads.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    #[command(flatten)]
    pub tolerances: Tolerances,
}

impl Cli {
    pub fn wants_json(&self) -> bool {
        self.json || self.format == Format::Json
    }

    pub fn format(&self) -> Format {
        if self.json {
            Format::Json
        } else {
            self.format
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Tolerances {
    /// Scaled residual required for a converged steady state.
    #[arg(long, global = true)]
    pub final_tol: Option<f64>,
    /// Scaled residual at which integration hands over to Newton.
    #[arg(long, global = true)]
    pub switch_tol: Option<f64>,
    /// Relative change per decade below which a curve counts as flat.
    #[arg(long, global = true)]
    pub plateau_tol: Option<f64>,
    /// Tail value below which a curve counts as vanishing.
    #[arg(long, global = true)]
    pub zero_tol: Option<f64>,
    /// Log-log slope above which a curve counts as diverging.
    #[arg(long, global = true)]
    pub slope_tol: Option<f64>,
    /// Maximum number of integration steps per solve.
    #[arg(long, global = true)]
    pub max_steps: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct NetworkArgs {
    /// Network description in `.crn` format.
    pub network: PathBuf,
    /// Initial condition, e.g. `all=1,X=2`.
    #[arg(long, default_value = "all=1")]
    pub x0: String,
}

#[derive(Args, Debug, Clone)]
pub struct PairArgs {
    /// Species whose initial amount is shifted.
    #[arg(long)]
    pub input: String,
    /// Species whose steady state is reported.
    #[arg(long)]
    pub output: String,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validate a network and print its canonical form.
    Parse {
        network: PathBuf,
    },
    /// Conservation laws and, with `--x0`, their totals.
    Laws {
        network: PathBuf,
        #[arg(long)]
        x0: Option<String>,
    },
    /// Steady state reached from an initial condition.
    Steady {
        #[command(flatten)]
        net: NetworkArgs,
    },
    /// Dose-response curve of one output against shifts of one input.
    Sweep {
        #[command(flatten)]
        net: NetworkArgs,
        #[command(flatten)]
        pair: PairArgs,
        /// Geometric grid `start:stop:count`; defaults to 40 points over [0.1, 1e6] times the largest total.
        #[arg(long)]
        lambda: Option<String>,
        /// Also write the curve as CSV to this file.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write plot data with the classification as comments to this file.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Symbolic certification of one (input, output) pair.
    Certify {
        #[command(flatten)]
        net: NetworkArgs,
        #[command(flatten)]
        pair: PairArgs,
        /// Grid for the numeric cross-check, as in `sweep`.
        #[arg(long)]
        lambda: Option<String>,
    },
    /// Classification of every (input, output) pair.
    Table {
        #[command(flatten)]
        net: NetworkArgs,
        /// JSON file with parameter instances to classify and compare.
        #[arg(long)]
        instances: Option<PathBuf>,
        /// Grid for the numeric verdicts, as in `sweep`.
        #[arg(long)]
        lambda: Option<String>,
        /// Classify even when the uniqueness probe fails.
        #[arg(long)]
        skip_well_defined: bool,
    },
    /// Well-formedness, conservation and uniqueness probe.
    Check {
        #[command(flatten)]
        net: NetworkArgs,
        /// Number of random starts per input.
        #[arg(long, default_value_t = 5)]
        starts: usize,
    },
}
