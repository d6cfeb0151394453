//! `mbf`: feature extraction, detector training and evaluation, the desk
//! demo and the statistical checks, all over the crate's file formats.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mbf_core::record::AttackId;

#[derive(Debug, Parser)]
#[command(name = "mbf", version, about = "Benford-Fourier adversarial example detection")]
pub struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Activation dump (MBFA) to feature CSV.
    Extract(ExtractArgs),
    /// Fit an SVM detector on a feature CSV.
    Train(TrainArgs),
    /// Per-sample posterior and verdict.
    Detect(DetectArgs),
    /// AUROC and accuracy of a model on labelled features.
    Eval(EvalArgs),
    /// Desk-scale pipeline end to end: train the net, attack, detect, test.
    Demo(DemoArgs),
    /// Monte-Carlo check of the Rayleigh error law for one (c, n, M).
    #[command(name = "verify-theorem1")]
    VerifyTheorem1(TheoremArgs),
    /// Per-dimension two-sample KS between two groups of a feature CSV.
    Kstest(KsArgs),
    /// Per-group mean and std of every feature dimension.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// MBFA activation dump.
    #[arg(long)]
    pub input: PathBuf,
    /// Feature CSV to write.
    #[arg(long)]
    pub output: PathBuf,
    /// Harmonics per layer.
    #[arg(long, default_value_t = 16)]
    pub harmonics: usize,
    /// Use raw responses instead of centring each layer on its mean.
    #[arg(long)]
    pub no_mean_subtract: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum KernelArg {
    Rbf,
    Linear,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Labelled feature CSV; clean and noisy rows are the negative class.
    #[arg(long)]
    pub features: PathBuf,
    /// Model JSON to write.
    #[arg(long)]
    pub output: PathBuf,
    /// Soft-margin penalty.
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, value_enum, default_value_t = KernelArg::Rbf)]
    pub kernel: KernelArg,
    /// RBF width; defaults to 1/(dim·var) of the training features.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Folds for the out-of-fold Platt fit.
    #[arg(long, default_value_t = 3)]
    pub calibration_folds: usize,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Model JSON from `train`.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    /// Report JSON; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    /// Attacks to run; repeat or comma-separate.
    #[arg(long, value_delimiter = ',', default_values_t = [AttackId::Bim, AttackId::Rpgd])]
    pub attack: Vec<AttackId>,
    /// Report destination; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also write every dataset split as MBFA files here.
    #[arg(long)]
    pub dump_dir: Option<PathBuf>,
    /// Images the network is trained on.
    #[arg(long, default_value_t = 3000)]
    pub net_images: usize,
    /// In-sample images attacked for the detection sets.
    #[arg(long, default_value_t = 600)]
    pub detection_images: usize,
    /// Images from the shifted renderer, for data transfer.
    #[arg(long, default_value_t = 600)]
    pub shifted_images: usize,
    #[arg(long, default_value_t = 20)]
    pub epochs: usize,
    /// Skip data transfer to the shifted source.
    #[arg(long)]
    pub no_data_transfer: bool,
    /// Skip the hypothesis suite.
    #[arg(long)]
    pub no_hypotheses: bool,
}

#[derive(Debug, Args)]
pub struct TheoremArgs {
    /// GGD shape.
    #[arg(long)]
    pub c: f64,
    /// Harmonic index.
    #[arg(long)]
    pub n: u32,
    /// Samples per estimate.
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 2000)]
    pub trials: usize,
    /// Report JSON; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KsArgs {
    #[arg(long)]
    pub features: PathBuf,
    /// First group: `clean`, `noisy`, `adversarial` or `adversarial:<attack>`.
    #[arg(long)]
    pub a: String,
    /// Second group, same syntax.
    #[arg(long)]
    pub b: String,
    /// Restrict to these 1-based dimensions (comma-separated).
    #[arg(long, value_delimiter = ',')]
    pub dims: Vec<usize>,
    /// Report JSON; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub features: PathBuf,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("{}", commands::error_line("usage", first));
            return ExitCode::from(2);
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", commands::describe(&e));
            ExitCode::FAILURE
        }
    }
}
