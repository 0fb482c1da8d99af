//! `scenetree` command-line front-end.

mod convert;
mod eval;
mod io;
mod records;
mod sample;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use scenetree::eval::EvalMode;

#[derive(Parser)]
#[command(
    name = "scenetree",
    version,
    about = "Evaluate, convert and curate hierarchical scene parses"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Object,
    Scene,
}

impl From<Mode> for EvalMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Object => EvalMode::Object,
            Mode::Scene => EvalMode::Scene,
        }
    }
}

/// How prediction lines are encoded.
#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PredFormat {
    /// Dataset records, same schema as the ground truth.
    Dataset,
    /// `{"image_id", "output"}` lines carrying raw model text.
    Serialized,
    /// Flat triplet documents with an `image_id`.
    Flat,
}

#[derive(Subcommand)]
enum Command {
    /// Score predictions against ground truth at one or more IoU thresholds.
    Eval {
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long, value_enum, default_value = "scene")]
        mode: Mode,
        /// Comma-separated IoU thresholds.
        #[arg(long, value_delimiter = ',', default_value = "0.5")]
        iou: Vec<f64>,
        #[arg(long, value_enum, default_value = "dataset")]
        pred_format: PredFormat,
        /// Reject malformed prediction lines instead of skipping or repairing them.
        #[arg(long)]
        strict: bool,
        /// JSON report path; a text table is written next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Group flat triplets into hierarchy records.
    Convert {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Image size for documents that carry none.
        #[arg(long, requires = "height")]
        width: Option<u32>,
        #[arg(long, requires = "width")]
        height: Option<u32>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Expand hierarchy records into flat triplets.
    Flatten {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check records against the structural rules.
    Validate {
        #[arg(long = "in")]
        input: PathBuf,
        /// Treat warnings as errors.
        #[arg(long)]
        strict: bool,
        #[arg(long, default_value_t = 0.95)]
        containment_min: f64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Attach affordance annotations to scenes, then clean them.
    Reconstruct {
        #[arg(long)]
        scenes: PathBuf,
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = 0.95)]
        containment_min: f64,
        #[arg(long, default_value_t = 0.9)]
        dup_iou: f64,
        #[arg(long, default_value_t = 0.0)]
        min_confidence: f64,
    },
    /// Fill missing levels with placeholder parts and affordances.
    Complete {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write curriculum training manifests.
    Sample {
        /// Id list: one id per line, or dataset JSONL.
        #[arg(long)]
        nonpseudo: PathBuf,
        #[arg(long)]
        pseudo: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        stage: u8,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Only this epoch; by default every epoch of the stage.
        #[arg(long)]
        epoch: Option<u32>,
        /// TOML file overriding the stage table.
        #[arg(long)]
        stages_config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Corpus statistics.
    Stats {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 30)]
        top_k: usize,
        /// JSON report path; a text table is written next to it.
        #[arg(long)]
        out: PathBuf,
    },
}

/// Ok(false) means the command ran but found hard errors in its input.
fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Eval {
            gt,
            pred,
            mode,
            iou,
            pred_format,
            strict,
            out,
        } => eval::run(&eval::Args {
            gt,
            pred,
            mode: mode.into(),
            thresholds: iou,
            pred_format,
            strict,
            out,
        }),
        Command::Convert {
            input,
            out,
            width,
            height,
            report,
        } => convert::convert(&input, &out, width.zip(height), report.as_deref()),
        Command::Flatten { input, out } => convert::flatten(&input, &out),
        Command::Validate {
            input,
            strict,
            containment_min,
            report,
        } => records::validate(&input, strict, containment_min, report.as_deref()),
        Command::Reconstruct {
            scenes,
            annotations,
            out,
            report,
            containment_min,
            dup_iou,
            min_confidence,
        } => records::reconstruct(
            &scenes,
            &annotations,
            &out,
            report.as_deref(),
            scenetree::qc::QcConfig {
                containment_min,
                dup_iou,
                min_confidence,
            },
        ),
        Command::Complete { input, out } => records::complete(&input, &out),
        Command::Sample {
            nonpseudo,
            pseudo,
            stage,
            n,
            seed,
            epoch,
            stages_config,
            out,
        } => sample::run(&sample::Args {
            nonpseudo,
            pseudo,
            stage,
            n,
            seed,
            epoch,
            stages_config,
            out,
        }),
        Command::Stats { input, top_k, out } => records::stats(&input, top_k, &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SCENETREE_LOG", "warn"))
        .format_timestamp(None)
        .init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
