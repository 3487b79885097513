mod commands;
mod error;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use toxgate_core::stats::LengthUnit;

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "toxgate", version, about = "Six-label toxic comment classifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Split a labelled CSV, train all six heads, save the bundle and report
    /// held-out metrics.
    Train(TrainArgs),
    /// Score a saved bundle against a labelled CSV.
    Evaluate(EvaluateArgs),
    /// Predict the six flags for one text or a CSV of comments.
    Predict(PredictArgs),
    /// Freedman-Diaconis histogram of comment lengths.
    Stats(StatsArgs),
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Labelled CSV (id, comment_text and the six label columns).
    #[arg(long)]
    pub data: PathBuf,
    /// Directory to write the model bundle to.
    #[arg(long)]
    pub out: PathBuf,
    /// JSON file with default settings; flags given here override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fraction of rows used for training.
    #[arg(long)]
    pub split: Option<f64>,
    /// Worker threads for training the heads.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Depth cap for the tree heads (unlimited when absent).
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub min_samples_split: Option<usize>,
    #[arg(long)]
    pub svm_c: Option<f64>,
    /// Epochs for the SVM heads.
    #[arg(long)]
    pub svm_iters: Option<usize>,
    /// Stop SVM training once an epoch improves the objective by less than this.
    #[arg(long)]
    pub svm_tolerance: Option<f64>,
    #[arg(long)]
    pub smooth_idf: bool,
    #[arg(long)]
    pub l2_normalize: bool,
    /// Train severe_toxic only on rows labelled toxic.
    #[arg(long)]
    pub gated_training: bool,
    /// Keep letter case when tokenizing.
    #[arg(long)]
    pub no_lowercase: bool,
    /// Stopword list, one word per line (replaces the built-in list).
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Lemmatizer rule table (replaces the built-in rules).
    #[arg(long)]
    pub lemma_rules: Option<PathBuf>,
    /// Also write the held-out metrics as CSV.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Metrics CSV to write.
    #[arg(long)]
    pub report: PathBuf,
    /// Directory for per-label ROC CSVs (`<label>_roc.csv`).
    #[arg(long)]
    pub roc_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, required_unless_present = "file", conflicts_with = "file")]
    pub text: Option<String>,
    /// CSV with `id` and `comment_text` columns.
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Where to write predictions (standard output when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// `chars` or `tokens`.
    #[arg(long, default_value = "chars", value_parser = parse_unit)]
    pub unit: LengthUnit,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_unit(s: &str) -> Result<LengthUnit, String> {
    s.parse().map_err(|e: toxgate_core::Error| e.to_string())
}

fn main() -> ExitCode {
    std::panic::set_hook(Box::new(|info| {
        let msg = info
            .payload()
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| info.payload().downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "unknown panic".to_string());
        eprintln!("toxgate: internal error: {}", msg.replace('\n', " "));
    }));

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let result = std::panic::catch_unwind(|| match cli.command {
        Command::Train(args) => commands::train(args),
        Command::Evaluate(args) => commands::evaluate(args),
        Command::Predict(args) => commands::predict(args),
        Command::Stats(args) => commands::stats(args),
    });
    match result {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("toxgate: {}", e.to_string().replace('\n', " "));
            ExitCode::from(e.exit_code())
        }
        Err(_) => ExitCode::from(CliError::INTERNAL),
    }
}
