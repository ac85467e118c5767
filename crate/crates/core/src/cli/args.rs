use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::eval::InitCondition;
use crate::lvem::DecodePolicy;
use crate::mixer::{SynthMode, TaskSelection};
use crate::models::Family;

#[derive(Debug, Parser)]
#[command(
    name = "spkw",
    version,
    about = "Detect which known speakers said which known keywords in a mixture"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct CommonArgs {
    /// JSON run configuration; command-line flags take precedence over it.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Global seed; replaces every seed in the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    /// Verify output invariants and fail if any does not hold.
    #[arg(long, global = true)]
    pub check: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract MFCC + delta + acceleration features from a mono WAV file.
    Mfcc(MfccArgs),
    /// Train one density model per (speaker, keyword) cell of a corpus.
    Train(TrainArgs),
    /// Generate a synthetic corpus.
    Synth(SynthArgs),
    /// Build the two-speaker evaluation mixtures of a corpus.
    Mix(MixArgs),
    /// Detect speakers and keywords in one mixture.
    Infer(InferArgs),
    /// Leave-one-out evaluation producing result tables.
    Eval(EvalArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct MfccArgs {
    /// Input WAV file (mono, 16-bit PCM).
    pub input: PathBuf,
    /// Output feature file.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    /// Corpus manifest (JSON) listing WAV or feature files.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Model family: gmm or tmm.
    #[arg(long)]
    pub family: Option<Family>,
    /// Mixture components per model.
    #[arg(long)]
    pub components: Option<usize>,
    /// Output bank JSON.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    /// feature or waveform.
    #[arg(long)]
    pub mode: Option<SynthMode>,
    /// Number of speakers.
    #[arg(long = "M", visible_alias = "speakers")]
    pub speakers: Option<usize>,
    /// Number of keywords.
    #[arg(long = "N", visible_alias = "keywords")]
    pub keywords: Option<usize>,
    /// Utterances per (speaker, keyword) cell.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Feature dimension (feature mode).
    #[arg(long)]
    pub dim: Option<usize>,
    /// Output directory.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct MixArgs {
    /// Corpus manifest to draw utterances from.
    #[arg(long)]
    pub corpus: PathBuf,
    /// all, mspdkw or mspskw.
    #[arg(long)]
    pub tasks: Option<TaskSelection>,
    /// Use the first M speakers of the corpus.
    #[arg(long = "M", visible_alias = "speakers")]
    pub speakers: Option<usize>,
    /// Use the first N keywords of the corpus.
    #[arg(long = "N", visible_alias = "keywords")]
    pub keywords: Option<usize>,
    /// Repetition index of the utterances to mix.
    #[arg(long, default_value_t = 0)]
    pub utterance: usize,
    /// Target relative power ratio in dB.
    #[arg(long, allow_hyphen_values = true)]
    pub rpr: Option<f64>,
    /// Minimum overlap as a fraction of the shorter utterance.
    #[arg(long)]
    pub min_overlap: Option<f64>,
    /// Output directory.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct InferArgs {
    /// Mixture as WAV or feature file.
    pub input: PathBuf,
    /// Trained bank JSON.
    #[arg(long)]
    pub bank: PathBuf,
    /// Known active speakers, as labels or 1-based indices.
    #[arg(long, value_delimiter = ',', conflicts_with = "oracle_keywords")]
    pub oracle_speakers: Vec<String>,
    /// Known spoken keywords, as labels or 1-based indices.
    #[arg(long, value_delimiter = ',')]
    pub oracle_keywords: Vec<String>,
    /// known:<M*> or threshold:<tau>.
    #[arg(long)]
    pub policy: Option<DecodePolicy>,
    /// Report JSON; printed to stdout when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    /// Corpus manifest.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Comma-separated model families.
    #[arg(long, value_delimiter = ',')]
    pub families: Vec<Family>,
    /// Comma-separated init conditions: flat, oracle-spid, oracle-kwid.
    #[arg(long, value_delimiter = ',')]
    pub inits: Vec<InitCondition>,
    /// all, mspdkw or mspskw.
    #[arg(long)]
    pub tasks: Option<TaskSelection>,
    /// Comma-separated held-out repetition indices.
    #[arg(long, value_delimiter = ',')]
    pub folds: Vec<usize>,
    /// Seeded subsample of at most this many tasks per kind.
    #[arg(long)]
    pub max_tasks: Option<usize>,
    /// known:<M*> or threshold:<tau>.
    #[arg(long)]
    pub policy: Option<DecodePolicy>,
    /// Output directory.
    #[arg(short, long)]
    pub output: PathBuf,
}
