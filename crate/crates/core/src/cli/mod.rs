//! Command-line workflows: feature extraction, training, synthesis, mixing,
//! inference and evaluation.
//!
//! Every command resolves a [`RunConfig`] from built-in defaults, an
//! optional `--config` JSON file and its own flags, in increasing order of
//! precedence, and writes the effective configuration next to its outputs.

mod args;
mod commands;
mod config;

pub use args::{Cli, Command, CommonArgs, EvalArgs, InferArgs, MfccArgs, MixArgs, SynthArgs, TrainArgs};
pub use commands::{cmd_eval, cmd_infer, cmd_mfcc, cmd_mix, cmd_synth, cmd_train, Summary};
pub use config::{EvalSettings, MixSettings, RunConfig};

use crate::error::{Error, Result};

/// Runs a parsed command line and returns the text to print.
pub fn run(cli: &Cli) -> Result<Summary> {
    let cfg = RunConfig::resolve(&cli.common)?;
    let verify = cli.common.check;
    let dispatch = || match &cli.command {
        Command::Mfcc(a) => cmd_mfcc(a, &cfg, verify),
        Command::Train(a) => cmd_train(a, &cfg, verify),
        Command::Synth(a) => cmd_synth(a, &cfg, verify),
        Command::Mix(a) => cmd_mix(a, &cfg, verify),
        Command::Infer(a) => cmd_infer(a, &cfg, verify),
        Command::Eval(a) => cmd_eval(a, &cfg, verify),
    };
    match cli.common.jobs {
        None => dispatch(),
        Some(0) => Err(Error::InvalidArgument("--jobs must be >= 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?
            .install(dispatch),
    }
}
