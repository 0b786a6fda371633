//! `nrr` — command-line surface of the readability ranking toolkit.
//!
//! Logging goes to standard error; results go to standard output or the
//! `--out` file, never mixed. Exit codes: 0 success, 1 internal error or
//! failed check, 2 usage, 3 missing file/resource, 4 schema mismatch,
//! 5 malformed data.

mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nrr_core::Error;

use settings::Settings;

#[derive(Parser)]
#[command(
    name = "nrr",
    version,
    about = "Readability ranking toolkit: lexicon construction, pairwise word/phrase complexity, paraphrase-rule scoring, and complex word identification"
)]
struct Cli {
    /// TOML config file with default values for any flag (flags win)
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Aggregate raw annotator ratings into a complexity lexicon
    BuildLexicon(commands::BuildLexiconArgs),
    /// Train the n-gram language model on a token corpus
    TrainLm(commands::TrainLmArgs),
    /// Train a ranking model for a task
    Train(commands::TrainArgs),
    /// Rank substitution candidates with a trained model
    Rank(commands::RankArgs),
    /// Score a paraphrase-rule file (strict parsing, small files)
    ClassifyPpdb(commands::ClassifyPpdbArgs),
    /// Stream a full rule database into a scored resource (resumable)
    BuildSimpleppdb(commands::BuildSimpleppdbArgs),
    /// Generate ranked substitution candidates for a target
    Generate(commands::GenerateArgs),
    /// Train and evaluate a complex-word-identification classifier
    Cwi(commands::CwiArgs),
    /// Compute evaluation metrics from prediction and gold files
    Eval(commands::EvalArgs),
    /// Verify backprop gradients against finite differences
    Gradcheck(commands::GradcheckArgs),
}

fn error_kind(e: &Error) -> (&'static str, u8) {
    match e {
        Error::Io { .. } | Error::MissingResource(_) => ("missing-resource", 3),
        Error::SchemaMismatch { .. } => ("schema-mismatch", 4),
        Error::Parse { .. } | Error::CorruptFile { .. } => ("bad-data", 5),
        _ => ("error", 1),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();

    let settings = match Settings::load(cli.config.as_deref()) {
        Ok(s) => s,
        Err(e) => {
            let (kind, code) = error_kind(&e);
            eprintln!("error: code={code} kind={kind} msg={e}");
            return ExitCode::from(code);
        }
    };

    let outcome = match cli.command {
        Command::BuildLexicon(args) => commands::build_lexicon(args, &settings),
        Command::TrainLm(args) => commands::train_lm(args, &settings),
        Command::Train(args) => commands::train(args, &settings),
        Command::Rank(args) => commands::rank(args, &settings),
        Command::ClassifyPpdb(args) => commands::classify_ppdb(args, &settings),
        Command::BuildSimpleppdb(args) => commands::build_simpleppdb(args, &settings),
        Command::Generate(args) => commands::generate(args, &settings),
        Command::Cwi(args) => commands::cwi(args, &settings),
        Command::Eval(args) => commands::eval(args, &settings),
        Command::Gradcheck(args) => commands::gradcheck(args, &settings),
    };

    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let (kind, code) = error_kind(&e);
            eprintln!("error: code={code} kind={kind} msg={e}");
            ExitCode::from(code)
        }
    }
}
