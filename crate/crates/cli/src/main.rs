mod cli;
mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;

use nspg_core::adapter::AdapterError;
use nspg_core::classify::ClassifyError;
use nspg_core::extract::ExtractError;
use nspg_core::formalize::FormalizeError;

use cli::{Cli, Command};
use commands::RuntimeFailure;
use config::RunConfig;

/// 2 for adapter and output failures, 1 for everything the user can fix in
/// the inputs.
fn exit_code(err: &anyhow::Error) -> u8 {
    let runtime = err.chain().any(|e| {
        e.is::<RuntimeFailure>()
            || e.is::<AdapterError>()
            || matches!(e.downcast_ref::<ClassifyError>(), Some(ClassifyError::Adapter(_)))
            || matches!(e.downcast_ref::<FormalizeError>(), Some(FormalizeError::Adapter(_)))
            || matches!(e.downcast_ref::<ExtractError>(), Some(ExtractError::Partial { .. }))
    });
    if runtime {
        2
    } else {
        1
    }
}

/// The error chain joined with ": ", skipping causes already quoted by the
/// message that wraps them.
fn message(err: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if out.contains(&text) {
            continue;
        }
        if !out.is_empty() {
            out.push_str(": ");
        }
        out.push_str(&text);
    }
    out
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let lexicon = || cfg.lexicon();
    match &cli.command {
        Command::Ingest(a) => commands::ingest(&cfg, a),
        Command::Split(a) => commands::split(&cfg, a),
        Command::Augment(a) => commands::augment(&cfg, &lexicon()?, a),
        Command::Formalize(a) => commands::formalize(&cfg, &lexicon()?, a),
        Command::Train(a) => commands::train(&cfg, &lexicon()?, a),
        Command::Eval(a) => commands::eval(&cfg, &lexicon()?, a),
        Command::Extract(a) => commands::extract(&cfg, a),
        Command::Coverage(a) => commands::coverage(&cfg, a),
        Command::Assertgen(a) => commands::assertgen(&cfg, &lexicon()?, a),
        Command::Report(a) => commands::report(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", message(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
