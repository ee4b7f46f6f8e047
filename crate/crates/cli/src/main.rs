mod args;
mod commands;
mod io;
mod provenance;

use std::process::ExitCode;

use anyhow::Result;
use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command, DetectorOpts};
use io::{require_dir, require_file, require_output};
use provenance::Provenance;

/// Exit status 1: the invocation itself is wrong (bad flags, missing files).
/// Exit status 2: the inputs could not be processed.
enum Failure {
    Usage(anyhow::Error),
    Data(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let (Failure::Usage(e) | Failure::Data(e)) = &failure;
            eprintln!("error: {e:#}");
            ExitCode::from(failure.code())
        }
    }
}

fn run(command: &Command) -> Result<(), Failure> {
    validate(command).map_err(Failure::Usage)?;
    let (name, config) = describe(command);
    let prov = Provenance::new(&name, config);
    let outcome = match command {
        Command::Aggregate(a) => commands::aggregate(a, prov),
        Command::Agreement(a) => commands::agreement(a, prov),
        Command::Detect(a) => commands::detect(a, prov),
        Command::Table(a) => commands::table(a, prov),
        Command::Train(a) => commands::train(a, prov),
        Command::Eval(a) => commands::eval(a, prov),
        Command::Score(a) => commands::score(a, prov),
        Command::Compare(a) => commands::compare(a, prov),
    };
    outcome.map_err(Failure::Data)
}

/// The subcommand name and its resolved arguments.
fn describe(command: &Command) -> (String, serde_json::Value) {
    let value = serde_json::to_value(command).expect("arguments serialize");
    value
        .as_object()
        .and_then(|o| o.iter().next())
        .map(|(k, v)| (k.clone(), v.clone()))
        .expect("externally tagged command")
}

fn validate_detector(opts: &DetectorOpts) -> Result<()> {
    require_dir(&opts.lexicons, "lexicon directory")?;
    if let Some(catalog) = &opts.catalog {
        require_file(catalog, "catalog")?;
    }
    Ok(())
}

/// Checks every path before any work starts.
fn validate(command: &Command) -> Result<()> {
    match command {
        Command::Aggregate(a) => {
            for p in &a.annotations {
                require_file(p, "annotation file")?;
            }
            require_output(&a.out)
        }
        Command::Agreement(a) => {
            for p in &a.annotations {
                require_file(p, "annotation file")?;
            }
            require_output(&a.out)
        }
        Command::Detect(a) => {
            require_file(&a.input, "input")?;
            validate_detector(&a.detector)?;
            if let Some(p) = &a.export_catalog {
                require_output(p)?;
            }
            require_output(&a.out)
        }
        Command::Table(a) => {
            require_file(&a.input, "input")?;
            require_file(&a.scores, "scores file")?;
            validate_detector(&a.detector)?;
            require_output(&a.out)
        }
        Command::Train(a) => {
            require_file(&a.input, "input")?;
            require_file(&a.scores, "scores file")?;
            validate_detector(&a.detector)?;
            require_output(&a.out)
        }
        Command::Eval(a) => {
            require_file(&a.input, "input")?;
            require_file(&a.scores, "scores file")?;
            if let (Some(t), Some(s)) = (&a.test_in, &a.test_scores) {
                require_file(t, "test input")?;
                require_file(s, "test scores file")?;
            }
            validate_detector(&a.detector)?;
            require_output(&a.out)
        }
        Command::Score(a) => {
            require_file(&a.model, "model")?;
            require_file(&a.input, "input")?;
            validate_detector(&a.detector)?;
            require_output(&a.out)
        }
        Command::Compare(a) => {
            require_file(&a.input, "input")?;
            require_file(&a.scores, "scores file")?;
            require_output(&a.out)
        }
    }
}
