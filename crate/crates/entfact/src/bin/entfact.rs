//! Batch pipeline runner.
//!
//! Usage: `entfact <subcommand> --config <file.toml> [--key.path=value ...]`
//! with subcommands ingest, build-kb, make-dataset, train, eval, stats.
//!
//! Exit codes: 0 success, 1 module error, 2 configuration/usage error.
//! Errors print a single JSON line `{"code": ..., "message": ...}` to stderr.

use std::path::PathBuf;
use std::process::ExitCode;

use entfact::pipeline::{run, PipelineConfig, PipelineError, Stage};

const USAGE: &str = "usage: entfact <ingest|build-kb|make-dataset|train|eval|stats> \
--config <file.toml> [--key.path=value ...]";

struct Args {
    stage: Stage,
    config_path: PathBuf,
    overrides: Vec<(String, String)>,
}

fn parse_args(argv: &[String]) -> Result<Args, String> {
    let mut stage = None;
    let mut config_path = None;
    let mut overrides = Vec::new();
    let mut iter = argv.iter().peekable();
    while let Some(arg) = iter.next() {
        if arg == "--config" {
            let value = iter.next().ok_or("--config requires a path")?;
            config_path = Some(PathBuf::from(value));
        } else if let Some(rest) = arg.strip_prefix("--config=") {
            config_path = Some(PathBuf::from(rest));
        } else if let Some(rest) = arg.strip_prefix("--") {
            let (key, value) = rest
                .split_once('=')
                .ok_or_else(|| format!("override `{arg}` must look like --key.path=value"))?;
            overrides.push((key.to_string(), value.to_string()));
        } else if stage.is_none() {
            stage = Some(
                Stage::parse(arg).ok_or_else(|| format!("unknown subcommand `{arg}`"))?,
            );
        } else {
            return Err(format!("unexpected argument `{arg}`"));
        }
    }
    Ok(Args {
        stage: stage.ok_or("missing subcommand")?,
        config_path: config_path.ok_or("missing --config")?,
        overrides,
    })
}

fn configure_threads() {
    if let Ok(value) = std::env::var("ENTFACT_THREADS") {
        if let Ok(n) = value.parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let args = match parse_args(&argv) {
        Ok(args) => args,
        Err(msg) => {
            let err = PipelineError::Config(format!("{msg}; {USAGE}"));
            eprintln!("{}", err.to_json_line());
            return ExitCode::from(2);
        }
    };
    configure_threads();

    let config = match PipelineConfig::load(&args.config_path, &args.overrides) {
        Ok(config) => config,
        Err(err) => {
            eprintln!("{}", err.to_json_line());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(args.stage, &config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.to_json_line());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
