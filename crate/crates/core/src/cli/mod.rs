//! Command-line interface.
//!
//! Exit codes: 0 success, 1 internal failure, 2 configuration error, 3 data
//! or model validation error, 4 degenerate query, 5 missing oracle. Data goes
//! to stdout or `--out`; human messages go to stderr.

mod bench;
mod compare;
mod explain;
mod input;
mod synth;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use leafshap::{Error, ErrorClass};

#[derive(Debug, Parser)]
#[command(name = "leafshap", version, about = "Conditional Shapley values for tree ensembles")]
struct Cli {
    /// File of `key = value` lines used as default flags for the subcommand.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Attribute predictions of a tree ensemble to its features.
    Explain(explain::ExplainArgs),
    /// Score estimators against oracle attributions.
    Compare(compare::CompareArgs),
    /// Write a fixture bundle with Monte Carlo ground truth.
    Synth(synth::SynthArgs),
    /// Time estimator and algorithm pairs on a batch.
    Bench(bench::BenchArgs),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// No ground truth is available for a comparison.
#[derive(Debug)]
pub struct MissingOracle(pub String);

impl fmt::Display for MissingOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "no oracle available: {}", self.0)
    }
}

impl std::error::Error for MissingOracle {}

pub fn run() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match with_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => return fail(&e),
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Explain(a) => explain::run(a),
        Command::Compare(a) => compare::run(a),
        Command::Synth(a) => synth::run(a),
        Command::Bench(a) => bench::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}

fn fail(e: &anyhow::Error) -> ExitCode {
    eprintln!("error: {e:#}");
    ExitCode::from(exit_code(e))
}

pub fn exit_code(e: &anyhow::Error) -> u8 {
    if e.chain().any(|c| c.is::<MissingOracle>()) {
        return 5;
    }
    match e.chain().find_map(|c| c.downcast_ref::<Error>()).map(Error::class) {
        Some(ErrorClass::Config | ErrorClass::Io) => 2,
        Some(ErrorClass::Validation) => 3,
        Some(ErrorClass::Degenerate) => 4,
        None => 1,
    }
}

/// Splices flags from a `--config` file in right after the subcommand, so
/// flags given on the command line come later and win.
fn with_config(mut args: Vec<OsString>) -> anyhow::Result<Vec<OsString>> {
    let mut path = None;
    for (i, a) in args.iter().enumerate() {
        let a = a.to_string_lossy();
        if a == "--config" {
            path = args.get(i + 1).map(PathBuf::from);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    input::require(&path, "config file")?;
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let extra = config_flags(&text)?;
    let commands = ["explain", "compare", "synth", "bench"];
    let Some(at) = args.iter().position(|a| commands.iter().any(|c| a == c)) else {
        return Ok(args);
    };
    args.splice(at + 1..at + 1, extra);
    Ok(args)
}

fn config_flags(text: &str) -> Result<Vec<OsString>, Error> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("config line {}: expected 'key = value'", i + 1)))?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        match value.trim() {
            "true" => out.push(format!("--{key}").into()),
            "false" => {}
            v => {
                out.push(format!("--{key}").into());
                out.push(v.into());
            }
        }
    }
    Ok(out)
}

/// Runs `f` on a pool of `workers` threads, or on the global pool.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> anyhow::Result<T> {
    match workers {
        None => Ok(f()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::Config(format!("cannot start {w} workers: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_lines_become_flags() {
        let flags = config_flags("# defaults\nestimator = leaf\nstrict = true\nn_mc=100\nquiet = false\n").unwrap();
        let flags: Vec<String> = flags.into_iter().map(|f| f.into_string().unwrap()).collect();
        assert_eq!(flags, ["--estimator", "leaf", "--strict", "--n-mc", "100"]);
        assert!(config_flags("nonsense").is_err());
    }

    #[test]
    fn exit_codes_follow_error_class() {
        let code = |e: Error| exit_code(&anyhow::Error::new(e));
        assert_eq!(code(Error::Config("x".into())), 2);
        assert_eq!(code(Error::InvalidModel("x".into())), 3);
        assert_eq!(code(Error::DegenerateQuery { tree: 0 }), 4);
        assert_eq!(exit_code(&anyhow::Error::new(MissingOracle("x".into()))), 5);
        assert_eq!(exit_code(&anyhow::anyhow!("other")), 1);
        let wrapped = anyhow::Error::new(Error::Config("x".into())).context("while loading");
        assert_eq!(exit_code(&wrapped), 2);
    }
}
