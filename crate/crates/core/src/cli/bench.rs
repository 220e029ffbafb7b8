use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use clap::Args;
use serde::Serialize;

use super::input::{self, emit};
use super::synth::linear_fixture;
use super::{with_workers, Format};
use leafshap::oracle::metrics::median;
use leafshap::shapley::{multi_games_sv, OpStats};
use leafshap::tree::read_model;
use leafshap::{explain_batch, Algorithm, Error, Estimator, ExplainOptions, Explainer};

/// An `estimator:algorithm` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pair(pub Estimator, pub Algorithm);

impl FromStr for Pair {
    type Err = Error;

    fn from_str(s: &str) -> leafshap::Result<Self> {
        let (e, a) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("expected estimator:algorithm, got '{s}'")))?;
        let pair = Pair(e.trim().parse()?, a.trim().parse()?);
        pair.1.check(pair.0)?;
        Ok(pair)
    }
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct BenchArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Fit a linear Gaussian forest with this many features instead of --model.
    #[arg(long, value_name = "P")]
    pub synthetic_p: Option<usize>,
    #[arg(long, default_value_t = 2_000)]
    pub n_train: usize,
    #[arg(long, default_value_t = 20)]
    pub trees: usize,
    #[arg(long, default_value_t = 10)]
    pub depth: usize,
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "shap_path:tree_shap,leaf_raw:multi_games"
    )]
    pub pairs: Vec<Pair>,
    /// Number of leading data rows to explain.
    #[arg(long, default_value_t = 10)]
    pub instances: usize,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Serialize)]
struct Machine {
    os: &'static str,
    arch: &'static str,
    cpus: usize,
    threads: usize,
}

#[derive(Debug, Serialize)]
struct ModelInfo {
    players: usize,
    trees: usize,
    max_depth: usize,
    leaves: usize,
}

#[derive(Debug, Serialize)]
struct Timing {
    estimator: Estimator,
    algorithm: Algorithm,
    median_seconds: f64,
    seconds: Vec<f64>,
    /// Work counters summed over the batch, for multi_games.
    ops: Option<OpStats>,
}

#[derive(Debug, Serialize)]
struct BenchReport {
    machine: Machine,
    model: ModelInfo,
    instances: usize,
    reps: usize,
    results: Vec<Timing>,
}

pub fn run(a: BenchArgs) -> anyhow::Result<()> {
    input::require_all(&[(&a.model, "model"), (&a.data, "data file"), (&a.schema, "schema")])?;
    if a.reps == 0 {
        return Err(Error::Config("--reps must be positive".into()).into());
    }
    let (model, data) = match (a.synthetic_p, &a.model, &a.data) {
        (Some(p), None, None) => {
            let fx = linear_fixture(p, a.rho, a.n_train, a.trees, a.depth, a.seed)?;
            (fx.model, fx.data)
        }
        (None, Some(m), Some(d)) => (read_model(m)?, input::load_data(d, a.schema.as_deref())?),
        _ => {
            return Err(Error::Config("give either --synthetic-p or both --model and --data".into()).into());
        }
    };
    let n = a.instances.min(data.n_rows());
    let rows: Vec<Vec<f64>> = (0..n).map(|r| data.row(r)).collect();
    let ids: Vec<usize> = (0..n).collect();
    let info = ModelInfo {
        players: model.n_features(),
        trees: model.trees().len(),
        max_depth: model.max_depth(),
        leaves: model.trees().iter().map(|t| t.n_leaves()).sum(),
    };
    let explainer = Explainer::with_singletons(model, Some(data))?;
    let options = ExplainOptions {
        strict: a.strict,
        ..ExplainOptions::default()
    };

    let results = with_workers(a.workers, || -> leafshap::Result<Vec<Timing>> {
        if n == 0 {
            return Ok(Vec::new());
        }
        let mut results = Vec::new();
        for &Pair(e, alg) in &a.pairs {
            let mut seconds = Vec::with_capacity(a.reps);
            for _ in 0..a.reps {
                let start = Instant::now();
                explain_batch(&explainer, &rows, &ids, e, alg, &options)?;
                seconds.push(start.elapsed().as_secs_f64());
            }
            let ops = if alg == Algorithm::MultiGames {
                let mut total = OpStats::default();
                for (x, &id) in rows.iter().zip(&ids) {
                    total += multi_games_sv(&explainer, x, id)?.1;
                }
                Some(total)
            } else {
                None
            };
            log::info!("{e}/{alg}: median {:.4} s", median(&seconds));
            results.push(Timing {
                estimator: e,
                algorithm: alg,
                median_seconds: median(&seconds),
                seconds,
                ops,
            });
        }
        Ok(results)
    })??;

    let report = BenchReport {
        machine: Machine {
            os: std::env::consts::OS,
            arch: std::env::consts::ARCH,
            cpus: std::thread::available_parallelism().map_or(1, |c| c.get()),
            threads: a.workers.unwrap_or_else(rayon::current_num_threads),
        },
        model: info,
        instances: n,
        reps: a.reps,
        results,
    };
    let text = match a.format {
        Format::Json => serde_json::to_string_pretty(&report)? + "\n",
        Format::Csv => bench_csv(&report)?,
    };
    emit(a.out.as_deref(), &text)?;
    eprintln!(
        "benchmarked {} pairs on {n} instances ({} players, depth {})",
        report.results.len(),
        report.model.players,
        report.model.max_depth
    );
    Ok(())
}

fn bench_csv(r: &BenchReport) -> leafshap::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "estimator",
        "algorithm",
        "instances",
        "players",
        "max_depth",
        "median_seconds",
        "subset_evaluations",
    ])?;
    for t in &r.results {
        w.write_record([
            t.estimator.to_string(),
            t.algorithm.to_string(),
            r.instances.to_string(),
            r.model.players.to_string(),
            r.model.max_depth.to_string(),
            format!("{:?}", t.median_seconds),
            t.ops.map(|o| o.subset_evaluations.to_string()).unwrap_or_default(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
