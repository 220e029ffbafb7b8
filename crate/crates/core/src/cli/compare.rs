use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use serde::Serialize;

use super::input::{self, emit};
use super::{with_workers, Format, MissingOracle};
use leafshap::oracle::experiments::{rho_sweep, LinearExperiment, SweepRow};
use leafshap::oracle::fixtures::{Bundle, Truth};
use leafshap::oracle::metrics_to_csv;
use leafshap::oracle::synth::EXPERIMENT1_BETA;
use leafshap::oracle::{MetricReport, RankBy};
use leafshap::tree::read_model;
use leafshap::{explain_batch, Algorithm, Dataset, Error, Estimator, ExplainOptions, Explainer, TreeEnsemble};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Rank {
    Signed,
    Absolute,
}

impl From<Rank> for RankBy {
    fn from(r: Rank) -> Self {
        match r {
            Rank::Signed => RankBy::Signed,
            Rank::Absolute => RankBy::Absolute,
        }
    }
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct CompareArgs {
    /// Truth JSON scored against --model and --data.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Bundle directory holding model, data and truth.
    #[arg(long)]
    pub bundle: Option<PathBuf>,
    /// Rerun the linear Gaussian benchmark at each --rho.
    #[arg(long)]
    pub synthetic: bool,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "shap_path,leaf")]
    pub estimators: Vec<Estimator>,
    /// Top and bottom players counted by TPR.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, value_enum, default_value = "signed")]
    pub rank_by: Rank,
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    pub rho: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub n_mc: usize,
    #[arg(long, default_value_t = 200)]
    pub n_test: usize,
    #[arg(long, default_value_t = 10_000)]
    pub n_train: usize,
    #[arg(long, default_value_t = 20)]
    pub trees: usize,
    #[arg(long, default_value_t = 10)]
    pub depth: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub strict: bool,
}

/// The exact algorithm each estimator runs with when compared.
pub fn default_algorithm(e: Estimator) -> Algorithm {
    match e {
        Estimator::ShapPath => Algorithm::TreeShap,
        Estimator::LeafRaw => Algorithm::MultiGames,
        Estimator::Leaf | Estimator::Discrete => Algorithm::BruteForce,
    }
}

#[derive(Serialize)]
struct ExperimentSummary {
    rho: f64,
    test_mse: f64,
    label_variance: f64,
    reports: Vec<MetricReport>,
}

#[derive(Serialize)]
struct Trend {
    estimator: String,
    /// Spearman correlation of median R-AE with rho.
    spearman: f64,
}

#[derive(Serialize)]
struct SyntheticDoc {
    experiments: Vec<ExperimentSummary>,
    sweep: Vec<SweepRow>,
    trends: Vec<Trend>,
}

#[derive(Serialize)]
struct TruthDoc {
    reports: Vec<MetricReport>,
}

pub fn run(a: CompareArgs) -> anyhow::Result<()> {
    input::require_all(&[
        (&a.truth, "truth file"),
        (&a.bundle, "bundle"),
        (&a.model, "model"),
        (&a.data, "data file"),
        (&a.schema, "schema"),
    ])?;
    if a.estimators.is_empty() {
        return Err(Error::Config("--estimators is empty".into()).into());
    }
    let start = Instant::now();
    let (text, count) = if a.synthetic {
        synthetic(&a)?
    } else {
        let (model, data, truth) = oracle_inputs(&a)?;
        let reports = with_workers(a.workers, || score(&a, model, data, &truth))??;
        let n = truth.instances.len();
        let text = match a.format {
            Format::Json => serde_json::to_string_pretty(&TruthDoc { reports })? + "\n",
            Format::Csv => metrics_to_csv(&reports)?,
        };
        (text, n)
    };
    emit(a.out.as_deref(), &text)?;
    eprintln!(
        "compared {} estimators on {count} instances in {:.3} s",
        a.estimators.len(),
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

fn oracle_inputs(a: &CompareArgs) -> anyhow::Result<(TreeEnsemble, Dataset, Truth)> {
    if let Some(dir) = &a.bundle {
        let b = Bundle::read(dir)?;
        let truth = b
            .truth
            .ok_or_else(|| MissingOracle(format!("bundle '{}' has no truth.json", dir.display())))?;
        return Ok((b.model, b.data, truth));
    }
    let Some(path) = &a.truth else {
        return Err(MissingOracle("give --truth, --bundle or --synthetic".into()).into());
    };
    let (Some(model), Some(data)) = (&a.model, &a.data) else {
        return Err(Error::Config("--truth needs --model and --data".into()).into());
    };
    let truth: Truth = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    Ok((read_model(model)?, input::load_data(data, a.schema.as_deref())?, truth))
}

fn score(a: &CompareArgs, model: TreeEnsemble, data: Dataset, truth: &Truth) -> leafshap::Result<Vec<MetricReport>> {
    let explainer = Explainer::with_singletons(model, Some(data))?;
    let rows: Vec<Vec<f64>> = truth.instances.iter().map(|t| t.x.clone()).collect();
    let ids: Vec<usize> = truth.instances.iter().map(|t| t.instance).collect();
    let phi: Vec<Vec<f64>> = truth.instances.iter().map(|t| t.phi.clone()).collect();
    let options = ExplainOptions {
        strict: a.strict,
        ..ExplainOptions::default()
    };
    a.estimators
        .iter()
        .map(|&e| {
            let sv = explain_batch(&explainer, &rows, &ids, e, default_algorithm(e), &options)?;
            let est: Vec<Vec<f64>> = sv.iter().map(|r| r.values()).collect();
            MetricReport::build(e.name(), &ids, &phi, &est, a.k, a.rank_by.into())
        })
        .collect()
}

fn synthetic(a: &CompareArgs) -> anyhow::Result<(String, usize)> {
    let base = LinearExperiment {
        n_train: a.n_train,
        n_trees: a.trees,
        max_depth: a.depth,
        n_test: a.n_test,
        n_mc: a.n_mc,
        k: a.k,
        rank_by: a.rank_by.into(),
        seed: a.seed,
        ..LinearExperiment::new(a.rho[0], &EXPERIMENT1_BETA)
    };
    let sweep = with_workers(a.workers, || rho_sweep(&base, &a.rho, &a.estimators))??;
    for o in &sweep.outcomes {
        log::info!(
            "rho {}: test MSE {:.4}, label variance {:.4}",
            o.rho,
            o.test_mse,
            o.label_variance
        );
    }
    let text = match a.format {
        Format::Csv => sweep_csv(
            &sweep
                .outcomes
                .iter()
                .map(|o| (o.rho, &o.reports[..]))
                .collect::<Vec<_>>(),
        )?,
        Format::Json => {
            let trends = if a.rho.len() > 2 {
                a.estimators
                    .iter()
                    .map(|&e| {
                        Ok(Trend {
                            estimator: e.name().into(),
                            spearman: sweep.trend(e)?,
                        })
                    })
                    .collect::<leafshap::Result<Vec<_>>>()?
            } else {
                Vec::new()
            };
            let doc = SyntheticDoc {
                experiments: sweep
                    .outcomes
                    .iter()
                    .map(|o| ExperimentSummary {
                        rho: o.rho,
                        test_mse: o.test_mse,
                        label_variance: o.label_variance,
                        reports: o.reports.clone(),
                    })
                    .collect(),
                sweep: sweep.rows.clone(),
                trends,
            };
            serde_json::to_string_pretty(&doc)? + "\n"
        }
    };
    Ok((text, a.n_test * a.rho.len()))
}

/// Per-instance rows tagged with the correlation level, ready for plotting.
fn sweep_csv(levels: &[(f64, &[MetricReport])]) -> leafshap::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["rho", "estimator", "instance", "r_ae", "tpr"])?;
    for (rho, reports) in levels {
        for r in *reports {
            for m in &r.instances {
                w.write_record([
                    format!("{rho:?}"),
                    r.estimator.clone(),
                    m.instance.to_string(),
                    format!("{:?}", m.r_ae),
                    format!("{:?}", m.tpr),
                ])?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
