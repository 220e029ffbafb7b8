use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};

use super::with_workers;
use leafshap::oracle::cart::{fit_forest, CartParams};
use leafshap::oracle::experiments::instance_seed;
use leafshap::oracle::fixtures::{worked_example, Bundle, Truth, TruthEntry, WORKED_EXAMPLE_X};
use leafshap::oracle::synth::{gen_experiment1, gen_toy_categorical, EXPERIMENT1_BETA};
use leafshap::oracle::{mc_shapley, stream_rng, FeatureLaw};
use leafshap::{Dataset, Error, FeatureMeta, TreeEnsemble};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    /// Forest on `y = beta . x` with equicorrelated Gaussian features.
    Linear,
    /// Forest on the class-dependent linear model over a Gaussian mixture.
    ToyCategorical,
    /// The hand-specified four-feature tree and its query point.
    WorkedExample,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    /// Bundle directory to write.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    pub n_train: usize,
    /// Test points with Monte Carlo truth.
    #[arg(long, default_value_t = 20)]
    pub n_test: usize,
    #[arg(long, default_value_t = 10_000)]
    pub n_mc: usize,
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    /// Feature count of the linear kind; coefficients cycle through the default five.
    #[arg(long, default_value_t = 5)]
    pub p: usize,
    #[arg(long, default_value_t = 20)]
    pub trees: usize,
    #[arg(long, default_value_t = 10)]
    pub depth: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub workers: Option<usize>,
}

/// Coefficients for `p` features, repeating the five defaults.
pub fn linear_beta(p: usize) -> Vec<f64> {
    EXPERIMENT1_BETA.iter().copied().cycle().take(p).collect()
}

/// A forest fitted to linear Gaussian data, with its training set and law.
pub struct Fixture {
    pub model: TreeEnsemble,
    pub data: Dataset,
    pub law: FeatureLaw,
}

pub fn linear_fixture(
    p: usize,
    rho: f64,
    n_train: usize,
    trees: usize,
    depth: usize,
    seed: u64,
) -> leafshap::Result<Fixture> {
    let train = gen_experiment1(n_train, p, rho, &linear_beta(p), seed)?;
    let params = CartParams {
        max_depth: depth,
        min_samples_leaf: 1,
    };
    let model = fit_forest(
        &train.dataset.rows(),
        &train.labels,
        trees,
        params,
        seed.wrapping_add(1),
    )?
    .with_feature_names(train.dataset.names())?;
    Ok(Fixture {
        model,
        data: train.dataset,
        law: train.law,
    })
}

fn toy_fixture(n_train: usize, trees: usize, depth: usize, seed: u64) -> leafshap::Result<Fixture> {
    let toy = gen_toy_categorical(n_train, seed)?;
    let params = CartParams {
        max_depth: depth,
        min_samples_leaf: 1,
    };
    let model = fit_forest(&toy.dataset.rows(), &toy.labels, trees, params, seed.wrapping_add(1))?
        .with_feature_names(toy.dataset.names())?;
    Ok(Fixture {
        model,
        data: toy.dataset,
        law: FeatureLaw::Mixture(toy.law),
    })
}

/// Monte Carlo Shapley values of `model` under `law` at `n_test` fresh draws.
pub fn mc_truth(fx: &Fixture, n_test: usize, n_mc: usize, seed: u64) -> leafshap::Result<Truth> {
    let mut rng = stream_rng(seed.wrapping_add(2), 0);
    let points = fx.law.sample(&mut rng, n_test)?;
    let players: Vec<Vec<usize>> = (0..fx.model.n_features()).map(|j| vec![j]).collect();
    let f = |x: &[f64]| fx.model.predict_unchecked(x);
    let instances = points
        .into_iter()
        .enumerate()
        .map(|(i, x)| {
            let (phi, std_error) = mc_shapley(&f, &fx.law, &players, &x, n_mc, instance_seed(seed, i))?;
            Ok(TruthEntry {
                instance: i,
                x,
                phi,
                std_error,
            })
        })
        .collect::<leafshap::Result<Vec<_>>>()?;
    Ok(Truth {
        labels: fx.data.names(),
        seed,
        n_mc,
        instances,
    })
}

pub fn run(a: SynthArgs) -> anyhow::Result<()> {
    let start = Instant::now();
    let bundle = match a.kind {
        Kind::WorkedExample => {
            let meta = (0..4).map(|j| FeatureMeta::continuous(format!("x{j}"))).collect();
            Bundle {
                model: worked_example().with_feature_names((0..4).map(|j| format!("x{j}")).collect())?,
                data: Dataset::from_rows(meta, &[WORKED_EXAMPLE_X.to_vec()])?,
                truth: None,
            }
        }
        Kind::Linear | Kind::ToyCategorical => {
            if a.n_test > 0 && a.n_mc == 0 {
                return Err(Error::Config("--n-mc must be positive".into()).into());
            }
            let fx = if a.kind == Kind::Linear {
                linear_fixture(a.p, a.rho, a.n_train, a.trees, a.depth, a.seed)?
            } else {
                toy_fixture(a.n_train, a.trees, a.depth, a.seed)?
            };
            let truth = with_workers(a.workers, || mc_truth(&fx, a.n_test, a.n_mc, a.seed))??;
            Bundle {
                model: fx.model,
                data: fx.data,
                truth: Some(truth),
            }
        }
    };
    bundle.write(&a.out)?;
    eprintln!(
        "wrote {:?} bundle with {} truth instances to {} in {:.3} s",
        a.kind,
        bundle.truth.as_ref().map_or(0, |t| t.instances.len()),
        a.out.display(),
        start.elapsed().as_secs_f64()
    );
    Ok(())
}
