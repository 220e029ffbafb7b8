//! End-to-end accuracy and cost studies against known ground truth.

use rand::Rng;
use serde::Serialize;

use super::cart::{fit_forest, CartParams};
use super::mc::{mc_shapley, stream_rng};
use super::metrics::{mean, median, spearman, MetricReport, RankBy};
use super::synth::gen_experiment1;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::estimators::{Estimator, Explainer};
use crate::shapley::{explain_batch, multi_games_sv, Algorithm, ExplainOptions, OpStats};
use crate::tree::{Aggregation, NodeKind, Tree, TreeEnsemble, TreeNode};

/// Seed of instance `i` under a master seed.
pub fn instance_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64 + 1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearExperiment {
    pub n_train: usize,
    pub rho: f64,
    pub beta: Vec<f64>,
    pub n_trees: usize,
    pub max_depth: usize,
    pub n_test: usize,
    pub n_mc: usize,
    pub k: usize,
    pub rank_by: RankBy,
    pub seed: u64,
}

impl LinearExperiment {
    pub fn new(rho: f64, beta: &[f64]) -> Self {
        Self {
            n_train: 10_000,
            rho,
            beta: beta.to_vec(),
            n_trees: 20,
            max_depth: 10,
            n_test: 200,
            n_mc: 10_000,
            k: 3,
            rank_by: RankBy::Signed,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentOutcome {
    pub rho: f64,
    pub test_mse: f64,
    pub label_variance: f64,
    /// Oracle attributions per test instance.
    pub truth: Vec<Vec<f64>>,
    pub truth_std_error: Vec<Vec<f64>>,
    pub test_points: Vec<Vec<f64>>,
    pub reports: Vec<MetricReport>,
}

impl ExperimentOutcome {
    pub fn report(&self, estimator: Estimator) -> Option<&MetricReport> {
        self.reports.iter().find(|r| r.estimator == estimator.name())
    }
}

/// Fits a forest to linear Gaussian data, then scores the path-dependent and
/// leaf estimators against Monte Carlo Shapley values of the same forest
/// under the true feature law.
pub fn run_linear_experiment(cfg: &LinearExperiment, estimators: &[Estimator]) -> Result<ExperimentOutcome> {
    let p = cfg.beta.len();
    let train = gen_experiment1(cfg.n_train, p, cfg.rho, &cfg.beta, cfg.seed)?;
    let params = CartParams {
        max_depth: cfg.max_depth,
        min_samples_leaf: 1,
    };
    let rows = train.dataset.rows();
    let forest = fit_forest(&rows, &train.labels, cfg.n_trees, params, cfg.seed.wrapping_add(1))?;

    let mut rng = stream_rng(cfg.seed.wrapping_add(2), 0);
    let test_points = train.law.sample(&mut rng, cfg.n_test)?;
    let test_y: Vec<f64> = test_points
        .iter()
        .map(|x| x.iter().zip(&cfg.beta).map(|(a, b)| a * b).sum())
        .collect();
    let test_mse = mean(
        &test_points
            .iter()
            .zip(&test_y)
            .map(|(x, y)| (forest.predict_unchecked(x) - y).powi(2))
            .collect::<Vec<_>>(),
    );
    let label_variance = {
        let m = mean(&test_y);
        mean(&test_y.iter().map(|y| (y - m).powi(2)).collect::<Vec<_>>())
    };

    let players: Vec<Vec<usize>> = (0..p).map(|j| vec![j]).collect();
    let f = |x: &[f64]| forest.predict_unchecked(x);
    let mut truth = Vec::with_capacity(cfg.n_test);
    let mut truth_se = Vec::with_capacity(cfg.n_test);
    for (i, x) in test_points.iter().enumerate() {
        let (phi, se) = mc_shapley(&f, &train.law, &players, x, cfg.n_mc, instance_seed(cfg.seed, i))?;
        truth.push(phi);
        truth_se.push(se);
    }

    let explainer = Explainer::with_singletons(forest, Some(train.dataset))?;
    let ids: Vec<usize> = (0..cfg.n_test).collect();
    let mut reports = Vec::new();
    for &est in estimators {
        let sv = explain_batch(
            &explainer,
            &test_points,
            &ids,
            est,
            Algorithm::BruteForce,
            &ExplainOptions::default(),
        )?;
        let values: Vec<Vec<f64>> = sv.iter().map(|r| r.values()).collect();
        reports.push(MetricReport::build(
            est.name(),
            &ids,
            &truth,
            &values,
            cfg.k,
            cfg.rank_by,
        )?);
    }
    Ok(ExperimentOutcome {
        rho: cfg.rho,
        test_mse,
        label_variance,
        truth,
        truth_std_error: truth_se,
        test_points,
        reports,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub rho: f64,
    pub estimator: String,
    pub mean_r_ae: f64,
    pub median_r_ae: f64,
    pub mean_tpr: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Sweep {
    pub rows: Vec<SweepRow>,
    pub outcomes: Vec<ExperimentOutcome>,
}

impl Sweep {
    /// Median R-AE per correlation level for one estimator.
    pub fn median_r_ae(&self, estimator: Estimator) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.estimator == estimator.name())
            .map(|r| r.median_r_ae)
            .collect()
    }

    pub fn rhos(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.rho).collect()
    }

    /// Rank correlation of an estimator's median R-AE with the correlation
    /// level.
    pub fn trend(&self, estimator: Estimator) -> Result<f64> {
        spearman(&self.rhos(), &self.median_r_ae(estimator))
    }
}

/// Repeats the linear experiment at each correlation level.
pub fn rho_sweep(base: &LinearExperiment, rhos: &[f64], estimators: &[Estimator]) -> Result<Sweep> {
    let mut rows = Vec::new();
    let mut outcomes = Vec::new();
    for &rho in rhos {
        let cfg = LinearExperiment { rho, ..base.clone() };
        let out = run_linear_experiment(&cfg, estimators)?;
        for r in &out.reports {
            rows.push(SweepRow {
                rho,
                estimator: r.estimator.clone(),
                mean_r_ae: r.mean_r_ae,
                median_r_ae: median(&r.r_ae_values()),
                mean_tpr: r.mean_tpr,
            });
        }
        outcomes.push(out);
    }
    Ok(Sweep { rows, outcomes })
}

/// A chain tree: each internal node splits on a fresh feature and has one
/// leaf child, so the deepest leaves test `depth` distinct features. Each
/// split sends about a fifth of its rows to the leaf, keeping every leaf
/// populated.
pub fn caterpillar<R: Rng + ?Sized>(rng: &mut R, data: &Dataset, depth: usize, index: usize) -> Result<Tree> {
    let p = data.n_cols();
    if depth > p {
        return Err(Error::Config(format!("depth {depth} exceeds {p} features")));
    }
    let mut features: Vec<usize> = (0..p).collect();
    for i in 0..depth {
        let j = rng.random_range(i..p);
        features.swap(i, j);
    }
    let mut nodes = Vec::new();
    let mut rows: Vec<usize> = (0..data.n_rows()).collect();
    for (level, &f) in features[..depth].iter().enumerate() {
        let col = data.column(f);
        let mut vals: Vec<f64> = rows.iter().map(|&r| col[r]).collect();
        vals.sort_by(f64::total_cmp);
        let threshold = vals[vals.len() / 5];
        rows.retain(|&r| col[r] > threshold);
        let me = nodes.len();
        nodes.push(TreeNode {
            id: me as i64,
            kind: NodeKind::Internal {
                feature: f,
                threshold,
                left: me + 1,
                right: me + 2,
            },
            count: 0,
        });
        nodes.push(TreeNode {
            id: me as i64 + 1,
            kind: NodeKind::Leaf {
                value: rng.random::<f64>() - 0.5,
            },
            count: 0,
        });
        if level + 1 == depth {
            nodes.push(TreeNode {
                id: me as i64 + 2,
                kind: NodeKind::Leaf {
                    value: rng.random::<f64>() - 0.5,
                },
                count: 0,
            });
        }
    }
    if nodes.is_empty() {
        return Ok(Tree::constant(0.0, 0));
    }
    let mut tree = Tree::new(nodes, p, index)?;
    let rows = data.rows();
    tree.recount(rows.iter().map(Vec::as_slice));
    Ok(tree)
}

#[derive(Debug, Clone, Serialize)]
pub struct ComplexityPoint {
    pub depth: usize,
    pub ops: OpStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComplexityBench {
    pub players: usize,
    pub points: Vec<ComplexityPoint>,
    /// Least-squares slope of `log2(subset_evaluations)` against depth.
    pub slope: f64,
}

/// Multi-Games work on caterpillar forests over `players` columns at each
/// depth.
pub fn complexity_bench(players: usize, depths: &[usize], n_trees: usize, seed: u64) -> Result<ComplexityBench> {
    let mut rng = stream_rng(seed, 0);
    let data = super::random::random_continuous(&mut rng, 200, players)?;
    let x = data.row(0);
    let mut points = Vec::new();
    for &depth in depths {
        let trees = (0..n_trees)
            .map(|t| caterpillar(&mut rng, &data, depth, t))
            .collect::<Result<Vec<_>>>()?;
        let ensemble = TreeEnsemble::new(trees, players, Aggregation::Sum)?;
        let explainer = Explainer::with_singletons(ensemble, Some(data.clone()))?;
        let (_, ops) = multi_games_sv(&explainer, &x, 0)?;
        points.push(ComplexityPoint { depth, ops });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.depth as f64).collect();
    let ys: Vec<f64> = points
        .iter()
        .map(|p| (p.ops.subset_evaluations as f64).log2())
        .collect();
    Ok(ComplexityBench {
        players,
        slope: ls_slope(&xs, &ys),
        points,
    })
}

fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}
