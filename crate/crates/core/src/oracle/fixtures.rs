//! Shipped fixtures, tree recoding for encoded data and fixture bundles.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{load_dataset, parse_schema, write_csv, write_schema, Dataset, EncodingScheme, EncodingSpec};
use crate::error::{Error, Result};
use crate::tree::{parse_model, NodeKind, Tree, TreeEnsemble, TreeNode};

fn node(id: i64, kind: NodeKind, count: u64) -> TreeNode {
    TreeNode { id, kind, count }
}

fn split(id: i64, feature: usize, threshold: f64, left: usize, right: usize, count: u64) -> TreeNode {
    node(
        id,
        NodeKind::Internal {
            feature,
            threshold,
            left,
            right,
        },
        count,
    )
}

fn leaf(id: i64, value: f64, count: u64) -> TreeNode {
    node(id, NodeKind::Leaf { value }, count)
}

/// Four-feature regression tree with 335 training observations, used as a
/// worked example of the path-dependent estimator. Node ids follow preorder.
pub fn worked_example() -> TreeEnsemble {
    let nodes = vec![
        split(0, 1, 0.305, 1, 8, 335),
        split(1, 2, -0.048, 2, 5, 202),
        split(2, 3, 1.2, 3, 4, 105),
        leaf(3, -12.5, 60),
        leaf(4, 20.3, 45),
        split(5, 1, -0.536, 6, 7, 97),
        leaf(6, -51.85, 51),
        leaf(7, 50.716, 46),
        split(8, 3, 0.207, 9, 12, 133),
        split(9, 0, -0.191, 10, 11, 82),
        leaf(10, -30.2, 22),
        leaf(11, 73.971, 60),
        split(12, 1, 1.585, 13, 14, 51),
        leaf(13, 145.955, 44),
        leaf(14, 318.125, 7),
    ];
    let tree = Tree::new(nodes, 4, 0).expect("fixture tree is valid");
    TreeEnsemble::single(tree, 4).expect("fixture ensemble is valid")
}

/// The worked example's query point.
pub const WORKED_EXAMPLE_X: [f64; 4] = [2.0, 3.0, 0.5, -1.0];

/// Rewrites splits on encoded source columns as chains of indicator tests so
/// the model reads only the indicator columns, then recounts on `data` (the
/// encoded dataset). Subtrees reached through a chain are duplicated.
pub fn split_on_indicators(ensemble: &TreeEnsemble, specs: &[EncodingSpec], data: &Dataset) -> Result<TreeEnsemble> {
    if ensemble.n_features() > data.n_cols() {
        return Err(Error::Dimension {
            expected: data.n_cols(),
            got: ensemble.n_features(),
        });
    }
    let mut trees = Vec::with_capacity(ensemble.trees().len());
    for (t, tree) in ensemble.trees().iter().enumerate() {
        let mut out = Vec::new();
        emit(tree, 0, specs, data, &mut out);
        // Counts are rebuilt below.
        for (i, n) in out.iter_mut().enumerate() {
            n.id = i as i64;
            n.count = 0;
        }
        trees.push(Tree::new(out, data.n_cols(), t)?);
    }
    let mut recoded = TreeEnsemble::new(trees, data.n_cols(), ensemble.aggregation())?;
    let rows = data.rows();
    recoded.recount(rows.iter().map(Vec::as_slice));
    Ok(recoded)
}

fn emit(tree: &Tree, i: usize, specs: &[EncodingSpec], data: &Dataset, out: &mut Vec<TreeNode>) -> usize {
    let n = tree.node(i);
    let NodeKind::Internal {
        feature,
        threshold,
        left,
        right,
    } = n.kind
    else {
        out.push(n.clone());
        return out.len() - 1;
    };
    let Some(spec) = specs.iter().find(|s| s.source == feature) else {
        let me = out.len();
        out.push(n.clone());
        let l = emit(tree, left, specs, data, out);
        let r = emit(tree, right, specs, data, out);
        out[me].kind = NodeKind::Internal {
            feature,
            threshold,
            left: l,
            right: r,
        };
        return me;
    };
    let meta = data.column_meta(feature);
    let side = |cat: &str| meta.level_of(cat).is_some_and(|l| l <= threshold);
    let all: Vec<&str> = meta.categories.iter().map(String::as_str).collect();
    let (left_cats, right_cats): (Vec<&str>, Vec<&str>) = all.iter().partition(|c| side(c));
    if left_cats.is_empty() {
        return emit(tree, right, specs, data, out);
    }
    if right_cats.is_empty() {
        return emit(tree, left, specs, data, out);
    }
    // Chain over a side whose categories all have indicators.
    let dropped = spec.dropped_category.as_deref();
    let chain_left = match spec.scheme {
        EncodingScheme::Dummy => !left_cats.iter().any(|c| Some(*c) == dropped),
        EncodingScheme::OneHot => left_cats.len() <= right_cats.len(),
    };
    let (chain, hit, miss) = if chain_left {
        (left_cats, left, right)
    } else {
        (right_cats, right, left)
    };
    let cols: Vec<usize> = chain
        .iter()
        .map(|c| {
            spec.column_map
                .iter()
                .find(|(cat, _)| cat == c)
                .map(|&(_, col)| col)
                .expect("every chained category has an indicator")
        })
        .collect();
    emit_chain(tree, &cols, hit, miss, specs, data, out)
}

fn emit_chain(
    tree: &Tree,
    cols: &[usize],
    hit: usize,
    miss: usize,
    specs: &[EncodingSpec],
    data: &Dataset,
    out: &mut Vec<TreeNode>,
) -> usize {
    let me = out.len();
    out.push(leaf(0, 0.0, 0));
    // Indicator 0 goes left, 1 goes right.
    let right = emit(tree, hit, specs, data, out);
    let left = if cols.len() > 1 {
        emit_chain(tree, &cols[1..], hit, miss, specs, data, out)
    } else {
        emit(tree, miss, specs, data, out)
    };
    out[me].kind = NodeKind::Internal {
        feature: cols[0],
        threshold: 0.5,
        left,
        right,
    };
    me
}

/// Oracle attributions for one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthEntry {
    pub instance: usize,
    pub x: Vec<f64>,
    pub phi: Vec<f64>,
    pub std_error: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub labels: Vec<String>,
    pub seed: u64,
    pub n_mc: usize,
    pub instances: Vec<TruthEntry>,
}

/// A model, its dataset and optional oracle attributions.
#[derive(Debug, Clone)]
pub struct Bundle {
    pub model: TreeEnsemble,
    pub data: Dataset,
    pub truth: Option<Truth>,
}

pub const MODEL_FILE: &str = "model.json";
pub const DATA_FILE: &str = "data.csv";
pub const SCHEMA_FILE: &str = "schema.txt";
pub const TRUTH_FILE: &str = "truth.json";

impl Bundle {
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        self.model.write_json(dir.join(MODEL_FILE))?;
        std::fs::write(dir.join(DATA_FILE), write_csv(&self.data)?)?;
        std::fs::write(dir.join(SCHEMA_FILE), write_schema(&self.data))?;
        if let Some(truth) = &self.truth {
            std::fs::write(dir.join(TRUTH_FILE), serde_json::to_string_pretty(truth)?)?;
        }
        Ok(())
    }

    pub fn read(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let model = parse_model(&std::fs::read_to_string(dir.join(MODEL_FILE))?)?;
        let schema = parse_schema(&std::fs::read_to_string(dir.join(SCHEMA_FILE))?)?;
        let data = load_dataset(&std::fs::read_to_string(dir.join(DATA_FILE))?, &schema)?;
        let truth_path = dir.join(TRUTH_FILE);
        let truth = if truth_path.exists() {
            Some(serde_json::from_str(&std::fs::read_to_string(truth_path)?)?)
        } else {
            None
        };
        Ok(Self { model, data, truth })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::columns::ColumnSet;
    use crate::data::{encode_categorical, FeatureMeta};
    use crate::estimators::shap_reduced;

    #[test]
    fn worked_example_value() {
        let e = worked_example();
        let s = ColumnSet::from_indices(4, &[0, 2]);
        let v = shap_reduced(&e, &s, &WORKED_EXAMPLE_X).unwrap().value;
        let by_hand = 202.0 / 335.0 * (51.0 / 97.0 * -51.85 + 46.0 / 97.0 * 50.716)
            + 82.0 / 335.0 * 73.971
            + 44.0 / 335.0 * 145.955
            + 7.0 / 335.0 * 318.125;
        assert!((v - by_hand).abs() < 1e-12);
        assert!((v - 41.98).abs() < 0.01);
    }

    #[test]
    fn recoded_tree_agrees_on_valid_rows() {
        let meta = vec![
            FeatureMeta::categorical("z", vec!["a".into(), "b".into(), "c".into(), "d".into()]),
            FeatureMeta::continuous("w"),
        ];
        let rows: Vec<Vec<f64>> = (0..16).map(|i| vec![(i % 4) as f64, (i / 4) as f64]).collect();
        let ds = Dataset::from_rows(meta, &rows).unwrap();
        let nodes = vec![
            split(0, 0, 1.0, 1, 2, 16),
            split(1, 1, 1.5, 3, 4, 8),
            split(2, 0, 2.0, 5, 6, 8),
            leaf(3, 1.0, 4),
            leaf(4, 2.0, 4),
            leaf(5, 3.0, 4),
            leaf(6, 4.0, 4),
        ];
        let e = TreeEnsemble::single(Tree::new(nodes, 2, 0).unwrap(), 2).unwrap();
        for scheme in [EncodingScheme::Dummy, EncodingScheme::OneHot] {
            let enc = encode_categorical(&ds, 0, scheme, None).unwrap();
            let recoded = split_on_indicators(&e, std::slice::from_ref(&enc.spec), &enc.dataset).unwrap();
            assert!(recoded.used_features().iter().all(|c| c != 0));
            for r in 0..enc.dataset.n_rows() {
                let row = enc.dataset.row(r);
                assert_eq!(recoded.predict(&row).unwrap(), e.predict(&row[..2]).unwrap());
            }
        }
    }

    #[test]
    fn bundle_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![vec![1.0, 2.0, 3.0, 4.0], vec![-1.0, 0.5, 0.0, 2.0]];
        let b = Bundle {
            model: worked_example(),
            data: Dataset::continuous(&rows).unwrap(),
            truth: Some(Truth {
                labels: vec!["x0".into()],
                seed: 3,
                n_mc: 10,
                instances: vec![TruthEntry {
                    instance: 0,
                    x: vec![1.0],
                    phi: vec![0.5],
                    std_error: vec![0.1],
                }],
            }),
        };
        b.write(dir.path()).unwrap();
        let back = Bundle::read(dir.path()).unwrap();
        assert_eq!(back.model, b.model);
        assert_eq!(back.data, b.data);
        assert_eq!(back.truth, b.truth);
    }
}
