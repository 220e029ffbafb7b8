use approx::assert_abs_diff_eq;
use leafshap::estimators::{discrete_reduced, leaf_reduced, shap_reduced};
use leafshap::oracle::fixtures::{worked_example, WORKED_EXAMPLE_X};
use leafshap::oracle::random::{random_categorical, random_continuous, random_ensemble};
use leafshap::oracle::stream_rng;
use leafshap::tree::{NodeKind, TreeNode};
use leafshap::{ColumnSet, Dataset, Error, Estimator, Explainer, FeatureMeta, Tree, TreeEnsemble};

fn stump(feature: usize, threshold: f64, values: (f64, f64), counts: (u64, u64)) -> TreeEnsemble {
    let leaf = |id, value, count| TreeNode {
        id,
        kind: NodeKind::Leaf { value },
        count,
    };
    let nodes = vec![
        TreeNode {
            id: 0,
            kind: NodeKind::Internal {
                feature,
                threshold,
                left: 1,
                right: 2,
            },
            count: counts.0 + counts.1,
        },
        leaf(1, values.0, counts.0),
        leaf(2, values.1, counts.1),
    ];
    TreeEnsemble::single(Tree::new(nodes, 2, 0).unwrap(), 2).unwrap()
}

fn mean_prediction(model: &TreeEnsemble, data: &Dataset) -> f64 {
    data.rows().iter().map(|r| model.predict(r).unwrap()).sum::<f64>() / data.n_rows() as f64
}

#[test]
fn path_estimator_at_the_extremes() {
    let model = worked_example();
    let x = WORKED_EXAMPLE_X;
    let tree = &model.trees()[0];
    let expected: f64 = tree
        .leaf_regions()
        .iter()
        .map(|r| r.value * r.count as f64 / 335.0)
        .sum();
    let empty = shap_reduced(&model, &ColumnSet::empty(4), &x).unwrap().value;
    assert_abs_diff_eq!(empty, expected, epsilon = 1e-12);
    let full = shap_reduced(&model, &ColumnSet::full(4), &x).unwrap().value;
    assert_eq!(full, model.predict(&x).unwrap());
}

#[test]
fn path_estimator_worked_value() {
    let v = shap_reduced(
        &worked_example(),
        &ColumnSet::from_indices(4, &[0, 2]),
        &WORKED_EXAMPLE_X,
    )
    .unwrap()
    .value;
    assert_abs_diff_eq!(v, 41.98, epsilon = 0.01);
}

fn six_rows() -> Dataset {
    let meta = vec![
        FeatureMeta::indicator("a"),
        FeatureMeta::categorical("b", vec!["u".into(), "v".into(), "w".into()]),
    ];
    let rows = [[0.0, 1.0], [1.0, 1.0], [1.0, 1.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]];
    Dataset::from_rows(meta, &rows.map(|r| r.to_vec())).unwrap()
}

#[test]
fn discrete_estimator_averages_matching_rows() {
    let data = six_rows();
    let model = stump(0, 0.5, (10.0, 20.0), (3, 3));
    let v = discrete_reduced(&model, &data, &ColumnSet::from_indices(2, &[1]), &[0.0, 1.0])
        .unwrap()
        .value;
    assert_abs_diff_eq!(v, 50.0 / 3.0, epsilon = 1e-12);
}

#[test]
fn discrete_estimator_rejects_unseen_combinations() {
    let data = six_rows();
    let model = stump(0, 0.5, (10.0, 20.0), (3, 3));
    let err = discrete_reduced(&model, &data, &ColumnSet::from_indices(2, &[1]), &[0.0, 2.0]).unwrap_err();
    assert!(matches!(err, Error::UnsupportedConditioning { .. }), "{err}");
    let explainer = Explainer::with_singletons(model, Some(data)).unwrap();
    let err = explainer.value_table(&[0.0, 2.0], Estimator::Discrete).unwrap_err();
    assert_eq!(err.class(), leafshap::ErrorClass::Degenerate);
}

#[test]
fn discrete_estimator_at_the_extremes() {
    let mut rng = stream_rng(21, 0);
    let data = random_categorical(&mut rng, 80, 3, 3).unwrap();
    let model = random_ensemble(&mut rng, &data, 3, 3).unwrap();
    for r in [0, 17, 42] {
        let x = data.row(r);
        let empty = discrete_reduced(&model, &data, &ColumnSet::empty(3), &x).unwrap().value;
        assert_abs_diff_eq!(empty, mean_prediction(&model, &data), epsilon = 1e-12);
        let full = discrete_reduced(&model, &data, &ColumnSet::full(3), &x).unwrap().value;
        assert_abs_diff_eq!(full, model.predict(&x).unwrap(), epsilon = 1e-12);
    }
}

#[test]
fn leaf_estimator_weights_leaves_by_mass() {
    let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, if i < 4 { 0.0 } else { 1.0 }]).collect();
    let data = Dataset::continuous(&rows).unwrap();
    let model = stump(1, 0.5, (1.0, 2.0), (4, 6));
    for s in [vec![], vec![0]] {
        let v = leaf_reduced(&model, &data, &ColumnSet::from_indices(2, &s), &[3.0, 0.0], true)
            .unwrap()
            .value;
        assert_abs_diff_eq!(v, 1.6, epsilon = 1e-12);
    }
}

#[test]
fn leaf_estimator_at_the_extremes() {
    let mut rng = stream_rng(22, 0);
    let data = random_continuous(&mut rng, 150, 4).unwrap();
    let model = random_ensemble(&mut rng, &data, 4, 4).unwrap();
    for r in [3, 50, 149] {
        let x = data.row(r);
        let empty = leaf_reduced(&model, &data, &ColumnSet::empty(4), &x, true)
            .unwrap()
            .value;
        assert_abs_diff_eq!(empty, mean_prediction(&model, &data), epsilon = 1e-12);
        let full = leaf_reduced(&model, &data, &ColumnSet::full(4), &x, true)
            .unwrap()
            .value;
        assert_abs_diff_eq!(full, model.predict(&x).unwrap(), epsilon = 1e-12);
    }
}

#[test]
fn normalized_leaf_estimator_fails_on_empty_mass() {
    // Two rows, both left of the split; the right leaf carries no data.
    let data = Dataset::continuous(&[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
    let model = stump(1, 0.5, (1.0, 2.0), (2, 0));
    let x = [0.0, 9.0];
    let err = leaf_reduced(&model, &data, &ColumnSet::full(2), &x, true).unwrap_err();
    assert!(matches!(err, Error::DegenerateQuery { .. }), "{err}");
    let raw = leaf_reduced(&model, &data, &ColumnSet::full(2), &x, false).unwrap();
    assert_eq!(raw.value, 0.0);
}

#[test]
fn estimators_needing_data_refuse_to_run_without_it() {
    let explainer = Explainer::with_singletons(worked_example(), None).unwrap();
    for e in [Estimator::Discrete, Estimator::Leaf, Estimator::LeafRaw] {
        assert!(explainer.check_estimator(e).is_err(), "{e}");
    }
    assert!(explainer.check_estimator(Estimator::ShapPath).is_ok());
}
