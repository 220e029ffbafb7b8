use approx::assert_abs_diff_eq;
use leafshap::data::{encode_categorical, EncodingScheme, PlayerPartition};
use leafshap::oracle::fixtures::split_on_indicators;
use leafshap::oracle::random::{random_categorical, random_continuous, random_ensemble};
use leafshap::oracle::synth::{gen_toy_categorical, TOY_CLASS_COLUMN, TOY_OBSERVATION};
use leafshap::oracle::{mc_shapley, stream_rng, FeatureLaw, GaussianSpec};
use leafshap::shapley::{
    brute_force_sv, coalition_from_table, coalition_sv_categorical, global_importance, ranking_change_fraction,
    shapley_from_table, sum_groups, tree_shap_sv, DEFAULT_MAX_PLAYERS,
};
use leafshap::{Algorithm, Estimator, Explainer, SVReport};
use rand::Rng;

#[test]
fn tree_shap_matches_enumeration_of_the_path_estimator() {
    let mut rng = stream_rng(31, 0);
    for case in 0..30 {
        let p = rng.random_range(2..=7);
        let data = random_continuous(&mut rng, 60, p).unwrap();
        let (n_trees, depth) = (rng.random_range(1..=4), rng.random_range(1..=5));
        let model = random_ensemble(&mut rng, &data, n_trees, depth).unwrap();
        let explainer = Explainer::with_singletons(model, Some(data.clone())).unwrap();
        let x = data.row(rng.random_range(0..60));
        let fast = tree_shap_sv(&explainer, &x, case).unwrap().values();
        let slow = brute_force_sv(&explainer, &x, Estimator::ShapPath, case, DEFAULT_MAX_PLAYERS)
            .unwrap()
            .values();
        for (a, b) in fast.iter().zip(&slow) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }
}

#[test]
fn linear_model_with_independent_features() {
    let beta = [2.0, -1.0, 0.5, 3.0];
    let x = [0.7, -1.2, 2.0, 0.1];
    // E[f | X_S = x_S] for centred independent features.
    let table: Vec<f64> = (0..16usize)
        .map(|s| (0..4).filter(|i| s >> i & 1 == 1).map(|i| beta[i] * x[i]).sum())
        .collect();
    let phi = shapley_from_table(&table);
    for i in 0..4 {
        assert_abs_diff_eq!(phi[i], beta[i] * x[i], epsilon = 1e-12);
    }

    let law = FeatureLaw::Gaussian(GaussianSpec::independent(4));
    let f = |z: &[f64]| z.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>();
    let players: Vec<Vec<usize>> = (0..4).map(|j| vec![j]).collect();
    let (mc, se) = mc_shapley(&f, &law, &players, &x, 4000, 7).unwrap();
    for i in 0..4 {
        assert!(
            (mc[i] - phi[i]).abs() <= 4.0 * se[i] + 1e-9,
            "player {i}: {} vs {}",
            mc[i],
            phi[i]
        );
    }
}

#[test]
fn binary_variable_coalition_equals_its_single_indicator() {
    let mut rng = stream_rng(32, 0);
    let mut checked = 0;
    while checked < 10 {
        let data = random_categorical(&mut rng, 60, 3, 2).unwrap();
        if data.column_meta(0).categories.len() != 2 {
            continue;
        }
        let model = random_ensemble(&mut rng, &data, 2, 3).unwrap();
        let enc = encode_categorical(&data, 0, EncodingScheme::Dummy, None).unwrap();
        let recoded = split_on_indicators(&model, std::slice::from_ref(&enc.spec), &enc.dataset).unwrap();
        let ind = enc.spec.derived_columns();
        assert_eq!(ind.len(), 1);
        let partition = PlayerPartition::new(
            vec![ind.clone(), vec![1], vec![2]],
            vec!["x0".into(), "x1".into(), "x2".into()],
        )
        .unwrap();
        let row = rng.random_range(0..60);
        let xe = enc.dataset.row(row);
        let coalition = coalition_sv_categorical(
            &recoded,
            &enc.dataset,
            &partition,
            std::slice::from_ref(&enc.spec),
            &xe,
            Estimator::Discrete,
            row,
            DEFAULT_MAX_PLAYERS,
        )
        .unwrap()
        .values();
        let single = Explainer::new(recoded, Some(enc.dataset.clone()), partition).unwrap();
        let individual = brute_force_sv(&single, &xe, Estimator::Discrete, row, DEFAULT_MAX_PLAYERS)
            .unwrap()
            .values();
        for (a, b) in coalition.iter().zip(&individual) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        checked += 1;
    }
}

/// Exact values of the toy model when the class is seen through `k`
/// indicators, with the continuous columns as players 0..3 and the
/// indicators as players 3..3+k.
fn toy_indicator_table(k: usize) -> Vec<f64> {
    let toy = gen_toy_categorical(10, 0).unwrap();
    let x = TOY_OBSERVATION;
    let class = x[TOY_CLASS_COLUMN] as usize;
    (0..1usize << (3 + k))
        .map(|s| {
            let cont: Vec<usize> = (0..3).filter(|j| s >> j & 1 == 1).collect();
            let known: Vec<Option<bool>> = (0..k).map(|i| (s >> (3 + i) & 1 == 1).then_some(i == class)).collect();
            toy.exact_value_indicators(&cont, &x, &known).unwrap()
        })
        .collect()
}

#[test]
fn toy_coalition_differs_from_summed_indicators() {
    let toy = gen_toy_categorical(10, 0).unwrap();
    let x = TOY_OBSERVATION;
    let original: Vec<f64> = (0..16usize)
        .map(|s| {
            let cols: Vec<usize> = (0..4).filter(|j| s >> j & 1 == 1).collect();
            toy.exact_value(&cols, &x).unwrap()
        })
        .collect();
    let phi_z = shapley_from_table(&original)[TOY_CLASS_COLUMN];

    for k in [2, 3] {
        let table = toy_indicator_table(k);
        let c_mask = ((1usize << k) - 1) << 3;
        let coalition = coalition_from_table(&table, c_mask);
        let summed: f64 = shapley_from_table(&table)[3..].iter().sum();
        assert_abs_diff_eq!(coalition, phi_z, epsilon = 1e-9);
        assert!(
            (summed - coalition).abs() > 1e-3,
            "{k} indicators: sum {summed} vs coalition {coalition}"
        );
    }
}

fn report(instance: usize, labels: &[&str], phi: Vec<f64>) -> SVReport {
    let labels: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
    SVReport::new(instance, Estimator::Leaf, Algorithm::BruteForce, &labels, phi, 0.0, 0.0)
}

#[test]
fn global_importance_sums_magnitudes() {
    let reports = [
        report(0, &["a", "b", "c"], vec![1.0, -3.0, 0.5]),
        report(1, &["a", "b", "c"], vec![-2.0, 0.5, 0.5]),
    ];
    let g = global_importance(&reports).unwrap();
    assert_eq!(g.importance, vec![3.0, 3.5, 1.0]);
    assert_eq!(g.ranking, vec![1, 0, 2]);
    let mismatched = [reports[0].clone(), report(1, &["a", "c", "b"], vec![0.0; 3])];
    assert!(global_importance(&mismatched).is_err());
}

#[test]
fn grouping_encoded_players_changes_rankings() {
    let fine = [
        report(0, &["z_a", "z_b", "x"], vec![0.6, 0.6, 1.0]),
        report(1, &["z_a", "z_b", "x"], vec![0.1, 0.1, 1.0]),
    ];
    let groups = [("z".to_string(), vec!["z_a".to_string(), "z_b".to_string()])];
    let summed: Vec<SVReport> = fine.iter().map(|r| sum_groups(r, &groups)).collect();
    assert_eq!(summed[0].labels(), vec!["z", "x"]);
    assert_abs_diff_eq!(summed[0].phi["z"], 1.2);
    // Coalition values that rank x first on both instances.
    let coalition = [
        report(0, &["z", "x"], vec![0.9, 1.0]),
        report(1, &["z", "x"], vec![0.3, 1.0]),
    ];
    assert_eq!(ranking_change_fraction(&summed, &coalition).unwrap(), 0.5);
    assert_eq!(ranking_change_fraction(&coalition, &coalition).unwrap(), 0.0);
    assert!(ranking_change_fraction(&summed, &coalition[..1]).is_err());
}

#[test]
fn coalition_and_summed_rankings_on_random_encoded_data() {
    let mut rng = stream_rng(33, 0);
    let mut summed_reports = Vec::new();
    let mut coalition_reports = Vec::new();
    for case in 0..25 {
        let data = random_categorical(&mut rng, 80, 3, 4).unwrap();
        let model = random_ensemble(&mut rng, &data, 2, 4).unwrap();
        let enc = encode_categorical(&data, 0, EncodingScheme::OneHot, None).unwrap();
        let recoded = split_on_indicators(&model, std::slice::from_ref(&enc.spec), &enc.dataset).unwrap();
        let ind = enc.spec.derived_columns();
        let mut fine_groups: Vec<Vec<usize>> = ind.iter().map(|&c| vec![c]).collect();
        fine_groups.extend([vec![1], vec![2]]);
        let mut fine_labels: Vec<String> = (0..ind.len()).map(|i| format!("x0_{i}")).collect();
        fine_labels.extend(["x1".to_string(), "x2".to_string()]);
        let fine = Explainer::new(
            recoded.clone(),
            Some(enc.dataset.clone()),
            PlayerPartition::new(fine_groups, fine_labels.clone()).unwrap(),
        )
        .unwrap();
        let grouped = PlayerPartition::new(
            vec![ind.clone(), vec![1], vec![2]],
            vec!["x0".into(), "x1".into(), "x2".into()],
        )
        .unwrap();
        let row = rng.random_range(0..80);
        let xe = enc.dataset.row(row);
        let individual = brute_force_sv(&fine, &xe, Estimator::Discrete, case, DEFAULT_MAX_PLAYERS).unwrap();
        let groups = [("x0".to_string(), fine_labels[..ind.len()].to_vec())];
        summed_reports.push(sum_groups(&individual, &groups));
        coalition_reports.push(
            coalition_sv_categorical(
                &recoded,
                &enc.dataset,
                &grouped,
                std::slice::from_ref(&enc.spec),
                &xe,
                Estimator::Discrete,
                case,
                DEFAULT_MAX_PLAYERS,
            )
            .unwrap(),
        );
    }
    let fraction = ranking_change_fraction(&summed_reports, &coalition_reports).unwrap();
    assert!((0.0..=1.0).contains(&fraction));
    // Both attributions satisfy efficiency, so only the split among players moves.
    for (a, b) in summed_reports.iter().zip(&coalition_reports) {
        assert_abs_diff_eq!(
            a.values().iter().sum::<f64>(),
            b.values().iter().sum::<f64>(),
            epsilon = 1e-9
        );
    }
}
