use leafshap::data::{
    bin_index, count_region, encode_categorical, load_dataset, parse_schema, quantile_discretize, quantile_edges,
    write_csv, write_schema, Constraint, EncodingScheme,
};
use leafshap::oracle::stream_rng;
use leafshap::oracle::synth::{gen_toy_categorical, TOY_CLASS_COLUMN};
use leafshap::{Dataset, FeatureMeta};
use rand::Rng;

fn mixed(n: usize, seed: u64) -> Dataset {
    let mut rng = stream_rng(seed, 0);
    let meta = vec![
        FeatureMeta::continuous("age"),
        FeatureMeta::categorical("color", vec!["red".into(), "green".into(), "blue".into()]),
        FeatureMeta::indicator("member"),
        FeatureMeta::continuous("score"),
    ];
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            vec![
                rng.random_range(-50.0..50.0),
                rng.random_range(0..3) as f64,
                rng.random_range(0..2) as f64,
                rng.random::<f64>() * 1e-7,
            ]
        })
        .collect();
    Dataset::from_rows(meta, &rows).unwrap()
}

#[test]
fn ten_thousand_row_csv_round_trips() {
    let ds = mixed(10_000, 1);
    let text = write_csv(&ds).unwrap();
    let schema = parse_schema(&write_schema(&ds)).unwrap();
    let back = load_dataset(&text, &schema).unwrap();
    assert_eq!(back.n_rows(), 10_000);
    assert_eq!(back.meta(), ds.meta());
    assert_eq!(back.columns(), ds.columns());
}

#[test]
fn unknown_category_is_a_data_error() {
    let schema = parse_schema("color = categorical(red,green)\n").unwrap();
    let err = load_dataset("color\nred\npurple\n", &schema).unwrap_err();
    assert!(err.to_string().contains("row"), "{err}");
}

#[test]
fn uniform_values_fill_quantile_bins_evenly() {
    let mut rng = stream_rng(2, 0);
    let n = 100_000;
    let values: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let edges = quantile_edges(&values, 10);
    let mut counts = [0usize; 10];
    for &v in &values {
        counts[bin_index(&edges, v)] += 1;
    }
    for c in counts {
        let share = c as f64 / (n / 10) as f64;
        assert!((share - 1.0).abs() <= 0.02, "bin holds {c} rows");
    }

    let ds = Dataset::continuous(&values.iter().map(|&v| vec![v]).collect::<Vec<_>>()).unwrap();
    let d = quantile_discretize(&ds, &[0], 10, true).unwrap();
    assert!(d.warnings.is_empty());
    assert_eq!(d.dataset.n_cols(), 11);
    assert_eq!(d.partition.unwrap().players()[0].len(), 10);
}

#[test]
fn tied_values_yield_fewer_bins_with_a_warning() {
    let rows: Vec<Vec<f64>> = (0..100).map(|i| vec![(i % 3) as f64]).collect();
    let d = quantile_discretize(&Dataset::continuous(&rows).unwrap(), &[0], 10, false).unwrap();
    assert_eq!(d.warnings.len(), 1);
    assert!(d.warnings[0].effective < 10);
}

#[test]
fn toy_variable_encodings_have_the_expected_layout() {
    let toy = gen_toy_categorical(500, 3).unwrap();
    let ds = &toy.dataset;
    for (scheme, k) in [(EncodingScheme::Dummy, 2), (EncodingScheme::OneHot, 3)] {
        let enc = encode_categorical(ds, TOY_CLASS_COLUMN, scheme, None).unwrap();
        let ind = enc.spec.derived_columns();
        assert_eq!(ind.len(), k);
        assert_eq!(enc.dataset.n_cols(), 4 + k);
        assert_eq!(enc.partition.players(), std::slice::from_ref(&ind));
        for r in 0..ds.n_rows() {
            let z = ds.value(r, TOY_CLASS_COLUMN) as usize;
            let hot: Vec<f64> = ind.iter().map(|&c| enc.dataset.value(r, c)).collect();
            let expected: Vec<f64> = (0..k).map(|j| f64::from(u8::from(j == z))).collect();
            assert_eq!(hot, expected, "row {r}, class {z}");
        }
    }
}

#[test]
fn count_region_matches_a_row_scan() {
    let mut rng = stream_rng(4, 0);
    let ds = mixed(5_000, 5);
    for _ in 0..200 {
        let lo = rng.random_range(-60.0..40.0);
        let hi = lo + rng.random_range(0.0..60.0);
        let color = rng.random_range(0..3) as f64;
        let constraints = [Constraint::interval(0, lo, hi), Constraint::equals(1, color)];
        let scan = (0..ds.n_rows())
            .filter(|&r| {
                let a = ds.value(r, 0);
                lo < a && a <= hi && ds.value(r, 1) == color
            })
            .count();
        assert_eq!(count_region(&ds, &constraints), scan);
    }
    assert_eq!(count_region(&ds, &[]), ds.n_rows());
}
