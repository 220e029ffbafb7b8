use serde::{Deserialize, Serialize};

use super::{Dataset, FeatureKind, FeatureMeta, PlayerPartition};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingScheme {
    OneHot,
    Dummy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodingSpec {
    pub scheme: EncodingScheme,
    pub source: usize,
    /// Category without an indicator (dummy encoding only).
    pub dropped_category: Option<String>,
    /// Source category to derived column index.
    pub column_map: Vec<(String, usize)>,
}

impl EncodingSpec {
    pub fn derived_columns(&self) -> Vec<usize> {
        self.column_map.iter().map(|&(_, c)| c).collect()
    }
}

#[derive(Debug, Clone)]
pub struct Encoded {
    pub dataset: Dataset,
    pub spec: EncodingSpec,
    /// Single player holding every derived column.
    pub partition: PlayerPartition,
}

/// Appends indicator columns for a categorical column. Dummy encoding drops
/// `dropped` (default: the last category). The source column is kept.
pub fn encode_categorical(
    ds: &Dataset,
    column: usize,
    scheme: EncodingScheme,
    dropped: Option<&str>,
) -> Result<Encoded> {
    let meta = ds.column_meta(column).clone();
    if meta.kind != FeatureKind::Categorical {
        return Err(Error::Config(format!("column '{}' is not categorical", meta.name)));
    }
    let k = meta.categories.len();
    if k < 2 {
        return Err(Error::Config(format!(
            "column '{}' has {k} category; encoding needs at least 2",
            meta.name
        )));
    }
    let dropped_category = match (scheme, dropped) {
        (EncodingScheme::OneHot, None) => None,
        (EncodingScheme::OneHot, Some(_)) => return Err(Error::Config("one-hot encoding drops no category".into())),
        (EncodingScheme::Dummy, Some(d)) => {
            if meta.level_of(d).is_none() {
                return Err(Error::Config(format!("unknown category '{d}' for '{}'", meta.name)));
            }
            Some(d.to_string())
        }
        (EncodingScheme::Dummy, None) => Some(meta.categories[k - 1].clone()),
    };

    let mut out = ds.clone();
    let mut column_map = Vec::new();
    for (cat, &level) in meta.categories.iter().zip(&meta.levels) {
        if dropped_category.as_deref() == Some(cat.as_str()) {
            continue;
        }
        let mut im = FeatureMeta::indicator(format!("{}={cat}", meta.name));
        im.source_feature = Some(column);
        im.encoding = Some(scheme);
        im.flags_level = Some(level);
        let values = ds.column(column).iter().map(|&v| (v == level) as u8 as f64).collect();
        column_map.push((cat.clone(), out.n_cols()));
        out.push_column(im, values)?;
    }
    let partition = PlayerPartition::new(
        vec![column_map.iter().map(|&(_, c)| c).collect()],
        vec![meta.name.clone()],
    )?;
    Ok(Encoded {
        dataset: out,
        spec: EncodingSpec {
            scheme,
            source: column,
            dropped_category,
            column_map,
        },
        partition,
    })
}

/// Recovers the source column's levels from its indicators. Rows with an
/// impossible pattern are an error.
pub fn decode_indicators(ds: &Dataset, spec: &EncodingSpec) -> Result<Vec<f64>> {
    let meta = ds.column_meta(spec.source);
    let dropped_level = spec.dropped_category.as_deref().and_then(|d| meta.level_of(d));
    (0..ds.n_rows())
        .map(|r| {
            let hot: Vec<&String> = spec
                .column_map
                .iter()
                .filter(|&&(_, c)| ds.value(r, c) == 1.0)
                .map(|(cat, _)| cat)
                .collect();
            match (hot.as_slice(), dropped_level) {
                ([cat], _) => Ok(meta.level_of(cat).expect("category from metadata")),
                ([], Some(level)) => Ok(level),
                _ => Err(Error::Data {
                    row: r,
                    column: meta.name.clone(),
                    message: format!("{} indicators set", hot.len()),
                }),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc(rows: &[f64]) -> Dataset {
        let meta = vec![FeatureMeta::categorical("z", vec!["a".into(), "b".into(), "c".into()])];
        Dataset::new(meta, vec![rows.to_vec()]).unwrap()
    }

    #[test]
    fn dummy_drop_c() {
        let ds = abc(&[0.0, 2.0, 1.0]);
        let e = encode_categorical(&ds, 0, EncodingScheme::Dummy, Some("c")).unwrap();
        assert_eq!(e.dataset.n_cols(), 3);
        assert_eq!(e.dataset.row(0), vec![0.0, 1.0, 0.0]);
        assert_eq!(e.dataset.row(1), vec![2.0, 0.0, 0.0]);
        assert_eq!(decode_indicators(&e.dataset, &e.spec).unwrap(), vec![0.0, 2.0, 1.0]);
        assert_eq!(e.partition.players(), &[vec![1, 2]]);
    }

    #[test]
    fn one_hot_rows_sum_to_one() {
        let ds = abc(&[0.0, 2.0, 1.0, 1.0]);
        let e = encode_categorical(&ds, 0, EncodingScheme::OneHot, None).unwrap();
        for r in 0..4 {
            let s: f64 = e.spec.derived_columns().iter().map(|&c| e.dataset.value(r, c)).sum();
            assert_eq!(s, 1.0);
        }
    }

    #[test]
    fn single_category_is_degenerate() {
        let meta = vec![FeatureMeta::categorical("z", vec!["a".into()])];
        let ds = Dataset::new(meta, vec![vec![0.0]]).unwrap();
        assert!(encode_categorical(&ds, 0, EncodingScheme::OneHot, None).is_err());
    }
}
