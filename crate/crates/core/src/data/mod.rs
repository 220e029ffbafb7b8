//! Column-typed tabular data and the empirical counting primitive behind
//! every estimator.

mod count;
mod discretize;
mod encode;
mod io;
mod partition;

pub use count::{count_region, Condition, Constraint};
pub use discretize::{apply_bin_edges, bin_index, quantile_discretize, quantile_edges, DiscretizeWarning, Discretized};
pub use encode::{decode_indicators, encode_categorical, Encoded, EncodingScheme, EncodingSpec};
pub use io::{load_dataset, parse_schema, read_dataset, write_csv, write_schema, ColumnSpec, Schema};
pub use partition::PlayerPartition;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    Continuous,
    Categorical,
    Indicator,
}

/// Per-column metadata.
///
/// Categorical columns store, for every row, the numeric level of its
/// category (`levels[k]` for `categories[k]`). Levels default to the category
/// position and are strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMeta {
    pub name: String,
    pub kind: FeatureKind,
    pub categories: Vec<String>,
    pub levels: Vec<f64>,
    /// Quantile edges with infinite sentinels, for discretized columns.
    pub bin_edges: Option<Vec<f64>>,
    /// Source column of a derived indicator.
    pub source_feature: Option<usize>,
    /// Encoding that produced a derived indicator.
    pub encoding: Option<EncodingScheme>,
    /// Source level the indicator flags.
    pub flags_level: Option<f64>,
}

impl FeatureMeta {
    pub fn continuous(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: FeatureKind::Continuous,
            categories: Vec::new(),
            levels: Vec::new(),
            bin_edges: None,
            source_feature: None,
            encoding: None,
            flags_level: None,
        }
    }

    pub fn categorical(name: impl Into<String>, categories: Vec<String>) -> Self {
        let levels = (0..categories.len()).map(|k| k as f64).collect();
        Self {
            kind: FeatureKind::Categorical,
            categories,
            levels,
            ..Self::continuous(name)
        }
    }

    pub fn indicator(name: impl Into<String>) -> Self {
        Self {
            kind: FeatureKind::Indicator,
            categories: vec!["0".into(), "1".into()],
            levels: vec![0.0, 1.0],
            ..Self::continuous(name)
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self.kind, FeatureKind::Categorical | FeatureKind::Indicator)
    }

    pub fn level_of(&self, category: &str) -> Option<f64> {
        self.categories
            .iter()
            .position(|c| c == category)
            .map(|k| self.levels[k])
    }

    pub fn category_of(&self, level: f64) -> Option<&str> {
        self.levels
            .iter()
            .position(|&l| l == level)
            .map(|k| self.categories[k].as_str())
    }
}

/// Immutable column-major table.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    meta: Vec<FeatureMeta>,
    columns: Vec<Vec<f64>>,
    n_rows: usize,
}

impl Dataset {
    pub fn new(meta: Vec<FeatureMeta>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if meta.len() != columns.len() {
            return Err(Error::Dimension {
                expected: meta.len(),
                got: columns.len(),
            });
        }
        let n_rows = columns.first().map_or(0, Vec::len);
        for (m, col) in meta.iter().zip(&columns) {
            if col.len() != n_rows {
                return Err(Error::InvalidData(format!(
                    "column '{}' has {} rows, expected {n_rows}",
                    m.name,
                    col.len()
                )));
            }
            validate_column(m, col)?;
        }
        Ok(Self { meta, columns, n_rows })
    }

    pub fn from_rows(meta: Vec<FeatureMeta>, rows: &[Vec<f64>]) -> Result<Self> {
        let p = meta.len();
        let mut columns = vec![Vec::with_capacity(rows.len()); p];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::Data {
                    row: r,
                    column: String::new(),
                    message: format!("expected {p} values, found {}", row.len()),
                });
            }
            for (c, &v) in row.iter().enumerate() {
                columns[c].push(v);
            }
        }
        if rows.is_empty() {
            return Ok(Self {
                meta,
                columns,
                n_rows: 0,
            });
        }
        Self::new(meta, columns)
    }

    /// All-continuous dataset with generated names `x0, x1, ...`.
    pub fn continuous(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        let meta = (0..p).map(|j| FeatureMeta::continuous(format!("x{j}"))).collect();
        Self::from_rows(meta, rows)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn meta(&self) -> &[FeatureMeta] {
        &self.meta
    }

    pub fn column_meta(&self, j: usize) -> &FeatureMeta {
        &self.meta[j]
    }

    pub fn names(&self) -> Vec<String> {
        self.meta.iter().map(|m| m.name.clone()).collect()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    #[inline]
    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.columns[col][row]
    }

    pub fn row(&self, r: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[r]).collect()
    }

    /// Row-major copy of the values.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n_rows).map(|r| self.row(r)).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.meta.iter().position(|m| m.name == name)
    }

    /// Selects a subset of rows, keeping metadata.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        let columns = self
            .columns
            .iter()
            .map(|c| rows.iter().map(|&r| c[r]).collect())
            .collect();
        Dataset {
            meta: self.meta.clone(),
            columns,
            n_rows: rows.len(),
        }
    }

    /// Applies a strictly increasing map per column to values, categorical
    /// levels and bin edges alike. Indicator columns become categorical with
    /// the mapped levels.
    pub fn map_monotone(&self, mut map: impl FnMut(usize, f64) -> f64) -> Result<Dataset> {
        let mut meta = self.meta.clone();
        let mut columns = self.columns.clone();
        for (j, (m, col)) in meta.iter_mut().zip(columns.iter_mut()).enumerate() {
            for v in col.iter_mut() {
                *v = map(j, *v);
            }
            for l in m.levels.iter_mut() {
                *l = map(j, *l);
            }
            if let Some(edges) = m.bin_edges.as_mut() {
                for e in edges.iter_mut().filter(|e| e.is_finite()) {
                    *e = map(j, *e);
                }
            }
            if m.kind == FeatureKind::Indicator {
                m.kind = FeatureKind::Categorical;
            }
            if m.levels.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidData(format!(
                    "map is not strictly increasing on the levels of column '{}'",
                    m.name
                )));
            }
        }
        Dataset::new(meta, columns)
    }

    pub(crate) fn push_column(&mut self, meta: FeatureMeta, values: Vec<f64>) -> Result<()> {
        if values.len() != self.n_rows {
            return Err(Error::InvalidData(format!(
                "column '{}' has {} rows, expected {}",
                meta.name,
                values.len(),
                self.n_rows
            )));
        }
        validate_column(&meta, &values)?;
        self.meta.push(meta);
        self.columns.push(values);
        Ok(())
    }

    pub(crate) fn replace_column(&mut self, j: usize, meta: FeatureMeta, values: Vec<f64>) -> Result<()> {
        validate_column(&meta, &values)?;
        self.meta[j] = meta;
        self.columns[j] = values;
        Ok(())
    }
}

fn validate_column(m: &FeatureMeta, col: &[f64]) -> Result<()> {
    match m.kind {
        FeatureKind::Continuous => {
            if let Some(r) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::Data {
                    row: r,
                    column: m.name.clone(),
                    message: "non-finite value in continuous column".into(),
                });
            }
        }
        FeatureKind::Categorical | FeatureKind::Indicator => {
            if m.levels.len() != m.categories.len() {
                return Err(Error::InvalidData(format!(
                    "column '{}': {} levels for {} categories",
                    m.name,
                    m.levels.len(),
                    m.categories.len()
                )));
            }
            if let Some(r) = col.iter().position(|v| !m.levels.contains(v)) {
                return Err(Error::Data {
                    row: r,
                    column: m.name.clone(),
                    message: format!("value {} is not a declared category level", col[r]),
                });
            }
        }
    }
    Ok(())
}
