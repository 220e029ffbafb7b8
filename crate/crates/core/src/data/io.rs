//! CSV data with a plain-text schema sidecar:
//!
//! ```text
//! # comments and blank lines are ignored
//! age = continuous
//! color = categorical(red,green,blue)
//! is_member = indicator
//! ```

use std::path::Path;

use super::{Dataset, FeatureKind, FeatureMeta};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnSpec {
    Continuous,
    Categorical(Vec<String>),
    Indicator,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Schema {
    pub columns: Vec<(String, ColumnSpec)>,
}

impl Schema {
    pub fn get(&self, name: &str) -> Option<&ColumnSpec> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }
}

pub fn parse_schema(text: &str) -> Result<Schema> {
    let mut columns = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let path = format!("schema line {}", i + 1);
        let (name, kind) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: path.clone(),
            message: "expected 'column = kind'".into(),
        })?;
        let (name, kind) = (name.trim(), kind.trim());
        let spec = if kind == "continuous" {
            ColumnSpec::Continuous
        } else if kind == "indicator" {
            ColumnSpec::Indicator
        } else if let Some(inner) = kind.strip_prefix("categorical(").and_then(|s| s.strip_suffix(')')) {
            let cats: Vec<String> = inner.split(',').map(|c| c.trim().to_string()).collect();
            if cats.iter().any(String::is_empty) {
                return Err(Error::Parse {
                    path,
                    message: "empty category name".into(),
                });
            }
            ColumnSpec::Categorical(cats)
        } else {
            return Err(Error::Parse {
                path,
                message: format!("unknown column kind '{kind}'"),
            });
        };
        columns.push((name.to_string(), spec));
    }
    Ok(Schema { columns })
}

pub fn write_schema(ds: &Dataset) -> String {
    let mut out = String::new();
    for m in ds.meta() {
        let kind = match m.kind {
            FeatureKind::Continuous => "continuous".to_string(),
            FeatureKind::Indicator => "indicator".to_string(),
            FeatureKind::Categorical => format!("categorical({})", m.categories.join(",")),
        };
        out.push_str(&format!("{} = {}\n", m.name, kind));
    }
    out
}

/// Parses CSV text with a header row. Every header column must appear in the
/// schema.
pub fn load_dataset(document: &str, schema: &Schema) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(document.as_bytes());
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let mut meta = Vec::with_capacity(headers.len());
    for h in &headers {
        let spec = schema.get(h).ok_or_else(|| Error::Parse {
            path: format!("header column '{h}'"),
            message: "column missing from schema".into(),
        })?;
        meta.push(match spec {
            ColumnSpec::Continuous => FeatureMeta::continuous(h.clone()),
            ColumnSpec::Indicator => FeatureMeta::indicator(h.clone()),
            ColumnSpec::Categorical(c) => FeatureMeta::categorical(h.clone(), c.clone()),
        });
    }
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); headers.len()];
    for (r, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Data {
            row: r,
            column: String::new(),
            message: e.to_string(),
        })?;
        if rec.len() != headers.len() {
            return Err(Error::Data {
                row: r,
                column: String::new(),
                message: format!("expected {} fields, found {}", headers.len(), rec.len()),
            });
        }
        for (j, tok) in rec.iter().enumerate() {
            let m = &meta[j];
            let v = match m.kind {
                FeatureKind::Continuous => tok.parse::<f64>().ok().filter(|v| v.is_finite()),
                FeatureKind::Indicator => match tok {
                    "0" | "0.0" => Some(0.0),
                    "1" | "1.0" => Some(1.0),
                    _ => None,
                },
                FeatureKind::Categorical => m.level_of(tok),
            }
            .ok_or_else(|| Error::Data {
                row: r,
                column: m.name.clone(),
                message: match m.kind {
                    FeatureKind::Categorical => format!("unknown category '{tok}'"),
                    _ => format!("cannot parse '{tok}' as a {:?} value", m.kind),
                },
            })?;
            columns[j].push(v);
        }
    }
    if columns.iter().all(Vec::is_empty) {
        return Dataset::from_rows(meta, &[]);
    }
    Dataset::new(meta, columns)
}

pub fn read_dataset(data: impl AsRef<Path>, schema: impl AsRef<Path>) -> Result<Dataset> {
    let schema = parse_schema(&std::fs::read_to_string(schema)?)?;
    load_dataset(&std::fs::read_to_string(data)?, &schema)
}

/// Writes CSV text that [`load_dataset`] reads back to the identical matrix.
pub fn write_csv(ds: &Dataset) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(ds.names())?;
    for r in 0..ds.n_rows() {
        let rec: Vec<String> = (0..ds.n_cols())
            .map(|j| {
                let m = ds.column_meta(j);
                let v = ds.value(r, j);
                match m.kind {
                    FeatureKind::Continuous => format!("{v:?}"),
                    FeatureKind::Indicator => format!("{}", v as i64),
                    FeatureKind::Categorical => m.category_of(v).unwrap_or("?").to_string(),
                }
            })
            .collect();
        w.write_record(rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_small_real_table() {
        let schema = parse_schema("a = continuous\nb = continuous\n").unwrap();
        let ds = load_dataset("a,b\n1,2\n3.5,-4\n0,0\n", &schema).unwrap();
        assert_eq!((ds.n_rows(), ds.n_cols()), (3, 2));
        assert_eq!(ds.column(0), &[1.0, 3.5, 0.0]);
    }

    #[test]
    fn unknown_category_names_row() {
        let schema = parse_schema("z = categorical(a,b,c)").unwrap();
        match load_dataset("z\na\nb\nd\n", &schema) {
            Err(Error::Data { row, column, message }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "z");
                assert!(message.contains("'d'"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_numeric_and_ragged_rows() {
        let schema = parse_schema("a = continuous\nb = continuous").unwrap();
        assert!(matches!(
            load_dataset("a,b\n1,x\n", &schema),
            Err(Error::Data { row: 0, .. })
        ));
        assert!(matches!(
            load_dataset("a,b\n1,2\n3\n", &schema),
            Err(Error::Data { row: 1, .. })
        ));
    }

    #[test]
    fn schema_rejects_unknown_kind() {
        assert!(parse_schema("a = fancy").is_err());
        assert!(parse_schema("a continuous").is_err());
    }
}
