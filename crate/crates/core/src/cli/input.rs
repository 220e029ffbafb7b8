//! Loading and selecting inputs shared by the subcommands.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use leafshap::data::{apply_bin_edges, load_dataset, quantile_discretize, read_dataset, ColumnSpec, Schema};
use leafshap::{Dataset, Error, FeatureKind, PlayerPartition, Result};

/// Rejects paths that do not exist before any work starts.
pub fn require(path: &Path, what: &str) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::Config(format!("{what} '{}' does not exist", path.display())))
    }
}

pub fn require_all(paths: &[(&Option<PathBuf>, &str)]) -> Result<()> {
    for (p, what) in paths {
        if let Some(p) = p {
            require(p, what)?;
        }
    }
    Ok(())
}

/// Reads a CSV with its schema, or treats every column as continuous when no
/// schema is given.
pub fn load_data(data: &Path, schema: Option<&Path>) -> Result<Dataset> {
    if let Some(schema) = schema {
        return read_dataset(data, schema);
    }
    let text = std::fs::read_to_string(data)?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let columns = reader
        .headers()?
        .iter()
        .map(|h| (h.to_string(), ColumnSpec::Continuous))
        .collect();
    load_dataset(&text, &Schema { columns })
}

/// Which rows to explain.
#[derive(Debug, Clone, PartialEq)]
pub enum Selection {
    All,
    /// Half-open row range.
    Range(usize, usize),
    List(Vec<usize>),
}

impl FromStr for Selection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || {
            Error::Config(format!(
                "bad instance selector '{s}' (expected all, a..b, a..=b or a list)"
            ))
        };
        if s == "all" {
            return Ok(Selection::All);
        }
        if let Some((a, b)) = s.split_once("..") {
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let (b, inclusive) = match b.strip_prefix('=') {
                Some(b) => (b, true),
                None => (b, false),
            };
            let b: usize = b.trim().parse().map_err(|_| bad())?;
            let end = if inclusive { b + 1 } else { b };
            if end < a {
                return Err(bad());
            }
            return Ok(Selection::Range(a, end));
        }
        s.split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| t.trim().parse().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()
            .map(Selection::List)
    }
}

impl Selection {
    pub fn rows(&self, n: usize) -> Result<Vec<usize>> {
        let rows: Vec<usize> = match self {
            Selection::All => (0..n).collect(),
            Selection::Range(a, b) => (*a..*b).collect(),
            Selection::List(v) => v.clone(),
        };
        if let Some(&r) = rows.iter().find(|&&r| r >= n) {
            return Err(Error::Config(format!("instance {r} is out of range for {n} rows")));
        }
        Ok(rows)
    }
}

/// Quantile-bins every continuous column of `data` and bins `queries` with
/// the same edges.
pub fn discretize(data: &Dataset, queries: Option<&Dataset>, q: usize) -> Result<(Dataset, Option<Dataset>)> {
    let cols: Vec<usize> = (0..data.n_cols())
        .filter(|&j| data.column_meta(j).kind == FeatureKind::Continuous)
        .collect();
    let binned = quantile_discretize(data, &cols, q, false)?.dataset;
    let queries = match queries {
        None => None,
        Some(qs) => {
            if qs.n_cols() != binned.n_cols() {
                return Err(Error::Dimension {
                    expected: binned.n_cols(),
                    got: qs.n_cols(),
                });
            }
            let mut out = qs.clone();
            for &c in &cols {
                let edges = binned
                    .column_meta(c)
                    .bin_edges
                    .clone()
                    .expect("binned column has edges");
                out = apply_bin_edges(&out, c, &edges)?;
            }
            Some(out)
        }
    };
    Ok((binned, queries))
}

/// Resolves a comma list of column names or indices.
pub fn columns(spec: &str, names: &[String]) -> Result<Vec<usize>> {
    spec.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<usize>()
                .ok()
                .filter(|&j| j < names.len())
                .or_else(|| names.iter().position(|n| n == t))
                .ok_or_else(|| Error::Config(format!("unknown column '{t}'")))
        })
        .collect()
}

pub fn partition(path: Option<&Path>, labels: Vec<String>) -> Result<PlayerPartition> {
    match path {
        Some(p) => PlayerPartition::read(p),
        None => Ok(PlayerPartition::singletons(labels)),
    }
}

/// Writes to the file or to stdout.
pub fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}
