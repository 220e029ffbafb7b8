use super::{Dataset, EncodingScheme, FeatureKind, FeatureMeta, PlayerPartition};
use crate::error::{Error, Result};

/// A column whose requested bin count could not be met because of ties.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizeWarning {
    pub column: usize,
    pub requested: usize,
    pub effective: usize,
}

#[derive(Debug, Clone)]
pub struct Discretized {
    pub dataset: Dataset,
    /// One group of bin indicators per discretized column, present when the
    /// indicators were requested.
    pub partition: Option<PlayerPartition>,
    pub warnings: Vec<DiscretizeWarning>,
}

/// Quantile edges of `values` for `q` bins, with infinite sentinels.
///
/// The r-th inner edge is the order statistic at 0-based rank `floor(n r / q)`,
/// so edges are data values and bin `[edge[r-1], edge[r])` holds about `n / q`
/// rows. Edges that would leave the first bin empty and repeated edges are
/// dropped, which yields fewer than `q` bins on tied data.
pub fn quantile_edges(values: &[f64], q: usize) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut edges = vec![f64::NEG_INFINITY];
    if n > 0 {
        let min = sorted[0];
        for r in 1..q {
            let e = sorted[(n * r / q).min(n - 1)];
            if e > min && e > *edges.last().unwrap() {
                edges.push(e);
            }
        }
    }
    edges.push(f64::INFINITY);
    edges
}

/// Bin index `r` (0-based) with `edges[r] <= v < edges[r + 1]`.
#[inline]
pub fn bin_index(edges: &[f64], v: f64) -> usize {
    // edges[0] is -inf, so the partition point is at least 1.
    edges.partition_point(|&e| e <= v) - 1
}

fn binned_meta(name: &str, edges: Vec<f64>) -> FeatureMeta {
    let bins = edges.len() - 1;
    let mut meta = FeatureMeta::categorical(name, (0..bins).map(|r| format!("bin{r}")).collect());
    meta.bin_edges = Some(edges);
    meta
}

/// Replaces a continuous column by its bin index under fixed `edges`, for
/// example to bin test data with edges learned on training data. A column
/// already binned with the same edges is returned unchanged.
pub fn apply_bin_edges(ds: &Dataset, column: usize, edges: &[f64]) -> Result<Dataset> {
    check_edges(edges)?;
    let meta = ds.column_meta(column);
    if meta.bin_edges.as_deref() == Some(edges) {
        return Ok(ds.clone());
    }
    if meta.kind != FeatureKind::Continuous {
        return Err(Error::Config(format!("column '{}' is not continuous", meta.name)));
    }
    let values = ds.column(column).iter().map(|&v| bin_index(edges, v) as f64).collect();
    let mut out = ds.clone();
    out.replace_column(column, binned_meta(&meta.name, edges.to_vec()), values)?;
    Ok(out)
}

fn check_edges(edges: &[f64]) -> Result<()> {
    let ok = edges.len() >= 2
        && edges[0] == f64::NEG_INFINITY
        && edges[edges.len() - 1] == f64::INFINITY
        && edges.windows(2).all(|w| w[0] < w[1]);
    if ok {
        Ok(())
    } else {
        Err(Error::Config(
            "bin edges must be strictly ascending from -inf to +inf".into(),
        ))
    }
}

/// Discretizes `columns` into `q` quantile bins in place. With `indicators`
/// set, also appends one indicator column per bin and groups each column's
/// indicators as a single player.
pub fn quantile_discretize(ds: &Dataset, columns: &[usize], q: usize, indicators: bool) -> Result<Discretized> {
    if q < 2 {
        return Err(Error::Config(format!("q must be at least 2, got {q}")));
    }
    let mut out = ds.clone();
    let mut warnings = Vec::new();
    let mut groups = Vec::new();
    let mut labels = Vec::new();
    for &c in columns {
        if c >= ds.n_cols() {
            return Err(Error::Dimension {
                expected: ds.n_cols(),
                got: c + 1,
            });
        }
        let meta = ds.column_meta(c);
        if meta.kind != FeatureKind::Continuous {
            return Err(Error::Config(format!(
                "column '{}' is not continuous and cannot be discretized",
                meta.name
            )));
        }
        let edges = quantile_edges(ds.column(c), q);
        let bins = edges.len() - 1;
        if bins < q {
            log::warn!("column '{}': {bins} effective bins instead of {q}", meta.name);
            warnings.push(DiscretizeWarning {
                column: c,
                requested: q,
                effective: bins,
            });
        }
        out = apply_bin_edges(&out, c, &edges)?;
        if indicators {
            let mut group = Vec::with_capacity(bins);
            for r in 0..bins {
                let mut im = FeatureMeta::indicator(format!("{}_bin{r}", meta.name));
                im.source_feature = Some(c);
                im.encoding = Some(EncodingScheme::OneHot);
                im.flags_level = Some(r as f64);
                let values = out.column(c).iter().map(|&b| (b == r as f64) as u8 as f64).collect();
                group.push(out.n_cols());
                out.push_column(im, values)?;
            }
            groups.push(group);
            labels.push(meta.name.clone());
        }
    }
    let partition = if indicators {
        Some(PlayerPartition::new(groups, labels)?)
    } else {
        None
    };
    Ok(Discretized {
        dataset: out,
        partition,
        warnings,
    })
}
