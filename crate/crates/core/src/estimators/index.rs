//! Per-leaf projected-region counts.
//!
//! For leaf `m` with local features `S_m`, every data row gets a mask whose
//! bit `k` says the row satisfies the leaf's bound on its k-th local feature.
//! `N(L_m^T)` for `T ⊆ S_m` is then the number of rows whose mask contains
//! `T`, which a superset-sum table answers in O(1).

use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::tree::{Bound, TreeEnsemble};

/// Leaves with more local features than this use a sparse histogram.
const DENSE_LIMIT: usize = 12;
const MAX_LOCAL: usize = 64;

#[derive(Debug, Clone)]
enum CountTable {
    /// `t[T]` = rows whose mask is a superset of `T`.
    Dense(Vec<u32>),
    /// Distinct masks with their multiplicities.
    Sparse(Vec<(u64, u32)>),
}

#[derive(Debug, Clone)]
pub struct LeafEntry {
    pub leaf_id: i64,
    pub value: f64,
    /// Local features, bit `k` of a local mask refers to `bounds[k]`.
    pub bounds: Vec<Bound>,
    table: CountTable,
}

impl LeafEntry {
    pub fn n_local(&self) -> usize {
        self.bounds.len()
    }

    pub fn full_mask(&self) -> u64 {
        if self.bounds.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.bounds.len()) - 1
        }
    }

    /// Rows satisfying the bounds on the local features in `mask`.
    pub fn count(&self, mask: u64) -> u64 {
        match &self.table {
            CountTable::Dense(t) => t[mask as usize] as u64,
            CountTable::Sparse(h) => h.iter().filter(|(m, _)| m & mask == mask).map(|&(_, c)| c as u64).sum(),
        }
    }

    /// Rows inside the leaf.
    pub fn leaf_count(&self) -> u64 {
        self.count(self.full_mask())
    }

    /// Local bounds that `x` satisfies.
    #[inline]
    pub fn sat_mask(&self, x: &[f64]) -> u64 {
        let mut m = 0u64;
        for (k, b) in self.bounds.iter().enumerate() {
            if b.contains(x[b.feature]) {
                m |= 1 << k;
            }
        }
        m
    }
}

#[derive(Debug, Clone)]
pub struct LeafIndex {
    trees: Vec<Vec<LeafEntry>>,
    n_rows: usize,
}

impl LeafIndex {
    pub fn build(ensemble: &TreeEnsemble, data: &Dataset) -> Result<Self> {
        if data.n_cols() != ensemble.n_features() {
            return Err(Error::Dimension {
                expected: ensemble.n_features(),
                got: data.n_cols(),
            });
        }
        if data.n_rows() > u32::MAX as usize {
            return Err(Error::InvalidData("too many rows for the count index".into()));
        }
        let trees = ensemble
            .trees()
            .par_iter()
            .map(|tree| {
                tree.leaf_regions()
                    .into_iter()
                    .map(|r| {
                        if r.bounds.len() > MAX_LOCAL {
                            return Err(Error::InvalidModel(format!(
                                "leaf {} splits on {} distinct features; at most {MAX_LOCAL} are supported",
                                r.leaf_id,
                                r.bounds.len()
                            )));
                        }
                        Ok(LeafEntry {
                            leaf_id: r.leaf_id,
                            value: r.value,
                            table: count_table(&r.bounds, data),
                            bounds: r.bounds,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            trees,
            n_rows: data.n_rows(),
        })
    }

    pub fn trees(&self) -> &[Vec<LeafEntry>] {
        &self.trees
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }
}

fn count_table(bounds: &[Bound], data: &Dataset) -> CountTable {
    let d = bounds.len();
    let n = data.n_rows();
    let mut masks = vec![0u64; n];
    for (k, b) in bounds.iter().enumerate() {
        let col = data.column(b.feature);
        for (m, &v) in masks.iter_mut().zip(col) {
            if b.contains(v) {
                *m |= 1 << k;
            }
        }
    }
    if d <= DENSE_LIMIT {
        let mut t = vec![0u32; 1 << d];
        for m in masks {
            t[m as usize] += 1;
        }
        for k in 0..d {
            let bit = 1usize << k;
            for m in 0..t.len() {
                if m & bit == 0 {
                    t[m] += t[m | bit];
                }
            }
        }
        CountTable::Dense(t)
    } else {
        masks.sort_unstable();
        let mut h: Vec<(u64, u32)> = Vec::new();
        for m in masks {
            match h.last_mut() {
                Some((last, c)) if *last == m => *c += 1,
                _ => h.push((m, 1)),
            }
        }
        CountTable::Sparse(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{count_region, Constraint};

    #[test]
    fn dense_and_sparse_tables_agree_with_scans() {
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|i| (0..14).map(|j| ((i * 7 + j * 13) % 11) as f64).collect())
            .collect();
        let data = Dataset::continuous(&rows).unwrap();
        let bounds: Vec<Bound> = (0..14)
            .map(|j| Bound {
                feature: j,
                lower: 2.0,
                upper: 8.0,
            })
            .collect();
        for d in [3usize, 14] {
            let b = &bounds[..d];
            let entry = LeafEntry {
                leaf_id: 0,
                value: 0.0,
                bounds: b.to_vec(),
                table: count_table(b, &data),
            };
            for mask in [0u64, 1, 5, (1 << d) - 1] {
                let cons: Vec<Constraint> = (0..d)
                    .filter(|k| mask >> k & 1 == 1)
                    .map(|k| Constraint::interval(b[k].feature, b[k].lower, b[k].upper))
                    .collect();
                assert_eq!(entry.count(mask) as usize, count_region(&data, &cons));
            }
        }
    }
}
