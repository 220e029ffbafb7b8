use indexmap::IndexMap;

use super::SVReport;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalImportance {
    pub labels: Vec<String>,
    /// `I_j = sum_i |phi_j^(i)|`.
    pub importance: Vec<f64>,
    /// Player indices, most important first; ties keep player order.
    pub ranking: Vec<usize>,
}

/// Indices sorted by decreasing value, stable on ties.
pub fn ranking(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    idx
}

pub fn global_importance(reports: &[SVReport]) -> Result<GlobalImportance> {
    let Some(first) = reports.first() else {
        return Ok(GlobalImportance {
            labels: Vec::new(),
            importance: Vec::new(),
            ranking: Vec::new(),
        });
    };
    let labels: Vec<String> = first.phi.keys().cloned().collect();
    let mut importance = vec![0.0; labels.len()];
    for r in reports {
        if r.phi.keys().ne(labels.iter()) {
            return Err(Error::Config(format!(
                "report for instance {} uses a different player partition",
                r.instance
            )));
        }
        for (acc, v) in importance.iter_mut().zip(r.phi.values()) {
            *acc += v.abs();
        }
    }
    let ranking = ranking(&importance);
    Ok(GlobalImportance {
        labels,
        importance,
        ranking,
    })
}

/// Collapses players into named groups by summing their attributions; this
/// is the usual practice for encoded categorical variables. Players not
/// mentioned keep their own entry.
pub fn sum_groups(report: &SVReport, groups: &[(String, Vec<String>)]) -> SVReport {
    let mut phi: IndexMap<String, f64> = IndexMap::new();
    for (label, &v) in &report.phi {
        let key = groups
            .iter()
            .find(|(_, members)| members.contains(label))
            .map_or(label.clone(), |(g, _)| g.clone());
        *phi.entry(key).or_insert(0.0) += v;
    }
    SVReport { phi, ..report.clone() }
}

/// Fraction of instances whose player ranking by `|phi|` differs between two
/// batches over the same players.
pub fn ranking_change_fraction(a: &[SVReport], b: &[SVReport]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Config("batches differ in length".into()));
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let mut changed = 0usize;
    for (ra, rb) in a.iter().zip(b) {
        if ra.phi.len() != rb.phi.len() || ra.phi.keys().any(|k| !rb.phi.contains_key(k)) {
            return Err(Error::Config(format!(
                "instance {}: reports cover different players",
                ra.instance
            )));
        }
        let abs_a: Vec<f64> = ra.phi.values().map(|v| v.abs()).collect();
        let abs_b: Vec<f64> = ra.phi.keys().map(|k| rb.phi[k].abs()).collect();
        if ranking(&abs_a) != ranking(&abs_b) {
            changed += 1;
        }
    }
    Ok(changed as f64 / a.len() as f64)
}
