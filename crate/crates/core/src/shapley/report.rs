use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::Estimator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Subset enumeration over a value table.
    BruteForce,
    /// Per-leaf games; exact for the unnormalized leaf estimator.
    MultiGames,
    /// Polynomial path-dependent recursion; exact for `shap_path`.
    TreeShap,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::BruteForce, Algorithm::MultiGames, Algorithm::TreeShap];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::BruteForce => "brute_force",
            Algorithm::MultiGames => "multi_games",
            Algorithm::TreeShap => "tree_shap",
        }
    }

    /// Rejects estimator/algorithm pairs the algorithm does not compute exactly.
    pub fn check(self, estimator: Estimator) -> Result<()> {
        match (self, estimator) {
            (Algorithm::BruteForce, _)
            | (Algorithm::MultiGames, Estimator::LeafRaw)
            | (Algorithm::TreeShap, Estimator::ShapPath) => Ok(()),
            (Algorithm::MultiGames, Estimator::Leaf) => Err(Error::Config(
                "multi_games solves the unnormalized leaf game; use --estimator leaf_raw, \
                 or brute_force for the normalized leaf estimator"
                    .into(),
            )),
            (Algorithm::MultiGames, e) => Err(Error::Config(format!(
                "multi_games requires the leaf_raw estimator, got {e}"
            ))),
            (Algorithm::TreeShap, e) => Err(Error::Config(format!(
                "tree_shap requires the shap_path estimator, got {e}"
            ))),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| {
            Error::Config(format!(
                "unknown algorithm '{s}' (expected brute_force, multi_games or tree_shap)"
            ))
        })
    }
}

/// Attributions for one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SVReport {
    pub instance: usize,
    pub estimator: Estimator,
    pub algorithm: Algorithm,
    pub base_value: f64,
    pub prediction: f64,
    /// Player label to attribution, in partition order.
    pub phi: IndexMap<String, f64>,
    pub efficiency_residual: f64,
}

impl SVReport {
    pub fn new(
        instance: usize,
        estimator: Estimator,
        algorithm: Algorithm,
        labels: &[String],
        phi: Vec<f64>,
        base_value: f64,
        prediction: f64,
    ) -> Self {
        let total: f64 = phi.iter().sum();
        Self {
            instance,
            estimator,
            algorithm,
            base_value,
            prediction,
            efficiency_residual: prediction - base_value - total,
            phi: labels.iter().cloned().zip(phi).collect(),
        }
    }

    pub fn labels(&self) -> Vec<&str> {
        self.phi.keys().map(String::as_str).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.phi.values().copied().collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// One CSV row per report; columns are the fixed fields then one per player.
pub fn reports_to_csv(reports: &[SVReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let labels: Vec<String> = reports
        .first()
        .map(|r| r.phi.keys().cloned().collect())
        .unwrap_or_default();
    let mut header: Vec<String> = [
        "instance",
        "estimator",
        "algorithm",
        "base_value",
        "prediction",
        "efficiency_residual",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(labels.iter().cloned());
    w.write_record(&header)?;
    for r in reports {
        if r.phi.keys().ne(labels.iter()) {
            return Err(Error::Config(
                "reports with different players cannot share a CSV".into(),
            ));
        }
        let mut rec = vec![
            r.instance.to_string(),
            r.estimator.to_string(),
            r.algorithm.to_string(),
            format!("{:?}", r.base_value),
            format!("{:?}", r.prediction),
            format!("{:?}", r.efficiency_residual),
        ];
        rec.extend(r.phi.values().map(|v| format!("{v:?}")));
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
}

/// Batch JSON: an array of reports, one per line.
pub fn reports_to_json(reports: &[SVReport]) -> String {
    let mut out = String::from("[\n");
    for (i, r) in reports.iter().enumerate() {
        out.push_str(&r.to_json());
        out.push_str(if i + 1 < reports.len() { ",\n" } else { "\n" });
    }
    out.push_str("]\n");
    out
}
