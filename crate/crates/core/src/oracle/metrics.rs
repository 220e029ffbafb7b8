//! Accuracy metrics for attribution vectors.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::shapley::ranking;

/// Below this magnitude a true attribution is treated as zero.
pub const ZERO_TRUTH: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelativeError {
    pub value: f64,
    /// Players left out because their true attribution is zero.
    pub excluded: Vec<usize>,
}

fn same_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(())
}

/// `sum_i |true_i - est_i| / |true_i|` over players with nonzero truth.
pub fn r_ae(truth: &[f64], est: &[f64]) -> Result<RelativeError> {
    same_len(truth, est)?;
    let mut value = 0.0;
    let mut excluded = Vec::new();
    for (i, (&t, &e)) in truth.iter().zip(est).enumerate() {
        if t.abs() < ZERO_TRUTH {
            excluded.push(i);
        } else {
            value += (t - e).abs() / t.abs();
        }
    }
    Ok(RelativeError { value, excluded })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RankBy {
    /// Highest means most positive, lowest most negative.
    #[default]
    Signed,
    Absolute,
}

fn extremes(v: &[f64], k: usize, by: RankBy) -> (BTreeSet<usize>, BTreeSet<usize>) {
    let key: Vec<f64> = match by {
        RankBy::Signed => v.to_vec(),
        RankBy::Absolute => v.iter().map(|x| x.abs()).collect(),
    };
    let desc = ranking(&key);
    let neg: Vec<f64> = key.iter().map(|x| -x).collect();
    let asc = ranking(&neg);
    (desc[..k].iter().copied().collect(), asc[..k].iter().copied().collect())
}

/// Share of the `k` highest and `k` lowest players of the truth that the
/// estimate also places there.
pub fn tpr(truth: &[f64], est: &[f64], k: usize, by: RankBy) -> Result<f64> {
    same_len(truth, est)?;
    if k == 0 || k > truth.len() {
        return Err(Error::Config(format!("k = {k} must lie in 1..={}", truth.len())));
    }
    let (tt, tb) = extremes(truth, k, by);
    let (et, eb) = extremes(est, k, by);
    let hits = tt.intersection(&et).count() + tb.intersection(&eb).count();
    Ok(hits as f64 / (2 * k) as f64)
}

pub fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        f64::NAN
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

pub fn median(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    if s.len() % 2 == 1 {
        s[m]
    } else {
        0.5 * (s[m - 1] + s[m])
    }
}

/// Average ranks, ties sharing the mean of their positions.
fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation; NaN when either input is constant.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    same_len(a, b)?;
    let (ra, rb) = (ranks(a), ranks(b));
    let (ma, mb) = (mean(&ra), mean(&rb));
    let mut num = 0.0;
    let mut da = 0.0;
    let mut db = 0.0;
    for (x, y) in ra.iter().zip(&rb) {
        num += (x - ma) * (y - mb);
        da += (x - ma).powi(2);
        db += (y - mb).powi(2);
    }
    Ok(num / (da * db).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceMetric {
    pub instance: usize,
    pub r_ae: f64,
    pub tpr: f64,
    pub excluded: Vec<usize>,
}

/// Accuracy of one estimator against an oracle over a batch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub estimator: String,
    pub k: usize,
    pub rank_by: RankBy,
    pub n: usize,
    pub mean_r_ae: f64,
    pub median_r_ae: f64,
    pub mean_tpr: f64,
    pub instances: Vec<InstanceMetric>,
}

impl MetricReport {
    /// `truth[i]` and `est[i]` are the attributions of instance `ids[i]`.
    pub fn build(
        estimator: &str,
        ids: &[usize],
        truth: &[Vec<f64>],
        est: &[Vec<f64>],
        k: usize,
        rank_by: RankBy,
    ) -> Result<Self> {
        if truth.len() != est.len() || ids.len() != truth.len() {
            return Err(Error::Config("truth, estimates and ids differ in length".into()));
        }
        let mut instances = Vec::with_capacity(ids.len());
        for ((&instance, t), e) in ids.iter().zip(truth).zip(est) {
            let r = r_ae(t, e)?;
            instances.push(InstanceMetric {
                instance,
                r_ae: r.value,
                tpr: tpr(t, e, k.min(t.len()), rank_by)?,
                excluded: r.excluded,
            });
        }
        let rae: Vec<f64> = instances.iter().map(|m| m.r_ae).collect();
        let tprs: Vec<f64> = instances.iter().map(|m| m.tpr).collect();
        Ok(Self {
            estimator: estimator.to_string(),
            k,
            rank_by,
            n: instances.len(),
            mean_r_ae: mean(&rae),
            median_r_ae: median(&rae),
            mean_tpr: mean(&tprs),
            instances,
        })
    }

    pub fn r_ae_values(&self) -> Vec<f64> {
        self.instances.iter().map(|m| m.r_ae).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metric reports serialize")
    }
}

/// Per-instance rows `estimator,instance,r_ae,tpr,excluded` for plotting.
pub fn metrics_to_csv(reports: &[MetricReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["estimator", "instance", "r_ae", "tpr", "excluded"])?;
    for r in reports {
        for m in &r.instances {
            let excluded = m.excluded.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(";");
            w.write_record([
                r.estimator.clone(),
                m.instance.to_string(),
                format!("{:?}", m.r_ae),
                format!("{:?}", m.tpr),
                excluded,
            ])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
