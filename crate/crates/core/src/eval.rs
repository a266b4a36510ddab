//! Normalized cross coherence and 1-D three-way clustering of model scores.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsp::Direction;
use crate::io::{fmt_f64, Table};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("ZeroEnergyInput: {0} has no energy")]
    ZeroEnergyInput(&'static str),
    #[error("DegenerateInput: k-means needs at least 3 distinct values, got {distinct}")]
    DegenerateInput { distinct: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NccResult {
    pub psi_star: f64,
    pub lag_at_peak: i64,
    /// `curve[i]` is the coherence at lag `i - max_lag`.
    pub curve: Vec<f64>,
    pub max_lag: usize,
}

/// `psi(k) = sum_n h_gt[n - k] h_i[n] / sqrt(E_gt E_i)` for
/// `k in [-max_lag, max_lag]`. Positive `k` delays `h_gt`. The first maximum
/// (smallest lag) wins ties.
pub fn ncc(h_gt: &[f64], h_i: &[f64], max_lag: usize) -> Result<NccResult, EvalError> {
    let e_gt: f64 = h_gt.iter().map(|v| v * v).sum();
    let e_i: f64 = h_i.iter().map(|v| v * v).sum();
    if e_gt == 0.0 {
        return Err(EvalError::ZeroEnergyInput("ground truth"));
    }
    if e_i == 0.0 {
        return Err(EvalError::ZeroEnergyInput("test response"));
    }
    let norm = (e_gt * e_i).sqrt();
    let ml = max_lag as i64;
    let curve: Vec<f64> = (-ml..=ml)
        .map(|k| {
            let mut s = 0.0;
            for (n, &hi) in h_i.iter().enumerate() {
                let m = n as i64 - k;
                if m >= 0 && (m as usize) < h_gt.len() {
                    s += h_gt[m as usize] * hi;
                }
            }
            s / norm
        })
        .collect();
    let (idx, &psi_star) = curve
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, &f64)>, (i, v)| match best {
            Some((_, b)) if *v <= *b => best,
            _ => Some((i, v)),
        })
        .expect("lag window is nonempty");
    Ok(NccResult {
        psi_star,
        lag_at_peak: idx as i64 - ml,
        curve,
        max_lag,
    })
}

/// `psi*_apf - psi*_mpd`.
pub fn psi_d(h_gt: &[f64], h_apf: &[f64], h_mpd: &[f64], max_lag: usize) -> Result<f64, EvalError> {
    Ok(ncc(h_gt, h_apf, max_lag)?.psi_star - ncc(h_gt, h_mpd, max_lag)?.psi_star)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterLabel {
    ApfBetter,
    MpdBetter,
    Similar,
}

impl ClusterLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            ClusterLabel::ApfBetter => "apf_better",
            ClusterLabel::MpdBetter => "mpd_better",
            ClusterLabel::Similar => "similar",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KMeansResult {
    pub labels: Vec<ClusterLabel>,
    /// Ascending: mpd_better, similar, apf_better.
    pub centroids: [f64; 3],
    /// Within-cluster sum of squares after each iteration.
    pub objective: Vec<f64>,
    pub iterations: usize,
}

/// Lloyd's algorithm with `K = 3`, initialized at the minimum, median and
/// maximum. Clusters are named by centroid order.
pub fn kmeans3_1d(values: &[f64]) -> Result<KMeansResult, EvalError> {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut distinct = sorted.clone();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(EvalError::DegenerateInput { distinct: distinct.len() });
    }
    let mut c = [sorted[0], sorted[(sorted.len() - 1) / 2], sorted[sorted.len() - 1]];
    if c[1] == c[0] || c[1] == c[2] {
        // Median coincides with an extreme; take the middle distinct value.
        c[1] = distinct[distinct.len() / 2];
    }
    let assign = |c: &[f64; 3], v: f64| -> usize {
        let mut best = 0;
        for j in 1..3 {
            if (v - c[j]).abs() < (v - c[best]).abs() {
                best = j;
            }
        }
        best
    };
    let mut labels: Vec<usize> = values.iter().map(|&v| assign(&c, v)).collect();
    let mut objective = Vec::new();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut sum = [0.0; 3];
        let mut cnt = [0usize; 3];
        for (&v, &l) in values.iter().zip(&labels) {
            sum[l] += v;
            cnt[l] += 1;
        }
        for j in 0..3 {
            if cnt[j] > 0 {
                c[j] = sum[j] / cnt[j] as f64;
            }
        }
        let next: Vec<usize> = values.iter().map(|&v| assign(&c, v)).collect();
        objective.push(values.iter().zip(&next).map(|(&v, &l)| (v - c[l]).powi(2)).sum());
        if next == labels || iterations >= 1000 {
            labels = next;
            break;
        }
        labels = next;
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| c[a].total_cmp(&c[b]));
    let names = [ClusterLabel::MpdBetter, ClusterLabel::Similar, ClusterLabel::ApfBetter];
    let mut rank = [0usize; 3];
    for (r, &j) in order.iter().enumerate() {
        rank[j] = r;
    }
    Ok(KMeansResult {
        labels: labels.iter().map(|&l| names[rank[l]]).collect(),
        centroids: [c[order[0]], c[order[1]], c[order[2]]],
        objective,
        iterations,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalRow {
    pub direction: Direction,
    pub psi_apf: f64,
    pub psi_mpd: f64,
    pub label: Option<ClusterLabel>,
}

impl EvalRow {
    pub fn psi_d(&self) -> f64 {
        self.psi_apf - self.psi_mpd
    }
}

/// `azimuth_deg,elevation_deg,psi_apf,psi_mpd,psi_d,label`
pub fn eval_table(rows: &[EvalRow]) -> Table {
    let mut t = Table::new(["azimuth_deg", "elevation_deg", "psi_apf", "psi_mpd", "psi_d", "label"]);
    for r in rows {
        t.push(vec![
            fmt_f64(r.direction.azimuth_deg),
            fmt_f64(r.direction.elevation_deg),
            fmt_f64(r.psi_apf),
            fmt_f64(r.psi_mpd),
            fmt_f64(r.psi_d()),
            r.label.map_or("", ClusterLabel::as_str).to_string(),
        ]);
    }
    t
}
