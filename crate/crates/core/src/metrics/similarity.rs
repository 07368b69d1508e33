use std::fmt;
use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use super::{GraphStats, MetricsError};

pub const DEFAULT_BINS: usize = 100;

/// Jensen-Shannon divergence (natural log) of two probability vectors.
pub fn jsd_mass(p: &[f64], q: &[f64]) -> f64 {
    let kl = |a: &[f64], m: &[f64]| -> f64 {
        a.iter().zip(m).filter(|(x, _)| **x > 0.0).map(|(x, y)| x * (x / y).ln()).sum()
    };
    let m: Vec<f64> = p.iter().zip(q).map(|(a, b)| 0.5 * (a + b)).collect();
    (0.5 * kl(p, &m) + 0.5 * kl(q, &m)).clamp(0.0, LN_2)
}

/// Histograms both samples on `bins` equal-width bins over their pooled
/// range and returns the JSD of the two histograms. A pooled range of zero
/// width gives 0.
pub fn jsd(p: &[f64], q: &[f64], bins: usize) -> Result<f64, MetricsError> {
    let p: Vec<f64> = p.iter().copied().filter(|v| v.is_finite()).collect();
    let q: Vec<f64> = q.iter().copied().filter(|v| v.is_finite()).collect();
    if p.is_empty() || q.is_empty() {
        return Err(MetricsError::EmptySample);
    }
    if bins == 0 {
        return Err(MetricsError::BadBins);
    }
    let lo = p.iter().chain(&q).copied().fold(f64::INFINITY, f64::min);
    let hi = p.iter().chain(&q).copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return Ok(0.0);
    }
    let hist = |s: &[f64]| -> Vec<f64> {
        let mut h = vec![0.0; bins];
        for &v in s {
            let b = (((v - lo) / (hi - lo)) * bins as f64) as usize;
            h[b.min(bins - 1)] += 1.0;
        }
        let total = s.len() as f64;
        h.iter_mut().for_each(|x| *x /= total);
        h
    };
    Ok(jsd_mass(&hist(&p), &hist(&q)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatDivergence {
    pub name: String,
    pub jsd: f64,
    pub standardized: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub bins: usize,
    pub corpus_a: usize,
    pub corpus_b: usize,
    pub stats: Vec<StatDivergence>,
    pub score: f64,
}

/// Mean over the eleven statistics of `(ln 2 - JSD) / ln 2`.
pub fn similarity_score(
    a: &[GraphStats],
    b: &[GraphStats],
    bins: usize,
) -> Result<SimilarityReport, MetricsError> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let col = |c: &[GraphStats], k: usize| -> Vec<f64> { c.iter().map(|s| s.values()[k]).collect() };
    let mut stats = Vec::with_capacity(11);
    for (k, name) in GraphStats::NAMES.iter().enumerate() {
        let d = jsd(&col(a, k), &col(b, k), bins)?;
        stats.push(StatDivergence { name: name.to_string(), jsd: d, standardized: (LN_2 - d) / LN_2 });
    }
    let score = stats.iter().map(|s| s.standardized).sum::<f64>() / stats.len() as f64;
    Ok(SimilarityReport { bins, corpus_a: a.len(), corpus_b: b.len(), stats, score })
}

impl fmt::Display for SimilarityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<18} {:>10} {:>12}", "statistic", "jsd", "standardized")?;
        for s in &self.stats {
            writeln!(f, "{:<18} {:>10.6} {:>12.6}", s.name, s.jsd, s.standardized)?;
        }
        writeln!(f, "{:<18} {:>10} {:>12.6}", "score", "", self.score)?;
        write!(f, "({} vs {} instances, {} bins)", self.corpus_a, self.corpus_b, self.bins)
    }
}
