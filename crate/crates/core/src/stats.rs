//! Response-time normalization, Welch's t-test and per-depth summaries of
//! session logs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use thiserror::Error;

use crate::cost::FeatureVector;

/// Seconds of speech per word when no measured duration is available.
pub const SECONDS_PER_WORD: f64 = 0.45;

pub fn estimate_duration(surface: &str, seconds_per_word: f64) -> f64 {
    surface.split_whitespace().count() as f64 * seconds_per_word
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub step: usize,
    pub directive: String,
    pub features: FeatureVector,
    pub depth: usize,
    /// Seconds.
    pub utterance_duration: f64,
    /// Seconds from speech start to completed action.
    pub response_time: f64,
    pub accurate: Option<bool>,
    pub subject: String,
}

impl LogEntry {
    pub fn props(&self) -> u32 {
        self.features.total()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("subject `{0}` has fewer than two entries")]
    TooFewEntries(String),
    #[error("each sample needs at least two values")]
    TooFewValues,
    #[error("both samples have zero variance")]
    DegenerateVariance,
    #[error("negative response time at step {0}")]
    NegativeTime(usize),
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn population_sd(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64).sqrt()
}

fn sample_var(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Response time minus utterance duration, z-scored within each subject
/// (population standard deviation). Subjects with no spread map to zeros.
/// Output follows input order.
pub fn normalize_times(log: &[LogEntry]) -> Result<Vec<(FeatureVector, f64)>, StatsError> {
    let mut by_subject: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, e) in log.iter().enumerate() {
        if e.response_time < 0.0 {
            return Err(StatsError::NegativeTime(e.step));
        }
        by_subject.entry(&e.subject).or_default().push(i);
    }
    let mut out = vec![0.0; log.len()];
    for (subject, idx) in by_subject {
        if idx.len() < 2 {
            return Err(StatsError::TooFewEntries(subject.to_string()));
        }
        let adj: Vec<f64> = idx
            .iter()
            .map(|&i| log[i].response_time - log[i].utterance_duration)
            .collect();
        let m = mean(&adj);
        let sd = population_sd(&adj);
        for (&i, a) in idx.iter().zip(&adj) {
            out[i] = if sd > 0.0 { (a - m) / sd } else { 0.0 };
        }
    }
    Ok(log.iter().zip(out).map(|(e, z)| (e.features, z)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchResult {
    pub t: f64,
    pub df: f64,
    pub p: f64,
}

/// Two-sample t-test without the equal-variance assumption; two-tailed p.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<WelchResult, StatsError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(StatsError::TooFewValues);
    }
    let (va, vb) = (sample_var(a) / a.len() as f64, sample_var(b) / b.len() as f64);
    let se2 = va + vb;
    if se2 <= 0.0 {
        return Err(StatsError::DegenerateVariance);
    }
    let t = (mean(a) - mean(b)) / se2.sqrt();
    let df = se2 * se2
        / (va * va / (a.len() - 1) as f64 + vb * vb / (b.len() - 1) as f64);
    // P(|T| > t) = I_{df/(df+t^2)}(df/2, 1/2)
    let p = beta_reg(df / 2.0, 0.5, df / (df + t * t));
    Ok(WelchResult { t, df, p })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
}

impl MeanSd {
    fn of(xs: &[f64]) -> Option<Self> {
        if xs.is_empty() {
            return None;
        }
        let sd = if xs.len() > 1 { sample_var(xs).sqrt() } else { 0.0 };
        Some(Self { mean: mean(xs), sd })
    }
}

/// One row per depth: counts and mean/sd of #properties, raw and
/// normalized response time, and accuracy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthRow {
    pub depth: usize,
    pub n: usize,
    pub props: MeanSd,
    pub response_time: MeanSd,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalized_time: Option<MeanSd>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<MeanSd>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogAnalysis {
    pub rows: Vec<DepthRow>,
    /// Set when normalization was not possible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalization_error: Option<String>,
    /// Subjects whose adjusted times have no spread; their normalized
    /// times are all zero.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flat_subjects: Vec<String>,
}

pub fn analyze(log: &[LogEntry]) -> LogAnalysis {
    let normalized = normalize_times(log);
    let z: Option<Vec<f64>> = normalized.as_ref().ok().map(|v| v.iter().map(|x| x.1).collect());
    let mut by_depth: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, e) in log.iter().enumerate() {
        by_depth.entry(e.depth).or_default().push(i);
    }
    let rows = by_depth
        .into_iter()
        .map(|(depth, idx)| {
            let pick = |f: &dyn Fn(usize) -> f64| idx.iter().map(|&i| f(i)).collect::<Vec<f64>>();
            let acc: Vec<f64> = idx
                .iter()
                .filter_map(|&i| log[i].accurate)
                .map(|a| if a { 1.0 } else { 0.0 })
                .collect();
            DepthRow {
                depth,
                n: idx.len(),
                props: MeanSd::of(&pick(&|i| log[i].props() as f64)).expect("non-empty"),
                response_time: MeanSd::of(&pick(&|i| log[i].response_time)).expect("non-empty"),
                normalized_time: z.as_ref().and_then(|z| MeanSd::of(&pick(&|i| z[i]))),
                accuracy: MeanSd::of(&acc),
            }
        })
        .collect();
    LogAnalysis {
        rows,
        normalization_error: normalized.err().map(|e| e.to_string()),
        flat_subjects: flat_subjects(log),
    }
}

pub fn flat_subjects(log: &[LogEntry]) -> Vec<String> {
    let mut by_subject: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for e in log {
        by_subject.entry(&e.subject).or_default().push(e.response_time - e.utterance_duration);
    }
    by_subject
        .into_iter()
        .filter(|(_, v)| v.len() >= 2 && population_sd(v) == 0.0)
        .map(|(s, _)| s.to_string())
        .collect()
}

impl LogAnalysis {
    pub fn to_text(&self) -> String {
        let fmt = |m: Option<MeanSd>| m.map_or("-".to_string(), |m| format!("{:.3} ({:.3})", m.mean, m.sd));
        let mut out = format!(
            "{:>5}  {:>4}  {:>15}  {:>15}  {:>15}  {:>15}\n",
            "depth", "n", "#prop", "time (s)", "time (z)", "accuracy"
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{:>5}  {:>4}  {:>15}  {:>15}  {:>15}  {:>15}\n",
                r.depth,
                r.n,
                fmt(Some(r.props)),
                fmt(Some(r.response_time)),
                fmt(r.normalized_time),
                fmt(r.accuracy)
            ));
        }
        if !self.flat_subjects.is_empty() {
            out.push_str(&format!("warning: no spread in adjusted times for {}\n", self.flat_subjects.join(", ")));
        }
        if let Some(e) = &self.normalization_error {
            out.push_str(&format!("normalization skipped: {e}\n"));
        }
        out
    }
}
