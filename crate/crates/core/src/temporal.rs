//! Recency of individual and social reuse, log-spaced histograms and the
//! 24-hour peak test.

use alloc::vec::Vec;

use serde::Serialize;

use crate::corpus::Corpus;
use crate::reuse::{classify_all, Classification};

pub const SECONDS_PER_HOUR: f64 = 3600.0;
const DAY_HOURS: f64 = 24.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RecencyKind {
    Individual,
    Social,
}

impl RecencyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RecencyKind::Individual => "individual",
            RecencyKind::Social => "social",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecencySample {
    pub kind: RecencyKind,
    /// Time since the most recent qualifying prior usage, at least 1.
    pub delta_seconds: u64,
}

impl RecencySample {
    pub fn hours(&self) -> f64 {
        self.delta_seconds as f64 / SECONDS_PER_HOUR
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TemporalError {
    #[error("invalid histogram range: need n_bins >= 2 and 0 < min_hours < max_hours")]
    InvalidRange,
    #[error("the histogram range does not contain 24 hours")]
    RangeExcludes24h,
    #[error("the 24 hour bin has no neighbour on both sides")]
    PeakAtBoundary,
}

/// Samples read off an existing classification.
pub fn samples_from(classification: &Classification, kind: RecencyKind) -> Vec<RecencySample> {
    classification
        .records
        .iter()
        .filter_map(|r| match kind {
            RecencyKind::Individual => r.individual_delta,
            RecencyKind::Social => r.social_delta,
        })
        .map(|delta_seconds| RecencySample {
            kind,
            delta_seconds,
        })
        .collect()
}

/// One sample per seed-user assignment with the individual bit.
pub fn individual_recency_samples(corpus: &Corpus) -> Vec<RecencySample> {
    samples_from(&classify_all(corpus), RecencyKind::Individual)
}

/// One sample per seed-user assignment with the social bit.
pub fn social_recency_samples(corpus: &Corpus) -> Vec<RecencySample> {
    samples_from(&classify_all(corpus), RecencyKind::Social)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramSpec {
    pub n_bins: usize,
    pub min_hours: f64,
    pub max_hours: f64,
}

impl Default for HistogramSpec {
    fn default() -> Self {
        Self {
            n_bins: 50,
            min_hours: 0.1,
            max_hours: 10_000.0,
        }
    }
}

impl HistogramSpec {
    pub fn validate(&self) -> Result<(), TemporalError> {
        let ok = self.n_bins >= 2
            && self.min_hours > 0.0
            && self.min_hours < self.max_hours
            && self.max_hours.is_finite();
        if ok {
            Ok(())
        } else {
            Err(TemporalError::InvalidRange)
        }
    }

    /// `n_bins + 1` geometrically spaced edges from `min_hours` to `max_hours`.
    pub fn edges(&self) -> Result<Vec<f64>, TemporalError> {
        self.validate()?;
        let ratio = self.max_hours / self.min_hours;
        let n = self.n_bins as f64;
        let mut edges: Vec<f64> = (0..=self.n_bins)
            .map(|i| self.min_hours * libm::pow(ratio, i as f64 / n))
            .collect();
        edges[0] = self.min_hours;
        edges[self.n_bins] = self.max_hours;
        Ok(edges)
    }
}

/// Counts over half-open bins `[lo, hi)`. Values below the first edge land in
/// the first bin, values at or above the last edge in the last bin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecencyHistogram {
    pub kind: RecencyKind,
    pub bin_edges_hours: Vec<f64>,
    pub counts: Vec<u64>,
}

impl RecencyHistogram {
    pub fn empty(kind: RecencyKind, spec: &HistogramSpec) -> Result<Self, TemporalError> {
        let bin_edges_hours = spec.edges()?;
        let counts = alloc::vec![0; spec.n_bins];
        Ok(Self {
            kind,
            bin_edges_hours,
            counts,
        })
    }

    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_of(&self, hours: f64) -> usize {
        let last = self.n_bins() - 1;
        // Number of edges <= hours, minus one, is the bin whose lower edge is
        // the largest edge not exceeding the value.
        let above = self.bin_edges_hours.partition_point(|&e| e <= hours);
        above.saturating_sub(1).min(last)
    }

    pub fn add_hours(&mut self, hours: f64) {
        let bin = self.bin_of(hours);
        self.counts[bin] += 1;
    }

    /// Geometric midpoints of the bins.
    pub fn bin_centers_hours(&self) -> Vec<f64> {
        self.bin_edges_hours
            .windows(2)
            .map(|w| libm::sqrt(w[0] * w[1]))
            .collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Histogram of the samples of one kind; samples of the other kind are
/// ignored.
pub fn build_histogram(
    samples: &[RecencySample],
    kind: RecencyKind,
    spec: &HistogramSpec,
) -> Result<RecencyHistogram, TemporalError> {
    let mut hist = RecencyHistogram::empty(kind, spec)?;
    for s in samples.iter().filter(|s| s.kind == kind) {
        hist.add_hours(s.hours());
    }
    Ok(hist)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DailyPeak {
    pub is_peak: bool,
    pub bin_index: usize,
}

/// Strict local maximum test on the bin that contains 24 hours.
pub fn detect_daily_peak(hist: &RecencyHistogram) -> Result<DailyPeak, TemporalError> {
    let edges = &hist.bin_edges_hours;
    if hist.n_bins() < 3 {
        return Err(TemporalError::InvalidRange);
    }
    if !(edges[0] <= DAY_HOURS && DAY_HOURS < edges[edges.len() - 1]) {
        return Err(TemporalError::RangeExcludes24h);
    }
    let bin = hist.bin_of(DAY_HOURS);
    if bin == 0 || bin + 1 == hist.n_bins() {
        return Err(TemporalError::PeakAtBoundary);
    }
    let c = &hist.counts;
    Ok(DailyPeak {
        is_peak: c[bin] > c[bin - 1] && c[bin] > c[bin + 1],
        bin_index: bin,
    })
}
