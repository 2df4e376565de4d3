//! Walking-activity segmentation: acceleration energy → binary mask →
//! artifact rejection → the four directed half-trials of a recording.
//!
//! A recording alternates walking bouts and standing rests. Windowed energy
//! of the (mean-removed) forward acceleration separates the two regimes;
//! thresholding yields a binary mask, short spurious runs are discarded as
//! motion artifacts, brief in-bout dips are bridged, and the surviving runs
//! become half-trials with alternating course directions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{kahan_prefix_sums, percentile, TimeSeries};

/// A 0/1 activity signal aligned sample-for-sample with its source series.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMask {
    bits: Vec<u8>,
    sample_rate_hz: f64,
}

impl BinaryMask {
    pub fn new(bits: Vec<u8>, sample_rate_hz: f64) -> Result<Self> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::InvalidSampleRate(sample_rate_hz));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidParams("mask bits must be 0 or 1".into()));
        }
        Ok(Self { bits, sample_rate_hz })
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    /// Maximal runs of 1s as half-open ranges, in time order.
    pub fn runs_of_ones(&self) -> Vec<SegmentRange> {
        let mut runs = Vec::new();
        let mut start = None;
        for (i, &b) in self.bits.iter().enumerate() {
            match (b, start) {
                (1, None) => start = Some(i),
                (0, Some(s)) => {
                    runs.push(SegmentRange { start_idx: s, end_idx: i });
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            runs.push(SegmentRange { start_idx: s, end_idx: self.bits.len() });
        }
        runs
    }
}

/// A half-open sample range `[start_idx, end_idx)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentRange {
    pub start_idx: usize,
    pub end_idx: usize,
}

impl SegmentRange {
    pub fn new(start_idx: usize, end_idx: usize) -> Result<Self> {
        if start_idx >= end_idx {
            return Err(Error::InvalidParams(format!(
                "segment range [{start_idx}, {end_idx}) is empty or inverted"
            )));
        }
        Ok(Self { start_idx, end_idx })
    }

    pub fn len(&self) -> usize {
        self.end_idx - self.start_idx
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees start < end
    }

    pub fn contains(&self, idx: usize) -> bool {
        idx >= self.start_idx && idx < self.end_idx
    }
}

/// Course direction of one half-trial: Forward is the A→B traversal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Reverse,
}

/// One traversal of the course in a single direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HalfTrial {
    pub range: SegmentRange,
    pub direction: Direction,
}

/// Tuning for energy windowing, thresholding, and artifact rejection.
///
/// `energy_threshold` is absolute, in (m/s²)² summed per window; use
/// [`relative_energy_threshold`] to derive it from the recording itself
/// (the default route) so the pipeline stays amplitude-scale free.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActivityParams {
    pub energy_window_samples: usize,
    pub energy_threshold: f64,
    pub min_activity_samples: usize,
    pub merge_gap_samples: usize,
}

impl ActivityParams {
    pub fn validate(&self) -> Result<()> {
        if self.energy_window_samples == 0 {
            return Err(Error::InvalidParams("energy window must be >= 1 sample".into()));
        }
        if !(self.energy_threshold.is_finite() && self.energy_threshold > 0.0) {
            return Err(Error::InvalidParams(format!(
                "energy threshold must be > 0, got {}",
                self.energy_threshold
            )));
        }
        if self.min_activity_samples == 0 {
            return Err(Error::InvalidParams("min activity length must be >= 1 sample".into()));
        }
        Ok(())
    }
}

/// Sliding energy: the sum of squared, mean-removed acceleration over a
/// centered window of `energy_window_samples` samples, clipped at the
/// recording edges. Output has the same length, rate, and time base as the
/// input.
///
/// The global mean is removed once, so a constant (gravity-only) series has
/// zero energy everywhere and any constant offset leaves the result
/// unchanged.
pub fn compute_energy(accel: &TimeSeries, params: &ActivityParams) -> Result<TimeSeries> {
    let n = accel.len();
    let w = params.energy_window_samples;
    if w == 0 || w > n {
        return Err(Error::WindowTooLarge { window: w, len: n });
    }
    let src = accel.samples();
    let mean = src.iter().sum::<f64>() / n as f64;
    let squares: Vec<f64> = src.iter().map(|&v| (v - mean) * (v - mean)).collect();
    let prefix = kahan_prefix_sums(&squares);
    let h = w / 2;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let lo = i.saturating_sub(h);
        let hi = (i + h + 1).min(n);
        out.push(prefix[hi] - prefix[lo]);
    }
    Ok(TimeSeries::from_computed(accel.label(), out, accel.sample_rate_hz()))
}

/// Threshold as `multiplier ×` the 10th-percentile window energy of the
/// recording itself. Rest periods dominate the lower percentiles, so the
/// result tracks the noise floor regardless of sensor gain or subject.
pub fn relative_energy_threshold(energy: &TimeSeries, multiplier: f64) -> Result<f64> {
    if energy.is_empty() {
        return Err(Error::EmptyInput("energy series"));
    }
    if !(multiplier.is_finite() && multiplier > 0.0) {
        return Err(Error::InvalidParams(format!(
            "threshold multiplier must be > 0, got {multiplier}"
        )));
    }
    Ok(multiplier * percentile(energy.samples(), 10.0))
}

/// `bits[i] = 1` iff `energy[i] > energy_threshold` — strictly greater, so
/// a sample exactly at the threshold stays inactive.
pub fn binarize_activity(energy: &TimeSeries, params: &ActivityParams) -> BinaryMask {
    let bits = energy
        .samples()
        .iter()
        .map(|&e| u8::from(e > params.energy_threshold))
        .collect();
    BinaryMask { bits, sample_rate_hz: energy.sample_rate_hz() }
}

/// Artifact rejection: every run of 1s shorter than `min_activity_samples`
/// is zeroed, then gaps shorter than `merge_gap_samples` between surviving
/// runs are filled (brief in-bout hesitations should not split a bout).
/// The result contains only runs of at least `min_activity_samples`, and
/// re-applying the operation changes nothing.
pub fn remove_short_segments(mask: &BinaryMask, params: &ActivityParams) -> BinaryMask {
    let mut bits = vec![0u8; mask.len()];
    let survivors: Vec<SegmentRange> = mask
        .runs_of_ones()
        .into_iter()
        .filter(|r| r.len() >= params.min_activity_samples)
        .collect();
    for r in &survivors {
        bits[r.start_idx..r.end_idx].fill(1);
    }
    for pair in survivors.windows(2) {
        let gap = pair[1].start_idx - pair[0].end_idx;
        if gap < params.merge_gap_samples {
            bits[pair[0].end_idx..pair[1].start_idx].fill(1);
        }
    }
    BinaryMask { bits, sample_rate_hz: mask.sample_rate_hz }
}

/// Collects the surviving activity runs as half-trials in time order,
/// assigning directions alternately Forward, Reverse, Forward, Reverse.
/// Any count other than `expected_count` signals a mis-tuned threshold or
/// an unexpected protocol and is an error.
pub fn extract_half_trials(mask: &BinaryMask, expected_count: usize) -> Result<Vec<HalfTrial>> {
    let runs = mask.runs_of_ones();
    if runs.len() != expected_count {
        return Err(Error::ActivityCountMismatch { found: runs.len(), expected: expected_count });
    }
    Ok(runs
        .into_iter()
        .enumerate()
        .map(|(i, range)| HalfTrial {
            range,
            direction: if i % 2 == 0 { Direction::Forward } else { Direction::Reverse },
        })
        .collect())
}
