//! Heel-strike detection from vertical acceleration.
//!
//! Each heel strike injects a short high-frequency transient into the
//! z-axis accelerometer. The chain isolates those transients as a smooth
//! envelope — zero-phase high-pass, half-wave rectification, zero-phase
//! low-pass — and then picks envelope peaks above a relative height
//! threshold, spaced no closer than the fastest plausible step interval.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::{design_butterworth, filtfilt, FilterSpec};
use crate::signal::{half_wave_rectify, percentile, TimeSeries};

/// Tuning for the detection chain.
///
/// `expected_velocity_mps` documents the walking speed a configuration was
/// tuned for; it is logged alongside results but does not act on the
/// algorithm (only cadence constrains peak spacing).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HsParams {
    pub highpass_hz: f64,
    pub lowpass_hz: f64,
    pub filter_order: usize,
    pub max_cadence_steps_per_min: f64,
    /// Peak height floor as a fraction of the 95th-percentile envelope value.
    pub min_peak_height_rel: f64,
    pub expected_velocity_mps: Option<f64>,
}

impl Default for HsParams {
    fn default() -> Self {
        Self {
            highpass_hz: 9.0,
            lowpass_hz: 6.0,
            filter_order: 7,
            max_cadence_steps_per_min: 140.0,
            min_peak_height_rel: 0.3,
            expected_velocity_mps: None,
        }
    }
}

impl HsParams {
    pub fn validate(&self, sample_rate_hz: f64) -> Result<()> {
        let nyquist_hz = sample_rate_hz / 2.0;
        for cutoff_hz in [self.highpass_hz, self.lowpass_hz] {
            if !(cutoff_hz.is_finite() && cutoff_hz > 0.0 && cutoff_hz < nyquist_hz) {
                return Err(Error::InvalidCutoff { cutoff_hz, nyquist_hz });
            }
        }
        if self.filter_order == 0 {
            return Err(Error::InvalidParams("filter order must be >= 1".into()));
        }
        if !(self.max_cadence_steps_per_min.is_finite() && self.max_cadence_steps_per_min > 0.0) {
            return Err(Error::InvalidParams(format!(
                "max cadence must be > 0, got {}",
                self.max_cadence_steps_per_min
            )));
        }
        if !(self.min_peak_height_rel > 0.0 && self.min_peak_height_rel < 1.0) {
            return Err(Error::InvalidParams(format!(
                "relative peak height must be in (0, 1), got {}",
                self.min_peak_height_rel
            )));
        }
        Ok(())
    }

    /// Minimum event spacing in samples: the fastest step interval
    /// `60 / max_cadence` seconds, rounded up so the spacing invariant
    /// holds exactly in sample units.
    pub fn min_separation_samples(&self, sample_rate_hz: f64) -> usize {
        (60.0 / self.max_cadence_steps_per_min * sample_rate_hz).ceil() as usize
    }
}

/// Detected heel-strike events: sample indices with their times.
#[derive(Debug, Clone, PartialEq)]
pub struct HsEvents {
    indices: Vec<usize>,
    times_s: Vec<f64>,
}

impl HsEvents {
    pub fn from_indices(mut indices: Vec<usize>, sample_rate_hz: f64) -> Self {
        indices.sort_unstable();
        let times_s = indices.iter().map(|&i| i as f64 / sample_rate_hz).collect();
        Self { indices, times_s }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn times_s(&self) -> &[f64] {
        &self.times_s
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// The envelope stage: zero-phase high-pass (isolate strike transients),
/// half-wave rectify (keep upward spikes), zero-phase low-pass (smooth each
/// burst into a single hump).
pub fn hs_envelope(accel_z: &TimeSeries, params: &HsParams) -> Result<TimeSeries> {
    let fs = accel_z.sample_rate_hz();
    params.validate(fs)?;
    let hp = design_butterworth(&FilterSpec::HighPass {
        cutoff_hz: params.highpass_hz,
        order: params.filter_order,
        sample_rate_hz: fs,
    })?;
    let lp = design_butterworth(&FilterSpec::LowPass {
        cutoff_hz: params.lowpass_hz,
        order: params.filter_order,
        sample_rate_hz: fs,
    })?;
    let high = filtfilt(&hp, accel_z)?;
    let rectified = half_wave_rectify(&high);
    filtfilt(&lp, &rectified)
}

/// Greedy cadence-constrained peak picking.
///
/// Candidates are local maxima exceeding `min_peak_height_rel ×` the 95th
/// percentile of the envelope. Candidates are accepted tallest-first (ties
/// to the earlier index); a candidate closer than the minimum separation to
/// any accepted event is discarded. An empty result is valid.
pub fn find_peaks(envelope: &TimeSeries, params: &HsParams) -> Result<HsEvents> {
    let fs = envelope.sample_rate_hz();
    params.validate(fs)?;
    let v = envelope.samples();
    if v.is_empty() {
        return Ok(HsEvents::from_indices(Vec::new(), fs));
    }
    let threshold = params.min_peak_height_rel * percentile(v, 95.0);
    let mut candidates: Vec<usize> = (1..v.len().saturating_sub(1))
        .filter(|&i| v[i] > threshold && v[i] > v[i - 1] && v[i] >= v[i + 1])
        .collect();
    candidates.sort_by(|&a, &b| {
        v[b].partial_cmp(&v[a]).unwrap().then_with(|| a.cmp(&b))
    });
    let min_sep = params.min_separation_samples(fs);
    let mut accepted: Vec<usize> = Vec::new();
    for &c in &candidates {
        if accepted.iter().all(|&a| a.abs_diff(c) >= min_sep) {
            accepted.push(c);
        }
    }
    Ok(HsEvents::from_indices(accepted, fs))
}

/// The full chain: [`hs_envelope`] then [`find_peaks`].
pub fn detect_heel_strikes(accel_z: &TimeSeries, params: &HsParams) -> Result<HsEvents> {
    find_peaks(&hs_envelope(accel_z, params)?, params)
}
