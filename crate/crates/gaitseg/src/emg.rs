//! sEMG preprocessing, gait-cycle slicing, and muscle activity profiles.
//!
//! Raw channels are band-passed to the 10–150 Hz physiological band and
//! notched at the powerline frequency. Heel-strike events slice each
//! channel into gait cycles; cycles are resampled to a common length
//! (0–100% of the cycle) and reduced to a pointwise mean ± standard
//! deviation profile per muscle.

use serde::{Deserialize, Serialize};

use crate::activity::SegmentRange;
use crate::error::{Error, Result};
use crate::filters::{design_butterworth, design_notch, filtfilt, BiquadCascade, FilterSpec};
use crate::heelstrike::HsEvents;
use crate::modality::Modality;
use crate::signal::{linear_interpolate, TimeSeries};

/// Canonical muscle channel names, in recording order.
pub const MUSCLES: [&str; 6] = ["TA", "mGAST", "VL", "RF", "SEM", "BFL"];

/// An ordered set of equally sampled, equally long muscle channels.
#[derive(Debug, Clone, PartialEq)]
pub struct EmgChannelSet {
    channels: Vec<(String, TimeSeries)>,
}

impl EmgChannelSet {
    /// Validates that every channel shares one sample rate and length.
    pub fn new(channels: Vec<(String, TimeSeries)>) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::EmptyInput("EMG channel set"));
        }
        let rate = channels[0].1.sample_rate_hz();
        let len = channels[0].1.len();
        for (name, series) in &channels {
            if series.sample_rate_hz() != rate || series.len() != len {
                return Err(Error::InvalidParams(format!(
                    "channel '{name}' ({} samples at {} Hz) disagrees with '{}' ({len} samples at {rate} Hz)",
                    series.len(),
                    series.sample_rate_hz(),
                    channels[0].0
                )));
            }
        }
        Ok(Self { channels })
    }

    pub fn names(&self) -> Vec<&str> {
        self.channels.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&TimeSeries> {
        self.channels.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &TimeSeries)> {
        self.channels.iter().map(|(n, s)| (n.as_str(), s))
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn n_samples(&self) -> usize {
        self.channels[0].1.len()
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.channels[0].1.sample_rate_hz()
    }

    /// Applies one fallible transform to every channel, keeping names.
    pub fn map_channels(
        &self,
        mut f: impl FnMut(&TimeSeries) -> Result<TimeSeries>,
    ) -> Result<EmgChannelSet> {
        let mut out = Vec::with_capacity(self.channels.len());
        for (name, series) in &self.channels {
            out.push((name.clone(), f(series)?));
        }
        EmgChannelSet::new(out)
    }

    /// Copies the half-open sample range out of every channel.
    pub fn slice(&self, range: SegmentRange) -> Result<EmgChannelSet> {
        self.map_channels(|s| s.slice(range.start_idx, range.end_idx))
    }
}

/// Filter settings for [`preprocess_emg`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmgFilterParams {
    pub bandpass_low_hz: f64,
    pub bandpass_high_hz: f64,
    pub bandpass_order: usize,
    pub notch_hz: f64,
    pub notch_q: f64,
}

impl Default for EmgFilterParams {
    fn default() -> Self {
        Self {
            bandpass_low_hz: 10.0,
            bandpass_high_hz: 150.0,
            bandpass_order: 4,
            notch_hz: 60.0,
            notch_q: 30.0,
        }
    }
}

impl EmgFilterParams {
    fn design(&self, sample_rate_hz: f64) -> Result<(BiquadCascade, BiquadCascade)> {
        let bp = design_butterworth(&FilterSpec::BandPass {
            low_cutoff_hz: self.bandpass_low_hz,
            high_cutoff_hz: self.bandpass_high_hz,
            order: self.bandpass_order,
            sample_rate_hz,
        })?;
        let notch = design_notch(&FilterSpec::Notch {
            center_hz: self.notch_hz,
            q: self.notch_q,
            sample_rate_hz,
        })?;
        Ok((bp, notch))
    }
}

/// One heel-strike-to-heel-strike slice of all EMG channels.
#[derive(Debug, Clone, PartialEq)]
pub struct GaitCycle {
    pub range: SegmentRange,
    pub modality: Modality,
    pub emg: EmgChannelSet,
}

/// Time-normalized mean ± std activity of one muscle across cycles.
#[derive(Debug, Clone, PartialEq)]
pub struct MuscleProfile {
    pub muscle: String,
    pub n_points: usize,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub n_cycles: usize,
}

/// Zero-phase band-pass then notch on every channel.
pub fn preprocess_emg(raw: &EmgChannelSet, params: &EmgFilterParams) -> Result<EmgChannelSet> {
    let fs = raw.sample_rate_hz();
    if fs <= 2.0 * params.bandpass_high_hz {
        return Err(Error::InvalidCutoff {
            cutoff_hz: params.bandpass_high_hz,
            nyquist_hz: fs / 2.0,
        });
    }
    let (bp, notch) = params.design(fs)?;
    raw.map_channels(|channel| filtfilt(&notch, &filtfilt(&bp, channel)?))
}

/// Slices the channel set into `len(events) − 1` gait cycles, cycle `k`
/// spanning `[events[k], events[k+1])`. Fewer than two events yield an
/// empty list: no complete stride exists.
pub fn segment_cycles(
    emg: &EmgChannelSet,
    events: &HsEvents,
    modality: Modality,
) -> Result<Vec<GaitCycle>> {
    let idx = events.indices();
    if idx.len() < 2 {
        return Ok(Vec::new());
    }
    if *idx.last().unwrap() > emg.n_samples() {
        return Err(Error::InvalidParams(format!(
            "heel-strike index {} exceeds EMG length {}",
            idx.last().unwrap(),
            emg.n_samples()
        )));
    }
    let mut cycles = Vec::with_capacity(idx.len() - 1);
    for pair in idx.windows(2) {
        let range = SegmentRange { start_idx: pair[0], end_idx: pair[1] };
        cycles.push(GaitCycle { range, modality, emg: emg.slice(range)? });
    }
    Ok(cycles)
}

/// Smooth activity envelope of a preprocessed channel: full-wave
/// rectification (absolute value) followed by a zero-phase 2nd-order
/// low-pass. Output may undershoot zero slightly from filter ringing.
pub fn activity_envelope(channel: &TimeSeries, lowpass_hz: f64) -> Result<TimeSeries> {
    let rectified: Vec<f64> = channel.samples().iter().map(|v| v.abs()).collect();
    let rect =
        TimeSeries::new(channel.label(), rectified, channel.sample_rate_hz())?;
    let lp = design_butterworth(&FilterSpec::LowPass {
        cutoff_hz: lowpass_hz,
        order: 2,
        sample_rate_hz: channel.sample_rate_hz(),
    })?;
    filtfilt(&lp, &rect)
}

/// Resamples one cycle's channel onto `n_points` samples spanning 0–100%
/// of the gait cycle.
pub fn normalize_cycle(cycle_channel: &TimeSeries, n_points: usize) -> Result<Vec<f64>> {
    Ok(linear_interpolate(cycle_channel, n_points)?.samples().to_vec())
}

/// Pointwise mean and population standard deviation across normalized
/// cycles (all the same length).
pub fn profile_stats(muscle: &str, cycles: &[Vec<f64>]) -> Result<MuscleProfile> {
    if cycles.is_empty() {
        return Err(Error::EmptyInput("normalized cycle list"));
    }
    let n_points = cycles[0].len();
    if cycles.iter().any(|c| c.len() != n_points) {
        return Err(Error::InvalidParams("normalized cycles differ in length".into()));
    }
    let n = cycles.len() as f64;
    let mut mean = vec![0.0; n_points];
    for cycle in cycles {
        for (m, &v) in mean.iter_mut().zip(cycle) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut std = vec![0.0; n_points];
    for cycle in cycles {
        for ((s, &v), &m) in std.iter_mut().zip(cycle).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    for s in &mut std {
        *s = (*s / n).sqrt();
    }
    Ok(MuscleProfile {
        muscle: muscle.to_string(),
        n_points,
        mean,
        std,
        n_cycles: cycles.len(),
    })
}
