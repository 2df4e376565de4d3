//! Pipeline configuration: JSON-loadable, all fields optional, unknown
//! keys rejected.
//!
//! A config file overrides only the keys it names; everything else keeps
//! the documented defaults. Misspelled or unsupported keys are a hard
//! error rather than a silent no-op, so a tuning attempt can never be
//! ignored without notice.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::activity::ActivityParams;
use crate::emg::EmgFilterParams;
use crate::error::{Error, Result};
use crate::heelstrike::HsParams;
use crate::modality::TurnParams;

/// Activity-detection settings as configured.
///
/// The runtime threshold is either `energy_threshold_absolute` or, when
/// that is unset, `energy_threshold_multiplier ×` the 10th-percentile
/// window energy of the recording (so the default adapts to sensor gain).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ActivityConfig {
    pub energy_window_samples: usize,
    pub energy_threshold_multiplier: f64,
    pub energy_threshold_absolute: Option<f64>,
    pub min_activity_samples: usize,
    pub merge_gap_samples: usize,
}

impl Default for ActivityConfig {
    fn default() -> Self {
        Self {
            energy_window_samples: 1000,
            energy_threshold_multiplier: 8.0,
            energy_threshold_absolute: None,
            min_activity_samples: 6000,
            merge_gap_samples: 1500,
        }
    }
}

impl ActivityConfig {
    /// Concrete parameters once the threshold value is known.
    pub fn resolve(&self, energy_threshold: f64) -> ActivityParams {
        ActivityParams {
            energy_window_samples: self.energy_window_samples,
            energy_threshold,
            min_activity_samples: self.min_activity_samples,
            merge_gap_samples: self.merge_gap_samples,
        }
    }

    fn validate(&self) -> Result<()> {
        // Validate the sample-count fields through the runtime type, with
        // a placeholder threshold when none is configured.
        self.resolve(self.energy_threshold_absolute.unwrap_or(1.0)).validate()?;
        if !(self.energy_threshold_multiplier.is_finite() && self.energy_threshold_multiplier > 0.0)
        {
            return Err(Error::InvalidParams(format!(
                "energy_threshold_multiplier must be > 0, got {}",
                self.energy_threshold_multiplier
            )));
        }
        Ok(())
    }
}

/// Every tunable of the batch pipeline, with defaults matching the
/// documented per-stage values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    /// Sample rate the kinematics files are expected to carry (Hz).
    pub fs_kin_hz: f64,
    /// Sample rate the EMG files are expected to carry (Hz); also the
    /// common analysis grid.
    pub fs_emg_hz: f64,
    pub expected_half_trials: usize,
    pub activity: ActivityConfig,
    pub turns: TurnParams,
    pub heel_strike: HsParams,
    pub emg: EmgFilterParams,
    /// Cutoff of the EMG activity-envelope low-pass (Hz).
    pub envelope_lowpass_hz: f64,
    /// Points per time-normalized gait cycle.
    pub cycle_points: usize,
    /// Optional user-supplied divisor applied to profile amplitudes (for
    /// normalization against an external reference); `null` leaves
    /// profiles in filtered-signal units.
    pub amplitude_scale: Option<f64>,
    /// Default artifact directory; a `--out` flag overrides it.
    pub output_dir: Option<String>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            fs_kin_hz: 60.0,
            fs_emg_hz: 1000.0,
            expected_half_trials: 4,
            activity: ActivityConfig::default(),
            turns: TurnParams::default(),
            heel_strike: HsParams::default(),
            emg: EmgFilterParams::default(),
            envelope_lowpass_hz: 6.0,
            cycle_points: 1000,
            amplitude_scale: None,
            output_dir: None,
        }
    }
}

// Mirror types for deserialization: every field optional, unknown fields
// rejected. Deserializing into these and merging over the defaults keeps
// "absent" distinguishable from "explicitly set to the default".

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialActivity {
    energy_window_samples: Option<usize>,
    energy_threshold_multiplier: Option<f64>,
    energy_threshold_absolute: Option<f64>,
    min_activity_samples: Option<usize>,
    merge_gap_samples: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialTurns {
    smoothing_n: Option<usize>,
    min_turn_separation_samples: Option<usize>,
    safety_margin_samples: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialHs {
    highpass_hz: Option<f64>,
    lowpass_hz: Option<f64>,
    filter_order: Option<usize>,
    max_cadence_steps_per_min: Option<f64>,
    min_peak_height_rel: Option<f64>,
    expected_velocity_mps: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialEmg {
    bandpass_low_hz: Option<f64>,
    bandpass_high_hz: Option<f64>,
    bandpass_order: Option<usize>,
    notch_hz: Option<f64>,
    notch_q: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialConfig {
    fs_kin_hz: Option<f64>,
    fs_emg_hz: Option<f64>,
    expected_half_trials: Option<usize>,
    activity: Option<PartialActivity>,
    turns: Option<PartialTurns>,
    heel_strike: Option<PartialHs>,
    emg: Option<PartialEmg>,
    envelope_lowpass_hz: Option<f64>,
    cycle_points: Option<usize>,
    amplitude_scale: Option<f64>,
    output_dir: Option<String>,
}

fn merge<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl PipelineConfig {
    /// Parses a JSON config and applies it over the defaults. Any unknown
    /// key anywhere in the document is an error.
    pub fn from_json_str(json: &str) -> Result<Self> {
        let partial: PartialConfig =
            serde_json::from_str(json).map_err(|e| Error::Config(e.to_string()))?;
        let mut cfg = Self::default();
        merge(&mut cfg.fs_kin_hz, partial.fs_kin_hz);
        merge(&mut cfg.fs_emg_hz, partial.fs_emg_hz);
        merge(&mut cfg.expected_half_trials, partial.expected_half_trials);
        if let Some(a) = partial.activity {
            merge(&mut cfg.activity.energy_window_samples, a.energy_window_samples);
            merge(&mut cfg.activity.energy_threshold_multiplier, a.energy_threshold_multiplier);
            if a.energy_threshold_absolute.is_some() {
                cfg.activity.energy_threshold_absolute = a.energy_threshold_absolute;
            }
            merge(&mut cfg.activity.min_activity_samples, a.min_activity_samples);
            merge(&mut cfg.activity.merge_gap_samples, a.merge_gap_samples);
        }
        if let Some(t) = partial.turns {
            merge(&mut cfg.turns.smoothing_n, t.smoothing_n);
            merge(&mut cfg.turns.min_turn_separation_samples, t.min_turn_separation_samples);
            merge(&mut cfg.turns.safety_margin_samples, t.safety_margin_samples);
        }
        if let Some(h) = partial.heel_strike {
            merge(&mut cfg.heel_strike.highpass_hz, h.highpass_hz);
            merge(&mut cfg.heel_strike.lowpass_hz, h.lowpass_hz);
            merge(&mut cfg.heel_strike.filter_order, h.filter_order);
            merge(&mut cfg.heel_strike.max_cadence_steps_per_min, h.max_cadence_steps_per_min);
            merge(&mut cfg.heel_strike.min_peak_height_rel, h.min_peak_height_rel);
            if h.expected_velocity_mps.is_some() {
                cfg.heel_strike.expected_velocity_mps = h.expected_velocity_mps;
            }
        }
        if let Some(e) = partial.emg {
            merge(&mut cfg.emg.bandpass_low_hz, e.bandpass_low_hz);
            merge(&mut cfg.emg.bandpass_high_hz, e.bandpass_high_hz);
            merge(&mut cfg.emg.bandpass_order, e.bandpass_order);
            merge(&mut cfg.emg.notch_hz, e.notch_hz);
            merge(&mut cfg.emg.notch_q, e.notch_q);
        }
        merge(&mut cfg.envelope_lowpass_hz, partial.envelope_lowpass_hz);
        merge(&mut cfg.cycle_points, partial.cycle_points);
        if partial.amplitude_scale.is_some() {
            cfg.amplitude_scale = partial.amplitude_scale;
        }
        if partial.output_dir.is_some() {
            cfg.output_dir = partial.output_dir;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    /// Sample-rate-independent validation; filter cutoffs are checked
    /// against the recording's rate when the pipeline runs.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("fs_kin_hz", self.fs_kin_hz), ("fs_emg_hz", self.fs_emg_hz)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.expected_half_trials == 0 {
            return Err(Error::InvalidParams("expected_half_trials must be >= 1".into()));
        }
        self.activity.validate()?;
        self.turns.validate()?;
        if !(self.envelope_lowpass_hz.is_finite() && self.envelope_lowpass_hz > 0.0) {
            return Err(Error::InvalidParams(format!(
                "envelope_lowpass_hz must be > 0, got {}",
                self.envelope_lowpass_hz
            )));
        }
        if self.cycle_points < 2 {
            return Err(Error::InvalidParams(format!(
                "cycle_points must be >= 2, got {}",
                self.cycle_points
            )));
        }
        if let Some(s) = self.amplitude_scale {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "amplitude_scale must be > 0, got {s}"
                )));
            }
        }
        Ok(())
    }

    /// The effective configuration as pretty JSON (what `--print-config`
    /// shows). Field order is fixed, so output is deterministic.
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization cannot fail")
    }

    /// Compact JSON embedding for reports.
    pub fn to_json_compact(&self) -> String {
        serde_json::to_string(self).expect("config serialization cannot fail")
    }
}
