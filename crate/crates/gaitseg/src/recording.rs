//! In-memory representation of one synchronized recording: six kinematic
//! channels from the foot-worn IMU plus six sEMG channels, captured at
//! different rates over the same time span.

use crate::emg::EmgChannelSet;
use crate::error::{Error, Result};
use crate::signal::{linear_interpolate, TimeSeries};

/// Default tolerance for the KIN/EMG duration agreement check, seconds.
pub const SYNC_LIMIT_S: f64 = 0.5;

/// Kinematic channel names in file order.
pub const KIN_CHANNELS: [&str; 6] = ["ax", "ay", "az", "px", "py", "pz"];

/// Three-axis acceleration (m/s²) and position (m), equally sampled.
#[derive(Debug, Clone, PartialEq)]
pub struct KinChannels {
    pub ax: TimeSeries,
    pub ay: TimeSeries,
    pub az: TimeSeries,
    pub px: TimeSeries,
    pub py: TimeSeries,
    pub pz: TimeSeries,
}

impl KinChannels {
    /// Validates that all six channels share one rate and length.
    pub fn new(
        ax: TimeSeries,
        ay: TimeSeries,
        az: TimeSeries,
        px: TimeSeries,
        py: TimeSeries,
        pz: TimeSeries,
    ) -> Result<Self> {
        let rate = ax.sample_rate_hz();
        let len = ax.len();
        for (name, s) in [("ay", &ay), ("az", &az), ("px", &px), ("py", &py), ("pz", &pz)] {
            if s.sample_rate_hz() != rate || s.len() != len {
                return Err(Error::InvalidParams(format!(
                    "kinematic channel '{name}' ({} samples at {} Hz) disagrees with 'ax' ({len} samples at {rate} Hz)",
                    s.len(),
                    s.sample_rate_hz()
                )));
            }
        }
        Ok(Self { ax, ay, az, px, py, pz })
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.ax.sample_rate_hz()
    }

    pub fn n_samples(&self) -> usize {
        self.ax.len()
    }

    pub fn duration_s(&self) -> f64 {
        self.ax.duration_s()
    }

    /// Channels in file order, for serialization and iteration.
    pub fn columns(&self) -> [(&'static str, &TimeSeries); 6] {
        [
            ("ax", &self.ax),
            ("ay", &self.ay),
            ("az", &self.az),
            ("px", &self.px),
            ("py", &self.py),
            ("pz", &self.pz),
        ]
    }

    /// Linearly resamples every channel to `target_len` samples.
    pub fn resampled(&self, target_len: usize) -> Result<KinChannels> {
        Ok(KinChannels {
            ax: linear_interpolate(&self.ax, target_len)?,
            ay: linear_interpolate(&self.ay, target_len)?,
            az: linear_interpolate(&self.az, target_len)?,
            px: linear_interpolate(&self.px, target_len)?,
            py: linear_interpolate(&self.py, target_len)?,
            pz: linear_interpolate(&self.pz, target_len)?,
        })
    }
}

/// One complete recording: kinematics and EMG, time-synchronized.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub kin: KinChannels,
    pub emg: EmgChannelSet,
}

impl Recording {
    /// Validates that the two modalities cover the same time span to
    /// within `sync_limit_s` seconds.
    pub fn new(kin: KinChannels, emg: EmgChannelSet, sync_limit_s: f64) -> Result<Self> {
        let kin_s = kin.duration_s();
        let emg_s = emg.n_samples() as f64 / emg.sample_rate_hz();
        if (kin_s - emg_s).abs() > sync_limit_s {
            return Err(Error::DurationMismatch { kin_s, emg_s, limit_s: sync_limit_s });
        }
        Ok(Self { kin, emg })
    }

    /// The recording with kinematics brought onto the EMG sample grid, so
    /// every analysis stage shares one index space.
    pub fn with_kin_on_emg_grid(&self) -> Result<Recording> {
        let kin = self.kin.resampled(self.emg.n_samples())?;
        Ok(Recording { kin, emg: self.emg.clone() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kin_set(len: usize, rate: f64) -> KinChannels {
        let mk = |label: &str| TimeSeries::new(label, vec![0.0; len], rate).unwrap();
        KinChannels::new(mk("ax"), mk("ay"), mk("az"), mk("px"), mk("py"), mk("pz")).unwrap()
    }

    fn emg_set(len: usize, rate: f64) -> EmgChannelSet {
        let channels = crate::emg::MUSCLES
            .iter()
            .map(|&m| (m.to_string(), TimeSeries::new(m, vec![0.0; len], rate).unwrap()))
            .collect();
        EmgChannelSet::new(channels).unwrap()
    }

    #[test]
    fn kin_channels_must_agree() {
        let mk = |label: &str, len: usize| TimeSeries::new(label, vec![0.0; len], 60.0).unwrap();
        let err = KinChannels::new(
            mk("ax", 100),
            mk("ay", 100),
            mk("az", 99),
            mk("px", 100),
            mk("py", 100),
            mk("pz", 100),
        );
        assert!(err.is_err());
    }

    #[test]
    fn durations_must_match_within_the_sync_limit() {
        // 600 kin samples at 60 Hz = 10 s vs 10_000 EMG samples at 1 kHz.
        let rec = Recording::new(kin_set(600, 60.0), emg_set(10_000, 1000.0), SYNC_LIMIT_S);
        assert!(rec.is_ok());
        let err = Recording::new(kin_set(540, 60.0), emg_set(10_000, 1000.0), SYNC_LIMIT_S);
        assert!(matches!(err, Err(Error::DurationMismatch { .. })));
    }

    #[test]
    fn resampling_puts_kinematics_on_the_emg_grid() {
        let rec = Recording::new(kin_set(600, 60.0), emg_set(10_000, 1000.0), SYNC_LIMIT_S).unwrap();
        let on_grid = rec.with_kin_on_emg_grid().unwrap();
        assert_eq!(on_grid.kin.n_samples(), 10_000);
        assert!((on_grid.kin.sample_rate_hz() - 1000.0).abs() / 1000.0 < 0.01);
        assert_eq!(on_grid.emg.n_samples(), 10_000);
    }
}
