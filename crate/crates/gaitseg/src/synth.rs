//! Deterministic synthetic-recording generator with ground truth.
//!
//! Produces the same course protocol the pipeline expects to segment: four
//! directed half-trials separated by standing rests, each half-trial a
//! ramp / level-ground / stair sequence with a sharp turn at every
//! transition. Signals carry the features each stage detects — walking-band
//! x-acceleration energy, y-position slope flips at turns, a damped
//! high-frequency z-acceleration transient at every heel strike, and
//! burst-modulated band-noise EMG — plus configurable disturbances
//! (powerline hum, tremor, shuffling) for the tuning scenarios.
//!
//! Everything derives from one seed through a counter-based generator with
//! fixed substream tags, so output is bit-identical across runs and
//! insensitive to generation order.

use serde::{Deserialize, Serialize};

use crate::activity::Direction;
use crate::emg::{EmgChannelSet, MUSCLES};
use crate::error::{Error, Result};
use crate::modality::Modality;
use crate::recording::{KinChannels, Recording, SYNC_LIMIT_S};
use crate::rng::SplitMix64;
use crate::signal::TimeSeries;
use std::f64::consts::PI;

/// Heel-strike transient: decay constant of the damped oscillation.
const BURST_TAU_S: f64 = 0.05;
/// Heel-strike transient: oscillation frequency (inside the 10–25 Hz band
/// the detection chain isolates).
const BURST_FREQ_HZ: f64 = 15.0;
/// The transient is evaluated over `[0, 7τ]` and treated as zero after.
const BURST_SPAN_TAUS: f64 = 7.0;
/// Heel-strike placement clearance beyond the analysis safety margin, so
/// every ground-truth event sits fully inside a margin-inset segment.
const HS_SEGMENT_INSET_S: f64 = 2.25;
/// Clearance from the recording edges in single-bout mode.
const HS_WALK_INSET_S: f64 = 0.5;
/// Walking-band x-acceleration amplitude during bouts (m/s²).
const WALK_X_AMPLITUDE: f64 = 3.0;
/// Quiet-floor noise on the x-axis accelerometer (m/s²).
const X_NOISE_STD: f64 = 0.05;
/// Walking speed along the course axis (m/s).
const WALK_Y_SLOPE: f64 = 1.0;
/// EMG white-noise floor (mV).
const EMG_NOISE_STD: f64 = 0.02;
/// Sinusoids in each muscle's band-noise carrier.
const CARRIER_BANK_SIZE: usize = 24;
/// Carrier band (Hz), inside the 10–150 Hz preprocessing pass-band.
const CARRIER_BAND_HZ: (f64, f64) = (20.0, 150.0);

// Substream tags: one fixed lane per signal so layout changes never shift
// another channel's draws.
const SUB_HS_JITTER: u64 = 1;
const SUB_AZ_NOISE: u64 = 2;
const SUB_TREMOR: u64 = 3;
const SUB_AX_NOISE: u64 = 4;
const SUB_AY_NOISE: u64 = 5;
const SUB_PY_NOISE: u64 = 6;
const SUB_PX_NOISE: u64 = 7;
const SUB_PZ_NOISE: u64 = 8;
const SUB_MAINS_PHASE: u64 = 9;
const SUB_CARRIER_BASE: u64 = 0x100;
const SUB_EMG_NOISE_BASE: u64 = 0x200;

/// Step rate per walking modality, in steps per minute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CadenceByModality {
    pub lgw: f64,
    pub ra: f64,
    pub rd: f64,
    pub sa: f64,
    pub sd: f64,
}

impl Default for CadenceByModality {
    fn default() -> Self {
        Self { lgw: 110.0, ra: 100.0, rd: 115.0, sa: 95.0, sd: 105.0 }
    }
}

impl CadenceByModality {
    pub fn for_modality(&self, m: Modality) -> f64 {
        match m {
            Modality::LGW => self.lgw,
            Modality::RA => self.ra,
            Modality::RD => self.rd,
            Modality::SA => self.sa,
            Modality::SD => self.sd,
        }
    }

    pub fn uniform(steps_per_min: f64) -> Self {
        Self {
            lgw: steps_per_min,
            ra: steps_per_min,
            rd: steps_per_min,
            sa: steps_per_min,
            sd: steps_per_min,
        }
    }
}

/// Band-limited tremor added to the z-axis accelerometer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TremorParams {
    pub band_low_hz: f64,
    pub band_high_hz: f64,
    pub amplitude_mps2: f64,
}

impl Default for TremorParams {
    fn default() -> Self {
        Self { band_low_hz: 4.0, band_high_hz: 6.0, amplitude_mps2: 3.0 }
    }
}

/// A smaller shuffling transient trailing each true heel strike —
/// foot-drag contact that a mis-tuned cadence bound mistakes for an event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShuffleParams {
    pub delay_s: f64,
    pub amplitude_frac: f64,
}

impl Default for ShuffleParams {
    fn default() -> Self {
        Self { delay_s: 0.5, amplitude_frac: 0.5 }
    }
}

/// Everything the generator needs; one seed fixes every random draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub seed: u64,
    pub fs_emg_hz: f64,
    pub fs_kin_hz: f64,
    pub cadence: CadenceByModality,
    pub hs_amplitude_mps2: f64,
    pub noise_std: f64,
    pub rest_duration_s: f64,
    pub modality_durations_s: [f64; 3],
    pub n_half_trials: usize,
    pub mains_amplitude_mv: f64,
    pub tremor: Option<TremorParams>,
    pub shuffle: Option<ShuffleParams>,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            seed: 0,
            fs_emg_hz: 1000.0,
            fs_kin_hz: 60.0,
            cadence: CadenceByModality::default(),
            hs_amplitude_mps2: 30.0,
            noise_std: 1.0,
            rest_duration_s: 10.0,
            modality_durations_s: [28.0, 30.0, 26.0],
            n_half_trials: 4,
            mains_amplitude_mv: 0.2,
            tremor: None,
            shuffle: None,
        }
    }
}

impl SynthParams {
    /// The slow-shuffling-gait scenario: halved strike amplitude, 50
    /// steps/min everywhere, 4–6 Hz tremor, and a drag transient trailing
    /// each strike by half a second.
    pub fn pd_preset(seed: u64) -> Self {
        Self {
            seed,
            cadence: CadenceByModality::uniform(50.0),
            hs_amplitude_mps2: 15.0,
            tremor: Some(TremorParams::default()),
            shuffle: Some(ShuffleParams::default()),
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("fs_emg_hz", self.fs_emg_hz),
            ("fs_kin_hz", self.fs_kin_hz),
            ("hs_amplitude_mps2", self.hs_amplitude_mps2),
            ("rest_duration_s", self.rest_duration_s),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "noise_std must be >= 0, got {}",
                self.noise_std
            )));
        }
        if self.modality_durations_s.iter().any(|&d| !(d.is_finite() && d > 2.0 * HS_SEGMENT_INSET_S)) {
            return Err(Error::InvalidParams(format!(
                "modality durations must each exceed {} s, got {:?}",
                2.0 * HS_SEGMENT_INSET_S,
                self.modality_durations_s
            )));
        }
        if self.n_half_trials == 0 {
            return Err(Error::InvalidParams("n_half_trials must be >= 1".into()));
        }
        for m in [Modality::LGW, Modality::RA, Modality::RD, Modality::SA, Modality::SD] {
            let c = self.cadence.for_modality(m);
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::InvalidParams(format!("cadence for {m} must be > 0, got {c}")));
            }
        }
        Ok(())
    }
}

/// One half-trial of the ground truth, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GtHalfTrial {
    pub start_s: f64,
    pub end_s: f64,
    pub direction: Direction,
}

/// Full annotations for one generated recording.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub hs_times_s: Vec<f64>,
    pub turn_times_s: Vec<f64>,
    pub half_trials: Vec<GtHalfTrial>,
    pub modalities: Vec<[Modality; 3]>,
    /// Per muscle, the activation window as a fraction of the gait cycle;
    /// windows ending past 1.0 wrap into the following cycle.
    pub emg_burst_phases: Vec<(String, [f64; 2])>,
}

/// The activation windows the generator modulates each muscle with.
pub fn default_burst_phases() -> Vec<(String, [f64; 2])> {
    vec![
        ("TA".to_string(), [0.90, 1.10]),
        ("mGAST".to_string(), [0.30, 0.50]),
        ("VL".to_string(), [0.02, 0.22]),
        ("RF".to_string(), [0.55, 0.70]),
        ("SEM".to_string(), [0.80, 1.00]),
        ("BFL".to_string(), [0.82, 1.02]),
    ]
}

/// The damped strike transient, zero outside `[0, 7τ]`.
fn burst_value(dt: f64) -> f64 {
    if !(0.0..=BURST_SPAN_TAUS * BURST_TAU_S).contains(&dt) {
        return 0.0;
    }
    (-dt / BURST_TAU_S).exp() * (2.0 * PI * BURST_FREQ_HZ * dt).sin()
}

/// Time offset of the transient's amplitude centroid from its onset: the
/// first moment of `e^{−t/τ}|sin(2πft)|`. Ground-truth strike times anchor
/// here, the "center of mass" of the impact energy, rather than at the
/// waveform onset.
pub fn burst_centroid_s() -> f64 {
    let span = BURST_SPAN_TAUS * BURST_TAU_S;
    let n = 20_000;
    let dt = span / n as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for k in 0..n {
        let t = (k as f64 + 0.5) * dt;
        let w = (-t / BURST_TAU_S).exp() * (2.0 * PI * BURST_FREQ_HZ * t).sin().abs();
        num += t * w;
        den += w;
    }
    num / den
}

/// One contiguous walking stretch with a fixed modality.
struct SegMeta {
    start_s: f64,
    end_s: f64,
    modality: Modality,
    /// Position in its half-trial (0..3), controls the y-slope sign.
    position: usize,
    direction: Direction,
}

fn modality_sequence(direction: Direction) -> [Modality; 3] {
    match direction {
        Direction::Forward => [Modality::RD, Modality::LGW, Modality::SA],
        Direction::Reverse => [Modality::SD, Modality::LGW, Modality::RA],
    }
}

/// Shared synthesis core: given the segment layout, renders all channels
/// and the strike times.
struct Synthesizer<'a> {
    params: &'a SynthParams,
    segments: Vec<SegMeta>,
    total_s: f64,
    hs_inset_s: f64,
}

impl Synthesizer<'_> {
    /// Ground-truth strike times per segment: a uniform grid at the
    /// modality cadence, inset from both segment edges, with small
    /// per-event jitter (clamped to 4% of the period so consecutive gaps
    /// never shrink below 92% of the period).
    fn place_heel_strikes(&self) -> Vec<Vec<f64>> {
        let mut rng = SplitMix64::new(self.params.seed).substream(SUB_HS_JITTER);
        self.segments
            .iter()
            .map(|seg| {
                let period = 60.0 / self.params.cadence.for_modality(seg.modality);
                let lo = seg.start_s + self.hs_inset_s;
                let hi = seg.end_s - self.hs_inset_s;
                let mut times = Vec::new();
                let mut t = lo;
                while t <= hi + 1e-9 {
                    let jitter = (rng.gauss(0.0, 0.015 * period)).clamp(-0.04 * period, 0.04 * period);
                    times.push((t + jitter).clamp(lo, hi));
                    t += period;
                }
                times
            })
            .collect()
    }

    fn in_segment(&self, t: f64) -> Option<&SegMeta> {
        self.segments.iter().find(|s| t >= s.start_s && t < s.end_s)
    }

    fn render_kin(&self, hs_by_segment: &[Vec<f64>]) -> Result<KinChannels> {
        let fs = self.params.fs_kin_hz;
        let n = (self.total_s * fs).round() as usize;
        let seed = self.params.seed;
        let centroid = burst_centroid_s();

        // z: gravity + noise + strike transients (+ tremor, + shuffle).
        let mut az: Vec<f64> = {
            let mut rng = SplitMix64::new(seed).substream(SUB_AZ_NOISE);
            (0..n).map(|_| 9.81 + rng.gauss(0.0, self.params.noise_std)).collect()
        };
        let add_burst = |t_onset: f64, amplitude: f64, az: &mut [f64]| {
            let span = BURST_SPAN_TAUS * BURST_TAU_S;
            let j0 = (t_onset * fs).floor().max(0.0) as usize;
            let j1 = (((t_onset + span) * fs).ceil() as usize).min(n);
            for j in j0..j1 {
                az[j] += amplitude * burst_value(j as f64 / fs - t_onset);
            }
        };
        for times in hs_by_segment {
            for &t_hs in times {
                add_burst(t_hs - centroid, self.params.hs_amplitude_mps2, &mut az);
                if let Some(sh) = &self.params.shuffle {
                    add_burst(
                        t_hs - centroid + sh.delay_s,
                        self.params.hs_amplitude_mps2 * sh.amplitude_frac,
                        &mut az,
                    );
                }
            }
        }
        if let Some(tr) = &self.params.tremor {
            let mut rng = SplitMix64::new(seed).substream(SUB_TREMOR);
            let k = 8;
            let comps: Vec<(f64, f64)> = (0..k)
                .map(|_| (rng.uniform(tr.band_low_hz, tr.band_high_hz), rng.uniform(0.0, 2.0 * PI)))
                .collect();
            let amp = tr.amplitude_mps2 / k as f64;
            for (j, v) in az.iter_mut().enumerate() {
                let t = j as f64 / fs;
                // Tremor persists through the whole recording (it is a
                // resting tremor as much as an action tremor).
                *v += comps.iter().map(|&(f, ph)| amp * (2.0 * PI * f * t + ph).sin()).sum::<f64>();
            }
        }

        // x: walking-band oscillation during bouts over a quiet floor.
        let ax: Vec<f64> = {
            let mut rng = SplitMix64::new(seed).substream(SUB_AX_NOISE);
            (0..n)
                .map(|j| {
                    let t = j as f64 / fs;
                    let mut v = rng.gauss(0.0, X_NOISE_STD);
                    if let Some(seg) = self.in_segment(t) {
                        let f_step = self.params.cadence.for_modality(seg.modality) / 60.0;
                        let tt = t - seg.start_s;
                        v += WALK_X_AMPLITUDE * (2.0 * PI * f_step * tt).sin()
                            + 0.4 * WALK_X_AMPLITUDE * (4.0 * PI * f_step * tt + 0.7).sin();
                    }
                    v
                })
                .collect()
        };

        // y-position: piecewise linear, slope sign flipping at each turn.
        let py: Vec<f64> = {
            let mut rng = SplitMix64::new(seed).substream(SUB_PY_NOISE);
            let mut y = 0.0;
            let dt = 1.0 / fs;
            (0..n)
                .map(|j| {
                    let t = j as f64 / fs;
                    let slope = match self.in_segment(t) {
                        Some(seg) => {
                            let outbound = match seg.direction {
                                Direction::Forward => 1.0,
                                Direction::Reverse => -1.0,
                            };
                            let alternation = if seg.position == 1 { -1.0 } else { 1.0 };
                            WALK_Y_SLOPE * outbound * alternation
                        }
                        None => 0.0,
                    };
                    y += slope * dt;
                    y + rng.gauss(0.0, 0.002)
                })
                .collect()
        };

        let ay: Vec<f64> = {
            let mut rng = SplitMix64::new(seed).substream(SUB_AY_NOISE);
            (0..n).map(|_| rng.gauss(0.0, X_NOISE_STD)).collect()
        };
        let px: Vec<f64> = {
            let mut rng = SplitMix64::new(seed).substream(SUB_PX_NOISE);
            (0..n).map(|j| 0.001 * j as f64 / fs + rng.gauss(0.0, 0.01)).collect()
        };
        let pz: Vec<f64> = {
            let mut rng = SplitMix64::new(seed).substream(SUB_PZ_NOISE);
            (0..n).map(|_| 0.10 + rng.gauss(0.0, 0.01)).collect()
        };

        KinChannels::new(
            TimeSeries::new("ax", ax, fs)?,
            TimeSeries::new("ay", ay, fs)?,
            TimeSeries::new("az", az, fs)?,
            TimeSeries::new("px", px, fs)?,
            TimeSeries::new("py", py, fs)?,
            TimeSeries::new("pz", pz, fs)?,
        )
    }

    fn render_emg(&self, hs_by_segment: &[Vec<f64>]) -> Result<EmgChannelSet> {
        let fs = self.params.fs_emg_hz;
        let n = (self.total_s * fs).round() as usize;
        let seed = self.params.seed;
        let phases = default_burst_phases();

        // Floor noise and mains interference everywhere.
        let mut mains_rng = SplitMix64::new(seed).substream(SUB_MAINS_PHASE);
        let mut channels: Vec<(String, Vec<f64>)> = MUSCLES
            .iter()
            .enumerate()
            .map(|(m, &name)| {
                let mut rng = SplitMix64::new(seed).substream(SUB_EMG_NOISE_BASE + m as u64);
                let mains_phase = mains_rng.uniform(0.0, 2.0 * PI);
                let amp = self.params.mains_amplitude_mv;
                let data: Vec<f64> = (0..n)
                    .map(|j| {
                        let t = j as f64 / fs;
                        rng.gauss(0.0, EMG_NOISE_STD) + amp * (2.0 * PI * 60.0 * t + mains_phase).sin()
                    })
                    .collect();
                (name.to_string(), data)
            })
            .collect();

        // Band-noise carrier bank per muscle, evaluated only inside bursts.
        let banks: Vec<Vec<(f64, f64)>> = (0..MUSCLES.len())
            .map(|m| {
                let mut rng = SplitMix64::new(seed).substream(SUB_CARRIER_BASE + m as u64);
                (0..CARRIER_BANK_SIZE)
                    .map(|_| (rng.uniform(CARRIER_BAND_HZ.0, CARRIER_BAND_HZ.1), rng.uniform(0.0, 2.0 * PI)))
                    .collect()
            })
            .collect();
        let carrier_amp = 1.0 / (CARRIER_BANK_SIZE as f64).sqrt();

        // Raised-cosine activation over each muscle's burst-phase window.
        let window = |phi: f64, lo: f64, hi: f64| -> f64 {
            let p = if phi >= lo && phi <= hi {
                (phi - lo) / (hi - lo)
            } else if hi > 1.0 && phi + 1.0 <= hi {
                (phi + 1.0 - lo) / (hi - lo)
            } else {
                return 0.0;
            };
            0.5 * (1.0 - (2.0 * PI * p).cos())
        };

        for times in hs_by_segment {
            for pair in times.windows(2) {
                let (a, b) = (pair[0], pair[1]);
                let j0 = (a * fs).ceil() as usize;
                let j1 = ((b * fs).ceil() as usize).min(n);
                for j in j0..j1 {
                    let t = j as f64 / fs;
                    let phi = (t - a) / (b - a);
                    for (m, (_, data)) in channels.iter_mut().enumerate() {
                        let [lo, hi] = phases[m].1;
                        let w = window(phi, lo, hi);
                        if w > 0.0 {
                            let carrier: f64 = banks[m]
                                .iter()
                                .map(|&(f, ph)| carrier_amp * (2.0 * PI * f * t + ph).sin())
                                .sum();
                            data[j] += w * carrier;
                        }
                    }
                }
            }
        }

        EmgChannelSet::new(
            channels
                .into_iter()
                .map(|(name, data)| Ok((name.clone(), TimeSeries::new(name, data, fs)?)))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    fn run(&self) -> Result<(Recording, Vec<Vec<f64>>)> {
        let hs = self.place_heel_strikes();
        let kin = self.render_kin(&hs)?;
        let emg = self.render_emg(&hs)?;
        Ok((Recording::new(kin, emg, SYNC_LIMIT_S)?, hs))
    }
}

/// Generates a full course trial: rest, then `n_half_trials` traversals
/// (alternating Forward/Reverse, three modality segments each) separated
/// by rests, ending with a final rest.
pub fn generate_trial(params: &SynthParams) -> Result<(Recording, GroundTruth)> {
    params.validate()?;
    let mut segments = Vec::new();
    let mut half_trials = Vec::new();
    let mut modalities = Vec::new();
    let mut turn_times = Vec::new();
    let mut t = params.rest_duration_s;
    for ht in 0..params.n_half_trials {
        let direction = if ht % 2 == 0 { Direction::Forward } else { Direction::Reverse };
        let sequence = modality_sequence(direction);
        let start = t;
        for (k, &modality) in sequence.iter().enumerate() {
            let end = t + params.modality_durations_s[k];
            segments.push(SegMeta { start_s: t, end_s: end, modality, position: k, direction });
            if k < 2 {
                turn_times.push(end);
            }
            t = end;
        }
        half_trials.push(GtHalfTrial { start_s: start, end_s: t, direction });
        modalities.push(sequence);
        t += params.rest_duration_s;
    }
    let total_s = t;

    let synth = Synthesizer { params, segments, total_s, hs_inset_s: HS_SEGMENT_INSET_S };
    let (recording, hs_by_segment) = synth.run()?;
    let mut hs_times_s: Vec<f64> = hs_by_segment.into_iter().flatten().collect();
    hs_times_s.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let truth = GroundTruth {
        hs_times_s,
        turn_times_s: turn_times,
        half_trials,
        modalities,
        emg_burst_phases: default_burst_phases(),
    };
    Ok((recording, truth))
}

/// Generates one uninterrupted walking bout of a single modality — the
/// fixture for detection-only scenarios. The whole recording is active;
/// ground truth carries the bout as one Forward half-trial and no turns.
pub fn generate_walk(
    params: &SynthParams,
    modality: Modality,
    duration_s: f64,
) -> Result<(Recording, GroundTruth)> {
    params.validate()?;
    if !(duration_s.is_finite() && duration_s > 2.0 * HS_WALK_INSET_S) {
        return Err(Error::InvalidParams(format!(
            "walk duration must exceed {} s, got {duration_s}",
            2.0 * HS_WALK_INSET_S
        )));
    }
    let segments = vec![SegMeta {
        start_s: 0.0,
        end_s: duration_s,
        modality,
        position: 0,
        direction: Direction::Forward,
    }];
    let synth = Synthesizer { params, segments, total_s: duration_s, hs_inset_s: HS_WALK_INSET_S };
    let (recording, hs_by_segment) = synth.run()?;

    let truth = GroundTruth {
        hs_times_s: hs_by_segment.into_iter().flatten().collect(),
        turn_times_s: Vec::new(),
        half_trials: vec![GtHalfTrial { start_s: 0.0, end_s: duration_s, direction: Direction::Forward }],
        modalities: vec![[modality; 3]],
        emg_burst_phases: default_burst_phases(),
    };
    Ok((recording, truth))
}
