//! The batch pipeline: smoothing → energy → binarize → artifact filter →
//! half-trials → turns → modality labels → per-segment heel strikes →
//! EMG preprocessing → gait cycles → muscle profiles, plus the
//! machine-readable report and on-disk artifacts.
//!
//! Every stage failure is wrapped with the stage name, and the report's
//! JSON serialization is byte-deterministic: fixed key order, fixed float
//! formatting (times with 6 decimal places).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::activity::{
    binarize_activity, compute_energy, extract_half_trials, relative_energy_threshold,
    remove_short_segments, Direction,
};
use crate::config::PipelineConfig;
use crate::emg::{
    activity_envelope, normalize_cycle, preprocess_emg, profile_stats, segment_cycles,
    EmgChannelSet, MuscleProfile, MUSCLES,
};
use crate::error::{Error, Result};
use crate::heelstrike::{detect_heel_strikes, hs_envelope, HsEvents};
use crate::modality::{detect_turns, label_modalities, Modality};
use crate::plot::{envelope_svg, profile_svg};
use crate::recording::Recording;
use crate::signal::TimeSeries;

/// Name stamped into every report.
pub const TOOL_NAME: &str = "gaitseg";
/// Version stamped into every report.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One modality segment's results.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentReport {
    pub modality: Modality,
    pub start_s: f64,
    pub end_s: f64,
    pub heel_strikes_s: Vec<f64>,
    pub n_cycles: usize,
}

/// One half-trial's results.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfTrialReport {
    pub index: usize,
    pub direction: Direction,
    pub start_s: f64,
    pub end_s: f64,
    pub turns_s: [f64; 2],
    pub segments: Vec<SegmentReport>,
}

/// The per-recording event report.
#[derive(Debug, Clone, PartialEq)]
pub struct EventReport {
    pub sample_rate_hz: f64,
    pub duration_s: f64,
    /// Effective configuration, echoed as compact JSON.
    pub config_json: String,
    pub half_trials: Vec<HalfTrialReport>,
    /// All detected heel strikes, globally sorted.
    pub heel_strikes_s: Vec<f64>,
}

/// Fixed-precision seconds for report output.
fn sec(v: f64) -> String {
    format!("{v:.6}")
}

fn push_times(out: &mut String, times: &[f64]) {
    out.push('[');
    for (i, &t) in times.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&sec(t));
    }
    out.push(']');
}

impl EventReport {
    pub fn n_segments(&self) -> usize {
        self.half_trials.iter().map(|h| h.segments.len()).sum()
    }

    pub fn n_cycles(&self) -> usize {
        self.half_trials
            .iter()
            .flat_map(|h| &h.segments)
            .map(|s| s.n_cycles)
            .sum()
    }

    /// Serializes with a fixed key order and fixed float formatting, so
    /// identical inputs produce byte-identical documents.
    pub fn to_json_string(&self) -> String {
        let mut out = String::with_capacity(4096 + 16 * self.heel_strikes_s.len());
        let _ = write!(
            out,
            "{{\"tool\":\"{TOOL_NAME}\",\"version\":\"{TOOL_VERSION}\",\"sample_rate_hz\":{},\"duration_s\":{},\"config\":{},\"half_trials\":[",
            sec(self.sample_rate_hz),
            sec(self.duration_s),
            self.config_json,
        );
        for (i, ht) in self.half_trials.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let dir = match ht.direction {
                Direction::Forward => "forward",
                Direction::Reverse => "reverse",
            };
            let _ = write!(
                out,
                "{{\"index\":{},\"direction\":\"{dir}\",\"start_s\":{},\"end_s\":{},\"turns_s\":[{},{}],\"segments\":[",
                ht.index,
                sec(ht.start_s),
                sec(ht.end_s),
                sec(ht.turns_s[0]),
                sec(ht.turns_s[1]),
            );
            for (j, seg) in ht.segments.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(
                    out,
                    "{{\"modality\":\"{}\",\"start_s\":{},\"end_s\":{},\"n_heel_strikes\":{},\"n_cycles\":{},\"heel_strikes_s\":",
                    seg.modality,
                    sec(seg.start_s),
                    sec(seg.end_s),
                    seg.heel_strikes_s.len(),
                    seg.n_cycles,
                );
                push_times(&mut out, &seg.heel_strikes_s);
                out.push('}');
            }
            out.push_str("]}");
        }
        out.push_str("],\"heel_strikes_s\":");
        push_times(&mut out, &self.heel_strikes_s);
        let _ = write!(
            out,
            ",\"totals\":{{\"n_half_trials\":{},\"n_segments\":{},\"n_heel_strikes\":{},\"n_cycles\":{}}}}}",
            self.half_trials.len(),
            self.n_segments(),
            self.heel_strikes_s.len(),
            self.n_cycles(),
        );
        out
    }
}

/// One gait cycle's preprocessed EMG, addressed by its place in the trial.
#[derive(Debug, Clone)]
pub struct CycleSlice {
    pub half_trial_index: usize,
    /// Segment position within the half-trial (0..3).
    pub segment_index: usize,
    /// Cycle position within the segment.
    pub cycle_index: usize,
    pub emg: EmgChannelSet,
}

/// Everything the pipeline produces in memory.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub report: EventReport,
    pub profiles: Vec<MuscleProfile>,
    pub cycles: Vec<CycleSlice>,
    /// Heel-strike detection envelope over the full z-acceleration, for
    /// plotting.
    pub az_envelope: TimeSeries,
    /// Global sample indices of all detected heel strikes.
    pub hs_global_indices: Vec<usize>,
}

/// Runs every stage on one recording. The recording's kinematics are
/// resampled onto the EMG grid first, so all indices share one timeline.
pub fn run_pipeline(recording: &Recording, config: &PipelineConfig) -> Result<PipelineOutput> {
    config.validate().map_err(Error::in_stage("config"))?;
    let rec = recording.with_kin_on_emg_grid().map_err(Error::in_stage("ingest"))?;
    let fs = rec.emg.sample_rate_hz();
    config.heel_strike.validate(fs).map_err(Error::in_stage("config"))?;

    // Stage: activity — where is the participant walking at all?
    let stage_activity = |e| Error::in_stage("activity")(e);
    let probe_params = config.activity.resolve(1.0);
    let energy = compute_energy(&rec.kin.ax, &probe_params).map_err(stage_activity)?;
    let threshold = match config.activity.energy_threshold_absolute {
        Some(t) => t,
        None => relative_energy_threshold(&energy, config.activity.energy_threshold_multiplier)
            .map_err(stage_activity)?,
    };
    let activity_params = config.activity.resolve(threshold);
    activity_params.validate().map_err(stage_activity)?;
    let mask = binarize_activity(&energy, &activity_params);
    let mask = remove_short_segments(&mask, &activity_params);
    let half_trials = extract_half_trials(&mask, config.expected_half_trials)
        .map_err(stage_activity)?;
    log::info!(
        "activity: threshold {:.3}, {} walking bouts",
        threshold,
        half_trials.len()
    );

    // Stage: turns and modality labels per half-trial.
    let mut trial_reports = Vec::with_capacity(half_trials.len());
    let mut segments = Vec::new();
    for (i, ht) in half_trials.iter().enumerate() {
        let turns =
            detect_turns(&rec.kin.py, ht, &config.turns).map_err(Error::in_stage("turns"))?;
        let segs = label_modalities(ht, i, &turns, &config.turns)
            .map_err(Error::in_stage("modality"))?;
        log::info!(
            "half-trial {i} ({:?}): turns at {:.2} s and {:.2} s",
            ht.direction,
            turns[0] as f64 / fs,
            turns[1] as f64 / fs
        );
        trial_reports.push(HalfTrialReport {
            index: i,
            direction: ht.direction,
            start_s: ht.range.start_idx as f64 / fs,
            end_s: ht.range.end_idx as f64 / fs,
            turns_s: [turns[0] as f64 / fs, turns[1] as f64 / fs],
            segments: Vec::new(),
        });
        segments.extend(segs);
    }

    // Stage: heel strikes, per segment, inset by the safety margin.
    let mut per_segment_events: Vec<Vec<usize>> = Vec::with_capacity(segments.len());
    for seg in &segments {
        let inset = seg.inset_range(config.turns.safety_margin_samples);
        let slice = rec
            .kin
            .az
            .slice(inset.start_idx, inset.end_idx)
            .map_err(Error::in_stage("heel-strike"))?;
        let events =
            detect_heel_strikes(&slice, &config.heel_strike).map_err(Error::in_stage("heel-strike"))?;
        per_segment_events
            .push(events.indices().iter().map(|&k| inset.start_idx + k).collect());
    }
    log::info!(
        "heel strikes: {} across {} segments",
        per_segment_events.iter().map(Vec::len).sum::<usize>(),
        segments.len()
    );

    // Stage: EMG preprocessing (band-pass + notch, zero-phase), once for
    // the whole recording.
    let emg = preprocess_emg(&rec.emg, &config.emg).map_err(Error::in_stage("emg-preprocess"))?;

    // Stage: gait cycles per segment, on the common timeline.
    let mut cycles = Vec::new();
    let mut per_segment_cycle_counts = Vec::with_capacity(segments.len());
    for (si, seg) in segments.iter().enumerate() {
        let events = HsEvents::from_indices(per_segment_events[si].clone(), fs);
        let segment_cycle_list =
            segment_cycles(&emg, &events, seg.modality).map_err(Error::in_stage("cycles"))?;
        per_segment_cycle_counts.push(segment_cycle_list.len());
        for (ci, cycle) in segment_cycle_list.into_iter().enumerate() {
            cycles.push(CycleSlice {
                half_trial_index: seg.half_trial_index,
                segment_index: si % 3,
                cycle_index: ci,
                emg: cycle.emg,
            });
        }
    }

    // Stage: muscle profiles across all cycles. Profiles are computed on
    // the smooth activity envelope of each preprocessed channel — raw
    // filtered EMG is zero-mean and phase-incoherent across strides, so
    // averaging it directly would cancel the very activity of interest.
    let mut cycle_ranges = Vec::new();
    for events in &per_segment_events {
        for pair in events.windows(2) {
            cycle_ranges.push((pair[0], pair[1]));
        }
    }
    let mut profiles = Vec::new();
    if !cycle_ranges.is_empty() {
        for &name in &MUSCLES {
            let channel = emg
                .get(name)
                .ok_or_else(|| Error::Internal(format!("missing channel {name}")))
                .map_err(Error::in_stage("profiles"))?;
            let envelope = activity_envelope(channel, config.envelope_lowpass_hz)
                .map_err(Error::in_stage("profiles"))?;
            let mut normalized = Vec::with_capacity(cycle_ranges.len());
            for &(a, b) in &cycle_ranges {
                let cycle = envelope.slice(a, b).map_err(Error::in_stage("profiles"))?;
                let mut points = normalize_cycle(&cycle, config.cycle_points)
                    .map_err(Error::in_stage("profiles"))?;
                if let Some(scale) = config.amplitude_scale {
                    for v in &mut points {
                        *v /= scale;
                    }
                }
                normalized.push(points);
            }
            profiles
                .push(profile_stats(name, &normalized).map_err(Error::in_stage("profiles"))?);
        }
    }

    // Detection envelope over the whole z-channel, for the overview plot.
    let az_envelope =
        hs_envelope(&rec.kin.az, &config.heel_strike).map_err(Error::in_stage("heel-strike"))?;

    // Assemble the report.
    for (si, seg) in segments.iter().enumerate() {
        trial_reports[seg.half_trial_index].segments.push(SegmentReport {
            modality: seg.modality,
            start_s: seg.range.start_idx as f64 / fs,
            end_s: seg.range.end_idx as f64 / fs,
            heel_strikes_s: per_segment_events[si].iter().map(|&k| k as f64 / fs).collect(),
            n_cycles: per_segment_cycle_counts[si],
        });
    }
    let mut hs_global_indices: Vec<usize> =
        per_segment_events.iter().flatten().copied().collect();
    hs_global_indices.sort_unstable();
    let report = EventReport {
        sample_rate_hz: fs,
        duration_s: rec.emg.n_samples() as f64 / fs,
        config_json: config.to_json_compact(),
        half_trials: trial_reports,
        heel_strikes_s: hs_global_indices.iter().map(|&k| k as f64 / fs).collect(),
    };

    Ok(PipelineOutput { report, profiles, cycles, az_envelope, hs_global_indices })
}

/// Writes `profiles/<muscle>_profile.csv` files
/// (`percent_gait_cycle,mean,std`) under `out_dir` and returns their paths.
pub fn write_profile_csvs(out_dir: &Path, profiles: &[MuscleProfile]) -> Result<Vec<PathBuf>> {
    let profile_dir = out_dir.join("profiles");
    std::fs::create_dir_all(&profile_dir)?;
    let mut written = Vec::with_capacity(profiles.len());
    for profile in profiles {
        let path = profile_dir.join(format!("{}_profile.csv", profile.muscle));
        let mut text = String::from("percent_gait_cycle,mean,std\n");
        let denom = (profile.n_points - 1).max(1) as f64;
        for i in 0..profile.n_points {
            let _ = writeln!(
                text,
                "{:.4},{:.9},{:.9}",
                100.0 * i as f64 / denom,
                profile.mean[i],
                profile.std[i]
            );
        }
        std::fs::write(&path, text)?;
        written.push(path);
    }
    Ok(written)
}

/// Writes all pipeline artifacts under `out_dir`:
///
/// - `report.json` — the event report;
/// - `profiles/<muscle>_profile.csv` — `percent_gait_cycle,mean,std`;
/// - `cycles/trial<i>_seg<j>_cycle<k>.csv` — per-cycle preprocessed EMG;
/// - `plots/*.svg` — detection envelope and per-muscle profiles (when
///   `plots` is on).
///
/// Returns the written paths in a deterministic order.
pub fn write_artifacts(
    out_dir: &Path,
    output: &PipelineOutput,
    plots: bool,
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    std::fs::create_dir_all(out_dir)?;

    let report_path = out_dir.join("report.json");
    std::fs::write(&report_path, output.report.to_json_string() + "\n")?;
    written.push(report_path);

    written.extend(write_profile_csvs(out_dir, &output.profiles)?);

    let cycle_dir = out_dir.join("cycles");
    std::fs::create_dir_all(&cycle_dir)?;
    for cycle in &output.cycles {
        let path = cycle_dir.join(format!(
            "trial{}_seg{}_cycle{:03}.csv",
            cycle.half_trial_index, cycle.segment_index, cycle.cycle_index
        ));
        crate::io::write_emg_csv(&path, &cycle.emg)?;
        written.push(path);
    }

    if plots {
        let plot_dir = out_dir.join("plots");
        std::fs::create_dir_all(&plot_dir)?;
        let hs_times: Vec<f64> = output.report.heel_strikes_s.clone();
        let envelope_path = plot_dir.join("hs_envelope.svg");
        std::fs::write(
            &envelope_path,
            envelope_svg(&output.az_envelope, &hs_times, "Heel-strike detection envelope"),
        )?;
        written.push(envelope_path);
        for profile in &output.profiles {
            let path = plot_dir.join(format!("{}_profile.svg", profile.muscle));
            std::fs::write(&path, profile_svg(profile))?;
            written.push(path);
        }
    }
    Ok(written)
}
