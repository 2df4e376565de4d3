//! Turn detection and walking-modality labeling within a half-trial.
//!
//! The course chains a ramp, a level-ground stretch, and a staircase, with
//! a sharp turn at each transition. The turns appear as extrema of the
//! y-axis position; the two most prominent extrema split a half-trial into
//! its three modality segments, labeled by traversal direction.

use serde::{Deserialize, Serialize};

use crate::activity::{Direction, HalfTrial, SegmentRange};
use crate::error::{Error, Result};
use crate::signal::{moving_average, SmoothingSpec, TimeSeries};

/// The five walking modalities of the course.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Modality {
    /// Ramp ascent.
    RA,
    /// Ramp descent.
    RD,
    /// Stair ascent.
    SA,
    /// Stair descent.
    SD,
    /// Level-ground walking.
    LGW,
}

impl std::fmt::Display for Modality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Modality::RA => "RA",
            Modality::RD => "RD",
            Modality::SA => "SA",
            Modality::SD => "SD",
            Modality::LGW => "LGW",
        };
        f.write_str(s)
    }
}

/// One labeled stretch of a half-trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModalitySegment {
    pub range: SegmentRange,
    pub modality: Modality,
    pub half_trial_index: usize,
}

impl ModalitySegment {
    /// The range to actually slice signals from: both boundaries pulled in
    /// by `margin` samples, so turn transients stay out of downstream
    /// detection. [`label_modalities`] guarantees the inset is non-empty.
    pub fn inset_range(&self, margin_samples: usize) -> SegmentRange {
        SegmentRange {
            start_idx: self.range.start_idx + margin_samples,
            end_idx: self.range.end_idx - margin_samples,
        }
    }
}

/// Tuning for turn detection and segment extraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnParams {
    /// Half-window of the position moving average (samples).
    pub smoothing_n: usize,
    /// Minimum spacing between accepted turns (samples).
    pub min_turn_separation_samples: usize,
    /// Inset applied to each segment boundary when slicing signals.
    pub safety_margin_samples: usize,
}

impl Default for TurnParams {
    fn default() -> Self {
        Self {
            smoothing_n: 250,
            min_turn_separation_samples: 3000,
            safety_margin_samples: 2000,
        }
    }
}

impl TurnParams {
    pub fn validate(&self) -> Result<()> {
        if self.min_turn_separation_samples == 0 {
            return Err(Error::InvalidParams("turn separation must be >= 1 sample".into()));
        }
        Ok(())
    }
}

/// A candidate extremum of the smoothed position.
struct Extremum {
    index: usize,
    prominence: f64,
}

/// Local extrema of `y` (both polarities), each scored by prominence.
///
/// For a maximum, prominence is its height above the higher of the two
/// flanking valleys — the valley floors on either side before the signal
/// exceeds the peak again (or the range boundary). Minima are scored on the
/// negated signal.
fn scored_extrema(y: &[f64]) -> Vec<Extremum> {
    let mut out = Vec::new();
    for sign in [1.0, -1.0] {
        let v: Vec<f64> = y.iter().map(|&s| sign * s).collect();
        for i in 1..v.len().saturating_sub(1) {
            // First index of a peak (plateaus count once).
            if v[i] > v[i - 1] && v[i] >= v[i + 1] {
                let left = v[..i].iter().rev().take_while(|&&s| s <= v[i]).fold(f64::INFINITY, |m, &s| m.min(s));
                let right = v[i + 1..].iter().take_while(|&&s| s <= v[i]).fold(f64::INFINITY, |m, &s| m.min(s));
                let base = left.max(right);
                let prominence = if base.is_finite() { v[i] - base } else { 0.0 };
                out.push(Extremum { index: i, prominence });
            }
        }
    }
    out
}

/// Finds the two course turns inside `trial` as the most prominent extrema
/// of the smoothed y-position, subject to a minimum mutual separation.
/// Returned indices are global (into `y_position`) and sorted ascending.
pub fn detect_turns(
    y_position: &TimeSeries,
    trial: &HalfTrial,
    params: &TurnParams,
) -> Result<Vec<usize>> {
    params.validate()?;
    let range = trial.range;
    if range.end_idx > y_position.len() {
        return Err(Error::InvalidParams(format!(
            "half-trial range [{}, {}) exceeds position series length {}",
            range.start_idx,
            range.end_idx,
            y_position.len()
        )));
    }
    let seg = y_position.slice(range.start_idx, range.end_idx)?;
    let smoothed = if params.smoothing_n == 0 {
        seg
    } else {
        // Clamp the smoother for very short trials rather than erroring:
        // turn detection should still run, just less smoothed.
        let max_half = (seg.len() - 1) / 2;
        moving_average(&seg, &SmoothingSpec { half_window_n: params.smoothing_n.min(max_half) })?
    };

    let mut candidates = scored_extrema(smoothed.samples());
    // Most prominent first; ties go to the earlier index.
    candidates.sort_by(|a, b| {
        b.prominence
            .partial_cmp(&a.prominence)
            .unwrap()
            .then_with(|| a.index.cmp(&b.index))
    });
    let mut accepted: Vec<usize> = Vec::new();
    for c in &candidates {
        if accepted.len() == 2 {
            break;
        }
        let far_enough = accepted
            .iter()
            .all(|&a| a.abs_diff(c.index) >= params.min_turn_separation_samples);
        if far_enough {
            accepted.push(c.index);
        }
    }
    if accepted.len() < 2 {
        return Err(Error::TurnCountMismatch { found: accepted.len() });
    }
    accepted.sort_unstable();
    Ok(accepted.into_iter().map(|i| i + range.start_idx).collect())
}

/// Splits `trial` at the two turns into three labeled segments:
/// `[start, turn1)`, `[turn1, turn2)`, `[turn2, end)`. Forward trials read
/// RD, LGW, SA; Reverse trials read SD, LGW, RA. The three ranges partition
/// the trial exactly — the safety margin is applied later, when slicing
/// signals ([`ModalitySegment::inset_range`]), so reports keep the
/// partition.
pub fn label_modalities(
    trial: &HalfTrial,
    half_trial_index: usize,
    turns: &[usize],
    params: &TurnParams,
) -> Result<Vec<ModalitySegment>> {
    if turns.len() != 2 {
        return Err(Error::TurnCountMismatch { found: turns.len() });
    }
    let (t1, t2) = (turns[0], turns[1]);
    let r = trial.range;
    if !(r.start_idx < t1 && t1 < t2 && t2 < r.end_idx) {
        return Err(Error::InvalidParams(format!(
            "turns {t1}, {t2} must lie strictly inside the half-trial [{}, {})",
            r.start_idx, r.end_idx
        )));
    }
    let labels = match trial.direction {
        Direction::Forward => [Modality::RD, Modality::LGW, Modality::SA],
        Direction::Reverse => [Modality::SD, Modality::LGW, Modality::RA],
    };
    let bounds = [r.start_idx, t1, t2, r.end_idx];
    let mut segments = Vec::with_capacity(3);
    for (k, &modality) in labels.iter().enumerate() {
        let (start, end) = (bounds[k], bounds[k + 1]);
        if end - start <= 2 * params.safety_margin_samples {
            return Err(Error::SegmentTooShort {
                start,
                end,
                len: end - start,
                margin: params.safety_margin_samples,
            });
        }
        segments.push(ModalitySegment {
            range: SegmentRange { start_idx: start, end_idx: end },
            modality,
            half_trial_index,
        });
    }
    Ok(segments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    const FS: f64 = 1000.0;

    fn trial(start: usize, end: usize, direction: Direction) -> HalfTrial {
        HalfTrial { range: SegmentRange { start_idx: start, end_idx: end }, direction }
    }

    /// Triangle-wave y: rises to a vertex, falls to a second vertex, rises.
    fn triangle(n: usize, v1: usize, v2: usize) -> TimeSeries {
        let mut y = Vec::with_capacity(n);
        for i in 0..n {
            let val = if i <= v1 {
                i as f64 / v1 as f64 * 10.0
            } else if i <= v2 {
                10.0 - (i - v1) as f64 / (v2 - v1) as f64 * 8.0
            } else {
                2.0 + (i - v2) as f64 / (n - v2) as f64 * 6.0
            };
            y.push(val);
        }
        TimeSeries::new("py", y, FS).unwrap()
    }

    #[test]
    fn triangle_vertices_are_detected_as_turns() {
        let (n, v1, v2) = (30_000, 9000, 21_000);
        let y = triangle(n, v1, v2);
        let t = trial(0, n, Direction::Forward);
        let params = TurnParams::default();
        let turns = detect_turns(&y, &t, &params).unwrap();
        assert_eq!(turns.len(), 2);
        assert!(turns[0].abs_diff(v1) <= params.smoothing_n, "turn {} vs vertex {v1}", turns[0]);
        assert!(turns[1].abs_diff(v2) <= params.smoothing_n, "turn {} vs vertex {v2}", turns[1]);
        assert!(turns[0] < turns[1]);
    }

    #[test]
    fn turn_indices_are_global_when_trial_is_offset() {
        let (n, v1, v2) = (30_000, 9000, 21_000);
        let mut y = vec![0.0; 5000];
        y.extend_from_slice(triangle(n, v1, v2).samples());
        let series = TimeSeries::new("py", y, FS).unwrap();
        let t = trial(5000, 5000 + n, Direction::Forward);
        let turns = detect_turns(&series, &t, &TurnParams::default()).unwrap();
        assert!(turns[0].abs_diff(5000 + v1) <= 250);
        assert!(turns[1].abs_diff(5000 + v2) <= 250);
    }

    #[test]
    fn monotone_position_has_no_turns() {
        let y: Vec<f64> = (0..20_000).map(|i| i as f64 * 1e-3).collect();
        let series = TimeSeries::new("py", y, FS).unwrap();
        let t = trial(0, 20_000, Direction::Forward);
        let err = detect_turns(&series, &t, &TurnParams::default()).unwrap_err();
        assert!(matches!(err, Error::TurnCountMismatch { found: 0 }));
    }

    #[test]
    fn small_wiggles_lose_to_prominent_turns() {
        // Two large vertices plus many low-prominence ripples.
        let (n, v1, v2) = (30_000, 9000, 21_000);
        let base = triangle(n, v1, v2);
        let mut rng = SplitMix64::new(0xB0);
        let wiggly: Vec<f64> = base
            .samples()
            .iter()
            .enumerate()
            .map(|(i, &v)| v + 0.15 * (i as f64 / 300.0).sin() + rng.gauss(0.0, 0.01))
            .collect();
        let series = TimeSeries::new("py", wiggly, FS).unwrap();
        let t = trial(0, n, Direction::Forward);
        let turns = detect_turns(&series, &t, &TurnParams::default()).unwrap();
        assert!(turns[0].abs_diff(v1) <= 500, "turn {} vs vertex {v1}", turns[0]);
        assert!(turns[1].abs_diff(v2) <= 500, "turn {} vs vertex {v2}", turns[1]);
    }

    #[test]
    fn separation_constraint_overrides_raw_prominence_order() {
        // A tight cluster of high-prominence extrema (two sharp bumps and
        // the notch between them) all outranks the distant dip, but the
        // separation rule admits only one of the cluster, forcing the dip
        // in as the second turn.
        let mut y = vec![0.0; 20_000];
        for (i, v) in y.iter_mut().enumerate() {
            let d1 = (i as f64 - 5000.0) / 150.0;
            let d2 = (i as f64 - 5800.0) / 150.0;
            let d3 = (i as f64 - 15_000.0) / 2000.0;
            *v = 10.0 * (-d1 * d1).exp() + 9.9 * (-d2 * d2).exp() - 6.0 * (-d3 * d3).exp();
        }
        let series = TimeSeries::new("py", y, FS).unwrap();
        let t = trial(0, 20_000, Direction::Forward);
        let params = TurnParams { smoothing_n: 50, ..TurnParams::default() };
        let turns = detect_turns(&series, &t, &params).unwrap();
        assert!((4400..=6400).contains(&turns[0]), "first turn at {}", turns[0]);
        assert!(turns[1].abs_diff(15_000) <= 600, "second turn at {}", turns[1]);
    }

    #[test]
    fn forward_and_reverse_label_sequences() {
        let t_fwd = trial(0, 30_000, Direction::Forward);
        let t_rev = trial(0, 30_000, Direction::Reverse);
        let turns = vec![9000, 21_000];
        let params = TurnParams::default();
        let fwd = label_modalities(&t_fwd, 0, &turns, &params).unwrap();
        let rev = label_modalities(&t_rev, 1, &turns, &params).unwrap();
        let fwd_labels: Vec<Modality> = fwd.iter().map(|s| s.modality).collect();
        let rev_labels: Vec<Modality> = rev.iter().map(|s| s.modality).collect();
        assert_eq!(fwd_labels, vec![Modality::RD, Modality::LGW, Modality::SA]);
        assert_eq!(rev_labels, vec![Modality::SD, Modality::LGW, Modality::RA]);
        assert!(fwd.iter().all(|s| s.half_trial_index == 0));
        assert!(rev.iter().all(|s| s.half_trial_index == 1));

        // Course geometry: the Forward sequence reversed is the up/down
        // mirror of the Reverse sequence.
        let mirrored: Vec<Modality> = rev_labels
            .iter()
            .map(|m| match m {
                Modality::SD => Modality::SA,
                Modality::SA => Modality::SD,
                Modality::RD => Modality::RA,
                Modality::RA => Modality::RD,
                Modality::LGW => Modality::LGW,
            })
            .collect();
        let mut fwd_rev = fwd_labels.clone();
        fwd_rev.reverse();
        assert_eq!(fwd_rev, mirrored);
    }

    #[test]
    fn segments_partition_the_trial_exactly() {
        let t = trial(1000, 31_000, Direction::Forward);
        let segs = label_modalities(&t, 0, &[10_000, 22_000], &TurnParams::default()).unwrap();
        assert_eq!(segs.len(), 3);
        assert_eq!(segs[0].range.start_idx, 1000);
        assert_eq!(segs[2].range.end_idx, 31_000);
        for pair in segs.windows(2) {
            assert_eq!(pair[0].range.end_idx, pair[1].range.start_idx);
        }
        // Margins shrink only the slicing view.
        let inset = segs[1].inset_range(2000);
        assert_eq!(inset.start_idx, 12_000);
        assert_eq!(inset.end_idx, 20_000);
    }

    #[test]
    fn labels_depend_only_on_direction_not_samples() {
        // Same trial/turn geometry, arbitrary position values: labels fixed.
        let t = trial(0, 30_000, Direction::Reverse);
        let turns = vec![9000, 21_000];
        let a = label_modalities(&t, 3, &turns, &TurnParams::default()).unwrap();
        let b = label_modalities(&t, 3, &turns, &TurnParams::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn wrong_turn_count_is_rejected() {
        let t = trial(0, 30_000, Direction::Forward);
        let err = label_modalities(&t, 0, &[9000], &TurnParams::default()).unwrap_err();
        assert!(matches!(err, Error::TurnCountMismatch { found: 1 }));
        let err = label_modalities(&t, 0, &[], &TurnParams::default()).unwrap_err();
        assert!(matches!(err, Error::TurnCountMismatch { found: 0 }));
    }

    #[test]
    fn segment_shorter_than_twice_the_margin_is_rejected() {
        let t = trial(0, 30_000, Direction::Forward);
        // Middle segment spans 3500 < 2 × 2000.
        let err = label_modalities(&t, 0, &[9000, 12_500], &TurnParams::default()).unwrap_err();
        assert!(matches!(err, Error::SegmentTooShort { len: 3500, margin: 2000, .. }));
    }

    #[test]
    fn turns_outside_the_trial_are_rejected() {
        let t = trial(5000, 30_000, Direction::Forward);
        assert!(label_modalities(&t, 0, &[4000, 20_000], &TurnParams::default()).is_err());
        assert!(label_modalities(&t, 0, &[10_000, 30_000], &TurnParams::default()).is_err());
        assert!(label_modalities(&t, 0, &[20_000, 10_000], &TurnParams::default()).is_err());
    }
}
