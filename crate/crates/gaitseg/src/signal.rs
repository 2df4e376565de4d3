//! Core time-series container plus the resampling, smoothing, and
//! rectification primitives shared by every processing stage.

use crate::error::{Error, Result};

/// A uniformly sampled, finite-valued signal with a channel label.
///
/// Construction validates every sample, so downstream stages can assume
/// finite data. NaN or infinite samples in an input file are rejected at
/// the boundary instead of propagating silently through the filters.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    label: String,
    samples: Vec<f64>,
    sample_rate_hz: f64,
}

impl TimeSeries {
    /// Builds a series, rejecting non-finite samples and non-positive rates.
    pub fn new(label: impl Into<String>, samples: Vec<f64>, sample_rate_hz: f64) -> Result<Self> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::InvalidSampleRate(sample_rate_hz));
        }
        let label = label.into();
        if let Some(index) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample { label, index });
        }
        Ok(Self { label, samples, sample_rate_hz })
    }

    /// Internal constructor for values produced by the crate itself
    /// (filter outputs, envelopes), where finiteness is established by
    /// construction. Checked in debug builds.
    pub(crate) fn from_computed(label: impl Into<String>, samples: Vec<f64>, sample_rate_hz: f64) -> Self {
        debug_assert!(samples.iter().all(|v| v.is_finite()));
        debug_assert!(sample_rate_hz > 0.0);
        Self { label: label.into(), samples, sample_rate_hz }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    /// Time of sample `index` in seconds from the start of the series.
    pub fn time_at(&self, index: usize) -> f64 {
        index as f64 / self.sample_rate_hz
    }

    /// Copies the half-open sample range `[start, end)` into a new series.
    pub fn slice(&self, start: usize, end: usize) -> Result<TimeSeries> {
        if start >= end || end > self.samples.len() {
            return Err(Error::InvalidParams(format!(
                "slice [{start}, {end}) out of bounds for '{}' of length {}",
                self.label,
                self.samples.len()
            )));
        }
        Ok(Self {
            label: self.label.clone(),
            samples: self.samples[start..end].to_vec(),
            sample_rate_hz: self.sample_rate_hz,
        })
    }

    /// Replaces the label, keeping samples and rate.
    pub fn relabeled(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

/// Target length for [`resample`]. The new sample rate follows from the
/// length ratio, so specifying the length pins the grid exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResampleSpec {
    pub target_len: usize,
}

/// Half-window for [`moving_average`]: the filter averages over the
/// centered window `[i - half_window_n, i + half_window_n]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SmoothingSpec {
    pub half_window_n: usize,
}

/// Linearly interpolates `series` onto a uniform grid of `target_len`
/// samples spanning the same time range.
///
/// Output sample `i` sits at fractional input index
/// `x = i * (len - 1) / (target_len - 1)` and is the linear blend of the two
/// bracketing input samples: `y = y0 * (x1 - x) + y1 * (x - x0)` with
/// `x1 - x0 = 1`. The first and last samples are preserved exactly, and the
/// output rate is the input rate scaled by `target_len / len`.
pub fn linear_interpolate(series: &TimeSeries, target_len: usize) -> Result<TimeSeries> {
    if series.len() < 2 {
        return Err(Error::SeriesTooShort { needed: 1, got: series.len() });
    }
    if target_len < 2 {
        return Err(Error::InvalidParams(format!(
            "interpolation target length must be >= 2, got {target_len}"
        )));
    }
    let src = series.samples();
    let n = src.len();
    let step = (n - 1) as f64 / (target_len - 1) as f64;
    let mut out = Vec::with_capacity(target_len);
    for i in 0..target_len {
        if i == target_len - 1 {
            // Pin the endpoint instead of trusting i * step to land on n - 1.
            out.push(src[n - 1]);
            continue;
        }
        let x = i as f64 * step;
        let lo = x.floor() as usize;
        let hi = (lo + 1).min(n - 1);
        let frac = x - lo as f64;
        out.push(src[lo] * (1.0 - frac) + src[hi] * frac);
    }
    let rate = series.sample_rate_hz() * target_len as f64 / n as f64;
    Ok(TimeSeries::from_computed(series.label(), out, rate))
}

/// [`linear_interpolate`] driven by a [`ResampleSpec`].
pub fn resample(series: &TimeSeries, spec: &ResampleSpec) -> Result<TimeSeries> {
    linear_interpolate(series, spec.target_len)
}

/// Centered moving average over `2N + 1` samples.
///
/// At the edges the window shrinks symmetrically: sample `i` is averaged
/// over `[i - h, i + h]` with `h = min(N, i, len - 1 - i)`, so the output
/// stays unbiased near the boundaries. `N = 0` is the identity.
pub fn moving_average(series: &TimeSeries, spec: &SmoothingSpec) -> Result<TimeSeries> {
    let n = series.len();
    let window = 2 * spec.half_window_n + 1;
    if window > n {
        return Err(Error::WindowTooLarge { window, len: n });
    }
    let src = series.samples();
    let mut out = Vec::with_capacity(n);
    // Prefix sums keep this O(n) for the large windows the activity stage uses.
    let prefix = kahan_prefix_sums(src);
    for i in 0..n {
        let h = spec.half_window_n.min(i).min(n - 1 - i);
        if h == 0 {
            // Keep degenerate windows bit-exact (N = 0 is the identity).
            out.push(src[i]);
        } else {
            let (lo, hi) = (i - h, i + h);
            out.push((prefix[hi + 1] - prefix[lo]) / (hi - lo + 1) as f64);
        }
    }
    Ok(TimeSeries::from_computed(series.label(), out, series.sample_rate_hz()))
}

/// Half-wave rectification: negative samples clamp to zero.
pub fn half_wave_rectify(series: &TimeSeries) -> TimeSeries {
    let out = series.samples().iter().map(|&v| v.max(0.0)).collect();
    TimeSeries::from_computed(series.label(), out, series.sample_rate_hz())
}

/// Compensated (Kahan) cumulative sums, `n + 1` entries with
/// `prefix[i] = Σ values[..i]`.
///
/// Window sums are taken as prefix differences; plain running sums would
/// carry O(n·ε·total) error into every window, which at recording length
/// swamps the small rest-period energies the activity stage thresholds on.
/// Compensation keeps each prefix accurate to a few ε of the total.
pub(crate) fn kahan_prefix_sums(values: &[f64]) -> Vec<f64> {
    let mut prefix = Vec::with_capacity(values.len() + 1);
    prefix.push(0.0);
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for &v in values {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        prefix.push(sum);
    }
    prefix
}

/// Percentile `p` in [0, 100] by linear interpolation between order
/// statistics: rank `p/100 × (n − 1)` splits into the two bracketing sorted
/// values. `values` need not be sorted and must be non-empty and finite.
pub(crate) fn percentile(values: &[f64], p: f64) -> f64 {
    debug_assert!(!values.is_empty());
    debug_assert!((0.0..=100.0).contains(&p));
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rank = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = rank - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn ts(samples: Vec<f64>, rate: f64) -> TimeSeries {
        TimeSeries::new("test", samples, rate).unwrap()
    }

    /// Reference interpolation evaluated sample by sample from the
    /// two-point line equation, with no shortcuts shared with the
    /// production code.
    fn interp_oracle(src: &[f64], target_len: usize) -> Vec<f64> {
        let n = src.len();
        (0..target_len)
            .map(|i| {
                let x = i as f64 * (n - 1) as f64 / (target_len - 1) as f64;
                let x0 = (x.floor() as usize).min(n - 2);
                let x1 = x0 + 1;
                // y = (y0 * (x1 - x) + y1 * (x - x0)) / (x1 - x0)
                (src[x0] * (x1 as f64 - x) + src[x1] * (x - x0 as f64)) / 1.0
            })
            .collect()
    }

    #[test]
    fn construction_rejects_non_finite() {
        let err = TimeSeries::new("az", vec![0.0, f64::NAN], 100.0).unwrap_err();
        assert!(matches!(err, Error::NonFiniteSample { index: 1, .. }));
        let err = TimeSeries::new("az", vec![0.0], -5.0).unwrap_err();
        assert!(matches!(err, Error::InvalidSampleRate(_)));
    }

    #[test]
    fn interpolate_two_points_to_eleven() {
        let s = ts(vec![0.0, 10.0], 1.0);
        let out = linear_interpolate(&s, 11).unwrap();
        for (i, v) in out.samples().iter().enumerate() {
            assert!((v - i as f64).abs() < 1e-12, "sample {i} = {v}");
        }
    }

    #[test]
    fn interpolate_matches_line_equation_oracle() {
        let mut rng = SplitMix64::new(0xE0);
        for _ in 0..200 {
            let n = 2 + rng.below(50);
            let target = 2 + rng.below(120);
            let src: Vec<f64> = (0..n).map(|_| rng.uniform(-10.0, 10.0)).collect();
            let s = ts(src.clone(), 60.0);
            let out = linear_interpolate(&s, target).unwrap();
            let want = interp_oracle(&src, target);
            for (got, want) in out.samples().iter().zip(&want) {
                assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
            }
        }
    }

    #[test]
    fn interpolate_is_exact_on_affine_signals() {
        let mut rng = SplitMix64::new(0xE1);
        for _ in 0..100 {
            let a = rng.uniform(-5.0, 5.0);
            let b = rng.uniform(-50.0, 50.0);
            let n = 2 + rng.below(40);
            let target = 2 + rng.below(200);
            let src: Vec<f64> = (0..n).map(|i| a * i as f64 + b).collect();
            let out = linear_interpolate(&ts(src, 100.0), target).unwrap();
            let scale = (n - 1) as f64 / (target - 1) as f64;
            for (i, v) in out.samples().iter().enumerate() {
                let want = a * (i as f64 * scale) + b;
                assert!((v - want).abs() <= 1e-12 * (1.0 + want.abs()));
            }
        }
    }

    #[test]
    fn interpolate_preserves_endpoints_and_scales_rate() {
        let s = ts(vec![3.5, -2.0, 7.25, 0.0, 1.0], 60.0);
        let out = linear_interpolate(&s, 1000).unwrap();
        assert_eq!(out.samples()[0], 3.5);
        assert_eq!(out.samples()[999], 1.0);
        assert!((out.sample_rate_hz() - 60.0 * 1000.0 / 5.0).abs() < 1e-12);
    }

    #[test]
    fn interpolate_rejects_degenerate_inputs() {
        assert!(matches!(
            linear_interpolate(&ts(vec![1.0], 10.0), 5),
            Err(Error::SeriesTooShort { .. })
        ));
        assert!(matches!(
            linear_interpolate(&ts(vec![1.0, 2.0], 10.0), 1),
            Err(Error::InvalidParams(_))
        ));
    }

    /// Direct-sum reference for the moving average, shrinking the window
    /// symmetrically at the edges.
    fn moving_average_oracle(src: &[f64], half: usize) -> Vec<f64> {
        let n = src.len();
        (0..n)
            .map(|i| {
                let h = half.min(i).min(n - 1 - i);
                let w = &src[i - h..=i + h];
                w.iter().sum::<f64>() / w.len() as f64
            })
            .collect()
    }

    #[test]
    fn moving_average_small_case() {
        // Symmetric shrink: the edge windows collapse to the single sample.
        let s = ts(vec![1.0, 2.0, 3.0], 10.0);
        let out = moving_average(&s, &SmoothingSpec { half_window_n: 1 }).unwrap();
        assert_eq!(out.samples(), &[1.0, 2.0, 3.0]);
        let s = ts(vec![4.0, 0.0, 2.0, 6.0, 8.0], 10.0);
        let out = moving_average(&s, &SmoothingSpec { half_window_n: 1 }).unwrap();
        assert_eq!(out.samples(), &[4.0, 2.0, 8.0 / 3.0, 16.0 / 3.0, 8.0]);
    }

    #[test]
    fn moving_average_matches_direct_sum_oracle() {
        let mut rng = SplitMix64::new(0xE2);
        for _ in 0..300 {
            let n = 1 + rng.below(80);
            let src: Vec<f64> = (0..n).map(|_| rng.uniform(-4.0, 4.0)).collect();
            let max_half = (n - 1) / 2;
            let half = rng.below(max_half + 1);
            let out = moving_average(&ts(src.clone(), 10.0), &SmoothingSpec { half_window_n: half }).unwrap();
            let want = moving_average_oracle(&src, half);
            for (got, want) in out.samples().iter().zip(&want) {
                assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
            }
        }
    }

    #[test]
    fn moving_average_identity_and_bounds() {
        let mut rng = SplitMix64::new(0xE3);
        let src: Vec<f64> = (0..64).map(|_| rng.uniform(-3.0, 9.0)).collect();
        let s = ts(src.clone(), 10.0);
        let id = moving_average(&s, &SmoothingSpec { half_window_n: 0 }).unwrap();
        assert_eq!(id.samples(), s.samples());
        let lo = src.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = src.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sm = moving_average(&s, &SmoothingSpec { half_window_n: 7 }).unwrap();
        for &v in sm.samples() {
            assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
        }
    }

    #[test]
    fn moving_average_constant_is_constant() {
        let s = ts(vec![2.5; 40], 10.0);
        let out = moving_average(&s, &SmoothingSpec { half_window_n: 5 }).unwrap();
        for &v in out.samples() {
            assert!((v - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn moving_average_rejects_oversized_window() {
        let s = ts(vec![1.0, 2.0, 3.0], 10.0);
        assert!(matches!(
            moving_average(&s, &SmoothingSpec { half_window_n: 2 }),
            Err(Error::WindowTooLarge { window: 5, len: 3 })
        ));
    }

    #[test]
    fn rectify_clamps_negatives_and_is_idempotent() {
        let s = ts(vec![-1.0, 2.0, -0.5, 0.0], 10.0);
        let r = half_wave_rectify(&s);
        assert_eq!(r.samples(), &[0.0, 2.0, 0.0, 0.0]);
        let rr = half_wave_rectify(&r);
        assert_eq!(rr.samples(), r.samples());
        assert!(r.samples().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn slice_copies_range() {
        let s = ts(vec![0.0, 1.0, 2.0, 3.0], 10.0);
        let cut = s.slice(1, 3).unwrap();
        assert_eq!(cut.samples(), &[1.0, 2.0]);
        assert!(s.slice(3, 3).is_err());
        assert!(s.slice(2, 9).is_err());
    }

    #[test]
    fn percentile_interpolates_between_order_statistics() {
        // rank = 0.95 × 3 = 2.85 → 3 + 0.85 × (4 − 3).
        assert!((percentile(&[4.0, 2.0, 1.0, 3.0], 95.0) - 3.85).abs() < 1e-12);
        let v: Vec<f64> = (0..10).map(|i| i as f64).collect();
        assert!((percentile(&v, 10.0) - 0.9).abs() < 1e-12);
        assert_eq!(percentile(&v, 0.0), 0.0);
        assert_eq!(percentile(&v, 100.0), 9.0);
        assert_eq!(percentile(&[7.0], 50.0), 7.0);
    }

    #[test]
    fn kahan_prefix_sums_keep_small_windows_accurate_after_a_large_total() {
        // Mirrors the activity stage: loud walking squares followed by a
        // quiet rest. A rest-window sum must stay accurate relative to its
        // own tiny value even though the prefix total is six orders larger.
        let n = 200_000;
        let src: Vec<f64> = (0..n).map(|i| if i < 100_000 { 25.0 } else { 0.0025 }).collect();
        let prefix = kahan_prefix_sums(&src);
        let (a, b) = (150_000, 151_000);
        let got = prefix[b] - prefix[a];
        let want: f64 = src[a..b].iter().sum();
        assert!((got - want).abs() < 1e-8, "{got} vs {want}");
        assert_eq!(prefix.len(), n + 1);
        assert_eq!(prefix[0], 0.0);
    }
}
