//! IIR filter design and application.
//!
//! Butterworth low/high/band-pass filters are designed the classical way:
//! analog prototype poles → frequency pre-warp → band transform → bilinear
//! transform → second-order sections. A powerline notch comes from the
//! standard audio-cookbook biquad. Application is either causal ([`filt`])
//! or zero-phase forward-backward ([`filtfilt`]).
//!
//! Realization is a cascade of second-order sections with a single overall
//! gain: high-order designs (the "4th order" band-pass expands to 8 poles)
//! are numerically fragile as one direct-form polynomial, and sections keep
//! every pole pair separately conditioned.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::signal::TimeSeries;

/// A named filter design request. Cutoffs are in Hz at the given sample
/// rate and must lie strictly inside (0, sample_rate_hz / 2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FilterSpec {
    LowPass { cutoff_hz: f64, order: usize, sample_rate_hz: f64 },
    HighPass { cutoff_hz: f64, order: usize, sample_rate_hz: f64 },
    BandPass { low_cutoff_hz: f64, high_cutoff_hz: f64, order: usize, sample_rate_hz: f64 },
    Notch { center_hz: f64, q: f64, sample_rate_hz: f64 },
}

/// One second-order section `(b0 + b1 z⁻¹ + b2 z⁻²) / (1 + a1 z⁻¹ + a2 z⁻²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiquadSection {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl BiquadSection {
    /// Both poles strictly inside the unit circle (Schur–Cohn triangle test).
    pub fn is_stable(&self) -> bool {
        self.a2.abs() < 1.0 && self.a1.abs() < 1.0 + self.a2
    }
}

/// A fixed-order cascade of biquads with one overall gain factor.
#[derive(Debug, Clone, PartialEq)]
pub struct BiquadCascade {
    sections: Vec<BiquadSection>,
    overall_gain: f64,
}

impl BiquadCascade {
    /// Validates stability of every section.
    pub fn new(sections: Vec<BiquadSection>, overall_gain: f64) -> Result<Self> {
        if let Some(s) = sections.iter().find(|s| !s.is_stable()) {
            return Err(Error::InvalidParams(format!(
                "unstable biquad section (a1 = {}, a2 = {})",
                s.a1, s.a2
            )));
        }
        if !overall_gain.is_finite() {
            return Err(Error::InvalidParams(format!("non-finite cascade gain {overall_gain}")));
        }
        Ok(Self { sections, overall_gain })
    }

    /// The pass-through cascade: a single unit section with unit gain.
    pub fn identity() -> Self {
        Self {
            sections: vec![BiquadSection { b0: 1.0, b1: 0.0, b2: 0.0, a1: 0.0, a2: 0.0 }],
            overall_gain: 1.0,
        }
    }

    pub fn sections(&self) -> &[BiquadSection] {
        &self.sections
    }

    pub fn overall_gain(&self) -> f64 {
        self.overall_gain
    }

    pub fn is_stable(&self) -> bool {
        self.sections.iter().all(BiquadSection::is_stable)
    }

    /// Complex frequency response at `freq_hz` for a cascade designed at
    /// `sample_rate_hz`, evaluated at z = e^{jωT}.
    pub fn response_at(&self, freq_hz: f64, sample_rate_hz: f64) -> Complex64 {
        let w = 2.0 * PI * freq_hz / sample_rate_hz;
        let z1 = Complex64::new(0.0, -w).exp(); // z⁻¹
        let z2 = z1 * z1;
        let mut h = Complex64::new(self.overall_gain, 0.0);
        for s in &self.sections {
            h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
        }
        h
    }

    pub fn magnitude_at(&self, freq_hz: f64, sample_rate_hz: f64) -> f64 {
        self.response_at(freq_hz, sample_rate_hz).norm()
    }

    pub fn magnitude_db_at(&self, freq_hz: f64, sample_rate_hz: f64) -> f64 {
        20.0 * self.magnitude_at(freq_hz, sample_rate_hz).log10()
    }

    /// JSON dump with 17 significant digits per coefficient, enough to
    /// reconstruct each f64 exactly: `{"sections": [[b0,b1,b2,a1,a2],..],
    /// "overall_gain": g}`.
    pub fn dump_json(&self) -> String {
        let fmt = |v: f64| format!("{v:.16e}");
        let rows: Vec<String> = self
            .sections
            .iter()
            .map(|s| {
                format!(
                    "[{}, {}, {}, {}, {}]",
                    fmt(s.b0),
                    fmt(s.b1),
                    fmt(s.b2),
                    fmt(s.a1),
                    fmt(s.a2)
                )
            })
            .collect();
        format!(
            "{{\"sections\": [{}], \"overall_gain\": {}}}",
            rows.join(", "),
            fmt(self.overall_gain)
        )
    }
}

/// Poles of the normalized (1 rad/s) analog Butterworth prototype of the
/// given order: equally spaced on the left half of the unit circle.
fn prototype_poles(order: usize) -> Vec<Complex64> {
    (0..order)
        .map(|k| {
            let m = (2 * k) as f64 - (order as f64 - 1.0); // -n+1, -n+3, ..., n-1
            -(Complex64::new(0.0, PI * m / (2.0 * order as f64))).exp()
        })
        .collect()
}

fn check_cutoff(cutoff_hz: f64, sample_rate_hz: f64) -> Result<()> {
    let nyquist_hz = sample_rate_hz / 2.0;
    if !(cutoff_hz.is_finite() && cutoff_hz > 0.0 && cutoff_hz < nyquist_hz) {
        return Err(Error::InvalidCutoff { cutoff_hz, nyquist_hz });
    }
    Ok(())
}

/// The three Butterworth shapes, reduced to what the section pairing needs.
enum Shape {
    Low,
    High,
    Band,
}

/// Designs a Butterworth low/high/band-pass cascade.
///
/// Cutoffs are pre-warped so the bilinear transform lands the −3.01 dB
/// points exactly on the requested frequencies. A band-pass of prototype
/// order `n` doubles to `2n` poles (`n` sections).
pub fn design_butterworth(spec: &FilterSpec) -> Result<BiquadCascade> {
    let (shape, cutoffs, order, fs) = match *spec {
        FilterSpec::LowPass { cutoff_hz, order, sample_rate_hz } => {
            (Shape::Low, vec![cutoff_hz], order, sample_rate_hz)
        }
        FilterSpec::HighPass { cutoff_hz, order, sample_rate_hz } => {
            (Shape::High, vec![cutoff_hz], order, sample_rate_hz)
        }
        FilterSpec::BandPass { low_cutoff_hz, high_cutoff_hz, order, sample_rate_hz } => {
            (Shape::Band, vec![low_cutoff_hz, high_cutoff_hz], order, sample_rate_hz)
        }
        FilterSpec::Notch { .. } => {
            return Err(Error::InvalidParams(
                "design_butterworth expects a LowPass, HighPass, or BandPass spec".into(),
            ))
        }
    };
    if order == 0 {
        return Err(Error::InvalidParams("Butterworth order must be >= 1".into()));
    }
    if !(fs.is_finite() && fs > 0.0) {
        return Err(Error::InvalidSampleRate(fs));
    }
    for &c in &cutoffs {
        check_cutoff(c, fs)?;
    }
    if let Shape::Band = shape {
        if cutoffs[0] >= cutoffs[1] {
            return Err(Error::InvalidParams(format!(
                "band-pass cutoffs must be ordered: {} Hz >= {} Hz",
                cutoffs[0], cutoffs[1]
            )));
        }
    }

    // Normalize to the bilinear design grid (internal rate 2 Hz) and
    // pre-warp: w_analog = 2·fs_i·tan(π·f/fs), with f as a Nyquist fraction.
    let fs_i = 2.0;
    let warped: Vec<f64> =
        cutoffs.iter().map(|&c| 2.0 * fs_i * (PI * (c / (fs / 2.0)) / fs_i).tan()).collect();

    let proto = prototype_poles(order);
    // Analog poles plus gain; finite analog zeros are all at s = 0 and only
    // their count matters (Butterworth prototypes have no finite zeros).
    let (analog_poles, n_zeros_at_origin, k_analog) = match shape {
        Shape::Low => {
            let wo = warped[0];
            let p: Vec<Complex64> = proto.iter().map(|&q| q * wo).collect();
            (p, 0usize, wo.powi(order as i32))
        }
        Shape::High => {
            let wo = warped[0];
            let p: Vec<Complex64> = proto.iter().map(|&q| wo / q).collect();
            let prod_neg: Complex64 = proto.iter().map(|&q| -q).product();
            (p, order, (Complex64::new(1.0, 0.0) / prod_neg).re)
        }
        Shape::Band => {
            let bw = warped[1] - warped[0];
            let wo = (warped[0] * warped[1]).sqrt();
            let mut p = Vec::with_capacity(2 * order);
            for &q in &proto {
                let plp = q * (bw / 2.0);
                let disc = (plp * plp - wo * wo).sqrt();
                p.push(plp + disc);
                p.push(plp - disc);
            }
            (p, order, bw.powi(order as i32))
        }
    };

    // Bilinear transform at the internal rate: z = (2·fs_i + s) / (2·fs_i − s).
    let fs2 = 2.0 * fs_i;
    let digital_poles: Vec<Complex64> =
        analog_poles.iter().map(|&p| (fs2 + p) / (fs2 - p)).collect();
    // Gain: k · Π(fs2 − z) / Π(fs2 − p), with the analog zeros all at 0.
    let denom: Complex64 = analog_poles.iter().map(|&p| fs2 - p).product();
    let numer = fs2.powi(n_zeros_at_origin as i32);
    let k_digital = k_analog * (numer / denom).re;

    // Digital zeros: each analog zero at the origin lands on z = +1, each
    // zero at infinity (degree deficit) lands on z = −1.
    let n_plus = n_zeros_at_origin;
    let n_minus = digital_poles.len() - n_zeros_at_origin;

    pair_into_sections(&digital_poles, n_plus, n_minus, k_digital)
}

/// Pairs conjugate pole pairs (and leftover real poles) with the unit-circle
/// zeros into monic sections, deterministically ordered with the poles
/// closest to the unit circle last.
fn pair_into_sections(
    poles: &[Complex64],
    mut zeros_plus: usize,
    mut zeros_minus: usize,
    gain: f64,
) -> Result<BiquadCascade> {
    const TOL: f64 = 1e-8;
    let mut upper: Vec<Complex64> = poles.iter().copied().filter(|p| p.im > TOL).collect();
    let lower = poles.iter().filter(|p| p.im < -TOL).count();
    let mut real: Vec<f64> =
        poles.iter().filter(|p| p.im.abs() <= TOL).map(|p| p.re).collect();
    if upper.len() != lower {
        return Err(Error::Internal(format!(
            "pole set is not conjugate-symmetric: {} upper vs {} lower",
            upper.len(),
            lower
        )));
    }
    upper.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    real.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // Draw a numerator for a two-pole section from the remaining zero pool.
    let mut take_pair = || -> (f64, f64, f64) {
        if zeros_plus >= 1 && zeros_minus >= 1 {
            zeros_plus -= 1;
            zeros_minus -= 1;
            (1.0, 0.0, -1.0) // (z − 1)(z + 1)
        } else if zeros_minus >= 2 {
            zeros_minus -= 2;
            (1.0, 2.0, 1.0) // (z + 1)²
        } else {
            zeros_plus -= 2;
            (1.0, -2.0, 1.0) // (z − 1)²
        }
    };

    // radius is tracked so sections can be ordered fragile-last.
    let mut sections: Vec<(f64, BiquadSection)> = Vec::new();
    for p in &upper {
        let (b0, b1, b2) = take_pair();
        let sec = BiquadSection { b0, b1, b2, a1: -2.0 * p.re, a2: p.norm_sqr() };
        sections.push((p.norm(), sec));
    }
    let mut i = 0;
    while i + 1 < real.len() {
        let (r1, r2) = (real[i], real[i + 1]);
        let (b0, b1, b2) = take_pair();
        let sec = BiquadSection { b0, b1, b2, a1: -(r1 + r2), a2: r1 * r2 };
        sections.push((r1.abs().max(r2.abs()), sec));
        i += 2;
    }
    if i < real.len() {
        // Odd-order leftover: first-order section with a single zero.
        let r = real[i];
        let b = if zeros_minus >= 1 { (1.0, 1.0, 0.0) } else { (1.0, -1.0, 0.0) };
        sections.push((r.abs(), BiquadSection { b0: b.0, b1: b.1, b2: b.2, a1: -r, a2: 0.0 }));
    }
    sections.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    BiquadCascade::new(sections.into_iter().map(|(_, s)| s).collect(), gain)
}

/// Designs the powerline notch: a single biquad with zeros exactly on the
/// unit circle at ±f0 (audio-cookbook form), unity gain at DC and Nyquist,
/// and −3 dB bandwidth ≈ f0/Q.
pub fn design_notch(spec: &FilterSpec) -> Result<BiquadCascade> {
    let (f0, q, fs) = match *spec {
        FilterSpec::Notch { center_hz, q, sample_rate_hz } => (center_hz, q, sample_rate_hz),
        _ => {
            return Err(Error::InvalidParams("design_notch expects a Notch spec".into()));
        }
    };
    if !(fs.is_finite() && fs > 0.0) {
        return Err(Error::InvalidSampleRate(fs));
    }
    check_cutoff(f0, fs)?;
    if !(q.is_finite() && q > 0.0) {
        return Err(Error::InvalidParams(format!("notch Q must be > 0, got {q}")));
    }
    let w0 = 2.0 * PI * f0 / fs;
    let alpha = w0.sin() / (2.0 * q);
    let a0 = 1.0 + alpha;
    let section = BiquadSection {
        b0: 1.0 / a0,
        b1: -2.0 * w0.cos() / a0,
        b2: 1.0 / a0,
        a1: -2.0 * w0.cos() / a0,
        a2: (1.0 - alpha) / a0,
    };
    BiquadCascade::new(vec![section], 1.0)
}

/// Causal application: each section runs as a direct-form-II-transposed
/// difference equation with zero initial state; the overall gain scales the
/// final output. Length, rate, and label are preserved.
pub fn filt(cascade: &BiquadCascade, series: &TimeSeries) -> TimeSeries {
    let mut data = series.samples().to_vec();
    filt_in_place(cascade, &mut data);
    TimeSeries::from_computed(series.label(), data, series.sample_rate_hz())
}

fn filt_in_place(cascade: &BiquadCascade, data: &mut [f64]) {
    for s in cascade.sections() {
        let (mut s1, mut s2) = (0.0, 0.0);
        for x in data.iter_mut() {
            let xn = *x;
            let yn = s.b0 * xn + s1;
            s1 = s.b1 * xn - s.a1 * yn + s2;
            s2 = s.b2 * xn - s.a2 * yn;
            *x = yn;
        }
    }
    let g = cascade.overall_gain();
    for x in data.iter_mut() {
        *x *= g;
    }
}

/// Padding length used by [`filtfilt`]: three times the effective filter
/// order (two poles per section) plus one, per side.
pub fn filtfilt_pad_len(cascade: &BiquadCascade) -> usize {
    3 * (2 * cascade.sections().len() + 1)
}

/// Zero-phase application: odd-extends the series by [`filtfilt_pad_len`]
/// samples per side (reflection about the endpoint value), runs the causal
/// cascade forward and backward, and strips the padding. The effective
/// magnitude response is |H|² and the phase response is identically zero.
pub fn filtfilt(cascade: &BiquadCascade, series: &TimeSeries) -> Result<TimeSeries> {
    let n = series.len();
    let pad = filtfilt_pad_len(cascade);
    if n <= pad {
        return Err(Error::SeriesTooShort { needed: pad, got: n });
    }
    let x = series.samples();
    let mut data = Vec::with_capacity(n + 2 * pad);
    for j in 0..pad {
        data.push(2.0 * x[0] - x[pad - j]);
    }
    data.extend_from_slice(x);
    for j in 0..pad {
        data.push(2.0 * x[n - 1] - x[n - 2 - j]);
    }
    filt_in_place(cascade, &mut data);
    data.reverse();
    filt_in_place(cascade, &mut data);
    data.reverse();
    let core = data[pad..pad + n].to_vec();
    Ok(TimeSeries::from_computed(series.label(), core, series.sample_rate_hz()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    const FS: f64 = 1000.0;

    fn emg_bandpass() -> BiquadCascade {
        design_butterworth(&FilterSpec::BandPass {
            low_cutoff_hz: 10.0,
            high_cutoff_hz: 150.0,
            order: 4,
            sample_rate_hz: FS,
        })
        .unwrap()
    }

    fn series(samples: Vec<f64>) -> TimeSeries {
        TimeSeries::new("x", samples, FS).unwrap()
    }

    #[test]
    fn order_one_lowpass_matches_symbolic_bilinear_transform() {
        // H(s) = ωc/(s + ωc) with ωc pre-warped, s = 2fs(1−z⁻¹)/(1+z⁻¹):
        //   b0 = b1 = ωc/(2fs + ωc), a1 = (ωc − 2fs)/(2fs + ωc).
        let fc = 100.0;
        let wc = 2.0 * FS * (PI * fc / FS).tan();
        let b_expect = wc / (2.0 * FS + wc);
        let a1_expect = (wc - 2.0 * FS) / (2.0 * FS + wc);
        let c = design_butterworth(&FilterSpec::LowPass { cutoff_hz: fc, order: 1, sample_rate_hz: FS })
            .unwrap();
        assert_eq!(c.sections().len(), 1);
        let s = c.sections()[0];
        let g = c.overall_gain();
        assert!((g * s.b0 - b_expect).abs() < 1e-9, "b0 {} vs {}", g * s.b0, b_expect);
        assert!((g * s.b1 - b_expect).abs() < 1e-9);
        assert!((g * s.b2).abs() < 1e-9);
        assert!((s.a1 - a1_expect).abs() < 1e-9, "a1 {} vs {}", s.a1, a1_expect);
        assert!(s.a2.abs() < 1e-9);
    }

    #[test]
    fn bandpass_edges_sit_at_minus_three_db() {
        let c = emg_bandpass();
        // 4th-order prototype doubles to 8 poles = 4 sections.
        assert_eq!(c.sections().len(), 4);
        for f in [10.0, 150.0] {
            let db = c.magnitude_db_at(f, FS);
            assert!((db + 3.0103).abs() < 0.1, "|H({f})| = {db} dB");
        }
        // Among sampled in-band points the response tops out at 0 dB.
        let peak = (10..=150)
            .map(|f| c.magnitude_at(f as f64, FS))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((peak - 1.0).abs() < 1e-6, "peak {peak}");
    }

    #[test]
    fn lowpass_dc_gain_is_unity() {
        for order in [1, 2, 3, 5, 7, 8] {
            for fc in [2.0, 60.0, 220.0] {
                let c = design_butterworth(&FilterSpec::LowPass {
                    cutoff_hz: fc,
                    order,
                    sample_rate_hz: FS,
                })
                .unwrap();
                let h0 = c.magnitude_at(0.0, FS);
                assert!((h0 - 1.0).abs() < 1e-9, "order {order} fc {fc}: |H(0)| = {h0}");
                let hc = c.magnitude_db_at(fc, FS);
                assert!((hc + 3.0103).abs() < 0.01, "order {order} fc {fc}: {hc} dB at cutoff");
            }
        }
    }

    #[test]
    fn highpass_nyquist_gain_is_unity() {
        for order in [1, 2, 7] {
            let c = design_butterworth(&FilterSpec::HighPass {
                cutoff_hz: 9.0,
                order,
                sample_rate_hz: FS,
            })
            .unwrap();
            let h = c.magnitude_at(500.0, FS);
            assert!((h - 1.0).abs() < 1e-9, "order {order}: |H(nyq)| = {h}");
            let hc = c.magnitude_db_at(9.0, FS);
            assert!((hc + 3.0103).abs() < 0.01, "order {order}: {hc} dB at cutoff");
        }
    }

    #[test]
    fn notch_kills_center_and_passes_dc_and_nyquist() {
        let c = design_notch(&FilterSpec::Notch { center_hz: 60.0, q: 30.0, sample_rate_hz: FS })
            .unwrap();
        assert_eq!(c.sections().len(), 1);
        // Zeros on the unit circle: essentially -inf dB, far below -30 dB.
        assert!(c.magnitude_at(60.0, FS) < 1e-8);
        assert!(c.magnitude_db_at(60.0, FS) < -30.0);
        for f in [0.0, 500.0] {
            let db = c.magnitude_db_at(f, FS).abs();
            assert!(db < 0.01, "|H({f})| off unity by {db} dB");
        }
        // −3 dB bandwidth ≈ f0/Q = 2 Hz: half-power near 60 ± 1 Hz.
        for f in [59.0, 61.0] {
            let db = c.magnitude_db_at(f, FS);
            assert!((db + 3.01).abs() < 0.5, "|H({f})| = {db} dB");
        }
    }

    #[test]
    fn notch_attenuates_a_60hz_tone_in_the_time_domain() {
        let c = design_notch(&FilterSpec::Notch { center_hz: 60.0, q: 30.0, sample_rate_hz: FS })
            .unwrap();
        let n = 5000;
        let x: Vec<f64> = (0..n).map(|i| (2.0 * PI * 60.0 * i as f64 / FS).sin()).collect();
        let y = filt(&c, &series(x.clone()));
        let rms = |v: &[f64]| (v.iter().map(|a| a * a).sum::<f64>() / v.len() as f64).sqrt();
        let settled = 500; // discard 0.5 s of startup transient
        let ratio = rms(&y.samples()[settled..]) / rms(&x[settled..]);
        assert!(ratio < 0.03, "steady-state RMS ratio {ratio}");
    }

    #[test]
    fn identity_cascade_is_exact_for_filt_and_filtfilt() {
        let mut rng = SplitMix64::new(0xF0);
        let x: Vec<f64> = (0..256).map(|_| rng.uniform(-5.0, 5.0)).collect();
        let s = series(x.clone());
        let id = BiquadCascade::identity();
        assert_eq!(filt(&id, &s).samples(), &x[..]);
        assert_eq!(filtfilt(&id, &s).unwrap().samples(), &x[..]);
    }

    /// Direct-form-I difference equation, evaluated section by section with
    /// explicit history terms — an independent re-statement of the filter.
    fn df1_oracle(cascade: &BiquadCascade, x: &[f64]) -> Vec<f64> {
        let mut cur = x.to_vec();
        for s in cascade.sections() {
            let mut out = vec![0.0; cur.len()];
            for n in 0..cur.len() {
                let x0 = cur[n];
                let x1 = if n >= 1 { cur[n - 1] } else { 0.0 };
                let x2 = if n >= 2 { cur[n - 2] } else { 0.0 };
                let y1 = if n >= 1 { out[n - 1] } else { 0.0 };
                let y2 = if n >= 2 { out[n - 2] } else { 0.0 };
                out[n] = s.b0 * x0 + s.b1 * x1 + s.b2 * x2 - s.a1 * y1 - s.a2 * y2;
            }
            cur = out;
        }
        cur.iter().map(|v| v * cascade.overall_gain()).collect()
    }

    #[test]
    fn filt_matches_difference_equation_oracle() {
        let cascades = vec![
            emg_bandpass(),
            design_butterworth(&FilterSpec::HighPass { cutoff_hz: 9.0, order: 7, sample_rate_hz: FS })
                .unwrap(),
            design_butterworth(&FilterSpec::LowPass { cutoff_hz: 6.0, order: 7, sample_rate_hz: FS })
                .unwrap(),
            design_notch(&FilterSpec::Notch { center_hz: 60.0, q: 30.0, sample_rate_hz: FS }).unwrap(),
        ];
        let mut impulse = vec![0.0; 64];
        impulse[0] = 1.0;
        let mut rng = SplitMix64::new(0xF1);
        let noise: Vec<f64> = (0..64).map(|_| rng.gauss(0.0, 1.0)).collect();
        for c in &cascades {
            for x in [&impulse, &noise] {
                let got = filt(c, &series(x.clone()));
                let want = df1_oracle(c, x);
                for (g, w) in got.samples().iter().zip(&want) {
                    assert!((g - w).abs() < 1e-12, "{g} vs {w}");
                }
            }
        }
    }

    /// Power of `x` in the band [f_lo, f_hi] via a direct DFT over the band
    /// bins (test-only; no FFT needed at this size).
    fn band_power(x: &[f64], f_lo: f64, f_hi: f64, fs: f64) -> f64 {
        let n = x.len();
        let lo = (f_lo * n as f64 / fs).ceil() as usize;
        let hi = (f_hi * n as f64 / fs).floor() as usize;
        let mut total = 0.0;
        for k in lo..=hi {
            let (mut re, mut im) = (0.0, 0.0);
            for (i, &v) in x.iter().enumerate() {
                let phi = -2.0 * PI * (k * i) as f64 / n as f64;
                re += v * phi.cos();
                im += v * phi.sin();
            }
            total += re * re + im * im;
        }
        total
    }

    #[test]
    fn bandpass_suppresses_out_of_band_noise_energy() {
        let c = emg_bandpass();
        let mut rng = SplitMix64::new(0xF2);
        let x: Vec<f64> = (0..4096).map(|_| rng.gauss(0.0, 1.0)).collect();
        let y = filt(&c, &series(x.clone()));
        for (lo, hi) in [(0.25, 5.0), (300.0, 499.0)] {
            let pin = band_power(&x, lo, hi, FS);
            let pout = band_power(y.samples(), lo, hi, FS);
            let reduction_db = 10.0 * (pin / pout).log10();
            assert!(reduction_db >= 20.0, "band {lo}-{hi} Hz reduced by only {reduction_db} dB");
        }
    }

    #[test]
    fn designed_cascades_are_stable_across_orders_and_cutoffs() {
        // Orders 1-8, 50 cutoffs spanning (0.001, 0.499) × fs.
        for order in 1..=8 {
            for k in 0..50 {
                let frac = 0.001 + (0.499 - 0.002) * k as f64 / 49.0;
                let fc = frac * FS;
                for spec in [
                    FilterSpec::LowPass { cutoff_hz: fc, order, sample_rate_hz: FS },
                    FilterSpec::HighPass { cutoff_hz: fc, order, sample_rate_hz: FS },
                ] {
                    let c = design_butterworth(&spec).unwrap();
                    assert!(c.is_stable(), "unstable {spec:?}");
                }
                if frac < 0.45 {
                    let spec = FilterSpec::BandPass {
                        low_cutoff_hz: fc,
                        high_cutoff_hz: (frac + 0.04) * FS,
                        order,
                        sample_rate_hz: FS,
                    };
                    let c = design_butterworth(&spec).unwrap();
                    assert!(c.is_stable(), "unstable {spec:?}");
                }
            }
        }
    }

    #[test]
    fn lowpass_magnitude_is_monotone_non_increasing() {
        for order in [2, 5, 7] {
            let c = design_butterworth(&FilterSpec::LowPass {
                cutoff_hz: 40.0,
                order,
                sample_rate_hz: FS,
            })
            .unwrap();
            let mut prev = f64::INFINITY;
            for k in 0..1024 {
                let f = k as f64 * (FS / 2.0) / 1024.0;
                let m = c.magnitude_at(f, FS);
                assert!(m <= prev + 1e-9, "order {order}: |H| rises at {f} Hz");
                prev = m;
            }
        }
    }

    #[test]
    fn filt_is_linear() {
        let c = emg_bandpass();
        let mut rng = SplitMix64::new(0xF3);
        for _ in 0..10 {
            let x: Vec<f64> = (0..200).map(|_| rng.uniform(-2.0, 2.0)).collect();
            let y: Vec<f64> = (0..200).map(|_| rng.uniform(-2.0, 2.0)).collect();
            let (a, b) = (rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0));
            let mixed: Vec<f64> = x.iter().zip(&y).map(|(xi, yi)| a * xi + b * yi).collect();
            let fm = filt(&c, &series(mixed));
            let fx = filt(&c, &series(x));
            let fy = filt(&c, &series(y));
            for i in 0..200 {
                let want = a * fx.samples()[i] + b * fy.samples()[i];
                assert!((fm.samples()[i] - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn filtfilt_has_zero_lag_on_in_band_sinusoid() {
        let c = emg_bandpass();
        let n = 2000;
        let x: Vec<f64> = (0..n).map(|i| (2.0 * PI * 50.0 * i as f64 / FS).sin()).collect();
        let y = filtfilt(&c, &series(x.clone())).unwrap();
        let mut best = (f64::NEG_INFINITY, isize::MIN);
        for lag in -40..=40isize {
            let mut acc = 0.0;
            for i in 0..n as isize {
                let j = i + lag;
                if j >= 0 && j < n as isize {
                    acc += x[i as usize] * y.samples()[j as usize];
                }
            }
            if acc > best.0 {
                best = (acc, lag);
            }
        }
        assert_eq!(best.1, 0, "cross-correlation peaks at lag {}", best.1);
    }

    #[test]
    fn filtfilt_commutes_with_time_reversal_away_from_edges() {
        // The forward and backward passes exchange which edge transient is
        // truncated, so the symmetry is exact only once those transients
        // have decayed; beyond ~1.5 s at these pole radii the two orderings
        // agree to sub-1e-9. The raw edge mismatch stays bounded.
        let c = emg_bandpass();
        let n = 10_000;
        let x: Vec<f64> = (0..n).map(|i| (2.0 * PI * 50.0 * i as f64 / FS).sin()).collect();
        let fwd = filtfilt(&c, &series(x.clone())).unwrap();
        let mut xr = x.clone();
        xr.reverse();
        let mut rev = filtfilt(&c, &series(xr)).unwrap().samples().to_vec();
        rev.reverse();
        let settle = 1500;
        let mut edge_max = 0.0f64;
        for i in 0..n {
            let d = (fwd.samples()[i] - rev[i]).abs();
            if i >= settle && i < n - settle {
                assert!(d <= 1e-9, "interior deviation {d} at {i}");
            }
            edge_max = edge_max.max(d);
        }
        assert!(edge_max < 0.1, "edge deviation {edge_max} out of bounds");
    }

    #[test]
    fn filtfilt_is_bit_identical_to_the_two_pass_composition() {
        let c = emg_bandpass();
        let mut rng = SplitMix64::new(0xF4);
        let x: Vec<f64> = (0..400).map(|_| rng.gauss(0.0, 1.0)).collect();
        let got = filtfilt(&c, &series(x.clone())).unwrap();

        // Oracle: pad, two explicit filt calls with reversals, strip.
        let pad = filtfilt_pad_len(&c);
        let n = x.len();
        let mut padded = Vec::with_capacity(n + 2 * pad);
        for j in 0..pad {
            padded.push(2.0 * x[0] - x[pad - j]);
        }
        padded.extend_from_slice(&x);
        for j in 0..pad {
            padded.push(2.0 * x[n - 1] - x[n - 2 - j]);
        }
        let pass1 = filt(&c, &series(padded));
        let mut r1 = pass1.samples().to_vec();
        r1.reverse();
        let pass2 = filt(&c, &series(r1));
        let mut r2 = pass2.samples().to_vec();
        r2.reverse();
        let want = &r2[pad..pad + n];
        for (g, w) in got.samples().iter().zip(want) {
            assert_eq!(g.to_bits(), w.to_bits());
        }
    }

    #[test]
    fn filtfilt_rejects_series_shorter_than_padding() {
        let c = emg_bandpass(); // 4 sections → pad 27 per side
        let x = vec![0.0; 27];
        assert!(matches!(
            filtfilt(&c, &series(x)),
            Err(Error::SeriesTooShort { needed: 27, got: 27 })
        ));
        assert!(filtfilt(&c, &series(vec![0.0; 28])).is_ok());
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(matches!(
            design_butterworth(&FilterSpec::LowPass { cutoff_hz: 500.0, order: 2, sample_rate_hz: FS }),
            Err(Error::InvalidCutoff { .. })
        ));
        assert!(matches!(
            design_butterworth(&FilterSpec::HighPass { cutoff_hz: 0.0, order: 2, sample_rate_hz: FS }),
            Err(Error::InvalidCutoff { .. })
        ));
        assert!(matches!(
            design_butterworth(&FilterSpec::BandPass {
                low_cutoff_hz: 150.0,
                high_cutoff_hz: 10.0,
                order: 4,
                sample_rate_hz: FS
            }),
            Err(Error::InvalidParams(_))
        ));
        assert!(matches!(
            design_butterworth(&FilterSpec::LowPass { cutoff_hz: 10.0, order: 0, sample_rate_hz: FS }),
            Err(Error::InvalidParams(_))
        ));
        assert!(matches!(
            design_notch(&FilterSpec::Notch { center_hz: 60.0, q: 0.0, sample_rate_hz: FS }),
            Err(Error::InvalidParams(_))
        ));
        assert!(design_butterworth(&FilterSpec::Notch {
            center_hz: 60.0,
            q: 30.0,
            sample_rate_hz: FS
        })
        .is_err());
    }

    #[test]
    fn dump_json_round_trips_every_coefficient_exactly() {
        let c = emg_bandpass();
        let dump = c.dump_json();
        let parsed: serde_json::Value = serde_json::from_str(&dump).unwrap();
        let gain = parsed["overall_gain"].as_f64().unwrap();
        assert_eq!(gain.to_bits(), c.overall_gain().to_bits());
        let sections = parsed["sections"].as_array().unwrap();
        assert_eq!(sections.len(), c.sections().len());
        for (row, s) in sections.iter().zip(c.sections()) {
            let row: Vec<f64> = row.as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
            for (got, want) in row.iter().zip([s.b0, s.b1, s.b2, s.a1, s.a2]) {
                assert_eq!(got.to_bits(), want.to_bits());
            }
        }
    }
}
