//! Hand-rolled SVG plots — no drawing dependencies, deterministic bytes.
//!
//! Two figures: the heel-strike detection envelope with event markers,
//! and per-muscle mean ± std activity profiles over the normalized gait
//! cycle.

use std::fmt::Write as _;

use crate::emg::MuscleProfile;
use crate::signal::TimeSeries;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 320.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 34.0;
const MARGIN_BOTTOM: f64 = 40.0;
/// Maximum polyline vertices; longer series are max-pooled per bin so
/// peaks survive downsampling.
const MAX_POINTS: usize = 2000;

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new() -> Self {
        Self {
            x0: MARGIN_LEFT,
            x1: WIDTH - MARGIN_RIGHT,
            y0: MARGIN_TOP,
            y1: HEIGHT - MARGIN_BOTTOM,
        }
    }

    fn x(&self, frac: f64) -> f64 {
        self.x0 + frac.clamp(0.0, 1.0) * (self.x1 - self.x0)
    }

    fn y(&self, value: f64, lo: f64, hi: f64) -> f64 {
        let span = if hi > lo { hi - lo } else { 1.0 };
        let frac = ((value - lo) / span).clamp(0.0, 1.0);
        self.y1 - frac * (self.y1 - self.y0)
    }
}

fn svg_open(out: &mut String, title: &str) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"22\" font-family=\"sans-serif\" font-size=\"15\" fill=\"#222\">{}</text>\n",
        MARGIN_LEFT,
        xml_escape(title),
    );
}

fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axes(out: &mut String, frame: &Frame, x_label: &str, x_max: f64, y_lo: f64, y_hi: f64) {
    let _ = write!(
        out,
        "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#444\" stroke-width=\"1\"/>\n\
         <line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#444\" stroke-width=\"1\"/>\n",
        frame.x0, frame.y1, frame.x1, frame.y1, frame.x0, frame.y0, frame.x0, frame.y1,
    );
    for k in 0..=5 {
        let frac = k as f64 / 5.0;
        let x = frame.x(frac);
        let _ = write!(
            out,
            "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#444\" stroke-width=\"1\"/>\n\
             <text x=\"{x:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#444\" text-anchor=\"middle\">{:.1}</text>\n",
            frame.y1,
            frame.y1 + 5.0,
            frame.y1 + 18.0,
            frac * x_max,
        );
    }
    for (value, anchor_y) in [(y_lo, frame.y1), (y_hi, frame.y0)] {
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#444\" text-anchor=\"end\">{:.2}</text>",
            frame.x0 - 6.0,
            anchor_y + 4.0,
            value,
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#444\" text-anchor=\"middle\">{}</text>",
        (frame.x0 + frame.x1) / 2.0,
        HEIGHT - 6.0,
        xml_escape(x_label),
    );
}

/// Detection envelope with a marker at every reported heel strike.
pub fn envelope_svg(envelope: &TimeSeries, hs_times_s: &[f64], title: &str) -> String {
    let frame = Frame::new();
    let n = envelope.len();
    let duration = envelope.duration_s().max(f64::MIN_POSITIVE);
    let y_hi = envelope.samples().iter().cloned().fold(0.0_f64, f64::max).max(1e-12) * 1.05;

    let mut out = String::with_capacity(64 * 1024);
    svg_open(&mut out, title);
    axes(&mut out, &frame, "time (s)", duration, 0.0, y_hi);

    // Max-pooled polyline.
    if n > 0 {
        let stride = n.div_ceil(MAX_POINTS);
        out.push_str("<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1\" points=\"");
        let mut i = 0;
        while i < n {
            let hi = (i + stride).min(n);
            let bin_max = envelope.samples()[i..hi].iter().cloned().fold(f64::MIN, f64::max);
            let t = envelope.time_at(i + (hi - i - 1) / 2);
            let _ = write!(
                out,
                "{:.2},{:.2} ",
                frame.x(t / duration),
                frame.y(bin_max, 0.0, y_hi)
            );
            i = hi;
        }
        out.push_str("\"/>\n");
    }

    // Event markers: small triangles at the envelope height.
    let fs = envelope.sample_rate_hz();
    for &t in hs_times_s {
        let idx = ((t * fs).round() as usize).min(n.saturating_sub(1));
        let x = frame.x(t / duration);
        let y = frame.y(envelope.samples().get(idx).copied().unwrap_or(0.0), 0.0, y_hi) - 4.0;
        let _ = writeln!(
            out,
            "<path class=\"hs\" d=\"M {:.2} {:.2} L {:.2} {:.2} L {:.2} {:.2} Z\" fill=\"#d62728\"/>",
            x - 4.0,
            y - 7.0,
            x + 4.0,
            y - 7.0,
            x,
            y,
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Mean ± std profile over the normalized gait cycle.
pub fn profile_svg(profile: &MuscleProfile) -> String {
    let frame = Frame::new();
    let n = profile.n_points;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        lo = lo.min(profile.mean[i] - profile.std[i]);
        hi = hi.max(profile.mean[i] + profile.std[i]);
    }
    if !(lo.is_finite() && hi.is_finite()) {
        lo = 0.0;
        hi = 1.0;
    }
    let pad = 0.05 * (hi - lo).max(1e-12);
    let (lo, hi) = (lo - pad, hi + pad);

    let title = format!(
        "{} — mean ± std over {} cycles",
        profile.muscle, profile.n_cycles
    );
    let mut out = String::with_capacity(96 * 1024);
    svg_open(&mut out, &title);
    axes(&mut out, &frame, "gait cycle (%)", 100.0, lo, hi);

    let denom = (n - 1).max(1) as f64;
    // ± std band: upper edge forward, lower edge back.
    out.push_str("<polygon fill=\"#1f77b4\" fill-opacity=\"0.25\" stroke=\"none\" points=\"");
    for i in 0..n {
        let _ = write!(
            out,
            "{:.2},{:.2} ",
            frame.x(i as f64 / denom),
            frame.y(profile.mean[i] + profile.std[i], lo, hi)
        );
    }
    for i in (0..n).rev() {
        let _ = write!(
            out,
            "{:.2},{:.2} ",
            frame.x(i as f64 / denom),
            frame.y(profile.mean[i] - profile.std[i], lo, hi)
        );
    }
    out.push_str("\"/>\n");

    out.push_str("<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"");
    for i in 0..n {
        let _ = write!(
            out,
            "{:.2},{:.2} ",
            frame.x(i as f64 / denom),
            frame.y(profile.mean[i], lo, hi)
        );
    }
    out.push_str("\"/>\n</svg>\n");
    out
}
