//! CSV ingestion and export, plus ground-truth JSON.
//!
//! The file contract is deliberately rigid: exact headers, comma
//! separation, `.` decimals, UTF-8, LF line endings. The `t` column is
//! validated for uniform spacing (within 1% of the nominal period) instead
//! of trusted, because real exports drift; the sample rate is inferred
//! from the first and last timestamps.
//!
//! Numbers are written with 9 decimal places, so a write→read round trip
//! reproduces every sample to 5 × 10⁻¹⁰.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::emg::{EmgChannelSet, MUSCLES};
use crate::error::{Error, Result};
use crate::recording::{KinChannels, Recording, KIN_CHANNELS, SYNC_LIMIT_S};
use crate::signal::TimeSeries;
use crate::synth::GroundTruth;

/// Required header of a kinematics file.
pub const KIN_HEADER: &str = "t,ax,ay,az,px,py,pz";
/// Required header of an EMG file.
pub const EMG_HEADER: &str = "t,TA,mGAST,VL,RF,SEM,BFL";
/// Maximum deviation of any timestamp from the uniform grid, as a
/// fraction of the nominal sample period.
pub const T_UNIFORMITY_TOL: f64 = 0.01;

/// Parsed numeric table: inferred sample rate plus one column per
/// non-time field, in header order.
struct Table {
    sample_rate_hz: f64,
    columns: Vec<Vec<f64>>,
}

fn parse_table(path: &Path, text: &str, expected_header: &str) -> Result<Table> {
    let path_str = path.display().to_string();
    let n_fields = expected_header.split(',').count();
    let mut lines = text.split('\n').enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse {
            path: path_str.clone(),
            line: 1,
            column: 1,
            reason: "empty file".into(),
        })?;
    let header = header.strip_suffix('\r').unwrap_or(header);
    if header != expected_header {
        let found_fields: Vec<&str> = header.split(',').collect();
        let missing: Vec<&str> = expected_header
            .split(',')
            .filter(|f| !found_fields.contains(f))
            .collect();
        let note = if missing.is_empty() {
            String::new()
        } else {
            format!(" (missing column(s): {})", missing.join(", "))
        };
        return Err(Error::HeaderMismatch {
            path: path_str,
            expected: expected_header.to_string(),
            found: header.to_string(),
            note,
        });
    }

    let mut t = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); n_fields - 1];
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.is_empty() {
            continue; // trailing newline or blank line
        }
        if line.ends_with('\r') {
            return Err(Error::Parse {
                path: path_str,
                line: line_no,
                column: line.len(),
                reason: "carriage return found; LF line endings required".into(),
            });
        }
        let mut count = 0;
        for (col, field) in line.split(',').enumerate() {
            count += 1;
            if count > n_fields {
                break;
            }
            let value: f64 = field.parse().map_err(|_| Error::Parse {
                path: path_str.clone(),
                line: line_no,
                column: col + 1,
                reason: format!("invalid number {field:?}"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    path: path_str,
                    line: line_no,
                    column: col + 1,
                    reason: format!("non-finite value {field:?}"),
                });
            }
            if col == 0 {
                t.push(value);
            } else {
                columns[col - 1].push(value);
            }
        }
        if count != n_fields {
            return Err(Error::Parse {
                path: path_str,
                line: line_no,
                column: count.min(n_fields) + 1,
                reason: format!("expected {n_fields} fields, found {count}"),
            });
        }
    }

    let n = t.len();
    if n < 2 {
        return Err(Error::Parse {
            path: path_str,
            line: n + 1,
            column: 1,
            reason: format!("need at least 2 data rows, found {n}"),
        });
    }
    let period = (t[n - 1] - t[0]) / (n - 1) as f64;
    if !(period.is_finite() && period > 0.0) {
        return Err(Error::Parse {
            path: path_str,
            line: 2,
            column: 1,
            reason: "timestamps do not increase".into(),
        });
    }
    for (i, &ti) in t.iter().enumerate() {
        let expected = t[0] + i as f64 * period;
        if (ti - expected).abs() > T_UNIFORMITY_TOL * period {
            return Err(Error::Parse {
                path: path_str,
                line: i + 2,
                column: 1,
                reason: format!(
                    "non-uniform sampling: t = {ti} deviates from the {period} s grid by more than {}%",
                    T_UNIFORMITY_TOL * 100.0
                ),
            });
        }
    }
    Ok(Table { sample_rate_hz: 1.0 / period, columns })
}

pub fn read_kin_csv(path: &Path) -> Result<KinChannels> {
    let text = std::fs::read_to_string(path)?;
    let table = parse_table(path, &text, KIN_HEADER)?;
    let fs = table.sample_rate_hz;
    let mut cols = table.columns.into_iter();
    let mut next = |label: &'static str| -> Result<TimeSeries> {
        TimeSeries::new(label, cols.next().expect("column count checked"), fs)
    };
    KinChannels::new(
        next("ax")?,
        next("ay")?,
        next("az")?,
        next("px")?,
        next("py")?,
        next("pz")?,
    )
}

pub fn read_emg_csv(path: &Path) -> Result<EmgChannelSet> {
    let text = std::fs::read_to_string(path)?;
    let table = parse_table(path, &text, EMG_HEADER)?;
    let fs = table.sample_rate_hz;
    let channels = MUSCLES
        .iter()
        .zip(table.columns)
        .map(|(&name, data)| Ok((name.to_string(), TimeSeries::new(name, data, fs)?)))
        .collect::<Result<Vec<_>>>()?;
    EmgChannelSet::new(channels)
}

fn write_rows(
    path: &Path,
    header: &str,
    sample_rate_hz: f64,
    columns: &[&[f64]],
) -> Result<()> {
    let n = columns.first().map_or(0, |c| c.len());
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    out.write_all(header.as_bytes())?;
    out.write_all(b"\n")?;
    let mut line = String::with_capacity(16 * (columns.len() + 1));
    for i in 0..n {
        line.clear();
        let _ = write!(line, "{:.9}", i as f64 / sample_rate_hz);
        for col in columns {
            let _ = write!(line, ",{:.9}", col[i]);
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_kin_csv(path: &Path, kin: &KinChannels) -> Result<()> {
    let columns = kin.columns().map(|(_, series)| series.samples());
    debug_assert_eq!(
        KIN_CHANNELS,
        kin.columns().map(|(name, _)| name),
        "column order must match the header"
    );
    write_rows(path, KIN_HEADER, kin.sample_rate_hz(), &columns)
}

pub fn write_emg_csv(path: &Path, emg: &EmgChannelSet) -> Result<()> {
    let mut columns = Vec::with_capacity(MUSCLES.len());
    for &m in &MUSCLES {
        let series = emg.get(m).ok_or_else(|| {
            Error::InvalidParams(format!("channel set is missing muscle {m}"))
        })?;
        columns.push(series.samples());
    }
    write_rows(path, EMG_HEADER, emg.sample_rate_hz(), &columns)
}

pub fn write_ground_truth(path: &Path, truth: &GroundTruth) -> Result<()> {
    let json = serde_json::to_string_pretty(truth)
        .map_err(|e| Error::Internal(format!("ground-truth serialization: {e}")))?;
    std::fs::write(path, json + "\n")?;
    Ok(())
}

pub fn read_ground_truth(path: &Path) -> Result<GroundTruth> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: e.line(),
        column: e.column(),
        reason: e.to_string(),
    })
}

/// Reads a synchronized recording pair and puts the kinematics on the EMG
/// sample grid (the common analysis timeline).
pub fn ingest(kin_path: &Path, emg_path: &Path) -> Result<Recording> {
    let kin = read_kin_csv(kin_path)?;
    let emg = read_emg_csv(emg_path)?;
    Recording::new(kin, emg, SYNC_LIMIT_S)?.with_kin_on_emg_grid()
}
