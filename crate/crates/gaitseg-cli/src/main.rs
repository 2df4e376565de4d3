//! Batch frontend for the gait-segmentation pipeline.
//!
//! Subcommands: `synth` (generate fixtures), `detect` (heel strikes only),
//! `segment` (half-trials + modalities), `profile` (muscle profiles),
//! `pipeline` (everything, with artifacts). Logging level comes from the
//! `GAITSEG_LOG` environment variable (`error|warn|info|debug`).
//!
//! Exit codes: 0 success, 1 usage/configuration error, 2 input-data
//! error, 3 internal error.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gaitseg::config::PipelineConfig;
use gaitseg::emg::MuscleProfile;
use gaitseg::filters::{design_butterworth, design_notch, FilterSpec};
use gaitseg::io::{read_emg_csv, read_kin_csv, write_emg_csv, write_kin_csv, write_ground_truth};
use gaitseg::modality::Modality;
use gaitseg::pipeline::{run_pipeline, write_artifacts, EventReport};
use gaitseg::recording::{Recording, SYNC_LIMIT_S};
use gaitseg::synth::{generate_trial, generate_walk, SynthParams};
use gaitseg::{Error, Result};

/// Acceptable deviation of a file's inferred sample rate from the
/// configured one, as a fraction.
const RATE_TOL: f64 = 0.01;

/// Write to stdout, treating a closed pipe (e.g. `gaitseg ... | head`) as a
/// clean early exit rather than a panic.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    if out.write_all(text.as_bytes()).is_err() || out.flush().is_err() {
        std::process::exit(0);
    }
}

fn emitln(text: &str) {
    emit(text);
    emit("\n");
}

#[derive(Parser)]
#[command(
    name = "gaitseg",
    version,
    about = "Segment IMU walking recordings and profile sEMG muscle activity",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic recording (kin.csv, emg.csv, truth.json)
    Synth(SynthArgs),
    /// Detect heel strikes over the whole recording
    Detect(AnalyzeArgs),
    /// Find half-trials, turns, and modality segments
    Segment(AnalyzeArgs),
    /// Compute per-muscle activity profiles
    Profile(AnalyzeArgs),
    /// Run every stage and write all artifacts
    Pipeline(AnalyzeArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Kinematics CSV (header: t,ax,ay,az,px,py,pz)
    #[arg(long)]
    kin: Option<PathBuf>,
    /// EMG CSV (header: t,TA,mGAST,VL,RF,SEM,BFL)
    #[arg(long)]
    emg: Option<PathBuf>,
    /// JSON config; only the keys present override defaults
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: config `output_dir`, else gaitseg-out)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Format of results printed to stdout
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Render SVG plots (pipeline subcommand)
    #[arg(long, value_enum, default_value_t = Switch::On)]
    plots: Switch,
    /// Print the effective configuration as JSON and exit
    #[arg(long)]
    print_config: bool,
    /// Print the designed filter coefficients as JSON and exit
    #[arg(long)]
    dump_filters: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Preset {
    Default,
    Pd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SynthMode {
    Trial,
    Walk,
}

/// CLI-facing modality names (the library enum stays clap-free).
#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CliModality {
    Lgw,
    Ra,
    Rd,
    Sa,
    Sd,
}

impl From<CliModality> for Modality {
    fn from(m: CliModality) -> Self {
        match m {
            CliModality::Lgw => Modality::LGW,
            CliModality::Ra => Modality::RA,
            CliModality::Rd => Modality::RD,
            CliModality::Sa => Modality::SA,
            CliModality::Sd => Modality::SD,
        }
    }
}

#[derive(Args)]
struct SynthArgs {
    /// Directory to write kin.csv, emg.csv, truth.json into
    #[arg(long)]
    out: PathBuf,
    /// Seed for all pseudo-random draws
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Parameter preset
    #[arg(long, value_enum, default_value_t = Preset::Default)]
    preset: Preset,
    /// Full course protocol or one uninterrupted walking bout
    #[arg(long, value_enum, default_value_t = SynthMode::Trial)]
    mode: SynthMode,
    /// Walking modality for --mode walk
    #[arg(long, value_enum, default_value_t = CliModality::Lgw)]
    modality: CliModality,
    /// Bout duration in seconds for --mode walk
    #[arg(long, default_value_t = 30.0)]
    duration_s: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version go to stdout with success; real usage errors
            // exit with code 1.
            let is_error = e.use_stderr();
            let _ = e.print();
            return if is_error { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GAITSEG_LOG", "warn"))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(args) => run_synth(&args),
        Command::Detect(args) => with_recording(&args, run_detect),
        Command::Segment(args) => with_recording(&args, run_segment),
        Command::Profile(args) => with_recording(&args, run_profile),
        Command::Pipeline(args) => with_recording(&args, run_full),
    }
}

fn load_config(args: &AnalyzeArgs) -> Result<PipelineConfig> {
    match &args.config {
        Some(path) => PipelineConfig::from_json_file(path),
        None => Ok(PipelineConfig::default()),
    }
}

/// Shared ingest path: honor `--print-config`/`--dump-filters`, then read
/// and validate both files and hand the recording to the subcommand.
fn with_recording(
    args: &AnalyzeArgs,
    body: impl FnOnce(&AnalyzeArgs, &PipelineConfig, Recording) -> Result<()>,
) -> Result<()> {
    let config = load_config(args)?;
    if args.print_config {
        emitln(&config.to_json_pretty());
        return Ok(());
    }
    if args.dump_filters {
        emitln(&dump_filters(&config)?);
        return Ok(());
    }
    let kin_path = args
        .kin
        .as_deref()
        .ok_or_else(|| Error::InvalidParams("--kin is required".into()))?;
    let emg_path = args
        .emg
        .as_deref()
        .ok_or_else(|| Error::InvalidParams("--emg is required".into()))?;

    let kin = read_kin_csv(kin_path)?;
    check_rate(kin_path, kin.sample_rate_hz(), config.fs_kin_hz)?;
    let emg = read_emg_csv(emg_path)?;
    check_rate(emg_path, emg.sample_rate_hz(), config.fs_emg_hz)?;
    let recording = Recording::new(kin, emg, SYNC_LIMIT_S)?;
    body(args, &config, recording)
}

fn check_rate(path: &Path, inferred_hz: f64, configured_hz: f64) -> Result<()> {
    if (inferred_hz - configured_hz).abs() > RATE_TOL * configured_hz {
        return Err(Error::Parse {
            path: path.display().to_string(),
            line: 1,
            column: 1,
            reason: format!(
                "sample rate {inferred_hz:.3} Hz differs from the configured {configured_hz} Hz by more than {}%",
                RATE_TOL * 100.0
            ),
        });
    }
    Ok(())
}

fn out_dir(args: &AnalyzeArgs, config: &PipelineConfig) -> PathBuf {
    args.out
        .clone()
        .or_else(|| config.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("gaitseg-out"))
}

fn dump_filters(config: &PipelineConfig) -> Result<String> {
    let fs = config.fs_emg_hz;
    let emg_bp = design_butterworth(&FilterSpec::BandPass {
        low_cutoff_hz: config.emg.bandpass_low_hz,
        high_cutoff_hz: config.emg.bandpass_high_hz,
        order: config.emg.bandpass_order,
        sample_rate_hz: fs,
    })?;
    let emg_notch = design_notch(&FilterSpec::Notch {
        center_hz: config.emg.notch_hz,
        q: config.emg.notch_q,
        sample_rate_hz: fs,
    })?;
    let hs_hp = design_butterworth(&FilterSpec::HighPass {
        cutoff_hz: config.heel_strike.highpass_hz,
        order: config.heel_strike.filter_order,
        sample_rate_hz: fs,
    })?;
    let hs_lp = design_butterworth(&FilterSpec::LowPass {
        cutoff_hz: config.heel_strike.lowpass_hz,
        order: config.heel_strike.filter_order,
        sample_rate_hz: fs,
    })?;
    let env_lp = design_butterworth(&FilterSpec::LowPass {
        cutoff_hz: config.envelope_lowpass_hz,
        order: 2,
        sample_rate_hz: fs,
    })?;
    Ok(format!(
        "{{\"sample_rate_hz\":{fs},\"emg_bandpass\":{},\"emg_notch\":{},\"hs_highpass\":{},\"hs_lowpass\":{},\"envelope_lowpass\":{}}}",
        emg_bp.dump_json(),
        emg_notch.dump_json(),
        hs_hp.dump_json(),
        hs_lp.dump_json(),
        env_lp.dump_json(),
    ))
}

fn format_times_json(times: &[f64]) -> String {
    let mut out = String::from("[");
    for (i, t) in times.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{t:.6}");
    }
    out.push(']');
    out
}

/// `detect`: heel strikes over the entire recording, without course
/// segmentation — the mode for single-bout recordings and tuning runs.
fn run_detect(args: &AnalyzeArgs, config: &PipelineConfig, recording: Recording) -> Result<()> {
    let rec = recording.with_kin_on_emg_grid().map_err(Error::in_stage("ingest"))?;
    let events = gaitseg::heelstrike::detect_heel_strikes(&rec.kin.az, &config.heel_strike)
        .map_err(Error::in_stage("heel-strike"))?;
    log::info!("detected {} heel strikes", events.len());
    match args.format {
        Format::Json => {
            emitln(&format!(
                "{{\"heel_strikes_s\":{}}}",
                format_times_json(events.times_s())
            ));
        }
        Format::Csv => {
            let mut out = String::from("heel_strike_s\n");
            for &t in events.times_s() {
                let _ = writeln!(out, "{t:.6}");
            }
            emit(&out);
        }
    }
    Ok(())
}

/// `segment`: run the pipeline and report the course structure only.
fn run_segment(args: &AnalyzeArgs, config: &PipelineConfig, recording: Recording) -> Result<()> {
    let output = run_pipeline(&recording, config)?;
    print_segments(args.format, &output.report);
    Ok(())
}

fn print_segments(format: Format, report: &EventReport) {
    match format {
        Format::Json => {
            let mut out = String::from("{\"half_trials\":[");
            for (i, ht) in report.half_trials.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let dir = match ht.direction {
                    gaitseg::activity::Direction::Forward => "forward",
                    gaitseg::activity::Direction::Reverse => "reverse",
                };
                let _ = write!(
                    out,
                    "{{\"index\":{},\"direction\":\"{dir}\",\"start_s\":{:.6},\"end_s\":{:.6},\"turns_s\":[{:.6},{:.6}],\"segments\":[",
                    ht.index, ht.start_s, ht.end_s, ht.turns_s[0], ht.turns_s[1]
                );
                for (j, seg) in ht.segments.iter().enumerate() {
                    if j > 0 {
                        out.push(',');
                    }
                    let _ = write!(
                        out,
                        "{{\"modality\":\"{}\",\"start_s\":{:.6},\"end_s\":{:.6}}}",
                        seg.modality, seg.start_s, seg.end_s
                    );
                }
                out.push_str("]}");
            }
            out.push_str("]}");
            emitln(&out);
        }
        Format::Csv => {
            let mut out = String::from("half_trial,direction,modality,start_s,end_s\n");
            for ht in &report.half_trials {
                let dir = match ht.direction {
                    gaitseg::activity::Direction::Forward => "forward",
                    gaitseg::activity::Direction::Reverse => "reverse",
                };
                for seg in &ht.segments {
                    let _ = writeln!(
                        out,
                        "{},{dir},{},{:.6},{:.6}",
                        ht.index, seg.modality, seg.start_s, seg.end_s
                    );
                }
            }
            emit(&out);
        }
    }
}

/// `profile`: run the pipeline, write only the profile CSVs, print a
/// per-muscle summary.
fn run_profile(args: &AnalyzeArgs, config: &PipelineConfig, recording: Recording) -> Result<()> {
    let output = run_pipeline(&recording, config)?;
    let dir = out_dir(args, config);
    let written = gaitseg::pipeline::write_profile_csvs(&dir, &output.profiles)?;
    log::info!("wrote {} profile files under {}", written.len(), dir.display());
    emit(&profile_summary(args.format, &output.profiles));
    Ok(())
}

/// `pipeline`: everything, with artifacts under the output directory.
fn run_full(args: &AnalyzeArgs, config: &PipelineConfig, recording: Recording) -> Result<()> {
    let output = run_pipeline(&recording, config)?;
    let dir = out_dir(args, config);
    let written = write_artifacts(&dir, &output, args.plots == Switch::On)?;
    emitln(&format!(
        "{} half-trials, {} segments, {} heel strikes, {} cycles; {} files under {}",
        output.report.half_trials.len(),
        output.report.n_segments(),
        output.report.heel_strikes_s.len(),
        output.report.n_cycles(),
        written.len(),
        dir.display()
    ));
    Ok(())
}

fn profile_summary(format: Format, profiles: &[MuscleProfile]) -> String {
    match format {
        Format::Json => {
            let mut out = String::from("{\"profiles\":[");
            for (i, p) in profiles.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let (peak_idx, peak) = p
                    .mean
                    .iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |acc, (k, &v)| {
                        if v > acc.1 {
                            (k, v)
                        } else {
                            acc
                        }
                    });
                let denom = (p.n_points - 1).max(1) as f64;
                let _ = write!(
                    out,
                    "{{\"muscle\":\"{}\",\"n_cycles\":{},\"peak_percent\":{:.4},\"peak_value\":{:.9}}}",
                    p.muscle,
                    p.n_cycles,
                    100.0 * peak_idx as f64 / denom,
                    peak
                );
            }
            out.push_str("]}\n");
            out
        }
        Format::Csv => {
            let mut out = String::from("muscle,n_cycles,peak_percent,peak_value\n");
            for p in profiles {
                let (peak_idx, peak) = p
                    .mean
                    .iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |acc, (k, &v)| {
                        if v > acc.1 {
                            (k, v)
                        } else {
                            acc
                        }
                    });
                let denom = (p.n_points - 1).max(1) as f64;
                let _ = writeln!(
                    out,
                    "{},{},{:.4},{:.9}",
                    p.muscle,
                    p.n_cycles,
                    100.0 * peak_idx as f64 / denom,
                    peak
                );
            }
            out
        }
    }
}

fn run_synth(args: &SynthArgs) -> Result<()> {
    let params = match args.preset {
        Preset::Default => SynthParams { seed: args.seed, ..SynthParams::default() },
        Preset::Pd => SynthParams::pd_preset(args.seed),
    };
    let (recording, truth) = match args.mode {
        SynthMode::Trial => generate_trial(&params)?,
        SynthMode::Walk => generate_walk(&params, args.modality.into(), args.duration_s)?,
    };
    std::fs::create_dir_all(&args.out)?;
    let kin_path = args.out.join("kin.csv");
    let emg_path = args.out.join("emg.csv");
    let truth_path = args.out.join("truth.json");
    write_kin_csv(&kin_path, &recording.kin)?;
    write_emg_csv(&emg_path, &recording.emg)?;
    write_ground_truth(&truth_path, &truth)?;
    emitln(&format!(
        "wrote {} ({} samples at {} Hz), {} ({} samples at {} Hz), {} ({} heel strikes)",
        kin_path.display(),
        recording.kin.n_samples(),
        recording.kin.sample_rate_hz(),
        emg_path.display(),
        recording.emg.n_samples(),
        recording.emg.sample_rate_hz(),
        truth_path.display(),
        truth.hs_times_s.len(),
    ));
    Ok(())
}
