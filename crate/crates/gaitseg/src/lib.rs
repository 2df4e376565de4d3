//! Gait event detection and sEMG profiling for unconstrained walking recordings.
//!
//! The crate takes a synchronized pair of recordings — a lumbar IMU (3-axis
//! acceleration + 3-axis position estimate) and multi-channel surface EMG —
//! and recovers the structure of an unconstrained walking session:
//!
//! 1. walking bouts ("half-trials") from windowed x-acceleration energy,
//! 2. walking-modality segments inside each bout from y-position turns,
//! 3. heel-strike events from a band-filtered z-acceleration envelope,
//! 4. heel-strike-to-heel-strike gait cycles of preprocessed EMG, and
//! 5. time-normalized mean ± std activation profiles per muscle.
//!
//! [`synth`] generates seeded synthetic recordings with exact ground truth so
//! every stage can be validated end to end, and [`pipeline`] wires the stages
//! into the batch entry point used by the CLI.

// Windowed DSP reads clearest with explicit index arithmetic.
#![allow(clippy::needless_range_loop)]

pub mod activity;
pub mod config;
pub mod emg;
pub mod error;
pub mod filters;
pub mod heelstrike;
pub mod io;
pub mod modality;
pub mod pipeline;
pub mod plot;
pub mod recording;
pub mod rng;
pub mod signal;
pub mod synth;

pub use error::{Error, Result};
