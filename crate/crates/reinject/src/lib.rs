//! Time-domain simulator of a grid-to-load power link compensated by a
//! series chain of binary-weighted voltage-reinjection transformer stages.
//!
//! A chain of `p` converter stages, each coupled through its own series
//! transformer, injects a stepped correction voltage between a stiff grid
//! and an RC (or diode-bridge) load. Stage `k`'s secondary is wound with
//! ratio `2^(k-1)`, so the `p`-bit switching state selects one of `2^p`
//! evenly spaced levels — a three-stage chain synthesizes eight levels from
//! `−7·v_dc/2` to `+7·v_dc/2` with no zero level. A feed-forward controller
//! compares the measured grid voltage against a nominal waveform learned
//! during a disturbance-free warm-up and commands the chain to inject the
//! gap, which rides through sags and swells within the sample they appear.
//!
//! The crate is split along the physics:
//!
//! - [`converter`] — pure switching math: pole/phase voltages, the level
//!   table, and nearest-level modulation.
//! - [`circuit`] — grid source, referred transformer impedances, and the
//!   trapezoidal integrator for the per-phase line/load network.
//! - [`rectifier`] — the nonlinear diode-bridge load variant.
//! - [`control`] — disturbance events, the feed-forward injection law,
//!   sliding RMS, and recovery timing.
//! - [`analysis`] — leak-free whole-cycle spectra, THD, RMS, and
//!   instantaneous three-phase power.
//! - [`scenario`] — the config format and run parameters.
//! - [`sim`] — the end-to-end run tying everything together.
//! - [`csvio`] — deterministic CSV export and import.
//!
//! # Quick start
//!
//! ```
//! use reinject::converter::{enumerate_states, ConverterParams};
//!
//! // the eight levels of a three-stage chain on a 2 V DC link
//! let params = ConverterParams::new(3, 2.0).unwrap();
//! let rows = enumerate_states(&params);
//! assert_eq!(rows.len(), 8);
//! assert_eq!(rows[0].voltage, -7.0);
//! assert_eq!(rows[7].voltage, 7.0);
//! ```
//!
//! Full simulations start from a [`scenario::Scenario`] (defaults describe
//! an 11 kV, 50 Hz grid feeding a 60 Ω ∥ 150 µF load through a 10 mH line,
//! compensated by three stages) and run through [`sim::run_simulation`].
//!
//! # Runnable examples
//!
//! Each major capability has a self-contained program under `examples/`:
//!
//! - `level_table` — enumerate and print the synthesizable levels.
//! - `staircase` — quantize a sine and measure the staircase distortion.
//! - `baseline_run` — simulate the default scenario and summarize it.
//! - `stage_comparison` — distortion of 1-, 2-, and 3-stage chains at equal
//!   synthesizable range.
//! - `voltage_events` — ride through a sag and a swell, with recovery times.
//! - `power_flow` — instantaneous p/q under resistive and capacitive loads.
//! - `harmonics` — spectra of recorded waveforms, written to CSV.
//! - `rectifier_load` — the diode-bridge load variant.
//!
//! Run one with `cargo run --release --example baseline_run`.
//!
//! # Command line
//!
//! The thin `reinject` binary wraps the same library calls:
//!
//! ```text
//! reinject levels [--stages N] [--vdc V]
//! reinject simulate [--config scenario.conf] [--out waves.csv] [--quiet]
//! reinject compare-stages [--config scenario.conf] [--sweep]
//! reinject thd <waves.csv> <column> [--fundamental HZ] [--hmax N]
//! ```
//!
//! Exit codes: 0 success, 2 configuration error, 3 simulation or I/O error,
//! 4 analysis error.

pub mod analysis;
pub mod circuit;
pub mod control;
pub mod converter;
pub mod csvio;
pub mod error;
pub mod rectifier;
pub mod scenario;
pub mod sim;
pub mod signal;

pub use error::{Error, Result};
pub use scenario::Scenario;
pub use sim::{run_simulation, SimOutput};
pub use signal::{SignalBundle, TimeSeries};
