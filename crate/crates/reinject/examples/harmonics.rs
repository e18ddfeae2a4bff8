//! Take a waveform apart with the rectangular-window DFT and verify the
//! spectrum against a closed form.
//!
//! A ±1 square wave is the harshest staircase a converter can emit and its
//! spectrum is known exactly: odd harmonics falling as 1/h, amplitude 4/πh.
//! The example synthesizes one, prints measured-vs-exact magnitudes, shows
//! THD tightening as more harmonics enter the sum, and round-trips the
//! waveform through a CSV file to show the file-based analysis path gives
//! the identical answer.
//!
//! Run with:
//!
//! ```text
//! cargo run --example harmonics
//! ```

use std::f64::consts::PI;

use reinject::analysis::{harmonic_spectrum, thd};
use reinject::csvio::{read_csv, write_csv};
use reinject::scenario::SignalSelection;
use reinject::signal::{SignalBundle, TimeSeries};
use reinject::Result;

fn main() -> Result<()> {
    let frequency = 50.0;
    let h_max = 49;
    // Just enough sampling to resolve harmonic 49 without aliasing slack.
    let samples_per_cycle = 2 * h_max + 2;
    let dt = 1.0 / (frequency * samples_per_cycle as f64);
    let cycles = 10;
    // Built by sample index so each cycle is exactly half high, half low;
    // thresholding sin(ωt) instead would let the sample at the π boundary
    // lean positive and leak a little into the even harmonics.
    let square = TimeSeries::new(
        "square",
        dt,
        (0..cycles * samples_per_cycle)
            .map(|k| {
                if k % samples_per_cycle < samples_per_cycle / 2 {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect(),
    );

    let spectrum = harmonic_spectrum(&square, frequency, 0, cycles, h_max)?;
    println!("±1 square wave, {samples_per_cycle} samples per cycle, {cycles} cycles");
    println!();
    println!("harmonic  measured  exact_4/(pi*h)");
    for h in [1usize, 3, 5, 7, 9, 11, 13] {
        println!(
            "{:>8}  {:8.5}  {:14.5}",
            h,
            spectrum.magnitude(h),
            4.0 / (PI * h as f64)
        );
    }
    for h in [2usize, 4, 6] {
        assert!(
            spectrum.magnitude(h) < 1e-9,
            "even harmonic {h} must vanish, got {}",
            spectrum.magnitude(h)
        );
    }

    println!();
    println!("THD as the harmonic budget grows:");
    for cap in [5usize, 13, 25, 49] {
        let s = harmonic_spectrum(&square, frequency, 0, cycles, cap)?;
        println!("  h <= {:>2}: {:.4} %", cap, thd(&s)?);
    }
    println!("  (the infinite sum converges to sqrt(pi^2/8 - 1) = 48.34 %)");

    // Same computation, but through a CSV file on disk.
    let mut bundle = SignalBundle::new(dt, 0);
    bundle.push("square", square.values.clone())?;
    let path = std::env::temp_dir().join("harmonics_example.csv");
    let path = path.to_str().expect("temp path is valid utf-8");
    write_csv(path, &bundle, &SignalSelection::All)?;
    let table = read_csv(path)?;
    let reread = table.time_series("square")?;
    let from_file = thd(&harmonic_spectrum(&reread, frequency, 0, cycles, h_max)?)?;
    let direct = thd(&spectrum)?;
    println!();
    println!("THD from the in-memory series: {direct:.6} %");
    println!("THD after a CSV round trip:    {from_file:.6} %");
    assert!(
        (direct - from_file).abs() < 1e-9,
        "CSV round trip changed the answer: {direct} vs {from_file}"
    );
    Ok(())
}
