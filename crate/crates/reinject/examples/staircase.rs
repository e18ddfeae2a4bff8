//! Quantize a sine reference into the staircase a reinjection chain would
//! synthesize, using nearest-level selection.
//!
//! The chain has no zero level, so the staircase hops between odd multiples
//! of `v_dc/2`; the modulator picks the reachable level closest to the
//! reference at every sample and breaks exact ties toward the higher level.
//! The example prints the dwell pattern over a quarter cycle, the worst
//! instantaneous quantization error (never more than half a step once the
//! reference stays inside the synthesizable range), and the THD of the
//! staircase itself.
//!
//! Run with:
//!
//! ```text
//! cargo run --example staircase
//! ```

use reinject::analysis::{harmonic_spectrum, thd};
use reinject::converter::{quantize_waveform, ConverterParams};
use reinject::signal::TimeSeries;

fn main() -> reinject::Result<()> {
    let stages = 3;
    let v_dc = 2.0;
    let params = ConverterParams::new(stages, v_dc)?;

    // A full-range reference: amplitude equal to the top level, 7 · v_dc/2.
    let amplitude = params.level_voltage(params.max_state());
    let frequency = 50.0;
    let samples_per_cycle = 2000;
    let dt = 1.0 / (frequency * samples_per_cycle as f64);
    let cycles = 2;
    let n = cycles * samples_per_cycle + 1;
    let reference = TimeSeries::new(
        "reference",
        dt,
        (0..n)
            .map(|k| {
                amplitude * (2.0 * std::f64::consts::PI * frequency * dt * k as f64).sin()
            })
            .collect(),
    );

    let (staircase, words) = quantize_waveform(&reference, &params);

    println!(
        "{stages}-stage chain, v_dc = {v_dc} V, reference {amplitude:.1} V peak at {frequency} Hz"
    );
    println!();
    println!("dwell pattern over the first quarter cycle:");
    println!("  t_ms   state  level_V");
    let mut last = None;
    for k in 0..=samples_per_cycle / 4 {
        let word = words[k];
        if last != Some(word) {
            println!(
                "  {:5.2}  {:>5}  {:+7.3}",
                1e3 * staircase.time(k),
                word,
                staircase.values[k]
            );
            last = Some(word);
        }
    }

    let worst = reference
        .values
        .iter()
        .zip(&staircase.values)
        .map(|(r, s)| (r - s).abs())
        .fold(0.0f64, f64::max);
    println!();
    println!(
        "worst quantization error {:.4} V (half a step is {:.4} V)",
        worst,
        params.half_step()
    );
    assert!(
        worst <= params.half_step() + 1e-12,
        "in-range nearest-level error must stay within half a step, got {worst}"
    );

    let spectrum = harmonic_spectrum(&staircase, frequency, 0, cycles, 49)?;
    println!(
        "staircase fundamental {:.4} V, THD through harmonic 49: {:.4} %",
        spectrum.magnitude(1),
        thd(&spectrum)?
    );

    // The same reference through a single stage degenerates to a square wave,
    // the worst staircase there is.
    let square_params = ConverterParams::new(1, 2.0 * amplitude)?;
    let (square, _) = quantize_waveform(&reference, &square_params);
    let square_spectrum = harmonic_spectrum(&square, frequency, 0, cycles, 49)?;
    println!(
        "one-stage square wave of equal reach: THD {:.4} %",
        thd(&square_spectrum)?
    );
    Ok(())
}
