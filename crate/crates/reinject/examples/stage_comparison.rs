//! Show how load-voltage distortion falls as stages are added while the
//! chain's reachable peak is held constant.
//!
//! Comparing stage counts fairly means separating *resolution* from *range*:
//! each run here re-scales `v_dc` so the chain tops out at the same peak
//! voltage, leaving the number of levels as the only difference. One stage
//! injects a square wave; three binary-weighted stages inject an eight-level
//! staircase whose distortion is more than an order of magnitude lower.
//!
//! Run with:
//!
//! ```text
//! cargo run --release --example stage_comparison
//! ```

use reinject::analysis::{harmonic_spectrum, thd};
use reinject::scenario::Scenario;
use reinject::{run_simulation, Result};

fn main() -> Result<()> {
    let reach = Scenario::default().synthesizable_peak();
    println!("chain reach held at ±{reach:.1} V while stages vary");
    println!();
    println!("stages  levels  v_dc_V    THD_%");

    let mut thds = Vec::new();
    for stages in 1..=3usize {
        let mut scenario = Scenario::default();
        scenario.stages = stages;
        // 2^p - 1 half-steps of v_dc/2 reach the peak, so scale v_dc to match.
        let total_ratio = (1u64 << stages) - 1;
        scenario.v_dc = 2.0 * reach / total_ratio as f64;
        scenario.duration_s = 0.5;
        scenario.analysis_start_cycle = 10;
        scenario.analysis_cycles = 10;

        let out = run_simulation(&scenario)?;
        let series = out
            .bundle
            .get("v_load_a_V")
            .expect("load voltage is always recorded");
        let spectrum = harmonic_spectrum(
            series,
            scenario.grid.frequency_hz,
            scenario.analysis_start_cycle as usize,
            scenario.analysis_cycles as usize,
            scenario.h_max,
        )?;
        let t = thd(&spectrum)?;
        println!(
            "{:>6}  {:>6}  {:8.2}  {:7.4}",
            stages,
            1u64 << stages,
            scenario.v_dc,
            t
        );
        thds.push(t);
    }

    let first = thds.first().copied().unwrap_or(f64::NAN);
    let last = thds.last().copied().unwrap_or(f64::NAN);
    println!();
    println!(
        "three stages cut distortion to {:.1} % of the single-stage square wave",
        100.0 * last / first
    );
    assert!(
        last < first,
        "more levels must lower distortion: {last} % vs {first} %"
    );
    Ok(())
}
