//! Enumerate every switching state of a binary-weighted reinjection chain
//! and the phase voltage each one synthesizes.
//!
//! With `p` stages weighted 1, 2, 4, … the chain reaches every odd multiple
//! of `v_dc/2` between `-(2^p - 1)` and `+(2^p - 1)` — `2^p` evenly spaced
//! levels with no zero output and no redundant states. The table below prints
//! the three-stage chain twice, once in level units and once in volts, and
//! then contrasts it with three *identically* weighted stages, which reach
//! only `p + 1` distinct levels.
//!
//! Run with:
//!
//! ```text
//! cargo run --example level_table
//! ```

use reinject::converter::{enumerate_states, ConverterParams};

fn main() -> reinject::Result<()> {
    let v_dc = 2.0;
    let params = ConverterParams::new(3, v_dc)?;

    println!("three stages, weights 1/2/4, v_dc = {v_dc} V per stage");
    println!("(rightmost state digit is stage 1, the least-significant stage)");
    println!();
    println!("state  level  voltage_V");
    for row in enumerate_states(&params) {
        println!("{:>5}  {:>5}  {:>9.3}", row.word, row.state_value, row.voltage);
    }

    let levels = params.level_count();
    let step = v_dc; // adjacent levels differ by one full dc link
    println!();
    println!(
        "{} levels spanning {:+.3} V to {:+.3} V in steps of {:.3} V",
        levels,
        params.level_voltage(-params.max_state()),
        params.level_voltage(params.max_state()),
        step,
    );

    // The same three bridges with identical 1:1:1 weighting: switching m of
    // them high gives (2m - 3) · v_dc/2, so only four distinct outputs exist
    // and most of the 2^3 states are redundant.
    println!();
    println!("identically weighted, the same hardware reaches only these levels:");
    for m in 0..=3u32 {
        let level = 2.0 * f64::from(m) - 3.0;
        println!(
            "  {m} of 3 stages high -> {:+.1} * v_dc/2 = {:+.3} V",
            level,
            level * v_dc / 2.0
        );
    }
    println!();
    println!(
        "binary weighting turns p stages into 2^p levels instead of p + 1, \
         which is where the waveform quality comes from"
    );
    Ok(())
}
