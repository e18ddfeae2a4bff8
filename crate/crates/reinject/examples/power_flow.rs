//! Check the instantaneous power computation against textbook balanced-load
//! behavior.
//!
//! For a balanced three-phase set, instantaneous real power is constant (no
//! pulsating component) and the imaginary power measures the load's phase:
//! a nearly resistive load draws almost no reactive power, while a load with
//! a big shunt capacitor bank draws leading current and its mean `q` turns
//! negative. Both cases run with the converter bypassed so only line and
//! load shape the result.
//!
//! Run with:
//!
//! ```text
//! cargo run --release --example power_flow
//! ```

use reinject::scenario::Scenario;
use reinject::{run_simulation, Result};

struct PowerSummary {
    p_mean: f64,
    p_ripple: f64,
    q_mean: f64,
}

fn run_case(c_farad: f64, l_line: f64) -> Result<PowerSummary> {
    let mut scenario = Scenario::default();
    scenario.converter_enabled = false;
    scenario.load.c_farad = c_farad;
    scenario.line.l_henry = l_line;
    scenario.duration_s = 0.5;
    scenario.analysis_start_cycle = 10;
    scenario.analysis_cycles = 10;

    let out = run_simulation(&scenario)?;
    let spc = scenario.samples_per_cycle();
    let a = scenario.analysis_start_cycle as usize * spc;
    let b = a + scenario.analysis_cycles as usize * spc;
    let window = |name: &str| -> (f64, f64, f64) {
        let s = out.bundle.get(name).expect("power series recorded");
        let v = &s.values[a..=b];
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (mean, min, max)
    };
    let (p_mean, p_min, p_max) = window("p_W");
    let (q_mean, _, _) = window("q_var");
    Ok(PowerSummary {
        p_mean,
        p_ripple: (p_max - p_min) / p_mean,
        q_mean,
    })
}

fn main() -> Result<()> {
    println!("balanced grid straight into the load, converter bypassed");
    println!();

    // A stiff feeder and a token 0.1 µF of load capacitance: the load is
    // effectively the 60 Ω resistor alone.
    let resistive = run_case(1e-7, 1e-4)?;
    println!("nearly resistive load (0.1 µF, 0.1 mH line):");
    println!("  mean p {:10.1} kW", 1e-3 * resistive.p_mean);
    println!(
        "  p ripple {:.4} % of mean (balanced load -> constant power)",
        100.0 * resistive.p_ripple
    );
    println!(
        "  mean q {:10.1} kvar ({:.4} % of p)",
        1e-3 * resistive.q_mean,
        100.0 * resistive.q_mean.abs() / resistive.p_mean
    );
    assert!(
        resistive.p_ripple < 0.01,
        "balanced resistive power should be flat, ripple {:.4} %",
        100.0 * resistive.p_ripple
    );

    println!();

    // The stock 150 µF bank: at 50 Hz that is -j21.2 Ω of shunt reactance
    // against 60 Ω of resistance, so the current leads and q goes negative.
    let capacitive = run_case(150e-6, 10e-3)?;
    println!("capacitive load (150 µF bank, 10 mH line):");
    println!("  mean p {:10.1} kW", 1e-3 * capacitive.p_mean);
    println!("  mean q {:10.1} kvar", 1e-3 * capacitive.q_mean);
    assert!(
        capacitive.q_mean < 0.0,
        "leading current must show as negative q, got {} var",
        capacitive.q_mean
    );
    println!();
    println!("sign convention: q > 0 for lagging (inductive) current");
    Ok(())
}
