//! End-to-end simulation runs: scenario in, named waveform bundle out.
//!
//! A run happens in two passes. First a short disturbance-free warm-up is
//! simulated with the converter bypassed (no injected voltage, no stage
//! impedance in the loop) to learn the nominal load voltage — its fundamental
//! amplitude and per-phase angles become the compensation target. Then the
//! full run drives the feed-forward chain sample by sample: disturbance
//! events scale the grid EMF, the gap between nominal and grid becomes the
//! injection reference, the modulator picks the nearest synthesizable level,
//! and the network integrates the result with the trapezoidal rule.
//!
//! ```no_run
//! use reinject::scenario::Scenario;
//! use reinject::sim::run_simulation;
//!
//! let out = run_simulation(&Scenario::default()).unwrap();
//! let v_load = out.bundle.get("v_load_a_V").unwrap();
//! assert_eq!(v_load.len(), 250_001);
//! ```

use crate::analysis::{fundamental_phasor, instantaneous_powers};
use crate::circuit::{
    grid_emf, injected_voltage, referred_stage_impedance, CircuitState, NetworkCoeffs,
};
use crate::control::{apply_events, ReferenceSpec};
use crate::converter::{nearest_state, ConverterParams, StateWord};
use crate::error::{Error, Result};
use crate::rectifier::RectifierSim;
use crate::scenario::{Scenario, Weighting};
use crate::signal::{SignalBundle, TimeSeries};

const PHASE: [&str; 3] = ["a", "b", "c"];

/// Everything a finished run hands back.
#[derive(Debug)]
pub struct SimOutput {
    /// All recorded waveforms on one time base.
    pub bundle: SignalBundle,
    /// The nominal load-voltage target learned during warm-up.
    pub reference: ReferenceSpec,
    /// Total series resistance in the compensated loop, ohms.
    pub r_tot: f64,
    /// Total series inductance in the compensated loop, henries.
    pub l_tot: f64,
}

/// Simulate one scenario end to end.
///
/// The bundle holds, in recording order: grid EMF per phase (`v_grid_*_V`),
/// line current per phase (`i_grid_*_A`), load voltage per phase
/// (`v_load_*_V`), total injected EMF per phase (`v_inj_*_V`), the series
/// compensator's terminal voltage per phase (`v_saf_*_V`, injected EMF minus
/// the stage impedance drops), per-stage secondary EMFs (`v_stage{k}_*_V`,
/// only while the converter is enabled), instantaneous powers `p_W` and
/// `q_var`, and — for the diode-bridge load variant — the DC bus voltage
/// `v_rect_dc_V`.
pub fn run_simulation(sc: &Scenario) -> Result<SimOutput> {
    sc.validate()?;
    let reference = learn_reference(sc)?;

    let f = sc.grid.frequency_hz;
    let dt = sc.dt;
    let n = sc.total_samples();
    let stages = sc.build_stages();
    let (r_stages, l_stages) = if sc.converter_enabled {
        let (r, l) = referred_stage_impedance(&sc.stage, f);
        (r * sc.stages as f64, l * sc.stages as f64)
    } else {
        (0.0, 0.0)
    };
    let r_tot = sc.line.r_ohm + r_stages;
    let l_tot = sc.line.l_henry + l_stages;

    // --- drive synthesis: grid EMF, injection reference, modulation -------
    let params = ConverterParams::new(sc.stages, sc.v_dc)?;
    let mut v_grid: [Vec<f64>; 3] = three(n);
    let mut v_inj: [Vec<f64>; 3] = three(n);
    let mut u: [Vec<f64>; 3] = three(n);
    let mut v_stage: Vec<[Vec<f64>; 3]> = if sc.converter_enabled {
        (0..sc.stages).map(|_| three(n)).collect()
    } else {
        Vec::new()
    };
    let mut max_ref = 0.0f64;
    for k in 0..n {
        let t = k as f64 * dt;
        let scale = apply_events(&sc.events, t);
        let e = grid_emf(&sc.grid, t, scale);
        for ph in 0..3 {
            v_grid[ph][k] = e[ph];
            if sc.converter_enabled {
                let want = reference.value(t, ph) - e[ph];
                max_ref = max_ref.max(want.abs());
                let word = match sc.weighting {
                    Weighting::Binary => nearest_state(want, &params),
                    Weighting::Identical => nearest_identical_state(want, &params),
                };
                let (per_stage, total) = injected_voltage(&word, &stages, sc.v_dc);
                for (j, v) in per_stage.into_iter().enumerate() {
                    v_stage[j][ph][k] = v;
                }
                v_inj[ph][k] = total;
                u[ph][k] = e[ph] + total;
            } else {
                u[ph][k] = e[ph];
            }
        }
    }
    let reach = sc.synthesizable_peak();
    if sc.converter_enabled && max_ref > 2.0 * reach {
        return Err(Error::simulation(format!(
            "injection reference peaks at {max_ref:.1} V, more than twice the \
             {reach:.1} V the chain can synthesize; the scenario is likely \
             misconfigured"
        )));
    }

    // --- network integration ----------------------------------------------
    let mut i: [Vec<f64>; 3] = three(n);
    let mut v_load: [Vec<f64>; 3] = three(n);
    let mut didt: [Vec<f64>; 3] = three(n);
    let mut v_rect: Option<Vec<f64>> = None;
    let mut kvl_residual = None;

    if sc.load.rectifier {
        let bridge = RectifierSim::new(r_tot, l_tot, sc.load.r_ohm, sc.load.c_farad, dt);
        let run = bridge.run(&u);
        for ph in 0..3 {
            for k in 0..n {
                let (ik, vk) = (run.i[ph][k], run.v_term[ph][k]);
                if !(ik.is_finite() && vk.is_finite()) {
                    return Err(Error::simulation(format!(
                        "non-finite state at t = {} s, phase {}: i = {ik}, v = {vk}",
                        k as f64 * dt,
                        PHASE[ph]
                    )));
                }
            }
        }
        i = run.i;
        v_load = run.v_term;
        didt = run.didt;
        v_rect = Some(run.v_rect);
    } else {
        let coeffs = NetworkCoeffs::new(r_tot, l_tot, sc.load.r_ohm, sc.load.c_farad, dt)?;
        let mut state = CircuitState::zero();
        let mut max_res = 0.0f64;
        for ph in 0..3 {
            didt[ph][0] = coeffs.didt(0.0, 0.0, u[ph][0]);
        }
        for k in 0..n - 1 {
            let u_now = [u[0][k], u[1][k], u[2][k]];
            let u_next = [u[0][k + 1], u[1][k + 1], u[2][k + 1]];
            let next = coeffs.step(&state, u_now, u_next);
            for ph in 0..3 {
                if !(next.i[ph].is_finite() && next.v_cap[ph].is_finite()) {
                    return Err(Error::simulation(format!(
                        "non-finite state at t = {} s, phase {}: i = {}, v_cap = {}",
                        next.t, PHASE[ph], next.i[ph], next.v_cap[ph]
                    )));
                }
                // the trapezoidal update must satisfy the network equation
                // at the step midpoint; track the worst violation
                let lhs = l_tot * (next.i[ph] - state.i[ph]) / dt;
                let rhs = 0.5
                    * ((u_now[ph] - r_tot * state.i[ph] - state.v_cap[ph])
                        + (u_next[ph] - r_tot * next.i[ph] - next.v_cap[ph]));
                max_res = max_res.max((lhs - rhs).abs());

                i[ph][k + 1] = next.i[ph];
                v_load[ph][k + 1] = next.v_cap[ph];
                didt[ph][k + 1] = coeffs.didt(next.i[ph], next.v_cap[ph], u_next[ph]);
            }
            state = next;
        }
        kvl_residual = Some(max_res);
    }

    // --- derived signals ----------------------------------------------------
    let mut v_saf: [Vec<f64>; 3] = three(n);
    for ph in 0..3 {
        for k in 0..n {
            v_saf[ph][k] = v_inj[ph][k] - r_stages * i[ph][k] - l_stages * didt[ph][k];
        }
    }

    let vg: Vec<TimeSeries> = v_grid
        .into_iter()
        .enumerate()
        .map(|(ph, v)| TimeSeries::new(format!("v_grid_{}_V", PHASE[ph]), dt, v))
        .collect();
    let ig: Vec<TimeSeries> = i
        .into_iter()
        .enumerate()
        .map(|(ph, v)| TimeSeries::new(format!("i_grid_{}_A", PHASE[ph]), dt, v))
        .collect();
    let powers = instantaneous_powers([&vg[0], &vg[1], &vg[2]], [&ig[0], &ig[1], &ig[2]])?;

    // --- assembly ------------------------------------------------------------
    let mut bundle = SignalBundle::new(dt, sc.hash_u64());
    for ts in vg.into_iter().chain(ig) {
        let TimeSeries { name, values, .. } = ts;
        bundle.push(name, values)?;
    }
    for (ph, v) in v_load.into_iter().enumerate() {
        bundle.push(format!("v_load_{}_V", PHASE[ph]), v)?;
    }
    for (ph, v) in v_inj.into_iter().enumerate() {
        bundle.push(format!("v_inj_{}_V", PHASE[ph]), v)?;
    }
    for (ph, v) in v_saf.into_iter().enumerate() {
        bundle.push(format!("v_saf_{}_V", PHASE[ph]), v)?;
    }
    for (j, per_phase) in v_stage.drain(..).enumerate() {
        for (ph, v) in per_phase.into_iter().enumerate() {
            bundle.push(format!("v_stage{}_{}_V", j + 1, PHASE[ph]), v)?;
        }
    }
    bundle.push("p_W", powers.p.values)?;
    bundle.push("q_var", powers.q.values)?;
    if let Some(v) = v_rect {
        bundle.push("v_rect_dc_V", v)?;
    }
    bundle.kvl_residual = kvl_residual;

    Ok(SimOutput {
        bundle,
        reference,
        r_tot,
        l_tot,
    })
}

/// Learn the nominal load voltage from a disturbance-free bypass run.
///
/// The converter chain is removed entirely — the load sees the grid through
/// the line impedance alone — and the fundamental phasor of each phase's
/// load voltage over the last warm-up cycle defines the compensation target.
fn learn_reference(sc: &Scenario) -> Result<ReferenceSpec> {
    let f = sc.grid.frequency_hz;
    let dt = sc.dt;
    let spc = sc.samples_per_cycle();
    let n = sc.warmup_cycles as usize * spc + 1;

    let mut u: [Vec<f64>; 3] = three(n);
    for k in 0..n {
        let e = grid_emf(&sc.grid, k as f64 * dt, 1.0);
        for ph in 0..3 {
            u[ph][k] = e[ph];
        }
    }

    let mut v_load: [Vec<f64>; 3] = three(n);
    if sc.load.rectifier {
        let bridge =
            RectifierSim::new(sc.line.r_ohm, sc.line.l_henry, sc.load.r_ohm, sc.load.c_farad, dt);
        let run = bridge.run(&u);
        v_load = run.v_term;
    } else {
        let coeffs = NetworkCoeffs::new(
            sc.line.r_ohm,
            sc.line.l_henry,
            sc.load.r_ohm,
            sc.load.c_farad,
            dt,
        )?;
        let mut state = CircuitState::zero();
        for k in 0..n - 1 {
            let u_now = [u[0][k], u[1][k], u[2][k]];
            let u_next = [u[0][k + 1], u[1][k + 1], u[2][k + 1]];
            state = coeffs.step(&state, u_now, u_next);
            for ph in 0..3 {
                if !(state.i[ph].is_finite() && state.v_cap[ph].is_finite()) {
                    return Err(Error::simulation(format!(
                        "non-finite warm-up state at t = {} s, phase {}: i = {}, v_cap = {}",
                        state.t, PHASE[ph], state.i[ph], state.v_cap[ph]
                    )));
                }
                v_load[ph][k + 1] = state.v_cap[ph];
            }
        }
    }

    let last_cycle = sc.warmup_cycles as usize - 1;
    let mut magnitudes = [0.0f64; 3];
    let mut offsets = [0.0f64; 3];
    for ph in 0..3 {
        let ts = TimeSeries::new(format!("warmup_{}", PHASE[ph]), dt, std::mem::take(&mut v_load[ph]));
        let (m, theta) = fundamental_phasor(&ts, f, last_cycle)?;
        magnitudes[ph] = m;
        offsets[ph] = theta;
    }
    let mean_peak = (magnitudes[0] + magnitudes[1] + magnitudes[2]) / 3.0;
    if !(mean_peak.is_finite() && mean_peak > 0.0) {
        return Err(Error::simulation(format!(
            "warm-up produced no usable nominal voltage (fundamental peak {mean_peak})"
        )));
    }
    Ok(ReferenceSpec {
        rms: mean_peak / 2f64.sqrt(),
        frequency_hz: f,
        offsets,
    })
}

/// Nearest synthesizable level for a chain of identical (unit-ratio) stages:
/// with `m` of `p` stages on, the chain injects `(2m − p)·v_dc/2`, so only
/// `p + 1` levels exist. Ties pick the higher level; the word turns on the
/// lowest-indexed stages.
fn nearest_identical_state(v_ref: f64, params: &ConverterParams) -> StateWord {
    let p = params.stages();
    let mut best_m = 0usize;
    let mut best_level = -(p as f64) * params.half_step();
    let mut best_d = (v_ref - best_level).abs();
    for m in 1..=p {
        let level = (2.0 * m as f64 - p as f64) * params.half_step();
        let d = (v_ref - level).abs();
        if d < best_d || (d == best_d && level > best_level) {
            best_m = m;
            best_level = level;
            best_d = d;
        }
    }
    StateWord::from_value(((1u32 << best_m) - 1) as u16, p)
}

/// Three equal-length zero-filled channels.
fn three(n: usize) -> [Vec<f64>; 3] {
    [vec![0.0; n], vec![0.0; n], vec![0.0; n]]
}

#[cfg(test)]
mod tests {
    use super::*;

    /// A short, cheap scenario for unit-level checks: 0.2 s at the default
    /// step, analysis window kept inside the record.
    fn short_scenario() -> Scenario {
        let mut sc = Scenario::default();
        sc.duration_s = 0.2;
        sc.warmup_cycles = 8;
        sc.analysis_start_cycle = 5;
        sc.analysis_cycles = 4;
        sc
    }

    #[test]
    fn bundle_holds_the_documented_signal_set() {
        let out = run_simulation(&short_scenario()).unwrap();
        let names = out.bundle.names();
        let expected = [
            "v_grid_a_V",
            "v_grid_b_V",
            "v_grid_c_V",
            "i_grid_a_A",
            "i_grid_b_A",
            "i_grid_c_A",
            "v_load_a_V",
            "v_load_b_V",
            "v_load_c_V",
            "v_inj_a_V",
            "v_inj_b_V",
            "v_inj_c_V",
            "v_saf_a_V",
            "v_saf_b_V",
            "v_saf_c_V",
            "v_stage1_a_V",
            "v_stage1_b_V",
            "v_stage1_c_V",
            "v_stage2_a_V",
            "v_stage2_b_V",
            "v_stage2_c_V",
            "v_stage3_a_V",
            "v_stage3_b_V",
            "v_stage3_c_V",
            "p_W",
            "q_var",
        ];
        assert_eq!(names, expected, "signal set or order changed");
        assert_eq!(out.bundle.samples(), 20_001, "0.2 s at 10 us per sample");
        assert!(out.bundle.kvl_residual.is_some());
    }

    #[test]
    fn injected_emf_is_exactly_the_sum_of_stage_emfs() {
        let out = run_simulation(&short_scenario()).unwrap();
        let total = out.bundle.get("v_inj_a_V").unwrap();
        let s1 = out.bundle.get("v_stage1_a_V").unwrap();
        let s2 = out.bundle.get("v_stage2_a_V").unwrap();
        let s3 = out.bundle.get("v_stage3_a_V").unwrap();
        for k in 0..total.len() {
            let sum = s1.values[k] + s2.values[k] + s3.values[k];
            assert_eq!(sum, total.values[k], "decomposition broke at sample {k}");
        }
    }

    #[test]
    fn disabled_converter_leaves_no_injection_signals() {
        let mut sc = short_scenario();
        sc.converter_enabled = false;
        let out = run_simulation(&sc).unwrap();
        assert!(out.bundle.get("v_stage1_a_V").is_none());
        let inj = out.bundle.get("v_inj_a_V").unwrap();
        assert!(inj.values.iter().all(|&v| v == 0.0));
        let saf = out.bundle.get("v_saf_a_V").unwrap();
        assert!(saf.values.iter().all(|&v| v == 0.0));
        assert_eq!(out.r_tot, sc.line.r_ohm, "bypass must remove stage resistance");
        assert_eq!(out.l_tot, sc.line.l_henry, "bypass must remove stage inductance");
    }

    #[test]
    fn identical_weighting_uses_only_p_plus_one_levels() {
        let mut sc = short_scenario();
        sc.weighting = Weighting::Identical;
        let out = run_simulation(&sc).unwrap();
        let inj = out.bundle.get("v_inj_a_V").unwrap();
        let mut seen: Vec<i64> = Vec::new();
        for &v in &inj.values {
            let half_steps = (v / (sc.v_dc / 2.0)).round() as i64;
            if !seen.contains(&half_steps) {
                seen.push(half_steps);
            }
        }
        seen.sort();
        assert_eq!(seen, vec![-3, -1, 1, 3], "identical 3-stage chain levels");
    }

    #[test]
    fn nearest_identical_state_picks_the_closest_level_with_ties_up() {
        let params = ConverterParams::new(3, 2.0).unwrap();
        // levels at -3, -1, +1, +3
        let cases = [
            (-10.0, 0b000, "saturates low"),
            (-1.9, 0b001, "closest to -1"),
            (0.0, 0b011, "tie at 0 resolves to +1"),
            (2.0, 0b111, "tie at 2 resolves to +3"),
            (2.1, 0b111, "closest to +3"),
            (10.0, 0b111, "saturates high"),
        ];
        for (v_ref, want, why) in cases {
            let word = nearest_identical_state(v_ref, &params);
            assert_eq!(word.value(), want, "{why}: ref {v_ref}");
        }
    }

    #[test]
    fn warm_up_reference_matches_the_bypass_steady_state() {
        // the learned nominal must equal the steady-state voltage gain of
        // line + RC load at the fundamental, computed here by phasors
        let sc = short_scenario();
        let reference = learn_reference(&sc).unwrap();
        let w = 2.0 * std::f64::consts::PI * sc.grid.frequency_hz;
        // load admittance 1/R + jwC, then the divider against the line
        let (gl, bl) = (1.0 / sc.load.r_ohm, w * sc.load.c_farad);
        let (zr, zi) = (sc.line.r_ohm, w * sc.line.l_henry);
        // H = Z_load / (Z_load + Z_line) with Z_load = 1/(gl + j bl)
        let den_re = 1.0 + zr * gl - zi * bl;
        let den_im = zr * bl + zi * gl;
        let gain = 1.0 / den_re.hypot(den_im);
        let expect_rms = sc.grid.phase_peak() * gain / 2f64.sqrt();
        let rel = (reference.rms - expect_rms).abs() / expect_rms;
        assert!(
            rel < 2e-4,
            "learned rms {} vs phasor prediction {expect_rms}",
            reference.rms
        );
    }

    #[test]
    fn far_out_of_range_references_are_rejected() {
        let mut sc = short_scenario();
        // a 90% sag demands injection near the full nominal voltage,
        // far beyond twice the synthesizable range
        sc.events.push(crate::control::Event {
            kind: crate::control::EventKind::Sag,
            start: 0.05,
            end: Some(0.15),
            magnitude: 0.1,
        });
        let err = run_simulation(&sc).unwrap_err();
        assert_eq!(err.exit_code(), 3, "range rejection is a simulation error");
        assert!(err.to_string().contains("synthesize"), "{err}");
    }

    #[test]
    fn rectifier_scenarios_emit_the_dc_bus_signal() {
        let mut sc = short_scenario();
        sc.load.rectifier = true;
        let out = run_simulation(&sc).unwrap();
        let dc = out.bundle.get("v_rect_dc_V").unwrap();
        assert!(out.bundle.kvl_residual.is_none(), "no linear residual for the bridge");
        // after the start-up the DC bus sits near the line-to-line peak of
        // the compensated voltage; just require it charged well above zero
        let tail = &dc.values[dc.len() / 2..];
        let mean: f64 = tail.iter().sum::<f64>() / tail.len() as f64;
        assert!(mean > 10_000.0, "dc bus mean {mean} suspiciously low");
    }
}
