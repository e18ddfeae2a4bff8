//! Per-phase electrical model of the grid-to-load link.
//!
//! Each phase is a series loop: the grid EMF behind the line impedance and
//! the referred impedances of the series transformer stages, driving the
//! load. The stage secondaries add their EMFs directly into the loop, so
//! the whole series path reduces to one lumped `R_tot`/`L_tot` pair with a
//! combined source `v_grid + v_inj`. The default load is a parallel RC
//! branch per phase; integration uses the trapezoidal rule, which is
//! A-stable, second-order, and preserves the energy-dissipation identity of
//! the circuit exactly.

use crate::converter::{pole_voltage, StateWord};
use crate::error::{Error, Result};

/// Ideal three-phase source: line-to-line RMS voltage, frequency, and the
/// phase angle of each phase (defaults are 0, -120 deg, +120 deg).
#[derive(Debug, Clone, PartialEq)]
pub struct GridSource {
    pub v_rms_ll: f64,
    pub frequency_hz: f64,
    pub offsets: [f64; 3],
}

impl GridSource {
    pub fn new(v_rms_ll: f64, frequency_hz: f64) -> Self {
        let third = 2.0 * std::f64::consts::PI / 3.0;
        GridSource {
            v_rms_ll,
            frequency_hz,
            offsets: [0.0, -third, third],
        }
    }

    /// Peak of the phase-to-neutral EMF, `v_rms_ll · √2 / √3`.
    pub fn phase_peak(&self) -> f64 {
        self.v_rms_ll * 2f64.sqrt() / 3f64.sqrt()
    }
}

/// Grid EMF of all three phases at time `t`, with the instantaneous
/// amplitude scale (1 when no disturbance is active) applied.
pub fn grid_emf(src: &GridSource, t: f64, scale: f64) -> [f64; 3] {
    let peak = scale * src.phase_peak();
    let w = 2.0 * std::f64::consts::PI * src.frequency_hz;
    [
        peak * (w * t + src.offsets[0]).sin(),
        peak * (w * t + src.offsets[1]).sin(),
        peak * (w * t + src.offsets[2]).sin(),
    ]
}

/// One series transformer stage.
///
/// The winding impedance is given per unit on the stage base (`v_base`,
/// `s_base`) per winding; both windings carry the same per-unit values, so
/// the series impedance referred to the line is twice the per-unit value
/// times the base impedance. `ratio` scales the stage's injected EMF; the
/// binary-weighted chain uses 1, 2, 4, ... while the identical-transformer
/// variant uses 1 for every stage.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformerStage {
    pub r_pu: f64,
    pub x_pu: f64,
    pub v_base: f64,
    pub s_base: f64,
    pub ratio: f64,
}

/// Series resistance and inductance of one stage referred to the line side:
/// `R = 2·r_pu·Z_base` and `L = 2·x_pu·Z_base / (2π f)` with
/// `Z_base = v_base² / s_base`.
pub fn referred_stage_impedance(stage: &TransformerStage, frequency_hz: f64) -> (f64, f64) {
    assert!(frequency_hz > 0.0, "frequency must be positive");
    assert!(stage.v_base > 0.0 && stage.s_base > 0.0, "stage bases must be positive");
    let z_base = stage.v_base * stage.v_base / stage.s_base;
    let r = 2.0 * stage.r_pu * z_base;
    let l = 2.0 * stage.x_pu * z_base / (2.0 * std::f64::consts::PI * frequency_hz);
    (r, l)
}

/// Series line impedance between the grid and the injection point.
#[derive(Debug, Clone, PartialEq)]
pub struct LineParams {
    pub r_ohm: f64,
    pub l_henry: f64,
}

/// Load at the receiving end: a resistor in parallel with a capacitor,
/// either wired per phase (the default) or behind a three-phase diode
/// bridge when `rectifier` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadParams {
    pub r_ohm: f64,
    pub c_farad: f64,
    pub rectifier: bool,
}

/// Per-stage and total EMF injected in series with one phase for a given
/// switching state: stage `k` contributes `ratio_k · (±v_dc/2)`.
pub fn injected_voltage(word: &StateWord, stages: &[TransformerStage], v_dc: f64) -> (Vec<f64>, f64) {
    assert_eq!(
        word.stages(),
        stages.len(),
        "state word and stage list lengths differ"
    );
    let per_stage: Vec<f64> = stages
        .iter()
        .enumerate()
        .map(|(i, s)| s.ratio * pole_voltage(word.stage_on(i + 1), v_dc))
        .collect();
    let total = per_stage.iter().sum();
    (per_stage, total)
}

/// Dynamic state of the linear per-phase circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitState {
    /// Time of the state in seconds.
    pub t: f64,
    /// Line current of each phase, amperes.
    pub i: [f64; 3],
    /// Load capacitor voltage of each phase, volts.
    pub v_cap: [f64; 3],
}

impl CircuitState {
    pub fn zero() -> Self {
        CircuitState {
            t: 0.0,
            i: [0.0; 3],
            v_cap: [0.0; 3],
        }
    }

    /// Total stored energy, `Σ (½·L·i² + ½·C·v²)`, joules.
    pub fn energy(&self, l_tot: f64, c: f64) -> f64 {
        let mut e = 0.0;
        for ph in 0..3 {
            e += 0.5 * l_tot * self.i[ph] * self.i[ph];
            e += 0.5 * c * self.v_cap[ph] * self.v_cap[ph];
        }
        e
    }
}

/// Precomputed trapezoidal step coefficients for the linear network
///
/// ```text
/// L_tot · di/dt = u - R_tot·i - v_cap        u = v_grid + v_inj
/// C · dv_cap/dt = i - v_cap / R_load
/// ```
///
/// Advancing one step solves the implicit 2x2 system per phase in closed
/// form, which keeps the integrator A-stable at any step size.
#[derive(Debug, Clone)]
pub struct NetworkCoeffs {
    pub r_tot: f64,
    pub l_tot: f64,
    pub r_load: f64,
    pub c_load: f64,
    pub dt: f64,
    a: f64,    // dt / (2 L)
    b: f64,    // dt / (2 C)
    a1: f64,   // 1 + a R_tot
    a2: f64,   // 1 + b / R_load
    inv_det: f64,
}

impl NetworkCoeffs {
    pub fn new(r_tot: f64, l_tot: f64, r_load: f64, c_load: f64, dt: f64) -> Result<Self> {
        if !(l_tot > 0.0 && l_tot.is_finite()) {
            return Err(Error::simulation(format!(
                "total series inductance must be positive, got {l_tot}"
            )));
        }
        if !(c_load > 0.0 && c_load.is_finite()) {
            return Err(Error::simulation(format!(
                "load capacitance must be positive, got {c_load}"
            )));
        }
        if !(r_load > 0.0 && r_load.is_finite()) {
            return Err(Error::simulation(format!(
                "load resistance must be positive, got {r_load}"
            )));
        }
        if !(r_tot >= 0.0 && r_tot.is_finite()) {
            return Err(Error::simulation(format!(
                "series resistance must be non-negative, got {r_tot}"
            )));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::simulation(format!("time step must be positive, got {dt}")));
        }
        let a = dt / (2.0 * l_tot);
        let b = dt / (2.0 * c_load);
        let a1 = 1.0 + a * r_tot;
        let a2 = 1.0 + b / r_load;
        Ok(NetworkCoeffs {
            r_tot,
            l_tot,
            r_load,
            c_load,
            dt,
            a,
            b,
            a1,
            a2,
            inv_det: 1.0 / (a1 * a2 + a * b),
        })
    }

    /// One trapezoidal step for all three phases. `u_now` and `u_next` are
    /// the combined source voltages (`v_grid + v_inj`) at the start and end
    /// of the interval.
    pub fn step(&self, state: &CircuitState, u_now: [f64; 3], u_next: [f64; 3]) -> CircuitState {
        let mut next = CircuitState {
            t: state.t + self.dt,
            i: [0.0; 3],
            v_cap: [0.0; 3],
        };
        for ph in 0..3 {
            let i = state.i[ph];
            let v = state.v_cap[ph];
            let c1 = (1.0 - self.a * self.r_tot) * i - self.a * v
                + self.a * (u_now[ph] + u_next[ph]);
            let c2 = (1.0 - self.b / self.r_load) * v + self.b * i;
            next.i[ph] = (c1 * self.a2 - self.a * c2) * self.inv_det;
            next.v_cap[ph] = (c2 * self.a1 + self.b * c1) * self.inv_det;
        }
        next
    }

    /// Continuous-time current derivative at a sampled state, from the loop
    /// equation itself.
    pub fn didt(&self, i: f64, v_cap: f64, u: f64) -> f64 {
        (u - self.r_tot * i - v_cap) / self.l_tot
    }
}
