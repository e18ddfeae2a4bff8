//! Switching model of the binary-weighted multi-stage converter.
//!
//! The converter is a chain of `p` two-level bridge stages sharing one DC
//! link. Each stage contributes its pole voltage (`±v_dc/2`) through a
//! series transformer whose secondary is scaled by the stage weight, and the
//! weights double from stage to stage (`1, 2, 4, ...`). Summing the weighted
//! pole voltages gives `2^p` evenly spaced output levels with no zero level:
//! for `p = 3` the ladder is `-7, -5, -3, -1, +1, +3, +5, +7` in units of
//! `v_dc/2`.
//!
//! ```
//! use reinject::converter::{ConverterParams, nearest_state, phase_voltage};
//!
//! let params = ConverterParams::new(3, 2.0).unwrap();
//! let word = nearest_state(3.4, &params);
//! assert_eq!(word.to_string(), "101"); // stage 3 and stage 1 high
//! assert_eq!(phase_voltage(&word, &params), 3.0);
//! ```

use crate::error::{Error, Result};
use crate::signal::TimeSeries;
use std::fmt;
use std::str::FromStr;

/// Largest supported stage count. `2^16` levels is already far beyond any
/// practical reinjection chain and keeps every intermediate in `i64` range.
pub const MAX_STAGES: usize = 16;

/// Static description of the converter: stage count and DC-link voltage.
#[derive(Debug, Clone, PartialEq)]
pub struct ConverterParams {
    stages: usize,
    v_dc: f64,
}

impl ConverterParams {
    /// `stages` must be between 1 and [`MAX_STAGES`]; `v_dc` must be a
    /// positive, finite voltage.
    pub fn new(stages: usize, v_dc: f64) -> Result<Self> {
        if stages == 0 || stages > MAX_STAGES {
            return Err(Error::config(format!(
                "stage count must be between 1 and {MAX_STAGES}, got {stages}"
            )));
        }
        if !(v_dc.is_finite() && v_dc > 0.0) {
            return Err(Error::config(format!(
                "dc-link voltage must be positive and finite, got {v_dc}"
            )));
        }
        Ok(ConverterParams { stages, v_dc })
    }

    pub fn stages(&self) -> usize {
        self.stages
    }

    pub fn v_dc(&self) -> f64 {
        self.v_dc
    }

    /// Binary weight of stage `k` (1-based): `2^(k-1)`.
    pub fn weight(&self, k: usize) -> u64 {
        assert!(k >= 1 && k <= self.stages, "stage index out of range");
        1u64 << (k - 1)
    }

    /// Number of distinct output levels, `2^p`.
    pub fn level_count(&self) -> usize {
        1usize << self.stages
    }

    /// Largest state value, `2^p - 1`; levels span `±max_state · v_dc/2`.
    pub fn max_state(&self) -> i64 {
        (1i64 << self.stages) - 1
    }

    /// Half-step `v_dc/2`, the unit every level is a multiple of.
    pub fn half_step(&self) -> f64 {
        self.v_dc * 0.5
    }

    /// Voltage of the level with (odd) state value `s`.
    pub fn level_voltage(&self, s: i64) -> f64 {
        s as f64 * self.half_step()
    }
}

/// One switching state of the whole chain: an ordered set of `p` binary
/// pole states. Bit `k-1` of `bits` holds stage `k`, so the integer value of
/// `bits` is already the weighted sum of the active stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StateWord {
    bits: u16,
    stages: u8,
}

impl StateWord {
    /// Build from the weighted sum `b` (`0 ..= 2^p - 1`).
    pub fn from_value(b: u16, stages: usize) -> Self {
        assert!(stages >= 1 && stages <= MAX_STAGES);
        assert!((b as u32) < (1u32 << stages), "state value out of range");
        StateWord {
            bits: b,
            stages: stages as u8,
        }
    }

    pub fn stages(&self) -> usize {
        self.stages as usize
    }

    /// Weighted sum of the active stages, `b = Σ bit_k · 2^(k-1)`.
    pub fn value(&self) -> u16 {
        self.bits
    }

    /// Pole state of stage `k` (1-based); `true` means the high rail.
    pub fn stage_on(&self, k: usize) -> bool {
        assert!(k >= 1 && k <= self.stages as usize, "stage index out of range");
        self.bits >> (k - 1) & 1 == 1
    }

    /// Signed state value `2b - (2^p - 1)`: the level in units of `v_dc/2`.
    pub fn state_value(&self) -> i64 {
        2 * self.bits as i64 - ((1i64 << self.stages) - 1)
    }
}

/// Renders highest stage first, so `p = 3` state `101` means stage 3 and
/// stage 1 high; the rightmost character is always stage 1.
impl fmt::Display for StateWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in (1..=self.stages as usize).rev() {
            f.write_str(if self.stage_on(k) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for StateWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let stages = s.len();
        if stages == 0 || stages > MAX_STAGES {
            return Err(Error::config(format!(
                "state word must have 1 to {MAX_STAGES} digits, got {s:?}"
            )));
        }
        let mut bits = 0u16;
        for (i, c) in s.chars().enumerate() {
            // leftmost character is the highest stage
            let k = stages - i;
            match c {
                '1' => bits |= 1 << (k - 1),
                '0' => {}
                other => {
                    return Err(Error::config(format!(
                        "state word may only contain 0 and 1, got {other:?}"
                    )))
                }
            }
        }
        Ok(StateWord {
            bits,
            stages: stages as u8,
        })
    }
}

/// One row of the synthesizable-level table.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelTableRow {
    pub word: StateWord,
    /// Level in units of `v_dc/2`; always odd.
    pub state_value: i64,
    /// Level in volts.
    pub voltage: f64,
}

/// Pole voltage of a single two-level stage: `+v_dc/2` when the pole is on
/// the high rail, `-v_dc/2` otherwise. There is no zero output.
pub fn pole_voltage(on: bool, v_dc: f64) -> f64 {
    if on {
        0.5 * v_dc
    } else {
        -0.5 * v_dc
    }
}

/// Phase voltage synthesized by a whole switching state: the weighted sum of
/// the per-stage pole voltages, `(2b - (2^p - 1)) · v_dc/2`.
pub fn phase_voltage(word: &StateWord, params: &ConverterParams) -> f64 {
    assert_eq!(
        word.stages(),
        params.stages(),
        "state word and converter stage counts differ"
    );
    params.level_voltage(word.state_value())
}

/// Every switching state sorted by output voltage, lowest first. The result
/// has exactly `2^p` rows whose state values are the odd integers from
/// `-(2^p - 1)` to `2^p - 1` and whose voltages are spaced by `v_dc`.
pub fn enumerate_states(params: &ConverterParams) -> Vec<LevelTableRow> {
    (0..params.level_count() as u16)
        .map(|b| {
            let word = StateWord::from_value(b, params.stages());
            LevelTableRow {
                word,
                state_value: word.state_value(),
                voltage: params.level_voltage(word.state_value()),
            }
        })
        .collect()
}

/// Switching state whose output voltage is nearest to `v_ref`.
///
/// Exact ties between two neighboring levels resolve to the higher level,
/// and references beyond the synthesizable range saturate at the end of the
/// ladder. `v_ref` must be finite.
pub fn nearest_state(v_ref: f64, params: &ConverterParams) -> StateWord {
    assert!(v_ref.is_finite(), "modulator reference must be finite");
    let max_s = params.max_state();
    let word_of = |s: i64| StateWord::from_value(((s + max_s) / 2) as u16, params.stages());

    // Saturate early so the candidate arithmetic below stays in range.
    if v_ref >= params.level_voltage(max_s) {
        return word_of(max_s);
    }
    if v_ref <= params.level_voltage(-max_s) {
        return word_of(-max_s);
    }

    // Center candidate from the closed form s = 2·floor(v_ref / v_dc) + 1,
    // then settle the winner by direct distance comparison so the result is
    // the true argmin even when the division rounds at a tie boundary.
    let s0 = 2 * (v_ref / params.v_dc()).floor() as i64 + 1;
    let mut best: Option<(f64, i64)> = None;
    for s in [s0 - 2, s0, s0 + 2] {
        let s = s.clamp(-max_s, max_s);
        let d = (v_ref - params.level_voltage(s)).abs();
        let better = match best {
            None => true,
            Some((bd, bs)) => d < bd || (d == bd && s > bs),
        };
        if better {
            best = Some((d, s));
        }
    }
    word_of(best.expect("candidate list is never empty").1)
}

/// Quantize a reference waveform into the staircase the converter would
/// synthesize, sample by sample. Returns the staircase voltage series and
/// the switching state chosen at every sample.
pub fn quantize_waveform(
    reference: &TimeSeries,
    params: &ConverterParams,
) -> (TimeSeries, Vec<StateWord>) {
    let mut words = Vec::with_capacity(reference.len());
    let mut values = Vec::with_capacity(reference.len());
    for &r in &reference.values {
        let word = nearest_state(r, params);
        words.push(word);
        values.push(phase_voltage(&word, params));
    }
    (
        TimeSeries::new(format!("{}_staircase", reference.name), reference.dt, values),
        words,
    )
}
