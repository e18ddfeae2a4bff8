//! Scenario description: every knob of a simulation run in one struct, a
//! plain-text config format to set them, and a content hash that fingerprints
//! the run for reproducibility checks.
//!
//! The config format is line oriented: one `key = value` pair per line,
//! `#` starts a comment, blank lines are ignored. Keys are dotted paths
//! (`load.r_ohm = 60`), disturbance events use an indexed form
//! (`events[0].kind = sag`). Unknown keys, duplicate keys, and malformed
//! values are rejected with the offending line number rather than silently
//! ignored — a misspelled key must never run a subtly different scenario.
//!
//! ```
//! use reinject::scenario::Scenario;
//!
//! let text = "
//!     load.r_ohm = 45        # stiffer load than the default
//!     events[0].kind = sag
//!     events[0].start_s = 0.1
//!     events[0].end_s = 0.4
//!     events[0].magnitude = 0.7
//! ";
//! let sc = Scenario::from_config_text(text).unwrap();
//! assert_eq!(sc.load.r_ohm, 45.0);
//! assert_eq!(sc.events.len(), 1);
//! ```

use std::collections::{BTreeMap, BTreeSet};

use crate::circuit::{GridSource, LineParams, LoadParams, TransformerStage};
use crate::control::{validate_events, Event, EventKind};
use crate::error::{Error, Result};

/// How the stage EMFs are weighted along the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    /// Stage `k` injects `2^(k-1)` times the base step: `2^p` distinct levels.
    Binary,
    /// Every stage injects the same step: only `p + 1` distinct levels.
    Identical,
}

impl Weighting {
    fn as_str(&self) -> &'static str {
        match self {
            Weighting::Binary => "binary",
            Weighting::Identical => "identical",
        }
    }
}

/// Which signals to keep when writing results.
#[derive(Debug, Clone, PartialEq)]
pub enum SignalSelection {
    All,
    /// Keep signals whose name starts with any of these prefixes.
    Prefixes(Vec<String>),
}

impl SignalSelection {
    pub fn includes(&self, name: &str) -> bool {
        match self {
            SignalSelection::All => true,
            SignalSelection::Prefixes(list) => list.iter().any(|p| name.starts_with(p.as_str())),
        }
    }

    fn as_config_value(&self) -> String {
        match self {
            SignalSelection::All => "all".to_string(),
            SignalSelection::Prefixes(list) => list.join(","),
        }
    }
}

/// Complete description of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub grid: GridSource,
    /// Number of converter stages in series per phase.
    pub stages: usize,
    /// DC-link voltage feeding every stage bridge.
    pub v_dc: f64,
    /// When false the converter chain is bypassed entirely: no injected
    /// voltage and no stage impedance in the loop.
    pub converter_enabled: bool,
    pub weighting: Weighting,
    /// Per-winding impedance of one stage transformer, on the stage base.
    pub stage: TransformerStage,
    pub line: LineParams,
    pub load: LoadParams,
    pub events: Vec<Event>,
    /// Integration step, seconds.
    pub dt: f64,
    /// Simulated span, seconds.
    pub duration_s: f64,
    /// Disturbance-free cycles simulated up front to learn the nominal
    /// load voltage the compensator will hold.
    pub warmup_cycles: u32,
    /// First cycle of the harmonic-analysis window.
    pub analysis_start_cycle: u32,
    /// Number of whole cycles analyzed.
    pub analysis_cycles: u32,
    /// Highest harmonic order evaluated.
    pub h_max: usize,
    pub signals: SignalSelection,
}

impl Default for Scenario {
    /// The reference operating point used throughout the examples: an 11 kV
    /// grid feeding a 60 Ω / 150 µF load over a 10 mH line, compensated by
    /// three binary-weighted stages whose chain spans the 3 kV winding peak.
    fn default() -> Self {
        let lv_peak = 2f64.sqrt() * 3000.0;
        Scenario {
            grid: GridSource::new(11_000.0, 50.0),
            stages: 3,
            v_dc: 2.0 * lv_peak / 7.0,
            converter_enabled: true,
            weighting: Weighting::Binary,
            stage: TransformerStage {
                r_pu: 0.002,
                x_pu: 0.08,
                v_base: 3000.0,
                s_base: 1e6,
                ratio: 1.0,
            },
            line: LineParams {
                r_ohm: 0.01,
                l_henry: 10e-3,
            },
            load: LoadParams {
                r_ohm: 60.0,
                c_farad: 150e-6,
                rectifier: false,
            },
            events: Vec::new(),
            dt: 1e-5,
            duration_s: 2.5,
            warmup_cycles: 25,
            analysis_start_cycle: 50,
            analysis_cycles: 50,
            h_max: 49,
            signals: SignalSelection::All,
        }
    }
}

/// Partially specified event while the config is being read.
#[derive(Default)]
struct EventDraft {
    kind: Option<EventKind>,
    start: Option<f64>,
    end: Option<f64>,
    magnitude: Option<f64>,
    first_line: usize,
}

impl Scenario {
    /// Read a scenario from a config file.
    pub fn from_file(path: &str) -> Result<Scenario> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, &e))?;
        Scenario::from_config_text(&text)
    }

    /// Parse config text over the defaults, then validate the result.
    pub fn from_config_text(text: &str) -> Result<Scenario> {
        let mut sc = Scenario::default();
        let mut seen: BTreeSet<String> = BTreeSet::new();
        let mut drafts: BTreeMap<usize, EventDraft> = BTreeMap::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config_at(line_no, line, "expected `key = value`")
            })?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() || value.is_empty() {
                return Err(Error::config_at(line_no, line, "expected `key = value`"));
            }
            if !seen.insert(key.to_string()) {
                return Err(Error::config_at(line_no, key, "duplicate key"));
            }
            if let Some((index, field)) = parse_event_key(key) {
                let draft = drafts.entry(index).or_default();
                if draft.first_line == 0 {
                    draft.first_line = line_no;
                }
                match field {
                    "kind" => {
                        draft.kind = Some(match value {
                            "sag" => EventKind::Sag,
                            "swell" => EventKind::Swell,
                            other => {
                                return Err(Error::config_at(
                                    line_no,
                                    key,
                                    format!("unknown event kind `{other}` (sag or swell)"),
                                ))
                            }
                        })
                    }
                    "start_s" => draft.start = Some(parse_f64(line_no, key, value)?),
                    "end_s" => draft.end = Some(parse_f64(line_no, key, value)?),
                    "magnitude" => draft.magnitude = Some(parse_f64(line_no, key, value)?),
                    other => {
                        return Err(Error::config_at(
                            line_no,
                            key,
                            format!("unknown event field `{other}`"),
                        ))
                    }
                }
                continue;
            }
            match key {
                "grid.v_rms_ll" => sc.grid.v_rms_ll = parse_f64(line_no, key, value)?,
                "grid.frequency_hz" => sc.grid.frequency_hz = parse_f64(line_no, key, value)?,
                "converter.stages" => sc.stages = parse_usize(line_no, key, value)?,
                "converter.v_dc" => sc.v_dc = parse_f64(line_no, key, value)?,
                "converter.enabled" => sc.converter_enabled = parse_bool(line_no, key, value)?,
                "converter.weighting" => {
                    sc.weighting = match value {
                        "binary" => Weighting::Binary,
                        "identical" => Weighting::Identical,
                        other => {
                            return Err(Error::config_at(
                                line_no,
                                key,
                                format!("unknown weighting `{other}` (binary or identical)"),
                            ))
                        }
                    }
                }
                "stage.r_pu" => sc.stage.r_pu = parse_f64(line_no, key, value)?,
                "stage.x_pu" => sc.stage.x_pu = parse_f64(line_no, key, value)?,
                "stage.v_base" => sc.stage.v_base = parse_f64(line_no, key, value)?,
                "stage.s_base" => sc.stage.s_base = parse_f64(line_no, key, value)?,
                "line.r_ohm" => sc.line.r_ohm = parse_f64(line_no, key, value)?,
                "line.l_henry" => sc.line.l_henry = parse_f64(line_no, key, value)?,
                "load.r_ohm" => sc.load.r_ohm = parse_f64(line_no, key, value)?,
                "load.c_farad" => sc.load.c_farad = parse_f64(line_no, key, value)?,
                "load.rectifier" => sc.load.rectifier = parse_bool(line_no, key, value)?,
                "sim.dt_s" => sc.dt = parse_f64(line_no, key, value)?,
                "sim.duration_s" => sc.duration_s = parse_f64(line_no, key, value)?,
                "sim.warmup_cycles" => sc.warmup_cycles = parse_u32(line_no, key, value)?,
                "analysis.start_cycle" => {
                    sc.analysis_start_cycle = parse_u32(line_no, key, value)?
                }
                "analysis.cycles" => sc.analysis_cycles = parse_u32(line_no, key, value)?,
                "analysis.h_max" => sc.h_max = parse_usize(line_no, key, value)?,
                "output.signals" => {
                    sc.signals = if value == "all" {
                        SignalSelection::All
                    } else {
                        let prefixes: Vec<String> = value
                            .split(',')
                            .map(|s| s.trim().to_string())
                            .collect();
                        if prefixes.iter().any(|p| p.is_empty()) {
                            return Err(Error::config_at(
                                line_no,
                                key,
                                "empty signal prefix in list",
                            ));
                        }
                        SignalSelection::Prefixes(prefixes)
                    }
                }
                other => {
                    return Err(Error::config_at(
                        line_no,
                        other,
                        "unknown key".to_string(),
                    ))
                }
            }
        }

        sc.events = assemble_events(drafts)?;
        sc.validate()?;
        Ok(sc)
    }

    /// Reject parameter sets the simulator cannot run faithfully.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::config(msg));
        if !(self.grid.v_rms_ll.is_finite() && self.grid.v_rms_ll > 0.0) {
            return fail(format!("grid.v_rms_ll must be positive, got {}", self.grid.v_rms_ll));
        }
        if !(self.grid.frequency_hz.is_finite() && self.grid.frequency_hz > 0.0) {
            return fail(format!(
                "grid.frequency_hz must be positive, got {}",
                self.grid.frequency_hz
            ));
        }
        if self.stages < 1 || self.stages > 12 {
            return fail(format!(
                "converter.stages must be between 1 and 12, got {}",
                self.stages
            ));
        }
        if !(self.v_dc.is_finite() && self.v_dc > 0.0) {
            return fail(format!("converter.v_dc must be positive, got {}", self.v_dc));
        }
        if !(self.stage.r_pu >= 0.0 && self.stage.x_pu >= 0.0) {
            return fail("stage per-unit impedances must be non-negative".to_string());
        }
        if !(self.stage.v_base > 0.0 && self.stage.s_base > 0.0) {
            return fail("stage bases must be positive".to_string());
        }
        if self.line.r_ohm < 0.0 {
            return fail(format!("line.r_ohm must be non-negative, got {}", self.line.r_ohm));
        }
        if !(self.line.l_henry > 0.0) {
            return fail(format!("line.l_henry must be positive, got {}", self.line.l_henry));
        }
        if !(self.load.r_ohm > 0.0) {
            return fail(format!("load.r_ohm must be positive, got {}", self.load.r_ohm));
        }
        if !(self.load.c_farad > 0.0) {
            return fail(format!("load.c_farad must be positive, got {}", self.load.c_farad));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return fail(format!("sim.dt_s must be positive, got {}", self.dt));
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return fail(format!("sim.duration_s must be positive, got {}", self.duration_s));
        }
        if self.warmup_cycles < 1 {
            return fail("sim.warmup_cycles must be at least 1".to_string());
        }
        if self.h_max < 1 {
            return fail("analysis.h_max must be at least 1".to_string());
        }
        if self.analysis_cycles < 1 {
            return fail("analysis.cycles must be at least 1".to_string());
        }

        // the sample grid must tile the fundamental period exactly, or the
        // whole-cycle spectra would leak
        let spc_exact = 1.0 / (self.grid.frequency_hz * self.dt);
        let spc = spc_exact.round();
        if (spc_exact - spc).abs() > 1e-6 * spc_exact {
            return fail(format!(
                "sim.dt_s must divide the fundamental period evenly; \
                 1/(f*dt) = {spc_exact} is not an integer"
            ));
        }
        let spc = spc as usize;
        if spc < 200 {
            return fail(format!(
                "sim.dt_s too coarse: {spc} samples per fundamental cycle is \
                 below the integrator's resolution floor of 200"
            ));
        }
        if spc < 2 * self.h_max + 2 {
            return fail(format!(
                "sim.dt_s too coarse: {spc} samples per cycle cannot resolve \
                 harmonic {} (need at least {})",
                self.h_max,
                2 * self.h_max + 2
            ));
        }

        let total_cycles = self.duration_s * self.grid.frequency_hz;
        let needed = self.analysis_start_cycle as f64 + self.analysis_cycles as f64;
        if needed > total_cycles + 1e-9 {
            return fail(format!(
                "analysis window ends at cycle {needed} but the run only \
                 covers {total_cycles} cycles"
            ));
        }

        validate_events(&self.events)?;
        Ok(())
    }

    /// Fundamental period, seconds.
    pub fn period(&self) -> f64 {
        1.0 / self.grid.frequency_hz
    }

    /// Samples per fundamental cycle (validated to be an exact integer).
    pub fn samples_per_cycle(&self) -> usize {
        (1.0 / (self.grid.frequency_hz * self.dt)).round() as usize
    }

    /// Number of samples in the run, covering `t = 0 ..= duration`.
    pub fn total_samples(&self) -> usize {
        (self.duration_s / self.dt).round() as usize + 1
    }

    /// The stage chain actually wired in series: per-winding impedances from
    /// the template, EMF ratios set by the weighting scheme.
    pub fn build_stages(&self) -> Vec<TransformerStage> {
        (0..self.stages)
            .map(|k| TransformerStage {
                ratio: match self.weighting {
                    Weighting::Binary => (1u64 << k) as f64,
                    Weighting::Identical => 1.0,
                },
                ..self.stage.clone()
            })
            .collect()
    }

    /// Largest series voltage the chain can synthesize (one polarity).
    pub fn synthesizable_peak(&self) -> f64 {
        let total_ratio: f64 = self.build_stages().iter().map(|s| s.ratio).sum();
        total_ratio * self.v_dc / 2.0
    }

    /// Canonical text form: every field in a fixed order, one per line.
    /// Two scenarios are the same run if and only if these strings match.
    pub fn canonical_string(&self) -> String {
        let mut s = String::new();
        let mut push = |k: &str, v: String| {
            s.push_str(k);
            s.push('=');
            s.push_str(&v);
            s.push('\n');
        };
        push("grid.v_rms_ll", self.grid.v_rms_ll.to_string());
        push("grid.frequency_hz", self.grid.frequency_hz.to_string());
        push("converter.stages", self.stages.to_string());
        push("converter.v_dc", self.v_dc.to_string());
        push("converter.enabled", self.converter_enabled.to_string());
        push("converter.weighting", self.weighting.as_str().to_string());
        push("stage.r_pu", self.stage.r_pu.to_string());
        push("stage.x_pu", self.stage.x_pu.to_string());
        push("stage.v_base", self.stage.v_base.to_string());
        push("stage.s_base", self.stage.s_base.to_string());
        push("line.r_ohm", self.line.r_ohm.to_string());
        push("line.l_henry", self.line.l_henry.to_string());
        push("load.r_ohm", self.load.r_ohm.to_string());
        push("load.c_farad", self.load.c_farad.to_string());
        push("load.rectifier", self.load.rectifier.to_string());
        for (n, e) in self.events.iter().enumerate() {
            let kind = match e.kind {
                EventKind::Sag => "sag",
                EventKind::Swell => "swell",
            };
            let end = e.end.map_or("open".to_string(), |t| t.to_string());
            push(
                &format!("events[{n}]"),
                format!("{kind},{},{end},{}", e.start, e.magnitude),
            );
        }
        push("sim.dt_s", self.dt.to_string());
        push("sim.duration_s", self.duration_s.to_string());
        push("sim.warmup_cycles", self.warmup_cycles.to_string());
        push("analysis.start_cycle", self.analysis_start_cycle.to_string());
        push("analysis.cycles", self.analysis_cycles.to_string());
        push("analysis.h_max", self.h_max.to_string());
        push("output.signals", self.signals.as_config_value());
        s
    }

    /// FNV-1a fingerprint of the canonical string.
    pub fn hash_u64(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for &b in self.canonical_string().as_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h
    }

    /// The fingerprint as 16 hex digits, for file headers and logs.
    pub fn hash(&self) -> String {
        format!("{:016x}", self.hash_u64())
    }
}

/// Split `events[3].kind` into `(3, "kind")`; `None` for non-event keys.
fn parse_event_key(key: &str) -> Option<(usize, &str)> {
    let rest = key.strip_prefix("events[")?;
    let close = rest.find(']')?;
    let index: usize = rest[..close].parse().ok()?;
    let field = rest[close + 1..].strip_prefix('.')?;
    Some((index, field))
}

fn assemble_events(drafts: BTreeMap<usize, EventDraft>) -> Result<Vec<Event>> {
    let mut events = Vec::with_capacity(drafts.len());
    for (want, (index, draft)) in drafts.into_iter().enumerate() {
        if index != want {
            return Err(Error::config(format!(
                "event indices must be contiguous from 0; found events[{index}] \
                 but not events[{want}]"
            )));
        }
        let kind = draft.kind.ok_or_else(|| {
            Error::config_at(draft.first_line, format!("events[{index}]"), "missing kind")
        })?;
        let start = draft.start.ok_or_else(|| {
            Error::config_at(
                draft.first_line,
                format!("events[{index}]"),
                "missing start_s",
            )
        })?;
        let magnitude = draft.magnitude.ok_or_else(|| {
            Error::config_at(
                draft.first_line,
                format!("events[{index}]"),
                "missing magnitude",
            )
        })?;
        events.push(Event {
            kind,
            start,
            end: draft.end,
            magnitude,
        });
    }
    Ok(events)
}

fn parse_f64(line: usize, key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| Error::config_at(line, key, format!("expected a number, got `{value}`")))
}

fn parse_u32(line: usize, key: &str, value: &str) -> Result<u32> {
    value
        .parse::<u32>()
        .map_err(|_| Error::config_at(line, key, format!("expected an integer, got `{value}`")))
}

fn parse_usize(line: usize, key: &str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| Error::config_at(line, key, format!("expected an integer, got `{value}`")))
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::config_at(
            line,
            key,
            format!("expected true or false, got `{value}`"),
        )),
    }
}
