//! Feed-forward compensation control: grid disturbance events, the nominal
//! load-voltage reference, and the sliding RMS detector used to judge
//! restoration quality.
//!
//! The control law is deliberately simple: the injected series voltage is
//! commanded to the gap between the nominal load waveform and the measured
//! grid voltage, sample by sample. Because the gap is recomputed every
//! sample, a step change in grid amplitude is cancelled in the same sample
//! it appears.

use crate::error::{Error, Result};
use crate::signal::TimeSeries;

/// Kind of grid-amplitude disturbance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Sag,
    Swell,
}

/// One amplitude disturbance: the grid EMF is multiplied by `magnitude`
/// while `start <= t < end`. An absent `end` means the event lasts to the
/// end of the run.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub kind: EventKind,
    /// Onset time in seconds.
    pub start: f64,
    /// End time in seconds, exclusive; `None` keeps the event active forever.
    pub end: Option<f64>,
    /// Amplitude scale factor: below 1 for a sag, at least 1 for a swell.
    pub magnitude: f64,
}

impl Event {
    fn active_at(&self, t: f64) -> bool {
        t >= self.start && self.end.is_none_or(|end| t < end)
    }

    fn overlaps(&self, other: &Event) -> bool {
        let end_a = self.end.unwrap_or(f64::INFINITY);
        let end_b = other.end.unwrap_or(f64::INFINITY);
        self.start < end_b && other.start < end_a
    }
}

/// Check a whole event list: individual field ranges plus pairwise
/// non-overlap (overlapping disturbances would make the composite scale
/// ambiguous to reason about).
pub fn validate_events(events: &[Event]) -> Result<()> {
    for (n, e) in events.iter().enumerate() {
        if !(e.start.is_finite() && e.start >= 0.0) {
            return Err(Error::config(format!(
                "events[{n}].start_s must be a non-negative time, got {}",
                e.start
            )));
        }
        if let Some(end) = e.end {
            if !(end.is_finite() && end > e.start) {
                return Err(Error::config(format!(
                    "events[{n}].end_s must come after start ({} vs {})",
                    end, e.start
                )));
            }
        }
        if !(e.magnitude.is_finite() && e.magnitude > 0.0) {
            return Err(Error::config(format!(
                "events[{n}].magnitude must be positive, got {}",
                e.magnitude
            )));
        }
        match e.kind {
            EventKind::Sag if e.magnitude >= 1.0 => {
                return Err(Error::config(format!(
                    "events[{n}]: a sag magnitude must be below 1, got {}",
                    e.magnitude
                )));
            }
            EventKind::Swell if e.magnitude < 1.0 => {
                return Err(Error::config(format!(
                    "events[{n}]: a swell magnitude must be at least 1, got {}",
                    e.magnitude
                )));
            }
            _ => {}
        }
    }
    for a in 0..events.len() {
        for b in a + 1..events.len() {
            if events[a].overlaps(&events[b]) {
                return Err(Error::config(format!(
                    "events[{a}] and events[{b}] overlap in time"
                )));
            }
        }
    }
    Ok(())
}

/// Composite grid-amplitude scale at time `t`: the product of the
/// magnitudes of all active events, 1 when none is active.
pub fn apply_events(events: &[Event], t: f64) -> f64 {
    events
        .iter()
        .filter(|e| e.active_at(t))
        .map(|e| e.magnitude)
        .product()
}

/// Nominal load-voltage waveform the compensator drives toward: a balanced
/// sinusoid described by its RMS amplitude, frequency, and per-phase angle.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSpec {
    pub rms: f64,
    pub frequency_hz: f64,
    /// Phase angle of each of the three phases, radians.
    pub offsets: [f64; 3],
}

impl ReferenceSpec {
    /// Nominal voltage of `phase` (0..3) at time `t`.
    pub fn value(&self, t: f64, phase: usize) -> f64 {
        self.rms
            * 2f64.sqrt()
            * (2.0 * std::f64::consts::PI * self.frequency_hz * t + self.offsets[phase]).sin()
    }
}

/// Feed-forward injection command: the series converter should supply
/// exactly what the grid currently fails to deliver toward the nominal.
pub fn injection_reference(v_ref_load: f64, v_grid_measured: f64) -> f64 {
    v_ref_load - v_grid_measured
}

/// Causal sliding RMS over a trailing window of `window_s` seconds.
///
/// Returns the RMS series (aligned to the input time base) together with
/// the number of leading samples that were computed from a not-yet-full
/// window and should be treated as warm-up. The window must span at least
/// two samples; for meaningful readings on AC waveforms it should span at
/// least one fundamental period.
pub fn sliding_rms(series: &TimeSeries, window_s: f64) -> Result<(TimeSeries, usize)> {
    let w = (window_s / series.dt).round() as usize;
    if w < 2 {
        return Err(Error::analysis(format!(
            "sliding window of {window_s} s covers {w} sample(s); need at least 2"
        )));
    }
    let n = series.len();
    let mut out = Vec::with_capacity(n);
    let mut sum_sq = 0.0;
    for k in 0..n {
        let x = series.values[k];
        sum_sq += x * x;
        if k >= w {
            let old = series.values[k - w];
            sum_sq -= old * old;
        }
        // Rebase the running sum periodically so the subtraction above can
        // never accumulate drift over long records.
        if k >= w && k % w == 0 {
            sum_sq = series.values[k + 1 - w..=k].iter().map(|v| v * v).sum();
        }
        let count = (k + 1).min(w);
        out.push((sum_sq / count as f64).max(0.0).sqrt());
    }
    let warmup = (w - 1).min(n);
    Ok((
        TimeSeries::new(format!("{}_rms", series.name), series.dt, out),
        warmup,
    ))
}

/// Time for an RMS reading to settle back after a disturbance.
///
/// Scans `rms` over `[onset, until]` and returns the delay from `onset` to
/// the first sample from which the reading stays within `band` (as a
/// fraction of `nominal`) through the end of the scan. Zero means the
/// reading never left the band; `None` means it never settled.
pub fn recovery_time(
    rms: &TimeSeries,
    nominal: f64,
    band: f64,
    onset: f64,
    until: f64,
) -> Option<f64> {
    assert!(nominal > 0.0 && band > 0.0, "nominal and band must be positive");
    let first = (onset / rms.dt).ceil() as usize;
    let last = ((until / rms.dt).floor() as usize).min(rms.len().saturating_sub(1));
    if first > last {
        return None;
    }
    let mut last_outside = None;
    for k in first..=last {
        if (rms.values[k] - nominal).abs() > band * nominal {
            last_outside = Some(k);
        }
    }
    let settled_at = match last_outside {
        Some(k) if k == last => return None,
        Some(k) => k + 1,
        None => first,
    };
    Some(settled_at as f64 * rms.dt - onset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sag(start: f64, end: f64, magnitude: f64) -> Event {
        Event {
            kind: EventKind::Sag,
            start,
            end: Some(end),
            magnitude,
        }
    }

    #[test]
    fn scale_is_the_event_magnitude_while_active() {
        let events = vec![sag(0.1, 0.2, 0.7)];
        assert_eq!(apply_events(&events, 0.05), 1.0);
        assert_eq!(apply_events(&events, 0.1), 0.7, "start is inclusive");
        assert_eq!(apply_events(&events, 0.15), 0.7);
        assert_eq!(apply_events(&events, 0.2), 1.0, "end is exclusive");
        assert_eq!(apply_events(&[], 0.15), 1.0);
    }

    #[test]
    fn swell_and_open_ended_events() {
        let events = vec![Event {
            kind: EventKind::Swell,
            start: 0.3,
            end: None,
            magnitude: 1.3,
        }];
        assert_eq!(apply_events(&events, 0.29), 1.0);
        assert_eq!(apply_events(&events, 5000.0), 1.3);
        validate_events(&events).unwrap();
    }

    #[test]
    fn event_validation_rejects_bad_fields() {
        assert!(validate_events(&[sag(-0.1, 0.2, 0.7)]).is_err(), "negative start");
        assert!(validate_events(&[sag(0.3, 0.2, 0.7)]).is_err(), "end before start");
        assert!(validate_events(&[sag(0.1, 0.2, 1.1)]).is_err(), "sag above 1");
        assert!(validate_events(&[sag(0.1, 0.2, 0.0)]).is_err(), "zero magnitude");
        let swell_below_one = Event {
            kind: EventKind::Swell,
            start: 0.1,
            end: Some(0.2),
            magnitude: 0.9,
        };
        assert!(validate_events(&[swell_below_one]).is_err());
    }

    #[test]
    fn overlapping_events_are_rejected() {
        let err = validate_events(&[sag(0.1, 0.3, 0.7), sag(0.25, 0.4, 0.8)]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        // touching intervals are fine: [0.1, 0.2) then [0.2, 0.3)
        validate_events(&[sag(0.1, 0.2, 0.7), sag(0.2, 0.3, 0.8)]).unwrap();
        // an open-ended event overlaps everything after it
        let open = Event {
            kind: EventKind::Sag,
            start: 0.1,
            end: None,
            magnitude: 0.7,
        };
        assert!(validate_events(&[open, sag(0.5, 0.6, 0.8)]).is_err());
    }

    #[test]
    fn injection_reference_is_the_gap_to_nominal() {
        assert_eq!(injection_reference(100.0, 70.0), 30.0);
        assert_eq!(injection_reference(100.0, 130.0), -30.0);
        assert_eq!(injection_reference(0.0, 0.0), 0.0);
    }

    #[test]
    fn reference_spec_generates_balanced_sines() {
        let spec = ReferenceSpec {
            rms: 100.0,
            frequency_hz: 50.0,
            offsets: [0.0, -2.0 * PI / 3.0, 2.0 * PI / 3.0],
        };
        assert!(spec.value(0.0, 0).abs() < 1e-9);
        // quarter period: phase a at its positive peak
        let peak = spec.value(0.005, 0);
        assert!((peak - 100.0 * 2f64.sqrt()).abs() < 1e-9, "peak {peak}");
    }

    #[test]
    fn sliding_rms_of_a_constant_is_the_constant() {
        let s = TimeSeries::new("c", 1e-3, vec![5.0; 100]);
        let (rms, warmup) = sliding_rms(&s, 0.01).unwrap();
        assert_eq!(warmup, 9);
        for (k, &v) in rms.values.iter().enumerate() {
            assert!((v - 5.0).abs() < 1e-12, "rms[{k}] = {v}");
        }
    }

    #[test]
    fn sliding_rms_of_a_sine_settles_at_amplitude_over_sqrt2() {
        let spc = 200usize;
        let dt = 1.0 / (50.0 * spc as f64);
        let n = 5 * spc;
        let s = TimeSeries::new(
            "sine",
            dt,
            (0..n)
                .map(|k| 10.0 * (2.0 * PI * k as f64 / spc as f64).sin())
                .collect(),
        );
        let (rms, warmup) = sliding_rms(&s, 0.02).unwrap();
        let expect = 10.0 / 2f64.sqrt();
        for k in warmup..n {
            let rel = (rms.values[k] - expect).abs() / expect;
            assert!(rel < 1e-3, "rms[{k}] = {} vs {expect}", rms.values[k]);
        }
    }

    #[test]
    fn sliding_rms_tracks_an_amplitude_step_within_one_window() {
        let spc = 200usize;
        let dt = 1.0 / (50.0 * spc as f64);
        let n = 6 * spc;
        let step_at = 3 * spc;
        let s = TimeSeries::new(
            "stepped",
            dt,
            (0..n)
                .map(|k| {
                    let amp = if k < step_at { 1.0 } else { 2.0 };
                    amp * (2.0 * PI * k as f64 / spc as f64).sin()
                })
                .collect(),
        );
        let (rms, _) = sliding_rms(&s, 0.02).unwrap();
        let before = 1.0 / 2f64.sqrt();
        let after = 2.0 / 2f64.sqrt();
        assert!((rms.values[step_at - 1] - before).abs() / before < 1e-3);
        // one full window after the step the reading has converged
        for k in step_at + spc..n {
            let rel = (rms.values[k] - after).abs() / after;
            assert!(rel < 1e-3, "rms[{k}] = {}", rms.values[k]);
        }
    }

    #[test]
    fn sliding_rms_rejects_windows_under_two_samples() {
        let s = TimeSeries::new("x", 1e-3, vec![1.0; 10]);
        let err = sliding_rms(&s, 1e-3).unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }

    #[test]
    fn recovery_time_measures_the_return_into_the_band() {
        // reading drops to 90 on [0.1, 0.12) then returns to 100
        let dt = 1e-3;
        let values: Vec<f64> = (0..300)
            .map(|k| {
                let t = k as f64 * dt;
                if (0.1..0.12).contains(&t) {
                    90.0
                } else {
                    100.0
                }
            })
            .collect();
        let rms = TimeSeries::new("r", dt, values);
        let t = recovery_time(&rms, 100.0, 0.02, 0.1, 0.25).unwrap();
        assert!((t - 0.02).abs() < 1.5 * dt, "recovery time {t} vs expected 0.02");
    }

    #[test]
    fn recovery_time_is_zero_when_the_band_is_never_left() {
        let rms = TimeSeries::new("r", 1e-3, vec![100.0; 200]);
        let t = recovery_time(&rms, 100.0, 0.02, 0.05, 0.15).unwrap();
        assert_eq!(t, 0.0);
    }

    #[test]
    fn recovery_time_is_none_when_the_reading_never_settles() {
        let rms = TimeSeries::new("r", 1e-3, vec![50.0; 200]);
        assert_eq!(recovery_time(&rms, 100.0, 0.02, 0.05, 0.15), None);
        // scan window entirely past the record
        assert_eq!(recovery_time(&rms, 100.0, 0.02, 0.5, 0.6), None);
    }

    #[test]
    fn sliding_rms_running_sum_does_not_drift_on_long_records() {
        // 200k samples of a large-amplitude sine: the rebase keeps the
        // incremental sum equal to a direct recomputation.
        let spc = 400usize;
        let dt = 1.0 / (50.0 * spc as f64);
        let n = 200_000;
        let s = TimeSeries::new(
            "long",
            dt,
            (0..n)
                .map(|k| 9000.0 * (2.0 * PI * k as f64 / spc as f64).sin())
                .collect(),
        );
        let (rms, _) = sliding_rms(&s, 0.02).unwrap();
        let k = n - 1;
        let direct: f64 = s.values[k + 1 - spc..=k].iter().map(|v| v * v).sum::<f64>();
        let direct = (direct / spc as f64).sqrt();
        assert!(
            (rms.values[k] - direct).abs() / direct < 1e-12,
            "drift at the end: {} vs {direct}",
            rms.values[k]
        );
    }
}
