//! Uniformly sampled signals and the bundle a simulation run produces.

use crate::error::{Error, Result};

/// A named, uniformly sampled waveform. Sample `k` is taken at `k * dt`
/// seconds relative to the start of the record.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub name: String,
    /// Sample spacing in seconds (strictly positive).
    pub dt: f64,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(name: impl Into<String>, dt: f64, values: Vec<f64>) -> Self {
        assert!(dt > 0.0 && dt.is_finite(), "sample spacing must be positive");
        TimeSeries {
            name: name.into(),
            dt,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Time of sample `k` in seconds.
    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    /// Duration covered by the record (time of the last sample).
    pub fn duration(&self) -> f64 {
        match self.values.len() {
            0 => 0.0,
            n => (n - 1) as f64 * self.dt,
        }
    }
}

/// Everything one simulation run emits: a shared time base, one column per
/// signal, and run metadata.
#[derive(Debug, Clone)]
pub struct SignalBundle {
    /// Sample spacing shared by every series.
    pub dt: f64,
    /// Signal columns in a fixed, deterministic order.
    pub series: Vec<TimeSeries>,
    /// Hash of the scenario that produced the bundle (stable across runs).
    pub scenario_hash: u64,
    /// Largest series-loop voltage-law residual observed during the run,
    /// in volts. `None` when the run used the rectifier load, whose loop
    /// equations pass through the bridge and are checked differently.
    pub kvl_residual: Option<f64>,
}

impl SignalBundle {
    pub fn new(dt: f64, scenario_hash: u64) -> Self {
        SignalBundle {
            dt,
            series: Vec::new(),
            scenario_hash,
            kvl_residual: None,
        }
    }

    /// Number of samples each series holds.
    pub fn samples(&self) -> usize {
        self.series.first().map_or(0, TimeSeries::len)
    }

    /// Append a column; every column must agree on dt and length.
    pub fn push(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        if let Some(first) = self.series.first() {
            if values.len() != first.len() {
                return Err(Error::simulation(format!(
                    "signal length mismatch: expected {} samples, got {}",
                    first.len(),
                    values.len()
                )));
            }
        }
        self.series.push(TimeSeries::new(name, self.dt, values));
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&TimeSeries> {
        self.series.iter().find(|s| s.name == name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.series.iter().map(|s| s.name.as_str()).collect()
    }
}
