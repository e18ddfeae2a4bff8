//! Spectral and power analysis of simulated waveforms.
//!
//! Harmonic magnitudes come from a rectangular-window discrete Fourier
//! transform evaluated over an exact integer number of fundamental periods,
//! so periodic signals produce leak-free spectra. Total harmonic distortion,
//! windowed RMS, and the instantaneous power pair `p`/`q` for a three-phase
//! set build on the same window conventions.

use crate::error::{Error, Result};
use crate::signal::TimeSeries;

/// Harmonic content of one waveform: complex phasors and magnitudes for
/// harmonics `1 ..= h_max` of the fundamental.
#[derive(Debug, Clone)]
pub struct HarmonicSpectrum {
    pub fundamental_hz: f64,
    /// `magnitudes[h - 1]` is the amplitude (peak, not RMS) of harmonic `h`.
    pub magnitudes: Vec<f64>,
    /// `phasors[h - 1]` is the complex amplitude `(re, im)` of harmonic `h`,
    /// phase-referenced to absolute time `t = 0` of the series.
    pub phasors: Vec<(f64, f64)>,
}

impl HarmonicSpectrum {
    /// Amplitude of harmonic `h` (1-based).
    pub fn magnitude(&self, h: usize) -> f64 {
        self.magnitudes[h - 1]
    }

    pub fn h_max(&self) -> usize {
        self.magnitudes.len()
    }
}

/// Instantaneous three-phase power waveforms.
#[derive(Debug, Clone)]
pub struct PowerSeries {
    /// Real power `p = Σ v_i · i_i` in watts.
    pub p: TimeSeries,
    /// Imaginary power in vars; positive for lagging (inductive) current.
    pub q: TimeSeries,
}

/// Number of samples spanned by one fundamental cycle.
fn samples_per_cycle(series: &TimeSeries, fundamental_hz: f64) -> Result<f64> {
    if !(fundamental_hz.is_finite() && fundamental_hz > 0.0) {
        return Err(Error::analysis(format!(
            "fundamental frequency must be positive, got {fundamental_hz}"
        )));
    }
    Ok(1.0 / (fundamental_hz * series.dt))
}

/// Window of `cycles` whole fundamental periods starting after `start_cycle`
/// periods; returns `(first_sample, sample_count)`.
fn cycle_window(
    series: &TimeSeries,
    fundamental_hz: f64,
    start_cycle: usize,
    cycles: usize,
) -> Result<(usize, usize)> {
    if cycles == 0 {
        return Err(Error::analysis("analysis window must span at least one cycle"));
    }
    let spc = samples_per_cycle(series, fundamental_hz)?;
    let start = (start_cycle as f64 * spc).round() as usize;
    let count = (cycles as f64 * spc).round() as usize;
    if start + count > series.len() {
        return Err(Error::analysis(format!(
            "window needs {} samples ({} cycles from cycle {}), series has {}",
            start + count,
            cycles,
            start_cycle,
            series.len()
        )));
    }
    Ok((start, count))
}

/// Rectangular-window DFT of `series` over exactly `cycles` fundamental
/// periods starting at `start_cycle`, returning harmonics `1 ..= h_max`.
///
/// The sampling rate must resolve every requested harmonic: at least
/// `2·h_max + 2` samples per fundamental cycle.
pub fn harmonic_spectrum(
    series: &TimeSeries,
    fundamental_hz: f64,
    start_cycle: usize,
    cycles: usize,
    h_max: usize,
) -> Result<HarmonicSpectrum> {
    if h_max == 0 {
        return Err(Error::analysis("harmonic count must be at least 1"));
    }
    let spc = samples_per_cycle(series, fundamental_hz)?;
    let needed = (2 * h_max + 2) as f64;
    if spc + 1e-9 < needed {
        return Err(Error::analysis(format!(
            "{spc:.1} samples per cycle cannot resolve harmonic {h_max}; need at least {needed}"
        )));
    }
    let (start, count) = cycle_window(series, fundamental_hz, start_cycle, cycles)?;

    let w0 = 2.0 * std::f64::consts::PI * fundamental_hz * series.dt;
    let mut magnitudes = Vec::with_capacity(h_max);
    let mut phasors = Vec::with_capacity(h_max);
    for h in 1..=h_max {
        let mut re = 0.0;
        let mut im = 0.0;
        for k in 0..count {
            let x = series.values[start + k];
            // absolute-time kernel keeps phases referenced to t = 0
            let ang = w0 * h as f64 * (start + k) as f64;
            re += x * ang.cos();
            im -= x * ang.sin();
        }
        let scale = 2.0 / count as f64;
        re *= scale;
        im *= scale;
        magnitudes.push(re.hypot(im));
        phasors.push((re, im));
    }
    Ok(HarmonicSpectrum {
        fundamental_hz,
        magnitudes,
        phasors,
    })
}

/// Total harmonic distortion in percent:
/// `100 · sqrt(Σ_{h≥2} m_h²) / m_1`. Fails when the fundamental is zero.
pub fn thd(spectrum: &HarmonicSpectrum) -> Result<f64> {
    let m1 = spectrum.magnitude(1);
    if m1 == 0.0 {
        return Err(Error::analysis(
            "fundamental magnitude is zero; distortion is undefined",
        ));
    }
    let sum: f64 = spectrum.magnitudes[1..].iter().map(|m| m * m).sum();
    Ok(100.0 * sum.sqrt() / m1)
}

/// Root-mean-square over the first `cycles` whole fundamental periods.
pub fn rms(series: &TimeSeries, fundamental_hz: f64, cycles: usize) -> Result<f64> {
    let (start, count) = cycle_window(series, fundamental_hz, 0, cycles)?;
    debug_assert_eq!(start, 0);
    let sum: f64 = series.values[..count].iter().map(|x| x * x).sum();
    Ok((sum / count as f64).sqrt())
}

/// Amplitude and phase of the fundamental in the sine convention
/// `x(t) = M · sin(2π f t + θ)`, extracted from one whole period starting at
/// `start_cycle`. Returns `(M, θ)` with θ in radians.
pub fn fundamental_phasor(
    series: &TimeSeries,
    fundamental_hz: f64,
    start_cycle: usize,
) -> Result<(f64, f64)> {
    let spec = harmonic_spectrum(series, fundamental_hz, start_cycle, 1, 1)?;
    let (re, im) = spec.phasors[0];
    // For x = M sin(ωt + θ) the complex amplitude is M·e^{j(θ - π/2)}.
    let magnitude = re.hypot(im);
    let theta = im.atan2(re) + std::f64::consts::FRAC_PI_2;
    Ok((magnitude, theta))
}

/// Instantaneous real and imaginary power of a three-phase set.
///
/// `p = v_a·i_a + v_b·i_b + v_c·i_c` and
/// `q = [(v_a - v_b)·i_c + (v_b - v_c)·i_a + (v_c - v_a)·i_b] / √3`,
/// which makes `q` positive when the currents lag the voltages.
pub fn instantaneous_powers(
    voltages: [&TimeSeries; 3],
    currents: [&TimeSeries; 3],
) -> Result<PowerSeries> {
    let n = voltages[0].len();
    let dt = voltages[0].dt;
    for s in voltages.iter().chain(currents.iter()) {
        if s.len() != n {
            return Err(Error::analysis(format!(
                "phase series lengths differ: {} vs {}",
                n,
                s.len()
            )));
        }
        if s.dt != dt {
            return Err(Error::analysis("phase series sample spacings differ"));
        }
    }
    let inv_sqrt3 = 1.0 / 3f64.sqrt();
    let mut p = Vec::with_capacity(n);
    let mut q = Vec::with_capacity(n);
    for k in 0..n {
        let (va, vb, vc) = (
            voltages[0].values[k],
            voltages[1].values[k],
            voltages[2].values[k],
        );
        let (ia, ib, ic) = (
            currents[0].values[k],
            currents[1].values[k],
            currents[2].values[k],
        );
        p.push(va * ia + vb * ib + vc * ic);
        q.push(((va - vb) * ic + (vb - vc) * ia + (vc - va) * ib) * inv_sqrt3);
    }
    Ok(PowerSeries {
        p: TimeSeries::new("p_W", dt, p),
        q: TimeSeries::new("q_var", dt, q),
    })
}
