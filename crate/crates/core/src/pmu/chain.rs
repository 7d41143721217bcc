use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::estimator::estimate_phasor_at;
use super::filter::FilterSpec;
use super::timing::{gps_loss_phase_error, TimingErrorModel};
use crate::error::{Error, Result};
use crate::scada::PhasorReading;

/// Frequency of the input signal over time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SignalFrequency {
    Constant(f64),
    /// (time, Hz) breakpoints, linear in between, held beyond the ends.
    Piecewise(Vec<(f64, f64)>),
}

impl Default for SignalFrequency {
    fn default() -> Self {
        SignalFrequency::Constant(60.0)
    }
}

/// Signal frequency profile with its phase integral precomputed.
#[derive(Debug, Clone)]
pub struct FrequencyProfile {
    points: Vec<(f64, f64)>,
    /// Cycles accumulated from t = 0 up to each breakpoint.
    cycles_at: Vec<f64>,
}

impl FrequencyProfile {
    pub fn new(freq: &SignalFrequency) -> Result<Self> {
        let points = match freq {
            SignalFrequency::Constant(f) => vec![(0.0, *f)],
            SignalFrequency::Piecewise(p) => p.clone(),
        };
        if points.is_empty() {
            return Err(Error::invalid("frequency profile needs at least one point"));
        }
        if points
            .iter()
            .any(|(t, f)| !t.is_finite() || !(*f > 0.0 && f.is_finite()))
        {
            return Err(Error::invalid(
                "frequency profile needs finite times and positive frequencies",
            ));
        }
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::invalid("frequency profile times must be strictly increasing"));
        }
        // the first frequency is held back to t = 0
        let mut cycles_at = Vec::with_capacity(points.len());
        let mut acc = points[0].1 * points[0].0;
        cycles_at.push(acc);
        for w in points.windows(2) {
            acc += 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0);
            cycles_at.push(acc);
        }
        Ok(Self { points, cycles_at })
    }

    pub fn freq_at(&self, t: f64) -> f64 {
        let idx = self.points.partition_point(|(pt, _)| *pt <= t);
        if idx == 0 {
            return self.points[0].1;
        }
        if idx == self.points.len() {
            return self.points[idx - 1].1;
        }
        let (t0, f0) = self.points[idx - 1];
        let (t1, f1) = self.points[idx];
        f0 + (f1 - f0) * (t - t0) / (t1 - t0)
    }

    /// Cycles of the signal elapsed between t = 0 and `t`.
    pub fn cycles(&self, t: f64) -> f64 {
        let idx = self.points.partition_point(|(pt, _)| *pt <= t);
        if idx == 0 {
            return self.points[0].1 * t;
        }
        let (t0, f0) = self.points[idx - 1];
        let f = self.freq_at(t);
        self.cycles_at[idx - 1] + 0.5 * (f0 + f) * (t - t0)
    }
}

/// Stage-2 phasors at one instant, as fed to the PMU.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasorSample {
    pub t: f64,
    pub reading: PhasorReading,
}

fn interpolate(series: &[PhasorSample], t: f64) -> PhasorReading {
    let idx = series.partition_point(|s| s.t <= t);
    if idx == 0 {
        return series[0].reading;
    }
    if idx == series.len() {
        return series[idx - 1].reading;
    }
    let (a, b) = (&series[idx - 1], &series[idx]);
    let frac = (t - a.t) / (b.t - a.t);
    let lerp = |x: f64, y: f64| x + frac * (y - x);
    PhasorReading {
        v: lerp(a.reading.v, b.reading.v),
        delta_v: lerp(a.reading.delta_v, b.reading.delta_v),
        i: lerp(a.reading.i, b.reading.i),
        delta_i: lerp(a.reading.delta_i, b.reading.delta_i),
    }
}

/// One synchrophasor report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PmuFrame {
    pub report_time: f64,
    /// RMS voltage phasor, per-unit.
    pub v_phasor: Complex64,
    pub i_phasor: Complex64,
    /// Sampling-clock plus GPS-drift angle error at this instant, radians.
    pub injected_angle_error: f64,
    pub gps_locked: bool,
    /// Stage-2 voltage phasor at the report instant in the nominal-frequency
    /// reference frame.
    pub v_reference: Complex64,
    pub i_reference: Complex64,
}

impl PmuFrame {
    /// Voltage angle error against the stage-2 reference, radians in (−π, π].
    pub fn v_angle_error(&self) -> f64 {
        (self.v_phasor * self.v_reference.conj()).arg()
    }

    pub fn i_angle_error(&self) -> f64 {
        (self.i_phasor * self.i_reference.conj()).arg()
    }
}

/// Waveforms on the sampling grid plus the grid's absolute first index.
struct Waveforms {
    first_index: i64,
    voltage: Vec<f64>,
    current: Vec<f64>,
}

fn synthesize(
    stage2: &[PhasorSample],
    spec: &FilterSpec,
    timing: &TimingErrorModel,
    profile: &FrequencyProfile,
) -> Waveforms {
    let fs = spec.sampling_freq;
    let t_first = stage2[0].t;
    let t_last = stage2[stage2.len() - 1].t;
    let first_index = (t_first * fs).ceil() as i64;
    let last_index = (t_last * fs).floor() as i64;
    let start_time = first_index as f64 / fs;
    let count = (last_index - first_index + 1).max(0) as usize;

    let mut voltage = Vec::with_capacity(count);
    let mut current = Vec::with_capacity(count);
    for j in 0..count {
        let n = first_index + j as i64;
        let tau = timing.accumulated_error(j as u64, fs, start_time);
        let t = n as f64 / fs + tau;
        let r = interpolate(stage2, t);
        let phase = 2.0 * PI * profile.cycles(t).fract();
        voltage.push(SQRT_2 * r.v * (phase + r.delta_v).cos());
        current.push(SQRT_2 * r.i * (phase + r.delta_i).cos());
    }
    Waveforms {
        first_index,
        voltage,
        current,
    }
}

/// Synthesize waveforms from stage-2 phasors, estimate synchrophasors at
/// every reporting instant whose window fits inside the run, and apply the
/// GPS-loss angle drift while GPS is lost.
///
/// Stage-2 magnitudes are RMS values; the waveform amplitude is √2 times
/// the magnitude so a clean nominal signal reports the stage-2 phasor.
pub fn run_pmu_chain(
    stage2: &[PhasorSample],
    spec: &FilterSpec,
    timing: &TimingErrorModel,
    signal_freq: &SignalFrequency,
) -> Result<Vec<PmuFrame>> {
    if stage2.len() < 2 {
        return Err(Error::invalid("PMU chain needs at least two stage-2 samples"));
    }
    if stage2.windows(2).any(|w| !(w[1].t > w[0].t)) {
        return Err(Error::invalid("stage-2 sample times must be strictly increasing"));
    }
    timing.validate()?;
    let profile = FrequencyProfile::new(signal_freq)?;
    let waves = synthesize(stage2, spec, timing, &profile);

    let fs = spec.sampling_freq;
    let f0 = spec.nominal_freq;
    let per_report = spec.samples_per_report() as i64;
    let half = spec.half_order() as i64;
    let len = waves.voltage.len() as i64;
    let start_time = waves.first_index as f64 / fs;

    // first absolute report index whose window starts inside the buffer
    let lowest = waves.first_index + half;
    let mut n = lowest.div_euclid(per_report) * per_report;
    if n < lowest {
        n += per_report;
    }

    let mut frames = Vec::new();
    while n - waves.first_index + half < len {
        let center = (n - waves.first_index) as usize;
        let mut v = estimate_phasor_at(&waves.voltage, waves.first_index, center, spec)?;
        let mut i = estimate_phasor_at(&waves.current, waves.first_index, center, spec)?;
        let report_time = (n / per_report) as f64 / spec.reporting_rate;

        let tau = timing.accumulated_error(center as u64, fs, start_time);
        let mut injected = 2.0 * PI * tau * f0;
        let lost = timing.loss_elapsed(report_time);
        if let Some(elapsed) = lost {
            let drift = gps_loss_phase_error(timing.gps_drift_rate, elapsed, f0);
            let rot = Complex64::from_polar(1.0, drift);
            v *= rot;
            i *= rot;
            injected += drift;
        }

        let r = interpolate(stage2, report_time);
        let offset = 2.0 * PI * (profile.cycles(report_time) - f0 * report_time);
        frames.push(PmuFrame {
            report_time,
            v_phasor: v,
            i_phasor: i,
            injected_angle_error: injected,
            gps_locked: lost.is_none(),
            v_reference: Complex64::from_polar(r.v, offset + r.delta_v),
            i_reference: Complex64::from_polar(r.i, offset + r.delta_i),
        });
        n += per_report;
    }
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_profile_cycles() {
        let p = FrequencyProfile::new(&SignalFrequency::Constant(59.5)).unwrap();
        assert_eq!(p.cycles(2.0), 119.0);
        assert_eq!(p.freq_at(100.0), 59.5);
    }

    #[test]
    fn piecewise_profile_integrates_trapezoids() {
        let p = FrequencyProfile::new(&SignalFrequency::Piecewise(vec![(1.0, 60.0), (3.0, 58.0)])).unwrap();
        assert_eq!(p.cycles(1.0), 60.0);
        assert!((p.cycles(3.0) - (60.0 + 118.0)).abs() < 1e-12);
        assert!((p.cycles(4.0) - (178.0 + 58.0)).abs() < 1e-12);
        assert_eq!(p.freq_at(2.0), 59.0);
    }

    #[test]
    fn rejects_bad_profiles() {
        assert!(FrequencyProfile::new(&SignalFrequency::Constant(0.0)).is_err());
        assert!(FrequencyProfile::new(&SignalFrequency::Piecewise(vec![])).is_err());
        assert!(FrequencyProfile::new(&SignalFrequency::Piecewise(vec![(1.0, 60.0), (1.0, 59.0)])).is_err());
    }

    #[test]
    fn short_series_rejected() {
        let s = [PhasorSample {
            t: 0.0,
            reading: PhasorReading::default(),
        }];
        let spec = crate::pmu::make_filter(60.0, 60.0, &Default::default()).unwrap();
        assert!(run_pmu_chain(&s, &spec, &TimingErrorModel::default(), &SignalFrequency::default()).is_err());
    }
}
