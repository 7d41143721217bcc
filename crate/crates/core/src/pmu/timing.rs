//! Sampling-clock error, off-nominal frequency and GPS-loss relations.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::distributions::exponential;
use crate::error::{Error, Result};

pub const SECONDS_PER_DAY: f64 = 86_400.0;

/// Phase error in degrees caused by a sampling-instant error of `t_error` seconds.
pub fn sampling_time_phase_error(t_error: f64, nominal_freq: f64) -> f64 {
    360.0 * t_error * nominal_freq
}

/// Frequency (Hz) of the estimation-error oscillation for an input at `signal_freq`.
pub fn off_nominal_error_frequency(nominal_freq: f64, signal_freq: f64) -> f64 {
    2.0 * (nominal_freq - signal_freq).abs()
}

/// Phase error in radians after `elapsed_loss` seconds without GPS, with the
/// oscillator drifting `drift_us_per_s` microseconds per second.
pub fn gps_loss_phase_error(drift_us_per_s: f64, elapsed_loss: f64, nominal_freq: f64) -> f64 {
    2.0 * PI * (drift_us_per_s * elapsed_loss) * 1e-6 * nominal_freq
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossEvent {
    pub start: f64,
    pub duration: f64,
}

impl LossEvent {
    pub fn end(&self) -> f64 {
        self.start + self.duration
    }

    /// Seconds since loss began, if `t` falls inside the closed interval.
    pub fn elapsed_at(&self, t: f64) -> Option<f64> {
        (t >= self.start && t <= self.end()).then_some(t - self.start)
    }
}

/// Sort and merge overlapping or touching events.
pub fn merge_events(mut events: Vec<LossEvent>) -> Vec<LossEvent> {
    events.sort_by(|a, b| a.start.total_cmp(&b.start));
    let mut merged: Vec<LossEvent> = Vec::with_capacity(events.len());
    for e in events {
        match merged.last_mut() {
            Some(last) if e.start <= last.end() => {
                let end = last.end().max(e.end());
                last.duration = end - last.start;
            }
            _ => merged.push(e),
        }
    }
    merged
}

/// GPS losses over `[0, duration)`: Poisson starts at `loss_rate_per_day`,
/// exponential recovery times at `recovery_rate` per second, overlaps merged.
pub fn generate_gps_events<R: Rng + ?Sized>(
    loss_rate_per_day: f64,
    recovery_rate: f64,
    duration: f64,
    rng: &mut R,
) -> Result<Vec<LossEvent>> {
    if !(loss_rate_per_day >= 0.0 && loss_rate_per_day.is_finite()) {
        return Err(Error::invalid(format!(
            "GPS loss rate {loss_rate_per_day} must be >= 0"
        )));
    }
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(Error::invalid(format!("duration {duration} must be >= 0")));
    }
    let recovery = exponential(recovery_rate)?;
    if loss_rate_per_day == 0.0 {
        return Ok(Vec::new());
    }
    let gaps = exponential(loss_rate_per_day / SECONDS_PER_DAY)?;
    let mut events = Vec::new();
    let mut t = gaps.sample(rng);
    while t < duration {
        events.push(LossEvent {
            start: t,
            duration: recovery.sample(rng),
        });
        t += gaps.sample(rng);
    }
    Ok(merge_events(events))
}

/// Sampling-clock error sources of one PMU.
///
/// The clock gains `sample_increment` seconds per sample. When
/// `pps_locked`, a pulse at every whole second of run time clears the
/// accumulated error, except while GPS is lost. During a loss the phase
/// estimate drifts by `gps_drift_rate` microseconds per second; with
/// `drift_perturbs_sampling` the same drift also shifts the sampling instants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimingErrorModel {
    pub sample_increment: f64,
    pub pps_locked: bool,
    pub gps_drift_rate: f64,
    pub loss_events: Vec<LossEvent>,
    pub drift_perturbs_sampling: bool,
}

impl Default for TimingErrorModel {
    fn default() -> Self {
        Self {
            sample_increment: 0.0,
            pps_locked: true,
            gps_drift_rate: 0.0,
            loss_events: Vec::new(),
            drift_perturbs_sampling: false,
        }
    }
}

impl TimingErrorModel {
    pub fn validate(&self) -> Result<()> {
        if !self.sample_increment.is_finite() || !self.gps_drift_rate.is_finite() {
            return Err(Error::invalid("timing error rates must be finite"));
        }
        for e in &self.loss_events {
            if !e.start.is_finite() || !(e.duration >= 0.0 && e.duration.is_finite()) {
                return Err(Error::invalid(format!(
                    "GPS loss event at {} has invalid duration {}",
                    e.start, e.duration
                )));
            }
        }
        Ok(())
    }

    /// Elapsed loss time at run time `t`, if GPS is lost then.
    pub fn loss_elapsed(&self, t: f64) -> Option<f64> {
        self.loss_events.iter().find_map(|e| e.elapsed_at(t))
    }

    /// Accumulated sampling-time error τ of waveform sample `index`, counted
    /// from the run start at `start_time`, on a clock of `sampling_freq` Hz.
    pub fn accumulated_error(&self, index: u64, sampling_freq: f64, start_time: f64) -> f64 {
        let t = start_time + index as f64 / sampling_freq;
        let per_second = sampling_freq.round().max(1.0) as u64;
        let lost = self.loss_elapsed(t);
        let since_reset = if !self.pps_locked {
            index
        } else if let Some(elapsed) = lost {
            // last pulse received before the loss began
            let loss_start = ((t - elapsed - start_time) * sampling_freq).ceil().max(0.0) as u64;
            index - (loss_start / per_second) * per_second
        } else {
            index % per_second
        };
        let mut tau = self.sample_increment * since_reset as f64;
        if self.drift_perturbs_sampling {
            if let Some(elapsed) = lost {
                tau += self.gps_drift_rate * 1e-6 * elapsed;
            }
        }
        tau
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn phase_error_of_one_microsecond() {
        assert_eq!(sampling_time_phase_error(0.0, 60.0), 0.0);
        assert!((sampling_time_phase_error(1e-6, 60.0) - 0.0216).abs() < 1e-15);
        assert_eq!(
            sampling_time_phase_error(-1e-6, 60.0),
            -sampling_time_phase_error(1e-6, 60.0)
        );
    }

    #[test]
    fn error_frequency_is_symmetric() {
        assert_eq!(off_nominal_error_frequency(60.0, 60.0), 0.0);
        assert_eq!(off_nominal_error_frequency(60.0, 59.5), 1.0);
        assert_eq!(off_nominal_error_frequency(60.0, 60.5), 1.0);
    }

    #[test]
    fn gps_loss_ten_minutes() {
        assert_eq!(gps_loss_phase_error(0.15, 0.0, 60.0), 0.0);
        let deg = gps_loss_phase_error(0.15, 600.0, 60.0).to_degrees();
        assert!((deg - 1.94).abs() / 1.94 < 0.005, "{deg}");
        let a = gps_loss_phase_error(0.15, 10.0, 60.0);
        let b = gps_loss_phase_error(0.15, 20.0, 60.0);
        assert!((b - 2.0 * a).abs() < 1e-15);
    }

    #[test]
    fn merge_joins_overlaps() {
        let ev = merge_events(vec![
            LossEvent {
                start: 10.0,
                duration: 5.0,
            },
            LossEvent {
                start: 0.0,
                duration: 2.0,
            },
            LossEvent {
                start: 12.0,
                duration: 10.0,
            },
        ]);
        assert_eq!(
            ev,
            vec![
                LossEvent {
                    start: 0.0,
                    duration: 2.0
                },
                LossEvent {
                    start: 10.0,
                    duration: 12.0
                }
            ]
        );
    }

    #[test]
    fn zero_rate_gives_no_events() {
        assert!(generate_gps_events(0.0, 0.13, 86_400.0, &mut seeded(0))
            .unwrap()
            .is_empty());
        assert!(generate_gps_events(1e-12, 0.13, 86_400.0, &mut seeded(0))
            .unwrap()
            .is_empty());
        assert!(generate_gps_events(5.0, 0.0, 86_400.0, &mut seeded(0)).is_err());
    }

    #[test]
    fn sawtooth_resets_each_second() {
        let m = TimingErrorModel {
            sample_increment: 1e-7,
            ..Default::default()
        };
        assert_eq!(m.accumulated_error(0, 960.0, 0.0), 0.0);
        assert_eq!(m.accumulated_error(960, 960.0, 0.0), 0.0);
        assert!((m.accumulated_error(961, 960.0, 0.0) - 1e-7).abs() < 1e-20);
        let unlocked = TimingErrorModel { pps_locked: false, ..m };
        assert!(unlocked.accumulated_error(960, 960.0, 0.0) > 0.0);
    }

    #[test]
    fn loss_suspends_pps_reset() {
        let m = TimingErrorModel {
            sample_increment: 1e-7,
            loss_events: vec![LossEvent {
                start: 1.5,
                duration: 2.0,
            }],
            ..Default::default()
        };
        // 2.0 s is inside the loss: error keeps accumulating from the 1 s pulse
        let tau = m.accumulated_error(1920, 960.0, 0.0);
        assert!((tau - 960.0 * 1e-7).abs() < 1e-15);
        assert_eq!(m.accumulated_error(4 * 960, 960.0, 0.0), 0.0);
    }
}
