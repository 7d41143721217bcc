use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use super::filter::FilterSpec;
use super::timing::TimingErrorModel;
use crate::error::{Error, Result};

/// e^{-j·2π·f0·n/fs}, with the cycle count reduced before scaling by 2π so
/// large sample indices keep full precision.
fn nominal_rotation(n: i64, nominal_freq: f64, sampling_freq: f64) -> Complex64 {
    let cycles = (nominal_freq * n as f64 / sampling_freq).fract();
    Complex64::from_polar(1.0, -2.0 * PI * cycles)
}

/// Windowed-DFT synchrophasor at sample `center` of `samples`, where
/// `samples[0]` was taken at absolute sample index `first_index`.
///
/// The demodulating rotation always uses the nominal frequency of `spec`.
pub fn estimate_phasor_at(samples: &[f64], first_index: i64, center: usize, spec: &FilterSpec) -> Result<Complex64> {
    let half = spec.half_order();
    let start = center as i64 - half as i64;
    let end = center as i64 + half as i64;
    if start < 0 || end >= samples.len() as i64 {
        return Err(Error::WindowOutOfRange {
            start,
            end,
            available: samples.len(),
        });
    }
    let window = &samples[start as usize..=end as usize];
    let acc: Complex64 = window
        .iter()
        .zip(spec.coefficients())
        .enumerate()
        .map(|(j, (x, w))| {
            let n = first_index + start + j as i64;
            nominal_rotation(n, spec.nominal_freq, spec.sampling_freq) * (x * w)
        })
        .sum();
    Ok(acc * (SQRT_2 / spec.gain()))
}

/// [`estimate_phasor_at`] for a buffer whose first sample is at t = 0.
pub fn estimate_phasor(samples: &[f64], center: usize, spec: &FilterSpec) -> Result<Complex64> {
    estimate_phasor_at(samples, 0, center, spec)
}

/// Samples of `amplitude · cos(2π·f·t + angle)` over `duration` seconds at
/// `sampling_freq`, each taken at its nominal instant plus the timing
/// model's accumulated error.
pub fn synth_waveform(
    amplitude: f64,
    angle: f64,
    signal_freq: f64,
    sampling_freq: f64,
    duration: f64,
    timing: &TimingErrorModel,
) -> Result<Vec<f64>> {
    if !(signal_freq > 0.0 && sampling_freq > 0.0) {
        return Err(Error::invalid("signal and sampling frequencies must be > 0"));
    }
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::invalid(format!("duration {duration} must be > 0")));
    }
    timing.validate()?;
    let n = (duration * sampling_freq).round() as u64;
    Ok((0..n)
        .map(|i| {
            let tau = timing.accumulated_error(i, sampling_freq, 0.0);
            let cycles = (signal_freq * i as f64 / sampling_freq).fract() + signal_freq * tau;
            amplitude * (2.0 * PI * cycles + angle).cos()
        })
        .collect())
}

/// Total vector error of `estimate` against `reference`.
pub fn total_vector_error(estimate: Complex64, reference: Complex64) -> f64 {
    (estimate - reference).norm() / reference.norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pmu::filter::{make_filter, FilterOverrides};

    fn spec() -> FilterSpec {
        make_filter(60.0, 60.0, &FilterOverrides::default()).unwrap()
    }

    #[test]
    fn zero_input_zero_phasor() {
        let x = vec![0.0; 200];
        assert_eq!(estimate_phasor(&x, 100, &spec()).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn window_must_fit() {
        let x = vec![0.0; 200];
        assert!(matches!(
            estimate_phasor(&x, 10, &spec()),
            Err(Error::WindowOutOfRange { .. })
        ));
        assert!(estimate_phasor(&x, 165, &spec()).is_err());
        assert!(estimate_phasor(&x, 164, &spec()).is_ok());
    }

    #[test]
    fn waveform_starts_at_amplitude() {
        let w = synth_waveform(1.0, 0.0, 60.0, 960.0, 1.0, &TimingErrorModel::default()).unwrap();
        assert_eq!(w[0], 1.0);
        assert_eq!(w.len(), 960);
    }

    #[test]
    fn doubling_amplitude_doubles_estimate() {
        let t = TimingErrorModel::default();
        let a = synth_waveform(SQRT_2, 0.3, 60.0, 960.0, 0.5, &t).unwrap();
        let b: Vec<f64> = a.iter().map(|x| 2.0 * x).collect();
        let pa = estimate_phasor(&a, 200, &spec()).unwrap();
        let pb = estimate_phasor(&b, 200, &spec()).unwrap();
        assert_eq!(pb.norm(), 2.0 * pa.norm());
    }
}
