use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// M-class low-pass reference frequencies (Hz) by nominal frequency and
/// reporting rate (frames per second).
pub const M_CLASS_TABLE: &[(f64, f64, f64)] = &[
    (50.0, 10.0, 1.779),
    (50.0, 25.0, 4.355),
    (50.0, 50.0, 7.75),
    (50.0, 100.0, 14.1),
    (60.0, 10.0, 1.78),
    (60.0, 12.0, 2.125),
    (60.0, 15.0, 2.64),
    (60.0, 20.0, 3.50),
    (60.0, 30.0, 5.02),
    (60.0, 60.0, 8.19),
    (60.0, 120.0, 16.25),
];

/// Tabulated filter order for 60 Hz at 60 frames per second.
pub const ORDER_60HZ_60FPS: usize = 70;

/// Samples per nominal cycle of the reference sampling clock.
pub const SAMPLES_PER_CYCLE: f64 = 16.0;

/// Explicit values that replace the tabulated or derived defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterOverrides {
    pub order: Option<usize>,
    pub filter_ref_freq: Option<f64>,
    pub sampling_freq: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterSpec {
    pub reporting_rate: f64,
    pub filter_ref_freq: f64,
    pub order: usize,
    pub sampling_freq: f64,
    pub nominal_freq: f64,
    /// W(k) for k = −N/2 ..= N/2.
    coefficients: Vec<f64>,
    gain: f64,
}

/// Supported (nominal frequency, reporting rate) pairs, for error messages.
pub fn supported_pairs() -> String {
    M_CLASS_TABLE
        .iter()
        .map(|(f0, fs, _)| format!("{f0} Hz/{fs} fps"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn table_ref_freq(reporting_rate: f64, nominal_freq: f64) -> Option<f64> {
    M_CLASS_TABLE
        .iter()
        .find(|(f0, fs, _)| *f0 == nominal_freq && *fs == reporting_rate)
        .map(|(_, _, ffr)| *ffr)
}

/// Hamming-windowed sinc coefficient at tap `k`.
pub fn coefficient(k: i64, order: usize, filter_ref_freq: f64, sampling_freq: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let x = 2.0 * PI * (2.0 * filter_ref_freq / sampling_freq) * k as f64;
    let hamming = 0.54 + 0.46 * (2.0 * PI * k as f64 / order as f64).cos();
    x.sin() / x * hamming
}

/// Even order closest to F_sampling / F_fr; used when no order is tabulated.
fn derived_order(filter_ref_freq: f64, sampling_freq: f64) -> usize {
    let n = (sampling_freq / filter_ref_freq / 2.0).round() as usize * 2;
    n.max(2)
}

impl FilterSpec {
    pub fn new(
        reporting_rate: f64,
        nominal_freq: f64,
        filter_ref_freq: f64,
        order: usize,
        sampling_freq: f64,
    ) -> Result<Self> {
        for (name, x) in [
            ("reporting rate", reporting_rate),
            ("nominal frequency", nominal_freq),
            ("filter reference frequency", filter_ref_freq),
            ("sampling frequency", sampling_freq),
        ] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::invalid(format!("{name} {x} must be > 0")));
            }
        }
        if order == 0 || !order.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "filter order {order} must be even and positive"
            )));
        }
        let per_frame = sampling_freq / reporting_rate;
        if (per_frame - per_frame.round()).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "sampling frequency {sampling_freq} is not a multiple of reporting rate {reporting_rate}"
            )));
        }
        let half = (order / 2) as i64;
        let coefficients: Vec<f64> = (-half..=half)
            .map(|k| coefficient(k, order, filter_ref_freq, sampling_freq))
            .collect();
        let gain: f64 = coefficients.iter().sum();
        if gain <= 0.0 {
            return Err(Error::invalid(format!("filter gain {gain} must be positive")));
        }
        Ok(Self {
            reporting_rate,
            filter_ref_freq,
            order,
            sampling_freq,
            nominal_freq,
            coefficients,
            gain,
        })
    }

    pub fn half_order(&self) -> usize {
        self.order / 2
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// W(k) for k in −N/2..=N/2.
    pub fn w(&self, k: i64) -> f64 {
        self.coefficients[(k + self.half_order() as i64) as usize]
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn sampling_interval(&self) -> f64 {
        1.0 / self.sampling_freq
    }

    /// Waveform samples between consecutive reports.
    pub fn samples_per_report(&self) -> usize {
        (self.sampling_freq / self.reporting_rate).round() as usize
    }

    /// Coefficient table `k,w` plus the gain, for audit.
    pub fn coefficient_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# reporting_rate={} nominal_freq={} filter_ref_freq={} order={} sampling_freq={} gain={}",
            self.reporting_rate, self.nominal_freq, self.filter_ref_freq, self.order, self.sampling_freq, self.gain
        );
        out.push_str("k,w\n");
        let half = self.half_order() as i64;
        for (k, w) in (-half..=half).zip(&self.coefficients) {
            let _ = writeln!(out, "{k},{w}");
        }
        out
    }
}

/// M-class filter for a tabulated (reporting rate, nominal frequency) pair,
/// or fully specified by `overrides`.
pub fn make_filter(reporting_rate: f64, nominal_freq: f64, overrides: &FilterOverrides) -> Result<FilterSpec> {
    let filter_ref_freq = match overrides
        .filter_ref_freq
        .or_else(|| table_ref_freq(reporting_rate, nominal_freq))
    {
        Some(f) => f,
        None => {
            return Err(Error::UnsupportedFilter {
                reporting_rate,
                nominal_freq,
                supported: supported_pairs(),
            })
        }
    };
    let sampling_freq = overrides.sampling_freq.unwrap_or(SAMPLES_PER_CYCLE * nominal_freq);
    let order = overrides.order.unwrap_or_else(|| {
        if nominal_freq == 60.0 && reporting_rate == 60.0 {
            ORDER_60HZ_60FPS
        } else {
            derived_order(filter_ref_freq, sampling_freq)
        }
    });
    FilterSpec::new(reporting_rate, nominal_freq, filter_ref_freq, order, sampling_freq)
}

/// Every tabulated configuration with default order and sampling.
pub fn shipped_filters() -> Vec<FilterSpec> {
    M_CLASS_TABLE
        .iter()
        .map(|(f0, fs, _)| make_filter(*fs, *f0, &FilterOverrides::default()).expect("tabulated filter"))
        .collect()
}
