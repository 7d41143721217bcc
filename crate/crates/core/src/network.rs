//! SCADA communication network: latency, buffering, sample discard and the
//! resulting measurement errors at the control centre.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{GmmParams, LmmParams};
use crate::error::{Error, Result};
use crate::scada::IedOutput;

/// Source of per-sample transmission latency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LatencyModel {
    Constant { constant: f64 },
    Lmm(LmmParams),
}

impl LatencyModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            LatencyModel::Constant { constant } if !(*constant >= 0.0 && constant.is_finite()) => {
                Err(Error::invalid(format!("constant latency {constant} must be >= 0")))
            }
            _ => Ok(()),
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            LatencyModel::Constant { constant } => *constant,
            LatencyModel::Lmm(p) => p.draw(rng),
        }
    }
}

impl From<LmmParams> for LatencyModel {
    fn from(p: LmmParams) -> Self {
        LatencyModel::Lmm(p)
    }
}

/// How the wait between receipt and use is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BufferModel {
    /// Uniform on [0, b_k].
    #[default]
    Uniform,
    /// Always zero; total delay equals latency.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleStatus {
    Retained,
    Discarded,
}

impl SampleStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SampleStatus::Retained => "retained",
            SampleStatus::Discarded => "discarded",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayEntry {
    pub k: usize,
    pub send_time: f64,
    pub latency: f64,
    /// Upper bound on the buffer wait; `None` for the final sample.
    pub buffer_limit: Option<f64>,
    pub buffer: f64,
    pub total_delay: f64,
    pub status: SampleStatus,
}

impl DelayEntry {
    pub fn arrival(&self) -> f64 {
        self.send_time + self.latency
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelaySchedule {
    pub sampling_period: f64,
    pub entries: Vec<DelayEntry>,
}

impl DelaySchedule {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn discarded(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries
            .iter()
            .filter(|e| e.status == SampleStatus::Discarded)
            .map(|e| e.k)
    }

    pub fn discard_count(&self) -> usize {
        self.discarded().count()
    }

    /// Shift every send time by a constant skew offset.
    pub fn apply_time_skew(&mut self, offset: f64) {
        for e in &mut self.entries {
            e.send_time += offset;
        }
    }

    /// Audit CSV: `k,send_time,latency,b_k,buffer,total_delay,status`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "send_time", "latency", "b_k", "buffer", "total_delay", "status"])?;
        for e in &self.entries {
            w.write_record([
                e.k.to_string(),
                e.send_time.to_string(),
                e.latency.to_string(),
                e.buffer_limit.map(|b| b.to_string()).unwrap_or_default(),
                e.buffer.to_string(),
                e.total_delay.to_string(),
                e.status.as_str().to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<schedule>", e))?;
        Ok(())
    }
}

/// Buffer limits from consecutive latencies: b_k = S + (l_{k+1} − l_k).
pub fn buffer_limits(latencies: &[f64], sampling_period: f64) -> Vec<f64> {
    latencies.windows(2).map(|w| sampling_period + (w[1] - w[0])).collect()
}

/// Schedule for a given latency sequence; buffer waits are drawn from `rng`.
pub fn schedule_from_latencies<R: Rng + ?Sized>(
    latencies: &[f64],
    sampling_period: f64,
    start_time: f64,
    buffer: BufferModel,
    rng: &mut R,
) -> Result<DelaySchedule> {
    if !(sampling_period > 0.0 && sampling_period.is_finite()) {
        return Err(Error::invalid(format!("sampling period {sampling_period} must be > 0")));
    }
    if latencies.len() < 2 {
        return Err(Error::invalid("a delay schedule needs at least 2 samples"));
    }
    if let Some(l) = latencies.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
        return Err(Error::invalid(format!("latency {l} must be finite and >= 0")));
    }
    let limits = buffer_limits(latencies, sampling_period);
    let entries = latencies
        .iter()
        .enumerate()
        .map(|(k, &latency)| {
            let buffer_limit = limits.get(k).copied();
            let status = match buffer_limit {
                Some(b) if b < 0.0 => SampleStatus::Discarded,
                _ => SampleStatus::Retained,
            };
            let wait = match (status, buffer_limit, buffer) {
                (SampleStatus::Retained, Some(b), BufferModel::Uniform) => b * rng.random::<f64>(),
                _ => 0.0,
            };
            DelayEntry {
                k,
                send_time: start_time + k as f64 * sampling_period,
                latency,
                buffer_limit,
                buffer: wait,
                total_delay: latency + wait,
                status,
            }
        })
        .collect();
    Ok(DelaySchedule {
        sampling_period,
        entries,
    })
}

/// Draw latencies for `n_samples` scans and derive buffers, delays and
/// discard flags. Latency and buffer draws use separate streams.
pub fn build_delay_schedule<R: Rng + ?Sized, B: Rng + ?Sized>(
    latency: &LatencyModel,
    sampling_period: f64,
    n_samples: usize,
    start_time: f64,
    buffer: BufferModel,
    latency_rng: &mut R,
    buffer_rng: &mut B,
) -> Result<DelaySchedule> {
    latency.validate()?;
    if n_samples < 2 {
        return Err(Error::invalid("a delay schedule needs at least 2 samples"));
    }
    let latencies: Vec<f64> = (0..n_samples).map(|_| latency.draw(latency_rng)).collect();
    schedule_from_latencies(&latencies, sampling_period, start_time, buffer, buffer_rng)
}

/// Control-centre error on voltage, active and reactive power.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CnError {
    pub v: f64,
    pub p: f64,
    pub q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    #[default]
    Linear,
    Nearest,
}

/// Historical V/P/Q series sampled at strictly increasing times.
#[derive(Debug, Clone, PartialEq)]
pub struct History {
    t: Vec<f64>,
    v: Vec<f64>,
    p: Vec<f64>,
    q: Vec<f64>,
}

impl History {
    pub fn new(t: Vec<f64>, v: Vec<f64>, p: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        let n = t.len();
        if n == 0 || v.len() != n || p.len() != n || q.len() != n {
            return Err(Error::invalid("history channels must be non-empty and equally long"));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("history times must be strictly increasing"));
        }
        Ok(Self { t, v, p, q })
    }

    pub fn span(&self) -> (f64, f64) {
        (self.t[0], self.t[self.t.len() - 1])
    }

    pub fn covers(&self, t: f64) -> bool {
        let (lo, hi) = self.span();
        t >= lo && t <= hi
    }

    /// (V, P, Q) at `t`, which must lie within the span.
    fn at(&self, t: f64, mode: Interpolation) -> (f64, f64, f64) {
        let idx = self.t.partition_point(|x| *x <= t);
        if idx == 0 {
            return (self.v[0], self.p[0], self.q[0]);
        }
        let lo = idx - 1;
        if lo + 1 >= self.t.len() || self.t[lo] == t {
            return (self.v[lo], self.p[lo], self.q[lo]);
        }
        let hi = lo + 1;
        let frac = (t - self.t[lo]) / (self.t[hi] - self.t[lo]);
        match mode {
            Interpolation::Nearest => {
                let j = if frac < 0.5 { lo } else { hi };
                (self.v[j], self.p[j], self.q[j])
            }
            Interpolation::Linear => {
                let lerp = |c: &[f64]| c[lo] + frac * (c[hi] - c[lo]);
                (lerp(&self.v), lerp(&self.p), lerp(&self.q))
            }
        }
    }
}

/// Errors from replaying the historical series across each sample's delay:
/// e = z(t_k + delay_k) − z(t_k).
pub fn scheme1_errors(history: &History, schedule: &DelaySchedule, mode: Interpolation) -> Result<Vec<CnError>> {
    schedule
        .entries
        .iter()
        .map(|e| {
            let (t0, t1) = (e.send_time, e.send_time + e.total_delay);
            for t in [t0, t1] {
                if !history.covers(t) {
                    return Err(Error::HistoryCoverage {
                        sample: e.k,
                        instant: t,
                    });
                }
            }
            if t1 == t0 {
                return Ok(CnError::default());
            }
            let (v0, p0, q0) = history.at(t0, mode);
            let (v1, p1, q1) = history.at(t1, mode);
            Ok(CnError {
                v: v1 - v0,
                p: p1 - p0,
                q: q1 - q0,
            })
        })
        .collect()
}

/// Mixture parameters of the V, P and Q errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scheme2Params {
    pub v: GmmParams,
    pub p: GmmParams,
    pub q: GmmParams,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CnErrorConfig {
    /// No network error.
    Off,
    Scheme1 {
        history: History,
        interpolation: Interpolation,
    },
    Scheme2(Scheme2Params),
}

/// Three independent mixture draws per sample.
pub fn scheme2_errors<R: Rng + ?Sized>(params: &Scheme2Params, n: usize, rng: &mut R) -> Vec<CnError> {
    (0..n)
        .map(|_| CnError {
            v: params.v.draw(rng),
            p: params.p.draw(rng),
            q: params.q.draw(rng),
        })
        .collect()
}

/// Network errors for every scheduled sample under `config`.
pub fn cn_errors<R: Rng + ?Sized>(
    config: &CnErrorConfig,
    schedule: &DelaySchedule,
    rng: &mut R,
) -> Result<Vec<CnError>> {
    match config {
        CnErrorConfig::Off => Ok(vec![CnError::default(); schedule.len()]),
        CnErrorConfig::Scheme1 { history, interpolation } => scheme1_errors(history, schedule, *interpolation),
        CnErrorConfig::Scheme2(p) => Ok(scheme2_errors(p, schedule.len(), rng)),
    }
}

/// Values received at the control centre.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ReceivedValues {
    pub v4: f64,
    pub p4: f64,
    pub q4: f64,
}

pub fn apply_cn(stage3: &IedOutput, error: &CnError) -> ReceivedValues {
    ReceivedValues {
        v4: stage3.v3 + error.v,
        p4: stage3.p3 + error.p,
        q4: stage3.q3 + error.q,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn constant_latency_gives_period_limits() {
        let s = build_delay_schedule(
            &LatencyModel::Constant { constant: 0.37 },
            0.1,
            50,
            0.0,
            BufferModel::Uniform,
            &mut seeded(0),
            &mut seeded(1),
        )
        .unwrap();
        assert_eq!(s.discard_count(), 0);
        for e in &s.entries[..49] {
            assert_eq!(e.buffer_limit, Some(0.1));
            assert!(e.buffer >= 0.0 && e.buffer <= 0.1);
        }
        let last = s.entries.last().unwrap();
        assert_eq!(last.buffer_limit, None);
        assert_eq!(last.buffer, 0.0);
        assert_eq!(last.status, SampleStatus::Retained);
    }

    #[test]
    fn late_sample_is_discarded() {
        let s = schedule_from_latencies(&[0.5, 0.1], 0.2, 0.0, BufferModel::Uniform, &mut seeded(0)).unwrap();
        let b = s.entries[0].buffer_limit.unwrap();
        assert!((b + 0.2).abs() < 1e-15);
        assert_eq!(s.entries[0].status, SampleStatus::Discarded);
        assert_eq!(s.entries[1].status, SampleStatus::Retained);
    }

    #[test]
    fn rejects_bad_inputs() {
        let lat = LatencyModel::Constant { constant: 0.1 };
        assert!(
            build_delay_schedule(&lat, 0.0, 10, 0.0, BufferModel::Uniform, &mut seeded(0), &mut seeded(0)).is_err()
        );
        assert!(build_delay_schedule(&lat, 1.0, 1, 0.0, BufferModel::Uniform, &mut seeded(0), &mut seeded(0)).is_err());
        let neg = LatencyModel::Constant { constant: -1.0 };
        assert!(
            build_delay_schedule(&neg, 1.0, 10, 0.0, BufferModel::Uniform, &mut seeded(0), &mut seeded(0)).is_err()
        );
    }

    #[test]
    fn buffer_none_keeps_latency() {
        let s = schedule_from_latencies(&[0.3, 0.3, 0.3], 1.0, 0.0, BufferModel::None, &mut seeded(0)).unwrap();
        assert!(s.entries.iter().all(|e| e.total_delay == 0.3));
    }

    fn ramp_history() -> History {
        let t: Vec<f64> = (0..=100).map(|i| i as f64 * 0.1).collect();
        History::new(t.clone(), t.clone(), vec![2.0; t.len()], t.iter().map(|x| -x).collect()).unwrap()
    }

    #[test]
    fn ramp_history_yields_delay() {
        let s = schedule_from_latencies(&[0.3; 20], 0.25, 0.0, BufferModel::None, &mut seeded(0)).unwrap();
        let errs = scheme1_errors(&ramp_history(), &s, Interpolation::Linear).unwrap();
        for e in errs {
            assert!((e.v - 0.3).abs() < 1e-12);
            assert_eq!(e.p, 0.0);
            assert!((e.q + 0.3).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_delay_zero_error() {
        let s = schedule_from_latencies(&[0.0; 10], 0.5, 0.0, BufferModel::None, &mut seeded(0)).unwrap();
        let errs = scheme1_errors(&ramp_history(), &s, Interpolation::Nearest).unwrap();
        assert!(errs.iter().all(|e| *e == CnError::default()));
    }

    #[test]
    fn uncovered_history_names_instant() {
        let s = schedule_from_latencies(&[0.5; 30], 0.5, 0.0, BufferModel::None, &mut seeded(0)).unwrap();
        match scheme1_errors(&ramp_history(), &s, Interpolation::Linear) {
            Err(Error::HistoryCoverage { sample, instant }) => {
                assert_eq!(sample, 20);
                assert_eq!(instant, 10.5);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nearest_interpolation_snaps() {
        let h = ramp_history();
        assert_eq!(h.at(0.34, Interpolation::Nearest).0, 0.30000000000000004);
        assert_eq!(h.at(0.36, Interpolation::Nearest).0, 0.4);
    }

    #[test]
    fn receipt_arithmetic() {
        let s3 = IedOutput {
            v3: 1.0,
            p3: 0.5,
            q3: 0.2,
            ..Default::default()
        };
        let out = apply_cn(
            &s3,
            &CnError {
                v: -0.003,
                p: 0.0,
                q: 0.0,
            },
        );
        assert_eq!(out.v4, 0.997);
        assert_eq!(apply_cn(&s3, &CnError::default()).p4, 0.5);
    }

    #[test]
    fn csv_has_audit_columns() {
        let s = schedule_from_latencies(&[0.5, 0.1, 0.2], 0.2, 0.0, BufferModel::Uniform, &mut seeded(0)).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("k,send_time,latency,b_k,buffer,total_delay,status"));
        assert!(lines.next().unwrap().ends_with(",discarded"));
        assert_eq!(text.lines().count(), 4);
    }
}
