use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pmu::PmuFrame;
use crate::stats::RunningStats;

use super::config::FrameFormat;
use super::run::{PmuRun, ScadaRecord, ScadaRun};

pub const SCADA_COLUMNS: [&str; 9] = ["k", "t", "status", "v4", "p4", "q4", "latency", "buffer", "total_delay"];
pub const SCADA_DEBUG_COLUMNS: [&str; 20] = [
    "t_truth", "v_true", "p_true", "q_true", "v1", "delta_v1", "i1", "delta_i1", "v2", "delta_v2", "i2", "delta_i2",
    "v3", "p3", "q3", "p2", "q2", "e_cn_v", "e_cn_p", "e_cn_q",
];
pub const PMU_COLUMNS: [&str; 7] = [
    "report_time",
    "v_mag",
    "v_angle_deg",
    "i_mag",
    "i_angle_deg",
    "gps_locked",
    "injected_angle_error_deg",
];

/// Shortest decimal that parses back to the same `f64`.
fn num(x: f64) -> String {
    x.to_string()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

pub fn write_scada_csv<W: Write>(records: &[ScadaRecord], debug_columns: bool, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = SCADA_COLUMNS.to_vec();
    if debug_columns {
        header.extend(SCADA_DEBUG_COLUMNS);
    }
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![
            r.k.to_string(),
            num(r.t),
            r.status.as_str().to_string(),
            num(r.received.v4),
            num(r.received.p4),
            num(r.received.q4),
            num(r.latency),
            num(r.buffer),
            num(r.total_delay),
        ];
        if debug_columns {
            let (v, p, q) = r.truth_vpq();
            let (s1, s2, s3, e) = (r.stage1, r.stage2, r.stage3, r.cn_error);
            row.extend(
                [
                    r.truth.t, v, p, q, s1.v, s1.delta_v, s1.i, s1.delta_i, s2.v, s2.delta_v, s2.i, s2.delta_i, s3.v3,
                    s3.p3, s3.q3, s3.p2, s3.q2, e.v, e.p, e.q,
                ]
                .map(num),
            );
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<scada>", e))?;
    Ok(())
}

/// One exported PMU frame: voltage/current polar form with angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameRow {
    pub report_time: f64,
    pub v_mag: f64,
    pub v_angle_deg: f64,
    pub i_mag: f64,
    pub i_angle_deg: f64,
    pub gps_locked: bool,
    pub injected_angle_error_deg: f64,
}

impl From<&PmuFrame> for FrameRow {
    fn from(f: &PmuFrame) -> Self {
        Self {
            report_time: f.report_time,
            v_mag: f.v_phasor.norm(),
            v_angle_deg: f.v_phasor.arg().to_degrees(),
            i_mag: f.i_phasor.norm(),
            i_angle_deg: f.i_phasor.arg().to_degrees(),
            gps_locked: f.gps_locked,
            injected_angle_error_deg: f.injected_angle_error.to_degrees(),
        }
    }
}

pub fn write_frames<W: Write>(frames: &[PmuFrame], format: FrameFormat, mut out: W) -> Result<()> {
    match format {
        FrameFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(PMU_COLUMNS)?;
            for f in frames {
                let r = FrameRow::from(f);
                w.write_record([
                    num(r.report_time),
                    num(r.v_mag),
                    num(r.v_angle_deg),
                    num(r.i_mag),
                    num(r.i_angle_deg),
                    r.gps_locked.to_string(),
                    num(r.injected_angle_error_deg),
                ])?;
            }
            w.flush().map_err(|e| Error::io("<pmu>", e))?;
        }
        FrameFormat::Jsonl => {
            for f in frames {
                let line = serde_json::to_string(&FrameRow::from(f)).map_err(|e| Error::invalid(e.to_string()))?;
                writeln!(out, "{line}").map_err(|e| Error::io("<pmu>", e))?;
            }
            out.flush().map_err(|e| Error::io("<pmu>", e))?;
        }
    }
    Ok(())
}

/// Write `scada.csv` and `delay_schedule.csv` under `dir`.
pub fn write_scada_outputs(dir: &Path, run: &ScadaRun, debug_columns: bool) -> Result<Vec<PathBuf>> {
    let scada = dir.join("scada.csv");
    write_scada_csv(&run.records, debug_columns, create(&scada)?)?;
    let schedule = dir.join("delay_schedule.csv");
    run.schedule.write_csv(create(&schedule)?)?;
    Ok(vec![scada, schedule])
}

/// Write `pmu.csv` or `pmu.jsonl` under `dir`.
pub fn write_pmu_outputs(dir: &Path, run: &PmuRun, format: FrameFormat) -> Result<PathBuf> {
    let name = match format {
        FrameFormat::Csv => "pmu.csv",
        FrameFormat::Jsonl => "pmu.jsonl",
    };
    let path = dir.join(name);
    write_frames(&run.frames, format, create(&path)?)?;
    Ok(path)
}

/// Ordered `key=value` summary lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    entries: Vec<(String, String)>,
}

impl Summary {
    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    fn push_stats(&mut self, key: &str, stats: &RunningStats) {
        self.push(format!("{key}.mean"), stats.mean());
        self.push(format!("{key}.std"), stats.std());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn extend(&mut self, other: Summary) {
        self.entries.extend(other.entries);
    }
}

impl std::fmt::Display for Summary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// Per-stage error statistics for a SCADA run, in one pass over the records.
pub fn scada_summary(run: &ScadaRun) -> Summary {
    let mut acc: Vec<RunningStats> = vec![RunningStats::new(); 18];
    for r in &run.records {
        let (v, p, q) = r.truth_vpq();
        let t = &r.truth;
        let (s1, s2, s3, e) = (r.stage1, r.stage2, r.stage3, r.cn_error);
        let errs = [
            s1.v - t.v_true,
            s1.delta_v - t.delta_v_true,
            s1.i - t.i_true,
            s1.delta_i - t.delta_i_true,
            s2.v - s1.v,
            s2.delta_v - s1.delta_v,
            s2.i - s1.i,
            s2.delta_i - s1.delta_i,
            s3.v3 - s2.v,
            s3.p3 - s3.p2,
            s3.q3 - s3.q2,
            e.v,
            e.p,
            e.q,
            r.received.v4 - v,
            r.received.p4 - p,
            r.received.q4 - q,
            r.total_delay,
        ];
        for (a, x) in acc.iter_mut().zip(errs) {
            a.push(x);
        }
    }
    let keys = [
        "scada.transformer.v",
        "scada.transformer.delta_v",
        "scada.transformer.i",
        "scada.transformer.delta_i",
        "scada.cable.v",
        "scada.cable.delta_v",
        "scada.cable.i",
        "scada.cable.delta_i",
        "scada.ied.v",
        "scada.ied.p",
        "scada.ied.q",
        "scada.cn.v",
        "scada.cn.p",
        "scada.cn.q",
        "scada.total.v",
        "scada.total.p",
        "scada.total.q",
        "scada.total_delay",
    ];
    let mut s = Summary::default();
    s.push("scada.samples", run.records.len());
    s.push("scada.discarded", run.schedule.discard_count());
    for (k, a) in keys.iter().zip(&acc) {
        s.push_stats(k, a);
    }
    s
}

/// Angle and magnitude error statistics for a PMU run.
pub fn pmu_summary(run: &PmuRun) -> Summary {
    let mut v_angle = RunningStats::new();
    let mut i_angle = RunningStats::new();
    let mut v_mag = RunningStats::new();
    let mut max_tve = 0.0f64;
    let mut unlocked = 0usize;
    let mut last_loss = None;
    for f in &run.frames {
        v_angle.push(f.v_angle_error().to_degrees());
        i_angle.push(f.i_angle_error().to_degrees());
        v_mag.push(f.v_phasor.norm() - f.v_reference.norm());
        max_tve = max_tve.max(crate::pmu::total_vector_error(f.v_phasor, f.v_reference));
        if !f.gps_locked {
            unlocked += 1;
            last_loss = Some((f.injected_angle_error.to_degrees(), f.v_angle_error().to_degrees()));
        }
    }
    let mut s = Summary::default();
    s.push("pmu.frames", run.frames.len());
    s.push("pmu.gps_unlocked_frames", unlocked);
    s.push_stats("pmu.v_angle_error_deg", &v_angle);
    s.push_stats("pmu.i_angle_error_deg", &i_angle);
    s.push_stats("pmu.v_mag_error", &v_mag);
    s.push("pmu.v_tve_max", max_tve);
    // accumulated error at the last unlocked frame, and what the estimator
    // reported there (its window may straddle recovery)
    if let Some((injected, measured)) = last_loss {
        s.push("gps_loss_final_angle_error_deg", format!("{injected:.4}"));
        s.push("gps_loss_final_measured_error_deg", format!("{measured:.4}"));
    }
    s
}
