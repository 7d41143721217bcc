use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Stage};
use crate::network::{
    build_delay_schedule, cn_errors, schedule_from_latencies, CnError, CnErrorConfig, DelaySchedule, History,
    ReceivedValues, SampleStatus,
};
use crate::pmu::{generate_gps_events, make_filter, merge_events, run_pmu_chain, PhasorSample, PmuFrame};
use crate::scada::{
    sample_systematic_error, CableErrors, IedErrors, IedOutput, PhasorReading, SystematicError, TransformerErrors,
    TransformerKind, TruthRecord,
};

use super::config::{CnScheme, RunConfig, SystematicMode};
use super::series::{load_history, load_truth};

/// RNG channel used by the SCADA chain.
pub const SCADA_CHANNEL: u32 = 0;
/// RNG channel used by the PMU chain.
pub const PMU_CHANNEL: u32 = 1;

/// One SCADA scan with every intermediate stage output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScadaRecord {
    pub k: usize,
    /// Scan time, including any time skew.
    pub t: f64,
    pub status: SampleStatus,
    pub truth: TruthRecord,
    pub stage1: PhasorReading,
    pub stage2: PhasorReading,
    pub stage3: IedOutput,
    pub cn_error: CnError,
    pub received: ReceivedValues,
    pub latency: f64,
    pub buffer: f64,
    pub total_delay: f64,
}

impl ScadaRecord {
    /// Noise-free voltage, active and reactive power from the truth record.
    pub fn truth_vpq(&self) -> (f64, f64, f64) {
        let (p, q) = crate::scada::complex_power(&self.truth.as_phasors());
        (self.truth.v_true, p, q)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScadaRun {
    pub records: Vec<ScadaRecord>,
    pub schedule: DelaySchedule,
    pub vt_systematic: SystematicError,
    pub ct_systematic: SystematicError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PmuRun {
    pub stage2: Vec<PhasorSample>,
    pub frames: Vec<PmuFrame>,
}

/// Systematic transformer errors shared by both chains.
pub fn systematic_errors(config: &RunConfig) -> Result<(SystematicError, SystematicError)> {
    let vt = config.transformer.vt.region(TransformerKind::Vt)?;
    let ct = config.transformer.ct.region(TransformerKind::Ct)?;
    match config.transformer.systematic {
        SystematicMode::Sampled => {
            let vt_e = sample_systematic_error(&vt, &mut config.stream("transformer", "systematic_vt", 0))?;
            let ct_e = sample_systematic_error(&ct, &mut config.stream("transformer", "systematic_ct", 0))?;
            Ok((vt_e, ct_e))
        }
        SystematicMode::Off => {
            let zero = SystematicError {
                ratio_dev: 0.0,
                angle_dev: 0.0,
            };
            Ok((zero, zero))
        }
    }
}

/// Index of the last truth record at or before `t`; the first record
/// stands in for instants before the series starts.
fn preceding(truth: &[TruthRecord], t: f64) -> usize {
    truth.partition_point(|r| r.t <= t).saturating_sub(1)
}

/// Stage 1 and 2 outputs for one truth record.
fn front_end<R: Rng + ?Sized, C: Rng + ?Sized>(
    truth: &TruthRecord,
    sys: (&SystematicError, &SystematicError),
    config: &RunConfig,
    transformer_rng: &mut R,
    cable_rng: &mut C,
    index: usize,
) -> Result<(PhasorReading, PhasorReading)> {
    truth.validate().map_err(|e| e.at_sample(Stage::Transformer, index))?;
    let stage1 = TransformerErrors::draw(sys.0, sys.1, &config.noise, transformer_rng).apply(truth);
    let stage2 = CableErrors::draw(&config.noise, cable_rng).apply(&stage1);
    if ![stage2.v, stage2.delta_v, stage2.i, stage2.delta_i]
        .iter()
        .all(|x| x.is_finite())
    {
        return Err(Error::invalid("stage-2 values are not finite").at_sample(Stage::Cable, index));
    }
    Ok((stage1, stage2))
}

/// Load inputs named by `config` and run the SCADA chain.
pub fn run_scada(config: &RunConfig) -> Result<ScadaRun> {
    let truth = load_truth(&config.truth_path).map_err(|e| e.in_stage(Stage::Ingestion))?;
    let history = match (config.cn.scheme, &config.history_path) {
        (CnScheme::Scheme1, Some(path)) => Some(load_history(path).map_err(|e| e.in_stage(Stage::Ingestion))?),
        _ => None,
    };
    simulate_scada(config, &truth, history)
}

/// SCADA chain over in-memory truth (and Scheme 1 history).
///
/// Scans start at the first truth time and repeat every sampling period
/// while inside the truth span. Each scan reads the nearest preceding truth
/// record.
pub fn simulate_scada(config: &RunConfig, truth: &[TruthRecord], history: Option<History>) -> Result<ScadaRun> {
    config.validate()?;
    if truth.is_empty() {
        return Err(Error::invalid("truth series is empty").in_stage(Stage::Ingestion));
    }
    let s = config.scada.sampling_period;
    let t0 = truth[0].t;
    let span = truth[truth.len() - 1].t - t0;
    let n = (span / s + 1e-9).floor() as usize + 1;
    if n < 2 {
        return Err(Error::invalid(format!(
            "truth span {span} s holds fewer than two scans at period {s} s"
        ))
        .in_stage(Stage::CommNetwork));
    }

    let (vt_sys, ct_sys) = systematic_errors(config).map_err(|e| e.in_stage(Stage::Transformer))?;

    // network timing
    let mut latency_rng = config.stream("cn", "latency", SCADA_CHANNEL);
    let mut buffer_rng = config.stream("cn", "buffer", SCADA_CHANNEL);
    let mut schedule = match &config.scada.latency {
        Some(model) => build_delay_schedule(model, s, n, t0, config.scada.buffer, &mut latency_rng, &mut buffer_rng),
        None => schedule_from_latencies(&vec![0.0; n], s, t0, config.scada.buffer, &mut buffer_rng),
    }
    .map_err(|e| e.in_stage(Stage::CommNetwork))?;
    if config.scada.time_skew {
        let offset = s * config.stream("cn", "time_skew", SCADA_CHANNEL).random::<f64>();
        schedule.apply_time_skew(offset);
    }

    let cn_config = match config.cn.scheme {
        CnScheme::None => CnErrorConfig::Off,
        CnScheme::Scheme1 => CnErrorConfig::Scheme1 {
            history: history.ok_or_else(|| {
                Error::Config("cn.scheme = \"scheme1\" requires history_path".into()).in_stage(Stage::CommNetwork)
            })?,
            interpolation: config.cn.interpolation,
        },
        CnScheme::Scheme2 => CnErrorConfig::Scheme2(config.cn.scheme2_params()?),
    };
    let mut cn_rng = config.stream("cn", "errors", SCADA_CHANNEL);
    let errors = cn_errors(&cn_config, &schedule, &mut cn_rng).map_err(|e| match e {
        Error::HistoryCoverage { sample, .. } => e.at_sample(Stage::CommNetwork, sample),
        e => e.in_stage(Stage::CommNetwork),
    })?;

    let mut transformer_rng = config.stream("transformer", "random", SCADA_CHANNEL);
    let mut cable_rng = config.stream("cable", "random", SCADA_CHANNEL);
    let mut ied_rng = config.stream("ied", "random", SCADA_CHANNEL);

    let mut records = Vec::with_capacity(n);
    for (entry, cn_error) in schedule.entries.iter().zip(errors) {
        let rec = truth[preceding(truth, entry.send_time)];
        let (stage1, stage2) = front_end(
            &rec,
            (&vt_sys, &ct_sys),
            config,
            &mut transformer_rng,
            &mut cable_rng,
            entry.k,
        )?;
        let stage3 = IedErrors::draw(&config.noise, &mut ied_rng).apply(&stage2);
        let received = crate::network::apply_cn(&stage3, &cn_error);
        if ![received.v4, received.p4, received.q4].iter().all(|x| x.is_finite()) {
            return Err(Error::invalid("received values are not finite").at_sample(Stage::CommNetwork, entry.k));
        }
        records.push(ScadaRecord {
            k: entry.k,
            t: entry.send_time,
            status: entry.status,
            truth: rec,
            stage1,
            stage2,
            stage3,
            cn_error,
            received,
            latency: entry.latency,
            buffer: entry.buffer,
            total_delay: entry.total_delay,
        });
    }
    Ok(ScadaRun {
        records,
        schedule,
        vt_systematic: vt_sys,
        ct_systematic: ct_sys,
    })
}

/// Load inputs named by `config` and run the PMU chain.
pub fn run_pmu(config: &RunConfig) -> Result<PmuRun> {
    let truth = load_truth(&config.truth_path).map_err(|e| e.in_stage(Stage::Ingestion))?;
    simulate_pmu(config, &truth)
}

/// PMU chain over in-memory truth: transformer and cable stages per truth
/// record, then waveform synthesis and phasor estimation.
pub fn simulate_pmu(config: &RunConfig, truth: &[TruthRecord]) -> Result<PmuRun> {
    config.validate()?;
    if truth.len() < 2 {
        return Err(Error::invalid("PMU chain needs at least two truth records").in_stage(Stage::Ingestion));
    }
    let pmu = &config.pmu;
    let spec = make_filter(pmu.reporting_rate, pmu.nominal_freq, &pmu.filter).map_err(|e| e.in_stage(Stage::Pmu))?;

    let (vt_sys, ct_sys) = systematic_errors(config).map_err(|e| e.in_stage(Stage::Transformer))?;
    let mut transformer_rng = config.stream("transformer", "random", PMU_CHANNEL);
    let mut cable_rng = config.stream("cable", "random", PMU_CHANNEL);
    let stage2 = truth
        .iter()
        .enumerate()
        .map(|(k, rec)| {
            let (_, reading) = front_end(rec, (&vt_sys, &ct_sys), config, &mut transformer_rng, &mut cable_rng, k)?;
            Ok(PhasorSample { t: rec.t, reading })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut timing = pmu.timing.clone();
    if let Some(g) = &pmu.gps_events {
        let t0 = truth[0].t;
        let duration = truth[truth.len() - 1].t - t0;
        let mut rng = config.stream("pmu", "gps_events", PMU_CHANNEL);
        let generated = generate_gps_events(g.loss_rate_per_day, g.recovery_rate, duration, &mut rng)
            .map_err(|e| e.in_stage(Stage::Pmu))?;
        timing.loss_events.extend(generated.into_iter().map(|mut e| {
            e.start += t0;
            e
        }));
        timing.loss_events = merge_events(std::mem::take(&mut timing.loss_events));
    }

    let frames = run_pmu_chain(&stage2, &spec, &timing, &pmu.signal()).map_err(|e| e.in_stage(Stage::Pmu))?;
    Ok(PmuRun { stage2, frames })
}
