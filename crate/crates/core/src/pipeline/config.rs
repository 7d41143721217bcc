use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::distributions::{FitTarget, GmmParams};
use crate::error::{Error, Result};
use crate::network::{BufferModel, Interpolation, LatencyModel, Scheme2Params};
use crate::pmu::{FilterOverrides, SignalFrequency, TimingErrorModel};
use crate::rng::{stage_stream, SimRng};
use crate::scada::{AccuracyRegion, StageNoiseConfig, TransformerKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainSelection {
    Scada,
    Pmu,
    #[default]
    Both,
}

impl ChainSelection {
    pub fn includes_scada(&self) -> bool {
        matches!(self, ChainSelection::Scada | ChainSelection::Both)
    }

    pub fn includes_pmu(&self) -> bool {
        matches!(self, ChainSelection::Pmu | ChainSelection::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystematicMode {
    /// One uniform draw per transformer from its accuracy region.
    #[default]
    Sampled,
    /// No systematic error.
    Off,
}

/// Accuracy region by class, optionally with explicit vertices
/// `[[rcf, minutes], ...]` replacing the standard parallelogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionChoice {
    pub class: f64,
    #[serde(default)]
    pub vertices: Option<[(f64, f64); 4]>,
}

impl Default for RegionChoice {
    fn default() -> Self {
        Self {
            class: 0.3,
            vertices: None,
        }
    }
}

impl RegionChoice {
    pub fn region(&self, kind: TransformerKind) -> Result<AccuracyRegion> {
        match self.vertices {
            Some(vertices) => {
                let r = AccuracyRegion {
                    kind,
                    class_value: self.class,
                    vertices,
                };
                r.validate()?;
                Ok(r)
            }
            None => AccuracyRegion::standard(kind, self.class),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransformerConfig {
    pub systematic: SystematicMode,
    pub vt: RegionChoice,
    pub ct: RegionChoice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScadaConfig {
    /// Scan period S, seconds.
    pub sampling_period: f64,
    /// Absent means zero latency.
    pub latency: Option<LatencyModel>,
    pub buffer: BufferModel,
    /// Offset send times by one uniform draw in [0, S).
    pub time_skew: bool,
}

impl Default for ScadaConfig {
    fn default() -> Self {
        Self {
            sampling_period: 2.0,
            latency: None,
            buffer: BufferModel::Uniform,
            time_skew: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CnScheme {
    #[default]
    None,
    Scheme1,
    Scheme2,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CnConfig {
    pub scheme: CnScheme,
    pub interpolation: Interpolation,
    pub v: Option<GmmParams>,
    pub p: Option<GmmParams>,
    pub q: Option<GmmParams>,
}

impl CnConfig {
    pub fn scheme2_params(&self) -> Result<Scheme2Params> {
        let get = |g: &Option<GmmParams>, name: &str| {
            g.clone()
                .ok_or_else(|| Error::Config(format!("cn.scheme = \"scheme2\" requires cn.{name}")))
        };
        Ok(Scheme2Params {
            v: get(&self.v, "v")?,
            p: get(&self.p, "p")?,
            q: get(&self.q, "q")?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GpsEventConfig {
    pub loss_rate_per_day: f64,
    #[serde(default = "default_recovery_rate")]
    pub recovery_rate: f64,
}

fn default_recovery_rate() -> f64 {
    crate::distributions::GPS_RECOVERY_RATE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PmuConfig {
    pub reporting_rate: f64,
    pub nominal_freq: f64,
    pub filter: FilterOverrides,
    pub signal_freq: Option<SignalFrequency>,
    pub timing: TimingErrorModel,
    pub gps_events: Option<GpsEventConfig>,
}

impl Default for PmuConfig {
    fn default() -> Self {
        Self {
            reporting_rate: 60.0,
            nominal_freq: 60.0,
            filter: FilterOverrides::default(),
            signal_freq: None,
            timing: TimingErrorModel::default(),
            gps_events: None,
        }
    }
}

impl PmuConfig {
    /// Input frequency profile; nominal frequency when unset.
    pub fn signal(&self) -> SignalFrequency {
        self.signal_freq
            .clone()
            .unwrap_or(SignalFrequency::Constant(self.nominal_freq))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameFormat {
    #[default]
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub pmu_format: FrameFormat,
    /// Add per-stage columns to the SCADA CSV.
    pub debug_columns: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            pmu_format: FrameFormat::Csv,
            debug_columns: false,
        }
    }
}

/// Partial GMM fit target; unset fields fall back to flags or defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSection {
    pub k_components: Option<usize>,
    pub total_std: Option<f64>,
    pub total_mean: Option<f64>,
    pub similarity_threshold: Option<f64>,
    pub sample_count: Option<usize>,
    pub max_iterations: Option<usize>,
}

pub const DEFAULT_FIT_SAMPLES: usize = 100_000;
pub const DEFAULT_FIT_ITERATIONS: usize = 10_000;

impl FitSection {
    /// Read the `[fit]` table of a config file, ignoring every other key.
    pub fn load(path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct Doc {
            #[serde(default)]
            fit: FitSection,
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let doc: Doc = toml::from_str(&text).map_err(|e| Error::Config(e.message().to_string()))?;
        Ok(doc.fit)
    }

    /// Fields of `over` win where set.
    pub fn overlay(self, over: FitSection) -> Self {
        Self {
            k_components: over.k_components.or(self.k_components),
            total_std: over.total_std.or(self.total_std),
            total_mean: over.total_mean.or(self.total_mean),
            similarity_threshold: over.similarity_threshold.or(self.similarity_threshold),
            sample_count: over.sample_count.or(self.sample_count),
            max_iterations: over.max_iterations.or(self.max_iterations),
        }
    }

    /// Complete target; `k_components`, `total_std` and
    /// `similarity_threshold` are required.
    pub fn target(&self) -> Result<FitTarget> {
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| Error::Config(format!("fit.{name} is required")));
        let target = FitTarget {
            k_components: self
                .k_components
                .ok_or_else(|| Error::Config("fit.k_components is required".into()))?,
            total_std: need(self.total_std, "total_std")?,
            total_mean: self.total_mean.unwrap_or(0.0),
            similarity_threshold: need(self.similarity_threshold, "similarity_threshold")?,
            sample_count: self.sample_count.unwrap_or(DEFAULT_FIT_SAMPLES),
            max_iterations: self.max_iterations.unwrap_or(DEFAULT_FIT_ITERATIONS),
        };
        target.validate()?;
        Ok(target)
    }
}

/// Complete description of one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default)]
    pub chain: ChainSelection,
    pub truth_path: PathBuf,
    #[serde(default)]
    pub history_path: Option<PathBuf>,
    /// Per-stage-group seed overrides (`transformer`, `cable`, `ied`, `cn`, `pmu`).
    #[serde(default)]
    pub seeds: BTreeMap<String, u64>,
    #[serde(default)]
    pub transformer: TransformerConfig,
    #[serde(default)]
    pub noise: StageNoiseConfig,
    #[serde(default)]
    pub scada: ScadaConfig,
    #[serde(default)]
    pub cn: CnConfig,
    #[serde(default)]
    pub pmu: PmuConfig,
    #[serde(default)]
    pub output: OutputConfig,
    /// Used only by GMM fitting.
    #[serde(default)]
    pub fit: Option<FitSection>,
}

pub const STAGE_GROUPS: [&str; 5] = ["transformer", "cable", "ied", "cn", "pmu"];

impl RunConfig {
    /// Parse a TOML document; relative paths resolve against `base_dir`.
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.resolve_paths(base_dir);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_toml_str(&text, base)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.truth_path);
        if let Some(h) = self.history_path.as_mut() {
            fix(h);
        }
        fix(&mut self.output.dir);
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |e: Error| Error::Config(e.to_string());
        if let Some(group) = self.seeds.keys().find(|k| !STAGE_GROUPS.contains(&k.as_str())) {
            return Err(Error::Config(format!(
                "unknown seed group {group:?}; expected one of {STAGE_GROUPS:?}"
            )));
        }
        self.noise.validate().map_err(cfg_err)?;
        self.transformer.vt.region(TransformerKind::Vt).map_err(cfg_err)?;
        self.transformer.ct.region(TransformerKind::Ct).map_err(cfg_err)?;
        let s = self.scada.sampling_period;
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Config(format!("scada.sampling_period {s} must be > 0")));
        }
        if let Some(l) = &self.scada.latency {
            l.validate().map_err(cfg_err)?;
        }
        match self.cn.scheme {
            CnScheme::Scheme1 if self.history_path.is_none() => {
                return Err(Error::Config("cn.scheme = \"scheme1\" requires history_path".into()));
            }
            CnScheme::Scheme2 => {
                self.cn.scheme2_params()?;
            }
            _ => {}
        }
        self.pmu.timing.validate().map_err(cfg_err)?;
        if let Some(g) = &self.pmu.gps_events {
            if !(g.loss_rate_per_day >= 0.0) || !(g.recovery_rate > 0.0) {
                return Err(Error::Config("pmu.gps_events rates must be positive".into()));
            }
        }
        Ok(())
    }

    /// Seed for a stage group, honouring overrides.
    pub fn group_seed(&self, group: &str) -> u64 {
        self.seeds.get(group).copied().unwrap_or(self.seed)
    }

    /// Independent stream `group.name` / `channel`.
    pub fn stream(&self, group: &str, name: &str, channel: u32) -> SimRng {
        stage_stream(self.group_seed(group), &format!("{group}.{name}"), channel)
    }
}
