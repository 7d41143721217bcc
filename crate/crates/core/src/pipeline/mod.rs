//! Run configuration, CSV ingestion, end-to-end chain orchestration and
//! result output.
//!
//! Random streams are derived per stage group (`transformer`, `cable`,
//! `ied`, `cn`, `pmu`) from the master seed or a `[seeds]` override, then
//! split by draw purpose and chain channel (0 for SCADA, 1 for PMU). Changing
//! one group's seed leaves every other group's draws unchanged.

mod config;
mod output;
mod run;
mod series;

pub use config::{
    ChainSelection, CnConfig, CnScheme, FitSection, FrameFormat, GpsEventConfig, OutputConfig, PmuConfig, RegionChoice,
    RunConfig, ScadaConfig, SystematicMode, TransformerConfig, DEFAULT_FIT_ITERATIONS, DEFAULT_FIT_SAMPLES,
    STAGE_GROUPS,
};
pub use output::{
    pmu_summary, scada_summary, write_frames, write_pmu_outputs, write_scada_csv, write_scada_outputs, FrameRow,
    Summary, PMU_COLUMNS, SCADA_COLUMNS, SCADA_DEBUG_COLUMNS,
};
pub use run::{
    run_pmu, run_scada, simulate_pmu, simulate_scada, systematic_errors, PmuRun, ScadaRecord, ScadaRun, PMU_CHANNEL,
    SCADA_CHANNEL,
};
pub use series::{
    history_from_series, load_history, load_series, load_truth, read_series, truth_from_series, SeriesFile,
    HISTORY_CHANNELS, TRUTH_CHANNELS,
};
