//! Synthetic SCADA and PMU measurement streams.
//!
//! Ground-truth phasor trajectories are propagated through per-component
//! error models: instrument transformers, control cables and burdens, IEDs,
//! the SCADA communication network, and the PMU phasor-estimation chain.
//! The resulting errors are non-zero-mean, non-Gaussian and time-varying.
//!
//! * [`distributions`]: mixture samplers, KL divergence, GMM fitting.
//! * [`scada`]: transformer, cable/burden and IED stages.
//! * [`network`]: latency, buffering, discard and network errors.
//! * [`pmu`]: filters, synchrophasor estimation and timing errors.
//! * [`pipeline`]: configuration, CSV ingestion/output and end-to-end runs.

// Range checks are written as `!(x > 0.0)` so NaN fails them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distributions;
pub mod error;
pub mod network;
pub mod pipeline;
pub mod pmu;
pub mod rng;
pub mod scada;
pub mod stats;

pub use distributions::{FitTarget, GmmParams, LmmParams};
pub use error::{Error, Result, Stage};
pub use network::{DelaySchedule, LatencyModel, SampleStatus};
pub use pipeline::{RunConfig, ScadaRecord, SeriesFile};
pub use pmu::{FilterSpec, PmuFrame, TimingErrorModel};
pub use rng::SimRng;
pub use scada::{AccuracyRegion, PhasorReading, StageNoiseConfig, SystematicError, TruthRecord};
