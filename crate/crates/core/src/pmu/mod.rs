//! PMU stage: waveform synthesis, windowed-DFT synchrophasor estimation
//! with M-class low-pass filters, and timing-error mechanisms.

mod chain;
mod estimator;
mod filter;
mod timing;

pub use chain::{run_pmu_chain, FrequencyProfile, PhasorSample, PmuFrame, SignalFrequency};
pub use estimator::{estimate_phasor, estimate_phasor_at, synth_waveform, total_vector_error};
pub use filter::{
    coefficient, make_filter, shipped_filters, supported_pairs, FilterOverrides, FilterSpec, M_CLASS_TABLE,
    ORDER_60HZ_60FPS, SAMPLES_PER_CYCLE,
};
pub use timing::{
    generate_gps_events, gps_loss_phase_error, merge_events, off_nominal_error_frequency, sampling_time_phase_error,
    LossEvent, TimingErrorModel, SECONDS_PER_DAY,
};
