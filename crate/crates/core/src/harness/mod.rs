//! Seeded Monte Carlo sweeps: configuration, trial execution, CSV output
//! and replayable trial records.

mod config;
mod oracle;
mod record;
mod report;
mod sweep;

pub use config::{
    CsiMode, DetectorKind, DetectorOverrides, FrameParams, Scenario, SimConfig, StartVector, CONFIG_KEYS,
};
pub use oracle::{compare_with_ml, OracleComparison};
pub use record::{FrameRecord, MAGIC, VERSION};
pub use report::{emit_csv, interpolate_snr_at_ber, parse_csv, write_csv};
pub use sweep::{
    default_threads, run_detector, run_sweep, run_sweep_with_threads, IterationCounts, StopReason, SweepPlan,
    SweepResult, SweepRow, TrialInstance, TrialOutcome, THREADS_ENV,
};
