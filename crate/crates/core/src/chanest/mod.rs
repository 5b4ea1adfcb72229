//! Pilot-based and Gibbs-sampling channel estimation for flat fading, and
//! the iterative estimation/detection loop.

mod crlb;
mod estimator;
mod frame;
mod iterate;
mod vectorize;

pub use crlb::{crlb_mse, crlb_mse_for, CrlbMode};
pub use estimator::{gibbs_channel_estimate, EstimatorSample, GibbsEstimator, VarianceForm};
pub use frame::{generate_frame, initial_estimate, transmit_matrix, Frame, FrameConfig};
pub use iterate::{
    detect_frame, iterate_estimation_detection, lifted_mse, DetectionStats, EstimationParams,
    IterationRecord, IterativeOutcome,
};
pub use vectorize::{channel_to_g, g_to_channel, vectorize_frame, VectorizedModel};
