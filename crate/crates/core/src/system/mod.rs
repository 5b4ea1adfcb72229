//! System model: alphabets, channels, real-valued lifting and costs.

mod alphabet;
pub mod channel;
pub mod model;
mod real;
mod reference;

pub use alphabet::ModAlphabet;
pub use channel::{generate_flat_channel, ComplexChannel, PowerImbalance};
pub use model::{DenseModel, ObservationModel};
pub use real::{
    lift_matrix, lift_to_real, lift_vector, residual_cost, standardized_cost, transmit_flat,
    unlift_vector, FlatObservation, NoiseStats, Problem, RealSystem,
};
pub use reference::{mmse_detect, mmse_soft, siso_awgn_ber, SnrConvention};
