//! Cyclic-prefixed single-carrier transmission over frequency-selective
//! channels: frame simulation, frequency-domain equalization and
//! data-phase channel estimation.

mod block;
mod config;
mod estimate;
mod freq;
mod iterate;

pub use block::{
    add_cyclic_prefix, circulant, convolve_block, dft_matrix, remove_cyclic_prefix, simulate_block,
    tap_spectrum, unitary_dft_rows, ReceivedBlock,
};
pub use config::{
    build_pilot_sequences, generate_fs_channel, initial_fs_estimate, CpscConfig, FreqSelChannel,
};
pub use estimate::{antenna_observations, block_symbols, data_phase_matrix, estimate_fs_channel_data_phase};
pub use freq::{build_freq_model, FreqDomainModel};
pub use iterate::{
    detect_cpsc_frame, equalize_block, frequency_observation, generate_cpsc_frame, iterate_cpsc,
    CpscFrame, CpscIterationRecord, CpscOutcome,
};
