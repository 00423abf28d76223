//! Headline metrics: logical decay fits and error per cycle, the
//! improvement-factor scaling study, stabilizer errors and logical-state
//! fidelities.

mod decay;
mod fidelity;
mod memory;
mod report;
mod scaling;
mod stabilizer;

pub use decay::{epsilon_direct, epsilon_from_lifetime, logical_decay_fit, logical_error_probability, DecayFit, DecayPoint};
pub use fidelity::{
    build_correctable_subspace, correlators_from_tableau, fidelity_correctable, fidelity_physical, gamma,
    logical_subspace_probability, mitigate_readout, simulate_tomography, term_pauli, CorrectableSubspace, FidelityReport,
    SubspaceState, NUM_CODE_TERMS, NUM_TERMS,
};
pub use memory::{
    decode_point, decode_shots, learn_weights, mean_syndrome_element, memory_point, memory_study, summarize, train_decoder,
    DecodeSettings, MemoryPoint, MemoryStudy, StateSummary,
};
pub use report::{tagged_json, write_memory_csv, write_scaling_csv};
pub use scaling::{fit_power_law, scaling_study, ScalingPoint, ScalingStudy};
pub use stabilizer::{stabilizer_error, stabilizer_harness, stabilizer_harness_all, StabilizerReport};
