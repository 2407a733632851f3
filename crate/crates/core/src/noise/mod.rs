//! Incoherent processes: quasi-static laser noise, photon-counting state
//! detection, optical pumping and crosstalk onto spectator F-qubits.

mod crosstalk;
mod detection;
mod laser;

pub use crosstalk::{
    crosstalk_channel, crosstalk_infidelity, dephasing_for_mub_infidelity, spatial_crosstalk_ratio, CrosstalkOp,
    CrosstalkRates, MAX_DEPHASING_INFIDELITY,
};
pub use detection::{
    detect_bright_dark, misidentification_probabilities, optical_pump_to_0, shelve_detect_f, shelve_detect_s,
    Detection, DetectionConfig, Outcome, F_PUMP_SUCCESS, SUPPORT_TOLERANCE, S_TRANSFER_CHAIN,
};
pub use laser::{
    jitter_for_pulse_error, motional_rabi_factor, pulse_error_for_jitter, sample_pulse_noise, LineShape, MotionNoise,
    NoiseConfig, PulseNoise,
};
