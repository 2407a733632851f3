//! Finite-dimensional quantum states and the coherent and incoherent maps
//! acting on them.

mod channel;
mod conversion;
mod density;
mod pulse;

pub use channel::{apply_channel, Channel, KRAUS_TOLERANCE};
pub use conversion::{
    conversion_basis, convert_f_to_s, convert_s_to_f, ConversionOutcome, ConversionPulses, Converter,
};
pub use density::{f_qubit_basis, fidelity, s_qubit_basis, DensityMatrix, HERMITICITY_TOLERANCE, TRACE_TOLERANCE};
pub(crate) use pulse::conjugate_in_place;
pub use pulse::{apply_rabi, rotation, PulseSpec, Tone, Unitary2};

pub use num_complex::Complex64 as C64;
