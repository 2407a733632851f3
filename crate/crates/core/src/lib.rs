//! Pulse-level simulation of coherently convertible S/F dual-type qubits in
//! ¹⁷¹Yb⁺, together with the curve fits used to turn simulated (or measured)
//! data into conversion errors, crosstalk rates, gate fidelities and motional
//! temperatures.
//!
//! Module map:
//!
//! * [`atom`] static level structure, transition table and sideband frequencies
//! * [`quantum`] density matrices, Rabi pulses, channels and the S↔F conversion
//! * [`motion`] thermal phonon statistics, carrier Rabi frequencies, cooling
//! * [`noise`] laser noise, photon-counting detection and crosstalk channels
//! * [`estimators`] weighted Levenberg-Marquardt fits of every decay model
//! * [`protocols`] experiment sequences producing fidelity and temperature curves
//! * [`rng`] counter-based per-shot random streams

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atom;
pub mod error;
pub mod estimators;
pub mod motion;
pub mod noise;
pub mod protocols;
pub mod quantum;
pub mod rng;

pub use error::{Error, Result};
