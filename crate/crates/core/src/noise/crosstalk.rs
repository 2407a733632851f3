use serde::{Deserialize, Serialize};

use crate::quantum::Channel;
use crate::{Error, Result};

/// MUB-averaged infidelity at which a dephasing channel saturates.
pub const MAX_DEPHASING_INFIDELITY: f64 = 2.0 / 3.0;

/// Crosstalk of S-qubit operations on a spectator F-qubit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrosstalkRates {
    /// MUB infidelity per Raman π/2 pulse
    pub eps_r: f64,
    /// per cooling + pumping + detection cycle with the S-qubit in |0⟩
    pub eps_0: f64,
    /// same with the S-qubit in |1⟩
    pub eps_1: f64,
    /// coherence time under Doppler cooling light, s
    pub coherence_time_cooling: f64,
}

impl Default for CrosstalkRates {
    fn default() -> Self {
        CrosstalkRates { eps_r: 1.0e-5, eps_0: 9e-5, eps_1: 1.3e-4, coherence_time_cooling: 2.9 }
    }
}

impl CrosstalkRates {
    pub fn zero() -> Self {
        CrosstalkRates { eps_r: 0.0, eps_0: 0.0, eps_1: 0.0, coherence_time_cooling: f64::INFINITY }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("eps_r", self.eps_r), ("eps_0", self.eps_0), ("eps_1", self.eps_1)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::domain(format!("{name} = {v} outside [0, 1]")));
            }
        }
        if !(self.coherence_time_cooling > 0.0) {
            return Err(Error::domain("coherence_time_cooling must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrosstalkOp {
    RamanPi2,
    PumpDetect0,
    PumpDetect1,
    /// cooling light on for `duration` seconds
    Cooling {
        duration: f64,
    },
}

/// MUB-averaged infidelity of one application of `op`.
pub fn crosstalk_infidelity(op: CrosstalkOp, rates: &CrosstalkRates) -> Result<f64> {
    rates.validate()?;
    Ok(match op {
        CrosstalkOp::RamanPi2 => rates.eps_r,
        CrosstalkOp::PumpDetect0 => rates.eps_0,
        CrosstalkOp::PumpDetect1 => rates.eps_1,
        CrosstalkOp::Cooling { duration } => {
            if !(duration >= 0.0) {
                return Err(Error::domain(format!("cooling duration {duration} must be >= 0")));
            }
            -(-duration / rates.coherence_time_cooling).exp_m1()
        }
    })
}

/// Dephasing probability with MUB-averaged infidelity `eps`, from
/// `F̄ = 1 − 2p/3`.
pub fn dephasing_for_mub_infidelity(eps: f64) -> Result<f64> {
    if !(0.0..=MAX_DEPHASING_INFIDELITY).contains(&eps) {
        return Err(Error::domain(format!("infidelity {eps} not reachable by pure dephasing (max 2/3)")));
    }
    Ok((1.5 * eps).min(1.0))
}

pub fn crosstalk_channel(op: CrosstalkOp, rates: &CrosstalkRates) -> Result<Channel> {
    Ok(Channel::Dephasing(dephasing_for_mub_infidelity(crosstalk_infidelity(op, rates)?)?))
}

/// Relative intensity `e^{−2(d/w)²}` of a Gaussian beam at distance `d` from
/// its axis.
pub fn spatial_crosstalk_ratio(waist_radius: f64, separation: f64) -> Result<f64> {
    if !(waist_radius > 0.0) || !(separation >= 0.0) {
        return Err(Error::domain("need waist > 0 and separation >= 0"));
    }
    Ok((-2.0 * (separation / waist_radius).powi(2)).exp())
}
