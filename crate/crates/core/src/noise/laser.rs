use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Cauchy, Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::atom::Laser;
use crate::motion::{carrier_rabi, sample_fock, Mode, ModeSet, RabiModel, ThermalState};
use crate::{Error, Result};

/// Line shape of the per-shot detuning distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineShape {
    /// Normal with standard deviation `1/T_c` rad/s.
    GaussianDetuning,
    /// Cauchy with half width `1/T_c` rad/s, i.e. a full width of
    /// `1/(π T_c)` Hz.
    LorentzianDetuning,
}

/// Thermal motion seen by the 411 nm drive: each shot draws phonon numbers
/// and rescales the Rabi frequency relative to the thermally averaged
/// calibration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionNoise {
    pub nbar: f64,
    pub eta: f64,
    pub modes: usize,
}

impl Default for MotionNoise {
    fn default() -> Self {
        MotionNoise { nbar: 3.0, eta: 0.024, modes: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    /// s
    pub coherence_time_411: f64,
    /// s
    pub coherence_time_3432: f64,
    /// fractional rms of the Rabi amplitude
    pub amplitude_jitter_rms: f64,
    pub per_shot_model: LineShape,
    pub motion: Option<MotionNoise>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig::physical()
    }
}

impl NoiseConfig {
    /// Measured laser coherence (230 µs at 411 nm, 20 µs at 3432 nm) with
    /// Lorentzian detuning noise and n̄ ≈ 3 thermal motion.
    pub fn physical() -> Self {
        NoiseConfig {
            coherence_time_411: 230e-6,
            coherence_time_3432: 20e-6,
            amplitude_jitter_rms: 0.0,
            per_shot_model: LineShape::LorentzianDetuning,
            motion: Some(MotionNoise::default()),
        }
    }

    pub fn noiseless() -> Self {
        NoiseConfig {
            coherence_time_411: f64::INFINITY,
            coherence_time_3432: f64::INFINITY,
            amplitude_jitter_rms: 0.0,
            per_shot_model: LineShape::LorentzianDetuning,
            motion: None,
        }
    }

    /// Amplitude jitter alone, sized so that a full S-F-S round trip (four
    /// π pulses) has the requested mean infidelity.
    pub fn calibrated_round_trip(round_trip_error: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&round_trip_error) {
            return Err(Error::domain(format!("round-trip error {round_trip_error} outside [0, 1)")));
        }
        let per_pulse = 1.0 - (1.0 - round_trip_error).powf(0.25);
        Ok(NoiseConfig { amplitude_jitter_rms: jitter_for_pulse_error(per_pulse)?, ..NoiseConfig::noiseless() })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.coherence_time_411 > 0.0) || !(self.coherence_time_3432 > 0.0) {
            return Err(Error::domain("coherence times must be > 0"));
        }
        if !(self.amplitude_jitter_rms >= 0.0) || !self.amplitude_jitter_rms.is_finite() {
            return Err(Error::domain("amplitude jitter must be finite and >= 0"));
        }
        if let Some(m) = &self.motion {
            if !(m.nbar >= 0.0) || !(0.0..0.3).contains(&m.eta) || m.modes == 0 {
                return Err(Error::domain("motion noise needs nbar >= 0, 0 <= eta < 0.3 and at least one mode"));
            }
        }
        Ok(())
    }

    pub fn coherence_time(&self, laser: Laser) -> Result<f64> {
        match laser {
            Laser::Shelve411 => Ok(self.coherence_time_411),
            Laser::Bridge3432 => Ok(self.coherence_time_3432),
            other => Err(Error::domain(format!("no coherence time configured for {other:?}"))),
        }
    }

    /// Scale of the detuning distribution, rad/s.
    pub fn detuning_width(&self, laser: Laser) -> Result<f64> {
        Ok(1.0 / self.coherence_time(laser)?)
    }
}

/// One quasi-static draw applied to every tone of a pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseNoise {
    /// rad/s
    pub detuning: f64,
    /// rad
    pub phase: f64,
    pub amplitude: f64,
}

impl PulseNoise {
    pub const NONE: PulseNoise = PulseNoise { detuning: 0.0, phase: 0.0, amplitude: 1.0 };
}

pub fn sample_pulse_noise<R: Rng + ?Sized>(
    noise: &NoiseConfig,
    laser: Laser,
    duration: f64,
    rng: &mut R,
) -> Result<PulseNoise> {
    if !(duration > 0.0) {
        return Err(Error::domain(format!("pulse duration {duration} must be > 0")));
    }
    let width = noise.detuning_width(laser)?;
    let mut out = PulseNoise::NONE;
    if width > 0.0 {
        out.detuning = match noise.per_shot_model {
            LineShape::GaussianDetuning => {
                Normal::new(0.0, width).map_err(|e| Error::domain(e.to_string()))?.sample(rng)
            }
            LineShape::LorentzianDetuning => {
                Cauchy::new(0.0, width).map_err(|e| Error::domain(e.to_string()))?.sample(rng)
            }
        };
        out.phase = rng.random_range(-PI..PI);
    }
    if noise.amplitude_jitter_rms > 0.0 {
        out.amplitude = 1.0 + noise.amplitude_jitter_rms * rng.sample::<f64, _>(rand_distr::StandardNormal);
    }
    Ok(out)
}

/// Mean infidelity of a resonant π pulse whose area has fractional rms `σ`:
/// `(1 − e^{−π²σ²/2})/2`.
pub fn pulse_error_for_jitter(sigma: f64) -> f64 {
    (1.0 - (-PI * PI * sigma * sigma / 2.0).exp()) / 2.0
}

/// Inverse of [`pulse_error_for_jitter`].
pub fn jitter_for_pulse_error(error: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&error) {
        return Err(Error::domain(format!("π-pulse error {error} outside [0, 0.5)")));
    }
    Ok((-2.0 * (1.0 - 2.0 * error).ln()).sqrt() / PI)
}

/// Ratio of the shot's carrier Rabi frequency to the thermal average the
/// pulse was calibrated on.
pub fn motional_rabi_factor<R: Rng + ?Sized>(motion: &MotionNoise, rng: &mut R) -> Result<f64> {
    let modes = ModeSet::new(vec![Mode { omega: 1.0, eta: motion.eta }; motion.modes])?;
    let thermal = ThermalState::from_nbar(vec![motion.nbar; motion.modes])?;
    let sample = sample_fock(&thermal, rng);
    let shot = carrier_rabi(&sample, 1.0, &modes, RabiModel::Exact)?;
    // thermal mean of e^{−η²/2} L_n(η²) is e^{−η²(n̄+½)}
    let reference = (-(motion.modes as f64) * motion.eta.powi(2) * (motion.nbar + 0.5)).exp();
    Ok(shot / reference)
}
