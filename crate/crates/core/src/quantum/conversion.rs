//! Coherent S₁/₂ ↔ F₇/₂ qubit-type conversion by two dual-tone π pulses
//! through the D₅/₂ legs: 411 nm couples `|0⟩ ↔ D(F=2)` and `|1⟩ ↔ D(F=3)`,
//! 3432 nm couples `|0′⟩ ↔ D(F=2)` and `|1′⟩ ↔ D(F=3)`.
//!
//! Laser noise is quasi-static: each pulse draws one detuning, phase and
//! amplitude shared by both of its tones, so laser phase noise only produces
//! a global phase.

use rand::Rng;

use super::{apply_rabi, DensityMatrix, PulseSpec};
use crate::atom::{Laser, LevelId};
use crate::noise::{motional_rabi_factor, sample_pulse_noise, NoiseConfig};
use crate::{Error, Result};

/// `[|0⟩, |1⟩, D(F=2), D(F=3), |0′⟩, |1′⟩]`
pub fn conversion_basis() -> Vec<LevelId> {
    vec![LevelId::ZERO, LevelId::ONE, LevelId::D_LEG_ZERO, LevelId::D_LEG_ONE, LevelId::ZERO_PRIME, LevelId::ONE_PRIME]
}

/// The 411 nm and 3432 nm dual-tone pulses of one conversion.
#[derive(Debug, Clone, PartialEq)]
pub struct ConversionPulses {
    pub pulse_411: PulseSpec,
    pub pulse_3432: PulseSpec,
}

impl ConversionPulses {
    /// Resonant π pulses of the given durations.
    pub fn new(duration_411: f64, duration_3432: f64) -> Self {
        ConversionPulses {
            pulse_411: PulseSpec::dual_tone_pi(
                [(LevelId::ZERO, LevelId::D_LEG_ZERO), (LevelId::ONE, LevelId::D_LEG_ONE)],
                duration_411,
            ),
            pulse_3432: PulseSpec::dual_tone_pi(
                [(LevelId::ZERO_PRIME, LevelId::D_LEG_ZERO), (LevelId::ONE_PRIME, LevelId::D_LEG_ONE)],
                duration_3432,
            ),
        }
    }
}

impl Default for ConversionPulses {
    fn default() -> Self {
        ConversionPulses::new(0.54e-6, 0.39e-6)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConversionOutcome {
    /// state on [`conversion_basis`]
    pub state: DensityMatrix,
    /// set when either pulse area differs from π
    pub miscalibrated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Converter {
    pub pulses: ConversionPulses,
    pub noise: NoiseConfig,
    /// Population allowed outside the source qubit before a conversion is
    /// refused. Cycling protocols raise it to 1 to carry leakage along.
    pub support_tolerance: f64,
}

impl Converter {
    pub fn new(pulses: ConversionPulses, noise: NoiseConfig) -> Self {
        Converter { pulses, noise, support_tolerance: 1e-6 }
    }

    fn prepare(&self, state: &DensityMatrix, qubit: [LevelId; 2]) -> Result<DensityMatrix> {
        let rho = if state.basis() == conversion_basis().as_slice() {
            state.clone()
        } else {
            state.embed(conversion_basis())?
        };
        let inside: f64 = qubit.iter().map(|l| rho.population(*l)).sum::<Result<f64>>()?;
        if 1.0 - inside > self.support_tolerance {
            return Err(Error::domain(format!("{:.3e} of the population lies outside the source qubit", 1.0 - inside)));
        }
        Ok(rho)
    }

    fn noisy_pulse<R: Rng + ?Sized>(
        &self,
        rho: &DensityMatrix,
        pulse: &PulseSpec,
        laser: Laser,
        rng: &mut R,
    ) -> Result<DensityMatrix> {
        if pulse.duration == 0.0 {
            return apply_rabi(rho, pulse);
        }
        let n = sample_pulse_noise(&self.noise, laser, pulse.duration, rng)?;
        let mut rabi = pulse.rabi * n.amplitude;
        if laser == Laser::Shelve411 {
            if let Some(m) = &self.noise.motion {
                rabi *= motional_rabi_factor(m, rng)?;
            }
        }
        let noisy = PulseSpec {
            rabi: rabi.max(0.0),
            detuning: pulse.detuning + n.detuning,
            phase: pulse.phase + n.phase,
            ..pulse.clone()
        };
        apply_rabi(rho, &noisy)
    }

    fn miscalibrated(&self) -> bool {
        !self.pulses.pulse_411.is_pi_pulse() || !self.pulses.pulse_3432.is_pi_pulse()
    }

    pub fn s_to_f<R: Rng + ?Sized>(&self, state: &DensityMatrix, rng: &mut R) -> Result<ConversionOutcome> {
        self.noise.validate()?;
        let rho = self.prepare(state, [LevelId::ZERO, LevelId::ONE])?;
        let rho = self.noisy_pulse(&rho, &self.pulses.pulse_411, Laser::Shelve411, rng)?;
        let rho = self.noisy_pulse(&rho, &self.pulses.pulse_3432, Laser::Bridge3432, rng)?;
        Ok(ConversionOutcome { state: rho, miscalibrated: self.miscalibrated() })
    }

    pub fn f_to_s<R: Rng + ?Sized>(&self, state: &DensityMatrix, rng: &mut R) -> Result<ConversionOutcome> {
        self.noise.validate()?;
        let rho = self.prepare(state, [LevelId::ZERO_PRIME, LevelId::ONE_PRIME])?;
        let rho = self.noisy_pulse(&rho, &self.pulses.pulse_3432, Laser::Bridge3432, rng)?;
        let rho = self.noisy_pulse(&rho, &self.pulses.pulse_411, Laser::Shelve411, rng)?;
        Ok(ConversionOutcome { state: rho, miscalibrated: self.miscalibrated() })
    }

    /// One S-F-S cycle with fresh noise on all four pulses.
    pub fn round_trip<R: Rng + ?Sized>(&self, state: &DensityMatrix, rng: &mut R) -> Result<ConversionOutcome> {
        let there = self.s_to_f(state, rng)?;
        let back = Converter { support_tolerance: 1.0, ..self.clone() }.f_to_s(&there.state, rng)?;
        Ok(ConversionOutcome { state: back.state, miscalibrated: there.miscalibrated })
    }
}

/// S-qubit → F-qubit: the 411 nm pulse followed by the 3432 nm pulse.
pub fn convert_s_to_f<R: Rng + ?Sized>(
    state: &DensityMatrix,
    pulse_411: &PulseSpec,
    pulse_3432: &PulseSpec,
    noise: &NoiseConfig,
    rng: &mut R,
) -> Result<ConversionOutcome> {
    let pulses = ConversionPulses { pulse_411: pulse_411.clone(), pulse_3432: pulse_3432.clone() };
    Converter::new(pulses, noise.clone()).s_to_f(state, rng)
}

/// F-qubit → S-qubit: the same pulses in reverse order.
pub fn convert_f_to_s<R: Rng + ?Sized>(
    state: &DensityMatrix,
    pulse_3432: &PulseSpec,
    pulse_411: &PulseSpec,
    noise: &NoiseConfig,
    rng: &mut R,
) -> Result<ConversionOutcome> {
    let pulses = ConversionPulses { pulse_411: pulse_411.clone(), pulse_3432: pulse_3432.clone() };
    Converter::new(pulses, noise.clone()).f_to_s(state, rng)
}
