use rand::Rng;
use serde::Serialize;

use super::{mub_record, mub_states, CurveRecord, ExperimentKind, ExperimentPlan, Spam, Tally};
use crate::atom::LevelId;
use crate::noise::NoiseConfig;
use crate::quantum::{conversion_basis, fidelity, s_qubit_basis, ConversionPulses, Converter, C64};
use crate::{Error, Result};

/// Attempts allowed to pass the F-qubit preparation check before a shot is
/// declared impossible.
const MAX_VERIFY_ATTEMPTS: u32 = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ConversionSettings {
    pub pulses: ConversionPulses,
    /// per-shot laser noise; `motion` adds thermal Rabi-frequency spread
    pub noise: NoiseConfig,
    pub spam: Spam,
    /// post-select on a successful S→F conversion of `|0⟩` before each shot
    pub verify: bool,
}

impl Default for ConversionSettings {
    fn default() -> Self {
        ConversionSettings {
            pulses: ConversionPulses::default(),
            noise: NoiseConfig::calibrated_round_trip(0.0065).expect("valid default"),
            spam: Spam::readout_loss(0.034),
            verify: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConversionRun {
    pub curve: Vec<CurveRecord>,
    /// fraction of verification attempts that left population outside the F-qubit
    pub discard_fraction: f64,
}

fn on_conversion_basis(psi: &[C64; 2]) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); 6];
    v[0] = psi[0];
    v[1] = psi[1];
    v
}

/// Converts `|0⟩` to the F-qubit and keeps the attempt with the probability
/// that the population is found there. Returns the number of discarded
/// attempts.
fn verified_attempts<R: Rng + ?Sized>(converter: &Converter, rng: &mut R) -> Result<u32> {
    let ground = crate::quantum::DensityMatrix::from_level(conversion_basis(), LevelId::ZERO)?;
    for discarded in 0..MAX_VERIFY_ATTEMPTS {
        let out = converter.s_to_f(&ground, rng)?;
        let in_f = out.state.population(LevelId::ZERO_PRIME)? + out.state.population(LevelId::ONE_PRIME)?;
        if rng.random::<f64>() < in_f {
            return Ok(discarded);
        }
    }
    Err(Error::InvalidState(format!("no successful F-qubit preparation in {MAX_VERIFY_ATTEMPTS} attempts")))
}

/// MUB-averaged S-qubit fidelity after `N` S→F→S round trips, one curve point
/// per sweep value `N`.
///
/// Every shot draws fresh noise for all pulses. Population left in the
/// D₅/₂ legs is carried through later conversions and counts as failure.
pub fn run_conversion_cycle(plan: &ExperimentPlan, settings: &ConversionSettings) -> Result<ConversionRun> {
    plan.require(&[ExperimentKind::ConversionCycle])?;
    settings.spam.validate()?;
    settings.noise.validate()?;
    let mut cycler = Converter::new(settings.pulses.clone(), settings.noise.clone());
    cycler.support_tolerance = 1.0;
    let verifier = Converter::new(settings.pulses.clone(), settings.noise.clone());
    let shots = plan.shots_per_state();
    let (mut discarded, mut kept) = (0u64, 0u64);
    let mut curve = Vec::with_capacity(plan.sweep.len());

    for (i, &x) in plan.sweep.iter().enumerate() {
        let rounds = x as u64;
        let mut tallies = [Tally::default(); 6];
        for (s, (tally, psi)) in tallies.iter_mut().zip(mub_states()).enumerate() {
            let target = on_conversion_basis(&psi);
            let prepared = settings.spam.prepare(s_qubit_basis(), &psi)?.embed(conversion_basis())?;
            for j in 0..shots {
                let mut rng = plan.shot_rng(i, s as u64 * shots + j);
                if settings.verify {
                    discarded += verified_attempts(&verifier, &mut rng)? as u64;
                    kept += 1;
                }
                let mut rho = prepared.clone();
                for _ in 0..rounds {
                    rho = cycler.round_trip(&rho, &mut rng)?.state;
                }
                let p = settings.spam.success_probability(fidelity(&rho, &target)?);
                tally.record(rng.random::<f64>() < p);
            }
        }
        curve.push(mub_record(x, &tallies));
    }
    let total = discarded + kept;
    Ok(ConversionRun { curve, discard_fraction: if total == 0 { 0.0 } else { discarded as f64 / total as f64 } })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(sweep: Vec<f64>, shots: u64, seed: u64) -> ExperimentPlan {
        ExperimentPlan::new(ExperimentKind::ConversionCycle, sweep, shots, seed).unwrap()
    }

    #[test]
    fn ideal_cycle_keeps_every_state() {
        let s = ConversionSettings { noise: NoiseConfig::noiseless(), spam: Spam::ideal(), ..Default::default() };
        let run = run_conversion_cycle(&plan(vec![0.0, 1.0, 5.0], 60, 1), &s).unwrap();
        for r in &run.curve {
            assert_eq!(r.mean, 1.0, "{r:?}");
        }
        assert_eq!(run.discard_fraction, 0.0);
    }

    #[test]
    fn spam_sets_the_zero_round_level() {
        let s = ConversionSettings { noise: NoiseConfig::noiseless(), ..Default::default() };
        let run = run_conversion_cycle(&plan(vec![0.0], 60_000, 2), &s).unwrap();
        let r = run.curve[0];
        assert!((r.mean - 0.966).abs() < 4.0 * r.stderr, "{r:?}");
    }

    #[test]
    fn calibrated_noise_decays_by_the_configured_round_trip_error() {
        let s = ConversionSettings { spam: Spam::ideal(), verify: false, ..Default::default() };
        let run = run_conversion_cycle(&plan(vec![0.0, 10.0], 30_000, 3), &s).unwrap();
        let r = run.curve[1];
        let want = (1.0f64 - 0.0065).powi(10);
        assert!((r.mean - want).abs() < 4.0 * r.stderr, "{r:?} vs {want}");
    }

    #[test]
    fn verification_discards_failed_preparations() {
        let s = ConversionSettings { noise: NoiseConfig::physical(), ..Default::default() };
        let run = run_conversion_cycle(&plan(vec![0.0], 6_000, 4), &s).unwrap();
        assert!(run.discard_fraction > 0.0 && run.discard_fraction < 0.05, "{}", run.discard_fraction);
    }

    #[test]
    fn reruns_are_identical() {
        let s = ConversionSettings::default();
        let a = run_conversion_cycle(&plan(vec![0.0, 2.0], 120, 5), &s).unwrap();
        let b = run_conversion_cycle(&plan(vec![0.0, 2.0], 120, 5), &s).unwrap();
        assert_eq!(a, b);
        let c = run_conversion_cycle(&plan(vec![0.0, 2.0], 120, 6), &s).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let p = ExperimentPlan::new(ExperimentKind::RbSQubit, vec![1.0], 6, 1).unwrap();
        assert!(run_conversion_cycle(&p, &ConversionSettings::default()).is_err());
    }
}
