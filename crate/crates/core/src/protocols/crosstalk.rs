use serde::Serialize;

use super::{sample_mub_curve, CurveRecord, ExperimentKind, ExperimentPlan, Spam, Tally};
use crate::atom::LevelId;
use crate::noise::{
    crosstalk_infidelity, dephasing_for_mub_infidelity, detect_bright_dark, optical_pump_to_0, CrosstalkOp,
    CrosstalkRates, DetectionConfig, Outcome,
};
use crate::quantum::{apply_rabi, s_qubit_basis, Channel, DensityMatrix, PulseSpec};
use crate::rng::{experiment_id, shot_rng};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrosstalkRun {
    /// spectator F-qubit MUB fidelity
    pub curve: Vec<CurveRecord>,
    /// S-qubit population trace measured alongside
    pub s_trace: Vec<CurveRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RamanSettings {
    /// F-qubit preparation and readout
    pub spam: Spam,
    /// 1/e decay of the S-qubit Rabi contrast, in π/2 pulses
    pub rabi_decay_pulses: f64,
    /// length of the S-qubit Rabi trace, in π/2 pulses
    pub trace_pulses: u32,
}

impl Default for RamanSettings {
    fn default() -> Self {
        RamanSettings { spam: Spam::readout_loss(0.0009), rabi_decay_pulses: 100.0, trace_pulses: 40 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PumpDetectSettings {
    pub spam: Spam,
    pub detection: DetectionConfig,
    /// optical pumping cycles per repetition
    pub pump_cycles: u32,
    /// fraction of `|1⟩` left after one pumping cycle
    pub pump_residual: f64,
}

impl PumpDetectSettings {
    pub fn for_state(with_pi_pulse: bool) -> Self {
        PumpDetectSettings {
            spam: Spam::readout_loss(if with_pi_pulse { 0.009 } else { 0.002 }),
            detection: DetectionConfig::direct_s(),
            pump_cycles: 10,
            pump_residual: 0.3,
        }
    }
}

/// `N` repetitions of a dephasing step of MUB infidelity `eps`, composed:
/// coherences scale by `(1 − 2p)^N`.
fn repeated_dephasing(eps: f64, repetitions: f64) -> Result<Channel> {
    let p = dephasing_for_mub_infidelity(eps)?;
    Ok(Channel::Dephasing((1.0 - (1.0 - 2.0 * p).powf(repetitions)) / 2.0))
}

fn trace_rng(plan: &ExperimentPlan, index: u64) -> rand_chacha::ChaCha8Rng {
    shot_rng(plan.seed, experiment_id(&format!("{}/s_trace", plan.kind.name())), index, 0)
}

/// Spectator F-qubit fidelity versus the number of Raman π/2 pulses on the
/// S-qubit, plus the S-qubit `|1⟩` population for the first
/// `trace_pulses` pulses.
pub fn run_raman_crosstalk(
    plan: &ExperimentPlan,
    rates: &CrosstalkRates,
    settings: &RamanSettings,
) -> Result<CrosstalkRun> {
    plan.require(&[ExperimentKind::RamanCrosstalk])?;
    let eps = crosstalk_infidelity(CrosstalkOp::RamanPi2, rates)?;
    if !(settings.rabi_decay_pulses > 0.0) {
        return Err(Error::domain("rabi_decay_pulses must be > 0"));
    }
    let curve = sample_mub_curve(plan, &settings.spam, |n| repeated_dephasing(eps, n))?;
    let mut s_trace = Vec::with_capacity(settings.trace_pulses as usize + 1);
    for n in 0..=settings.trace_pulses {
        let x = n as f64;
        let p1 = (1.0 - (x * std::f64::consts::FRAC_PI_2).cos() * (-x / settings.rabi_decay_pulses).exp()) / 2.0;
        s_trace.push(Tally::draw(p1, plan.shots, &mut trace_rng(plan, n as u64))?.record_at(x));
    }
    Ok(CrosstalkRun { curve, s_trace })
}

/// Spectator F-qubit fidelity versus the number of cooling + pumping +
/// detection cycles on the S-qubit, with the S-qubit left in `|0⟩` or, with
/// a microwave π pulse after pumping, in `|1⟩`. The S trace is the
/// probability of reading `|1⟩` (bright) in each cycle.
pub fn run_pump_detect_crosstalk(
    plan: &ExperimentPlan,
    rates: &CrosstalkRates,
    with_pi_pulse: bool,
    settings: &PumpDetectSettings,
) -> Result<CrosstalkRun> {
    let kind = if with_pi_pulse { ExperimentKind::PumpDetectCrosstalk1 } else { ExperimentKind::PumpDetectCrosstalk0 };
    plan.require(&[kind])?;
    settings.detection.validate()?;
    let op = if with_pi_pulse { CrosstalkOp::PumpDetect1 } else { CrosstalkOp::PumpDetect0 };
    let eps = crosstalk_infidelity(op, rates)?;
    let curve = sample_mub_curve(plan, &settings.spam, |n| repeated_dephasing(eps, n))?;

    let mixed = DensityMatrix::maximally_mixed(s_qubit_basis())?;
    let mut s = optical_pump_to_0(&mixed, settings.pump_cycles, settings.pump_residual)?;
    if with_pi_pulse {
        let pi = PulseSpec::single(LevelId::ZERO, LevelId::ONE, std::f64::consts::PI / 1e-5, 0.0, 0.0, 1e-5);
        s = apply_rabi(&s, &pi)?;
    }
    let bright = s.population(LevelId::ONE)?;
    let mut s_trace = Vec::with_capacity(plan.sweep.len());
    for (i, &x) in plan.sweep.iter().enumerate() {
        let mut rng = trace_rng(plan, i as u64);
        let mut tally = Tally::default();
        for _ in 0..plan.shots {
            let is_bright = rand::Rng::random::<f64>(&mut rng) < bright;
            tally.record(detect_bright_dark(is_bright, &settings.detection, &mut rng)?.outcome == Outcome::Bright);
        }
        s_trace.push(tally.record_at(x));
    }
    Ok(CrosstalkRun { curve, s_trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{fit_power_decay, DataPoint};

    fn points(curve: &[CurveRecord]) -> Vec<DataPoint> {
        curve.iter().map(|r| DataPoint::new(r.sweep_value, r.mean, r.stderr)).collect()
    }

    #[test]
    fn composed_dephasing_matches_repetition() {
        let ch = repeated_dephasing(1e-3, 7.0).unwrap();
        let mut rho = DensityMatrix::pure(s_qubit_basis(), &super::super::mub_states()[2]).unwrap();
        for _ in 0..7 {
            rho = crate::quantum::apply_channel(&rho, &Channel::Dephasing(1.5e-3)).unwrap();
        }
        let once = crate::quantum::apply_channel(
            &DensityMatrix::pure(s_qubit_basis(), &super::super::mub_states()[2]).unwrap(),
            &ch,
        )
        .unwrap();
        let dev = (rho.matrix() - once.matrix()).map(|z| z.norm()).max();
        assert!(dev < 1e-15);
    }

    #[test]
    fn zero_rates_leave_a_flat_spam_level() {
        let plan = ExperimentPlan::with_defaults(ExperimentKind::RamanCrosstalk, 60_000, 1).unwrap();
        let run = run_raman_crosstalk(&plan, &CrosstalkRates::zero(), &RamanSettings::default()).unwrap();
        for r in &run.curve {
            assert!((r.mean - 0.9991).abs() < 4.0 * r.stderr, "{r:?}");
        }
    }

    #[test]
    fn raman_rate_is_recovered() {
        let plan = ExperimentPlan::with_defaults(ExperimentKind::RamanCrosstalk, 10_000, 11).unwrap();
        let rates = CrosstalkRates::default();
        let run = run_raman_crosstalk(&plan, &rates, &RamanSettings::default()).unwrap();
        let fit = fit_power_decay(&points(&run.curve)).unwrap();
        let (e, se) = (fit.get("eps").unwrap(), fit.stderr("eps").unwrap());
        assert!((e - rates.eps_r).abs() < 3.0 * se, "{e} ± {se}");
    }

    #[test]
    fn rabi_trace_oscillates_and_decays() {
        let plan = ExperimentPlan::new(ExperimentKind::RamanCrosstalk, vec![0.0], 100_000, 2).unwrap();
        let run = run_raman_crosstalk(&plan, &CrosstalkRates::zero(), &RamanSettings::default()).unwrap();
        assert_eq!(run.s_trace.len(), 41);
        assert_eq!(run.s_trace[0].mean, 0.0);
        assert!(run.s_trace[2].mean > 0.97);
        assert!(run.s_trace[38].mean < 0.9 && run.s_trace[38].mean > 0.6);
    }

    #[test]
    fn pump_detect_trace_shows_detection_error() {
        for with_pi in [false, true] {
            let kind =
                if with_pi { ExperimentKind::PumpDetectCrosstalk1 } else { ExperimentKind::PumpDetectCrosstalk0 };
            let plan = ExperimentPlan::new(kind, vec![0.0, 10.0], 20_000, 3).unwrap();
            let run = run_pump_detect_crosstalk(
                &plan,
                &CrosstalkRates::default(),
                with_pi,
                &PumpDetectSettings::for_state(with_pi),
            )
            .unwrap();
            for r in &run.s_trace {
                let dev = if with_pi { 1.0 - r.mean } else { r.mean };
                assert!(dev > 0.005 && dev < 0.03, "{with_pi}: {r:?}");
            }
            assert!(run.curve[1].mean < run.curve[0].mean + 4.0 * run.curve[0].stderr);
        }
    }

    #[test]
    fn pump_detect_kind_must_match_the_pi_flag() {
        let plan = ExperimentPlan::new(ExperimentKind::PumpDetectCrosstalk0, vec![0.0], 6, 3).unwrap();
        assert!(run_pump_detect_crosstalk(
            &plan,
            &CrosstalkRates::default(),
            true,
            &PumpDetectSettings::for_state(true)
        )
        .is_err());
    }
}
