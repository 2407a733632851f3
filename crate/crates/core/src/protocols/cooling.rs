use serde::{Deserialize, Serialize};

use super::thermometry::sample_carrier_trace;
use super::{sample_mub_curve, CurveRecord, ExperimentKind, ExperimentPlan, Spam, ThermometrySettings};
use crate::estimators::{fit_thermal_rabi, DataPoint};
use crate::motion::{cooling_step, effective_temperature, heating_step, ModeSet, ThermalState};
use crate::noise::{crosstalk_channel, CrosstalkOp, CrosstalkRates};
use crate::protocols::thermometry_times;
use crate::rng::experiment_id;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CoolingSettings {
    pub modes: ModeSet,
    /// temperature the cooling beams relax every mode towards, K
    pub steady_state_temperature: f64,
    /// quanta/s added to every mode before cooling starts
    pub heating_rate: f64,
    /// s
    pub heating_duration: f64,
    /// relaxation rate of a mode with full participation, 1/s
    pub cooling_rate: f64,
    /// participation of the transverse modes when only the S-qubit is cooled
    pub participation_sympathetic: f64,
    pub participation_global: f64,
    /// Rabi frequency and grid used to read out each temperature
    pub thermometry: ThermometrySettings,
    /// shots per time point of each thermometry trace
    pub thermometry_shots: u64,
    /// F-qubit preparation and readout
    pub spam: Spam,
}

impl Default for CoolingSettings {
    fn default() -> Self {
        CoolingSettings {
            modes: ModeSet::transverse_default(),
            steady_state_temperature: 1e-3,
            heating_rate: 8.5e4,
            heating_duration: 2e-3,
            cooling_rate: 4300.0,
            participation_sympathetic: 0.5,
            participation_global: 1.0,
            thermometry: ThermometrySettings { periods: 30.0, points_per_period: 16, ..ThermometrySettings::default() },
            thermometry_shots: 2000,
            spam: Spam::readout_loss(0.002),
        }
    }
}

impl CoolingSettings {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in
            [("steady_state_temperature", self.steady_state_temperature), ("cooling_rate", self.cooling_rate)]
        {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::domain(format!("{name} must be > 0")));
            }
        }
        for (name, v) in [("heating_rate", self.heating_rate), ("heating_duration", self.heating_duration)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::domain(format!("{name} must be >= 0")));
            }
        }
        for (name, v) in [
            ("participation_sympathetic", self.participation_sympathetic),
            ("participation_global", self.participation_global),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::domain(format!("{name} = {v} outside (0, 1]")));
            }
        }
        if self.thermometry_shots < 1 {
            return Err(Error::domain("thermometry_shots must be >= 1"));
        }
        self.thermometry.validate()?;
        self.spam.validate()
    }

    /// Motional state at the start of cooling.
    pub fn heated_state(&self) -> Result<ThermalState> {
        let ss = ThermalState::from_temperature(self.steady_state_temperature, &self.modes)?;
        heating_step(&ss, self.heating_duration, self.heating_rate)
    }

    /// Motional state after cooling for `t` with the given participation.
    pub fn cooled_state(&self, t: f64, participation: f64) -> Result<ThermalState> {
        let ss = ThermalState::from_temperature(self.steady_state_temperature, &self.modes)?;
        let w = vec![participation; self.modes.len()];
        cooling_step(&self.heated_state()?, t, self.cooling_rate, ss.nbar(), &w)
    }
}

/// One temperature readout along a cooling curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemperaturePoint {
    pub time: f64,
    /// effective temperature of the simulated motional state, K
    pub true_temperature: f64,
    /// thermometry fit result, K
    pub fitted_temperature: f64,
    pub stderr: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoolingRun {
    pub temperature: Vec<TemperaturePoint>,
    /// spectator F-qubit MUB fidelity, present for sympathetic cooling
    pub fidelity: Option<Vec<CurveRecord>>,
}

fn temperature_curve(
    plan: &ExperimentPlan,
    settings: &CoolingSettings,
    participation: f64,
) -> Result<Vec<TemperaturePoint>> {
    let th = &settings.thermometry;
    let times = thermometry_times(th.omega0, th.periods, th.points_per_period);
    let trace_plan = ExperimentPlan { shots: settings.thermometry_shots, ..plan.clone() };
    plan.sweep
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let state = settings.cooled_state(t, participation)?;
            let stream = experiment_id(&format!("{}/thermometry/{i}", plan.kind.name()));
            let trace = sample_carrier_trace(&trace_plan, &times, th.omega0, &state, &settings.modes, stream)?;
            let pts: Vec<DataPoint> = trace.iter().map(|r| DataPoint::new(r.sweep_value, r.mean, r.stderr)).collect();
            let fit = fit_thermal_rabi(&pts, &settings.modes)?;
            Ok(TemperaturePoint {
                time: t,
                true_temperature: effective_temperature(&state, &settings.modes)?,
                fitted_temperature: fit.get("T").expect("thermal fit has T"),
                stderr: fit.stderr("T").expect("thermal fit has T"),
                converged: fit.converged,
            })
        })
        .collect()
}

/// Cooling through the S-qubit only: the transverse modes relax with the
/// sympathetic participation, and a spectator F-qubit dephases under the
/// scattered cooling light as `F̄ = e^{−t/T_c}`.
pub fn run_sympathetic_cooling(
    plan: &ExperimentPlan,
    settings: &CoolingSettings,
    rates: &CrosstalkRates,
) -> Result<CoolingRun> {
    plan.require(&[ExperimentKind::SympatheticCooling])?;
    settings.validate()?;
    let temperature = temperature_curve(plan, settings, settings.participation_sympathetic)?;
    let fidelity =
        sample_mub_curve(plan, &settings.spam, |t| crosstalk_channel(CrosstalkOp::Cooling { duration: t }, rates))?;
    Ok(CoolingRun { temperature, fidelity: Some(fidelity) })
}

/// Cooling both ions directly, without an F-qubit.
pub fn run_global_cooling(plan: &ExperimentPlan, settings: &CoolingSettings) -> Result<CoolingRun> {
    plan.require(&[ExperimentKind::GlobalCooling])?;
    settings.validate()?;
    Ok(CoolingRun { temperature: temperature_curve(plan, settings, settings.participation_global)?, fidelity: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heated_state_is_tens_of_millikelvin() {
        let s = CoolingSettings::default();
        let t = effective_temperature(&s.heated_state().unwrap(), &s.modes).unwrap();
        assert!(t > 15e-3 && t < 40e-3, "{t}");
        let cold = effective_temperature(&s.cooled_state(1.0, 0.5).unwrap(), &s.modes).unwrap();
        assert!((cold / 1e-3 - 1.0).abs() < 1e-6, "{cold}");
    }

    #[test]
    fn sympathetic_time_is_twice_global() {
        let s = CoolingSettings::default();
        for t in [1e-4, 3e-4, 1e-3] {
            let a = s.cooled_state(2.0 * t, 0.5).unwrap();
            let b = s.cooled_state(t, 1.0).unwrap();
            for (x, y) in a.nbar().iter().zip(b.nbar()) {
                assert!((x / y - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn invalid_participation_rejected() {
        let s = CoolingSettings { participation_sympathetic: 0.0, ..Default::default() };
        assert!(s.validate().is_err());
    }

    #[test]
    fn short_cooling_run_reads_temperatures() {
        let plan = ExperimentPlan::new(ExperimentKind::GlobalCooling, vec![0.0, 2e-3], 100, 3).unwrap();
        let run = run_global_cooling(&plan, &CoolingSettings::default()).unwrap();
        assert!(run.fidelity.is_none());
        for p in &run.temperature {
            assert!(p.converged, "{p:?}");
            let tol = (4.0 * p.stderr).max(0.05 * p.true_temperature);
            assert!((p.fitted_temperature - p.true_temperature).abs() < tol, "{p:?}");
        }
        assert!(run.temperature[1].fitted_temperature < run.temperature[0].fitted_temperature);
    }
}
