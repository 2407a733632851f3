use serde::{Deserialize, Serialize};

use super::{CurveRecord, ExperimentKind, ExperimentPlan, Tally};
use crate::motion::{thermal_carrier_signal, ModeSet, ThermalState};
use crate::{Error, Result};

/// Carrier Rabi thermometry on the 411 nm transition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThermometrySettings {
    /// bare carrier Rabi frequency, rad/s
    pub omega0: f64,
    /// temperature of the thermometry experiment, K
    pub temperature: f64,
    /// Rabi periods covered by the default time grid
    pub periods: f64,
    pub points_per_period: u32,
}

impl Default for ThermometrySettings {
    fn default() -> Self {
        ThermometrySettings {
            omega0: 2.0 * std::f64::consts::PI * 859.4e3,
            temperature: 9.2e-3,
            periods: 50.0,
            points_per_period: 20,
        }
    }
}

impl ThermometrySettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega0 > 0.0) || !self.omega0.is_finite() {
            return Err(Error::domain("omega0 must be > 0"));
        }
        if !(self.temperature > 0.0) {
            return Err(Error::domain("temperature must be > 0"));
        }
        if !(self.periods > 0.0) || self.points_per_period == 0 {
            return Err(Error::domain("periods and points_per_period must be > 0"));
        }
        Ok(())
    }
}

/// Evenly spaced times from 0 over `periods` bare Rabi periods.
pub fn thermometry_times(omega0: f64, periods: f64, points_per_period: u32) -> Vec<f64> {
    let dt = 2.0 * std::f64::consts::PI / omega0 / points_per_period as f64;
    let n = (periods * points_per_period as f64).round() as usize;
    (0..=n).map(|k| k as f64 * dt).collect()
}

/// Sampled probability of finding the ion in S₁/₂ after a carrier pulse of
/// each duration in `times`.
pub(crate) fn sample_carrier_trace(
    plan: &ExperimentPlan,
    times: &[f64],
    omega0: f64,
    thermal: &ThermalState,
    modes: &ModeSet,
    stream: u64,
) -> Result<Vec<CurveRecord>> {
    times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let p = thermal_carrier_signal(t, omega0, thermal, modes)?;
            let mut rng = crate::rng::shot_rng(plan.seed, stream, i as u64, 0);
            Ok(Tally::draw(p, plan.shots, &mut rng)?.record_at(t))
        })
        .collect()
}

/// Carrier Rabi trace at the configured temperature, sampled at the plan's
/// pulse durations (s).
pub fn run_thermometry(
    plan: &ExperimentPlan,
    settings: &ThermometrySettings,
    modes: &ModeSet,
) -> Result<Vec<CurveRecord>> {
    plan.require(&[ExperimentKind::Thermometry])?;
    settings.validate()?;
    let thermal = ThermalState::from_temperature(settings.temperature, modes)?;
    let stream = crate::rng::experiment_id(plan.kind.name());
    sample_carrier_trace(plan, &plan.sweep, settings.omega0, &thermal, modes, stream)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{fit_thermal_rabi, DataPoint};

    #[test]
    fn default_grid() {
        let s = ThermometrySettings::default();
        let t = thermometry_times(s.omega0, s.periods, s.points_per_period);
        assert_eq!(t.len(), 1001);
        assert!((t[1000] * 859.4e3 - 50.0).abs() < 1e-9);
    }

    #[test]
    fn sampled_trace_fits_back() {
        let s = ThermometrySettings::default();
        let modes = ModeSet::transverse_default();
        let plan = ExperimentPlan::with_defaults(ExperimentKind::Thermometry, 10_000, 7).unwrap();
        let trace = run_thermometry(&plan, &s, &modes).unwrap();
        assert_eq!(trace[0].mean, 1.0);
        let pts: Vec<DataPoint> = trace.iter().map(|r| DataPoint::new(r.sweep_value, r.mean, r.stderr)).collect();
        let fit = fit_thermal_rabi(&pts, &modes).unwrap();
        assert!((fit.get("T").unwrap() - 9.2e-3).abs() < 0.2e-3, "{fit:?}");
        assert!((fit.get("Omega0").unwrap() / s.omega0 - 1.0).abs() < 1e-3);
    }
}
