use num_complex::Complex64 as C64;

use super::lm::{levenberg_marquardt, FitModel, LmOptions, LmOutcome};
use super::models::{ThermalCarrier, TEMPERATURE_BOUNDS};
use super::{validate_points, DataPoint, FitResult};
use crate::motion::{mean_occupation, thermal_carrier_gradient, ModeSet};
use crate::{Error, Result};

/// Starting temperatures of the multi-start search, K: eight points
/// log-spaced over [0.1, 100] mK.
pub const TEMPERATURE_STARTS: [f64; 8] = [
    1.0e-4,
    2.682_695_795_279_725_5e-4,
    7.196_856_730_011_521e-4,
    1.930_697_728_883_250_3e-3,
    5.179_474_679_231_212e-3,
    1.389_495_494_373_136e-2,
    3.727_593_720_314_938e-2,
    1.0e-1,
];

/// Oscillation periods the time grid must span before a fit is attempted.
const MIN_PERIODS: f64 = 2.0;

fn spectral_power(points: &[DataPoint], mean: f64, omega: f64) -> f64 {
    let mut acc = C64::new(0.0, 0.0);
    for p in points {
        acc += C64::from_polar(p.y - mean, -omega * p.x);
    }
    acc.norm_sqr()
}

/// Angular frequency of the strongest periodogram line of a sampled signal.
pub fn dominant_frequency(points: &[DataPoint]) -> Option<f64> {
    let mut ts: Vec<f64> = points.iter().map(|p| p.x).collect();
    ts.sort_by(f64::total_cmp);
    let span = ts.last()? - ts.first()?;
    if !(span > 0.0) {
        return None;
    }
    let mut gaps: Vec<f64> = ts.windows(2).map(|w| w[1] - w[0]).filter(|g| *g > 0.0).collect();
    gaps.sort_by(f64::total_cmp);
    let nyquist = std::f64::consts::PI / gaps[gaps.len() / 2];
    let mean = points.iter().map(|p| p.y).sum::<f64>() / points.len() as f64;
    let step = 2.0 * std::f64::consts::PI / span / 8.0;
    let (mut best, mut best_power) = (0.0, 0.0);
    let mut omega = step;
    while omega <= nyquist {
        let power = spectral_power(points, mean, omega);
        if power > best_power {
            best = omega;
            best_power = power;
        }
        omega += step;
    }
    if best_power <= 0.0 {
        return None;
    }
    // golden-section refinement of the peak
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = ((best - step).max(step / 2.0), best + step);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (spectral_power(points, mean, c), spectral_power(points, mean, d));
    for _ in 0..100 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = spectral_power(points, mean, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = spectral_power(points, mean, d);
        }
        if b - a <= 1e-12 * b {
            break;
        }
    }
    Some((a + b) / 2.0)
}

/// Thermal model with the temperature held fixed.
struct FixedTemperature<'a> {
    modes: &'a ModeSet,
    temperature: f64,
}

impl FitModel for FixedTemperature<'_> {
    fn param_names(&self) -> Vec<&'static str> {
        vec!["Omega0"]
    }
    fn bounds(&self) -> Vec<(f64, f64)> {
        vec![(f64::MIN_POSITIVE, f64::INFINITY)]
    }
    fn evaluate(&self, t: f64, p: &[f64]) -> f64 {
        thermal_carrier_gradient(t, p[0], self.temperature, self.modes).map(|v| v.0).unwrap_or(f64::NAN)
    }
    fn gradient(&self, t: f64, p: &[f64], g: &mut [f64]) {
        g[0] = thermal_carrier_gradient(t, p[0], self.temperature, self.modes).map(|v| v.1).unwrap_or(f64::NAN);
    }
}

/// Fits `(Ω₀, T)` of the thermally averaged carrier signal.
///
/// `Ω₀` is seeded from the periodogram peak corrected for the mean thermal
/// frequency shift at each starting temperature; the lowest-residual start
/// wins, ties going to the colder one. A trace that the coldest allowed
/// temperature explains as well as the best fit reports `T` at that bound.
pub fn fit_thermal_rabi(points: &[DataPoint], modes: &ModeSet) -> Result<FitResult> {
    validate_points(points, 4)?;
    let peak =
        dominant_frequency(points).ok_or_else(|| Error::FitRejected("signal has no oscillating component".into()))?;
    let span = points.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max)
        - points.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
    let periods = span * peak / (2.0 * std::f64::consts::PI);
    if periods < MIN_PERIODS {
        return Err(Error::FitRejected(format!(
            "time grid spans {periods:.2} oscillation periods; at least {MIN_PERIODS} are needed to separate Omega0 from T"
        )));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.x).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.y).collect();
    let ss: Vec<f64> = points.iter().map(|p| p.stderr).collect();
    let model = ThermalCarrier { modes: modes.clone() };

    let mut best: Option<(LmOutcome, usize)> = None;
    let mut total_iterations = 0;
    for &t0 in &TEMPERATURE_STARTS {
        let shift: f64 = modes
            .modes()
            .iter()
            .map(|m| Ok(m.eta * m.eta * (mean_occupation(m.omega, t0)? + 0.5)))
            .sum::<Result<f64>>()?;
        let omega0 = peak / (1.0 - shift).max(0.2);
        let out = levenberg_marquardt(&model, &xs, &ys, &ss, &[omega0, t0], LmOptions::default());
        total_iterations += out.iterations;
        let better = match &best {
            None => true,
            Some((b, _)) => {
                let tie = (out.rss - b.rss).abs() <= 1e-12 * b.rss.max(f64::MIN_POSITIVE);
                out.rss.is_finite() && ((!tie && out.rss < b.rss) || (tie && out.params[1] < b.params[1]))
            }
        };
        if better {
            best = Some((out, total_iterations));
        }
    }
    let (mut best, _) = best.expect("at least one start");
    if !best.converged {
        // restart the damping schedule from the winning point
        let polished = levenberg_marquardt(&model, &xs, &ys, &ss, &best.params, LmOptions::default());
        total_iterations += polished.iterations;
        if polished.rss <= best.rss {
            best = polished;
        }
    }
    let scale: f64 = points.iter().map(|p| (p.y / p.stderr).powi(2)).sum();

    let cold = FixedTemperature { modes, temperature: TEMPERATURE_BOUNDS.0 };
    let pinned = levenberg_marquardt(&cold, &xs, &ys, &ss, &[best.params[0]], LmOptions::default());
    total_iterations += pinned.iterations;

    let mut fit = if pinned.rss <= best.rss + 1e-12 * scale {
        FitResult {
            model: "thermal_carrier".into(),
            names: vec!["Omega0".into(), "T".into()],
            params: vec![pinned.params[0], TEMPERATURE_BOUNDS.0],
            stderrs: vec![pinned.stderrs[0], f64::INFINITY],
            residual_rss: pinned.rss,
            relative_rss: 0.0,
            converged: pinned.converged,
            iterations: 0,
        }
    } else {
        FitResult::from_outcome("thermal_carrier", &model, best, points)
    };
    fit.relative_rss = if scale > 0.0 { fit.residual_rss / scale } else { fit.residual_rss };
    fit.iterations = total_iterations;
    Ok(fit)
}
