//! Weighted least-squares fits of the decay models used to read error rates,
//! gate fidelities and temperatures off simulated or measured curves.
//!
//! Fits run on the natural scale with weights `1/stderr²`; logarithms are
//! only used to seed the optimizer.

mod lm;
mod models;
mod thermal;

use serde::Serialize;

pub use lm::{levenberg_marquardt, FitModel, LmOptions, LmOutcome};
pub use models::{ExpDecay, PowerDecay, RbDecay, ThermalCarrier, MAX_PREFACTOR, TEMPERATURE_BOUNDS};
pub use thermal::{dominant_frequency, fit_thermal_rabi, TEMPERATURE_STARTS};

use crate::{Error, Result};

/// One measured point: sweep value, mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DataPoint {
    pub x: f64,
    pub y: f64,
    pub stderr: f64,
}

impl DataPoint {
    pub fn new(x: f64, y: f64, stderr: f64) -> Self {
        DataPoint { x, y, stderr }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub model: String,
    pub names: Vec<String>,
    pub params: Vec<f64>,
    pub stderrs: Vec<f64>,
    /// `Σ ((y − f)/σ)²`
    pub residual_rss: f64,
    /// `residual_rss / Σ (y/σ)²`
    pub relative_rss: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl FitResult {
    fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.index(name).map(|i| self.params[i])
    }

    pub fn stderr(&self, name: &str) -> Option<f64> {
        self.index(name).map(|i| self.stderrs[i])
    }

    fn push(&mut self, name: &str, value: f64, stderr: f64) {
        self.names.push(name.to_string());
        self.params.push(value);
        self.stderrs.push(stderr);
    }

    fn from_outcome<M: FitModel + ?Sized>(name: &str, model: &M, out: LmOutcome, points: &[DataPoint]) -> Self {
        let scale: f64 = points.iter().map(|p| (p.y / p.stderr).powi(2)).sum();
        FitResult {
            model: name.to_string(),
            names: model.param_names().into_iter().map(String::from).collect(),
            params: out.params,
            stderrs: out.stderrs,
            residual_rss: out.rss,
            relative_rss: if scale > 0.0 { out.rss / scale } else { out.rss },
            converged: out.converged,
            iterations: out.iterations,
        }
    }
}

pub(crate) fn validate_points(points: &[DataPoint], min: usize) -> Result<()> {
    if points.len() < min {
        return Err(Error::FitRejected(format!("need at least {min} points, got {}", points.len())));
    }
    for p in points {
        if !p.x.is_finite() || !p.y.is_finite() {
            return Err(Error::FitRejected("non-finite data point".into()));
        }
        if !(p.stderr > 0.0) || !p.stderr.is_finite() {
            return Err(Error::FitRejected(format!("stderr {} at x = {} must be finite and > 0", p.stderr, p.x)));
        }
    }
    let mut xs: Vec<f64> = points.iter().map(|p| p.x).collect();
    xs.sort_by(f64::total_cmp);
    if xs.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::FitRejected("sweep values must be distinct".into()));
    }
    Ok(())
}

fn run<M: FitModel>(model: &M, points: &[DataPoint], initial: &[f64]) -> LmOutcome {
    let xs: Vec<f64> = points.iter().map(|p| p.x).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.y).collect();
    let ss: Vec<f64> = points.iter().map(|p| p.stderr).collect();
    levenberg_marquardt(model, &xs, &ys, &ss, initial, LmOptions::default())
}

/// Weighted fit of `ln(y − offset) = a + b x` over points above the offset,
/// returning `(a, b)`.
fn log_linear(points: &[DataPoint], offset: f64) -> (f64, f64) {
    let mut s = [0.0f64; 5];
    for p in points {
        let y = p.y - offset;
        if y <= 0.0 {
            continue;
        }
        let w = (y / p.stderr).powi(2);
        let l = y.ln();
        s[0] += w;
        s[1] += w * p.x;
        s[2] += w * l;
        s[3] += w * p.x * p.x;
        s[4] += w * p.x * l;
    }
    let det = s[0] * s[3] - s[1] * s[1];
    if s[0] == 0.0 {
        return (0.0, 0.0);
    }
    if det.abs() <= 1e-300 {
        return (s[2] / s[0], 0.0);
    }
    let b = (s[0] * s[4] - s[1] * s[2]) / det;
    ((s[2] - b * s[1]) / s[0], b)
}

/// `F̄ = F₀(1 − ε)^N`
pub fn fit_power_decay(points: &[DataPoint]) -> Result<FitResult> {
    validate_points(points, 3)?;
    let (a, b) = log_linear(points, 0.0);
    let init = [a.exp().clamp(0.0, MAX_PREFACTOR), (-b.exp_m1()).clamp(0.0, 0.5)];
    let out = run(&PowerDecay, points, &init);
    Ok(FitResult::from_outcome("power_decay", &PowerDecay, out, points))
}

/// Log-linear seed `(F₀, rate)` for [`fit_exp_decay`].
pub fn exp_decay_initial_guess(points: &[DataPoint]) -> (f64, f64) {
    let (a, b) = log_linear(points, 0.0);
    (a.exp().clamp(0.0, MAX_PREFACTOR), (-b).max(0.0))
}

/// `F̄ = F₀ e^{−t/T_c}`, fitted as a rate. A vanishing rate reports
/// `T_c = ∞`.
pub fn fit_exp_decay(points: &[DataPoint]) -> Result<FitResult> {
    validate_points(points, 3)?;
    let (f0, rate) = exp_decay_initial_guess(points);
    let out = run(&ExpDecay, points, &[f0, rate]);
    let mut fit = FitResult::from_outcome("exp_decay", &ExpDecay, out, points);
    let t_max = points.iter().map(|p| p.x.abs()).fold(0.0, f64::max);
    if fit.params[1] * t_max < 1e-12 {
        // decay below double-precision resolution over the sampled range
        fit.params[1] = 0.0;
    }
    let (rate, sr) = (fit.params[1], fit.stderrs[1]);
    let tc = if rate > 0.0 { 1.0 / rate } else { f64::INFINITY };
    let stc = if rate > 0.0 { sr / (rate * rate) } else { f64::INFINITY };
    fit.push("Tc", tc, stc);
    Ok(fit)
}

/// RB decay `A pᵐ + B` with `B` pinned at 1/2.
pub fn fit_rb(points: &[DataPoint]) -> Result<FitResult> {
    fit_rb_with(points, RbDecay::default())
}

/// RB decay with an explicit choice for `B`; reports the average gate
/// fidelity `1 − (1 − p)/2`.
pub fn fit_rb_with(points: &[DataPoint], model: RbDecay) -> Result<FitResult> {
    validate_points(points, if model.fixed_b.is_some() { 3 } else { 4 })?;
    let b0 = model.fixed_b.unwrap_or(0.5);
    let (a, b) = log_linear(points, b0);
    let mut init = vec![a.exp().clamp(0.0, MAX_PREFACTOR), b.exp().clamp(0.0, 1.0)];
    if model.fixed_b.is_none() {
        init.push(b0);
    }
    let out = run(&model, points, &init);
    let mut fit = FitResult::from_outcome("rb_decay", &model, out, points);
    let (p, sp) = (fit.params[1], fit.stderrs[1]);
    fit.push("avg_gate_fidelity", 1.0 - (1.0 - p) / 2.0, sp / 2.0);
    Ok(fit)
}

/// Arithmetic mean of the six MUB fidelities, which equals the Bloch-sphere
/// average for any qubit channel.
pub fn average_fidelity_mub(per_state: &[f64; 6]) -> f64 {
    per_state.iter().sum::<f64>() / 6.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn synth<F: Fn(f64) -> f64>(xs: &[f64], f: F, sigma: f64) -> Vec<DataPoint> {
        xs.iter().map(|&x| DataPoint::new(x, f(x), sigma)).collect()
    }

    fn sweep(n: usize, step: f64) -> Vec<f64> {
        (0..n).map(|k| k as f64 * step).collect()
    }

    #[test]
    fn power_decay_noiseless() {
        let pts = synth(&sweep(11, 2.0), |n| 0.966 * (1.0f64 - 0.0065).powf(n), 0.003);
        let fit = fit_power_decay(&pts).unwrap();
        assert!(fit.converged);
        assert!((fit.get("F0").unwrap() - 0.966).abs() < 1e-8);
        assert!((fit.get("eps").unwrap() - 0.0065).abs() < 1e-8);
        assert!(fit.relative_rss < 1e-12);
    }

    #[test]
    fn power_decay_flat() {
        let pts = synth(&sweep(6, 1.0), |_| 0.93, 0.01);
        let fit = fit_power_decay(&pts).unwrap();
        assert_eq!(fit.get("eps").unwrap(), 0.0);
        assert!((fit.get("F0").unwrap() - 0.93).abs() < 1e-12);
    }

    #[test]
    fn power_decay_coverage() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let xs = sweep(11, 2.0);
        let sigma = 0.004;
        let noise = Normal::new(0.0, sigma).unwrap();
        let trials = 500;
        let mut covered = 0;
        for _ in 0..trials {
            let pts: Vec<DataPoint> = xs
                .iter()
                .map(|&n| DataPoint::new(n, 0.966 * (1.0f64 - 0.0065).powf(n) + noise.sample(&mut rng), sigma))
                .collect();
            let fit = fit_power_decay(&pts).unwrap();
            if (fit.get("eps").unwrap() - 0.0065).abs() <= 2.0 * fit.stderr("eps").unwrap() {
                covered += 1;
            }
        }
        let frac = covered as f64 / trials as f64;
        // 95.4% nominal, binomial sd ≈ 0.9%
        assert!(frac >= 0.93, "{frac}");
    }

    #[test]
    fn exp_decay_noiseless_and_seed() {
        let pts = synth(&sweep(11, 0.1), |t| 0.97 * (-t / 2.9).exp(), 0.002);
        let fit = fit_exp_decay(&pts).unwrap();
        assert!((fit.get("Tc").unwrap() - 2.9).abs() < 1e-8);
        let (f0, rate) = exp_decay_initial_guess(&pts);
        assert!((f0 / fit.get("F0").unwrap() - 1.0).abs() < 0.01);
        assert!((rate / fit.get("rate").unwrap() - 1.0).abs() < 0.01);
    }

    #[test]
    fn exp_decay_constant_is_infinite_tc() {
        let pts = synth(&sweep(5, 0.2), |_| 0.95, 0.01);
        let fit = fit_exp_decay(&pts).unwrap();
        assert_eq!(fit.get("rate").unwrap(), 0.0, "{fit:?}");
        assert!(fit.get("Tc").unwrap().is_infinite());
    }

    #[test]
    fn rb_examples() {
        let ms = [1.0, 10.0, 50.0, 100.0, 200.0, 400.0, 800.0];
        let flat = synth(&ms, |_| 0.99, 0.002);
        let fit = fit_rb(&flat).unwrap();
        assert!((fit.get("avg_gate_fidelity").unwrap() - 1.0).abs() < 1e-12);

        let pts = synth(&ms, |m| 0.48 * 0.9996f64.powf(m) + 0.5, 0.002);
        let fit = fit_rb(&pts).unwrap();
        assert!((fit.get("avg_gate_fidelity").unwrap() - 0.9998).abs() < 1e-10);
        let free = fit_rb_with(&pts, RbDecay { fixed_b: None }).unwrap();
        assert!((free.get("p").unwrap() - fit.get("p").unwrap()).abs() < free.stderr("p").unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        let two = synth(&[0.0, 1.0], |_| 1.0, 0.1);
        assert!(matches!(fit_power_decay(&two), Err(Error::FitRejected(_))));
        let dup = synth(&[0.0, 1.0, 1.0], |_| 1.0, 0.1);
        assert!(fit_exp_decay(&dup).is_err());
        let zero = synth(&[0.0, 1.0, 2.0], |_| 1.0, 0.0);
        assert!(fit_rb(&zero).is_err());
    }

    #[test]
    fn mub_average() {
        assert_eq!(average_fidelity_mub(&[1.0; 6]), 1.0);
        assert_eq!(average_fidelity_mub(&[0.5; 6]), 0.5);
        let p = 0.3;
        let v = [1.0, 1.0, 1.0 - p, 1.0 - p, 1.0 - p, 1.0 - p];
        assert!((average_fidelity_mub(&v) - (1.0 - 2.0 * p / 3.0)).abs() < 1e-15);
    }
}
