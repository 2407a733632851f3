use super::lm::FitModel;
use crate::motion::{thermal_carrier_gradient, ModeSet};

/// Upper bound on fitted fidelity prefactors.
pub const MAX_PREFACTOR: f64 = 1.05;
/// Temperature search box of the thermal fit, K.
pub const TEMPERATURE_BOUNDS: (f64, f64) = (1e-6, 1.0);

/// `F₀ (1 − ε)^N`
#[derive(Debug, Clone, Copy, Default)]
pub struct PowerDecay;

impl FitModel for PowerDecay {
    fn param_names(&self) -> Vec<&'static str> {
        vec!["F0", "eps"]
    }
    fn bounds(&self) -> Vec<(f64, f64)> {
        vec![(0.0, MAX_PREFACTOR), (0.0, 1.0 - 1e-12)]
    }
    fn evaluate(&self, n: f64, p: &[f64]) -> f64 {
        p[0] * (1.0 - p[1]).powf(n)
    }
    fn gradient(&self, n: f64, p: &[f64], g: &mut [f64]) {
        g[0] = (1.0 - p[1]).powf(n);
        g[1] = if n == 0.0 { 0.0 } else { -p[0] * n * (1.0 - p[1]).powf(n - 1.0) };
    }
}

/// `F₀ e^{−rate·t}`, with `T_c = 1/rate` reported alongside.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExpDecay;

impl FitModel for ExpDecay {
    fn param_names(&self) -> Vec<&'static str> {
        vec!["F0", "rate"]
    }
    fn bounds(&self) -> Vec<(f64, f64)> {
        vec![(0.0, MAX_PREFACTOR), (0.0, f64::INFINITY)]
    }
    fn evaluate(&self, t: f64, p: &[f64]) -> f64 {
        p[0] * (-p[1] * t).exp()
    }
    fn gradient(&self, t: f64, p: &[f64], g: &mut [f64]) {
        let e = (-p[1] * t).exp();
        g[0] = e;
        g[1] = -p[0] * t * e;
    }
}

/// `A pᵐ + B`, with `B` either fixed or fitted.
#[derive(Debug, Clone, Copy)]
pub struct RbDecay {
    pub fixed_b: Option<f64>,
}

impl Default for RbDecay {
    fn default() -> Self {
        RbDecay { fixed_b: Some(0.5) }
    }
}

impl RbDecay {
    fn b(&self, p: &[f64]) -> f64 {
        self.fixed_b.unwrap_or_else(|| p[2])
    }
}

impl FitModel for RbDecay {
    fn param_names(&self) -> Vec<&'static str> {
        match self.fixed_b {
            Some(_) => vec!["A", "p"],
            None => vec!["A", "p", "B"],
        }
    }
    fn bounds(&self) -> Vec<(f64, f64)> {
        let mut b = vec![(0.0, MAX_PREFACTOR), (0.0, 1.0)];
        if self.fixed_b.is_none() {
            b.push((0.0, 1.0));
        }
        b
    }
    fn evaluate(&self, m: f64, p: &[f64]) -> f64 {
        p[0] * p[1].powf(m) + self.b(p)
    }
    fn gradient(&self, m: f64, p: &[f64], g: &mut [f64]) {
        g[0] = p[1].powf(m);
        g[1] = if m == 0.0 { 0.0 } else { p[0] * m * p[1].powf(m - 1.0) };
        if self.fixed_b.is_none() {
            g[2] = 1.0;
        }
    }
}

/// Thermally averaged carrier signal with parameters `(Ω₀, T)`.
#[derive(Debug, Clone)]
pub struct ThermalCarrier {
    pub modes: ModeSet,
}

impl FitModel for ThermalCarrier {
    fn param_names(&self) -> Vec<&'static str> {
        vec!["Omega0", "T"]
    }
    fn bounds(&self) -> Vec<(f64, f64)> {
        vec![(f64::MIN_POSITIVE, f64::INFINITY), TEMPERATURE_BOUNDS]
    }
    fn evaluate(&self, t: f64, p: &[f64]) -> f64 {
        thermal_carrier_gradient(t, p[0], p[1], &self.modes).map(|v| v.0).unwrap_or(f64::NAN)
    }
    fn gradient(&self, t: f64, p: &[f64], g: &mut [f64]) {
        let (_, d_om, d_t) =
            thermal_carrier_gradient(t, p[0], p[1], &self.modes).unwrap_or((f64::NAN, f64::NAN, f64::NAN));
        g[0] = d_om;
        g[1] = d_t;
    }
}
