//! Motional modes of the ion crystal: Bose-Einstein occupations, Fock
//! statistics, phonon-dependent carrier Rabi frequencies, the closed-form
//! thermal carrier signal and a simple relaxation model of laser cooling.
//!
//! All four probed modes share one effective temperature. Frequencies are
//! angular (rad/s).

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::atom::{HBAR, K_B};
use crate::{Error, Result};

/// Upper bound on the Lamb-Dicke factor accepted by [`ModeSet`].
pub const MAX_LAMB_DICKE: f64 = 0.3;
/// Largest phonon number for which Laguerre polynomials are evaluated.
pub const MAX_LAGUERRE_N: u32 = 10_000;
/// Tail probability left out by [`truncation_cutoff`].
pub const FOCK_TAIL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    /// rad/s
    pub omega: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSet {
    modes: Vec<Mode>,
}

impl ModeSet {
    pub fn new(modes: Vec<Mode>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::domain("mode set is empty"));
        }
        for (i, m) in modes.iter().enumerate() {
            if !(m.omega > 0.0) || !m.omega.is_finite() {
                return Err(Error::domain(format!("mode {i}: frequency {} must be > 0", m.omega)));
            }
            if !(0.0..MAX_LAMB_DICKE).contains(&m.eta) {
                return Err(Error::domain(format!(
                    "mode {i}: Lamb-Dicke factor {} outside [0, {MAX_LAMB_DICKE})",
                    m.eta
                )));
            }
        }
        Ok(ModeSet { modes })
    }

    /// The two radial common/rocking pairs seen by the 411 nm probe, with an
    /// equal Lamb-Dicke factor of 0.024 on each.
    pub fn transverse_default() -> Self {
        let two_pi = 2.0 * std::f64::consts::PI;
        let freqs_mhz = [3.15, 3.1477, 2.97, 2.9676];
        ModeSet { modes: freqs_mhz.iter().map(|f| Mode { omega: two_pi * f * 1e6, eta: 0.024 }).collect() }
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// `Σ η_i²`
    pub fn eta_sq_sum(&self) -> f64 {
        self.modes.iter().map(|m| m.eta * m.eta).sum()
    }
}

/// Mean phonon number of every mode, optionally tagged with the shared
/// temperature it was derived from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalState {
    nbar: Vec<f64>,
    temperature: Option<f64>,
}

impl ThermalState {
    pub fn from_temperature(temperature: f64, modes: &ModeSet) -> Result<Self> {
        let nbar = modes.modes.iter().map(|m| mean_occupation(m.omega, temperature)).collect::<Result<_>>()?;
        Ok(ThermalState { nbar, temperature: Some(temperature) })
    }

    pub fn from_nbar(nbar: Vec<f64>) -> Result<Self> {
        if nbar.iter().any(|n| !(*n >= 0.0) || !n.is_finite()) {
            return Err(Error::domain("mean occupations must be finite and >= 0"));
        }
        Ok(ThermalState { nbar, temperature: None })
    }

    pub fn nbar(&self) -> &[f64] {
        &self.nbar
    }

    /// The shared temperature, if the state was built from one and has not
    /// been evolved since.
    pub fn temperature(&self) -> Option<f64> {
        self.temperature
    }

    fn check_modes(&self, modes: &ModeSet) -> Result<()> {
        if self.nbar.len() != modes.len() {
            return Err(Error::domain(format!(
                "thermal state has {} modes, mode set has {}",
                self.nbar.len(),
                modes.len()
            )));
        }
        Ok(())
    }
}

/// Phonon number of each mode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockSample {
    pub n: Vec<u32>,
}

/// `n̄ = 1/(e^{ħω/k_B T} − 1)`
pub fn mean_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) || !(temperature > 0.0) {
        return Err(Error::domain(format!("mean occupation needs omega > 0 and T > 0 (got {omega}, {temperature})")));
    }
    let x = HBAR * omega / (K_B * temperature);
    Ok(1.0 / x.exp_m1())
}

/// Inverse of [`mean_occupation`].
pub fn occupation_temperature(omega: f64, nbar: f64) -> Result<f64> {
    if !(omega > 0.0) || !(nbar > 0.0) {
        return Err(Error::domain("occupation temperature needs omega > 0 and nbar > 0"));
    }
    Ok(HBAR * omega / (K_B * (1.0 / nbar).ln_1p()))
}

/// `∂n̄/∂T = n̄(n̄+1)·x/T` with `x = ħω/k_B T`.
pub fn occupation_derivative(omega: f64, temperature: f64) -> Result<f64> {
    let n = mean_occupation(omega, temperature)?;
    let x = HBAR * omega / (K_B * temperature);
    Ok(n * (n + 1.0) * x / temperature)
}

/// Thermal probability of `n` phonons in a mode with mean `nbar`.
pub fn thermal_fock_probability(n: u32, nbar: f64) -> f64 {
    if nbar == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    (n as f64 * nbar.ln() - (n as f64 + 1.0) * nbar.ln_1p()).exp()
}

/// `P({n_i}) = Π n̄_i^{n_i}/(n̄_i+1)^{n_i+1}`
pub fn fock_probability(sample: &FockSample, thermal: &ThermalState, modes: &ModeSet) -> Result<f64> {
    thermal.check_modes(modes)?;
    if sample.n.len() != modes.len() {
        return Err(Error::domain("Fock sample length does not match the mode set"));
    }
    Ok(sample.n.iter().zip(&thermal.nbar).map(|(&n, &nb)| thermal_fock_probability(n, nb)).product())
}

/// Smallest `N_c` whose cumulative thermal probability `1 − (n̄/(n̄+1))^{N_c+1}`
/// reaches `1 − tail`.
pub fn truncation_cutoff(nbar: f64, tail: f64) -> u32 {
    if nbar <= 0.0 {
        return 0;
    }
    let ln_q = -(1.0 / nbar).ln_1p();
    let remaining = |n: u32| ((n as f64 + 1.0) * ln_q).exp();
    let mut n = ((tail.ln() / ln_q).ceil() - 1.0).max(0.0) as u32;
    while n > 0 && remaining(n - 1) <= tail {
        n -= 1;
    }
    while remaining(n) > tail {
        n += 1;
    }
    n
}

/// Draw phonon numbers from the thermal distribution of each mode.
pub fn sample_fock<R: Rng + ?Sized>(thermal: &ThermalState, rng: &mut R) -> FockSample {
    let n = thermal
        .nbar
        .iter()
        .map(|&nb| {
            if nb == 0.0 {
                0
            } else {
                let draw = Geometric::new(1.0 / (nb + 1.0)).expect("probability in (0, 1]").sample(rng);
                draw.min(u32::MAX as u64) as u32
            }
        })
        .collect();
    FockSample { n }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RabiModel {
    /// `Ω₀ Π e^{−η²/2} L_n(η²)`
    Exact,
    /// `Ω₀ [1 − Σ (n_i + ½) η_i²]`
    FirstOrder,
}

/// Laguerre polynomial `L_n(x)` by upward recurrence.
pub fn laguerre(n: u32, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 1.0 - x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 - x) * cur - k * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Carrier Rabi frequency for the given phonon numbers.
pub fn carrier_rabi(sample: &FockSample, omega0: f64, modes: &ModeSet, model: RabiModel) -> Result<f64> {
    if !(omega0 > 0.0) {
        return Err(Error::domain(format!("bare Rabi frequency {omega0} must be > 0")));
    }
    if sample.n.len() != modes.len() {
        return Err(Error::domain("Fock sample length does not match the mode set"));
    }
    match model {
        RabiModel::Exact => {
            let mut factor = 1.0;
            for (&n, m) in sample.n.iter().zip(&modes.modes) {
                if n > MAX_LAGUERRE_N {
                    return Err(Error::domain(format!(
                        "phonon number {n} beyond Laguerre evaluation limit {MAX_LAGUERRE_N}"
                    )));
                }
                let x = m.eta * m.eta;
                factor *= (-x / 2.0).exp() * laguerre(n, x);
            }
            Ok(omega0 * factor)
        }
        RabiModel::FirstOrder => {
            let s: f64 = sample.n.iter().zip(&modes.modes).map(|(&n, m)| (n as f64 + 0.5) * m.eta * m.eta).sum();
            Ok(omega0 * (1.0 - s))
        }
    }
}

/// `f(t)` of the thermal carrier signal, `P_S = (1 + Re f)/2`.
fn carrier_characteristic(t: f64, omega0: f64, nbar: &[f64], modes: &ModeSet) -> C64 {
    let mut f = C64::from_polar(1.0, omega0 * t * (1.0 - modes.eta_sq_sum() / 2.0));
    for (&nb, m) in nbar.iter().zip(&modes.modes) {
        let theta = m.eta * m.eta * omega0 * t;
        f /= C64::new(nb + 1.0, 0.0) - C64::from_polar(nb, -theta);
    }
    f
}

/// Probability of remaining in the initial level after a resonant carrier
/// drive of duration `t`, averaged over thermal phonon distributions.
pub fn thermal_carrier_signal(t: f64, omega0: f64, thermal: &ThermalState, modes: &ModeSet) -> Result<f64> {
    thermal.check_modes(modes)?;
    if !(t >= 0.0) {
        return Err(Error::domain(format!("time {t} must be >= 0")));
    }
    let f = carrier_characteristic(t, omega0, &thermal.nbar, modes);
    Ok(((1.0 + f.re) / 2.0).clamp(0.0, 1.0))
}

/// Signal value and its partial derivatives `(P_S, ∂P_S/∂Ω₀, ∂P_S/∂T)` at a
/// shared temperature `T`.
pub fn thermal_carrier_gradient(t: f64, omega0: f64, temperature: f64, modes: &ModeSet) -> Result<(f64, f64, f64)> {
    let mut nbar = Vec::with_capacity(modes.len());
    let mut dn_dt = Vec::with_capacity(modes.len());
    for m in &modes.modes {
        nbar.push(mean_occupation(m.omega, temperature)?);
        dn_dt.push(occupation_derivative(m.omega, temperature)?);
    }
    let f = carrier_characteristic(t, omega0, &nbar, modes);
    let i = C64::new(0.0, 1.0);
    let mut dlog_domega = i * t * (1.0 - modes.eta_sq_sum() / 2.0);
    let mut dlog_dtemp = C64::new(0.0, 0.0);
    for ((&nb, &dn), m) in nbar.iter().zip(&dn_dt).zip(&modes.modes) {
        let x = m.eta * m.eta;
        let e = C64::from_polar(1.0, -x * omega0 * t);
        let d = C64::new(nb + 1.0, 0.0) - e * nb;
        // ∂D/∂Ω₀ = i x t n̄ e^{−iθ}
        dlog_domega -= i * x * t * nb * e / d;
        // ∂D/∂n̄ = 1 − e^{−iθ}
        dlog_dtemp -= (C64::new(1.0, 0.0) - e) / d * dn;
    }
    let value = (1.0 + f.re) / 2.0;
    Ok((value, (f * dlog_domega).re / 2.0, (f * dlog_dtemp).re / 2.0))
}

/// Brute-force thermal average `Σ P({n}) (1 + cos Ω_{n} t)/2` with the
/// first-order Rabi frequency, each mode truncated at [`FOCK_TAIL`].
///
/// When all Lamb-Dicke factors are equal, Ω depends only on the total phonon
/// number and the mode distributions are convolved; otherwise the sum runs
/// over the full truncated grid.
pub fn fock_sum_carrier_signal(
    times: &[f64],
    omega0: f64,
    thermal: &ThermalState,
    modes: &ModeSet,
) -> Result<Vec<f64>> {
    thermal.check_modes(modes)?;
    let dists: Vec<Vec<f64>> = thermal
        .nbar
        .iter()
        .map(|&nb| (0..=truncation_cutoff(nb, FOCK_TAIL)).map(|n| thermal_fock_probability(n, nb)).collect())
        .collect();
    let eta0 = modes.modes[0].eta;
    let equal_eta = modes.modes.iter().all(|m| m.eta == eta0);
    let base = 1.0 - modes.eta_sq_sum() / 2.0;
    if equal_eta {
        let mut total = vec![1.0];
        for d in &dists {
            let mut next = vec![0.0; total.len() + d.len() - 1];
            for (a, &pa) in total.iter().enumerate() {
                for (b, &pb) in d.iter().enumerate() {
                    next[a + b] += pa * pb;
                }
            }
            total = next;
        }
        let x = eta0 * eta0;
        return Ok(times
            .iter()
            .map(|&t| {
                total
                    .iter()
                    .enumerate()
                    .map(|(n, &p)| p * (1.0 + (omega0 * (base - n as f64 * x) * t).cos()) / 2.0)
                    .sum()
            })
            .collect());
    }
    let grid_size: usize = dists.iter().map(Vec::len).product();
    if grid_size > 50_000_000 {
        return Err(Error::domain(format!("Fock grid of {grid_size} points is too large for direct summation")));
    }
    let mut out = vec![0.0; times.len()];
    let mut idx = vec![0usize; dists.len()];
    'grid: loop {
        let p: f64 = idx.iter().zip(&dists).map(|(&n, d)| d[n]).product();
        let shift: f64 = idx.iter().zip(&modes.modes).map(|(&n, m)| n as f64 * m.eta * m.eta).sum();
        for (o, &t) in out.iter_mut().zip(times) {
            *o += p * (1.0 + (omega0 * (base - shift) * t).cos()) / 2.0;
        }
        for (k, d) in dists.iter().enumerate() {
            idx[k] += 1;
            if idx[k] < d.len() {
                continue 'grid;
            }
            idx[k] = 0;
        }
        break;
    }
    Ok(out)
}

/// `n̄ → n̄_ss + (n̄ − n̄_ss) e^{−participation·rate·dt}` per mode.
pub fn cooling_step(
    thermal: &ThermalState,
    dt: f64,
    rate: f64,
    steady_state_nbar: &[f64],
    participation: &[f64],
) -> Result<ThermalState> {
    if !(dt >= 0.0) || !(rate >= 0.0) {
        return Err(Error::domain("cooling step needs dt >= 0 and rate >= 0"));
    }
    let n = thermal.nbar.len();
    if steady_state_nbar.len() != n || participation.len() != n {
        return Err(Error::domain("steady-state and participation vectors must match the mode count"));
    }
    if rate == 0.0 || dt == 0.0 {
        return Ok(thermal.clone());
    }
    let nbar = thermal
        .nbar
        .iter()
        .zip(steady_state_nbar)
        .zip(participation)
        .map(|((&nb, &ss), &w)| ss + (nb - ss) * (-w * rate * dt).exp())
        .collect();
    ThermalState::from_nbar(nbar)
}

/// `n̄ → n̄ + rate·dt` per mode.
pub fn heating_step(thermal: &ThermalState, dt: f64, heating_rate: f64) -> Result<ThermalState> {
    if !(dt >= 0.0) || !(heating_rate >= 0.0) {
        return Err(Error::domain("heating step needs dt >= 0 and rate >= 0"));
    }
    if heating_rate == 0.0 || dt == 0.0 {
        return Ok(thermal.clone());
    }
    ThermalState::from_nbar(thermal.nbar.iter().map(|nb| nb + heating_rate * dt).collect())
}

/// The shared temperature whose occupations reproduce `Σ η_i² n̄_i`, which is
/// what the carrier decay envelope is sensitive to.
pub fn effective_temperature(thermal: &ThermalState, modes: &ModeSet) -> Result<f64> {
    thermal.check_modes(modes)?;
    let weight = |nbar: &[f64]| -> f64 { nbar.iter().zip(&modes.modes).map(|(n, m)| n * m.eta * m.eta).sum() };
    let target = weight(&thermal.nbar);
    if !(target > 0.0) {
        return Err(Error::domain("effective temperature undefined for zero occupation or zero Lamb-Dicke factors"));
    }
    let at = |t: f64| -> Result<f64> {
        let nb: Vec<f64> = modes.modes.iter().map(|m| mean_occupation(m.omega, t)).collect::<Result<_>>()?;
        Ok(weight(&nb))
    };
    let (mut lo, mut hi) = (1e-9f64, 1e3f64);
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if at(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 1e-14 {
            break;
        }
    }
    Ok((lo * hi).sqrt())
}
