use rand::Rng;
use rand_distr::{Distribution, Exp, Poisson};
use serde::{Deserialize, Serialize};

use crate::atom::{LevelId, Manifold};
use crate::quantum::{apply_channel, Channel, DensityMatrix};
use crate::{Error, Result};

/// Population a shelving detection tolerates outside the qubit it reads.
pub const SUPPORT_TOLERANCE: f64 = 1e-9;
/// Probability that the 20 µs pump window moves `|0′⟩` back to S₁/₂.
pub const F_PUMP_SUCCESS: f64 = 0.9995;
/// Per-stage success of the `|0⟩ → F₇/₂` transfer through the Zeeman ladder.
pub const S_TRANSFER_CHAIN: [f64; 2] = [0.96, 0.96];

/// Photon-counting detection with threshold discrimination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionConfig {
    /// counts/s while bright
    pub bright_rate: f64,
    /// counts/s while dark (background)
    pub dark_rate: f64,
    /// s
    pub duration: f64,
    /// bright iff counts >= threshold
    pub threshold: u32,
    /// 1/s
    pub leakage_bright_to_dark: f64,
    /// 1/s
    pub leakage_dark_to_bright: f64,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        DetectionConfig::direct_s()
    }
}

impl DetectionConfig {
    /// Direct 370 nm detection of the S-qubit; off-resonant pumping during the
    /// window is what limits the fidelity to 98.3%.
    pub fn direct_s() -> Self {
        DetectionConfig {
            bright_rate: 36_800.0,
            dark_rate: 200.0,
            duration: 250e-6,
            threshold: 2,
            leakage_bright_to_dark: 128.8,
            leakage_dark_to_bright: 128.8,
        }
    }

    /// Fluorescence readout after pumping `|0′⟩` back to S₁/₂. The F₇/₂ dark
    /// state does not leak.
    pub fn shelving_f() -> Self {
        DetectionConfig {
            bright_rate: 36_800.0,
            dark_rate: 200.0,
            duration: 250e-6,
            threshold: 2,
            leakage_bright_to_dark: 0.0,
            leakage_dark_to_bright: 0.0,
        }
    }

    pub fn shelving_f_extended() -> Self {
        DetectionConfig { duration: 2.5e-3, threshold: 6, ..DetectionConfig::shelving_f() }
    }

    pub fn shelving_s() -> Self {
        DetectionConfig { duration: 500e-6, threshold: 3, ..DetectionConfig::shelving_f() }
    }

    pub fn validate(&self) -> Result<()> {
        let rates = [self.bright_rate, self.dark_rate, self.leakage_bright_to_dark, self.leakage_dark_to_bright];
        if rates.iter().any(|r| !(*r >= 0.0) || !r.is_finite()) {
            return Err(Error::domain("detection rates must be finite and >= 0"));
        }
        if self.threshold < 1 {
            return Err(Error::domain("detection threshold must be >= 1"));
        }
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(Error::domain("detection duration must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Bright,
    Dark,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Detection {
    pub outcome: Outcome,
    pub counts: u64,
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng) as u64
}

pub fn detect_bright_dark<R: Rng + ?Sized>(
    is_bright: bool,
    config: &DetectionConfig,
    rng: &mut R,
) -> Result<Detection> {
    config.validate()?;
    let (start, end, leak) = if is_bright {
        (config.bright_rate, config.dark_rate, config.leakage_bright_to_dark)
    } else {
        (config.dark_rate, config.bright_rate, config.leakage_dark_to_bright)
    };
    let t = config.duration;
    let flip = if leak > 0.0 { Exp::new(leak).expect("positive rate").sample(rng) } else { f64::INFINITY };
    let mean = if flip < t { start * flip + end * (t - flip) } else { start * t };
    let counts = poisson(mean, rng);
    let outcome = if counts >= config.threshold as u64 { Outcome::Bright } else { Outcome::Dark };
    Ok(Detection { outcome, counts })
}

fn poisson_cdf_below(k: u32, mean: f64) -> f64 {
    // P(X < k)
    let mut term = (-mean).exp();
    let mut acc = 0.0;
    for j in 0..k {
        acc += term;
        term *= mean / (j as f64 + 1.0);
    }
    acc
}

/// Leakage-free misidentification probabilities `(bright→dark, dark→bright)`
/// from the Poisson tails.
pub fn misidentification_probabilities(config: &DetectionConfig) -> Result<(f64, f64)> {
    config.validate()?;
    let t = config.duration;
    Ok((
        poisson_cdf_below(config.threshold, config.bright_rate * t),
        1.0 - poisson_cdf_below(config.threshold, config.dark_rate * t),
    ))
}

fn pick_level<R: Rng + ?Sized>(state: &DensityMatrix, rng: &mut R) -> LevelId {
    let pops = state.populations();
    let mut u: f64 = rng.random::<f64>() * pops.iter().map(|p| p.max(0.0)).sum::<f64>();
    for (level, p) in state.basis().iter().zip(&pops) {
        u -= p.max(0.0);
        if u < 0.0 {
            return *level;
        }
    }
    *state.basis().last().expect("non-empty basis")
}

fn check_support(state: &DensityMatrix, qubit: [LevelId; 2], name: &str) -> Result<()> {
    let inside: f64 = qubit.iter().map(|l| state.index_of(*l).map_or(0.0, |i| state.populations()[i])).sum();
    if 1.0 - inside > SUPPORT_TOLERANCE {
        return Err(Error::domain(format!(
            "{name} detection needs a state on its qubit subspace ({} outside)",
            1.0 - inside
        )));
    }
    Ok(())
}

/// F-qubit readout: `|0′⟩` is pumped to the bright S₁/₂ manifold with
/// probability `pump_success`, `|1′⟩` stays dark.
pub fn shelve_detect_f<R: Rng + ?Sized>(
    state: &DensityMatrix,
    pump_success: f64,
    det: &DetectionConfig,
    rng: &mut R,
) -> Result<Detection> {
    if !(0.0..=1.0).contains(&pump_success) {
        return Err(Error::domain(format!("pump success {pump_success} outside [0, 1]")));
    }
    check_support(state, [LevelId::ZERO_PRIME, LevelId::ONE_PRIME], "F-qubit shelving")?;
    let level = pick_level(state, rng);
    let bright = level == LevelId::ZERO_PRIME && rng.random::<f64>() < pump_success;
    detect_bright_dark(bright, det, rng)
}

/// S-qubit readout: `|0⟩` is shelved to F₇/₂ through a chain of transfer
/// stages, each moving a fraction `s_i` of what is still left in S₁/₂;
/// `|1⟩` is read bright.
pub fn shelve_detect_s<R: Rng + ?Sized>(
    state: &DensityMatrix,
    transfer_chain_success: &[f64],
    det: &DetectionConfig,
    rng: &mut R,
) -> Result<Detection> {
    if transfer_chain_success.iter().any(|s| !(0.0..=1.0).contains(s)) {
        return Err(Error::domain("transfer probabilities must lie in [0, 1]"));
    }
    check_support(state, [LevelId::ZERO, LevelId::ONE], "S-qubit shelving")?;
    let residual: f64 = transfer_chain_success.iter().map(|s| 1.0 - s).product();
    let level = pick_level(state, rng);
    let bright = match level.manifold {
        Manifold::S12 if level == LevelId::ZERO => rng.random::<f64>() < residual,
        Manifold::S12 => true,
        _ => false,
    };
    detect_bright_dark(bright, det, rng)
}

/// Optical pumping of the S-qubit into `|0⟩`: each cycle leaves a fraction
/// `residual_per_cycle` of the `|1⟩` population behind.
pub fn optical_pump_to_0(state: &DensityMatrix, cycles: u32, residual_per_cycle: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&residual_per_cycle) {
        return Err(Error::domain(format!("residual {residual_per_cycle} outside [0, 1]")));
    }
    let from = state.index_of(LevelId::ONE).ok_or_else(|| Error::domain("state has no |1> level"))?;
    let to = state.index_of(LevelId::ZERO).ok_or_else(|| Error::domain("state has no |0> level"))?;
    let p = 1.0 - residual_per_cycle.powi(cycles as i32);
    apply_channel(state, &Channel::PopulationTransfer { from, to, p })
}
