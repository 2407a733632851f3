use serde::{Deserialize, Serialize};

use super::{DensityMatrix, C64};
use crate::atom::LevelId;
use crate::{Error, Result};

/// 2×2 unitary on an ordered `(lower, upper)` pair of levels.
pub type Unitary2 = [[C64; 2]; 2];

/// One frequency component of a drive, resonant (up to `detuning_offset`)
/// with the `lower ↔ upper` transition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tone {
    pub lower: LevelId,
    pub upper: LevelId,
    /// rad/s, added to the pulse detuning
    pub detuning_offset: f64,
    /// rad, added to the pulse phase
    pub phase: f64,
}

impl Tone {
    pub fn resonant(lower: LevelId, upper: LevelId) -> Self {
        Tone { lower, upper, detuning_offset: 0.0, phase: 0.0 }
    }
}

/// A square coherent drive. Every tone shares the Rabi frequency, the common
/// laser detuning and phase, and the duration; the tones address disjoint
/// level pairs and are applied as independent two-level rotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub tones: Vec<Tone>,
    /// angular Rabi frequency Ω, rad/s
    pub rabi: f64,
    /// common detuning Δ, rad/s
    pub detuning: f64,
    /// common phase φ, rad
    pub phase: f64,
    /// s
    pub duration: f64,
}

impl PulseSpec {
    pub fn single(lower: LevelId, upper: LevelId, rabi: f64, detuning: f64, phase: f64, duration: f64) -> Self {
        PulseSpec { tones: vec![Tone::resonant(lower, upper)], rabi, detuning, phase, duration }
    }

    /// Resonant π pulse of the given duration carrying one tone per path.
    pub fn dual_tone_pi(paths: [(LevelId, LevelId); 2], duration: f64) -> Self {
        PulseSpec {
            tones: paths.iter().map(|&(lo, hi)| Tone::resonant(lo, hi)).collect(),
            rabi: std::f64::consts::PI / duration,
            detuning: 0.0,
            phase: 0.0,
            duration,
        }
    }

    /// Pulse area Ωt, rad.
    pub fn area(&self) -> f64 {
        self.rabi * self.duration
    }

    pub fn is_pi_pulse(&self) -> bool {
        (self.area() - std::f64::consts::PI).abs() <= 1e-9 * std::f64::consts::PI
    }

    pub fn validate(&self) -> Result<()> {
        if self.tones.is_empty() {
            return Err(Error::domain("pulse has no tones"));
        }
        if !(self.duration >= 0.0) || !self.duration.is_finite() {
            return Err(Error::domain(format!("pulse duration {} must be finite and >= 0", self.duration)));
        }
        if !(self.rabi >= 0.0) || !self.rabi.is_finite() {
            return Err(Error::domain(format!("Rabi frequency {} must be finite and >= 0", self.rabi)));
        }
        for (i, t) in self.tones.iter().enumerate() {
            if t.lower == t.upper {
                return Err(Error::domain("tone couples a level to itself"));
            }
            for other in &self.tones[..i] {
                let shared = [other.lower, other.upper].iter().any(|l| *l == t.lower || *l == t.upper);
                if shared {
                    return Err(Error::domain("tones of one pulse must address disjoint level pairs"));
                }
            }
        }
        Ok(())
    }

    /// Same pulse with a phase shift applied to every tone.
    pub fn with_phase(&self, phase: f64) -> Self {
        PulseSpec { phase, ..self.clone() }
    }
}

/// `exp(−iHt)` with `H = (Δ/2)σz + (Ω/2)(cos φ σx + sin φ σy)` on `(lower, upper)`.
pub fn rotation(rabi: f64, detuning: f64, phase: f64, duration: f64) -> Unitary2 {
    let w = (rabi * rabi + detuning * detuning).sqrt();
    if w == 0.0 || duration == 0.0 {
        return [[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]];
    }
    let half = 0.5 * w * duration;
    let (s, c) = half.sin_cos();
    let nz = detuning / w;
    let nr = rabi / w;
    let minus_i_s = C64::new(0.0, -s);
    let e_minus = C64::from_polar(nr, -phase);
    let e_plus = C64::from_polar(nr, phase);
    [[C64::new(c, 0.0) + minus_i_s * nz, minus_i_s * e_minus], [minus_i_s * e_plus, C64::new(c, 0.0) - minus_i_s * nz]]
}

/// `ρ → UρU†` with `U` acting on the levels at indices `a`, `b`.
pub(crate) fn conjugate_in_place(rho: &mut DensityMatrix, a: usize, b: usize, u: &Unitary2) {
    let m = rho.matrix_mut();
    let n = m.nrows();
    for j in 0..n {
        let (x, y) = (m[(a, j)], m[(b, j)]);
        m[(a, j)] = u[0][0] * x + u[0][1] * y;
        m[(b, j)] = u[1][0] * x + u[1][1] * y;
    }
    let ud = [[u[0][0].conj(), u[1][0].conj()], [u[0][1].conj(), u[1][1].conj()]];
    for i in 0..n {
        let (x, y) = (m[(i, a)], m[(i, b)]);
        m[(i, a)] = x * ud[0][0] + y * ud[1][0];
        m[(i, b)] = x * ud[0][1] + y * ud[1][1];
    }
}

pub fn apply_rabi(state: &DensityMatrix, pulse: &PulseSpec) -> Result<DensityMatrix> {
    pulse.validate()?;
    let indices: Vec<(usize, usize)> = pulse
        .tones
        .iter()
        .map(|t| Ok((state.require_index(t.lower)?, state.require_index(t.upper)?)))
        .collect::<Result<_>>()?;
    let mut out = state.clone();
    for (tone, (a, b)) in pulse.tones.iter().zip(indices) {
        let u = rotation(pulse.rabi, pulse.detuning + tone.detuning_offset, pulse.phase + tone.phase, pulse.duration);
        conjugate_in_place(&mut out, a, b, &u);
    }
    Ok(out)
}
