//! Static atomic data for ¹⁷¹Yb⁺.
//!
//! Only hyperfine splittings are modeled; absolute optical frequencies and
//! isotope shifts never enter any observable the simulator produces. All
//! frequencies are in Hz and all wavelengths in nm.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Reduced Planck constant, J·s (CODATA 2018, exact).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K (CODATA 2018, exact).
pub const K_B: f64 = 1.380_649e-23;
/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

const S12_SPLITTING_HZ: f64 = 12_642_800_000.0;
const F72_SPLITTING_HZ: f64 = 3_620_500_000.0;
const P12_SPLITTING_HZ: f64 = 2_100_000_000.0;
/// Inverted D₅/₂ splitting between the two effective legs (F=2 above F=3).
/// Fixed so that the 411 nm dual-tone drive sits at 6.42 GHz.
const D52_LEG_SPLITTING_HZ: f64 = 197_200_000.0;

/// Fine-structure manifolds that appear in the level scheme.
///
/// `Bracket12` and `Bracket32` are the ³D[3/2]₁/₂ and ³D[3/2]₃/₂ levels
/// reached by the 935 nm and 976 nm repumpers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Manifold {
    S12,
    P12,
    D32,
    D52,
    F72,
    Bracket12,
    Bracket32,
}

/// A hyperfine sublevel `|manifold, F, mF⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LevelId {
    pub manifold: Manifold,
    pub f: u8,
    pub mf: i8,
}

impl LevelId {
    /// S-qubit `|0⟩ = |S₁/₂, F=0, mF=0⟩`.
    pub const ZERO: LevelId = LevelId::raw(Manifold::S12, 0, 0);
    /// S-qubit `|1⟩ = |S₁/₂, F=1, mF=0⟩`.
    pub const ONE: LevelId = LevelId::raw(Manifold::S12, 1, 0);
    /// F-qubit `|0′⟩ = |F₇/₂, F=3, mF=0⟩`.
    pub const ZERO_PRIME: LevelId = LevelId::raw(Manifold::F72, 3, 0);
    /// F-qubit `|1′⟩ = |F₇/₂, F=4, mF=0⟩`.
    pub const ONE_PRIME: LevelId = LevelId::raw(Manifold::F72, 4, 0);
    /// D₅/₂ leg on the `|0⟩ ↔ |0′⟩` transfer path.
    pub const D_LEG_ZERO: LevelId = LevelId::raw(Manifold::D52, 2, 0);
    /// D₅/₂ leg on the `|1⟩ ↔ |1′⟩` transfer path.
    pub const D_LEG_ONE: LevelId = LevelId::raw(Manifold::D52, 3, 0);

    const fn raw(manifold: Manifold, f: u8, mf: i8) -> Self {
        LevelId { manifold, f, mf }
    }

    pub fn new(manifold: Manifold, f: u8, mf: i8) -> Result<Self> {
        let level = LevelId::raw(manifold, f, mf);
        if level.is_allowed() {
            Ok(level)
        } else {
            Err(Error::domain(format!("level {manifold:?} F={f} mF={mf} is not part of the modeled level scheme")))
        }
    }

    pub fn is_allowed(&self) -> bool {
        let f_ok = match self.manifold {
            Manifold::S12 | Manifold::P12 => self.f <= 1,
            Manifold::F72 => self.f == 3 || self.f == 4,
            Manifold::D52 => self.f == 2 || self.f == 3,
            Manifold::D32 | Manifold::Bracket32 => self.f == 1,
            Manifold::Bracket12 => self.f == 0,
        };
        // mF = ±1 only occurs for the F₇/₂ F=4 Zeeman levels used by S-qubit shelving.
        let mf_ok = match (self.manifold, self.f) {
            (Manifold::F72, 4) => (-1..=1).contains(&self.mf),
            _ => self.mf == 0,
        };
        f_ok && mf_ok
    }

    /// Hyperfine energy offset within the manifold, Hz.
    fn offset_hz(&self) -> f64 {
        match (self.manifold, self.f) {
            (Manifold::S12, 1) => S12_SPLITTING_HZ,
            (Manifold::P12, 1) => P12_SPLITTING_HZ,
            (Manifold::F72, 4) => F72_SPLITTING_HZ,
            (Manifold::D52, 2) => D52_LEG_SPLITTING_HZ,
            _ => 0.0,
        }
    }
}

/// Hyperfine splitting of a manifold, Hz.
pub fn hyperfine_splitting(manifold: Manifold) -> Result<f64> {
    match manifold {
        Manifold::S12 => Ok(S12_SPLITTING_HZ),
        Manifold::F72 => Ok(F72_SPLITTING_HZ),
        Manifold::P12 => Ok(P12_SPLITTING_HZ),
        other => Err(Error::domain(format!("no stored hyperfine splitting for {other:?}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Laser {
    Uv370,
    Repump935,
    Shelve411,
    Bridge3432,
    Repump976,
    Microwave12G,
    Microwave3G,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransitionKind {
    Dipole,
    Quadrupole,
    OctupoleBridge,
    Microwave,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub laser: Laser,
    pub lower: LevelId,
    pub upper: LevelId,
    pub wavelength_nm: f64,
    pub kind: TransitionKind,
}

impl Transition {
    fn connects(&self, a: Manifold, b: Manifold) -> bool {
        let (lo, hi) = (self.lower.manifold, self.upper.manifold);
        (lo == a && hi == b) || (lo == b && hi == a)
    }
}

/// The transitions driven in the experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionTable {
    pub entries: Vec<Transition>,
}

fn microwave_wavelength_nm(frequency_hz: f64) -> f64 {
    SPEED_OF_LIGHT / frequency_hz * 1e9
}

impl Default for TransitionTable {
    fn default() -> Self {
        use Manifold::*;
        use TransitionKind::*;
        let l = LevelId::raw;
        let entries = vec![
            Transition {
                laser: Laser::Uv370,
                lower: l(S12, 1, 0),
                upper: l(P12, 0, 0),
                wavelength_nm: 369.5,
                kind: Dipole,
            },
            Transition {
                laser: Laser::Repump935,
                lower: l(D32, 1, 0),
                upper: l(Bracket12, 0, 0),
                wavelength_nm: 935.2,
                kind: Dipole,
            },
            Transition {
                laser: Laser::Shelve411,
                lower: LevelId::ZERO,
                upper: LevelId::D_LEG_ZERO,
                wavelength_nm: 411.0,
                kind: Quadrupole,
            },
            Transition {
                laser: Laser::Bridge3432,
                lower: LevelId::ZERO_PRIME,
                upper: LevelId::D_LEG_ZERO,
                wavelength_nm: 3432.0,
                kind: OctupoleBridge,
            },
            Transition {
                laser: Laser::Repump976,
                lower: LevelId::D_LEG_ZERO,
                upper: l(Bracket32, 1, 0),
                wavelength_nm: 976.0,
                kind: Dipole,
            },
            Transition {
                laser: Laser::Microwave12G,
                lower: LevelId::ZERO,
                upper: LevelId::ONE,
                wavelength_nm: microwave_wavelength_nm(S12_SPLITTING_HZ),
                kind: Microwave,
            },
            Transition {
                laser: Laser::Microwave3G,
                lower: LevelId::ZERO_PRIME,
                upper: LevelId::ONE_PRIME,
                wavelength_nm: microwave_wavelength_nm(F72_SPLITTING_HZ),
                kind: Microwave,
            },
        ];
        TransitionTable { entries }
    }
}

impl TransitionTable {
    pub fn get(&self, laser: Laser) -> Option<&Transition> {
        self.entries.iter().find(|t| t.laser == laser)
    }

    /// The transition whose manifolds are bridged by a pair of levels.
    pub fn find(&self, a: LevelId, b: LevelId) -> Option<&Transition> {
        self.entries.iter().find(|t| t.lower.manifold != t.upper.manifold && t.connects(a.manifold, b.manifold))
    }
}

/// EOM drive frequency for a dual-tone pulse: half the frequency difference
/// between two transfer paths driven by the same laser.
pub fn dual_tone_sideband(path_a: (LevelId, LevelId), path_b: (LevelId, LevelId)) -> Result<f64> {
    let table = TransitionTable::default();
    let laser_of = |(x, y): (LevelId, LevelId)| -> Result<&Transition> {
        for level in [x, y] {
            if !level.is_allowed() {
                return Err(Error::domain(format!("{level:?} is not a modeled level")));
            }
        }
        table.find(x, y).ok_or_else(|| Error::domain(format!("no laser bridges {:?} and {:?}", x.manifold, y.manifold)))
    };
    let ta = laser_of(path_a)?;
    let tb = laser_of(path_b)?;
    if ta.laser != tb.laser {
        return Err(Error::domain(format!("paths belong to different lasers ({:?} vs {:?})", ta.laser, tb.laser)));
    }
    if !matches!(ta.laser, Laser::Shelve411 | Laser::Bridge3432) {
        return Err(Error::domain(format!("{:?} is not a dual-tone transfer laser", ta.laser)));
    }
    let upper_manifold = ta.upper.manifold;
    let path_frequency = |(x, y): (LevelId, LevelId)| {
        let (lo, hi) = if x.manifold == upper_manifold { (y, x) } else { (x, y) };
        hi.offset_hz() - lo.offset_hz()
    };
    Ok((path_frequency(path_a) - path_frequency(path_b)).abs() / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    const S411_A: (LevelId, LevelId) = (LevelId::ZERO, LevelId::D_LEG_ZERO);
    const S411_B: (LevelId, LevelId) = (LevelId::ONE, LevelId::D_LEG_ONE);
    const F3432_A: (LevelId, LevelId) = (LevelId::D_LEG_ZERO, LevelId::ZERO_PRIME);
    const F3432_B: (LevelId, LevelId) = (LevelId::D_LEG_ONE, LevelId::ONE_PRIME);

    #[test]
    fn stored_splittings() {
        assert_eq!(hyperfine_splitting(Manifold::S12).unwrap(), 12.6428e9);
        assert_eq!(hyperfine_splitting(Manifold::F72).unwrap(), 3.6205e9);
        assert_eq!(hyperfine_splitting(Manifold::P12).unwrap(), 2.1e9);
        assert!(matches!(hyperfine_splitting(Manifold::D32), Err(Error::Domain(_))));
    }

    #[test]
    fn cooling_sideband_is_sum_of_s_and_p_splittings() {
        let s = hyperfine_splitting(Manifold::S12).unwrap();
        let p = hyperfine_splitting(Manifold::P12).unwrap();
        assert!(((s + p) - 14.7e9).abs() < 0.05e9);
    }

    #[test]
    fn dual_tone_drive_frequencies() {
        let f411 = dual_tone_sideband(S411_A, S411_B).unwrap();
        assert!((f411 - 6.42e9).abs() < 0.005e9, "{f411}");
        let f3432 = dual_tone_sideband(F3432_A, F3432_B).unwrap();
        assert!((f3432 - 1.91e9).abs() < 0.005e9, "{f3432}");
        assert_eq!(dual_tone_sideband(S411_A, S411_A).unwrap(), 0.0);
    }

    #[test]
    fn dual_tone_is_symmetric() {
        assert_eq!(dual_tone_sideband(S411_A, S411_B).unwrap(), dual_tone_sideband(S411_B, S411_A).unwrap());
        // level order inside a path does not matter either
        let flipped = (LevelId::D_LEG_ONE, LevelId::ONE);
        assert_eq!(dual_tone_sideband(S411_A, flipped).unwrap(), dual_tone_sideband(S411_A, S411_B).unwrap());
    }

    #[test]
    fn mixed_lasers_rejected() {
        assert!(matches!(dual_tone_sideband(S411_A, F3432_B), Err(Error::Domain(_))));
        let uv = (LevelId::ONE, LevelId::new(Manifold::P12, 0, 0).unwrap());
        assert!(matches!(dual_tone_sideband(uv, uv), Err(Error::Domain(_))));
    }

    #[test]
    fn level_validation() {
        assert!(LevelId::new(Manifold::F72, 4, 1).is_ok());
        assert!(LevelId::new(Manifold::F72, 3, 1).is_err());
        assert!(LevelId::new(Manifold::S12, 2, 0).is_err());
        assert!(LevelId::new(Manifold::D52, 2, 0).is_ok());
        for l in [LevelId::ZERO, LevelId::ONE, LevelId::ZERO_PRIME, LevelId::ONE_PRIME] {
            assert!(l.is_allowed());
        }
    }

    #[test]
    fn transition_table_is_closed() {
        let table = TransitionTable::default();
        assert_eq!(table.entries.len(), 7);
        for t in &table.entries {
            assert!(t.lower.is_allowed() && t.upper.is_allowed(), "{t:?}");
        }
        let mw = table.get(Laser::Microwave12G).unwrap();
        assert!((SPEED_OF_LIGHT / (mw.wavelength_nm * 1e-9) - 12.6428e9).abs() < 1.0);
        assert_eq!(table.get(Laser::Bridge3432).unwrap().wavelength_nm, 3432.0);
    }
}
