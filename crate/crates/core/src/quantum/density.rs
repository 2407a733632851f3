use nalgebra::DMatrix;

use super::C64;
use crate::atom::LevelId;
use crate::{Error, Result};

/// Maximum elementwise |ρ − ρ†|.
pub const HERMITICITY_TOLERANCE: f64 = 1e-12;
/// Maximum |tr ρ − 1|, also the floor on the smallest eigenvalue.
pub const TRACE_TOLERANCE: f64 = 1e-10;

/// Hermitian, unit-trace, positive semidefinite matrix over an ordered set of levels.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    basis: Vec<LevelId>,
    data: DMatrix<C64>,
}

pub fn s_qubit_basis() -> Vec<LevelId> {
    vec![LevelId::ZERO, LevelId::ONE]
}

pub fn f_qubit_basis() -> Vec<LevelId> {
    vec![LevelId::ZERO_PRIME, LevelId::ONE_PRIME]
}

fn check_basis(basis: &[LevelId]) -> Result<()> {
    if basis.is_empty() {
        return Err(Error::domain("empty basis"));
    }
    for (i, a) in basis.iter().enumerate() {
        if basis[..i].contains(a) {
            return Err(Error::domain(format!("duplicate level {a:?} in basis")));
        }
    }
    Ok(())
}

impl DensityMatrix {
    /// Validated construction from raw matrix data.
    pub fn from_matrix(basis: Vec<LevelId>, data: DMatrix<C64>) -> Result<Self> {
        check_basis(&basis)?;
        if data.nrows() != basis.len() || data.ncols() != basis.len() {
            return Err(Error::domain(format!(
                "matrix is {}x{} but basis has {} levels",
                data.nrows(),
                data.ncols(),
                basis.len()
            )));
        }
        let rho = DensityMatrix { basis, data };
        rho.validate()?;
        Ok(rho)
    }

    /// `|ψ⟩⟨ψ|` for a normalized amplitude vector.
    pub fn pure(basis: Vec<LevelId>, amplitudes: &[C64]) -> Result<Self> {
        check_basis(&basis)?;
        if amplitudes.len() != basis.len() {
            return Err(Error::domain("amplitude vector length does not match basis"));
        }
        check_normalized(amplitudes)?;
        let n = basis.len();
        let data = DMatrix::from_fn(n, n, |i, j| amplitudes[i] * amplitudes[j].conj());
        Ok(DensityMatrix { basis, data })
    }

    pub fn from_level(basis: Vec<LevelId>, level: LevelId) -> Result<Self> {
        let idx =
            basis.iter().position(|l| *l == level).ok_or_else(|| Error::domain(format!("{level:?} not in basis")))?;
        let mut amps = vec![C64::new(0.0, 0.0); basis.len()];
        amps[idx] = C64::new(1.0, 0.0);
        Self::pure(basis, &amps)
    }

    pub fn maximally_mixed(basis: Vec<LevelId>) -> Result<Self> {
        check_basis(&basis)?;
        let n = basis.len();
        let data = DMatrix::identity(n, n) * C64::new(1.0 / n as f64, 0.0);
        Ok(DensityMatrix { basis, data })
    }

    /// Place a state on `basis`, which must contain every level of `self`.
    pub fn embed(&self, basis: Vec<LevelId>) -> Result<Self> {
        check_basis(&basis)?;
        let map: Vec<usize> = self
            .basis
            .iter()
            .map(|l| {
                basis
                    .iter()
                    .position(|b| b == l)
                    .ok_or_else(|| Error::domain(format!("{l:?} missing from target basis")))
            })
            .collect::<Result<_>>()?;
        let n = basis.len();
        let mut data = DMatrix::zeros(n, n);
        for (i, &bi) in map.iter().enumerate() {
            for (j, &bj) in map.iter().enumerate() {
                data[(bi, bj)] = self.data[(i, j)];
            }
        }
        Ok(DensityMatrix { basis, data })
    }

    /// The block of ρ on `levels` (not renormalized).
    pub fn block(&self, levels: &[LevelId]) -> Result<DMatrix<C64>> {
        let idx: Vec<usize> = levels.iter().map(|l| self.require_index(*l)).collect::<Result<_>>()?;
        let n = idx.len();
        Ok(DMatrix::from_fn(n, n, |i, j| self.data[(idx[i], idx[j])]))
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[LevelId] {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub(crate) fn matrix_mut(&mut self) -> &mut DMatrix<C64> {
        &mut self.data
    }

    pub(crate) fn with_matrix(&self, data: DMatrix<C64>) -> Self {
        DensityMatrix { basis: self.basis.clone(), data }
    }

    pub fn index_of(&self, level: LevelId) -> Option<usize> {
        self.basis.iter().position(|l| *l == level)
    }

    pub(crate) fn require_index(&self, level: LevelId) -> Result<usize> {
        self.index_of(level).ok_or_else(|| Error::domain(format!("{level:?} is not in the state's basis")))
    }

    pub fn population(&self, level: LevelId) -> Result<f64> {
        Ok(self.data[(self.require_index(level)?, self.require_index(level)?)].re)
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.data[(i, i)].re).collect()
    }

    pub fn trace(&self) -> f64 {
        self.populations().iter().sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.data + self.data.adjoint()) * C64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.data[(i, j)] - self.data[(j, i)].conj()).norm());
            }
        }
        if worst > HERMITICITY_TOLERANCE {
            return Err(Error::InvalidState(format!("not Hermitian (max deviation {worst:e})")));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > TRACE_TOLERANCE {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = self.min_eigenvalue();
        if min < -TRACE_TOLERANCE {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }
}

fn check_normalized(amplitudes: &[C64]) -> Result<()> {
    let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
    if (norm - 1.0).abs() > TRACE_TOLERANCE {
        return Err(Error::domain(format!("target state has squared norm {norm}, expected 1")));
    }
    Ok(())
}

/// `⟨ψ|ρ|ψ⟩` for a normalized pure target.
pub fn fidelity(state: &DensityMatrix, target: &[C64]) -> Result<f64> {
    if target.len() != state.dim() {
        return Err(Error::domain(format!(
            "target has {} amplitudes, state dimension is {}",
            target.len(),
            state.dim()
        )));
    }
    check_normalized(target)?;
    let rho = state.matrix();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..target.len() {
        for j in 0..target.len() {
            acc += target[i].conj() * rho[(i, j)] * target[j];
        }
    }
    Ok(acc.re.clamp(0.0, 1.0))
}
