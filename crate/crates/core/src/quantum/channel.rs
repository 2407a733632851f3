use nalgebra::DMatrix;

use super::{DensityMatrix, C64};
use crate::{Error, Result};

/// Allowed deviation of `Σ K†K` from the identity.
pub const KRAUS_TOLERANCE: f64 = 1e-10;

/// A completely positive trace-preserving map in Kraus form.
#[derive(Debug, Clone, PartialEq)]
pub enum Channel {
    /// Qubit phase flip with probability `p`: coherences scale by `1 − 2p`.
    Dephasing(f64),
    /// Qubit depolarizing `ρ → (1 − p)ρ + p·I/2`.
    Depolarizing(f64),
    /// Incoherent transfer of a fraction `p` of the population of level index
    /// `from` into level index `to`.
    PopulationTransfer {
        from: usize,
        to: usize,
        p: f64,
    },
    Kraus(Vec<DMatrix<C64>>),
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("channel probability {p} outside [0, 1]")));
    }
    Ok(())
}

fn pauli(which: char) -> DMatrix<C64> {
    let (o, i) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
    let v = match which {
        'x' => [o, i, i, o],
        'y' => [o, C64::new(0.0, -1.0), C64::new(0.0, 1.0), o],
        'z' => [i, o, o, -i],
        _ => [i, o, o, i],
    };
    DMatrix::from_row_slice(2, 2, &v)
}

fn scaled(m: DMatrix<C64>, s: f64) -> DMatrix<C64> {
    m * C64::new(s, 0.0)
}

impl Channel {
    pub fn identity() -> Self {
        Channel::Dephasing(0.0)
    }

    /// Kraus operators of this channel acting on a `dim`-level state.
    pub fn kraus_operators(&self, dim: usize) -> Result<Vec<DMatrix<C64>>> {
        let qubit_only = |name: &str| -> Result<()> {
            if dim != 2 {
                return Err(Error::domain(format!("{name} channel acts on qubits, state dimension is {dim}")));
            }
            Ok(())
        };
        let ops = match *self {
            Channel::Dephasing(p) => {
                qubit_only("dephasing")?;
                check_probability(p)?;
                vec![scaled(pauli('i'), (1.0 - p).sqrt()), scaled(pauli('z'), p.sqrt())]
            }
            Channel::Depolarizing(p) => {
                qubit_only("depolarizing")?;
                check_probability(p)?;
                let q = (p / 4.0).sqrt();
                vec![
                    scaled(pauli('i'), (1.0 - 3.0 * p / 4.0).sqrt()),
                    scaled(pauli('x'), q),
                    scaled(pauli('y'), q),
                    scaled(pauli('z'), q),
                ]
            }
            Channel::PopulationTransfer { from, to, p } => {
                check_probability(p)?;
                if from >= dim || to >= dim || from == to {
                    return Err(Error::domain(format!(
                        "population transfer {from} -> {to} invalid for dimension {dim}"
                    )));
                }
                let mut keep = DMatrix::<C64>::identity(dim, dim);
                keep[(from, from)] = C64::new((1.0 - p).sqrt(), 0.0);
                let mut jump = DMatrix::<C64>::zeros(dim, dim);
                jump[(to, from)] = C64::new(p.sqrt(), 0.0);
                vec![keep, jump]
            }
            Channel::Kraus(ref ops) => {
                if ops.is_empty() {
                    return Err(Error::domain("empty Kraus set"));
                }
                if ops.iter().any(|k| k.nrows() != dim || k.ncols() != dim) {
                    return Err(Error::domain(format!(
                        "Kraus operator dimension does not match state dimension {dim}"
                    )));
                }
                ops.clone()
            }
        };
        check_completeness(&ops)?;
        Ok(ops)
    }
}

fn check_completeness(ops: &[DMatrix<C64>]) -> Result<()> {
    let dim = ops[0].nrows();
    let mut sum = DMatrix::<C64>::zeros(dim, dim);
    for k in ops {
        sum += k.adjoint() * k;
    }
    let dev = (sum - DMatrix::<C64>::identity(dim, dim)).map(|z| z.norm()).max();
    if dev > KRAUS_TOLERANCE {
        return Err(Error::domain(format!("Kraus set is not trace preserving (deviation {dev:e})")));
    }
    Ok(())
}

/// `ρ → Σ K ρ K†`.
pub fn apply_channel(state: &DensityMatrix, channel: &Channel) -> Result<DensityMatrix> {
    let ops = channel.kraus_operators(state.dim())?;
    let rho = state.matrix();
    let mut out = DMatrix::<C64>::zeros(state.dim(), state.dim());
    for k in &ops {
        out += k * rho * k.adjoint();
    }
    Ok(state.with_matrix(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{fidelity, s_qubit_basis};
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn mub() -> Vec<[C64; 2]> {
        let h = FRAC_1_SQRT_2;
        vec![
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            [C64::new(h, 0.0), C64::new(h, 0.0)],
            [C64::new(h, 0.0), C64::new(-h, 0.0)],
            [C64::new(h, 0.0), C64::new(0.0, h)],
            [C64::new(h, 0.0), C64::new(0.0, -h)],
        ]
    }

    #[test]
    fn zero_dephasing_is_identity() {
        for psi in mub() {
            let rho = DensityMatrix::pure(s_qubit_basis(), &psi).unwrap();
            let out = apply_channel(&rho, &Channel::Dephasing(0.0)).unwrap();
            assert!((out.matrix() - rho.matrix()).map(|z| z.norm()).max() < 1e-15);
        }
    }

    #[test]
    fn depolarizing_fidelity_on_every_mub_state() {
        let p = 0.137;
        for psi in mub() {
            let rho = DensityMatrix::pure(s_qubit_basis(), &psi).unwrap();
            let out = apply_channel(&rho, &Channel::Depolarizing(p)).unwrap();
            assert!((fidelity(&out, &psi).unwrap() - (1.0 - p / 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn dephasing_mub_average() {
        let p = 0.21;
        let per_state: Vec<f64> = mub()
            .iter()
            .map(|psi| {
                let rho = DensityMatrix::pure(s_qubit_basis(), psi).unwrap();
                fidelity(&apply_channel(&rho, &Channel::Dephasing(p)).unwrap(), psi).unwrap()
            })
            .collect();
        let expected = [1.0, 1.0, 1.0 - p, 1.0 - p, 1.0 - p, 1.0 - p];
        for (got, want) in per_state.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12);
        }
        let avg = per_state.iter().sum::<f64>() / 6.0;
        assert!((avg - (1.0 - 2.0 * p / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn incomplete_kraus_set_rejected() {
        let rho = DensityMatrix::maximally_mixed(s_qubit_basis()).unwrap();
        let half = Channel::Kraus(vec![scaled(pauli('i'), 0.5)]);
        assert!(matches!(apply_channel(&rho, &half), Err(Error::Domain(_))));
        assert!(apply_channel(&rho, &Channel::Dephasing(1.5)).is_err());
        let big = DensityMatrix::maximally_mixed(crate::quantum::conversion_basis()).unwrap();
        assert!(apply_channel(&big, &Channel::Depolarizing(0.1)).is_err());
    }

    #[test]
    fn population_transfer_moves_population() {
        let rho = DensityMatrix::from_level(s_qubit_basis(), crate::atom::LevelId::ONE).unwrap();
        let out = apply_channel(&rho, &Channel::PopulationTransfer { from: 1, to: 0, p: 0.3 }).unwrap();
        assert!((out.populations()[0] - 0.3).abs() < 1e-12);
        assert!(out.validate().is_ok());
    }

    fn random_unitary(a: f64, b: f64, c: f64, d: f64) -> DMatrix<C64> {
        // e^{ia} [[e^{ib} cos c, e^{id} sin c], [-e^{-id} sin c, e^{-ib} cos c]]
        let g = C64::from_polar(1.0, a);
        DMatrix::from_row_slice(
            2,
            2,
            &[
                g * C64::from_polar(c.cos(), b),
                g * C64::from_polar(c.sin(), d),
                -g * C64::from_polar(c.sin(), -d),
                g * C64::from_polar(c.cos(), -b),
            ],
        )
    }

    proptest! {
        #[test]
        fn valid_kraus_sets_preserve_invariants(
            w in 0.0f64..1.0,
            angles in proptest::collection::vec(-3.0f64..3.0, 8),
            psi_re in -1.0f64..1.0, psi_im in -1.0f64..1.0,
        ) {
            let u1 = random_unitary(angles[0], angles[1], angles[2], angles[3]);
            let u2 = random_unitary(angles[4], angles[5], angles[6], angles[7]);
            let ch = Channel::Kraus(vec![scaled(u1, w.sqrt()), scaled(u2, (1.0 - w).sqrt())]);
            let norm = (1.0 + psi_re * psi_re + psi_im * psi_im).sqrt();
            let psi = [C64::new(1.0 / norm, 0.0), C64::new(psi_re / norm, psi_im / norm)];
            let rho = DensityMatrix::pure(s_qubit_basis(), &psi).unwrap();
            let out = apply_channel(&rho, &ch).unwrap();
            prop_assert!(out.validate().is_ok());
        }
    }
}
