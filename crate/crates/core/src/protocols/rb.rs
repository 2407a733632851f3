use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{CurveRecord, ExperimentKind, ExperimentPlan, Spam, Tally};
use crate::quantum::{apply_channel, f_qubit_basis, s_qubit_basis, Channel, DensityMatrix, Unitary2, C64};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RbQubit {
    S,
    F,
}

impl RbQubit {
    fn kind(self) -> ExperimentKind {
        match self {
            RbQubit::S => ExperimentKind::RbSQubit,
            RbQubit::F => ExperimentKind::RbFQubit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RbSettings {
    /// random sequences per length; shots are split evenly across them
    pub sequences: u64,
    pub spam: Spam,
}

impl Default for RbSettings {
    fn default() -> Self {
        RbSettings { sequences: 20, spam: Spam::symmetric(0.005) }
    }
}

type Mat = [[C64; 2]; 2];

fn mul(a: &Mat, b: &Mat) -> Mat {
    let mut out = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Removes the global phase: the first entry of sufficient magnitude becomes
/// real and positive.
fn canonical(m: &Mat) -> Mat {
    let pivot = [m[0][0], m[0][1], m[1][0], m[1][1]].into_iter().find(|z| z.norm() > 1e-6).expect("unitary");
    let ph = (pivot / pivot.norm()).conj();
    [[m[0][0] * ph, m[0][1] * ph], [m[1][0] * ph, m[1][1] * ph]]
}

fn same(a: &Mat, b: &Mat) -> bool {
    let (a, b) = (canonical(a), canonical(b));
    (0..2).all(|i| (0..2).all(|j| (a[i][j] - b[i][j]).norm() < 1e-9))
}

/// The 24 single-qubit Cliffords modulo global phase, generated from `H`
/// and `S` by breadth-first closure. Element 0 is the identity.
pub fn clifford_group() -> &'static [Unitary2] {
    static GROUP: OnceLock<Vec<Unitary2>> = OnceLock::new();
    GROUP.get_or_init(|| {
        let (o, i) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let gens: [Mat; 2] = [[[h, h], [h, -h]], [[i, o], [o, C64::new(0.0, 1.0)]]];
        let mut group: Vec<Mat> = vec![[[i, o], [o, i]]];
        let mut frontier = 0;
        while frontier < group.len() {
            let g = group[frontier];
            for s in &gens {
                let next = canonical(&mul(s, &g));
                if !group.iter().any(|e| same(e, &next)) {
                    group.push(next);
                }
            }
            frontier += 1;
        }
        group
    })
}

fn adjoint(m: &Mat) -> Mat {
    [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]]
}

fn conjugate(rho: &DensityMatrix, u: &Mat) -> DensityMatrix {
    let mut out = rho.clone();
    crate::quantum::conjugate_in_place(&mut out, 0, 1, u);
    out
}

/// Survival of `|0⟩` after `m` random Cliffords and the inverting Clifford,
/// with `gate_error` after every gate.
fn sequence_survival<R: Rng + ?Sized>(m: u64, start: &DensityMatrix, gate_error: &Channel, rng: &mut R) -> Result<f64> {
    let group = clifford_group();
    let mut net: Mat = group[0];
    let mut rho = start.clone();
    for _ in 0..m {
        let g = &group[rng.random_range(0..group.len())];
        rho = apply_channel(&conjugate(&rho, g), gate_error)?;
        net = mul(g, &net);
    }
    let inverse = adjoint(&net);
    rho = apply_channel(&conjugate(&rho, &inverse), gate_error)?;
    Ok(rho.matrix()[(0, 0)].re.clamp(0.0, 1.0))
}

/// Randomized benchmarking: for each sequence length `m`, `sequences`
/// random Clifford sequences closed by their inverse, with `gate_error`
/// applied after every gate. Records the mean survival probability.
pub fn run_rb(
    plan: &ExperimentPlan,
    qubit: RbQubit,
    gate_error: &Channel,
    settings: &RbSettings,
) -> Result<Vec<CurveRecord>> {
    plan.require(&[qubit.kind()])?;
    settings.spam.validate()?;
    if settings.sequences < 1 {
        return Err(Error::domain("sequences must be >= 1"));
    }
    gate_error.kraus_operators(2)?;
    let basis = match qubit {
        RbQubit::S => s_qubit_basis(),
        RbQubit::F => f_qubit_basis(),
    };
    let zero = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    let start = settings.spam.prepare(basis, &zero)?;
    let per_sequence = (plan.shots / settings.sequences).max(1);
    let mut out = Vec::with_capacity(plan.sweep.len());
    for (i, &x) in plan.sweep.iter().enumerate() {
        let mut rng = plan.point_rng(i);
        let mut total = Tally::default();
        for _ in 0..settings.sequences {
            let f = sequence_survival(x as u64, &start, gate_error, &mut rng)?;
            let t = Tally::draw(settings.spam.success_probability(f), per_sequence, &mut rng)?;
            total.hits += t.hits;
            total.trials += t.trials;
        }
        out.push(total.record_at(x));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{fit_rb, DataPoint};

    #[test]
    fn group_has_24_distinct_closed_elements() {
        let g = clifford_group();
        assert_eq!(g.len(), 24);
        for a in g {
            for b in g {
                let ab = mul(a, b);
                assert!(g.iter().any(|e| same(e, &ab)));
            }
            assert!(g.iter().any(|e| same(e, &adjoint(a))));
        }
    }

    #[test]
    fn noiseless_sequences_return_to_zero() {
        let plan = ExperimentPlan::new(ExperimentKind::RbSQubit, vec![1.0, 37.0, 500.0], 200, 1).unwrap();
        let settings = RbSettings { spam: Spam::ideal(), ..Default::default() };
        for r in run_rb(&plan, RbQubit::S, &Channel::identity(), &settings).unwrap() {
            assert_eq!(r.mean, 1.0);
        }
    }

    #[test]
    fn depolarizing_gate_error_is_recovered() {
        for (qubit, kind, r) in
            [(RbQubit::S, ExperimentKind::RbSQubit, 2e-4), (RbQubit::F, ExperimentKind::RbFQubit, 1e-4)]
        {
            let plan = ExperimentPlan::with_defaults(kind, 10_000, 5).unwrap();
            let curve = run_rb(&plan, qubit, &Channel::Depolarizing(2.0 * r), &RbSettings::default()).unwrap();
            let pts: Vec<DataPoint> = curve.iter().map(|c| DataPoint::new(c.sweep_value, c.mean, c.stderr)).collect();
            let fit = fit_rb(&pts).unwrap();
            let (f, se) = (fit.get("avg_gate_fidelity").unwrap(), fit.stderr("avg_gate_fidelity").unwrap());
            assert!((f - (1.0 - r)).abs() < 3.0 * se, "{qubit:?}: {f} ± {se}");
        }
    }
}
