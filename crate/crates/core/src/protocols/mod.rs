//! Experiment sequences producing fidelity, survival and temperature curves.
//!
//! Shots that carry their own random noise draw from per-shot streams
//! ([`crate::rng::shot_rng`]). Shots whose outcome probability is fixed
//! within a sweep point are drawn as one binomial per MUB state or sequence
//! from the point stream, which is statistically identical and much cheaper.

mod conversion;
mod cooling;
mod crosstalk;
mod rb;
mod thermometry;

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

pub use conversion::{run_conversion_cycle, ConversionRun, ConversionSettings};
pub use cooling::{run_global_cooling, run_sympathetic_cooling, CoolingRun, CoolingSettings, TemperaturePoint};
pub use crosstalk::{run_pump_detect_crosstalk, run_raman_crosstalk, CrosstalkRun, PumpDetectSettings, RamanSettings};
pub use rb::{clifford_group, run_rb, RbQubit, RbSettings};
pub use thermometry::{run_thermometry, thermometry_times, ThermometrySettings};

use crate::quantum::{apply_channel, fidelity, Channel, DensityMatrix, C64};
use crate::rng::{experiment_id, point_rng, shot_rng};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    ConversionCycle,
    RamanCrosstalk,
    #[serde(rename = "pump_detect_crosstalk_0")]
    PumpDetectCrosstalk0,
    #[serde(rename = "pump_detect_crosstalk_1")]
    PumpDetectCrosstalk1,
    SympatheticCooling,
    GlobalCooling,
    RbSQubit,
    RbFQubit,
    Thermometry,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        ExperimentKind::ConversionCycle,
        ExperimentKind::RamanCrosstalk,
        ExperimentKind::PumpDetectCrosstalk0,
        ExperimentKind::PumpDetectCrosstalk1,
        ExperimentKind::SympatheticCooling,
        ExperimentKind::GlobalCooling,
        ExperimentKind::RbSQubit,
        ExperimentKind::RbFQubit,
        ExperimentKind::Thermometry,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::ConversionCycle => "conversion_cycle",
            ExperimentKind::RamanCrosstalk => "raman_crosstalk",
            ExperimentKind::PumpDetectCrosstalk0 => "pump_detect_crosstalk_0",
            ExperimentKind::PumpDetectCrosstalk1 => "pump_detect_crosstalk_1",
            ExperimentKind::SympatheticCooling => "sympathetic_cooling",
            ExperimentKind::GlobalCooling => "global_cooling",
            ExperimentKind::RbSQubit => "rb_s_qubit",
            ExperimentKind::RbFQubit => "rb_f_qubit",
            ExperimentKind::Thermometry => "thermometry",
        }
    }

    /// Name of the swept variable, used as the first CSV column header.
    pub fn sweep_label(self) -> &'static str {
        match self {
            ExperimentKind::ConversionCycle => "n_round_trips",
            ExperimentKind::RamanCrosstalk => "n_pi2_pulses",
            ExperimentKind::PumpDetectCrosstalk0 | ExperimentKind::PumpDetectCrosstalk1 => "n_cycles",
            ExperimentKind::SympatheticCooling | ExperimentKind::GlobalCooling => "cooling_time_s",
            ExperimentKind::RbSQubit | ExperimentKind::RbFQubit => "sequence_length",
            ExperimentKind::Thermometry => "time_s",
        }
    }

    /// Whether the sweep counts repetitions and must hold whole numbers.
    pub fn integer_sweep(self) -> bool {
        !matches!(
            self,
            ExperimentKind::SympatheticCooling | ExperimentKind::GlobalCooling | ExperimentKind::Thermometry
        )
    }

    /// Default sweep. The thermometry grid depends on the Rabi frequency and
    /// is built by [`thermometry_times`] instead; this returns its default.
    pub fn default_sweep(self) -> Vec<f64> {
        let steps = |step: f64, count: usize| (0..=count).map(|k| k as f64 * step).collect::<Vec<_>>();
        match self {
            ExperimentKind::ConversionCycle => steps(2.0, 10),
            ExperimentKind::RamanCrosstalk => steps(100.0, 10),
            ExperimentKind::PumpDetectCrosstalk0 => steps(10.0, 10),
            ExperimentKind::PumpDetectCrosstalk1 => steps(8.0, 10),
            ExperimentKind::SympatheticCooling | ExperimentKind::GlobalCooling => {
                vec![0.0, 50e-6, 100e-6, 200e-6, 400e-6, 700e-6, 1e-3, 2e-3, 5e-3, 0.1, 0.25, 0.5, 0.75, 1.0]
            }
            ExperimentKind::RbSQubit | ExperimentKind::RbFQubit => {
                vec![1.0, 100.0, 200.0, 400.0, 600.0, 800.0, 1000.0, 1500.0, 2000.0]
            }
            ExperimentKind::Thermometry => {
                let s = ThermometrySettings::default();
                thermometry_times(s.omega0, s.periods, s.points_per_period)
            }
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<&str> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
            Error::domain(format!("unknown experiment '{s}', expected one of {}", names.join(", ")))
        })
    }
}

/// What to run: experiment kind, sweep values, shots per point and seed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentPlan {
    pub kind: ExperimentKind,
    pub sweep: Vec<f64>,
    pub shots: u64,
    pub seed: u64,
}

impl ExperimentPlan {
    pub fn new(kind: ExperimentKind, sweep: Vec<f64>, shots: u64, seed: u64) -> Result<Self> {
        let plan = ExperimentPlan { kind, sweep, shots, seed };
        plan.validate()?;
        Ok(plan)
    }

    pub fn with_defaults(kind: ExperimentKind, shots: u64, seed: u64) -> Result<Self> {
        ExperimentPlan::new(kind, kind.default_sweep(), shots, seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.shots < 1 {
            return Err(Error::domain("shots must be >= 1"));
        }
        if self.sweep.is_empty() {
            return Err(Error::domain("sweep must not be empty"));
        }
        for (i, &x) in self.sweep.iter().enumerate() {
            if !x.is_finite() || x < 0.0 {
                return Err(Error::domain(format!("sweep[{i}] = {x} must be finite and >= 0")));
            }
            if self.kind.integer_sweep() && x.fract() != 0.0 {
                return Err(Error::domain(format!("sweep[{i}] = {x} must be a whole number for {}", self.kind)));
            }
            if i > 0 && !(x > self.sweep[i - 1]) {
                return Err(Error::domain(format!("sweep must be strictly increasing (sweep[{i}] = {x})")));
            }
        }
        Ok(())
    }

    pub(crate) fn require(&self, kinds: &[ExperimentKind]) -> Result<()> {
        self.validate()?;
        if !kinds.contains(&self.kind) {
            return Err(Error::domain(format!("plan kind {} does not match this protocol", self.kind)));
        }
        Ok(())
    }

    fn stream(&self) -> u64 {
        experiment_id(self.kind.name())
    }

    pub(crate) fn shot_rng(&self, sweep_index: usize, shot: u64) -> ChaCha8Rng {
        shot_rng(self.seed, self.stream(), sweep_index as u64, shot)
    }

    pub(crate) fn point_rng(&self, sweep_index: usize) -> ChaCha8Rng {
        point_rng(self.seed, self.stream(), sweep_index as u64)
    }

    /// Shots given to each of the six MUB states: an even split, at least one.
    pub fn shots_per_state(&self) -> u64 {
        (self.shots / 6).max(1)
    }
}

/// One point of a fidelity or survival curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveRecord {
    pub sweep_value: f64,
    pub mean: f64,
    pub stderr: f64,
    /// per-state success frequencies in [`mub_states`] order
    pub per_mub: Option<[f64; 6]>,
}

/// Preparation and measurement errors, one channel each per shot.
///
/// The measurement maps the ideal success probability `f` to
/// `f (1 − bright_to_dark) + (1 − f) dark_to_bright`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Spam {
    /// depolarizing probability of the prepared state
    pub prep_depolarizing: f64,
    pub bright_to_dark: f64,
    pub dark_to_bright: f64,
}

impl Default for Spam {
    fn default() -> Self {
        Spam::ideal()
    }
}

impl Spam {
    pub fn ideal() -> Self {
        Spam { prep_depolarizing: 0.0, bright_to_dark: 0.0, dark_to_bright: 0.0 }
    }

    /// Readout that loses a fraction `e` of the successes.
    pub fn readout_loss(e: f64) -> Self {
        Spam { bright_to_dark: e, ..Spam::ideal() }
    }

    /// Readout flipping either outcome with probability `e`.
    pub fn symmetric(e: f64) -> Self {
        Spam { bright_to_dark: e, dark_to_bright: e, ..Spam::ideal() }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("prep_depolarizing", self.prep_depolarizing),
            ("bright_to_dark", self.bright_to_dark),
            ("dark_to_bright", self.dark_to_bright),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::domain(format!("{name} = {v} outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn success_probability(&self, f: f64) -> f64 {
        (f * (1.0 - self.bright_to_dark) + (1.0 - f) * self.dark_to_bright).clamp(0.0, 1.0)
    }

    /// Prepares `|ψ⟩` on a two-level basis with the preparation error applied.
    pub fn prepare(&self, basis: Vec<crate::atom::LevelId>, psi: &[C64; 2]) -> Result<DensityMatrix> {
        let rho = DensityMatrix::pure(basis, psi)?;
        if self.prep_depolarizing == 0.0 {
            return Ok(rho);
        }
        apply_channel(&rho, &Channel::Depolarizing(self.prep_depolarizing))
    }
}

/// `|0⟩, |1⟩, |+⟩, |−⟩, |L⟩, |R⟩` with `|±⟩ = (|0⟩ ± |1⟩)/√2` and
/// `|L⟩, |R⟩ = (|0⟩ ± i|1⟩)/√2`.
pub fn mub_states() -> [[C64; 2]; 6] {
    let (o, i, h) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0), FRAC_1_SQRT_2);
    [
        [i, o],
        [o, i],
        [C64::new(h, 0.0), C64::new(h, 0.0)],
        [C64::new(h, 0.0), C64::new(-h, 0.0)],
        [C64::new(h, 0.0), C64::new(0.0, h)],
        [C64::new(h, 0.0), C64::new(0.0, -h)],
    ]
}

/// Fidelity of each MUB state after `channel`, without SPAM.
pub fn mub_fidelities(channel: &Channel) -> Result<[f64; 6]> {
    let mut out = [0.0; 6];
    for (slot, psi) in out.iter_mut().zip(mub_states()) {
        let rho = DensityMatrix::pure(crate::quantum::s_qubit_basis(), &psi)?;
        *slot = fidelity(&apply_channel(&rho, channel)?, &psi)?;
    }
    Ok(out)
}

/// Average fidelity over the Bloch sphere, `(2 F_e + 1)/3` with the
/// entanglement fidelity `F_e = Σ_k |tr K_k|²/4`.
pub fn bloch_average_fidelity(channel: &Channel) -> Result<f64> {
    let fe: f64 = channel.kraus_operators(2)?.iter().map(|k| k.trace().norm_sqr()).sum::<f64>() / 4.0;
    Ok((2.0 * fe + 1.0) / 3.0)
}

/// Success counts of one binomial trial set.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Tally {
    pub hits: u64,
    pub trials: u64,
}

impl Tally {
    pub fn record(&mut self, success: bool) {
        self.trials += 1;
        self.hits += success as u64;
    }

    pub fn draw<R: Rng + ?Sized>(p: f64, trials: u64, rng: &mut R) -> Result<Tally> {
        let d = Binomial::new(trials, p.clamp(0.0, 1.0)).map_err(|e| Error::domain(e.to_string()))?;
        Ok(Tally { hits: d.sample(rng), trials })
    }

    pub fn frequency(&self) -> f64 {
        self.hits as f64 / self.trials as f64
    }

    /// Binomial variance of the frequency with the Agresti-Coull style
    /// estimate `p̃ = (k+1)/(n+2)`, which stays positive at `k = 0` or `k = n`.
    pub fn variance(&self) -> f64 {
        let n = self.trials as f64;
        let p = (self.hits as f64 + 1.0) / (n + 2.0);
        p * (1.0 - p) / n
    }

    pub fn record_at(&self, x: f64) -> CurveRecord {
        CurveRecord { sweep_value: x, mean: self.frequency(), stderr: self.variance().sqrt(), per_mub: None }
    }
}

/// Equal-weight MUB average of six tallies.
pub(crate) fn mub_record(x: f64, tallies: &[Tally; 6]) -> CurveRecord {
    let per: [f64; 6] = std::array::from_fn(|i| tallies[i].frequency());
    let var: f64 = tallies.iter().map(Tally::variance).sum();
    CurveRecord { sweep_value: x, mean: per.iter().sum::<f64>() / 6.0, stderr: var.sqrt() / 6.0, per_mub: Some(per) }
}

/// MUB fidelity curve of a shot-noise-free spectator channel: the
/// per-state success probability is computed exactly and each state's
/// shots are drawn as one binomial.
pub(crate) fn sample_mub_curve<F>(plan: &ExperimentPlan, spam: &Spam, mut channel_at: F) -> Result<Vec<CurveRecord>>
where
    F: FnMut(f64) -> Result<Channel>,
{
    spam.validate()?;
    let basis = crate::quantum::f_qubit_basis();
    let shots = plan.shots_per_state();
    let mut out = Vec::with_capacity(plan.sweep.len());
    for (i, &x) in plan.sweep.iter().enumerate() {
        let ch = channel_at(x)?;
        let mut rng = plan.point_rng(i);
        let mut tallies = [Tally::default(); 6];
        for (t, psi) in tallies.iter_mut().zip(mub_states()) {
            let rho = apply_channel(&spam.prepare(basis.clone(), &psi)?, &ch)?;
            *t = Tally::draw(spam.success_probability(fidelity(&rho, &psi)?), shots, &mut rng)?;
        }
        out.push(mub_record(x, &tallies));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::s_qubit_basis;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    #[test]
    fn mub_overlaps() {
        let s = mub_states();
        for i in 0..6 {
            for j in 0..6 {
                let ov = (s[i][0].conj() * s[j][0] + s[i][1].conj() * s[j][1]).norm_sqr();
                let want = if i == j {
                    1.0
                } else if i / 2 == j / 2 {
                    0.0
                } else {
                    0.5
                };
                assert!((ov - want).abs() < 1e-15, "{i} {j} {ov}");
            }
        }
    }

    #[test]
    fn mub_projectors_sum_to_three_identity() {
        let mut sum = DMatrix::<C64>::zeros(2, 2);
        for psi in mub_states() {
            sum += DensityMatrix::pure(s_qubit_basis(), &psi).unwrap().matrix();
        }
        let dev = (sum - DMatrix::identity(2, 2) * C64::new(3.0, 0.0)).map(|z| z.norm()).max();
        assert!(dev < 1e-15);
    }

    #[test]
    fn kind_names_round_trip() {
        for k in ExperimentKind::ALL {
            assert_eq!(k.name().parse::<ExperimentKind>().unwrap(), k);
            let json = serde_json_like(k);
            assert_eq!(json, k.name());
            assert!(ExperimentPlan::with_defaults(k, 10, 1).is_ok(), "{k}");
        }
        assert!("fig2".parse::<ExperimentKind>().is_err());
    }

    fn serde_json_like(k: ExperimentKind) -> String {
        use serde::de::value::{Error as DeError, StrDeserializer};
        use serde::de::IntoDeserializer;
        let de: StrDeserializer<DeError> = k.name().into_deserializer();
        ExperimentKind::deserialize(de).unwrap().name().to_string()
    }

    #[test]
    fn plan_validation() {
        let k = ExperimentKind::ConversionCycle;
        assert!(ExperimentPlan::new(k, vec![0.0, 2.0], 0, 1).is_err());
        assert!(ExperimentPlan::new(k, vec![], 10, 1).is_err());
        assert!(ExperimentPlan::new(k, vec![2.0, 2.0], 10, 1).is_err());
        assert!(ExperimentPlan::new(k, vec![3.0, 1.0], 10, 1).is_err());
        assert!(ExperimentPlan::new(k, vec![0.5], 10, 1).is_err());
        assert!(ExperimentPlan::new(k, vec![f64::NAN], 10, 1).is_err());
        assert!(ExperimentPlan::new(ExperimentKind::GlobalCooling, vec![0.0, 0.5e-3], 10, 1).is_ok());
    }

    #[test]
    fn spam_readout_map() {
        let s = Spam { prep_depolarizing: 0.0, bright_to_dark: 0.034, dark_to_bright: 0.0 };
        assert!((s.success_probability(1.0) - 0.966).abs() < 1e-15);
        assert_eq!(s.success_probability(0.0), 0.0);
        assert!(Spam { bright_to_dark: 1.5, ..Spam::ideal() }.validate().is_err());
        let sym = Spam::symmetric(0.01);
        assert!((sym.success_probability(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn mub_average_equals_bloch_average_for_standard_channels() {
        for ch in [Channel::Dephasing(0.13), Channel::Depolarizing(0.27), Channel::identity()] {
            let mub = crate::estimators::average_fidelity_mub(&mub_fidelities(&ch).unwrap());
            assert!((mub - bloch_average_fidelity(&ch).unwrap()).abs() < 1e-14, "{ch:?}");
        }
        let d = mub_fidelities(&Channel::Dephasing(0.2)).unwrap();
        for (i, f) in d.iter().enumerate() {
            let want = if i < 2 { 1.0 } else { 0.8 };
            assert!((f - want).abs() < 1e-14);
        }
    }

    fn unitary(theta: f64, phi: f64, lambda: f64) -> DMatrix<C64> {
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(c, 0.0), -C64::from_polar(s, lambda), C64::from_polar(s, phi), C64::from_polar(c, phi + lambda)],
        )
    }

    proptest! {
        #[test]
        fn two_design_holds_for_random_unitaries(t in 0.0..std::f64::consts::PI, p in -3.2..3.2f64, l in -3.2..3.2f64) {
            let ch = Channel::Kraus(vec![unitary(t, p, l)]);
            let mub = crate::estimators::average_fidelity_mub(&mub_fidelities(&ch).unwrap());
            prop_assert!((mub - bloch_average_fidelity(&ch).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn sampled_mub_curve_matches_bloch_average() {
        let plan = ExperimentPlan::new(ExperimentKind::RamanCrosstalk, vec![0.0, 1.0], 600_000, 9).unwrap();
        let chans =
            [Channel::Dephasing(0.1), Channel::Depolarizing(0.3), Channel::Kraus(vec![unitary(0.7, 0.2, -1.1)])];
        for ch in chans {
            let want = bloch_average_fidelity(&ch).unwrap();
            let curve = sample_mub_curve(&plan, &Spam::ideal(), |x| {
                Ok(if x == 0.0 { Channel::identity() } else { ch.clone() })
            })
            .unwrap();
            assert_eq!(curve[0].mean, 1.0);
            let r = curve[1];
            assert!((r.mean - want).abs() < 4.0 * r.stderr, "{ch:?}: {} vs {want} ± {}", r.mean, r.stderr);
        }
    }

    #[test]
    fn stderr_scales_with_inverse_root_shots() {
        let run = |shots| {
            let plan = ExperimentPlan::new(ExperimentKind::RamanCrosstalk, vec![1.0], shots, 3).unwrap();
            sample_mub_curve(&plan, &Spam::ideal(), |_| Ok(Channel::Dephasing(0.25))).unwrap()[0].stderr
        };
        let ratio = run(6_000) / run(600_000);
        assert!((ratio - 10.0).abs() < 0.5, "{ratio}");
    }

    #[test]
    fn tally_variance_is_positive_at_the_edges() {
        let t = Tally { hits: 10, trials: 10 };
        assert_eq!(t.frequency(), 1.0);
        assert!(t.variance() > 0.0);
        let r = mub_record(0.0, &[t; 6]);
        assert_eq!(r.mean, 1.0);
        assert!((r.stderr - (6.0 * t.variance()).sqrt() / 6.0).abs() < 1e-15);
    }
}
