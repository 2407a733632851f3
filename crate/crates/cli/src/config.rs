//! Run configuration: strict TOML with every physical parameter as a named
//! key defaulting to the measured value.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use dualtype_core::motion::{Mode, ModeSet};
use dualtype_core::noise::{CrosstalkRates, DetectionConfig, NoiseConfig};
use dualtype_core::protocols::{
    ConversionSettings, CoolingSettings, ExperimentKind, ExperimentPlan, PumpDetectSettings, RamanSettings, RbSettings,
    Spam, ThermometrySettings,
};
use dualtype_core::quantum::ConversionPulses;

use crate::CliError;

pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_SHOTS: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    /// shots per sweep point
    pub shots: u64,
    pub output_dir: PathBuf,
    /// overrides the experiment's default sweep
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<f64>>,
    pub physics: Physics,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            experiment: ExperimentKind::ConversionCycle,
            seed: DEFAULT_SEED,
            shots: DEFAULT_SHOTS,
            output_dir: PathBuf::from("out"),
            sweep: None,
            physics: Physics::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Physics {
    pub conversion: ConversionConfig,
    pub crosstalk: CrosstalkRates,
    pub raman: RamanConfig,
    pub pump_detect: PumpDetectConfig,
    pub modes: ModesConfig,
    pub cooling: CoolingConfig,
    pub thermometry: ThermometryConfig,
    pub rb: RbConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    /// amplitude jitter sized to `round_trip_error`
    Calibrated,
    /// laser coherence times and thermal motion from `physical_noise`
    Physical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConversionConfig {
    /// s
    pub duration_411: f64,
    /// s
    pub duration_3432: f64,
    pub noise_model: NoiseModel,
    /// mean infidelity of one S-F-S round trip in calibrated mode
    pub round_trip_error: f64,
    pub verify: bool,
    pub spam: Spam,
    pub physical_noise: NoiseConfig,
}

impl Default for ConversionConfig {
    fn default() -> Self {
        ConversionConfig {
            duration_411: 0.54e-6,
            duration_3432: 0.39e-6,
            noise_model: NoiseModel::Calibrated,
            round_trip_error: 0.0065,
            verify: true,
            spam: Spam::readout_loss(0.034),
            physical_noise: NoiseConfig::physical(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RamanConfig {
    pub spam: Spam,
    pub rabi_decay_pulses: f64,
    pub trace_pulses: u32,
}

impl Default for RamanConfig {
    fn default() -> Self {
        let s = RamanSettings::default();
        RamanConfig { spam: s.spam, rabi_decay_pulses: s.rabi_decay_pulses, trace_pulses: s.trace_pulses }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PumpDetectConfig {
    /// F-qubit SPAM with the S-qubit left in |0>
    pub spam_0: Spam,
    /// F-qubit SPAM with the S-qubit flipped to |1>
    pub spam_1: Spam,
    pub pump_cycles: u32,
    pub pump_residual: f64,
    pub detection: DetectionConfig,
}

impl Default for PumpDetectConfig {
    fn default() -> Self {
        let (a, b) = (PumpDetectSettings::for_state(false), PumpDetectSettings::for_state(true));
        PumpDetectConfig {
            spam_0: a.spam,
            spam_1: b.spam,
            pump_cycles: a.pump_cycles,
            pump_residual: a.pump_residual,
            detection: a.detection,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModesConfig {
    /// transverse mode frequencies, Hz
    pub frequencies_hz: Vec<f64>,
    pub lamb_dicke: Vec<f64>,
}

impl Default for ModesConfig {
    fn default() -> Self {
        ModesConfig { frequencies_hz: vec![3.15e6, 3.1477e6, 2.97e6, 2.9676e6], lamb_dicke: vec![0.024; 4] }
    }
}

impl ModesConfig {
    pub fn mode_set(&self) -> dualtype_core::Result<ModeSet> {
        if self.frequencies_hz.len() != self.lamb_dicke.len() {
            return Err(dualtype_core::Error::Domain(format!(
                "{} frequencies but {} Lamb-Dicke factors",
                self.frequencies_hz.len(),
                self.lamb_dicke.len()
            )));
        }
        ModeSet::new(
            self.frequencies_hz
                .iter()
                .zip(&self.lamb_dicke)
                .map(|(&f, &eta)| Mode { omega: 2.0 * std::f64::consts::PI * f, eta })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoolingConfig {
    /// K
    pub steady_state_temperature: f64,
    /// quanta/s per mode
    pub heating_rate: f64,
    /// s
    pub heating_duration: f64,
    /// 1/s at full participation
    pub cooling_rate: f64,
    pub participation_sympathetic: f64,
    pub participation_global: f64,
    /// Rabi periods of each thermometry trace
    pub thermometry_periods: f64,
    pub thermometry_points_per_period: u32,
    pub thermometry_shots: u64,
    pub spam: Spam,
}

impl Default for CoolingConfig {
    fn default() -> Self {
        let s = CoolingSettings::default();
        CoolingConfig {
            steady_state_temperature: s.steady_state_temperature,
            heating_rate: s.heating_rate,
            heating_duration: s.heating_duration,
            cooling_rate: s.cooling_rate,
            participation_sympathetic: s.participation_sympathetic,
            participation_global: s.participation_global,
            thermometry_periods: s.thermometry.periods,
            thermometry_points_per_period: s.thermometry.points_per_period,
            thermometry_shots: s.thermometry_shots,
            spam: s.spam,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThermometryConfig {
    /// bare carrier Rabi frequency, Hz
    pub rabi_frequency_hz: f64,
    /// K
    pub temperature: f64,
    pub periods: f64,
    pub points_per_period: u32,
}

impl Default for ThermometryConfig {
    fn default() -> Self {
        let s = ThermometrySettings::default();
        ThermometryConfig {
            rabi_frequency_hz: s.omega0 / (2.0 * std::f64::consts::PI),
            temperature: s.temperature,
            periods: s.periods,
            points_per_period: s.points_per_period,
        }
    }
}

impl ThermometryConfig {
    pub fn settings(&self) -> ThermometrySettings {
        ThermometrySettings {
            omega0: 2.0 * std::f64::consts::PI * self.rabi_frequency_hz,
            temperature: self.temperature,
            periods: self.periods,
            points_per_period: self.points_per_period,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RbConfig {
    /// average gate infidelity of S-qubit Cliffords
    pub s_gate_infidelity: f64,
    pub f_gate_infidelity: f64,
    pub sequences: u64,
    pub spam: Spam,
}

impl Default for RbConfig {
    fn default() -> Self {
        let s = RbSettings::default();
        RbConfig { s_gate_infidelity: 2e-4, f_gate_infidelity: 1e-4, sequences: s.sequences, spam: s.spam }
    }
}

fn keyed<T>(key: &str, r: dualtype_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Config(format!("{key}: {e}")))
}

impl RunConfig {
    pub fn plan(&self) -> Result<ExperimentPlan, CliError> {
        let sweep = match &self.sweep {
            Some(s) => s.clone(),
            None if self.experiment == ExperimentKind::Thermometry => {
                let t = self.physics.thermometry.settings();
                dualtype_core::protocols::thermometry_times(t.omega0, t.periods, t.points_per_period)
            }
            None => self.experiment.default_sweep(),
        };
        if self.shots < 1 {
            return Err(CliError::Config("shots: must be >= 1".into()));
        }
        keyed("sweep", ExperimentPlan::new(self.experiment, sweep, self.shots, self.seed))
    }

    pub fn modes(&self) -> Result<ModeSet, CliError> {
        keyed("physics.modes", self.physics.modes.mode_set())
    }

    pub fn conversion(&self) -> Result<ConversionSettings, CliError> {
        let c = &self.physics.conversion;
        for (key, v) in [("duration_411", c.duration_411), ("duration_3432", c.duration_3432)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(CliError::Config(format!("physics.conversion.{key}: {v} must be > 0")));
            }
        }
        let noise = match c.noise_model {
            NoiseModel::Calibrated => {
                keyed("physics.conversion.round_trip_error", NoiseConfig::calibrated_round_trip(c.round_trip_error))?
            }
            NoiseModel::Physical => {
                keyed("physics.conversion.physical_noise", c.physical_noise.validate())?;
                c.physical_noise.clone()
            }
        };
        keyed("physics.conversion.spam", c.spam.validate())?;
        Ok(ConversionSettings {
            pulses: ConversionPulses::new(c.duration_411, c.duration_3432),
            noise,
            spam: c.spam,
            verify: c.verify,
        })
    }

    pub fn crosstalk(&self) -> Result<CrosstalkRates, CliError> {
        keyed("physics.crosstalk", self.physics.crosstalk.validate())?;
        Ok(self.physics.crosstalk.clone())
    }

    pub fn raman(&self) -> Result<RamanSettings, CliError> {
        let r = &self.physics.raman;
        keyed("physics.raman.spam", r.spam.validate())?;
        if !(r.rabi_decay_pulses > 0.0) {
            return Err(CliError::Config("physics.raman.rabi_decay_pulses: must be > 0".into()));
        }
        Ok(RamanSettings { spam: r.spam, rabi_decay_pulses: r.rabi_decay_pulses, trace_pulses: r.trace_pulses })
    }

    pub fn pump_detect(&self, with_pi_pulse: bool) -> Result<PumpDetectSettings, CliError> {
        let p = &self.physics.pump_detect;
        keyed("physics.pump_detect.detection", p.detection.validate())?;
        let (key, spam) = if with_pi_pulse { ("spam_1", p.spam_1) } else { ("spam_0", p.spam_0) };
        keyed(&format!("physics.pump_detect.{key}"), spam.validate())?;
        if !(0.0..=1.0).contains(&p.pump_residual) {
            return Err(CliError::Config(format!(
                "physics.pump_detect.pump_residual: {} outside [0, 1]",
                p.pump_residual
            )));
        }
        Ok(PumpDetectSettings {
            spam,
            detection: p.detection.clone(),
            pump_cycles: p.pump_cycles,
            pump_residual: p.pump_residual,
        })
    }

    pub fn cooling(&self) -> Result<CoolingSettings, CliError> {
        let c = &self.physics.cooling;
        let s = CoolingSettings {
            modes: self.modes()?,
            steady_state_temperature: c.steady_state_temperature,
            heating_rate: c.heating_rate,
            heating_duration: c.heating_duration,
            cooling_rate: c.cooling_rate,
            participation_sympathetic: c.participation_sympathetic,
            participation_global: c.participation_global,
            thermometry: ThermometrySettings {
                periods: c.thermometry_periods,
                points_per_period: c.thermometry_points_per_period,
                ..self.physics.thermometry.settings()
            },
            thermometry_shots: c.thermometry_shots,
            spam: c.spam,
        };
        keyed("physics.cooling", s.validate())?;
        Ok(s)
    }

    pub fn thermometry(&self) -> Result<ThermometrySettings, CliError> {
        let s = self.physics.thermometry.settings();
        keyed("physics.thermometry", s.validate())?;
        Ok(s)
    }

    pub fn rb(&self) -> Result<RbSettings, CliError> {
        let r = &self.physics.rb;
        for (key, v) in [("s_gate_infidelity", r.s_gate_infidelity), ("f_gate_infidelity", r.f_gate_infidelity)] {
            if !(0.0..=0.5).contains(&v) {
                return Err(CliError::Config(format!("physics.rb.{key}: {v} outside [0, 0.5]")));
            }
        }
        if r.sequences < 1 {
            return Err(CliError::Config("physics.rb.sequences: must be >= 1".into()));
        }
        keyed("physics.rb.spam", r.spam.validate())?;
        Ok(RbSettings { sequences: r.sequences, spam: r.spam })
    }

    /// Checks every section, so that a bad value is reported even when the
    /// selected experiment does not use it.
    pub fn validate(&self) -> Result<(), CliError> {
        self.plan()?;
        self.conversion()?;
        self.crosstalk()?;
        self.raman()?;
        self.pump_detect(false)?;
        self.pump_detect(true)?;
        self.cooling()?;
        self.thermometry()?;
        self.rb()?;
        Ok(())
    }

    /// SHA-256 over the canonical JSON form of everything except the output
    /// directory.
    pub fn hash(&self) -> String {
        let mut copy = self.clone();
        copy.output_dir = PathBuf::new();
        let json = serde_json::to_string(&copy).expect("config serializes");
        format!("{:x}", Sha256::digest(json.as_bytes()))
    }

    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Reads and validates a config file.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    RunConfig::from_toml_str(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// The all-defaults configuration as TOML.
pub fn reference_config() -> String {
    let body = toml::to_string_pretty(&RunConfig::default()).expect("defaults serialize");
    format!(
        "# Reference configuration: every key with its default value.\n\
         # Units are SI (s, Hz, K, 1/s) unless the key name says otherwise.\n\
         # experiment is one of: {}\n\n{body}",
        ExperimentKind::ALL.iter().map(|k| k.name()).collect::<Vec<_>>().join(", ")
    )
}
