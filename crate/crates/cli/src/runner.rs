use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use dualtype_core::estimators::{fit_exp_decay, fit_power_decay, fit_rb, fit_thermal_rabi, DataPoint, FitResult};
use dualtype_core::protocols::{
    run_conversion_cycle, run_global_cooling, run_pump_detect_crosstalk, run_raman_crosstalk, run_rb,
    run_sympathetic_cooling, run_thermometry, CurveRecord, ExperimentKind, RbQubit, TemperaturePoint,
};
use dualtype_core::quantum::Channel;

use crate::config::RunConfig;
use crate::CliError;

/// Files written by one run and whether every fit converged.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub converged: bool,
    pub summary: Value,
}

impl RunReport {
    /// 0 when every fit converged, otherwise the non-convergence status.
    pub fn exit_code(&self) -> u8 {
        if self.converged {
            0
        } else {
            crate::EXIT_NON_CONVERGENCE
        }
    }
}

struct Outputs {
    curve: Vec<CurveRecord>,
    s_trace: Option<Vec<CurveRecord>>,
    temperature: Option<Vec<TemperaturePoint>>,
    fit: Option<FitResult>,
    extras: Map<String, Value>,
}

impl Outputs {
    fn curve(curve: Vec<CurveRecord>) -> Self {
        Outputs { curve, s_trace: None, temperature: None, fit: None, extras: Map::new() }
    }
}

fn points(curve: &[CurveRecord]) -> Vec<DataPoint> {
    curve.iter().map(|r| DataPoint::new(r.sweep_value, r.mean, r.stderr)).collect()
}

fn temperature_as_curve(temps: &[TemperaturePoint]) -> Vec<CurveRecord> {
    temps
        .iter()
        .map(|p| CurveRecord { sweep_value: p.time, mean: p.fitted_temperature, stderr: p.stderr, per_mub: None })
        .collect()
}

fn simulate(cfg: &RunConfig) -> Result<Outputs, CliError> {
    let plan = cfg.plan()?;
    let kind = cfg.experiment;
    let out = match kind {
        ExperimentKind::ConversionCycle => {
            let run = run_conversion_cycle(&plan, &cfg.conversion()?)?;
            let mut o = Outputs::curve(run.curve);
            o.fit = Some(fit_power_decay(&points(&o.curve))?);
            o.extras.insert("discard_fraction".into(), json!(run.discard_fraction));
            o
        }
        ExperimentKind::RamanCrosstalk
        | ExperimentKind::PumpDetectCrosstalk0
        | ExperimentKind::PumpDetectCrosstalk1 => {
            let rates = cfg.crosstalk()?;
            let run = match kind {
                ExperimentKind::RamanCrosstalk => run_raman_crosstalk(&plan, &rates, &cfg.raman()?)?,
                _ => {
                    let with_pi = kind == ExperimentKind::PumpDetectCrosstalk1;
                    run_pump_detect_crosstalk(&plan, &rates, with_pi, &cfg.pump_detect(with_pi)?)?
                }
            };
            let mut o = Outputs::curve(run.curve);
            o.fit = Some(fit_power_decay(&points(&o.curve))?);
            o.s_trace = Some(run.s_trace);
            o
        }
        ExperimentKind::SympatheticCooling => {
            let run = run_sympathetic_cooling(&plan, &cfg.cooling()?, &cfg.crosstalk()?)?;
            let mut o = Outputs::curve(run.fidelity.expect("sympathetic cooling records a fidelity curve"));
            let fit = fit_exp_decay(&points(&o.curve))?;
            let rate = fit.get("rate").unwrap_or(0.0);
            o.extras.insert("crosstalk_error_1ms".into(), json!(-(-rate * 1e-3).exp_m1()));
            o.fit = Some(fit);
            o.temperature = Some(run.temperature);
            o
        }
        ExperimentKind::GlobalCooling => {
            let run = run_global_cooling(&plan, &cfg.cooling()?)?;
            let mut o = Outputs::curve(temperature_as_curve(&run.temperature));
            o.temperature = Some(run.temperature);
            o
        }
        ExperimentKind::RbSQubit | ExperimentKind::RbFQubit => {
            let (qubit, r) = if kind == ExperimentKind::RbSQubit {
                (RbQubit::S, cfg.physics.rb.s_gate_infidelity)
            } else {
                (RbQubit::F, cfg.physics.rb.f_gate_infidelity)
            };
            // a depolarizing channel with probability p has average infidelity p/2
            let curve = run_rb(&plan, qubit, &Channel::Depolarizing(2.0 * r), &cfg.rb()?)?;
            let mut o = Outputs::curve(curve);
            o.fit = Some(fit_rb(&points(&o.curve))?);
            o
        }
        ExperimentKind::Thermometry => {
            let modes = cfg.modes()?;
            let curve = run_thermometry(&plan, &cfg.thermometry()?, &modes)?;
            let mut o = Outputs::curve(curve);
            o.fit = Some(fit_thermal_rabi(&points(&o.curve), &modes)?);
            o
        }
    };
    Ok(out)
}

fn header(cfg: &RunConfig, hash: &str) -> String {
    format!(
        "# experiment={} seed={} shots={} config_hash={} sweep={}\n",
        cfg.experiment.name(),
        cfg.seed,
        cfg.shots,
        hash,
        cfg.experiment.sweep_label()
    )
}

fn curve_csv(cfg: &RunConfig, hash: &str, curve: &[CurveRecord]) -> String {
    let mut s = header(cfg, hash);
    let with_mub = curve.iter().any(|r| r.per_mub.is_some());
    s.push_str("sweep_value,mean,stderr");
    if with_mub {
        s.push_str(",mub_0,mub_1,mub_2,mub_3,mub_4,mub_5");
    }
    s.push('\n');
    for r in curve {
        write!(s, "{:.16e},{:.16e},{:.16e}", r.sweep_value, r.mean, r.stderr).unwrap();
        if let Some(m) = &r.per_mub {
            for v in m {
                write!(s, ",{v:.16e}").unwrap();
            }
        }
        s.push('\n');
    }
    s
}

fn temperature_csv(cfg: &RunConfig, hash: &str, temps: &[TemperaturePoint]) -> String {
    let mut s = header(cfg, hash);
    s.push_str("sweep_value,true_temperature,fitted_temperature,stderr,converged\n");
    for p in temps {
        writeln!(
            s,
            "{:.16e},{:.16e},{:.16e},{:.16e},{}",
            p.time, p.true_temperature, p.fitted_temperature, p.stderr, p.converged
        )
        .unwrap();
    }
    s
}

fn fit_json(fit: &FitResult) -> Value {
    let params: Map<String, Value> = fit.names.iter().zip(&fit.params).map(|(n, v)| (n.clone(), json!(v))).collect();
    let stderrs: Map<String, Value> = fit.names.iter().zip(&fit.stderrs).map(|(n, v)| (n.clone(), json!(v))).collect();
    json!({
        "model": fit.model,
        "params": params,
        "stderrs": stderrs,
        "residual_rss": fit.residual_rss,
        "relative_rss": fit.relative_rss,
        "converged": fit.converged,
        "iterations": fit.iterations,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// Runs the configured experiment and writes into `cfg.output_dir`:
///
/// * `<experiment>.csv`, the main curve
/// * `<experiment>_s_trace.csv` for the crosstalk experiments
/// * `<experiment>_temperature.csv` for the cooling experiments
/// * `<experiment>_fit.json`, the fit summary
///
/// Files are written even when a fit fails to converge; the report then
/// has `converged == false`.
pub fn run(cfg: &RunConfig) -> Result<RunReport, CliError> {
    cfg.validate()?;
    let out = simulate(cfg)?;
    let hash = cfg.hash();
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
    let name = cfg.experiment.name();
    let mut files = Vec::new();
    let mut emit = |suffix: &str, contents: String| -> Result<(), CliError> {
        let path = dir.join(format!("{name}{suffix}"));
        write_file(&path, &contents)?;
        files.push(path);
        Ok(())
    };

    emit(".csv", curve_csv(cfg, &hash, &out.curve))?;
    if let Some(trace) = &out.s_trace {
        emit("_s_trace.csv", curve_csv(cfg, &hash, trace))?;
    }

    let mut converged = out.fit.as_ref().is_none_or(|f| f.converged);
    let mut summary = Map::new();
    summary.insert("experiment".into(), json!(name));
    summary.insert("seed".into(), json!(cfg.seed));
    summary.insert("shots".into(), json!(cfg.shots));
    summary.insert("config_hash".into(), json!(hash));
    if let Some(fit) = &out.fit {
        summary.insert("fit".into(), fit_json(fit));
    }
    if let Some(temps) = &out.temperature {
        emit("_temperature.csv", temperature_csv(cfg, &hash, temps))?;
        let all = temps.iter().all(|p| p.converged);
        converged &= all;
        let last = temps.last().expect("cooling sweep is non-empty");
        summary.insert(
            "thermometry".into(),
            json!({
                "model": "thermal_carrier",
                "points": temps.len(),
                "all_converged": all,
                "final_temperature": last.fitted_temperature,
                "final_temperature_stderr": last.stderr,
            }),
        );
    }
    summary.insert("converged".into(), json!(converged));
    for (k, v) in out.extras {
        summary.insert(k, v);
    }
    let summary = Value::Object(summary);
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
    emit("_fit.json", text)?;
    Ok(RunReport { files, converged, summary })
}
