//! Byte-level golden files for every experiment kind at small shot counts.
//! Regenerate with `UPDATE_GOLDEN=1 cargo test -p dualtype-cli --test golden`.

use std::fs;
use std::path::{Path, PathBuf};

use dualtype_cli::{run, RunConfig};
use dualtype_core::protocols::ExperimentKind;

fn golden_config(kind: ExperimentKind) -> String {
    let body = match kind {
        ExperimentKind::ConversionCycle => "sweep = [0, 2, 4]\n",
        ExperimentKind::RamanCrosstalk => "sweep = [0, 500, 1000]\n[physics.raman]\ntrace_pulses = 8\n",
        ExperimentKind::PumpDetectCrosstalk0 | ExperimentKind::PumpDetectCrosstalk1 => "sweep = [0, 50, 100]\n",
        ExperimentKind::SympatheticCooling | ExperimentKind::GlobalCooling => {
            "sweep = [0, 1e-3, 0.5]\n[physics.cooling]\nthermometry_periods = 5\n\
             thermometry_points_per_period = 12\nthermometry_shots = 100\n"
        }
        ExperimentKind::RbSQubit | ExperimentKind::RbFQubit => "sweep = [1, 50, 100]\n",
        ExperimentKind::Thermometry => "[physics.thermometry]\nperiods = 5\npoints_per_period = 12\n",
    };
    format!("experiment = \"{}\"\nseed = 7\nshots = 60\n{body}", kind.name())
}

fn golden_dir(kind: ExperimentKind) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(kind.name())
}

#[test]
fn every_kind_matches_its_golden_files() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    for kind in ExperimentKind::ALL {
        let tmp = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig::from_toml_str(&golden_config(kind)).unwrap();
        cfg.output_dir = tmp.path().to_path_buf();
        let report = run(&cfg).unwrap();
        let golden = golden_dir(kind);
        if update {
            let _ = fs::remove_dir_all(&golden);
            fs::create_dir_all(&golden).unwrap();
        }
        for file in &report.files {
            let name = file.file_name().unwrap();
            let actual = fs::read_to_string(file).unwrap();
            let expected_path = golden.join(name);
            if update {
                fs::write(&expected_path, &actual).unwrap();
                continue;
            }
            let expected = fs::read_to_string(&expected_path)
                .unwrap_or_else(|e| panic!("{}: {e} (run with UPDATE_GOLDEN=1)", expected_path.display()));
            assert!(actual == expected, "{} differs from its golden file", expected_path.display());
        }
        if !update {
            let n = fs::read_dir(&golden).unwrap().count();
            assert_eq!(n, report.files.len(), "{}: stale golden files", kind.name());
        }
    }
}
