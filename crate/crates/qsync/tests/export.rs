use std::path::PathBuf;
use std::process::Command;

use qsync::artifact::RunArtifact;
use qsync::export::{csv_files, svg_files};
use qsync::{export, run_scenario, run_spectrum, run_sweep, scenario_from_str, Format};

fn small_scenario(observables: &[&str], end: f64) -> String {
    serde_json::json!({
        "schema_version": 1,
        "name": "small",
        "model": {
            "kind": "harmonic",
            "params": {
                "frequencies": [1.0, 1.1],
                "couplings": [[0.0, 0.3], [0.3, 0.0]],
                "coupling_form": "spring",
                "bath": {"kind": "common", "gamma": 0.05, "temperature": 0.5},
                "squeezing": [0.5, 0.2]
            }
        },
        "time": {"end": end, "step": 0.1},
        "observables": observables,
        "analysis": {"window": 5.0}
    })
    .to_string()
}

fn data_lines(bytes: &[u8]) -> Vec<String> {
    String::from_utf8(bytes.to_vec())
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(String::from)
        .collect()
}

#[test]
fn csv_has_one_column_per_observable_and_a_header() {
    // 1000 samples: t = 0, 0.1, ..., 99.9.
    let s = scenario_from_str(&small_scenario(&["x1^2", "x2^2"], 99.9)).unwrap();
    let artifact = run_scenario(&s).unwrap();
    let files = csv_files(&artifact).unwrap();
    let (name, bytes) = &files[0];
    assert_eq!(name, "small.csv");
    let text = String::from_utf8(bytes.clone()).unwrap();
    assert!(text.starts_with("# {\"tool\":\"qsync\""));
    assert!(!text.contains('\r'));
    let lines = data_lines(bytes);
    assert_eq!(lines.len(), 1001);
    assert_eq!(lines[0], "t [1/omega1],x1^2 [1/omega1],x2^2 [1/omega1]");
    for line in &lines[1..] {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 3);
        for f in fields {
            let mantissa = f.trim_start_matches('-').split('e').next().unwrap();
            assert_eq!(mantissa.replace('.', "").len(), 17, "{f}");
            f.parse::<f64>().unwrap();
        }
    }
}

#[test]
fn csv_values_round_trip_exactly() {
    let s = scenario_from_str(&small_scenario(&["x1^2", "x2^2", "p2^2"], 20.0)).unwrap();
    let artifact = run_scenario(&s).unwrap();
    let table = artifact.trajectory.as_ref().unwrap();
    let lines = data_lines(&csv_files(&artifact).unwrap()[0].1);
    for (k, line) in lines[1..].iter().enumerate() {
        let v: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(v[0], table.times[k]);
        assert_eq!(v[1], table.columns[0].values[k]);
        assert_eq!(v[2], table.columns[1].values[k]);
        assert_eq!(v[3], table.columns[2].values[k]);
    }
}

#[test]
fn runs_are_deterministic() {
    let s = scenario_from_str(&small_scenario(&[], 30.0)).unwrap();
    let a = csv_files(&run_scenario(&s).unwrap()).unwrap();
    let b = csv_files(&run_scenario(&s).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn json_round_trip_is_exact() {
    let s = scenario_from_str(&small_scenario(&[], 30.0)).unwrap();
    let artifact = run_scenario(&s).unwrap();
    let back = RunArtifact::from_json(&artifact.to_json().unwrap()).unwrap();
    assert_eq!(back, artifact);
}

fn sweep_scenario() -> String {
    let mut v: serde_json::Value = serde_json::from_str(&small_scenario(&[], 30.0)).unwrap();
    v["analysis"]["sweep"] = serde_json::json!({
        "lambda": {"from": 0.0, "to": 1.0, "count": 3},
        "omega2": {"from": 0.8, "to": 1.2, "count": 4},
        "eval_time": 20.0
    });
    v.to_string()
}

#[test]
fn sweep_json_is_row_major_with_axes() {
    let s = scenario_from_str(&sweep_scenario()).unwrap();
    let artifact = run_sweep(&s).unwrap();
    assert!(artifact.trajectory.is_none());
    let json: serde_json::Value = serde_json::from_str(&artifact.to_json().unwrap()).unwrap();
    let sweep = &json["sweep"];
    assert_eq!(sweep["lambdas"].as_array().unwrap().len(), 3);
    assert_eq!(sweep["omegas"].as_array().unwrap().len(), 4);
    assert_eq!(sweep["values"].as_array().unwrap().len(), 12);
    let table = artifact.sweep.as_ref().unwrap();
    assert_eq!(table.lambdas, vec![0.0, 0.5, 1.0]);
    // Row-major: cell (1, 2) is lambda = 0.5 with the third frequency.
    let value = table.values[4 + 2].unwrap();
    let mut single: serde_json::Value = serde_json::from_str(&small_scenario(&[], 40.0)).unwrap();
    single["model"]["params"]["frequencies"] = serde_json::json!([1.0, table.omegas[2]]);
    single["model"]["params"]["couplings"] = serde_json::json!([[0.0, 0.5], [0.5, 0.0]]);
    let direct = run_scenario(&scenario_from_str(&single.to_string()).unwrap()).unwrap();
    let k = (20.0f64 / 0.1).round() as usize;
    assert_eq!(direct.sync[0].pearson[k].unwrap().abs(), value);
    let back = RunArtifact::from_json(&artifact.to_json().unwrap()).unwrap();
    assert_eq!(back, artifact);
}

#[test]
fn svg_embeds_provenance_and_draws_heatmap() {
    let s = scenario_from_str(&sweep_scenario()).unwrap();
    let artifact = run_scenario(&s).unwrap();
    let files = svg_files(&artifact).unwrap();
    let names: Vec<&str> = files.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["small.svg", "small_sweep.svg"]);
    for (_, bytes) in &files {
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with("<svg"));
        assert!(text.contains("<metadata>{\"tool\":\"qsync\""));
        assert!(text.trim_end().ends_with("</svg>"));
    }
    let heat = String::from_utf8(files[1].1.clone()).unwrap();
    assert!(heat.contains("lambda / omega1^2") && heat.contains("omega2 / omega1"));
    assert!(heat.matches("<rect").count() >= 12);
    let chart = String::from_utf8(files[0].1.clone()).unwrap();
    assert!(chart.contains("<polyline"));
}

#[test]
fn export_writes_every_requested_format() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario_from_str(&small_scenario(&[], 30.0)).unwrap();
    let artifact = run_scenario(&s).unwrap();
    let written = export(&artifact, &[Format::Csv, Format::Json, Format::Svg], dir.path()).unwrap();
    let names: Vec<String> = written
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    for want in [
        "small.csv",
        "small_pearson.csv",
        "small_spectrum.csv",
        "small.json",
        "small.svg",
    ] {
        assert!(names.iter().any(|n| n == want), "{want} missing from {names:?}");
    }
    let json = std::fs::read_to_string(dir.path().join("small.json")).unwrap();
    assert_eq!(RunArtifact::from_json(&json).unwrap(), artifact);
}

#[test]
fn spectrum_reports_noiseless_mode() {
    let text = small_scenario(&[], 30.0).replace("[1.0,1.1]", "[1.0,1.0]");
    let artifact = run_spectrum(&scenario_from_str(&text).unwrap()).unwrap();
    let modes = artifact.modes.unwrap();
    assert_eq!(modes.noiseless, vec![1]);
    assert!(modes.kappa[1][0].abs() < 1e-12);
    assert_eq!(artifact.spectrum.unwrap().eigenvalues.len(), 4);
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qsync"))
}

fn bundled(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(format!("{name}.json"))
}

#[test]
fn cli_validate_and_run() {
    let out = cli().arg("validate").arg(bundled("dephasing_shift")).output().unwrap();
    assert!(out.status.success());
    let resolved: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(resolved["observables"], serde_json::json!(["sx1", "sx2", "I", "I0"]));

    let dir = tempfile::tempdir().unwrap();
    let out = cli()
        .args([
            "run",
            bundled("dephasing_shift").to_str().unwrap(),
            "--format",
            "csv,json",
            "--out",
        ])
        .arg(dir.path())
        .env("QSYNC_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in [
        "dephasing_shift.csv",
        "dephasing_shift_dephasing.csv",
        "dephasing_shift.json",
    ] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    assert!(!dir.path().join("dephasing_shift.svg").exists());

    let out = cli()
        .args(["spectrum", bundled("fig4_right").to_str().unwrap(), "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("degenerate frequencies true"));
}

#[test]
fn cli_reports_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.json");
    std::fs::write(&path, "").unwrap();
    let out = cli().arg("validate").arg(&path).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse error at line 1"));

    let out = cli()
        .args(["sweep", bundled("fig1_cb").to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no analysis.sweep"));

    let out = cli()
        .args(["run", bundled("fig1_cb").to_str().unwrap(), "--format", "png"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}
