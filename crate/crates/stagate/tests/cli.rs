use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

use stagate::output::sha256_hex;
use stagate::{execute, parse_config, CliError};

fn run(text: &str, dir: &Path) -> stagate::RunReport {
    let mut doc: Value = serde_json::from_str(text).unwrap();
    doc["out_dir"] = Value::from(dir.to_string_lossy().into_owned());
    execute(&parse_config(&doc.to_string()).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stagate() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stagate"))
}

#[test]
fn synth_x_pi() {
    let tmp = tempfile::tempdir().unwrap();
    run(r#"{"command":"synth","preset":"X_pi"}"#, tmp.path());
    let reference = csv_rows(&tmp.path().join("waveform_X_pi_reference.csv"));
    let cd = csv_rows(&tmp.path().join("waveform_X_pi_cd.csv"));
    assert_eq!(reference.len(), 3000);
    assert!(reference.iter().all(|r| r[1] == 0.0));
    // the counter-diabatic x-component is a single bump peaking mid-pulse
    let peak = cd.iter().enumerate().max_by(|a, b| a.1[1].total_cmp(&b.1[1])).unwrap().0;
    assert!((1400..1600).contains(&peak), "{peak}");
    assert!(cd[peak][1] > 1.0 && cd[0][1].abs() < 0.05 && cd[2999][1].abs() < 0.05);
    let side = read_json(&tmp.path().join("waveform_X_pi_cd_drag.json"));
    assert_eq!(side["preset"], "X_pi");
    assert_eq!(side["corrections"]["drag"], true);
    assert_eq!(side["dt_ns"], 0.01);
    assert_eq!(side["delta2_mhz"], -253.0);
}

#[test]
fn evolve_identity_stays_at_north_pole() {
    let tmp = tempfile::tempdir().unwrap();
    let report = run(r#"{"command":"evolve","preset":"Identity","model":"two_level"}"#, tmp.path());
    for r in csv_rows(&tmp.path().join("trajectory_Identity.csv")) {
        assert!(r[1].abs() < 1e-12 && r[2].abs() < 1e-12 && (r[3] - 1.0).abs() < 1e-12);
    }
    assert_eq!(report.results["leakage"], Value::Null);
    let three = run(r#"{"command":"evolve","preset":"X_pi"}"#, &tmp.path().join("x"));
    let p = read_json(&tmp.path().join("x/propagator_X_pi.json"));
    assert_eq!(p["re"].as_array().unwrap().len(), 3);
    assert!(three.results["leakage"].as_f64().unwrap() < 1e-4);
    assert!(p["unitarity_defect"].as_f64().unwrap() < 1e-10);
}

fn chi_entries(dir: &Path, name: &str) -> Vec<(String, String, f64, f64)> {
    let text = fs::read_to_string(dir.join(format!("chi_{name}.csv"))).unwrap();
    text.lines()
        .skip(1)
        .map(|l| {
            let v: Vec<&str> = l.split(',').collect();
            (v[0].into(), v[1].into(), v[2].parse().unwrap(), v[3].parse().unwrap())
        })
        .collect()
}

#[test]
fn qpt_exact_modes() {
    let tmp = tempfile::tempdir().unwrap();
    let exact = r#"{"command":"qpt","preset":"PRESET","model":"two_level","corrections":"cd",
                    "decoherence":false,"shots":"exact","mitigate_readout":false,
                    "readout_f0":1.0,"readout_f1":1.0}"#;
    run(&exact.replace("PRESET", "X_pi"), tmp.path());
    for (r, c, re, im) in chi_entries(tmp.path(), "X_pi") {
        let expected = if r == "X" && c == "X" { 1.0 } else { 0.0 };
        assert!((re - expected).abs() < 1e-9 && im.abs() < 1e-9, "{r}{c}");
    }
    run(&exact.replace("PRESET", "H"), tmp.path());
    for (r, c, re, im) in chi_entries(tmp.path(), "Hadamard") {
        let half = matches!((r.as_str(), c.as_str()), ("X" | "Z", "X" | "Z"));
        assert!((re - if half { 0.5 } else { 0.0 }).abs() < 1e-9 && im.abs() < 1e-9, "{r}{c}");
    }
    let chi = read_json(&tmp.path().join("chi_Hadamard.json"));
    assert_eq!(chi["basis"], serde_json::json!(["I", "X", "Y", "Z"]));
    assert!((chi["process_fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn qpt_fidelity_in_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    run(r#"{"command":"qpt","preset":"Z_half","seed":3}"#, tmp.path());
    let m = read_json(&tmp.path().join("manifest.json"));
    let fp = m["results"]["process_fidelity"].as_f64().unwrap();
    assert!(fp > 0.9 && fp < 1.0, "{fp}");
    assert_eq!(m["results"]["measurement"]["shots"], 3000);
}

#[test]
fn manifest_lists_every_file() {
    let tmp = tempfile::tempdir().unwrap();
    run(
        r#"{"command":"rb","mode":"abstract","k":10,"interleave":["X_pi","Z_half"],"seed":1}"#,
        tmp.path(),
    );
    let m = read_json(&tmp.path().join("manifest.json"));
    let listed: Vec<&Value> = m["files"].as_array().unwrap().iter().collect();
    let on_disk: Vec<String> = fs::read_dir(tmp.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n != "manifest.json")
        .collect();
    assert_eq!(listed.len(), on_disk.len());
    for f in listed {
        let bytes = fs::read(tmp.path().join(f["path"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"], sha256_hex(&bytes));
        assert_eq!(f["bytes"], bytes.len());
    }
    assert_eq!(m["seed"], 1);
    assert_eq!(m["config"]["k"], 10);
}

#[test]
fn rb_abstract_recovers_injected_p() {
    let tmp = tempfile::tempdir().unwrap();
    let report = run(
        r#"{"command":"rb","mode":"abstract","depolarizing_p":0.995,"gate_p":0.999,
            "interleave":"X_pi","seed":9}"#,
        tmp.path(),
    );
    let p = report.results["reference"]["p"].as_f64().unwrap();
    assert!((p - 0.995).abs() < 1e-9);
    let fg = report.results["interleaved"]["X_pi"]["F_g"].as_f64().unwrap();
    assert!((fg - (1.0 - 0.5 * 0.001)).abs() < 1e-6, "{fg}");
    let rows = fs::read_to_string(tmp.path().join("rb_interleaved_X_pi.csv")).unwrap();
    assert!(rows.starts_with("m,f_seq,stderr,kind\n"));
    assert!(rows.lines().nth(1).unwrap().ends_with(",interleaved:X_pi"));
    let fit = read_json(&tmp.path().join("fit_reference.json"));
    for key in ["A0", "B0", "p", "r", "residual_norm"] {
        assert!(fit["fit"][key].is_number(), "{key}");
    }
    assert_eq!(fit["seed"], 9);
}

#[test]
fn rb_fit_failure_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let report = run(
        r#"{"command":"rb","mode":"abstract","depolarizing_p":1.0,"lengths":[1,2,3,4],"k":2}"#,
        tmp.path(),
    );
    assert_eq!(report.exit_code(), 3);
    let fit = read_json(&tmp.path().join("fit_reference.json"));
    assert!(fit["fit"]["error"].as_str().unwrap().contains("no decay"));
}

#[test]
fn binary_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let ok = stagate()
        .args(["synth", "--out"])
        .arg(&out)
        .args(["--set", "preset=Z_pi", "--set", "levels=[\"cd\"]"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(out.join("waveform_Z_pi_cd.csv").exists());
    assert!(!out.join("waveform_Z_pi_reference.csv").exists());

    let cfg = tmp.path().join("cfg.json");
    fs::write(&cfg, r#"{"command":"synth","preset":"X_pi","T_ns":-3}"#).unwrap();
    let bad = stagate().args(["synth", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("T_ns"));

    let unknown = stagate().args(["synth", "--set", "colour=red"]).output().unwrap();
    assert_eq!(unknown.status.code(), Some(2));
    let missing = stagate().args(["qpt", "--config", "/nonexistent/cfg.json"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(4));

    let blocker = tmp.path().join("file");
    fs::write(&blocker, b"").unwrap();
    let io = stagate().args(["synth", "--out"]).arg(blocker.join("sub")).output().unwrap();
    assert_eq!(io.status.code(), Some(4));

    let fit = stagate()
        .args(["rb", "--out"])
        .arg(tmp.path().join("rb"))
        .args(["--set", "mode=abstract", "--set", "depolarizing_p=1", "--set", "k=2"])
        .output()
        .unwrap();
    assert_eq!(fit.status.code(), Some(3));
}

#[test]
fn threads_do_not_change_results() {
    let tmp = tempfile::tempdir().unwrap();
    let mut outputs = vec![];
    for threads in ["1", "3"] {
        let out = tmp.path().join("rb");
        let st = stagate()
            .env("STAGATE_THREADS", threads)
            .args(["rb", "--seed", "4", "--out"])
            .arg(&out)
            .args(["--set", "mode=abstract", "--set", "shots=5000", "--set", "k=30"])
            .status()
            .unwrap();
        outputs.push((st.code(), fs::read(out.join("rb_reference.csv")).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn config_errors_are_distinct() {
    let kinds: Vec<&str> = [
        "{",
        r#"{"command":"synth","bogus":1}"#,
        r#"{"command":"synth","T1_ns":0}"#,
    ]
    .iter()
    .map(|t| parse_config(t).unwrap_err())
    .map(|e: CliError| e.kind())
    .collect();
    assert_eq!(kinds, ["syntax", "unknown_key", "constraint"]);
}
