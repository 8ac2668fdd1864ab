//! Subcommand implementations. Each writes its files through an
//! [`OutputDir`] and returns a JSON summary for the manifest.

use std::time::{SystemTime, UNIX_EPOCH};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use stagate_core::benchmarking::{fit_decay, CurveKind, GateFidelity, RbCurve, RbExperiment, RbFit};
use stagate_core::dynamics::{
    leakage, qubit_gate_fidelity, sta_channel, sta_gate, trajectory, DensityMatrix, Model,
};
use stagate_core::linalg::{bloch_vector, unitarity_defect, CMat};
use stagate_core::pulse::{synthesize_waveform, GateName};
use stagate_core::tomography::{ideal_chi, process_fidelity, reconstruct_chi, run_qpt, BASIS_LABELS};
use stagate_core::units::rad_per_ns_to_mhz;
use stagate_core::Error as CoreError;

use crate::config::{CommandKind, ExperimentConfig};
use crate::error::CliError;
use crate::output::{fmt_csv, FileRecord, OutputDir};

/// Outcome of a completed run. `failure` is set when every file was written
/// but a numerical step (an RB fit) failed.
#[derive(Debug)]
pub struct RunReport {
    pub files: Vec<FileRecord>,
    pub results: Value,
    pub failure: Option<CliError>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        self.failure.as_ref().map_or(0, CliError::exit_code)
    }
}

fn unix_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

fn matrix_parts(m: &CMat) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let part = |f: fn(&stagate_core::linalg::C64) -> f64| {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
            .collect()
    };
    (part(|z| z.re), part(|z| z.im))
}

/// Run the configured command, write its files and the manifest.
pub fn execute(cfg: &ExperimentConfig) -> Result<RunReport, CliError> {
    let started = unix_ms();
    let mut out = OutputDir::create(&cfg.out_dir)?;
    let (results, failure) = match cfg.command {
        CommandKind::Synth => (cmd_synth(cfg, &mut out)?, None),
        CommandKind::Evolve => (cmd_evolve(cfg, &mut out)?, None),
        CommandKind::Qpt => (cmd_qpt(cfg, &mut out)?, None),
        CommandKind::Rb => cmd_rb(cfg, &mut out)?,
    };
    let manifest = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "command": cfg.command.as_str(),
        "config": serde_json::to_value(cfg).expect("config serializes"),
        "seed": cfg.seed,
        "started_unix_ms": started as u64,
        "finished_unix_ms": unix_ms() as u64,
        "files": out.files(),
        "results": results,
        "status": failure.as_ref().map_or("ok".to_string(), |e| e.to_string()),
    });
    out.write_manifest(&manifest)?;
    Ok(RunReport {
        files: out.files().to_vec(),
        results,
        failure,
    })
}

pub fn cmd_synth(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    let preset = cfg.preset();
    let name = preset.name.as_str();
    let mut emitted = Vec::new();
    for level in &cfg.levels {
        let corr = level.corrections();
        let w = synthesize_waveform(&preset, corr, cfg.dt(), cfg.delta2())?;
        let label = corr.label();
        let csv_name = format!("waveform_{name}_{label}.csv");
        out.write_csv(
            &csv_name,
            &["t_ns", "bx_mhz", "by_mhz", "bz_mhz"],
            w.times().zip(w.samples()).map(|(t, b)| {
                [t, b.bx, b.by, b.bz]
                    .into_iter()
                    .enumerate()
                    .map(|(i, v)| fmt_csv(if i == 0 { v } else { rad_per_ns_to_mhz(v) }))
                    .collect::<Vec<_>>()
            }),
        )?;
        out.write_json(
            &format!("waveform_{name}_{label}.json"),
            &json!({
                "preset": name,
                "corrections": {"cd": corr.counter_diabatic, "drag": corr.drag},
                "A_mhz": cfg.a_mhz,
                "T_ns": cfg.t_ns,
                "dt_ns": w.dt(),
                "delta2_mhz": cfg.delta2_mhz,
                "samples": w.len(),
                "data": csv_name,
            }),
        )?;
        emitted.push(json!({"corrections": label, "samples": w.len()}));
    }
    Ok(json!({ "preset": name, "waveforms": emitted }))
}

pub fn cmd_evolve(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    let preset = cfg.preset();
    let name = preset.name.as_str();
    let params = cfg.simulation();
    let prop = sta_gate(&preset, &params)?;
    let fidelity = qubit_gate_fidelity(&prop, &preset.target_unitary);
    let leak = match params.model {
        Model::ThreeLevel => Some(leakage(&prop)?),
        Model::TwoLevel => None,
    };
    let defect = unitarity_defect(&prop.matrix);
    let (re, im) = matrix_parts(&prop.matrix);
    let results = json!({
        "preset": name,
        "model": params.model.as_str(),
        "corrections": params.corrections.label(),
        "gate_fidelity": fidelity,
        "leakage": leak,
        "unitarity_defect": defect,
    });
    let mut record = results.clone();
    record["re"] = json!(re);
    record["im"] = json!(im);
    out.write_json(&format!("propagator_{name}.json"), &record)?;

    let w = synthesize_waveform(&preset, params.corrections, cfg.dt(), params.delta2)?;
    let dec = cfg.decoherence_params()?;
    let states = trajectory(
        &w,
        params.model,
        params.delta2,
        &DensityMatrix::basis(params.model, 0),
        &dec,
        params.rule,
    )?;
    let dt = w.dt();
    out.write_csv(
        &format!("trajectory_{name}.csv"),
        &["t_ns", "rx", "ry", "rz"],
        states.iter().enumerate().map(|(k, rho)| {
            let r = bloch_vector(rho);
            vec![fmt_csv(k as f64 * dt), fmt_csv(r[0]), fmt_csv(r[1]), fmt_csv(r[2])]
        }),
    )?;
    let last = bloch_vector(states.last().expect("trajectory is nonempty"));
    let mut results = results;
    results["final_bloch"] = json!(last);
    results["decoherence"] = json!(!dec.is_closed());
    Ok(results)
}

pub fn cmd_qpt(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    let preset = cfg.preset();
    let name = preset.name.as_str();
    let params = cfg.simulation();
    let dec = cfg.decoherence_params()?;
    let mm = cfg.measurement();
    mm.validate()?;
    let channel = sta_channel(&preset, &params, &dec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let data = run_qpt(&channel, &mm, &mut rng);
    let chi = reconstruct_chi(&data)?;
    let fp = process_fidelity(&chi, &ideal_chi(&preset.target_unitary));
    let m = chi.matrix();
    let part = |f: fn(&stagate_core::linalg::C64) -> f64| -> Vec<Vec<f64>> {
        (0..4).map(|i| (0..4).map(|j| f(&m[(i, j)])).collect()).collect()
    };
    let results = json!({
        "preset": name,
        "process_fidelity": fp,
        "decoherence": !dec.is_closed(),
        "measurement": {
            "shots": serde_json::to_value(cfg.shots).expect("serializes"),
            "readout_f0": mm.readout_f0,
            "readout_f1": mm.readout_f1,
            "mitigate_readout": mm.mitigate_readout,
        },
    });
    let mut record = results.clone();
    record["basis"] = json!(BASIS_LABELS);
    record["re"] = json!(part(|z| z.re));
    record["im"] = json!(part(|z| z.im));
    out.write_json(&format!("chi_{name}.json"), &record)?;
    out.write_csv(
        &format!("chi_{name}.csv"),
        &["row", "col", "re", "im"],
        (0..16).map(|k| {
            let (i, j) = (k / 4, k % 4);
            vec![
                BASIS_LABELS[i].to_string(),
                BASIS_LABELS[j].to_string(),
                fmt_csv(m[(i, j)].re),
                fmt_csv(m[(i, j)].im),
            ]
        }),
    )?;
    Ok(results)
}

/// All `k` samples at every length, evaluated in parallel and laid out as
/// `[i·k + rep]`.
fn sample_curve(exp: &RbExperiment, kind: CurveKind) -> RbCurve {
    let cfg = exp.config();
    let k = cfg.k;
    let interleaved = matches!(kind, CurveKind::Interleaved(_));
    let samples: Vec<f64> = (0..cfg.lengths.len() * k)
        .into_par_iter()
        .map(|idx| exp.sample(cfg.lengths[idx / k], idx % k, interleaved))
        .collect();
    exp.aggregate(kind, &samples)
}

fn kind_label(kind: CurveKind) -> String {
    match kind {
        CurveKind::Reference => "reference".into(),
        CurveKind::Interleaved(g) => format!("interleaved:{}", g.as_str()),
    }
}

fn write_curve(out: &mut OutputDir, name: &str, curve: &RbCurve) -> Result<(), CliError> {
    let label = kind_label(curve.kind);
    out.write_csv(
        name,
        &["m", "f_seq", "stderr", "kind"],
        curve.points.iter().map(|p| vec![p.m.to_string(), fmt_csv(p.f_seq), fmt_csv(p.stderr), label.clone()]),
    )
}

fn fit_record(fit: &RbFit) -> Value {
    json!({
        "A0": fit.a0,
        "p": fit.p,
        "B0": fit.b0,
        "p_stderr": fit.p_stderr(),
        "r": fit.average_error(),
        "residual_norm": fit.residual_norm,
        "iterations": fit.iterations,
        "covariance": fit.covariance,
    })
}

fn failure_record(e: &CoreError) -> Value {
    let best = match e {
        CoreError::Fit { best: Some(f), .. } => fit_record(f),
        _ => Value::Null,
    };
    json!({ "error": e.to_string(), "best": best })
}

pub fn cmd_rb(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(Value, Option<CliError>), CliError> {
    let gates = cfg.interleaved_gates()?;
    let config_echo = serde_json::to_value(cfg).expect("config serializes");
    let mut failure: Option<CliError> = None;

    let experiments: Vec<(Option<GateName>, RbExperiment)> = if gates.is_empty() {
        vec![(None, RbExperiment::new(cfg.rb_config(None)?)?)]
    } else {
        gates
            .iter()
            .map(|&g| Ok((Some(g), RbExperiment::new(cfg.rb_config(Some(g))?)?)))
            .collect::<Result<_, CliError>>()?
    };

    let reference = sample_curve(&experiments[0].1, CurveKind::Reference);
    write_curve(out, "rb_reference.csv", &reference)?;
    let ref_fit = fit_decay(&reference.fit_points());
    let ref_json = match &ref_fit {
        Ok(f) => {
            let mut v = fit_record(f);
            v["fidelity"] = json!(1.0 - f.average_error());
            v
        }
        Err(e) => {
            failure.get_or_insert_with(|| CliError::Core(e.clone()));
            failure_record(e)
        }
    };
    out.write_json(
        "fit_reference.json",
        &json!({
            "kind": "reference",
            "fit": ref_json,
            "seed": cfg.seed,
            "config": config_echo,
        }),
    )?;

    let row = |curve: &str, p: Option<f64>, p_err: Option<f64>, fid: Option<f64>, fid_err: Option<f64>| {
        let f = |x: Option<f64>| x.map(fmt_csv).unwrap_or_default();
        vec![curve.to_string(), f(p), f(p_err), f(fid), f(fid_err)]
    };
    let mut summary = vec![match &ref_fit {
        Ok(f) => row(
            "reference",
            Some(f.p),
            Some(f.p_stderr()),
            Some(1.0 - f.average_error()),
            Some(0.5 * f.p_stderr()),
        ),
        Err(_) => row("reference", None, None, None, None),
    }];
    let mut gate_results = serde_json::Map::new();

    for (gate, exp) in &experiments {
        let Some(g) = gate else { continue };
        let gname = g.as_str();
        let curve = sample_curve(exp, CurveKind::Interleaved(*g));
        write_curve(out, &format!("rb_interleaved_{gname}.csv"), &curve)?;
        let fit = fit_decay(&curve.fit_points());
        let (fit_json, fg) = match (&fit, &ref_fit) {
            (Ok(fi), Ok(fr)) => match GateFidelity::from_fits(fr, fi) {
                Ok(fg) => (fit_record(fi), Some(fg)),
                Err(e) => {
                    failure.get_or_insert_with(|| CliError::Core(e.clone()));
                    (fit_record(fi), None)
                }
            },
            (Ok(fi), Err(_)) => (fit_record(fi), None),
            (Err(e), _) => {
                failure.get_or_insert_with(|| CliError::Core(e.clone()));
                (failure_record(e), None)
            }
        };
        let mut fit_json = fit_json;
        if let Some(fg) = fg {
            fit_json["F_g"] = json!(fg.value);
            fit_json["F_g_stderr"] = json!(fg.stderr);
            fit_json["ratio_above_one"] = json!(fg.ratio_above_one);
        }
        out.write_json(
            &format!("fit_interleaved_{gname}.json"),
            &json!({
                "kind": kind_label(curve.kind),
                "fit": fit_json,
                "seed": cfg.seed,
                "config": config_echo,
            }),
        )?;
        summary.push(row(
            &kind_label(curve.kind),
            fit.as_ref().ok().map(|f| f.p),
            fit.as_ref().ok().map(|f| f.p_stderr()),
            fg.map(|f| f.value),
            fg.map(|f| f.stderr),
        ));
        gate_results.insert(
            gname.to_string(),
            json!({
                "p": fit.as_ref().ok().map(|f| f.p),
                "F_g": fg.map(|f| f.value),
                "F_g_stderr": fg.map(|f| f.stderr),
            }),
        );
    }
    out.write_csv(
        "rb_summary.csv",
        &["curve", "p", "p_stderr", "fidelity", "fidelity_stderr"],
        summary,
    )?;
    let results = json!({
        "reference": {
            "p": ref_fit.as_ref().ok().map(|f| f.p),
            "fidelity": ref_fit.as_ref().ok().map(|f| 1.0 - f.average_error()),
        },
        "interleaved": gate_results,
    });
    Ok((results, failure))
}
