use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{Map, Value};

use stagate::{config_from_document, execute, override_value, parse_document, CliError};

#[derive(Parser)]
#[command(name = "stagate", version, about = "Shortcut-to-adiabaticity single-qubit gates: synthesis, simulation, tomography, benchmarking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write control waveforms for each requested correction level.
    Synth(Common),
    /// Propagate a gate; write the propagator and the Bloch trajectory of |0⟩.
    Evolve(Common),
    /// Simulated process tomography; write the χ matrix.
    Qpt(Common),
    /// Reference and interleaved randomized benchmarking.
    Rb(Common),
}

#[derive(Args)]
struct Common {
    /// JSON config document.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed (overrides `seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Override one config key; the value is parsed as JSON, else taken as a string.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Worker threads for parallel sampling.
    #[arg(long, env = "STAGATE_THREADS", hide_env_values = true)]
    threads: Option<usize>,
}

fn document(name: &str, args: &Common) -> Result<Map<String, Value>, CliError> {
    let mut doc = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            parse_document(&text)?
        }
        None => Map::new(),
    };
    doc.insert("command".into(), Value::from(name));
    for kv in &args.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| CliError::Syntax(format!("--set expects key=value, got `{kv}`")))?;
        doc.insert(k.trim().to_string(), override_value(v));
    }
    if let Some(out) = &args.out {
        doc.insert("out_dir".into(), Value::from(out.to_string_lossy().into_owned()));
    }
    if let Some(seed) = args.seed {
        doc.insert("seed".into(), Value::from(seed));
    }
    Ok(doc)
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let (name, args) = match &cli.command {
        Command::Synth(a) => ("synth", a),
        Command::Evolve(a) => ("evolve", a),
        Command::Qpt(a) => ("qpt", a),
        Command::Rb(a) => ("rb", a),
    };
    if let Some(n) = args.threads.filter(|&n| n > 0) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool already initialized: {e}");
        }
    }
    let cfg = config_from_document(document(name, args)?)?;
    let report = execute(&cfg)?;
    for f in &report.files {
        println!("{}", std::path::Path::new(&cfg.out_dir).join(&f.path).display());
    }
    if let Some(e) = &report.failure {
        eprintln!("error [{}]: {e}", e.kind());
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.kind());
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
