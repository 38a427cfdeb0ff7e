//! `multiq`: compile, co-schedule and verify OpenQASM circuits on a zoned
//! neutral-atom device.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use multiq_core::{
    checker, compile_circuit, emit_na, parse_na, parse_openqasm, rebase_to_native, resolve_hardware, run, Circuit,
    HardwareConfig, RunConfig, Verdict, DEFAULT_ORACLE_LIMIT,
};

#[derive(Parser)]
#[command(name = "multiq", version, about = "Multi-programming compiler for zoned neutral-atom processors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile each circuit into a standalone tile.
    Compile(CompileArgs),
    /// Compile, bundle, place, merge, estimate and verify.
    Run(RunArgs),
    /// Verify a merged program against the source circuits.
    Check(CheckArgs),
}

#[derive(Args)]
struct Common {
    /// Hardware description (`key = value [unit]` lines); falls back to $MULTIQ_HW, then the built-in device.
    #[arg(long)]
    hw: Option<PathBuf>,
}

#[derive(Args)]
struct CompileArgs {
    /// OpenQASM files or directories of `.qasm` files.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[command(flatten)]
    common: Common,
    /// Width weight: 0 favours the narrowest layout, 1 the fastest.
    #[arg(long, default_value_t = 0.4)]
    pw: f64,
    /// Look-ahead window of the width planner, in layers.
    #[arg(long, default_value_t = multiq_core::planner::DEFAULT_WINDOW)]
    window: usize,
    #[arg(long, short, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    compile: CompileArgs,
    /// Bundler weight of spatial over temporal utilization.
    #[arg(long, default_value_t = 0.6)]
    alpha: f64,
    /// Placer weight of the conflict cost.
    #[arg(long, default_value_t = 1.0)]
    placer_alpha: f64,
    /// Placer reward per placed tile; derived from the tiles when omitted.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, default_value_t = 20000)]
    sa_iters: usize,
    #[arg(long, default_value_t = 42)]
    sa_seed: u64,
    /// Largest width verified with the dense fallback.
    #[arg(long, default_value_t = DEFAULT_ORACLE_LIMIT)]
    oracle_limit: usize,
}

#[derive(Args)]
struct CheckArgs {
    /// Source OpenQASM files; each file stem must name a tile in the merged program.
    #[arg(required = true)]
    originals: Vec<PathBuf>,
    /// Merged NA program.
    #[arg(long)]
    merged: PathBuf,
    /// Qubit ownership (JSON object of qubit id to label); overrides `@owner` lines.
    #[arg(long)]
    attribution: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = DEFAULT_ORACLE_LIMIT)]
    oracle_limit: usize,
    /// Also write the verdicts here.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct InputRecord {
    label: String,
    path: String,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    version: &'static str,
    hardware: &'a HardwareConfig,
    config: &'a RunConfig,
    inputs: Vec<InputRecord>,
}

#[derive(Serialize)]
struct VerdictRecord<'a> {
    label: &'a str,
    bin: Option<usize>,
    #[serde(flatten)]
    verdict: &'a Verdict,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Compile(a) => cmd_compile(&a),
        Command::Run(a) => cmd_run(&a),
        Command::Check(a) => cmd_check(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Expands directories into their `.qasm` files, sorted by name.
fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("reading {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "qasm"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    if files.is_empty() {
        bail!("no input circuits");
    }
    Ok(files)
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "circuit".into(), |s| s.to_string_lossy().into_owned())
}

/// Labels from file stems; repeats get a numeric suffix.
fn labels(files: &[PathBuf]) -> Vec<String> {
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    files
        .iter()
        .map(|f| {
            let s = stem(f);
            let n = seen.entry(s.clone()).or_insert(0);
            *n += 1;
            if *n == 1 {
                s
            } else {
                format!("{s}_{n}")
            }
        })
        .collect()
}

fn load_circuit(path: &Path, label: &str) -> Result<Circuit> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut c = parse_openqasm(&text).with_context(|| format!("parsing {}", path.display()))?;
    c.name = label.to_string();
    Ok(c)
}

fn check_weight(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        bail!("--{name} must lie in [0, 1], got {v}");
    }
    Ok(())
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn cmd_compile(a: &CompileArgs) -> Result<ExitCode> {
    check_weight("pw", a.pw)?;
    let hw = resolve_hardware(a.common.hw.as_deref())?;
    let files = expand_inputs(&a.inputs)?;
    let mut failed = Vec::new();
    for (path, label) in files.iter().zip(labels(&files)) {
        let tile = load_circuit(path, &label).and_then(|c| Ok(compile_circuit(&c, a.pw, a.window, &hw)?));
        match tile {
            Ok(t) => {
                write(&a.out.join("tiles").join(format!("{label}.tile")), &t.to_json())?;
                println!(
                    "{label}: {} qubits, width {:.1} um, depth {}, {:.1} us",
                    t.n_qubits, t.width_um, t.depth, t.est_time_us
                );
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                failed.push(path.display().to_string());
            }
        }
    }
    if failed.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("{} of {} input(s) failed: {}", failed.len(), files.len(), failed.join(", "));
        Ok(ExitCode::from(2))
    }
}

fn cmd_run(a: &RunArgs) -> Result<ExitCode> {
    let c = &a.compile;
    check_weight("pw", c.pw)?;
    check_weight("alpha", a.alpha)?;
    if a.beta.is_some_and(|b| b.is_nan() || b < 0.0) || a.placer_alpha.is_nan() || a.placer_alpha < 0.0 {
        bail!("--beta and --placer-alpha must be non-negative");
    }
    let hw = resolve_hardware(c.common.hw.as_deref())?;
    let files = expand_inputs(&c.inputs)?;
    let names = labels(&files);
    let circuits: Vec<Circuit> = files.iter().zip(&names).map(|(p, l)| load_circuit(p, l)).collect::<Result<_>>()?;

    let mut config = RunConfig { p_w: c.pw, window: c.window, oracle_limit: a.oracle_limit, ..RunConfig::default() };
    config.bundler.alpha = a.alpha;
    config.bundler.iterations = a.sa_iters;
    config.bundler.seed = a.sa_seed;
    config.placer.alpha = a.placer_alpha;
    config.placer.beta = a.beta;
    config.placer.sa.iterations = a.sa_iters;
    config.placer.sa.seed = a.sa_seed;

    let out = run(&circuits, &config, &hw)?;

    for t in &out.tiles {
        write(&c.out.join("tiles").join(format!("{}.tile", t.label)), &t.to_json())?;
    }
    for (k, bin) in out.bins.iter().enumerate() {
        let dir = c.out.join("bins");
        write(&dir.join(format!("bin{k}.naqasm")), &emit_na(&bin.schedule.program))?;
        write(&dir.join(format!("bin{k}.owners.json")), &json(&bin.schedule.program.qubit_map))?;
    }
    let mut report = out.report.to_json();
    report.push('\n');
    write(&c.out.join("report.json"), &report)?;
    let records: Vec<VerdictRecord> =
        out.verdicts.iter().map(|v| VerdictRecord { label: &v.label, bin: Some(v.bin), verdict: &v.verdict }).collect();
    write(&c.out.join("verdicts.json"), &json(&records))?;
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION"),
        hardware: &hw,
        config: &config,
        inputs: files
            .iter()
            .zip(&names)
            .map(|(p, l)| InputRecord { label: l.clone(), path: p.display().to_string() })
            .collect(),
    };
    write(&c.out.join("manifest.json"), &json(&manifest))?;

    let tp = &out.report.throughput;
    println!(
        "{} circuit(s) in {} bin(s): {:.3}/ms multi, {:.3}/ms sequential, ratio {:.3}",
        out.tiles.len(),
        out.bins.len(),
        tp.tau_per_ms,
        tp.tau_seq_per_ms,
        tp.ratio
    );
    report_verdicts(&records)
}

fn report_verdicts(records: &[VerdictRecord]) -> Result<ExitCode> {
    let mut ok = true;
    for r in records.iter().filter(|r| !r.verdict.equivalent) {
        ok = false;
        eprintln!("FAIL {}: {}", r.label, r.verdict.witness.as_deref().unwrap_or("not equivalent"));
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_check(a: &CheckArgs) -> Result<ExitCode> {
    let hw = resolve_hardware(a.common.hw.as_deref())?;
    let text = fs::read_to_string(&a.merged).with_context(|| format!("reading {}", a.merged.display()))?;
    let program = parse_na(&text).with_context(|| format!("parsing {}", a.merged.display()))?;
    let owners: BTreeMap<usize, String> = match &a.attribution {
        Some(p) => {
            let t = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&t).with_context(|| format!("parsing {}", p.display()))?
        }
        None => program.qubit_map.clone(),
    };
    if owners.is_empty() {
        bail!("{} carries no qubit attribution; pass --attribution", a.merged.display());
    }
    let names = labels(&a.originals);
    let known: BTreeSet<&str> = names.iter().map(String::as_str).collect();
    for l in owners.values().collect::<BTreeSet<_>>() {
        if !known.contains(l.as_str()) {
            log::info!("tile `{l}` has no source circuit and is not checked");
        }
    }

    let mut verdicts = Vec::new();
    for (path, label) in a.originals.iter().zip(&names) {
        let circuit = rebase_to_native(&load_circuit(path, label)?);
        let qubits: Vec<usize> = owners.iter().filter(|(_, l)| *l == label).map(|(&id, _)| id).collect();
        if qubits.is_empty() {
            bail!("no qubits attributed to `{label}` in {}", a.merged.display());
        }
        let v = checker::check(&circuit, &program, &qubits, &hw, a.oracle_limit)
            .with_context(|| format!("checking `{label}`"))?;
        verdicts.push((label.clone(), v));
    }
    let records: Vec<VerdictRecord> =
        verdicts.iter().map(|(l, v)| VerdictRecord { label: l, bin: None, verdict: v }).collect();
    let text = json(&records);
    print!("{text}");
    if let Some(p) = &a.out {
        write(p, &text)?;
    }
    report_verdicts(&records)
}
