use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use hsqd::determinants::{diagonal_element, Determinant};
use hsqd::integrals::write_fcidump;
use hsqd::lucj::{build_full_circuit, build_half_circuit, gate_stats, CouplingMap, LucjParameters, SampleSet};
use hsqd::pipeline::{
    load_table, recover_stage, run_pipeline, run_scan, sample_stage, select_stage, Mode, PipelineConfig,
};
use hsqd::selection::classical_hci;
use hsqd::solver::{fci_energy_with, SolverOptions};
use hsqd::Error;

#[derive(Parser)]
#[command(
    name = "hsqd",
    version,
    about = "Half-qubit sample-based diagonalization with HCI-style selection"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Pipeline configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    mode: Option<String>,
    #[arg(long, global = true)]
    shots: Option<u64>,
    #[arg(long = "p-flip", global = true)]
    p_flip: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse an FCIDUMP and print a summary.
    Parse { fcidump: PathBuf },
    /// Exact ground-state energy.
    Fci { fcidump: Option<PathBuf> },
    /// Classical variational HCI.
    Hci { fcidump: Option<PathBuf> },
    /// Simulate the LUCJ circuit and write measured samples.
    Sample {
        fcidump: Option<PathBuf>,
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Correct sector-violating samples.
    Recover {
        fcidump: Option<PathBuf>,
        #[arg(long)]
        samples: PathBuf,
    },
    /// Select a subspace from corrected samples.
    Select {
        fcidump: Option<PathBuf>,
        #[arg(long)]
        samples: PathBuf,
    },
    /// Run the configured workflow.
    Pipeline { fcidump: Option<PathBuf> },
    /// Run the configured workflow once per FCIDUMP.
    Scan {
        #[arg(required = true)]
        fcidumps: Vec<PathBuf>,
    },
    /// Gate counts of full and half circuits.
    GateStats {
        #[arg(long)]
        norb: Option<usize>,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        layers: usize,
        #[arg(long)]
        linear: bool,
    },
}

fn config(g: &Global, fcidump: Option<&PathBuf>) -> hsqd::Result<PipelineConfig> {
    let mut cfg = match &g.config {
        Some(p) => PipelineConfig::from_file(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(f) = fcidump {
        cfg.fcidump = f.clone();
    }
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(o) = &g.out {
        cfg.out = Some(o.clone());
    }
    if let Some(m) = &g.mode {
        cfg.mode = m.parse::<Mode>()?;
    }
    if let Some(n) = g.shots {
        cfg.shots = n;
    }
    if let Some(p) = g.p_flip {
        cfg.p_flip = p;
    }
    Ok(cfg)
}

/// Writes `text` to `<out>/<name>` or stdout.
fn emit(out: Option<&Path>, name: &str, text: &str) -> hsqd::Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(name), text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn read_samples(path: &Path) -> hsqd::Result<SampleSet> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    SampleSet::from_text(&text)
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn run(cli: Cli) -> hsqd::Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Parse { fcidump } => {
            let cfg = config(g, Some(fcidump))?;
            let t = load_table(&cfg)?;
            let hf = diagonal_element(&Determinant::hartree_fock(t.n_alpha(), t.n_beta()), &t);
            let summary = json!({
                "norb": t.norb(), "nelec": t.nelec(), "ms2": t.ms2(), "e_core": t.e_core(),
                "h1_entries": t.h1_entries().count(), "h2_entries": t.h2_entries().count(), "e_hf": hf,
            });
            println!("{}", serde_json::to_string_pretty(&summary)?);
            if let Some(o) = &cfg.out {
                emit(Some(o), "canonical.fcidump", &write_fcidump(&t))?;
            }
        }
        Command::Fci { fcidump } => {
            let cfg = config(g, fcidump.as_ref())?;
            let t = load_table(&cfg)?;
            let opts = SolverOptions {
                tol: cfg.recovery.solver_tol,
                ..Default::default()
            };
            let gs = fci_energy_with(&t, cfg.fci_cap as u128, &opts).map_err(|e| e.context("stage fci"))?;
            let r = json!({ "energy": gs.energy, "residual": gs.residual, "degenerate": gs.degenerate, "occupations": gs.occupations });
            emit(cfg.out.as_deref(), "fci.json", &pretty(&r))?;
        }
        Command::Hci { fcidump } => {
            let cfg = config(g, fcidump.as_ref())?;
            cfg.selection.validate()?;
            let t = load_table(&cfg)?;
            let r = classical_hci(&t, &cfg.selection).map_err(|e| e.context("stage selection"))?;
            emit(cfg.out.as_deref(), "selection.json", &pretty(&r))?;
            if let Some(o) = &cfg.out {
                emit(Some(o), "subspace.txt", &r.dump(t.norb()))?;
            }
        }
        Command::Sample { fcidump, params } => {
            let mut cfg = config(g, fcidump.as_ref())?;
            if params.is_some() {
                cfg.params = params.clone();
            }
            cfg.validate()?;
            let t = load_table(&cfg)?;
            let (s, stats) = sample_stage(&cfg, &t)?;
            emit(cfg.out.as_deref(), "samples.txt", &s.to_text())?;
            if let Some(o) = &cfg.out {
                emit(Some(o), "circuit.json", &pretty(&stats))?;
            }
        }
        Command::Recover { fcidump, samples } => {
            let cfg = config(g, fcidump.as_ref())?;
            cfg.recovery.validate()?;
            let t = load_table(&cfg)?;
            let rec = recover_stage(&cfg, &t, &read_samples(samples)?)?;
            emit(cfg.out.as_deref(), "samples_recovered.txt", &rec.samples().to_text())?;
            if let Some(o) = &cfg.out {
                emit(Some(o), "recovery.json", &pretty(&rec.trace))?;
            }
        }
        Command::Select { fcidump, samples } => {
            let cfg = config(g, fcidump.as_ref())?;
            cfg.selection.validate()?;
            let t = load_table(&cfg)?;
            let r = select_stage(&cfg, &t, &read_samples(samples)?)?;
            emit(cfg.out.as_deref(), "selection.json", &pretty(&r))?;
            if let Some(o) = &cfg.out {
                emit(Some(o), "subspace.txt", &r.dump(t.norb()))?;
            }
        }
        Command::Pipeline { fcidump } => {
            let cfg = config(g, fcidump.as_ref())?;
            let r = run_pipeline(&cfg)?;
            if cfg.out.is_none() {
                println!("{}", r.to_json());
            } else {
                println!("{} energy {:.10} subspace {}", r.mode, r.energy, r.subspace_size);
            }
        }
        Command::Scan { fcidumps } => {
            let cfg = config(g, None)?;
            let r = run_scan(&cfg, fcidumps)?;
            if cfg.out.is_none() {
                print!("{}", r.to_csv()?);
            }
            for (geom, msg) in &r.failures {
                eprintln!("geometry {geom} failed: {msg}");
            }
            if !r.failures.is_empty() {
                return Err(Error::Stage {
                    context: "scan".into(),
                    source: Box::new(Error::Range(format!(
                        "{} of {} geometries failed",
                        r.failures.len(),
                        fcidumps.len()
                    ))),
                });
            }
        }
        Command::GateStats {
            norb,
            params,
            layers,
            linear,
        } => {
            let p = match (params, norb) {
                (Some(f), _) => LucjParameters::from_json(&fs::read_to_string(f)?)?,
                (None, Some(n)) => LucjParameters::random(*n, *layers, 0.5, g.seed.unwrap_or(0)),
                (None, None) => return Err(Error::Config("gate-stats needs --norb or --params".into())),
            };
            let map = if *linear {
                CouplingMap::LinearNearestNeighbor
            } else {
                CouplingMap::AllToAll
            };
            let full = build_full_circuit(&p, p.norb, map)?;
            let half = build_half_circuit(&p, p.norb, map)?;
            let (fs_, hs) = (gate_stats(&full), gate_stats(&half));
            let r = json!({
                "norb": p.norb, "layers": p.layers.len(),
                "full": { "qubits": full.nqubits, "two_qubit": fs_.two_qubit, "one_qubit": fs_.one_qubit, "depth": fs_.depth },
                "half": { "qubits": half.nqubits, "two_qubit": hs.two_qubit, "one_qubit": hs.one_qubit, "depth": hs.depth },
                "two_qubit_ratio": hs.two_qubit as f64 / fs_.two_qubit.max(1) as f64,
            });
            emit(g.out.as_deref(), "gate_stats.json", &pretty(&r))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e.root() {
                Error::Config(_) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}
