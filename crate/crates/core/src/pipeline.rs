//! Configuration-driven runs of the whole workflow and geometry scans.
//!
//! A run reads integrals, prepares LUCJ parameters, simulates and samples
//! the circuit (or loads external samples), applies readout noise, recovers
//! the sector-violating shots and finishes with either a tensor-product
//! diagonalization or the sample-driven selection. `fci` and
//! `classical_hci` skip the sampling stages.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::determinants::HalfConfiguration;
use crate::error::{Error, Result};
use crate::integrals::{parse_fcidump, IntegralTable};
use crate::lucj::{
    apply_readout_noise, build_full_circuit, build_half_circuit, gate_stats, hf_occupation, mp2_parameters,
    optimize_parameters, sample, simulate_statevector, CouplingMap, GateStats, LucjParameters, OptimizeOptions,
    SampleSet,
};
use crate::recovery::{batch_energy, recover, unique_halves, Layout, RecoveryConfig, RecoveryTrace};
use crate::selection::{classical_hci, hci_select_from_samples, IterationTrace, SelectionConfig, StopReason};
use crate::solver::{fci_energy_with, sector_dimension, tensor_ground_state, SolverOptions, DEFAULT_FCI_CAP};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Half-qubit sampling, tensor-product diagonalization.
    #[default]
    Hsqd,
    /// Full-qubit sampling, tensor-product diagonalization.
    Sqd,
    /// Half-qubit sampling, sample-driven selection.
    HciHsqd,
    /// Full-qubit sampling, sample-driven selection.
    HciSqd,
    ClassicalHci,
    Fci,
}

impl Mode {
    pub const ALL: [Mode; 6] = [
        Mode::Hsqd,
        Mode::Sqd,
        Mode::HciHsqd,
        Mode::HciSqd,
        Mode::ClassicalHci,
        Mode::Fci,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Hsqd => "hsqd",
            Mode::Sqd => "sqd",
            Mode::HciHsqd => "hci_hsqd",
            Mode::HciSqd => "hci_sqd",
            Mode::ClassicalHci => "classical_hci",
            Mode::Fci => "fci",
        }
    }

    pub fn samples(self) -> bool {
        !matches!(self, Mode::ClassicalHci | Mode::Fci)
    }

    /// Samples cover both spin registers.
    pub fn full_register(self) -> bool {
        matches!(self, Mode::Sqd | Mode::HciSqd)
    }

    pub fn selects(self) -> bool {
        matches!(self, Mode::HciHsqd | Mode::HciSqd)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown mode {s:?}")))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LucjConfig {
    /// Starting point when no parameter file is given.
    pub init: ParameterInit,
    /// Used when no parameter file is given.
    pub layers: usize,
    /// Jastrow strength of `mp2` layers relative to the MP2 factors.
    pub doubles_scale: f64,
    /// `K₂` strength relative to the MP2 row norms.
    pub singles_scale: f64,
    /// Optimize the parameters before sampling, starting from the file or zeros.
    pub optimize: bool,
    pub coupling: CouplingMap,
    pub max_iters: u64,
    pub restarts: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParameterInit {
    #[default]
    Zeros,
    /// Factorized MP2 doubles plus a singles rotation.
    Mp2,
}

impl Default for LucjConfig {
    fn default() -> Self {
        LucjConfig {
            init: ParameterInit::Zeros,
            layers: 1,
            doubles_scale: 1.0,
            singles_scale: 5.0,
            optimize: false,
            coupling: CouplingMap::AllToAll,
            max_iters: 2000,
            restarts: 6,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub fcidump: PathBuf,
    /// LUCJ parameter file (JSON).
    pub params: Option<PathBuf>,
    /// Measured samples in text form; replaces simulation when present.
    pub samples: Option<PathBuf>,
    pub mode: Mode,
    pub shots: u64,
    pub p_flip: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Compute a reference energy for the error column.
    pub reference: bool,
    /// Largest sector dimension for which the reference is exact.
    pub fci_cap: u64,
    pub lucj: LucjConfig,
    pub recovery: RecoveryConfig,
    pub selection: SelectionConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            fcidump: PathBuf::new(),
            params: None,
            samples: None,
            mode: Mode::Hsqd,
            shots: 100_000,
            p_flip: 0.0,
            seed: 0,
            out: None,
            reference: true,
            fci_cap: DEFAULT_FCI_CAP as u64,
            lucj: LucjConfig::default(),
            recovery: RecoveryConfig::default(),
            selection: SelectionConfig::default(),
        }
    }
}

impl PipelineConfig {
    /// Parses TOML; relative paths are taken relative to `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let fix = |p: &mut PathBuf| {
            if p.is_relative() && !p.as_os_str().is_empty() {
                *p = base.join(&*p);
            }
        };
        fix(&mut cfg.fcidump);
        cfg.params.as_mut().map(fix);
        cfg.samples.as_mut().map(fix);
        cfg.out.as_mut().map(fix);
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base)
    }

    pub fn validate(&self) -> Result<()> {
        if self.fcidump.as_os_str().is_empty() {
            return Err(Error::Config("fcidump path is required".into()));
        }
        let mut files = vec![&self.fcidump];
        if self.mode.samples() {
            files.extend(self.params.iter().chain(&self.samples));
        }
        for f in files {
            if !f.is_file() {
                return Err(Error::Config(format!("{} does not exist", f.display())));
            }
        }
        if self.mode.samples() && self.samples.is_none() && self.shots == 0 {
            return Err(Error::Config("shots must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.p_flip) {
            return Err(Error::Config(format!("p_flip = {} outside [0, 1]", self.p_flip)));
        }
        if self.lucj.layers == 0 {
            return Err(Error::Config("lucj.layers must be at least 1".into()));
        }
        for (name, v) in [
            ("doubles_scale", self.lucj.doubles_scale),
            ("singles_scale", self.lucj.singles_scale),
        ] {
            if !v.is_finite() {
                return Err(Error::Config(format!("lucj.{name} = {v} is not finite")));
            }
        }
        self.recovery.validate()?;
        self.selection.validate()
    }

    /// SHA-256 over the effective configuration (output directory excluded)
    /// and the bytes of every input file.
    pub fn hash(&self) -> Result<String> {
        let mut h = Sha256::new();
        let inputs = PipelineConfig {
            out: None,
            ..self.clone()
        };
        h.update(serde_json::to_vec(&inputs)?);
        for f in std::iter::once(&self.fcidump).chain(&self.params).chain(&self.samples) {
            h.update(fs::read(f)?);
        }
        Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
    }
}

/// Seeds for each random stage, drawn in a fixed order from the config seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StageSeeds {
    pub optimize: u64,
    pub sample: u64,
    pub noise: u64,
    pub recovery: u64,
}

impl StageSeeds {
    pub fn derive(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        StageSeeds {
            optimize: rng.next_u64(),
            sample: rng.next_u64(),
            noise: rng.next_u64(),
            recovery: rng.next_u64(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StageReport {
    pub name: String,
    pub energy: Option<f64>,
    pub subspace_size: Option<usize>,
    pub wallclock_s: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CircuitReport {
    pub full_qubits: usize,
    pub half_qubits: usize,
    pub full: GateStats,
    pub half: GateStats,
}

#[derive(Clone, Debug, Serialize)]
pub struct Reference {
    /// `fci` or `classical_hci`.
    pub method: String,
    pub energy: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelectionReport {
    pub stop_reason: StopReason,
    pub peak_candidates: usize,
    pub sample_halves: usize,
    pub trace: Vec<IterationTrace>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub mode: Mode,
    pub fcidump: String,
    pub config_hash: String,
    pub seed: u64,
    pub seeds: StageSeeds,
    pub norb: usize,
    pub nelec: usize,
    pub energy: f64,
    pub subspace_size: usize,
    pub reference: Option<Reference>,
    pub error_ha: Option<f64>,
    pub shots: Option<u64>,
    pub valid_fraction: Option<f64>,
    pub final_valid_fraction: Option<f64>,
    pub circuit: Option<CircuitReport>,
    pub stages: Vec<StageReport>,
    pub recovery: Option<RecoveryTrace>,
    pub selection: Option<SelectionReport>,
    pub wallclock_s: f64,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

struct Run<'a> {
    cfg: &'a PipelineConfig,
    stages: Vec<StageReport>,
}

impl Run<'_> {
    /// Runs `f` as a named stage; errors carry the stage name.
    fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> Result<(T, Option<f64>, Option<usize>)>) -> Result<T> {
        let t0 = Instant::now();
        let (v, energy, subspace_size) = f().map_err(|e| e.context(format!("stage {name}")))?;
        self.stages.push(StageReport {
            name: name.to_string(),
            energy,
            subspace_size,
            wallclock_s: t0.elapsed().as_secs_f64(),
        });
        Ok(v)
    }

    fn artifact(&self, name: &str, contents: &str) -> Result<()> {
        if let Some(dir) = &self.cfg.out {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(name), contents)?;
        }
        Ok(())
    }
}

fn solver(cfg: &PipelineConfig) -> SolverOptions {
    SolverOptions {
        tol: cfg.recovery.solver_tol,
        ..Default::default()
    }
}

fn reference_energy(table: &IntegralTable, cfg: &PipelineConfig) -> Result<Reference> {
    let dim = sector_dimension(table.norb(), table.n_alpha(), table.n_beta());
    if dim <= cfg.fci_cap as u128 {
        let g = fci_energy_with(table, cfg.fci_cap as u128, &solver(cfg))?;
        Ok(Reference {
            method: "fci".into(),
            energy: g.energy,
        })
    } else {
        let r = classical_hci(table, &cfg.selection)?;
        Ok(Reference {
            method: "classical_hci".into(),
            energy: r.energy(),
        })
    }
}

fn load_parameters(
    table: &IntegralTable,
    cfg: &PipelineConfig,
    seeds: &StageSeeds,
) -> Result<(LucjParameters, Option<f64>)> {
    let norb = table.norb();
    let mut p = match &cfg.params {
        Some(path) => LucjParameters::from_json(&fs::read_to_string(path)?)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?,
        None => match cfg.lucj.init {
            ParameterInit::Zeros => LucjParameters::zeros(norb, cfg.lucj.layers),
            ParameterInit::Mp2 => {
                mp2_parameters(table, cfg.lucj.layers, cfg.lucj.doubles_scale, cfg.lucj.singles_scale)?
            }
        },
    };
    if p.norb != norb {
        return Err(Error::Config(format!(
            "parameter file has norb = {}, integrals have {norb}",
            p.norb
        )));
    }
    let mut energy = None;
    if cfg.lucj.optimize {
        let opts = OptimizeOptions {
            max_iters: cfg.lucj.max_iters,
            seed: seeds.optimize,
            restarts: cfg.lucj.restarts,
            coupling: cfg.lucj.coupling,
            ..Default::default()
        };
        let r = optimize_parameters(&p, table, &opts)?;
        energy = Some(r.energy);
        p = r.params;
    }
    Ok((p, energy))
}

fn layout_for(table: &IntegralTable, mode: Mode) -> Result<Layout> {
    let (norb, na, nb) = (table.norb(), table.n_alpha(), table.n_beta());
    if mode.full_register() {
        Ok(Layout::full(norb, na, nb))
    } else if na == nb {
        Ok(Layout::half(norb, na))
    } else {
        Err(Error::Config(format!(
            "mode {mode} needs a closed-shell sector, got ({na}, {nb})"
        )))
    }
}

/// Executes one pipeline run and writes the report plus stage artifacts to
/// `cfg.out` when set.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunReport> {
    cfg.validate()?;
    let start = Instant::now();
    let seeds = StageSeeds::derive(cfg.seed);
    let config_hash = cfg.hash()?;
    let mut run = Run {
        cfg,
        stages: Vec::new(),
    };
    run.artifact(
        "config.toml",
        &toml::to_string(cfg).map_err(|e| Error::Config(e.to_string()))?,
    )?;

    let table = run.stage("integrals", || {
        let text = fs::read_to_string(&cfg.fcidump)?;
        Ok((parse_fcidump(&text)?, None, None))
    })?;
    let reference = if cfg.reference && cfg.mode != Mode::Fci {
        Some(run.stage("reference", || {
            let r = reference_energy(&table, cfg)?;
            let e = r.energy;
            Ok((r, Some(e), None))
        })?)
    } else {
        None
    };

    let mut report = RunReport {
        mode: cfg.mode,
        fcidump: cfg.fcidump.display().to_string(),
        config_hash,
        seed: cfg.seed,
        seeds,
        norb: table.norb(),
        nelec: table.nelec(),
        energy: f64::NAN,
        subspace_size: 0,
        reference,
        error_ha: None,
        shots: None,
        valid_fraction: None,
        final_valid_fraction: None,
        circuit: None,
        stages: Vec::new(),
        recovery: None,
        selection: None,
        wallclock_s: 0.0,
    };

    match cfg.mode {
        Mode::Fci => {
            let g = run.stage("fci", || {
                let dim = sector_dimension(table.norb(), table.n_alpha(), table.n_beta());
                let g = fci_energy_with(&table, cfg.fci_cap as u128, &solver(cfg))?;
                let e = g.energy;
                Ok(((e, dim as usize), Some(e), Some(dim as usize)))
            })?;
            (report.energy, report.subspace_size) = g;
            report.reference = Some(Reference {
                method: "fci".into(),
                energy: g.0,
            });
        }
        Mode::ClassicalHci => {
            let r = run.stage("selection", || {
                let r = classical_hci(&table, &cfg.selection)?;
                let (e, n) = (r.energy(), r.len());
                Ok((r, Some(e), Some(n)))
            })?;
            run.artifact("subspace.txt", &r.dump(table.norb()))?;
            report.energy = r.energy();
            report.subspace_size = r.len();
            report.selection = Some(SelectionReport {
                stop_reason: r.stop_reason,
                peak_candidates: r.peak_candidates,
                sample_halves: 0,
                trace: r.trace,
            });
        }
        mode => sampled(&mut run, &table, mode, &seeds, &mut report)?,
    }

    report.error_ha = report.reference.as_ref().map(|r| report.energy - r.energy);
    report.stages = run.stages;
    report.wallclock_s = start.elapsed().as_secs_f64();
    if let Some(dir) = &cfg.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.json"), report.to_json())?;
    }
    Ok(report)
}

fn sampled(run: &mut Run, table: &IntegralTable, mode: Mode, seeds: &StageSeeds, report: &mut RunReport) -> Result<()> {
    let cfg = run.cfg;
    let norb = table.norb();
    let (na, nb) = (table.n_alpha(), table.n_beta());
    let layout = layout_for(table, mode)?;

    let raw = match &cfg.samples {
        Some(path) => run.stage("load-samples", || {
            let s = SampleSet::from_text(&fs::read_to_string(path)?)?;
            if s.bit_len != layout.bit_len() {
                return Err(Error::Layout(format!(
                    "sample file has {}-bit strings, mode {mode} expects {}",
                    s.bit_len,
                    layout.bit_len()
                )));
            }
            Ok((s, None, None))
        })?,
        None => {
            let (params, opt_energy) = run.stage("parameters", || {
                let (p, e) = load_parameters(table, cfg, seeds)?;
                Ok(((p, e), e, None))
            })?;
            if opt_energy.is_some() {
                run.artifact("params.json", &params.to_json())?;
            }
            let circuit = run.stage("circuit", || {
                let full = build_full_circuit(&params, norb, cfg.lucj.coupling)?;
                let half = build_half_circuit(&params, norb, cfg.lucj.coupling)?;
                let stats = CircuitReport {
                    full_qubits: full.nqubits,
                    half_qubits: half.nqubits,
                    full: gate_stats(&full),
                    half: gate_stats(&half),
                };
                let c = if mode.full_register() { full } else { half };
                Ok(((c, stats), None, None))
            })?;
            report.circuit = Some(circuit.1);
            run.stage("sample", || {
                let init = hf_occupation(norb, na, nb, mode.full_register());
                let psi = simulate_statevector(&circuit.0, init)?;
                Ok((sample(&psi, cfg.shots, seeds.sample), None, None))
            })?
        }
    };
    run.artifact("samples.txt", &raw.to_text())?;
    let noisy = if cfg.p_flip > 0.0 {
        let s = run.stage("noise", || {
            Ok((apply_readout_noise(&raw, cfg.p_flip, seeds.noise)?, None, None))
        })?;
        run.artifact("samples_noisy.txt", &s.to_text())?;
        s
    } else {
        raw
    };
    report.shots = Some(noisy.shots);

    let mut rcfg = cfg.recovery.clone();
    rcfg.seed = seeds.recovery;
    let rec = run.stage("recovery", || {
        let r = recover(&noisy, table, &layout, &rcfg)?;
        let e = r.best.as_ref().map(|g| g.energy);
        Ok((r, e, None))
    })?;
    run.artifact("samples_recovered.txt", &rec.samples().to_text())?;
    report.valid_fraction = Some(rec.trace.valid_fraction);
    report.final_valid_fraction = Some(rec.trace.final_valid_fraction);
    let halves: Vec<HalfConfiguration> = unique_halves(rec.samples().counts.keys(), &layout);

    if mode.selects() {
        let r = run.stage("selection", || {
            let r = hci_select_from_samples(&halves, table, &cfg.selection)?;
            let (e, n) = (r.energy(), r.len());
            Ok((r, Some(e), Some(n)))
        })?;
        run.artifact("subspace.txt", &r.dump(norb))?;
        report.energy = r.energy();
        report.subspace_size = r.len();
        report.selection = Some(SelectionReport {
            stop_reason: r.stop_reason,
            peak_candidates: r.peak_candidates,
            sample_halves: halves.len(),
            trace: r.trace,
        });
    } else {
        let (e, size) = run.stage("diagonalize", || {
            let dim = (halves.len() as u128).pow(2);
            let (mut e, mut size) = if dim <= rcfg.max_dim as u128 {
                let (g, _) = tensor_ground_state(halves.clone(), halves.clone(), table, &solver(cfg))?;
                (g.energy, dim as usize)
            } else {
                let (g, sizes) = batch_energy(&rec, table, &layout, &rcfg)?;
                (g.energy, sizes.into_iter().max().unwrap_or(0))
            };
            if let Some(b) = rec.best.as_ref().filter(|b| b.energy < e) {
                e = b.energy;
                size = rec
                    .trace
                    .cycles
                    .iter()
                    .flat_map(|c| c.subspace_sizes.iter().copied())
                    .max()
                    .unwrap_or(size);
            }
            Ok(((e, size), Some(e), Some(size)))
        })?;
        report.energy = e;
        report.subspace_size = size;
    }
    report.recovery = Some(rec.trace);
    Ok(())
}

/// Reads the integral file named by `cfg`.
pub fn load_table(cfg: &PipelineConfig) -> Result<IntegralTable> {
    let text =
        fs::read_to_string(&cfg.fcidump).map_err(|e| Error::Config(format!("{}: {e}", cfg.fcidump.display())))?;
    parse_fcidump(&text)
}

/// Register layout of the samples `cfg.mode` consumes.
pub fn sample_layout(table: &IntegralTable, cfg: &PipelineConfig) -> Result<Layout> {
    layout_for(table, cfg.mode)
}

/// Parameters, circuit, simulation, sampling and noise as one step.
pub fn sample_stage(cfg: &PipelineConfig, table: &IntegralTable) -> Result<(SampleSet, CircuitReport)> {
    let seeds = StageSeeds::derive(cfg.seed);
    let norb = table.norb();
    let full_register = cfg.mode.full_register();
    layout_for(table, cfg.mode)?;
    let (params, _) = load_parameters(table, cfg, &seeds).map_err(|e| e.context("stage parameters"))?;
    let full = build_full_circuit(&params, norb, cfg.lucj.coupling)?;
    let half = build_half_circuit(&params, norb, cfg.lucj.coupling)?;
    let stats = CircuitReport {
        full_qubits: full.nqubits,
        half_qubits: half.nqubits,
        full: gate_stats(&full),
        half: gate_stats(&half),
    };
    let circ = if full_register { full } else { half };
    let psi = simulate_statevector(
        &circ,
        hf_occupation(norb, table.n_alpha(), table.n_beta(), full_register),
    )
    .map_err(|e| e.context("stage sample"))?;
    let mut s = sample(&psi, cfg.shots, seeds.sample);
    if cfg.p_flip > 0.0 {
        s = apply_readout_noise(&s, cfg.p_flip, seeds.noise)?;
    }
    Ok((s, stats))
}

/// Recovery on externally supplied samples with the pipeline's seed.
pub fn recover_stage(
    cfg: &PipelineConfig,
    table: &IntegralTable,
    samples: &SampleSet,
) -> Result<crate::recovery::Recovered> {
    let layout = layout_for(table, cfg.mode)?;
    let mut rcfg = cfg.recovery.clone();
    rcfg.seed = StageSeeds::derive(cfg.seed).recovery;
    recover(samples, table, &layout, &rcfg).map_err(|e| e.context("stage recovery"))
}

/// Selection restricted to the half-configurations of `samples`.
pub fn select_stage(
    cfg: &PipelineConfig,
    table: &IntegralTable,
    samples: &SampleSet,
) -> Result<crate::selection::SelectionResult> {
    let layout = layout_for(table, cfg.mode)?;
    if samples.bit_len != layout.bit_len() {
        return Err(Error::Layout(format!(
            "{}-bit samples, mode {} expects {}",
            samples.bit_len,
            cfg.mode,
            layout.bit_len()
        )));
    }
    let halves = unique_halves(samples.counts.keys(), &layout);
    hci_select_from_samples(&halves, table, &cfg.selection).map_err(|e| e.context("stage selection"))
}

/// One line of the scan table.
#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub geometry: String,
    pub mode: String,
    pub energy_ha: Option<f64>,
    pub error_ha: Option<f64>,
    pub subspace_size: Option<usize>,
    pub shots: Option<u64>,
    pub valid_fraction: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct ScanResult {
    pub rows: Vec<ScanRow>,
    pub reports: Vec<Option<RunReport>>,
    /// `(geometry, message)` for every failed geometry.
    pub failures: Vec<(String, String)>,
}

impl ScanResult {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).map_err(|e| Error::Io(std::io::Error::other(e)))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }
}

/// Label for a geometry: `bond_label` from a sibling metadata JSON file, else
/// the file stem.
pub fn geometry_label(fcidump: &Path) -> String {
    let meta = fcidump.with_extension("json");
    fs::read_to_string(&meta)
        .ok()
        .and_then(|t| serde_json::from_str::<serde_json::Value>(&t).ok())
        .and_then(|v| v.get("bond_label").and_then(|b| b.as_str().map(str::to_string)))
        .unwrap_or_else(|| {
            fcidump
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default()
        })
}

/// Runs `base` once per integral file. Reports go to `<out>/<stem>/`, the
/// table to `<out>/scan.csv`. A failing geometry leaves a row without
/// numbers and does not stop the scan.
pub fn run_scan(base: &PipelineConfig, fcidumps: &[PathBuf]) -> Result<ScanResult> {
    if fcidumps.is_empty() {
        return Err(Error::Config("scan needs at least one fcidump".into()));
    }
    let mut out = ScanResult {
        rows: Vec::new(),
        reports: Vec::new(),
        failures: Vec::new(),
    };
    for f in fcidumps {
        let mut cfg = base.clone();
        cfg.fcidump = f.clone();
        if let Some(dir) = &base.out {
            let stem = f
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            cfg.out = Some(dir.join(stem));
        }
        let geometry = geometry_label(f);
        match run_pipeline(&cfg) {
            Ok(r) => {
                out.rows.push(ScanRow {
                    geometry,
                    mode: r.mode.to_string(),
                    energy_ha: Some(r.energy),
                    error_ha: r.error_ha,
                    subspace_size: Some(r.subspace_size),
                    shots: r.shots,
                    valid_fraction: r.valid_fraction,
                });
                out.reports.push(Some(r));
            }
            Err(e) => {
                out.rows.push(ScanRow {
                    geometry: geometry.clone(),
                    mode: cfg.mode.to_string(),
                    energy_ha: None,
                    error_ha: None,
                    subspace_size: None,
                    shots: None,
                    valid_fraction: None,
                });
                out.failures.push((geometry, e.to_string()));
                out.reports.push(None);
            }
        }
    }
    if let Some(dir) = &base.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("scan.csv"), out.to_csv()?)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_names_round_trip() {
        for m in Mode::ALL {
            assert_eq!(m.name().parse::<Mode>().unwrap(), m);
            let v: Mode = serde_json::from_str(&format!("\"{m}\"")).unwrap();
            assert_eq!(v, m);
        }
        assert!(matches!("hci".parse::<Mode>(), Err(Error::Config(_))));
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        let a = StageSeeds::derive(5);
        assert_eq!(a, StageSeeds::derive(5));
        assert_ne!(a, StageSeeds::derive(6));
        assert_ne!(a.sample, a.noise);
    }

    #[test]
    fn toml_sections_and_relative_paths() {
        let text = "fcidump = \"h2.fcidump\"\nmode = \"hci_hsqd\"\nshots = 10\n[selection]\nepsilon1 = 1e-4\n[recovery]\nmode = \"sccr\"\n[lucj]\ninit = \"mp2\"\nlayers = 3\n";
        let c = PipelineConfig::from_toml(text, Path::new("/tmp/x")).unwrap();
        assert_eq!(c.fcidump, PathBuf::from("/tmp/x/h2.fcidump"));
        assert_eq!(c.mode, Mode::HciHsqd);
        assert_eq!(c.selection.epsilon1, 1e-4);
        assert_eq!((c.lucj.init, c.lucj.layers), (ParameterInit::Mp2, 3));
        assert!(matches!(
            PipelineConfig::from_toml("bogus = 1", Path::new(".")),
            Err(Error::Config(_))
        ));
    }
}
