//! Heat-bath style selection of a compact determinant subspace.
//!
//! Starting from Hartree–Fock, each iteration looks at the determinants
//! added in the previous iteration (the frontier), proposes every connected
//! determinant whose spin strings are available, and accepts those with
//! `|H_ij c_i| ≥ ε₁`. The sample-driven variant draws spin strings from a
//! set of measured half-configurations and never forms their full tensor
//! product; the classical variant allows every string.

use std::collections::{BTreeMap, HashSet};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::determinants::{combine, degree, doubles, singles, slater_condon, Determinant, HalfConfiguration};
use crate::error::{Error, Result};
use crate::integrals::IntegralTable;
use crate::solver::{occupations, solve_ground, GroundState, GrowingHamiltonian, SolverOptions, Subspace};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionConfig {
    /// Threshold on `|H_ij c_i|` in Hartree.
    pub epsilon1: f64,
    pub target_size: usize,
    /// Stop once consecutive energies differ by less than this.
    pub energy_tol: f64,
    /// Stop when an iteration accepts fewer determinants than this.
    pub min_new: usize,
    pub max_iters: usize,
    /// Compare the signed product `H_ij c_i` instead of its magnitude.
    pub signed: bool,
    pub solver_tol: f64,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            epsilon1: 1e-5,
            target_size: 1_000_000,
            energy_tol: 1e-8,
            min_new: 1,
            max_iters: 200,
            signed: false,
            solver_tol: 1e-8,
        }
    }
}

impl SelectionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epsilon1.is_nan() || self.epsilon1 <= 0.0 {
            return Err(Error::Config(format!("epsilon1 = {} must be positive", self.epsilon1)));
        }
        if self.target_size == 0 {
            return Err(Error::Config("target_size must be at least 1".into()));
        }
        if self.energy_tol.is_nan() || self.energy_tol <= 0.0 {
            return Err(Error::Config(format!(
                "energy_tol = {} must be positive",
                self.energy_tol
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Size,
    Converged,
    Exhausted,
    MaxIters,
}

#[derive(Clone, Debug, Serialize)]
pub struct IterationTrace {
    pub iteration: usize,
    pub size: usize,
    pub energy: f64,
    pub candidates: usize,
    pub accepted: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelectionResult {
    #[serde(skip)]
    pub subspace: Subspace,
    pub ground: GroundState,
    pub trace: Vec<IterationTrace>,
    pub stop_reason: StopReason,
    /// Largest number of candidates generated in one iteration.
    pub peak_candidates: usize,
    pub wallclock_s: f64,
}

impl SelectionResult {
    pub fn energy(&self) -> f64 {
        self.ground.energy
    }

    pub fn len(&self) -> usize {
        self.subspace.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subspace.is_empty()
    }

    /// Selected determinants as bitstrings, one per line.
    pub fn dump(&self, norb: usize) -> String {
        self.subspace.dump(norb)
    }
}

/// `|H_ij c_i| ≥ ε₁`.
pub fn hci_criterion(h_ij: f64, c_i: f64, epsilon1: f64) -> bool {
    (h_ij * c_i).abs() >= epsilon1
}

fn passes(score: f64, cfg: &SelectionConfig) -> bool {
    if cfg.signed {
        score >= cfg.epsilon1
    } else {
        score.abs() >= cfg.epsilon1
    }
}

/// Spin strings available to the selection.
enum Strings<'a> {
    Sampled(&'a HashSet<u64>, &'a [u64]),
    All,
}

impl Strings<'_> {
    fn contains(&self, x: u64) -> bool {
        match self {
            Strings::Sampled(set, _) => set.contains(&x),
            Strings::All => true,
        }
    }

    /// Available strings one and two moves away from `x`.
    fn near(&self, x: u64, norb: usize) -> (Vec<u64>, Vec<u64>) {
        match *self {
            Strings::Sampled(set, list) => {
                let nexc = (x.count_ones() as usize * (norb - x.count_ones() as usize)).pow(2);
                if list.len() <= nexc {
                    let mut d1 = Vec::new();
                    let mut d2 = Vec::new();
                    for &y in list {
                        if y.count_ones() != x.count_ones() {
                            continue;
                        }
                        match degree(x, y) {
                            1 => d1.push(y),
                            2 => d2.push(y),
                            _ => {}
                        }
                    }
                    (d1, d2)
                } else {
                    (
                        singles(x, norb).map(|s| s.2).filter(|y| set.contains(y)).collect(),
                        doubles(x, norb).filter(|y| set.contains(y)).collect(),
                    )
                }
            }
            Strings::All => (singles(x, norb).map(|s| s.2).collect(), doubles(x, norb).collect()),
        }
    }
}

fn candidates_for(x: &Determinant, s: &Strings, norb: usize) -> Vec<Determinant> {
    let (a, b) = (x.alpha.0, x.beta.0);
    let (a1, a2) = s.near(a, norb);
    let (b1, b2) = if a == b {
        (a1.clone(), a2.clone())
    } else {
        s.near(b, norb)
    };
    let (has_a, has_b) = (s.contains(a), s.contains(b));
    let mut out = Vec::new();
    if has_a {
        out.extend(b1.iter().chain(&b2).map(|&z| Determinant::new(a, z)));
    }
    if has_b {
        out.extend(a1.iter().chain(&a2).map(|&y| Determinant::new(y, b)));
    }
    for &y in &a1 {
        out.extend(b1.iter().map(|&z| Determinant::new(y, z)));
    }
    out
}

/// Determinants `combine(y, z)` with `y`, `z` from `s` whose total excitation
/// degree from `x` is one or two.
pub fn generate_candidates(x: &Determinant, s: &[HalfConfiguration], norb: usize) -> Result<Vec<Determinant>> {
    let (na, nb) = x.sector();
    if let Some(bad) = s.iter().find(|h| h.popcount() != na && h.popcount() != nb) {
        return Err(Error::Sector(format!(
            "half-configuration {} has {} electrons, determinant sector is ({na}, {nb})",
            bad.to_bitstring(norb),
            bad.popcount()
        )));
    }
    let list: Vec<u64> = s.iter().map(|h| h.0).collect();
    let set: HashSet<u64> = list.iter().copied().collect();
    let mut out = candidates_for(x, &Strings::Sampled(&set, &list), norb);
    out.sort();
    out.dedup();
    Ok(out)
}

fn solver_opts(cfg: &SelectionConfig, guess: Option<Vec<f64>>) -> SolverOptions {
    SolverOptions {
        tol: cfg.solver_tol,
        initial_guess: guess,
        ..Default::default()
    }
}

fn solve(
    h: &GrowingHamiltonian,
    table: &IntegralTable,
    cfg: &SelectionConfig,
    guess: Option<Vec<f64>>,
) -> Result<GroundState> {
    let e = solve_ground(h, &solver_opts(cfg, guess))?;
    let occ = occupations(h.subspace(), &e.vector, table.norb())?;
    Ok(GroundState {
        energy: e.energy,
        coeffs: e.vector,
        occupations: occ,
        residual: e.residual,
        degenerate: e.degenerate,
    })
}

fn select(table: &IntegralTable, strings: Strings, cfg: &SelectionConfig) -> Result<SelectionResult> {
    cfg.validate()?;
    let start = Instant::now();
    let norb = table.norb();
    let hf = Determinant::hartree_fock(table.n_alpha(), table.n_beta());
    let mut h = GrowingHamiltonian::new();
    h.extend(&[hf], table)?;
    let mut ground = solve(&h, table, cfg, None)?;
    let mut trace = vec![IterationTrace {
        iteration: 0,
        size: 1,
        energy: ground.energy,
        candidates: 0,
        accepted: 1,
    }];
    let mut frontier: Vec<usize> = vec![0];
    let mut peak = 0usize;
    let mut stop = StopReason::MaxIters;
    for iteration in 1..=cfg.max_iters {
        let mut best: BTreeMap<Determinant, f64> = BTreeMap::new();
        let mut generated = 0usize;
        for &i in &frontier {
            let xi = h.subspace().dets()[i];
            let ci = ground.coeffs[i];
            let cands = candidates_for(&xi, &strings, norb);
            generated += cands.len();
            for xj in cands {
                if h.subspace().contains(&xj) {
                    continue;
                }
                let score = slater_condon(&xi, &xj, table)? * ci;
                if passes(score, cfg) {
                    let e = best.entry(xj).or_insert(score);
                    let better = if cfg.signed { score > *e } else { score.abs() > e.abs() };
                    if better {
                        *e = score;
                    }
                }
            }
        }
        peak = peak.max(generated);
        let mut accepted: Vec<(Determinant, f64)> = best.into_iter().collect();
        let key = |s: f64| if cfg.signed { s } else { s.abs() };
        accepted.sort_by(|a, b| key(b.1).total_cmp(&key(a.1)).then(a.0.cmp(&b.0)));
        let room = cfg.target_size.saturating_sub(h.len());
        accepted.truncate(room);
        if accepted.len() < cfg.min_new || accepted.is_empty() {
            trace.push(IterationTrace {
                iteration,
                size: h.len(),
                energy: ground.energy,
                candidates: generated,
                accepted: 0,
            });
            stop = if room == 0 {
                StopReason::Size
            } else {
                StopReason::Exhausted
            };
            break;
        }
        let first_new = h.len();
        let new: Vec<Determinant> = accepted.iter().map(|a| a.0).collect();
        h.extend(&new, table)?;
        let mut guess = ground.coeffs.clone();
        guess.resize(h.len(), 0.0);
        let previous = ground.energy;
        ground = solve(&h, table, cfg, Some(guess))?;
        trace.push(IterationTrace {
            iteration,
            size: h.len(),
            energy: ground.energy,
            candidates: generated,
            accepted: new.len(),
        });
        frontier = (first_new..h.len()).collect();
        if h.len() >= cfg.target_size {
            stop = StopReason::Size;
            break;
        }
        if (previous - ground.energy).abs() < cfg.energy_tol {
            stop = StopReason::Converged;
            break;
        }
    }
    Ok(SelectionResult {
        subspace: h.subspace().clone(),
        ground,
        trace,
        stop_reason: stop,
        peak_candidates: peak,
        wallclock_s: start.elapsed().as_secs_f64(),
    })
}

/// Selection restricted to determinants built from the sampled
/// half-configurations `s`. The Hartree–Fock strings are always available.
pub fn hci_select_from_samples(
    s: &[HalfConfiguration],
    table: &IntegralTable,
    cfg: &SelectionConfig,
) -> Result<SelectionResult> {
    let (na, nb) = (table.n_alpha() as u32, table.n_beta() as u32);
    if let Some(bad) = s.iter().find(|h| h.popcount() != na && h.popcount() != nb) {
        return Err(Error::Sector(format!(
            "half-configuration {} has {} electrons, sector is ({na}, {nb})",
            bad.to_bitstring(table.norb()),
            bad.popcount()
        )));
    }
    let hf = Determinant::hartree_fock(na as usize, nb as usize);
    let mut list: Vec<u64> = s.iter().map(|h| h.0).collect();
    list.extend([hf.alpha.0, hf.beta.0]);
    list.sort_unstable();
    list.dedup();
    let set: HashSet<u64> = list.iter().copied().collect();
    select(table, Strings::Sampled(&set, &list), cfg)
}

/// Variational selection over all single and double excitations.
pub fn classical_hci(table: &IntegralTable, cfg: &SelectionConfig) -> Result<SelectionResult> {
    select(table, Strings::All, cfg)
}

/// Half-configurations present in a subspace (both spins).
pub fn subspace_halves(sub: &Subspace) -> Vec<HalfConfiguration> {
    let mut v: Vec<HalfConfiguration> = sub.dets().iter().flat_map(|d| [d.alpha, d.beta]).collect();
    v.sort();
    v.dedup();
    v
}

#[doc(hidden)]
pub fn combine_all(s: &[HalfConfiguration]) -> Vec<Determinant> {
    s.iter().flat_map(|&y| s.iter().map(move |&z| combine(y, z))).collect()
}
