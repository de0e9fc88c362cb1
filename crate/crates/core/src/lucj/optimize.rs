//! Derivative-free minimization of the full-circuit energy.

use std::cell::RefCell;

use argmin::core::{CostFunction, Executor};
use argmin::solver::neldermead::NelderMead;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::circuit::{build_full_circuit, CouplingMap};
use super::params::LucjParameters;
use super::statevector::{energy_expectation, hf_occupation, simulate_statevector};
use crate::error::{Error, Result};
use crate::integrals::IntegralTable;

#[derive(Clone, Debug)]
pub struct OptimizeOptions {
    pub max_iters: u64,
    /// Edge length of the starting simplex.
    pub step: f64,
    pub seed: u64,
    /// Independent simplex starts, each from the best point found so far.
    pub restarts: usize,
    pub coupling: CouplingMap,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions {
            max_iters: 2000,
            step: 0.3,
            seed: 0,
            restarts: 6,
            coupling: CouplingMap::AllToAll,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OptimizeResult {
    #[serde(skip)]
    pub params: LucjParameters,
    pub initial_energy: f64,
    pub energy: f64,
    /// Best energy after each improving evaluation.
    pub trace: Vec<f64>,
    pub evaluations: usize,
}

/// Energy of the full circuit applied to the Hartree–Fock state.
pub fn circuit_energy(params: &LucjParameters, table: &IntegralTable, coupling: CouplingMap) -> Result<f64> {
    let norb = table.norb();
    let circ = build_full_circuit(params, norb, coupling)?;
    let psi = simulate_statevector(&circ, hf_occupation(norb, table.n_alpha(), table.n_beta(), true))?;
    energy_expectation(&psi, table)
}

struct Objective<'a> {
    table: &'a IntegralTable,
    norb: usize,
    layers: usize,
    coupling: CouplingMap,
    track: &'a RefCell<Track>,
}

struct Track {
    best: (f64, Vec<f64>),
    trace: Vec<f64>,
    evaluations: usize,
}

impl CostFunction for Objective<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        let p = LucjParameters::from_vector(self.norb, self.layers, x)?;
        let e = circuit_energy(&p, self.table, self.coupling)?;
        let mut t = self.track.borrow_mut();
        t.evaluations += 1;
        if e < t.best.0 {
            t.best = (e, x.clone());
            t.trace.push(e);
        }
        Ok(e)
    }
}

/// Restarted Nelder–Mead near `init`. Each starting simplex is a seeded
/// perturbation of the incumbent plus one signed step per coordinate. Returns `init` unchanged when
/// nothing improves on it.
pub fn optimize_parameters(
    init: &LucjParameters,
    table: &IntegralTable,
    opts: &OptimizeOptions,
) -> Result<OptimizeResult> {
    let layers = init.layers.len();
    let x0 = init.to_vector();
    let e0 = circuit_energy(init, table, opts.coupling)?;
    if x0.is_empty() {
        return Ok(OptimizeResult {
            params: init.clone(),
            initial_energy: e0,
            energy: e0,
            trace: vec![e0],
            evaluations: 1,
        });
    }
    let track = RefCell::new(Track {
        best: (e0, x0.clone()),
        trace: vec![e0],
        evaluations: 1,
    });
    // The all-zero point is stationary by symmetry, so each restart centres
    // its simplex on a seeded perturbation of the best point so far.
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.restarts.max(1) {
        let base = track.borrow().best.1.clone();
        let centre: Vec<f64> = base.iter().map(|x| x + rng.gen_range(-opts.step..opts.step)).collect();
        let mut simplex = vec![centre.clone()];
        for i in 0..centre.len() {
            let mut v = centre.clone();
            v[i] += if rng.gen_bool(0.5) { opts.step } else { -opts.step };
            simplex.push(v);
        }
        let objective = Objective {
            table,
            norb: init.norb,
            layers,
            coupling: opts.coupling,
            track: &track,
        };
        let solver = NelderMead::new(simplex)
            .with_sd_tolerance(1e-12)
            .map_err(|e| Error::Config(e.to_string()))?;
        Executor::new(objective, solver)
            .configure(|s| s.max_iters(opts.max_iters))
            .run()
            .map_err(|e| Error::Config(format!("optimizer: {e}")))?;
    }
    let Track {
        best: (energy, x),
        trace,
        evaluations,
    } = track.into_inner();
    Ok(OptimizeResult {
        params: LucjParameters::from_vector(init.norb, layers, &x)?,
        initial_energy: e0,
        energy,
        trace,
        evaluations,
    })
}
