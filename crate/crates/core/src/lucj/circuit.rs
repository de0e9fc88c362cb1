//! Abstract number-conserving gate list and the LUCJ circuit builders.
//!
//! Qubit `k < norb` is the α spin-orbital `k`; qubit `norb + k` is the β
//! spin-orbital `k`. Gates are listed in the order they act on the state.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::Serialize;

use super::params::LucjParameters;
use crate::error::{Error, Result};

const ZERO_ANGLE: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "gate", rename_all = "snake_case")]
pub enum Gate {
    /// Two-mode rotation `a†_a → cosθ a†_a + e^{iφ} sinθ a†_b`,
    /// `a†_b → −e^{−iφ} sinθ a†_a + cosθ a†_b`.
    Givens { a: usize, b: usize, theta: f64, phi: f64 },
    /// `|1⟩ → e^{iθ}|1⟩`.
    Phase { q: usize, theta: f64 },
    /// `|11⟩ → e^{iθ}|11⟩`.
    CPhase { a: usize, b: usize, theta: f64 },
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::Givens { a, b, .. } | Gate::CPhase { a, b, .. } => vec![a, b],
            Gate::Phase { q, .. } => vec![q],
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CircuitIR {
    pub nqubits: usize,
    pub gates: Vec<Gate>,
}

impl CircuitIR {
    pub fn new(nqubits: usize) -> Self {
        CircuitIR {
            nqubits,
            gates: Vec::new(),
        }
    }

    pub fn push(&mut self, g: Gate) -> Result<()> {
        let qs = g.qubits();
        if qs.iter().any(|&q| q >= self.nqubits) {
            return Err(Error::Shape(format!(
                "{g:?} touches a qubit outside 0..{}",
                self.nqubits
            )));
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(Error::Shape(format!("{g:?} acts twice on one qubit")));
        }
        self.gates.push(g);
        Ok(())
    }
}

/// Which Jastrow couplings are realized as gates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingMap {
    #[default]
    AllToAll,
    /// Same-spin pairs `|p − r| = 1` and opposite-spin pairs `p = r`.
    LinearNearestNeighbor,
}

impl CouplingMap {
    fn same_spin(self, p: usize, r: usize) -> bool {
        match self {
            CouplingMap::AllToAll => true,
            CouplingMap::LinearNearestNeighbor => p.abs_diff(r) == 1,
        }
    }

    fn opposite_spin(self, p: usize, r: usize) -> bool {
        match self {
            CouplingMap::AllToAll => true,
            CouplingMap::LinearNearestNeighbor => p == r,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GateStats {
    pub depth: usize,
    pub one_qubit: usize,
    pub two_qubit: usize,
}

/// Depth is the longest chain of gates sharing qubits.
pub fn gate_stats(circ: &CircuitIR) -> GateStats {
    let mut level = vec![0usize; circ.nqubits];
    let mut stats = GateStats::default();
    for g in &circ.gates {
        let qs = g.qubits();
        let l = qs.iter().map(|&q| level[q]).max().unwrap_or(0) + 1;
        for &q in &qs {
            level[q] = l;
        }
        stats.depth = stats.depth.max(l);
        if qs.len() == 1 {
            stats.one_qubit += 1;
        } else {
            stats.two_qubit += 1;
        }
    }
    stats
}

/// Adjacent-mode Givens network realizing the single-particle unitary `u`
/// on modes `offset..offset+n`.
///
/// Column-by-column elimination of the strict lower triangle: rotations
/// `R_1 … R_m` with `R_m^T ⋯ R_1^T u = D`, `D` diagonal with entries ±1.
/// Then `u = R_1 ⋯ R_m D`, so `D` acts first and `R_1` last.
pub fn givens_network(u: &DMatrix<f64>, offset: usize) -> Vec<Gate> {
    let n = u.nrows();
    let mut w = u.clone();
    let mut rotations = Vec::new();
    for j in 0..n {
        for i in ((j + 1)..n).rev() {
            let (x, y) = (w[(i - 1, j)], w[(i, j)]);
            if y.abs() < ZERO_ANGLE {
                continue;
            }
            let theta = y.atan2(x);
            let (s, c) = theta.sin_cos();
            for col in 0..n {
                let (a, b) = (w[(i - 1, col)], w[(i, col)]);
                w[(i - 1, col)] = c * a + s * b;
                w[(i, col)] = -s * a + c * b;
            }
            rotations.push(Gate::Givens {
                a: offset + i - 1,
                b: offset + i,
                theta,
                phi: 0.0,
            });
        }
    }
    let mut gates: Vec<Gate> = (0..n)
        .filter(|&p| w[(p, p)] < 0.0)
        .map(|p| Gate::Phase {
            q: offset + p,
            theta: std::f64::consts::PI,
        })
        .collect();
    gates.extend(rotations.into_iter().rev());
    gates
}

/// `exp(a)·exp(b)` for the single-particle generators of adjacent blocks.
fn rotation(a: Option<&DMatrix<f64>>, b: Option<&DMatrix<f64>>, n: usize) -> DMatrix<f64> {
    let ea = a.map_or_else(|| DMatrix::identity(n, n), |m| m.clone().exp());
    let eb = b.map_or_else(|| DMatrix::identity(n, n), |m| m.clone().exp());
    ea * eb
}

/// Single-particle rotations between Jastrow blocks: `exp(−K₁)` first, then
/// `exp(−K_{μ+1}) exp(K_μ)`, and finally `exp(−K₂) exp(K_L)`.
fn rotations(params: &LucjParameters) -> Vec<DMatrix<f64>> {
    let n = params.norb;
    let ls = &params.layers;
    let mut out = vec![rotation(Some(&-&ls[0].k), None, n)];
    for w in ls.windows(2) {
        out.push(rotation(Some(&-&w[1].k), Some(&w[0].k), n));
    }
    out.push(rotation(Some(&-&params.k2), Some(&ls[ls.len() - 1].k), n));
    out
}

fn same_spin_jastrow(j: &DMatrix<f64>, offset: usize, map: CouplingMap, out: &mut Vec<Gate>) {
    let n = j.nrows();
    for p in 0..n {
        if j[(p, p)].abs() > ZERO_ANGLE {
            out.push(Gate::Phase {
                q: offset + p,
                theta: j[(p, p)],
            });
        }
    }
    for p in 0..n {
        for r in (p + 1)..n {
            if map.same_spin(p, r) && j[(p, r)].abs() > ZERO_ANGLE {
                out.push(Gate::CPhase {
                    a: offset + p,
                    b: offset + r,
                    theta: 2.0 * j[(p, r)],
                });
            }
        }
    }
}

/// `exp(i Σ J n n)` over both orderings of each spin-orbital pair.
fn opposite_spin_jastrow(j_ab: &DMatrix<f64>, norb: usize, map: CouplingMap, out: &mut Vec<Gate>) {
    for p in 0..norb {
        for r in 0..norb {
            if map.opposite_spin(p, r) && j_ab[(p, r)].abs() > ZERO_ANGLE {
                out.push(Gate::CPhase {
                    a: p,
                    b: norb + r,
                    theta: 2.0 * j_ab[(p, r)],
                });
            }
        }
    }
}

/// Opposite-spin block folded onto the α register: `(α_i, β_j) → (α_i, α_j)`
/// and `(α_i, β_i) → α_i`. Couplings landing on the same target add.
fn remapped_jastrow(j_ab: &DMatrix<f64>, map: CouplingMap, out: &mut Vec<Gate>) {
    let n = j_ab.nrows();
    let mut phases = vec![0.0; n];
    let mut pairs: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for p in 0..n {
        for r in 0..n {
            if !map.opposite_spin(p, r) || j_ab[(p, r)].abs() <= ZERO_ANGLE {
                continue;
            }
            let theta = 2.0 * j_ab[(p, r)];
            if p == r {
                phases[p] += theta;
            } else {
                *pairs.entry((p.min(r), p.max(r))).or_default() += theta;
            }
        }
    }
    for (q, &theta) in phases.iter().enumerate() {
        if theta.abs() > ZERO_ANGLE {
            out.push(Gate::Phase { q, theta });
        }
    }
    for ((a, b), theta) in pairs {
        if theta.abs() > ZERO_ANGLE {
            out.push(Gate::CPhase { a, b, theta });
        }
    }
}

fn check(params: &LucjParameters, norb: usize) -> Result<()> {
    if params.norb != norb {
        return Err(Error::Shape(format!(
            "parameters are for norb={}, circuit needs {norb}",
            params.norb
        )));
    }
    if norb == 0 {
        return Err(Error::Shape("norb must be positive".into()));
    }
    params.validate()
}

/// `2·norb`-qubit circuit for both spin registers.
pub fn build_full_circuit(params: &LucjParameters, norb: usize, map: CouplingMap) -> Result<CircuitIR> {
    check(params, norb)?;
    let mut c = CircuitIR::new(2 * norb);
    let rots = rotations(params);
    let mut gates = Vec::new();
    for (mu, layer) in params.layers.iter().enumerate() {
        gates.extend(givens_network(&rots[mu], 0));
        gates.extend(givens_network(&rots[mu], norb));
        same_spin_jastrow(&layer.j_aa, 0, map, &mut gates);
        same_spin_jastrow(&layer.j_bb, norb, map, &mut gates);
        opposite_spin_jastrow(&layer.j_ab, norb, map, &mut gates);
    }
    let last = &rots[rots.len() - 1];
    gates.extend(givens_network(last, 0));
    gates.extend(givens_network(last, norb));
    for g in gates {
        c.push(g)?;
    }
    Ok(c)
}

/// `norb`-qubit circuit on the α register with the opposite-spin block
/// remapped onto same-spin gates.
pub fn build_half_circuit(params: &LucjParameters, norb: usize, map: CouplingMap) -> Result<CircuitIR> {
    check(params, norb)?;
    let mut c = CircuitIR::new(norb);
    let rots = rotations(params);
    let mut gates = Vec::new();
    for (mu, layer) in params.layers.iter().enumerate() {
        gates.extend(givens_network(&rots[mu], 0));
        same_spin_jastrow(&layer.j_aa, 0, map, &mut gates);
        remapped_jastrow(&layer.j_ab, map, &mut gates);
    }
    gates.extend(givens_network(&rots[rots.len() - 1], 0));
    for g in gates {
        c.push(g)?;
    }
    Ok(c)
}
