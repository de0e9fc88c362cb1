//! Projected Hamiltonians, ground states and the full-CI reference.

mod davidson;
mod incremental;
mod tensor;

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::Serialize;

pub use davidson::{dense_ground, solve_ground, Eigenpair, LinearOperator, SolverOptions};
pub use incremental::GrowingHamiltonian;
pub use tensor::TensorHamiltonian;

use crate::determinants::{degree, diagonal_element, matrix_element, strings, Determinant, HalfConfiguration};
use crate::error::{Error, Result};
use crate::integrals::IntegralTable;

/// Default ceiling on the full-CI dimension.
pub const DEFAULT_FCI_CAP: u128 = 2_000_000;

/// Below this many determinants the pair scan is exhaustive.
pub const EXHAUSTIVE_SCAN_LIMIT: usize = 20_000;

/// Ordered, duplicate-free determinant list of a single `(Nα, Nβ)` sector.
#[derive(Clone, Debug, Default)]
pub struct Subspace {
    dets: Vec<Determinant>,
    index: HashMap<Determinant, usize>,
}

impl Subspace {
    pub fn new(dets: Vec<Determinant>) -> Result<Self> {
        let mut s = Subspace::default();
        for d in dets {
            if !s.push(d)? {
                return Err(Error::Range(format!("duplicate determinant {d}")));
            }
        }
        Ok(s)
    }

    /// Appends `d`; returns `false` when it is already present.
    pub fn push(&mut self, d: Determinant) -> Result<bool> {
        if let Some(first) = self.dets.first() {
            if first.sector() != d.sector() {
                return Err(Error::Sector(format!(
                    "{d} has sector {:?}, subspace holds {:?}",
                    d.sector(),
                    first.sector()
                )));
            }
        }
        if self.index.contains_key(&d) {
            return Ok(false);
        }
        self.index.insert(d, self.dets.len());
        self.dets.push(d);
        Ok(true)
    }

    pub fn dets(&self) -> &[Determinant] {
        &self.dets
    }

    pub fn len(&self) -> usize {
        self.dets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dets.is_empty()
    }

    pub fn position(&self, d: &Determinant) -> Option<usize> {
        self.index.get(d).copied()
    }

    pub fn contains(&self, d: &Determinant) -> bool {
        self.index.contains_key(d)
    }

    /// One bitstring per line.
    pub fn dump(&self, norb: usize) -> String {
        let mut out = String::new();
        for d in &self.dets {
            out.push_str(&d.to_bitstring(norb));
            out.push('\n');
        }
        out
    }
}

/// Ground state of a projected Hamiltonian.
#[derive(Clone, Debug, Serialize)]
pub struct GroundState {
    pub energy: f64,
    pub coeffs: Vec<f64>,
    /// Per spin-orbital occupations, α block then β block.
    pub occupations: Vec<f64>,
    pub residual: f64,
    pub degenerate: bool,
}

/// Symmetric sparse matrix: diagonal plus strict upper triangle in CSR form.
#[derive(Clone, Debug, Default)]
pub struct SparseSymMatrix {
    diag: Vec<f64>,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl SparseSymMatrix {
    /// Builds from per-row upper-triangle entries `(j, v)` with `j > i`.
    fn from_rows(diag: Vec<f64>, rows: Vec<Vec<(u32, f64)>>) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        row_ptr.push(0);
        let total: usize = rows.iter().map(Vec::len).sum();
        let mut cols = Vec::with_capacity(total);
        let mut vals = Vec::with_capacity(total);
        for mut r in rows {
            r.sort_by_key(|e| e.0);
            for (j, v) in r {
                cols.push(j);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        SparseSymMatrix {
            diag,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Stored strictly-upper entries.
    pub fn nnz_offdiag(&self) -> usize {
        self.vals.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag[i];
        }
        let (r, c) = if i < j { (i, j) } else { (j, i) };
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        match self.cols[lo..hi].binary_search(&(c as u32)) {
            Ok(k) => self.vals[lo + k],
            Err(_) => 0.0,
        }
    }

    /// Coordinate dump `i j value` of the upper triangle, 0-based.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for i in 0..self.dim() {
            let _ = writeln!(out, "{i} {i} {:e}", self.diag[i]);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let _ = writeln!(out, "{i} {} {:e}", self.cols[k], self.vals[k]);
            }
        }
        out
    }
}

impl LinearOperator for SparseSymMatrix {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn diagonal(&self) -> Vec<f64> {
        self.diag.clone()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.diag.len() {
            let mut acc = self.diag[i] * x[i];
            let xi = x[i];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[k] as usize;
                let v = self.vals[k];
                acc += v * x[j];
                y[j] += v * xi;
            }
            y[i] += acc;
        }
    }

    fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let n = self.dim();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[k] as usize;
                m[(i, j)] = self.vals[k];
                m[(j, i)] = self.vals[k];
            }
        }
        m
    }
}

fn push_pair(rows: &mut [Vec<(u32, f64)>], dets: &[Determinant], i: usize, j: usize, table: &IntegralTable) {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    let v = matrix_element(&dets[i], &dets[j], table);
    if v != 0.0 {
        rows[i].push((j as u32, v));
    }
}

/// Projects the Hamiltonian onto `sub`. Only pairs of excitation degree ≤ 2
/// are visited.
pub fn build_hamiltonian(sub: &Subspace, table: &IntegralTable) -> Result<SparseSymMatrix> {
    if sub.len() < EXHAUSTIVE_SCAN_LIMIT {
        build_exhaustive(sub, table)
    } else {
        build_bucketed(sub, table)
    }
}

/// Pair discovery by scanning all `|S|²/2` pairs.
pub fn build_exhaustive(sub: &Subspace, table: &IntegralTable) -> Result<SparseSymMatrix> {
    let dets = sub.dets();
    let n = dets.len();
    let diag: Vec<f64> = dets.iter().map(|d| diagonal_element(d, table)).collect();
    let mut rows = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if degree(dets[i].alpha.0, dets[j].alpha.0) + degree(dets[i].beta.0, dets[j].beta.0) <= 2 {
                push_pair(&mut rows, dets, i, j, table);
            }
        }
    }
    Ok(SparseSymMatrix::from_rows(diag, rows))
}

/// Pair discovery through buckets keyed by spin strings: pairs sharing an α
/// string, pairs sharing a β string, and α-single × β-single pairs found by
/// looking up each single excitation of the α string.
pub fn build_bucketed(sub: &Subspace, table: &IntegralTable) -> Result<SparseSymMatrix> {
    let dets = sub.dets();
    let n = dets.len();
    let norb = table.norb();
    let diag: Vec<f64> = dets.iter().map(|d| diagonal_element(d, table)).collect();
    let mut by_alpha: HashMap<u64, Vec<u32>> = HashMap::new();
    let mut by_beta: HashMap<u64, Vec<u32>> = HashMap::new();
    for (i, d) in dets.iter().enumerate() {
        by_alpha.entry(d.alpha.0).or_default().push(i as u32);
        by_beta.entry(d.beta.0).or_default().push(i as u32);
    }
    let mut rows = vec![Vec::new(); n];
    for group in by_alpha.values() {
        for (k, &i) in group.iter().enumerate() {
            for &j in &group[k + 1..] {
                let (i, j) = (i as usize, j as usize);
                if degree(dets[i].beta.0, dets[j].beta.0) <= 2 {
                    push_pair(&mut rows, dets, i, j, table);
                }
            }
        }
    }
    for group in by_beta.values() {
        for (k, &i) in group.iter().enumerate() {
            for &j in &group[k + 1..] {
                let (i, j) = (i as usize, j as usize);
                if degree(dets[i].alpha.0, dets[j].alpha.0) <= 2 {
                    push_pair(&mut rows, dets, i, j, table);
                }
            }
        }
    }
    for (i, d) in dets.iter().enumerate() {
        for (_, _, a2) in crate::determinants::singles(d.alpha.0, norb) {
            if let Some(group) = by_alpha.get(&a2) {
                for &j in group {
                    let j = j as usize;
                    if j > i && degree(d.beta.0, dets[j].beta.0) == 1 {
                        push_pair(&mut rows, dets, i, j, table);
                    }
                }
            }
        }
    }
    Ok(SparseSymMatrix::from_rows(diag, rows))
}

/// Spin-orbital occupations `n_pσ = Σ_i c_i² occ(d_i, p, σ)`.
pub fn occupations(sub: &Subspace, coeffs: &[f64], norb: usize) -> Result<Vec<f64>> {
    if coeffs.len() != sub.len() {
        return Err(Error::Shape(format!(
            "{} coefficients for {} determinants",
            coeffs.len(),
            sub.len()
        )));
    }
    let mut n = vec![0.0; 2 * norb];
    for (d, c) in sub.dets().iter().zip(coeffs) {
        let w = c * c;
        for p in d.alpha.occupied() {
            n[p] += w;
        }
        for p in d.beta.occupied() {
            n[norb + p] += w;
        }
    }
    Ok(n)
}

/// Builds and solves the projected Hamiltonian on `sub`.
pub fn ground_state(sub: &Subspace, table: &IntegralTable, opts: &SolverOptions) -> Result<GroundState> {
    let h = build_hamiltonian(sub, table)?;
    let e = solve_ground(&h, opts)?;
    let occupations = occupations(sub, &e.vector, table.norb())?;
    Ok(GroundState {
        energy: e.energy,
        coeffs: e.vector,
        occupations,
        residual: e.residual,
        degenerate: e.degenerate,
    })
}

/// Ground state on the product space `alpha ⊗ beta` without forming the
/// determinant list. Coefficients are ordered α-major.
pub fn tensor_ground_state(
    alpha: Vec<HalfConfiguration>,
    beta: Vec<HalfConfiguration>,
    table: &IntegralTable,
    opts: &SolverOptions,
) -> Result<(GroundState, TensorHamiltonian)> {
    let op = TensorHamiltonian::new(alpha, beta, table);
    let e = solve_ground(&op, opts)?;
    let occupations = op.occupations(&e.vector, table.norb());
    Ok((
        GroundState {
            energy: e.energy,
            coeffs: e.vector,
            occupations,
            residual: e.residual,
            degenerate: e.degenerate,
        },
        op,
    ))
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

/// Dimension of the `(Nα, Nβ)` sector.
pub fn sector_dimension(norb: usize, n_alpha: usize, n_beta: usize) -> u128 {
    binomial(norb, n_alpha) * binomial(norb, n_beta)
}

/// Every determinant of the sector, in lexicographic order.
pub fn fci_space(norb: usize, n_alpha: usize, n_beta: usize) -> Result<Subspace> {
    fci_space_with_cap(norb, n_alpha, n_beta, DEFAULT_FCI_CAP)
}

pub fn fci_space_with_cap(norb: usize, n_alpha: usize, n_beta: usize, cap: u128) -> Result<Subspace> {
    let dim = sector_dimension(norb, n_alpha, n_beta);
    if dim > cap {
        return Err(Error::Capacity {
            what: "full CI space",
            needed: dim,
            cap,
        });
    }
    let a = strings(norb, n_alpha);
    let b = strings(norb, n_beta);
    let mut dets = Vec::with_capacity(dim as usize);
    for &y in &a {
        for &z in &b {
            dets.push(crate::determinants::combine(y, z));
        }
    }
    Subspace::new(dets)
}

/// Exact ground state of the table's sector.
pub fn fci_energy(table: &IntegralTable) -> Result<GroundState> {
    fci_energy_with(table, DEFAULT_FCI_CAP, &SolverOptions::default())
}

pub fn fci_energy_with(table: &IntegralTable, cap: u128, opts: &SolverOptions) -> Result<GroundState> {
    let (na, nb) = (table.n_alpha(), table.n_beta());
    let dim = sector_dimension(table.norb(), na, nb);
    if dim > cap {
        return Err(Error::Capacity {
            what: "full CI space",
            needed: dim,
            cap,
        });
    }
    let a = strings(table.norb(), na);
    let b = strings(table.norb(), nb);
    Ok(tensor_ground_state(a, b, table, opts)?.0)
}
