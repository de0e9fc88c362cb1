//! Projected Hamiltonian that grows with its subspace.

use crate::determinants::{degree, diagonal_element, doubles, matrix_element, singles, Determinant};
use crate::error::Result;
use crate::integrals::IntegralTable;
use crate::solver::davidson::LinearOperator;
use crate::solver::Subspace;

/// Below this size new rows are found by scanning instead of enumerating
/// excitations.
const SCAN_LIMIT: usize = 2000;

/// Symmetric adjacency (both triangles) over a growing determinant list.
#[derive(Clone, Debug, Default)]
pub struct GrowingHamiltonian {
    sub: Subspace,
    diag: Vec<f64>,
    adj: Vec<Vec<(u32, f64)>>,
}

impl GrowingHamiltonian {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn subspace(&self) -> &Subspace {
        &self.sub
    }

    pub fn len(&self) -> usize {
        self.sub.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sub.is_empty()
    }

    /// Stored off-diagonal entries, counting each pair once.
    pub fn nnz_offdiag(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Appends the determinants not yet present and their matrix rows.
    pub fn extend(&mut self, dets: &[Determinant], table: &IntegralTable) -> Result<()> {
        let norb = table.norb();
        for &d in dets {
            if !self.sub.push(d)? {
                continue;
            }
            let j = self.sub.len() - 1;
            self.diag.push(diagonal_element(&d, table));
            self.adj.push(Vec::new());
            let mut found: Vec<usize> = Vec::new();
            if j < SCAN_LIMIT {
                let all = self.sub.dets();
                found.extend(
                    (0..j).filter(|&i| degree(all[i].alpha.0, d.alpha.0) + degree(all[i].beta.0, d.beta.0) <= 2),
                );
            } else {
                let (a, b) = (d.alpha.0, d.beta.0);
                let a1: Vec<u64> = singles(a, norb).map(|s| s.2).collect();
                let b1: Vec<u64> = singles(b, norb).map(|s| s.2).collect();
                let mut probe = |alpha: u64, beta: u64| {
                    if let Some(i) = self.sub.position(&Determinant::new(alpha, beta)) {
                        if i < j {
                            found.push(i);
                        }
                    }
                };
                for &x in &a1 {
                    probe(x, b);
                    for &y in &b1 {
                        probe(x, y);
                    }
                }
                for &y in &b1 {
                    probe(a, y);
                }
                for x in doubles(a, norb) {
                    probe(x, b);
                }
                for y in doubles(b, norb) {
                    probe(a, y);
                }
            }
            for i in found {
                let v = matrix_element(&self.sub.dets()[i], &d, table);
                if v != 0.0 {
                    self.adj[i].push((j as u32, v));
                    self.adj[j].push((i as u32, v));
                }
            }
        }
        Ok(())
    }

    /// `<d_i|H|d_j>` from the stored rows.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag[i];
        }
        self.adj[i].iter().find(|e| e.0 as usize == j).map_or(0.0, |e| e.1)
    }
}

impl LinearOperator for GrowingHamiltonian {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn diagonal(&self) -> Vec<f64> {
        self.diag.clone()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, row) in self.adj.iter().enumerate() {
            let mut acc = self.diag[i] * x[i];
            for &(j, v) in row {
                acc += v * x[j as usize];
            }
            y[i] = acc;
        }
    }
}
