//! Matrix-free Hamiltonian on a product space `A ⊗ B` of α and β strings.
//!
//! Because the projector onto `A ⊗ B` factorizes, the projected Hamiltonian
//! splits into a pure-α part, a pure-β part and the mixed term
//! `Σ (pq|rs) E^α_pq ⊗ E^β_rs`, each restricted to the string lists. None of
//! these need the full determinant list or an explicit matrix.

use std::collections::HashMap;

use crate::determinants::{
    combine, degree, diagonal_element, matrix_element, single_phase, singles, Determinant, HalfConfiguration,
};
use crate::integrals::IntegralTable;
use crate::solver::davidson::LinearOperator;

/// `E_pq` connection from one string to another within the list.
#[derive(Clone, Copy, Debug)]
struct Hop {
    target: u32,
    pq: u32,
    sign: f64,
    diagonal: bool,
}

struct StringSpace {
    strings: Vec<HalfConfiguration>,
    /// Pure same-spin couplings (no core energy, no opposite spin).
    same_spin: Vec<Vec<(u32, f64)>>,
    /// Singles and occupation-number hops, per source string.
    hops: Vec<Vec<Hop>>,
}

impl StringSpace {
    fn new(strings: Vec<HalfConfiguration>, table: &IntegralTable) -> Self {
        let norb = table.norb();
        let index: HashMap<u64, u32> = strings.iter().enumerate().map(|(i, s)| (s.0, i as u32)).collect();
        let hops = strings
            .iter()
            .map(|s| {
                let mut list: Vec<Hop> = s
                    .occupied()
                    .map(|p| Hop {
                        target: index[&s.0],
                        pq: (p * norb + p) as u32,
                        sign: 1.0,
                        diagonal: true,
                    })
                    .collect();
                for (hole, particle, m) in singles(s.0, norb) {
                    if let Some(&t) = index.get(&m) {
                        list.push(Hop {
                            target: t,
                            pq: (particle * norb + hole) as u32,
                            sign: single_phase(s.0, hole, particle),
                            diagonal: false,
                        });
                    }
                }
                list.sort_by_key(|h| h.target);
                list
            })
            .collect();
        let n = strings.len();
        let mut same_spin = vec![Vec::new(); n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = degree(strings[i].0, strings[j].0);
                if d == 1 || d == 2 {
                    let v = matrix_element(
                        &combine(strings[i], HalfConfiguration(0)),
                        &combine(strings[j], HalfConfiguration(0)),
                        table,
                    );
                    if v != 0.0 {
                        same_spin[i].push((j as u32, v));
                        same_spin[j].push((i as u32, v));
                    }
                }
            }
        }
        for row in &mut same_spin {
            row.sort_by_key(|e| e.0);
        }
        StringSpace {
            strings,
            same_spin,
            hops,
        }
    }
}

/// Projected Hamiltonian on `alpha ⊗ beta`; basis index `ia * |beta| + ib`.
pub struct TensorHamiltonian {
    alpha: StringSpace,
    beta: StringSpace,
    diag: Vec<f64>,
    /// `(pq|rs)` as an `norb² × norb²` row-major matrix.
    eri: Vec<f64>,
    npair: usize,
}

impl TensorHamiltonian {
    /// Both string lists must be free of duplicates and of uniform electron count.
    pub fn new(alpha: Vec<HalfConfiguration>, beta: Vec<HalfConfiguration>, table: &IntegralTable) -> Self {
        let norb = table.norb();
        let npair = norb * norb;
        let mut eri = vec![0.0; npair * npair];
        for p in 0..norb {
            for q in 0..norb {
                for r in 0..norb {
                    for s in 0..norb {
                        eri[(p * norb + q) * npair + r * norb + s] = table.eri(p, q, r, s);
                    }
                }
            }
        }
        let alpha = StringSpace::new(alpha, table);
        let beta = StringSpace::new(beta, table);
        let mut diag = Vec::with_capacity(alpha.strings.len() * beta.strings.len());
        for a in &alpha.strings {
            for b in &beta.strings {
                diag.push(diagonal_element(&combine(*a, *b), table));
            }
        }
        TensorHamiltonian {
            alpha,
            beta,
            diag,
            eri,
            npair,
        }
    }

    pub fn alpha_strings(&self) -> &[HalfConfiguration] {
        &self.alpha.strings
    }

    pub fn beta_strings(&self) -> &[HalfConfiguration] {
        &self.beta.strings
    }

    /// Determinant at basis position `i`.
    pub fn determinant(&self, i: usize) -> Determinant {
        let nb = self.beta.strings.len();
        combine(self.alpha.strings[i / nb], self.beta.strings[i % nb])
    }

    /// Spin-orbital occupations of `coeffs` (α block then β block).
    pub fn occupations(&self, coeffs: &[f64], norb: usize) -> Vec<f64> {
        let nb = self.beta.strings.len();
        let mut n = vec![0.0; 2 * norb];
        for (ia, a) in self.alpha.strings.iter().enumerate() {
            let row = &coeffs[ia * nb..(ia + 1) * nb];
            let wa: f64 = row.iter().map(|c| c * c).sum();
            for p in a.occupied() {
                n[p] += wa;
            }
            for (ib, b) in self.beta.strings.iter().enumerate() {
                let w = row[ib] * row[ib];
                for p in b.occupied() {
                    n[norb + p] += w;
                }
            }
        }
        n
    }
}

impl LinearOperator for TensorHamiltonian {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn diagonal(&self) -> Vec<f64> {
        self.diag.clone()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let na = self.alpha.strings.len();
        let nb = self.beta.strings.len();
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.diag[i] * x[i];
        }
        // α-only couplings.
        for ia in 0..na {
            for &(ja, v) in &self.alpha.same_spin[ia] {
                let src = &x[ja as usize * nb..(ja as usize + 1) * nb];
                let dst = &mut y[ia * nb..(ia + 1) * nb];
                dst.iter_mut().zip(src).for_each(|(d, s)| *d += v * s);
            }
        }
        // β-only couplings.
        for ia in 0..na {
            let src = &x[ia * nb..(ia + 1) * nb];
            let mut acc = vec![0.0; nb];
            for (ib, a) in acc.iter_mut().enumerate() {
                for &(jb, v) in &self.beta.same_spin[ib] {
                    *a += v * src[jb as usize];
                }
            }
            y[ia * nb..(ia + 1) * nb]
                .iter_mut()
                .zip(&acc)
                .for_each(|(d, s)| *d += s);
        }
        // Mixed term; hops are symmetric so source lists double as target lists.
        let npair = self.npair;
        for ia in 0..na {
            for ha in &self.alpha.hops[ia] {
                let ja = ha.target as usize;
                let eri_row = &self.eri[ha.pq as usize * npair..(ha.pq as usize + 1) * npair];
                let src = &x[ja * nb..(ja + 1) * nb];
                let dst = &mut y[ia * nb..(ia + 1) * nb];
                for (ib, d) in dst.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for hb in &self.beta.hops[ib] {
                        if ha.diagonal && hb.diagonal {
                            continue;
                        }
                        acc += hb.sign * eri_row[hb.pq as usize] * src[hb.target as usize];
                    }
                    *d += ha.sign * acc;
                }
            }
        }
    }
}
