//! Shared test helpers: fixture loading and an independent second-quantized
//! Hamiltonian built by applying creation/annihilation operators to Fock
//! occupation bitmasks.

#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use hsqd::determinants::Determinant;
use hsqd::integrals::{parse_fcidump, IntegralTable};
use nalgebra::DMatrix;
use serde::Deserialize;

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn load(name: &str) -> IntegralTable {
    let text = std::fs::read_to_string(fixture_dir().join(format!("{name}.fcidump"))).unwrap();
    parse_fcidump(&text).unwrap()
}

#[derive(Debug, Deserialize)]
pub struct Metadata {
    pub molecule: String,
    pub basis: String,
    pub active_space: [usize; 2],
    pub e_hf: f64,
    pub e_ccsd: Option<f64>,
    pub e_fci: f64,
    pub bond_label: String,
}

pub fn metadata(name: &str) -> Metadata {
    let text = std::fs::read_to_string(fixture_dir().join(format!("{name}.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

/// `a_k |state>`: sign from the occupied modes below `k`.
fn annihilate(state: u128, k: usize) -> Option<(u128, f64)> {
    if state >> k & 1 == 0 {
        return None;
    }
    let below = (state & ((1u128 << k) - 1)).count_ones();
    Some((state & !(1u128 << k), if below.is_multiple_of(2) { 1.0 } else { -1.0 }))
}

fn create(state: u128, k: usize) -> Option<(u128, f64)> {
    if state >> k & 1 == 1 {
        return None;
    }
    let below = (state & ((1u128 << k) - 1)).count_ones();
    Some((state | (1u128 << k), if below.is_multiple_of(2) { 1.0 } else { -1.0 }))
}

/// Applies a string of operators right to left: `ops[0]` acts last.
/// `true` = creation.
pub fn apply_ops(state: u128, ops: &[(bool, usize)]) -> Option<(u128, f64)> {
    let mut s = state;
    let mut sign = 1.0;
    for &(dagger, k) in ops.iter().rev() {
        let (ns, f) = if dagger { create(s, k)? } else { annihilate(s, k)? };
        s = ns;
        sign *= f;
    }
    Some((s, sign))
}

/// Spin-orbital `k < norb` is α orbital `k`, otherwise β orbital `k - norb`.
pub fn fock_state(d: &Determinant, norb: usize) -> u128 {
    d.alpha.0 as u128 | ((d.beta.0 as u128) << norb)
}

/// `H |state>` as a sparse map, with
/// `H = Σ h_pq a†_pσ a_qσ + ½ Σ (pq|rs) a†_pσ a†_rτ a_sτ a_qσ + E_core`.
pub fn apply_hamiltonian(state: u128, table: &IntegralTable) -> HashMap<u128, f64> {
    apply_hamiltonian_ordered(state, table, false)
}

/// With `swapped`, each two-body term is written as `a†_rτ a†_pσ a_qσ a_sτ`,
/// the same operator with both pairs exchanged.
pub fn apply_hamiltonian_ordered(state: u128, table: &IntegralTable, swapped: bool) -> HashMap<u128, f64> {
    let n = table.norb();
    let mut out: HashMap<u128, f64> = HashMap::new();
    *out.entry(state).or_default() += table.e_core();
    for sigma in 0..2 {
        for p in 0..n {
            for q in 0..n {
                let h = table.h1(p, q);
                if h == 0.0 {
                    continue;
                }
                if let Some((s, f)) = apply_ops(state, &[(true, p + sigma * n), (false, q + sigma * n)]) {
                    *out.entry(s).or_default() += h * f;
                }
            }
        }
    }
    for sigma in 0..2 {
        for tau in 0..2 {
            for p in 0..n {
                for q in 0..n {
                    for r in 0..n {
                        for s in 0..n {
                            let v = table.eri(p, q, r, s);
                            if v == 0.0 {
                                continue;
                            }
                            let ops = if swapped {
                                [
                                    (true, r + tau * n),
                                    (true, p + sigma * n),
                                    (false, q + sigma * n),
                                    (false, s + tau * n),
                                ]
                            } else {
                                [
                                    (true, p + sigma * n),
                                    (true, r + tau * n),
                                    (false, s + tau * n),
                                    (false, q + sigma * n),
                                ]
                            };
                            if let Some((st, f)) = apply_ops(state, &ops) {
                                *out.entry(st).or_default() += 0.5 * v * f;
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Dense `<d_i|H|d_j>` over `dets`.
pub fn dense_oracle(dets: &[Determinant], table: &IntegralTable) -> DMatrix<f64> {
    dense_oracle_ordered(dets, table, false)
}

pub fn dense_oracle_ordered(dets: &[Determinant], table: &IntegralTable, swapped: bool) -> DMatrix<f64> {
    let n = table.norb();
    let pos: HashMap<u128, usize> = dets.iter().enumerate().map(|(i, d)| (fock_state(d, n), i)).collect();
    let mut m = DMatrix::zeros(dets.len(), dets.len());
    for (j, d) in dets.iter().enumerate() {
        for (s, v) in apply_hamiltonian_ordered(fock_state(d, n), table, swapped) {
            if let Some(&i) = pos.get(&s) {
                m[(i, j)] += v;
            }
        }
    }
    m
}

/// Random real integrals with full 8-fold symmetry.
pub fn random_table(norb: usize, nelec: usize, seed: u64) -> IntegralTable {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut t = IntegralTable::new(norb, nelec, 0);
    t.set_e_core(rng.gen_range(-1.0..1.0));
    for p in 1..=norb {
        for q in 1..=p {
            t.insert_h1(p, q, rng.gen_range(-1.0..1.0)).unwrap();
        }
    }
    for p in 1..=norb {
        for q in 1..=p {
            for r in 1..=norb {
                for s in 1..=r {
                    if p * (p - 1) / 2 + q >= r * (r - 1) / 2 + s {
                        t.insert_h2(p, q, r, s, rng.gen_range(-0.5..0.5)).unwrap();
                    }
                }
            }
        }
    }
    t
}
