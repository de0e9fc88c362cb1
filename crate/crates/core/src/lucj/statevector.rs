//! Dense statevector simulation, measurement sampling and readout noise.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::circuit::{CircuitIR, Gate};
use super::samples::SampleSet;
use crate::determinants::Determinant;
use crate::error::{Error, Result};
use crate::integrals::IntegralTable;
use crate::solver::{build_hamiltonian, fci_space_with_cap, DEFAULT_FCI_CAP};

/// Largest simulated register, in qubits.
pub const DEFAULT_QUBIT_CAP: usize = 26;

/// Bitstring with the lowest `n_alpha` modes of the α register and the
/// lowest `n_beta` of the β register occupied. Pass `norb` as the register
/// width; `n_beta` is ignored when `two_registers` is false.
pub fn hf_occupation(norb: usize, n_alpha: usize, n_beta: usize, two_registers: bool) -> u64 {
    let low = |n: usize| if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
    if two_registers {
        low(n_alpha) | low(n_beta) << norb
    } else {
        low(n_alpha)
    }
}

fn parity_between(i: usize, a: usize, b: usize) -> f64 {
    let (lo, hi) = (a.min(b), a.max(b));
    let between = if hi - lo <= 1 {
        0
    } else {
        (i >> (lo + 1)) & ((1 << (hi - lo - 1)) - 1)
    };
    if between.count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn apply_gate(psi: &mut [Complex64], g: &Gate) {
    match *g {
        Gate::Phase { q, theta } => {
            let f = Complex64::from_polar(1.0, theta);
            for (i, amp) in psi.iter_mut().enumerate() {
                if i >> q & 1 == 1 {
                    *amp *= f;
                }
            }
        }
        Gate::CPhase { a, b, theta } => {
            let f = Complex64::from_polar(1.0, theta);
            let m = (1 << a) | (1 << b);
            for (i, amp) in psi.iter_mut().enumerate() {
                if i & m == m {
                    *amp *= f;
                }
            }
        }
        Gate::Givens { a, b, theta, phi } => {
            let (s, c) = theta.sin_cos();
            let e = Complex64::from_polar(1.0, phi);
            let (ma, mb) = (1usize << a, 1usize << b);
            for i0 in 0..psi.len() {
                if i0 & ma == 0 || i0 & mb != 0 {
                    continue;
                }
                let i1 = i0 ^ ma ^ mb;
                let sign = parity_between(i0, a, b);
                let (x0, x1) = (psi[i0], psi[i1]);
                psi[i0] = x0 * c - x1 * (e.conj() * s * sign);
                psi[i1] = x0 * (e * s * sign) + x1 * c;
            }
        }
    }
}

/// Applies `circ` to the basis state `initial`.
pub fn simulate_statevector(circ: &CircuitIR, initial: u64) -> Result<Vec<Complex64>> {
    simulate_with_cap(circ, initial, DEFAULT_QUBIT_CAP)
}

pub fn simulate_with_cap(circ: &CircuitIR, initial: u64, qubit_cap: usize) -> Result<Vec<Complex64>> {
    if circ.nqubits > qubit_cap {
        return Err(Error::Capacity {
            what: "statevector amplitudes",
            needed: 1u128 << circ.nqubits.min(127),
            cap: 1u128 << qubit_cap,
        });
    }
    let dim = 1usize << circ.nqubits;
    if initial as u128 >= dim as u128 {
        return Err(Error::Shape(format!(
            "initial state {initial:#b} exceeds {} qubits",
            circ.nqubits
        )));
    }
    let mut psi = vec![Complex64::new(0.0, 0.0); dim];
    psi[initial as usize] = Complex64::new(1.0, 0.0);
    for g in &circ.gates {
        apply_gate(&mut psi, g);
    }
    Ok(psi)
}

/// Multinomial draw of `shots` outcomes from `|ψ|²`.
pub fn sample(state: &[Complex64], shots: u64, seed: u64) -> SampleSet {
    let bit_len = state.len().trailing_zeros() as usize;
    let mut cdf = Vec::with_capacity(state.len());
    let mut acc = 0.0;
    for a in state {
        acc += a.norm_sqr();
        cdf.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; state.len()];
    for _ in 0..shots {
        let u = rng.gen::<f64>() * acc;
        // First index whose cumulative weight exceeds u; never a zero-weight entry.
        let k = cdf.partition_point(|&c| c <= u).min(state.len() - 1);
        counts[k] += 1;
    }
    let mut set = SampleSet::new(bit_len, seed);
    for (k, c) in counts.into_iter().enumerate() {
        set.add(k as u64, c);
    }
    set
}

/// Flips every bit of every shot independently with probability `p_flip`.
pub fn apply_readout_noise(s: &SampleSet, p_flip: f64, seed: u64) -> Result<SampleSet> {
    if !(0.0..=1.0).contains(&p_flip) {
        return Err(Error::Range(format!("p_flip = {p_flip} outside [0, 1]")));
    }
    let mut out = SampleSet::new(s.bit_len, s.seed);
    if p_flip == 0.0 {
        out.counts = s.counts.clone();
        out.shots = s.shots;
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (&bits, &count) in &s.counts {
        for _ in 0..count {
            let mut b = bits;
            for k in 0..s.bit_len {
                if rng.gen_bool(p_flip) {
                    b ^= 1 << k;
                }
            }
            out.add(b, 1);
        }
    }
    Ok(out)
}

/// Amplitude of determinant `d` in a two-register state.
pub fn amplitude(state: &[Complex64], d: &Determinant, norb: usize) -> Complex64 {
    state[(d.alpha.0 | d.beta.0 << norb) as usize]
}

/// `⟨Ψ|H|Ψ⟩ / ⟨Ψ|Ψ⟩` restricted to the table's (Nα, Nβ) sector.
pub fn energy_expectation(state: &[Complex64], table: &IntegralTable) -> Result<f64> {
    let norb = table.norb();
    if state.len() != 1usize << (2 * norb) {
        return Err(Error::Shape(format!(
            "state has {} amplitudes, expected 2^{}",
            state.len(),
            2 * norb
        )));
    }
    let sub = fci_space_with_cap(norb, table.n_alpha(), table.n_beta(), DEFAULT_FCI_CAP)?;
    let h = build_hamiltonian(&sub, table)?;
    let amps: Vec<Complex64> = sub.dets().iter().map(|d| amplitude(state, d, norb)).collect();
    let re: Vec<f64> = amps.iter().map(|a| a.re).collect();
    let im: Vec<f64> = amps.iter().map(|a| a.im).collect();
    let quad = |v: &[f64]| {
        let mut hv = vec![0.0; v.len()];
        crate::solver::LinearOperator::apply(&h, v, &mut hv);
        v.iter().zip(&hv).map(|(a, b)| a * b).sum::<f64>()
    };
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if norm == 0.0 {
        return Err(Error::Empty("state has no weight in the sector"));
    }
    Ok((quad(&re) + quad(&im)) / norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_circuit_keeps_initial_state() {
        let psi = simulate_statevector(&CircuitIR::new(3), 0b101).unwrap();
        assert_eq!(psi[0b101], Complex64::new(1.0, 0.0));
        assert_eq!(psi.iter().filter(|a| a.norm_sqr() > 0.0).count(), 1);
    }

    #[test]
    fn givens_on_single_electron() {
        let mut c = CircuitIR::new(2);
        c.push(Gate::Givens {
            a: 0,
            b: 1,
            theta: 0.3,
            phi: 0.0,
        })
        .unwrap();
        let psi = simulate_statevector(&c, 0b01).unwrap();
        assert!((psi[0b01].re - 0.3f64.cos()).abs() < 1e-15);
        assert!((psi[0b10].re - 0.3f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn capacity_enforced() {
        let c = CircuitIR::new(5);
        assert!(matches!(simulate_with_cap(&c, 0, 4), Err(Error::Capacity { .. })));
    }

    #[test]
    fn deterministic_state_sampling() {
        let psi = simulate_statevector(&CircuitIR::new(2), 0b10).unwrap();
        let s = sample(&psi, 100, 1);
        assert_eq!(s.counts.len(), 1);
        assert_eq!(s.counts[&0b10], 100);
    }

    #[test]
    fn noise_extremes() {
        let mut s = SampleSet::new(3, 0);
        s.add(0b001, 4);
        assert_eq!(apply_readout_noise(&s, 0.0, 1).unwrap(), s);
        let all = apply_readout_noise(&s, 1.0, 1).unwrap();
        assert_eq!(all.counts[&0b110], 4);
        assert!(apply_readout_noise(&s, 1.5, 1).is_err());
    }
}
