mod common;

use std::collections::BTreeSet;

use common::{apply_hamiltonian, fock_state, load, metadata, random_table};
use hsqd::determinants::{combine, excitation_degree, strings, Determinant, HalfConfiguration};
use hsqd::integrals::IntegralTable;
use hsqd::selection::{
    classical_hci, generate_candidates, hci_criterion, hci_select_from_samples, subspace_halves, SelectionConfig,
    StopReason,
};
use hsqd::solver::{fci_energy, ground_state, SolverOptions};
use hsqd::Error;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cfg(epsilon1: f64) -> SelectionConfig {
    SelectionConfig {
        epsilon1,
        ..Default::default()
    }
}

fn brute_candidates(x: &Determinant, s: &[HalfConfiguration]) -> BTreeSet<Determinant> {
    let (na, nb) = x.sector();
    let mut out = BTreeSet::new();
    for &y in s.iter().filter(|h| h.popcount() == na) {
        for &z in s.iter().filter(|h| h.popcount() == nb) {
            let d = excitation_degree(x.alpha, y).degree + excitation_degree(x.beta, z).degree;
            if d == 1 || d == 2 {
                out.insert(combine(y, z));
            }
        }
    }
    out
}

fn random_halves(norb: usize, n: usize, keep: usize, seed: u64) -> Vec<HalfConfiguration> {
    let mut all = strings(norb, n);
    all.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    all.truncate(keep);
    all
}

#[test]
fn candidates_match_brute_force() {
    for seed in 0..20 {
        let norb = 6;
        let s = random_halves(norb, 3, 4 + seed as usize, seed);
        for &a in &s {
            for &b in s.iter().take(3) {
                let x = combine(a, b);
                let got: BTreeSet<Determinant> = generate_candidates(&x, &s, norb).unwrap().into_iter().collect();
                assert_eq!(got, brute_candidates(&x, &s), "seed {seed}");
            }
        }
    }
}

#[test]
fn candidates_reject_foreign_sector() {
    let x = Determinant::new(0b0011, 0b0011);
    let s = [HalfConfiguration(0b0111)];
    assert!(matches!(generate_candidates(&x, &s, 4), Err(Error::Sector(_))));
}

#[test]
fn first_iteration_matches_hamiltonian_row() {
    let t = load("h4_1.00");
    let norb = t.norb();
    let eps = 1e-3;
    let c = SelectionConfig {
        epsilon1: eps,
        max_iters: 1,
        ..Default::default()
    };
    let r = classical_hci(&t, &c).unwrap();
    let hf = Determinant::hartree_fock(2, 2);
    let row = apply_hamiltonian(fock_state(&hf, norb), &t);
    let mut expected: BTreeSet<u128> = row
        .iter()
        .filter(|(&k, v)| k != fock_state(&hf, norb) && v.abs() >= eps)
        .map(|(&k, _)| k)
        .collect();
    expected.insert(fock_state(&hf, norb));
    let got: BTreeSet<u128> = r.subspace.dets().iter().map(|d| fock_state(d, norb)).collect();
    assert_eq!(got, expected);
}

#[test]
fn saturates_to_fci_on_full_string_set() {
    for name in ["h4_1.00", "lih_1.60"] {
        let t = load(name);
        let e_fci = metadata(name).e_fci;
        let all = strings(t.norb(), t.n_alpha());
        let r = hci_select_from_samples(&all, &t, &cfg(1e-10)).unwrap();
        assert!((r.energy() - e_fci).abs() < 1e-8, "{name}: {} vs {e_fci}", r.energy());
        let c = classical_hci(&t, &cfg(1e-10)).unwrap();
        assert_eq!(c.subspace.dets(), r.subspace.dets());
    }
}

#[test]
fn selected_energy_is_variational_and_consistent() {
    let t = load("lih_1.60");
    let e_fci = fci_energy(&t).unwrap().energy;
    let r = classical_hci(&t, &cfg(1e-4)).unwrap();
    assert!(r.energy() >= e_fci - 1e-10);
    let direct = ground_state(&r.subspace, &t, &SolverOptions::default()).unwrap();
    assert!((direct.energy - r.energy()).abs() < 1e-9);
}

#[test]
fn subset_of_sample_strings() {
    let t = load("lih_1.60");
    let s = random_halves(6, 2, 8, 4);
    let r = hci_select_from_samples(&s, &t, &cfg(1e-6)).unwrap();
    let mut allowed: BTreeSet<HalfConfiguration> = s.iter().copied().collect();
    allowed.insert(HalfConfiguration::lowest(2));
    for h in subspace_halves(&r.subspace) {
        assert!(allowed.contains(&h), "{}", h.to_bitstring(6));
    }
}

#[test]
fn smaller_threshold_gives_larger_lower() {
    let t = load("lih_1.60");
    let mut prev: Option<(usize, f64)> = None;
    for eps in [1e-2, 1e-3, 1e-4, 1e-5] {
        let r = classical_hci(&t, &cfg(eps)).unwrap();
        if let Some((n, e)) = prev {
            assert!(r.len() >= n, "size at {eps}");
            assert!(r.energy() <= e + 1e-10, "energy at {eps}");
        }
        prev = Some((r.len(), r.energy()));
    }
}

#[test]
fn target_size_caps_growth() {
    let t = load("lih_1.60");
    let c = SelectionConfig {
        epsilon1: 1e-8,
        target_size: 40,
        ..Default::default()
    };
    let r = classical_hci(&t, &c).unwrap();
    assert_eq!(r.len(), 40);
    assert_eq!(r.stop_reason, StopReason::Size);
}

#[test]
fn exhausted_when_nothing_passes() {
    let t = load("h2_0.74");
    let r = classical_hci(&t, &cfg(10.0)).unwrap();
    assert_eq!(r.len(), 1);
    assert_eq!(r.stop_reason, StopReason::Exhausted);
}

#[test]
fn deterministic() {
    let t = load("h4_1.00");
    let s = random_halves(4, 2, 4, 9);
    let a = hci_select_from_samples(&s, &t, &cfg(1e-5)).unwrap();
    let b = hci_select_from_samples(&s, &t, &cfg(1e-5)).unwrap();
    assert_eq!(a.subspace.dets(), b.subspace.dets());
    assert_eq!(a.energy().to_bits(), b.energy().to_bits());
}

#[test]
fn trace_serializes() {
    let t = load("h4_1.00");
    let r = classical_hci(&t, &cfg(1e-4)).unwrap();
    let v: serde_json::Value = serde_json::to_value(&r).unwrap();
    assert!(v["trace"].as_array().unwrap().len() >= 2);
    assert!(v["stop_reason"].is_string());
    assert!(v["peak_candidates"].as_u64().unwrap() > 0);
}

#[test]
fn single_determinant_system() {
    let t = random_table(1, 2, 3);
    let r = classical_hci(&t, &cfg(1e-6)).unwrap();
    assert_eq!(r.len(), 1);
    assert_eq!(r.stop_reason, StopReason::Exhausted);
    assert!((r.energy() - fci_energy(&t).unwrap().energy).abs() < 1e-12);
}

#[test]
fn first_iteration_agrees_with_classical() {
    let t = load("h4_1.00");
    let one = SelectionConfig {
        epsilon1: 1e-3,
        max_iters: 1,
        ..Default::default()
    };
    let a = hci_select_from_samples(&strings(4, 2), &t, &one).unwrap();
    let b = classical_hci(&t, &one).unwrap();
    let sa: BTreeSet<Determinant> = a.subspace.dets().iter().copied().collect();
    let sb: BTreeSet<Determinant> = b.subspace.dets().iter().copied().collect();
    assert_eq!(sa, sb);
}

#[test]
fn restricted_selection_is_subset_of_classical() {
    let t = load("h4_1.00");
    for seed in 0..6 {
        let s = random_halves(4, 2, 3, seed);
        let one = SelectionConfig {
            epsilon1: 1e-3,
            max_iters: 1,
            ..Default::default()
        };
        let a = hci_select_from_samples(&s, &t, &one).unwrap();
        let b = classical_hci(&t, &one).unwrap();
        assert!(a.subspace.dets().iter().all(|d| b.subspace.contains(d)), "seed {seed}");
    }
}

#[test]
fn trace_and_connectivity_invariants() {
    let t = load("lih_1.60");
    let s = random_halves(6, 2, 10, 1);
    let r = hci_select_from_samples(&s, &t, &cfg(1e-5)).unwrap();
    assert!(r.trace.windows(2).all(|w| w[1].energy <= w[0].energy + 1e-10));
    let dets = r.subspace.dets();
    for (j, d) in dets.iter().enumerate().skip(1) {
        let linked = dets[..j].iter().any(|x| {
            let k = excitation_degree(x.alpha, d.alpha).degree + excitation_degree(x.beta, d.beta).degree;
            k == 1 || k == 2
        });
        assert!(linked, "determinant {j} has no earlier neighbour");
    }
    let n = s.len() + 1;
    assert!(r.trace.iter().all(|it| it.candidates <= r.peak_candidates));
    let frontier_bound: usize = r.trace.windows(2).map(|w| w[0].accepted * n * n).max().unwrap();
    assert!(r.peak_candidates <= frontier_bound);
}

fn table_strategy() -> impl Strategy<Value = (IntegralTable, u64)> {
    (3usize..6, any::<u64>()).prop_map(|(norb, seed)| (random_table(norb, 2, seed), seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn criterion_is_symmetric(h in -1.0f64..1.0, c in -1.0f64..1.0, eps in 1e-6f64..0.1) {
        prop_assert_eq!(hci_criterion(h, c, eps), hci_criterion(-h, c, eps));
        prop_assert_eq!(hci_criterion(h, c, eps), hci_criterion(h, -c, eps));
        prop_assert_eq!(hci_criterion(h, c, eps), (h * c).abs() >= eps);
    }

    #[test]
    fn selection_bounded_by_fci((t, seed) in table_strategy(), eps in 1e-4f64..1e-1) {
        let e_fci = fci_energy(&t).unwrap().energy;
        let s = random_halves(t.norb(), 1, t.norb().min(2 + (seed % 3) as usize), seed);
        let r = hci_select_from_samples(&s, &t, &cfg(eps)).unwrap();
        prop_assert!(r.energy() >= e_fci - 1e-9);
        let c = classical_hci(&t, &cfg(eps)).unwrap();
        prop_assert!(c.energy() >= e_fci - 1e-9);
    }

    #[test]
    fn candidates_always_brute((norb, seed) in (3usize..7, any::<u64>())) {
        let s = random_halves(norb, 2, 5, seed);
        let x = combine(s[0], s[s.len() - 1]);
        let got: BTreeSet<Determinant> = generate_candidates(&x, &s, norb).unwrap().into_iter().collect();
        prop_assert_eq!(got, brute_candidates(&x, &s));
    }
}
