//! One PASS/FAIL line per acceptance criterion. Runs without the libtest
//! harness so the lines always reach the terminal; exits non-zero if any
//! criterion fails.

mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use common::{dense_oracle, fixture_dir, load, metadata, random_table};
use hsqd::determinants::{combine, strings, Determinant, HalfConfiguration};
use hsqd::integrals::{parse_fcidump, write_fcidump};
use hsqd::lucj::{
    build_full_circuit, build_half_circuit, gate_stats, hf_occupation, sample, simulate_statevector, CouplingMap,
    LucjParameters,
};
use hsqd::pipeline::{run_pipeline, Mode, ParameterInit, PipelineConfig};
use hsqd::recovery::{tensor_subspace, unique_halves, Layout, RecoveryMode};
use hsqd::selection::{classical_hci, hci_select_from_samples, SelectionConfig, SelectionResult, StopReason};
use hsqd::solver::{build_hamiltonian, fci_energy, fci_space, ground_state, SolverOptions, Subspace};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MHA: f64 = 1e-3;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(name: &str, limit_s: Option<f64>, f: impl FnOnce() -> Outcome) -> bool {
    let t0 = Instant::now();
    let mut o = f();
    let secs = t0.elapsed().as_secs_f64();
    if let Some(limit) = limit_s {
        if secs > limit {
            o.pass = false;
            o.detail.push_str(&format!("; runtime {secs:.1}s over {limit}s"));
        }
    }
    println!(
        "{} {name}: {} [{secs:.1}s]",
        if o.pass { "PASS" } else { "FAIL" },
        o.detail
    );
    o.pass
}

fn fixture_config(name: &str, mode: Mode) -> PipelineConfig {
    PipelineConfig {
        fcidump: fixture_dir().join(format!("{name}.fcidump")),
        params: Some(fixture_dir().join(format!("{name}_lucj.json"))),
        mode,
        ..Default::default()
    }
}

fn oracle_equivalence() -> Outcome {
    let mut worst_elem = 0.0f64;
    let mut worst_e = 0.0f64;
    for name in [
        "h2_0.50", "h2_0.74", "h2_1.00", "h2_1.50", "h2_2.00", "h4_1.00", "lih_1.60",
    ] {
        let t = load(name);
        let space = fci_space(t.norb(), t.n_alpha(), t.n_beta()).unwrap();
        let h = build_hamiltonian(&space, &t).unwrap();
        let d = dense_oracle(space.dets(), &t);
        for i in 0..space.len() {
            for j in 0..space.len() {
                worst_elem = worst_elem.max((h.get(i, j) - d[(i, j)]).abs());
            }
        }
        worst_e = worst_e.max((fci_energy(&t).unwrap().energy - metadata(name).e_fci).abs());
    }
    Outcome {
        pass: worst_elem <= 1e-12 && worst_e <= 1e-8,
        detail: format!(
            "max element deviation {worst_elem:.2e} (tol 1e-12), max FCI deviation {worst_e:.2e} Ha (tol 1e-8)"
        ),
    }
}

fn noiseless_half_accuracy() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for g in ["1.10", "1.50", "2.00"] {
        let name = format!("n2_{g}");
        let mut c = fixture_config(&name, Mode::Hsqd);
        c.params = None;
        c.lucj.init = ParameterInit::Mp2;
        c.lucj.layers = 4;
        c.fci_cap = 0;
        c.recovery.solver_tol = 1e-7;
        let r = run_pipeline(&c).unwrap();
        let reference = r.reference.as_ref().unwrap();
        assert_eq!(reference.method, "classical_hci");
        let err = r.energy - reference.energy;
        pass &= err.abs() < 5.0 * MHA;
        parts.push(format!(
            "N2 {g}: {:+.3} mHa vs HCI (|S|={})",
            err / MHA,
            r.subspace_size
        ));
    }
    for name in ["h4_1.00", "lih_1.60"] {
        let r = run_pipeline(&fixture_config(name, Mode::Hsqd)).unwrap();
        let err = r.energy - metadata(name).e_fci;
        pass &= err.abs() < MHA;
        parts.push(format!("{name}: {:+.2e} mHa vs FCI", err / MHA));
    }
    Outcome {
        pass,
        detail: parts.join(", "),
    }
}

/// Unique α half-configurations from noiseless half-circuit sampling.
fn noiseless_halves(name: &str, shots: u64) -> Vec<HalfConfiguration> {
    let t = load(name);
    let p =
        LucjParameters::from_json(&std::fs::read_to_string(fixture_dir().join(format!("{name}_lucj.json"))).unwrap())
            .unwrap();
    let circ = build_half_circuit(&p, t.norb(), CouplingMap::AllToAll).unwrap();
    let psi = simulate_statevector(&circ, hf_occupation(t.norb(), t.n_alpha(), t.n_beta(), false)).unwrap();
    let s = sample(&psi, shots, 1);
    unique_halves(s.counts.keys(), &Layout::half(t.norb(), t.n_alpha()))
}

fn selection_accuracy() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["h4_1.00", "lih_1.60"] {
        let t = load(name);
        let r = hci_select_from_samples(&noiseless_halves(name, 100_000), &t, &SelectionConfig::default()).unwrap();
        let err = r.energy() - metadata(name).e_fci;
        let ok_stop = matches!(r.stop_reason, StopReason::Converged | StopReason::Exhausted);
        pass &= err.abs() < MHA && ok_stop;
        parts.push(format!(
            "{name}: {:+.2e} mHa, |S'|={}, stop={:?}",
            err / MHA,
            r.len(),
            r.stop_reason
        ));
    }
    Outcome {
        pass,
        detail: parts.join(", "),
    }
}

fn epsilon_grid() -> Vec<f64> {
    (0..=40).map(|k| 10f64.powf(-1.0 - k as f64 * 0.125)).collect()
}

fn compactness() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["h4_1.00", "lih_1.60"] {
        let t = load(name);
        let e_fci = metadata(name).e_fci;
        let halves = noiseless_halves(name, 100_000);
        let cfg = |eps: f64| SelectionConfig {
            epsilon1: eps,
            ..Default::default()
        };
        let curve = |r: SelectionResult| (r.energy() - e_fci, r.len());
        let sampled: Vec<(f64, usize)> = epsilon_grid()
            .into_iter()
            .map(|e| curve(hci_select_from_samples(&halves, &t, &cfg(e)).unwrap()))
            .collect();
        let classical: Vec<(f64, usize)> = epsilon_grid()
            .into_iter()
            .map(|e| curve(classical_hci(&t, &cfg(e)).unwrap()))
            .collect();
        // Each classical point against the smallest sampled subspace no more than 0.1 mHa less accurate.
        let mut worst: f64 = 0.0;
        let mut unmatched = 0;
        for &(e_c, n_c) in &classical {
            match sampled
                .iter()
                .filter(|&&(e_s, _)| e_s <= e_c + 0.1 * MHA)
                .map(|&(_, n)| n)
                .min()
            {
                Some(n_s) => worst = worst.max(n_s as f64 / n_c as f64),
                None => unmatched += 1,
            }
        }
        pass &= unmatched == 0 && worst <= 1.0;
        parts.push(format!(
            "{name}: worst |S'|/|S_classical| {worst:.3} over {} points, {unmatched} unmatched",
            classical.len()
        ));
    }
    Outcome {
        pass,
        detail: parts.join(", "),
    }
}

fn recovery_ladder() -> Outcome {
    let noiseless = run_pipeline(&fixture_config("h4_1.00", Mode::Hsqd)).unwrap().energy;
    let mut pass = true;
    let mut parts = Vec::new();
    let mut wall = Vec::new();
    for (label, mode, cycles) in [
        ("0C", RecoveryMode::ValidOcc0C, 0),
        ("1C", RecoveryMode::Sccr, 1),
        ("5C", RecoveryMode::Sccr, 5),
        ("9C", RecoveryMode::Sccr, 9),
    ] {
        let mut c = fixture_config("h4_1.00", Mode::Hsqd);
        c.p_flip = 0.02;
        c.recovery.mode = mode;
        c.recovery.cycles = cycles.max(1);
        let r = run_pipeline(&c).unwrap();
        let rec = r.recovery.as_ref().unwrap();
        let dev = (r.energy - noiseless).abs();
        pass &= dev < 2.0 * MHA && rec.final_valid_fraction == 1.0;
        wall.push(rec.wallclock_s);
        parts.push(format!(
            "{label}: dE {:.2e} mHa, raw valid {:.1}%, corrected valid {:.0}%",
            dev / MHA,
            100.0 * rec.valid_fraction,
            100.0 * rec.final_valid_fraction
        ));
    }
    parts.push(format!("wallclock 0C {:.4}s vs 9C {:.4}s", wall[0], wall[3]));
    Outcome {
        pass,
        detail: parts.join(", "),
    }
}

fn resource_reduction() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for norb in [8, 12, 26] {
        let p = LucjParameters::random(norb, 1, 0.5, norb as u64);
        let full = build_full_circuit(&p, norb, CouplingMap::AllToAll).unwrap();
        let half = build_half_circuit(&p, norb, CouplingMap::AllToAll).unwrap();
        let (f, h) = (gate_stats(&full), gate_stats(&half));
        let ratio = h.two_qubit as f64 / f.two_qubit as f64;
        pass &= 2 * half.nqubits == full.nqubits && ratio <= 0.60;
        parts.push(format!(
            "norb {norb}: qubits {}/{}, 2q {}/{} = {ratio:.3}",
            half.nqubits, full.nqubits, h.two_qubit, f.two_qubit
        ));
    }
    Outcome {
        pass,
        detail: parts.join(", "),
    }
}

fn random_subset(dets: &[Determinant], keep: usize, seed: u64) -> Vec<Determinant> {
    let mut v = dets.to_vec();
    v.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    v.truncate(keep);
    v
}

fn property_suites() -> Outcome {
    let mut failed: Vec<&str> = Vec::new();
    let opts = SolverOptions::default();
    for seed in 0..8u64 {
        let t = random_table(4, 4, seed);
        let e_fci = fci_energy(&t).unwrap().energy;
        let space = fci_space(4, 2, 2).unwrap();
        let small = random_subset(space.dets(), 10, seed);
        let mut large = small.clone();
        large.extend(
            random_subset(space.dets(), 20, seed + 100)
                .into_iter()
                .filter(|d| !small.contains(d)),
        );
        let es = ground_state(&Subspace::new(small).unwrap(), &t, &opts).unwrap().energy;
        let el = ground_state(&Subspace::new(large).unwrap(), &t, &opts).unwrap().energy;
        if es < e_fci - 1e-9 {
            failed.push("variational bound");
        }
        if el > es + 1e-9 {
            failed.push("subspace monotonicity");
        }
        let back = parse_fcidump(&write_fcidump(&t)).unwrap();
        let sym = (0..4).all(|p| {
            (0..4).all(|q| {
                (0..4).all(|r| {
                    (0..4).all(|s| {
                        let v = t.eri(p, q, r, s);
                        [
                            t.eri(q, p, r, s),
                            t.eri(p, q, s, r),
                            t.eri(r, s, p, q),
                            t.eri(s, r, q, p),
                            back.eri(p, q, r, s),
                        ]
                        .iter()
                        .all(|w| *w == v)
                    })
                })
            })
        });
        if !sym {
            failed.push("8-fold symmetry");
        }
        let h = strings(4, 2);
        let u = random_subset(
            &h.iter().map(|&y| combine(y, y)).collect::<Vec<_>>(),
            3 + seed as usize % 3,
            seed,
        );
        let halves: Vec<HalfConfiguration> = u.iter().map(|d| d.alpha).collect();
        if tensor_subspace(&halves).unwrap().len() != halves.len() * halves.len() {
            failed.push("tensor cardinality");
        }
        let sub = hci_select_from_samples(&halves, &t, &SelectionConfig::default()).unwrap();
        let mut allowed: BTreeSet<HalfConfiguration> = halves.iter().copied().collect();
        allowed.insert(HalfConfiguration::lowest(2));
        if !sub
            .subspace
            .dets()
            .iter()
            .all(|d| allowed.contains(&d.alpha) && allowed.contains(&d.beta))
        {
            failed.push("selection subset");
        }
        let again = hci_select_from_samples(&halves, &t, &SelectionConfig::default()).unwrap();
        if again.subspace.dets() != sub.subspace.dets() || again.energy().to_bits() != sub.energy().to_bits() {
            failed.push("determinism");
        }
        let p = LucjParameters::random(4, 2, 0.7, seed);
        for (circ, init, n) in [
            (
                build_full_circuit(&p, 4, CouplingMap::AllToAll).unwrap(),
                hf_occupation(4, 2, 2, true),
                4,
            ),
            (
                build_half_circuit(&p, 4, CouplingMap::LinearNearestNeighbor).unwrap(),
                hf_occupation(4, 2, 2, false),
                2,
            ),
        ] {
            let psi = simulate_statevector(&circ, init).unwrap();
            let psi2 = simulate_statevector(&circ, init).unwrap();
            if psi
                .iter()
                .enumerate()
                .any(|(k, a)| a.norm() > 1e-12 && (k as u64).count_ones() != n)
            {
                failed.push("particle conservation");
            }
            if psi != psi2 {
                failed.push("determinism");
            }
        }
    }
    failed.sort();
    failed.dedup();
    Outcome {
        pass: failed.is_empty(),
        detail: if failed.is_empty() {
            "variational bound, monotonicity, 8-fold symmetry, tensor cardinality, selection subset, determinism, particle conservation on 8 seeds".into()
        } else {
            format!("violated: {}", failed.join(", "))
        },
    }
}

fn main() {
    // libtest-style filters (`cargo test -- name`) skip this target.
    if std::env::args().skip(1).any(|a| !a.starts_with('-')) {
        return;
    }
    let results = [
        check("oracle-equivalence", Some(10.0), oracle_equivalence),
        check("noiseless-half-accuracy", Some(600.0), noiseless_half_accuracy),
        check("selection-accuracy", Some(300.0), selection_accuracy),
        check("compactness", None, compactness),
        check("recovery-ladder", None, recovery_ladder),
        check("resource-reduction", Some(60.0), resource_reduction),
        check("property-suites", None, property_suites),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
