//! Seed LUCJ parameters from MP2, simulate the half circuit and sample it.

use hsqd::integrals::parse_fcidump;
use hsqd::lucj::{build_half_circuit, hf_occupation, mp2_parameters, sample, simulate_statevector, CouplingMap};

fn main() -> hsqd::Result<()> {
    let t = parse_fcidump(&std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/fixtures/lih_1.60.fcidump"
    ))?)?;
    let params = mp2_parameters(&t, 2, 1.0, 5.0)?;
    let circ = build_half_circuit(&params, t.norb(), CouplingMap::AllToAll)?;
    let psi = simulate_statevector(&circ, hf_occupation(t.norb(), t.n_alpha(), t.n_beta(), false))?;
    let shots = sample(&psi, 10_000, 7);
    let mut top = shots.entries();
    top.sort_by_key(|e| std::cmp::Reverse(e.1));
    println!("{} gates, {} distinct outcomes", circ.gates.len(), shots.unique());
    for (bits, n) in top.iter().take(8) {
        println!("{bits} {n}");
    }
    Ok(())
}
