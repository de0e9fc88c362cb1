//! Qubit and two-qubit gate counts of full and half LUCJ circuits.

use hsqd::lucj::{build_full_circuit, build_half_circuit, gate_stats, CouplingMap, LucjParameters};

fn main() -> hsqd::Result<()> {
    for map in [CouplingMap::AllToAll, CouplingMap::LinearNearestNeighbor] {
        for norb in [4, 8, 12, 16] {
            let p = LucjParameters::random(norb, 1, 0.5, 1);
            let full = gate_stats(&build_full_circuit(&p, norb, map)?);
            let half = gate_stats(&build_half_circuit(&p, norb, map)?);
            println!(
                "{map:?} norb {norb:2}: 2q {:5} -> {:5} ({:.3}), depth {:4} -> {:4}",
                full.two_qubit,
                half.two_qubit,
                half.two_qubit as f64 / full.two_qubit as f64,
                full.depth,
                half.depth
            );
        }
    }
    Ok(())
}
