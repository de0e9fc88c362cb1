//! Heat-bath selection restricted to sampled half-configurations, next to the
//! unrestricted classical run.

use hsqd::integrals::parse_fcidump;
use hsqd::lucj::{build_half_circuit, hf_occupation, mp2_parameters, sample, simulate_statevector, CouplingMap};
use hsqd::recovery::{unique_halves, Layout};
use hsqd::selection::{classical_hci, hci_select_from_samples, SelectionConfig};
use hsqd::solver::fci_energy;

fn main() -> hsqd::Result<()> {
    let t = parse_fcidump(&std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/fixtures/lih_1.60.fcidump"
    ))?)?;
    let fci = fci_energy(&t)?.energy;
    let (n, na) = (t.norb(), t.n_alpha());
    let circ = build_half_circuit(&mp2_parameters(&t, 2, 1.0, 5.0)?, n, CouplingMap::AllToAll)?;
    let shots = sample(&simulate_statevector(&circ, hf_occupation(n, na, na, false))?, 200, 5);
    let sampled = unique_halves(shots.counts.keys(), &Layout::half(n, na));
    println!("{} sampled half-configurations", sampled.len());
    for eps in [1e-2, 1e-3, 1e-4, 1e-5] {
        let cfg = SelectionConfig {
            epsilon1: eps,
            ..Default::default()
        };
        let s = hci_select_from_samples(&sampled, &t, &cfg)?;
        let c = classical_hci(&t, &cfg)?;
        println!(
            "eps {eps:.0e}: sampled |S'| {:3} dE {:.2e} ({:?}), classical |S'| {:3} dE {:.2e}",
            s.len(),
            s.energy() - fci,
            s.stop_reason,
            c.len(),
            c.energy() - fci
        );
    }
    Ok(())
}
