//! Flip measured bits at random, then restore the particle-number sector with
//! configuration recovery and report the batch energies.

use hsqd::integrals::parse_fcidump;
use hsqd::lucj::{
    apply_readout_noise, build_full_circuit, hf_occupation, mp2_parameters, sample, simulate_statevector, CouplingMap,
};
use hsqd::recovery::{recover, Layout, RecoveryConfig, RecoveryMode};

fn main() -> hsqd::Result<()> {
    let t = parse_fcidump(&std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/fixtures/h4_1.00.fcidump"
    ))?)?;
    let (n, na, nb) = (t.norb(), t.n_alpha(), t.n_beta());
    let circ = build_full_circuit(&mp2_parameters(&t, 1, 1.0, 5.0)?, n, CouplingMap::AllToAll)?;
    let psi = simulate_statevector(&circ, hf_occupation(n, na, nb, true))?;
    let noisy = apply_readout_noise(&sample(&psi, 20_000, 1), 0.05, 2)?;
    let layout = Layout::full(n, na, nb);
    for mode in [
        RecoveryMode::ValidOcc0C,
        RecoveryMode::Sccr,
        RecoveryMode::EmpiricalProb,
    ] {
        let cfg = RecoveryConfig {
            mode,
            cycles: 3,
            ..Default::default()
        };
        let rec = recover(&noisy, &t, &layout, &cfg)?;
        // Zero-cycle modes only correct; no batch is diagonalized.
        let best = rec
            .best
            .as_ref()
            .map_or("none".to_string(), |g| format!("{:.8}", g.energy));
        println!(
            "{mode:?}: valid {:.1}% -> {:.1}%, best batch energy {best}",
            100.0 * rec.trace.valid_fraction,
            100.0 * rec.trace.final_valid_fraction
        );
    }
    Ok(())
}
