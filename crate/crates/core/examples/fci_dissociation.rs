//! Exact ground-state energies along the H2 dissociation curve.

use hsqd::integrals::parse_fcidump;
use hsqd::solver::fci_energy;

fn main() -> hsqd::Result<()> {
    for r in ["0.50", "0.74", "1.00", "1.50", "2.00"] {
        let path = format!("{}/fixtures/h2_{r}.fcidump", env!("CARGO_MANIFEST_DIR"));
        let t = parse_fcidump(&std::fs::read_to_string(path)?)?;
        let gs = fci_energy(&t)?;
        println!("R = {r} Å  E = {:.10}  residual {:.1e}", gs.energy, gs.residual);
    }
    Ok(())
}
