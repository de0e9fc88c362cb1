//! Variationally optimize LUCJ parameters for H2 starting from zeros.

use hsqd::integrals::parse_fcidump;
use hsqd::lucj::{optimize_parameters, LucjParameters, OptimizeOptions};
use hsqd::solver::fci_energy;

fn main() -> hsqd::Result<()> {
    let t = parse_fcidump(&std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/fixtures/h2_1.50.fcidump"
    ))?)?;
    let r = optimize_parameters(&LucjParameters::zeros(t.norb(), 1), &t, &OptimizeOptions::default())?;
    let fci = fci_energy(&t)?.energy;
    println!(
        "start {:.8}  optimized {:.8}  FCI {:.8}",
        r.initial_energy, r.energy, fci
    );
    println!("{} energy evaluations", r.evaluations);
    println!("{}", r.params.to_json());
    Ok(())
}
