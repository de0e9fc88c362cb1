//! Diagonalize on the product of α and β half-configuration sets, matrix-free,
//! and compare with the explicit determinant list.

use hsqd::determinants::strings;
use hsqd::integrals::parse_fcidump;
use hsqd::recovery::tensor_subspace;
use hsqd::solver::{ground_state, tensor_ground_state, SolverOptions};

fn main() -> hsqd::Result<()> {
    let t = parse_fcidump(&std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/fixtures/lih_1.60.fcidump"
    ))?)?;
    let opts = SolverOptions::default();
    // A third of the strings, HF first.
    let halves: Vec<_> = strings(t.norb(), t.n_alpha()).into_iter().step_by(3).collect();
    let (gs, op) = tensor_ground_state(halves.clone(), halves.clone(), &t, &opts)?;
    println!(
        "{} x {} product space: E = {:.10}",
        op.alpha_strings().len(),
        op.beta_strings().len(),
        gs.energy
    );
    let explicit = ground_state(&tensor_subspace(&halves)?, &t, &opts)?;
    println!("explicit determinant list:  E = {:.10}", explicit.energy);
    Ok(())
}
