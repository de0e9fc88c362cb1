//! Parse an FCIDUMP, query integrals under index permutation, and round-trip it.

use hsqd::determinants::{diagonal_element, Determinant};
use hsqd::integrals::{parse_fcidump, write_fcidump};

fn main() -> hsqd::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/h4_1.00.fcidump").into());
    let t = parse_fcidump(&std::fs::read_to_string(&path)?)?;
    println!(
        "norb {} nelec {} ms2 {} e_core {:.10}",
        t.norb(),
        t.nelec(),
        t.ms2(),
        t.e_core()
    );
    println!(
        "(01|23) = {:.10}, (32|10) = {:.10}",
        t.eri(0, 1, 2, 3),
        t.eri(3, 2, 1, 0)
    );
    let hf = Determinant::hartree_fock(t.n_alpha(), t.n_beta());
    println!("E_HF = {:.10}", diagonal_element(&hf, &t));
    let again = parse_fcidump(&write_fcidump(&t))?;
    let same = again.h2_entries().eq(t.h2_entries()) && again.h1_entries().eq(t.h1_entries());
    println!("round trip exact: {same}");
    Ok(())
}
