mod common;

use common::{fixture_dir, load, metadata, random_table};
use hsqd::integrals::{parse_fcidump, write_fcidump, IntegralTable};
use hsqd::Error;
use proptest::prelude::*;

/// Closed-shell RHF energy from the integrals directly.
fn rhf_energy(t: &IntegralTable) -> f64 {
    let nocc = t.nelec() / 2;
    let mut e = t.e_core();
    for i in 0..nocc {
        e += 2.0 * t.h1(i, i);
        for j in 0..nocc {
            e += 2.0 * t.eri(i, i, j, j) - t.eri(i, j, j, i);
        }
    }
    e
}

#[test]
fn h2_fixture_fields_and_rhf_energy() {
    let t = load("h2_0.74");
    assert_eq!(t.norb(), 2);
    assert_eq!(t.nelec(), 2);
    assert_eq!(t.n_spin_orbitals(), 4);
    let meta = metadata("h2_0.74");
    assert!((rhf_energy(&t) - meta.e_hf).abs() < 1e-8);
}

#[test]
fn rhf_energy_matches_every_fixture() {
    for name in ["h2_0.50", "h2_1.00", "h4_1.00", "lih_1.60", "n2_1.10"] {
        let t = load(name);
        let meta = metadata(name);
        assert!((rhf_energy(&t) - meta.e_hf).abs() < 1e-8, "{name}");
    }
}

#[test]
fn h2_coulomb_integral_matches_file_line() {
    let text = std::fs::read_to_string(fixture_dir().join("h2_0.74.fcidump")).unwrap();
    let raw = text
        .lines()
        .filter_map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            (f.len() == 5 && f[1..] == ["1", "1", "1", "1"]).then(|| f[0].parse::<f64>().unwrap())
        })
        .next()
        .unwrap();
    assert_eq!(load("h2_0.74").get_h2(1, 1, 1, 1).unwrap(), raw);
}

#[test]
fn toy_table_from_text() {
    let t = parse_fcidump("&FCI NORB=1,NELEC=2,MS2=0,&END\n-1.0 1 1 0 0\n0.5 1 1 1 1\n0.0 0 0 0 0\n").unwrap();
    assert_eq!(t.get_h1(1, 1).unwrap(), -1.0);
    assert_eq!(t.get_h2(1, 1, 1, 1).unwrap(), 0.5);
    assert_eq!(t.e_core(), 0.0);
}

#[test]
fn unstored_integral_is_zero_and_symmetric_lookup_works() {
    let mut t = IntegralTable::new(2, 2, 0);
    t.insert_h2(1, 2, 1, 1, 0.3).unwrap();
    assert_eq!(t.get_h2(2, 1, 1, 1).unwrap(), 0.3);
    assert_eq!(t.get_h2(1, 1, 2, 2).unwrap(), 0.0);
    assert!(matches!(t.get_h2(3, 1, 1, 1), Err(Error::Index(_))));
}

#[test]
fn index_beyond_norb_is_rejected() {
    let text = "&FCI NORB=2,NELEC=2,&END\n0.1 3 1 0 0\n";
    assert!(matches!(parse_fcidump(text), Err(Error::Index(_))));
}

#[test]
fn every_fixture_round_trips() {
    for entry in std::fs::read_dir(fixture_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "fcidump") {
            let t = parse_fcidump(&std::fs::read_to_string(&path).unwrap()).unwrap();
            assert_eq!(parse_fcidump(&write_fcidump(&t)).unwrap(), t, "{}", path.display());
        }
    }
}

/// Set `HSQD_BLESS=1` to regenerate the frozen file.
#[test]
fn golden_writer_output() {
    let golden = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/h2_0.74.fcidump");
    let out = write_fcidump(&load("h2_0.74"));
    if std::env::var_os("HSQD_BLESS").is_some() {
        std::fs::write(&golden, &out).unwrap();
    }
    assert_eq!(out, std::fs::read_to_string(golden).unwrap());
}

fn permutations(p: usize, q: usize, r: usize, s: usize) -> [[usize; 4]; 8] {
    [
        [p, q, r, s],
        [q, p, r, s],
        [p, q, s, r],
        [q, p, s, r],
        [r, s, p, q],
        [s, r, p, q],
        [r, s, q, p],
        [s, r, q, p],
    ]
}

proptest! {
    #[test]
    fn eightfold_symmetry(norb in 1usize..5, seed in any::<u64>(), idx in prop::array::uniform4(0usize..4)) {
        let t = random_table(norb, 2, seed);
        let [p, q, r, s] = idx.map(|i| i % norb + 1);
        let v = t.get_h2(p, q, r, s).unwrap();
        for [a, b, c, d] in permutations(p, q, r, s) {
            prop_assert_eq!(t.get_h2(a, b, c, d).unwrap(), v);
            prop_assert_eq!(t.eri(a - 1, b - 1, c - 1, d - 1), v);
        }
    }

    #[test]
    fn write_then_parse_is_identity(norb in 1usize..6, seed in any::<u64>()) {
        let t = random_table(norb, 2, seed);
        prop_assert_eq!(parse_fcidump(&write_fcidump(&t)).unwrap(), t);
    }

    #[test]
    fn out_of_range_never_truncates(norb in 1usize..5, extra in 1usize..4) {
        let text = format!("&FCI NORB={norb},NELEC=2,&END\n0.25 {} 1 1 1\n", norb + extra);
        prop_assert!(matches!(parse_fcidump(&text), Err(Error::Index(_))));
    }
}
