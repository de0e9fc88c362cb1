//! Molecular integrals in FCIDUMP form.
//!
//! Two-electron integrals are kept in chemist notation `(pq|rs)` under a
//! canonical key (`p >= q`, `r >= s`, `pq >= rs` as composite pair index), so
//! any of the eight real-orbital permutations resolves to one entry. A dense
//! copy of both integral sets is maintained alongside the canonical maps for
//! the matrix-element kernels.
//!
//! Public accessors that take orbital indices come in two flavours:
//! [`IntegralTable::get_h1`]/[`IntegralTable::get_h2`] use the 1-based FCIDUMP
//! convention and are range checked; [`IntegralTable::h1`]/[`IntegralTable::eri`]
//! are 0-based and unchecked beyond the slice bounds.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

type H2Key = [usize; 4];

/// One- and two-electron integrals plus header data of an FCIDUMP file.
#[derive(Clone, Debug)]
pub struct IntegralTable {
    norb: usize,
    nelec: usize,
    ms2: i64,
    isym: i64,
    e_core: f64,
    orbsym: Vec<i64>,
    h1: BTreeMap<(usize, usize), f64>,
    h2: BTreeMap<H2Key, f64>,
    h1_dense: Vec<f64>,
    eri_dense: Vec<f64>,
}

impl PartialEq for IntegralTable {
    fn eq(&self, other: &Self) -> bool {
        self.norb == other.norb
            && self.nelec == other.nelec
            && self.ms2 == other.ms2
            && self.isym == other.isym
            && self.e_core == other.e_core
            && self.orbsym == other.orbsym
            && self.h1 == other.h1
            && self.h2 == other.h2
    }
}

fn pair_index(p: usize, q: usize) -> usize {
    let (hi, lo) = if p >= q { (p, q) } else { (q, p) };
    hi * (hi + 1) / 2 + lo
}

/// Canonical storage key of `(pq|rs)`.
pub fn canonical_h2_index(p: usize, q: usize, r: usize, s: usize) -> [usize; 4] {
    let (p, q) = if p >= q { (p, q) } else { (q, p) };
    let (r, s) = if r >= s { (r, s) } else { (s, r) };
    if pair_index(p, q) >= pair_index(r, s) {
        [p, q, r, s]
    } else {
        [r, s, p, q]
    }
}

impl IntegralTable {
    /// Empty table (all integrals zero, no core energy).
    pub fn new(norb: usize, nelec: usize, ms2: i64) -> Self {
        IntegralTable {
            norb,
            nelec,
            ms2,
            isym: 1,
            e_core: 0.0,
            orbsym: vec![1; norb],
            h1: BTreeMap::new(),
            h2: BTreeMap::new(),
            h1_dense: vec![0.0; norb * norb],
            eri_dense: vec![0.0; norb.pow(4)],
        }
    }

    pub fn norb(&self) -> usize {
        self.norb
    }

    pub fn nelec(&self) -> usize {
        self.nelec
    }

    pub fn ms2(&self) -> i64 {
        self.ms2
    }

    pub fn e_core(&self) -> f64 {
        self.e_core
    }

    pub fn orbsym(&self) -> &[i64] {
        &self.orbsym
    }

    /// Number of spin orbitals, `2 * norb`.
    pub fn n_spin_orbitals(&self) -> usize {
        2 * self.norb
    }

    pub fn n_alpha(&self) -> usize {
        ((self.nelec as i64 + self.ms2) / 2) as usize
    }

    pub fn n_beta(&self) -> usize {
        ((self.nelec as i64 - self.ms2) / 2) as usize
    }

    pub fn set_e_core(&mut self, e: f64) {
        self.e_core = e;
    }

    pub fn set_orbsym(&mut self, orbsym: Vec<i64>) -> Result<()> {
        if orbsym.len() != self.norb {
            return Err(Error::Shape(format!(
                "ORBSYM has {} entries for NORB={}",
                orbsym.len(),
                self.norb
            )));
        }
        self.orbsym = orbsym;
        Ok(())
    }

    fn check(&self, idx: &[usize]) -> Result<()> {
        for &i in idx {
            if i == 0 || i > self.norb {
                return Err(Error::Index(format!("orbital index {i} outside 1..={}", self.norb)));
            }
        }
        Ok(())
    }

    /// Stores `h1(p, q) = h1(q, p) = value`, 1-based.
    pub fn insert_h1(&mut self, p: usize, q: usize, value: f64) -> Result<()> {
        self.check(&[p, q])?;
        let key = if p >= q { (p, q) } else { (q, p) };
        if let Some(&old) = self.h1.get(&key) {
            if old != value {
                return Err(Error::Duplicate {
                    index: [key.0, key.1, 0, 0],
                    first: old,
                    second: value,
                });
            }
        }
        self.h1.insert(key, value);
        let n = self.norb;
        self.h1_dense[(p - 1) * n + (q - 1)] = value;
        self.h1_dense[(q - 1) * n + (p - 1)] = value;
        Ok(())
    }

    /// Stores `(pq|rs)` and all of its symmetry images, 1-based.
    pub fn insert_h2(&mut self, p: usize, q: usize, r: usize, s: usize, value: f64) -> Result<()> {
        self.check(&[p, q, r, s])?;
        let key = canonical_h2_index(p, q, r, s);
        if let Some(&old) = self.h2.get(&key) {
            if old != value {
                return Err(Error::Duplicate {
                    index: key,
                    first: old,
                    second: value,
                });
            }
        }
        self.h2.insert(key, value);
        let [p, q, r, s] = key.map(|i| i - 1);
        for [a, b, c, d] in [
            [p, q, r, s],
            [q, p, r, s],
            [p, q, s, r],
            [q, p, s, r],
            [r, s, p, q],
            [s, r, p, q],
            [r, s, q, p],
            [s, r, q, p],
        ] {
            let i = self.dense_index(a, b, c, d);
            self.eri_dense[i] = value;
        }
        Ok(())
    }

    #[inline]
    fn dense_index(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        let n = self.norb;
        ((p * n + q) * n + r) * n + s
    }

    /// `h1(p, q)` with 1-based indices.
    pub fn get_h1(&self, p: usize, q: usize) -> Result<f64> {
        self.check(&[p, q])?;
        Ok(self.h1(p - 1, q - 1))
    }

    /// `(pq|rs)` with 1-based indices; integrals absent from the file are zero.
    pub fn get_h2(&self, p: usize, q: usize, r: usize, s: usize) -> Result<f64> {
        self.check(&[p, q, r, s])?;
        Ok(self.h2.get(&canonical_h2_index(p, q, r, s)).copied().unwrap_or(0.0))
    }

    /// 0-based one-electron integral.
    #[inline]
    pub fn h1(&self, p: usize, q: usize) -> f64 {
        self.h1_dense[p * self.norb + q]
    }

    /// 0-based two-electron integral `(pq|rs)`.
    #[inline]
    pub fn eri(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.eri_dense[self.dense_index(p, q, r, s)]
    }

    /// Canonical `(p, q)` keys (1-based, `p >= q`) and values.
    pub fn h1_entries(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.h1.iter().map(|(&k, &v)| (k, v))
    }

    /// Canonical `(pq|rs)` keys (1-based) and values.
    pub fn h2_entries(&self) -> impl Iterator<Item = ([usize; 4], f64)> + '_ {
        self.h2.iter().map(|(&k, &v)| (k, v))
    }
}

fn parse_float(tok: &str) -> Option<f64> {
    tok.replace(['D', 'd'], "e").parse().ok()
}

struct Header {
    norb: usize,
    nelec: usize,
    ms2: i64,
    isym: i64,
    orbsym: Option<Vec<i64>>,
}

fn parse_header(text: &str, line: usize) -> Result<Header> {
    // Split into tokens, keeping '=' as its own token.
    let mut tokens: Vec<String> = Vec::new();
    for piece in text.split(|c: char| c == ',' || c.is_whitespace()) {
        let mut rest = piece;
        while let Some(pos) = rest.find('=') {
            if pos > 0 {
                tokens.push(rest[..pos].to_string());
            }
            tokens.push("=".into());
            rest = &rest[pos + 1..];
        }
        if !rest.is_empty() {
            tokens.push(rest.to_string());
        }
    }
    let mut values: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut current: Option<String> = None;
    let mut i = 0;
    while i < tokens.len() {
        if tokens.get(i + 1).map(String::as_str) == Some("=") {
            let key = tokens[i].to_ascii_uppercase();
            values.insert(key.clone(), Vec::new());
            current = Some(key);
            i += 2;
            continue;
        }
        if tokens[i] == "=" {
            return Err(Error::parse(line, "dangling '=' in header"));
        }
        match &current {
            Some(key) => values.get_mut(key).unwrap().push(tokens[i].clone()),
            None => return Err(Error::parse(line, format!("unexpected header token `{}`", tokens[i]))),
        }
        i += 1;
    }
    let int = |key: &str| -> Result<Option<i64>> {
        match values.get(key) {
            None => Ok(None),
            Some(v) if v.len() == 1 => v[0]
                .parse::<i64>()
                .map(Some)
                .map_err(|_| Error::parse(line, format!("{key} is not an integer"))),
            Some(_) => Err(Error::parse(line, format!("{key} expects one value"))),
        }
    };
    let norb = int("NORB")?.ok_or_else(|| Error::parse(line, "header lacks NORB"))?;
    let nelec = int("NELEC")?.ok_or_else(|| Error::parse(line, "header lacks NELEC"))?;
    if norb < 1 || nelec < 0 {
        return Err(Error::parse(line, "NORB must be >= 1 and NELEC >= 0"));
    }
    if nelec > 2 * norb {
        return Err(Error::parse(line, "NELEC exceeds 2*NORB"));
    }
    let orbsym = match values.get("ORBSYM") {
        None => None,
        Some(v) => Some(
            v.iter()
                .map(|t| {
                    t.parse::<i64>()
                        .map_err(|_| Error::parse(line, "ORBSYM entries must be integers"))
                })
                .collect::<Result<Vec<_>>>()?,
        ),
    };
    Ok(Header {
        norb: norb as usize,
        nelec: nelec as usize,
        ms2: int("MS2")?.unwrap_or(0),
        isym: int("ISYM")?.unwrap_or(1),
        orbsym,
    })
}

/// Parses FCIDUMP text.
///
/// Lines with a single nonzero leading index (`e i 0 0 0`, orbital energies in
/// Molpro output) carry no Hamiltonian information and are skipped.
pub fn parse_fcidump(text: &str) -> Result<IntegralTable> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut header_text = String::new();
    let mut header_line = 0;
    let mut in_header = false;
    for (no, raw) in lines.by_ref() {
        let l = raw.trim();
        if !in_header {
            if l.is_empty() {
                continue;
            }
            let upper = l.to_ascii_uppercase();
            let Some(rest) = upper.strip_prefix("&FCI") else {
                return Err(Error::parse(no, "expected `&FCI` namelist header"));
            };
            in_header = true;
            header_line = no;
            header_text.push_str(&l[l.len() - rest.len()..]);
            header_text.push(' ');
        } else {
            header_text.push_str(l);
            header_text.push(' ');
        }
        let upper = header_text.to_ascii_uppercase();
        if let Some(pos) = upper.find("&END") {
            header_text.truncate(pos);
            break;
        }
        if header_text.trim_end().ends_with('/') {
            let t = header_text.trim_end();
            header_text = t[..t.len() - 1].to_string();
            break;
        }
    }
    if !in_header {
        return Err(Error::parse(1, "empty input"));
    }
    let header = parse_header(&header_text, header_line)?;
    let mut table = IntegralTable::new(header.norb, header.nelec, header.ms2);
    table.isym = header.isym;
    if let Some(orbsym) = header.orbsym {
        table
            .set_orbsym(orbsym)
            .map_err(|e| Error::parse(header_line, e.to_string()))?;
    }
    let mut core_seen: Option<f64> = None;
    for (no, raw) in lines {
        let l = raw.trim();
        if l.is_empty() {
            continue;
        }
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != 5 {
            return Err(Error::parse(no, format!("expected `value i j k l`, got `{l}`")));
        }
        let value = parse_float(toks[0]).ok_or_else(|| Error::parse(no, "bad value"))?;
        let mut idx = [0usize; 4];
        for (k, t) in toks[1..].iter().enumerate() {
            let v: i64 = t.parse().map_err(|_| Error::parse(no, format!("bad index `{t}`")))?;
            if v < 0 || v as usize > table.norb {
                return Err(Error::Index(format!("line {no}: index {v} outside 0..={}", table.norb)));
            }
            idx[k] = v as usize;
        }
        match idx {
            [0, 0, 0, 0] => {
                if let Some(old) = core_seen {
                    if old != value {
                        return Err(Error::Duplicate {
                            index: idx,
                            first: old,
                            second: value,
                        });
                    }
                }
                core_seen = Some(value);
                table.e_core = value;
            }
            [i, j, 0, 0] if i > 0 && j > 0 => table.insert_h1(i, j, value)?,
            [_, 0, 0, 0] => {}
            [i, j, k, l] if i > 0 && j > 0 && k > 0 && l > 0 => table.insert_h2(i, j, k, l, value)?,
            _ => return Err(Error::parse(no, format!("unsupported index pattern {idx:?}"))),
        }
    }
    Ok(table)
}

/// Serializes in canonical order: two-electron block, one-electron block, core energy.
pub fn write_fcidump(table: &IntegralTable) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        " &FCI NORB={:>4},NELEC={:>3},MS2={},",
        table.norb, table.nelec, table.ms2
    );
    out.push_str("  ORBSYM=");
    for s in &table.orbsym {
        let _ = write!(out, "{s},");
    }
    out.push('\n');
    let _ = writeln!(out, "  ISYM={},", table.isym);
    out.push_str(" &END\n");
    for (k, v) in &table.h2 {
        let _ = writeln!(out, " {:>24e} {:>4} {:>4} {:>4} {:>4}", v, k[0], k[1], k[2], k[3]);
    }
    for (&(p, q), v) in &table.h1 {
        let _ = writeln!(out, " {:>24e} {:>4} {:>4} {:>4} {:>4}", v, p, q, 0, 0);
    }
    let _ = writeln!(out, " {:>24e} {:>4} {:>4} {:>4} {:>4}", table.e_core, 0, 0, 0, 0);
    out
}
