//! Occupation bitmasks and Slater–Condon matrix elements.
//!
//! Bit `p` of a [`HalfConfiguration`] marks spatial orbital `p` (0-based) as
//! occupied for one spin. Fermionic phases are computed within each spin
//! string; the α string is ordered before the β string, so a β excitation
//! never picks up a sign from the α electrons.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::integrals::IntegralTable;

/// Iterates the indices of the set bits of `mask`, lowest first.
#[inline]
pub fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let i = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(i)
        }
    })
}

/// Mask with the lowest `n` bits set.
#[inline]
pub fn low_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Single-spin occupation string.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct HalfConfiguration(pub u64);

impl HalfConfiguration {
    pub fn new(mask: u64) -> Self {
        HalfConfiguration(mask)
    }

    /// The `n` lowest orbitals occupied.
    pub fn lowest(n: usize) -> Self {
        HalfConfiguration(low_mask(n))
    }

    #[inline]
    pub fn mask(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn popcount(self) -> u32 {
        self.0.count_ones()
    }

    #[inline]
    pub fn is_occupied(self, p: usize) -> bool {
        self.0 >> p & 1 == 1
    }

    pub fn occupied(self) -> impl Iterator<Item = usize> {
        bits(self.0)
    }

    /// True when no bit at or beyond `norb` is set.
    pub fn fits(self, norb: usize) -> bool {
        self.0 & !low_mask(norb) == 0
    }

    /// Text form of length `norb`; character `p` is orbital `p`.
    pub fn to_bitstring(self, norb: usize) -> String {
        (0..norb).map(|p| if self.is_occupied(p) { '1' } else { '0' }).collect()
    }

    pub fn from_bitstring(s: &str) -> Result<Self> {
        if s.len() > 64 {
            return Err(Error::Range(format!("bitstring of length {} exceeds 64", s.len())));
        }
        let mut mask = 0u64;
        for (p, c) in s.chars().enumerate() {
            match c {
                '1' => mask |= 1 << p,
                '0' => {}
                _ => return Err(Error::Range(format!("invalid bit character `{c}`"))),
            }
        }
        Ok(HalfConfiguration(mask))
    }
}

/// Lexicographic order of the text form.
impl Ord for HalfConfiguration {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.reverse_bits().cmp(&other.0.reverse_bits())
    }
}

impl PartialOrd for HalfConfiguration {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Full configuration `x = x_α ⊕ x_β`. Ordered lexicographically by its
/// text form (α block first).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Determinant {
    pub alpha: HalfConfiguration,
    pub beta: HalfConfiguration,
}

impl Determinant {
    pub fn new(alpha: u64, beta: u64) -> Self {
        Determinant {
            alpha: HalfConfiguration(alpha),
            beta: HalfConfiguration(beta),
        }
    }

    pub fn hartree_fock(n_alpha: usize, n_beta: usize) -> Self {
        combine(HalfConfiguration::lowest(n_alpha), HalfConfiguration::lowest(n_beta))
    }

    pub fn sector(&self) -> (u32, u32) {
        (self.alpha.popcount(), self.beta.popcount())
    }

    /// Length-`2 * norb` text form, α block then β block.
    pub fn to_bitstring(&self, norb: usize) -> String {
        let mut s = self.alpha.to_bitstring(norb);
        s.push_str(&self.beta.to_bitstring(norb));
        s
    }

    pub fn from_bitstring(s: &str) -> Result<Self> {
        if !s.len().is_multiple_of(2) {
            return Err(Error::Layout(format!(
                "full bitstring must have even length, got {}",
                s.len()
            )));
        }
        let (a, b) = s.split_at(s.len() / 2);
        Ok(combine(
            HalfConfiguration::from_bitstring(a)?,
            HalfConfiguration::from_bitstring(b)?,
        ))
    }
}

impl fmt::Display for Determinant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:#x}|{:#x}]", self.alpha.0, self.beta.0)
    }
}

/// `y ⊕ z`: α string `y`, β string `z`.
#[inline]
pub fn combine(y: HalfConfiguration, z: HalfConfiguration) -> Determinant {
    Determinant { alpha: y, beta: z }
}

/// Excitation degree between two single-spin strings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DegreeReport {
    pub degree: u32,
    /// Set when the strings hold different electron counts.
    pub sector_mismatch: bool,
}

/// `ceil(popcount(a ^ b) / 2)`, with a flag when the electron counts differ.
pub fn excitation_degree(a: HalfConfiguration, b: HalfConfiguration) -> DegreeReport {
    let diff = (a.0 ^ b.0).count_ones();
    DegreeReport {
        degree: diff.div_ceil(2),
        sector_mismatch: a.popcount() != b.popcount(),
    }
}

/// Degree for strings already known to share an electron count.
#[inline]
pub(crate) fn degree(a: u64, b: u64) -> u32 {
    (a ^ b).count_ones() / 2
}

/// Sign of `a†_particle a_hole |mask>` relative to the canonically ordered
/// result. `mask` must contain `hole`.
#[inline]
pub fn single_phase(mask: u64, hole: usize, particle: usize) -> f64 {
    let (lo, hi) = if hole < particle {
        (hole, particle)
    } else {
        (particle, hole)
    };
    let between = mask & low_mask(hi) & !low_mask(lo + 1);
    if between.count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Holes, particles and phase connecting two determinants.
#[derive(Clone, Debug, PartialEq)]
pub struct ExcitationInfo {
    pub degree: usize,
    pub holes_alpha: Vec<usize>,
    pub particles_alpha: Vec<usize>,
    pub holes_beta: Vec<usize>,
    pub particles_beta: Vec<usize>,
    /// Sign of the ordered hole→particle replacement, each hole paired with
    /// the particle of the same rank.
    pub phase: f64,
}

fn string_phase(mut mask: u64, holes: &[usize], particles: &[usize]) -> f64 {
    let mut phase = 1.0;
    for (&h, &p) in holes.iter().zip(particles) {
        phase *= single_phase(mask, h, p);
        mask = (mask & !(1 << h)) | (1 << p);
    }
    phase
}

/// Describes the excitation taking `from` to `to`.
pub fn excitation(from: &Determinant, to: &Determinant) -> Result<ExcitationInfo> {
    check_sector(from, to)?;
    let ha: Vec<usize> = bits(from.alpha.0 & !to.alpha.0).collect();
    let pa: Vec<usize> = bits(to.alpha.0 & !from.alpha.0).collect();
    let hb: Vec<usize> = bits(from.beta.0 & !to.beta.0).collect();
    let pb: Vec<usize> = bits(to.beta.0 & !from.beta.0).collect();
    let phase = string_phase(from.alpha.0, &ha, &pa) * string_phase(from.beta.0, &hb, &pb);
    Ok(ExcitationInfo {
        degree: ha.len() + hb.len(),
        holes_alpha: ha,
        particles_alpha: pa,
        holes_beta: hb,
        particles_beta: pb,
        phase,
    })
}

fn check_sector(d1: &Determinant, d2: &Determinant) -> Result<()> {
    if d1.sector() != d2.sector() {
        return Err(Error::Sector(format!(
            "{d1} has (Nα, Nβ) = {:?}, {d2} has {:?}",
            d1.sector(),
            d2.sector()
        )));
    }
    Ok(())
}

/// `<d1|H|d2>` including the core energy on the diagonal.
pub fn slater_condon(d1: &Determinant, d2: &Determinant, table: &IntegralTable) -> Result<f64> {
    check_sector(d1, d2)?;
    Ok(matrix_element(d1, d2, table))
}

/// Diagonal element `<d|H|d>`.
pub fn diagonal_element(d: &Determinant, table: &IntegralTable) -> f64 {
    let mut e = table.e_core();
    for same in [d.alpha.0, d.beta.0] {
        for i in bits(same) {
            e += table.h1(i, i);
            for j in bits(same & low_mask(i)) {
                e += table.eri(i, i, j, j) - table.eri(i, j, j, i);
            }
        }
    }
    for i in bits(d.alpha.0) {
        for j in bits(d.beta.0) {
            e += table.eri(i, i, j, j);
        }
    }
    e
}

/// Slater–Condon rules without the sector check. Callers guarantee both
/// determinants lie in the same `(Nα, Nβ)` sector.
pub(crate) fn matrix_element(d1: &Determinant, d2: &Determinant, table: &IntegralTable) -> f64 {
    let xa = d1.alpha.0 ^ d2.alpha.0;
    let xb = d1.beta.0 ^ d2.beta.0;
    let na = xa.count_ones() / 2;
    let nb = xb.count_ones() / 2;
    match (na, nb) {
        (0, 0) => diagonal_element(d1, table),
        (1, 0) => single_element(d1.alpha.0, d2.alpha.0, d1.beta.0, table),
        (0, 1) => single_element(d1.beta.0, d2.beta.0, d1.alpha.0, table),
        (2, 0) => same_spin_double(d1.alpha.0, d2.alpha.0, table),
        (0, 2) => same_spin_double(d1.beta.0, d2.beta.0, table),
        (1, 1) => {
            let i = (d1.alpha.0 & xa).trailing_zeros() as usize;
            let a = (d2.alpha.0 & xa).trailing_zeros() as usize;
            let j = (d1.beta.0 & xb).trailing_zeros() as usize;
            let b = (d2.beta.0 & xb).trailing_zeros() as usize;
            let phase = single_phase(d1.alpha.0, i, a) * single_phase(d1.beta.0, j, b);
            phase * table.eri(i, a, j, b)
        }
        _ => 0.0,
    }
}

/// Single excitation `i -> a` within the `from` string; `other` is the
/// opposite-spin string.
fn single_element(from: u64, to: u64, other: u64, table: &IntegralTable) -> f64 {
    let diff = from ^ to;
    let i = (from & diff).trailing_zeros() as usize;
    let a = (to & diff).trailing_zeros() as usize;
    let mut v = table.h1(i, a);
    for j in bits(from & !(1 << i)) {
        v += table.eri(i, a, j, j) - table.eri(i, j, j, a);
    }
    for j in bits(other) {
        v += table.eri(i, a, j, j);
    }
    single_phase(from, i, a) * v
}

fn same_spin_double(from: u64, to: u64, table: &IntegralTable) -> f64 {
    let diff = from ^ to;
    let mut holes = bits(from & diff);
    let mut parts = bits(to & diff);
    let (i, j) = (holes.next().unwrap(), holes.next().unwrap());
    let (a, b) = (parts.next().unwrap(), parts.next().unwrap());
    let p1 = single_phase(from, i, a);
    let mid = (from & !(1 << i)) | (1 << a);
    let p2 = single_phase(mid, j, b);
    p1 * p2 * (table.eri(i, a, j, b) - table.eri(i, b, j, a))
}

/// All strings reachable from `mask` by moving one electron within `norb`
/// orbitals: `(hole, particle, new_mask)`.
pub fn singles(mask: u64, norb: usize) -> impl Iterator<Item = (usize, usize, u64)> {
    let empty = !mask & low_mask(norb);
    bits(mask).flat_map(move |i| bits(empty).map(move |a| (i, a, (mask & !(1 << i)) | (1 << a))))
}

/// All strings reachable from `mask` by moving two electrons.
pub fn doubles(mask: u64, norb: usize) -> impl Iterator<Item = u64> {
    let empty = !mask & low_mask(norb);
    bits(mask).flat_map(move |i| {
        bits(mask & !low_mask(i + 1)).flat_map(move |j| {
            bits(empty).flat_map(move |a| {
                bits(empty & !low_mask(a + 1)).map(move |b| (mask & !(1 << i) & !(1 << j)) | (1 << a) | (1 << b))
            })
        })
    })
}

/// All bitmasks of `norb` bits with `n` set, in lexicographic text order.
pub fn strings(norb: usize, n: usize) -> Vec<HalfConfiguration> {
    let mut out = Vec::new();
    if n > norb {
        return out;
    }
    // Gosper's hack enumerates in numeric order; sort into text order afterwards.
    if n == 0 {
        out.push(HalfConfiguration(0));
        return out;
    }
    let mut v = low_mask(n);
    let limit = if norb >= 64 { u64::MAX } else { 1u64 << norb };
    loop {
        out.push(HalfConfiguration(v));
        let c = v & v.wrapping_neg();
        let r = v.wrapping_add(c);
        if r == 0 {
            break;
        }
        v = (((r ^ v) >> 2) / c) | r;
        if norb < 64 && v >= limit {
            break;
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrals::parse_fcidump;

    #[test]
    fn degree_examples() {
        let h = HalfConfiguration;
        assert_eq!(excitation_degree(h(0b0011), h(0b0011)).degree, 0);
        assert_eq!(excitation_degree(h(0b0011), h(0b0101)).degree, 1);
        assert_eq!(excitation_degree(h(0b0011), h(0b1100)).degree, 2);
        let r = excitation_degree(h(0b0011), h(0b0111));
        assert!(r.sector_mismatch);
        assert_eq!(r.degree, 1);
    }

    #[test]
    fn combine_examples() {
        let d = combine(HalfConfiguration(0b01), HalfConfiguration(0b10));
        assert_eq!(d, Determinant::new(0b01, 0b10));
        assert_eq!(combine(d.alpha, d.beta), d);
    }

    #[test]
    fn bitstring_text_form() {
        let d = Determinant::new(0b011, 0b101);
        assert_eq!(d.to_bitstring(3), "110101");
        assert_eq!(Determinant::from_bitstring("110101").unwrap(), d);
        assert!(HalfConfiguration::from_bitstring("10x").is_err());
    }

    #[test]
    fn lexicographic_order() {
        let a = HalfConfiguration::from_bitstring("0110").unwrap();
        let b = HalfConfiguration::from_bitstring("1001").unwrap();
        assert!(a < b);
        let s = strings(4, 2);
        let text: Vec<String> = s.iter().map(|h| h.to_bitstring(4)).collect();
        let mut sorted = text.clone();
        sorted.sort();
        assert_eq!(text, sorted);
        assert_eq!(s.len(), 6);
    }

    #[test]
    fn one_orbital_diagonal() {
        let t = parse_fcidump("&FCI NORB=1,NELEC=2,&END\n-1.0 1 1 0 0\n0.5 1 1 1 1\n").unwrap();
        let d = Determinant::new(1, 1);
        assert_eq!(slater_condon(&d, &d, &t).unwrap(), -1.5);
    }

    #[test]
    fn triple_excitation_is_zero() {
        let mut t = IntegralTable::new(4, 4, 0);
        for p in 1..=4 {
            for q in 1..=4 {
                t.insert_h1(p, q, 0.1 * (p + q) as f64).unwrap();
                for r in 1..=4 {
                    for s in 1..=4 {
                        t.insert_h2(p, q, r, s, 0.01 * (p * q + r * s) as f64).unwrap();
                    }
                }
            }
        }
        let d1 = Determinant::new(0b0011, 0b0011);
        let d2 = Determinant::new(0b1100, 0b0101);
        assert_eq!(slater_condon(&d1, &d2, &t).unwrap(), 0.0);
    }

    #[test]
    fn sector_mismatch_is_error() {
        let t = IntegralTable::new(2, 2, 0);
        let r = slater_condon(&Determinant::new(1, 1), &Determinant::new(3, 0), &t);
        assert!(matches!(r, Err(Error::Sector(_))));
    }

    #[test]
    fn excitation_info_fields() {
        let d1 = Determinant::new(0b0011, 0b0011);
        let d2 = Determinant::new(0b0101, 0b1010);
        let e = excitation(&d1, &d2).unwrap();
        assert_eq!(e.degree, 2);
        assert_eq!(e.holes_alpha, vec![1]);
        assert_eq!(e.particles_alpha, vec![2]);
        assert_eq!(e.holes_beta, vec![0]);
        assert_eq!(e.particles_beta, vec![3]);
    }

    #[test]
    fn single_and_double_counts() {
        assert_eq!(singles(0b0011, 4).count(), 4);
        assert_eq!(doubles(0b0011, 4).count(), 1);
        assert_eq!(doubles(0b00111, 5).count(), 3);
    }
}
