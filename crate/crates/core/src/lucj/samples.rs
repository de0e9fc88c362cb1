//! Measured bitstrings with multiplicities.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};

/// Bit `k` of a key is character `k` of its bitstring.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SampleSet {
    pub bit_len: usize,
    pub counts: BTreeMap<u64, u64>,
    pub shots: u64,
    pub seed: u64,
}

pub fn bits_to_string(bits: u64, len: usize) -> String {
    (0..len).map(|k| if bits >> k & 1 == 1 { '1' } else { '0' }).collect()
}

pub fn string_to_bits(s: &str) -> Result<u64> {
    if s.len() > 64 {
        return Err(Error::Layout(format!("bitstring of length {} exceeds 64", s.len())));
    }
    s.chars().enumerate().try_fold(0u64, |acc, (k, c)| match c {
        '0' => Ok(acc),
        '1' => Ok(acc | 1 << k),
        _ => Err(Error::Layout(format!("invalid character {c:?} in bitstring"))),
    })
}

impl SampleSet {
    pub fn new(bit_len: usize, seed: u64) -> Self {
        SampleSet {
            bit_len,
            counts: BTreeMap::new(),
            shots: 0,
            seed,
        }
    }

    pub fn add(&mut self, bits: u64, count: u64) {
        if count == 0 {
            return;
        }
        *self.counts.entry(bits).or_default() += count;
        self.shots += count;
    }

    pub fn unique(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shots == 0
    }

    pub fn count_of(&self, bitstring: &str) -> u64 {
        string_to_bits(bitstring)
            .ok()
            .and_then(|b| self.counts.get(&b).copied())
            .unwrap_or(0)
    }

    /// Entries as text bitstrings in lexicographic order.
    pub fn entries(&self) -> Vec<(String, u64)> {
        let mut v: Vec<(String, u64)> = self
            .counts
            .iter()
            .map(|(&b, &c)| (bits_to_string(b, self.bit_len), c))
            .collect();
        v.sort();
        v
    }

    /// Header `bit_len shots seed`, then `bitstring count` lines.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.bit_len, self.shots, self.seed);
        for (s, c) in self.entries() {
            writeln!(out, "{s} {c}").unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "missing header"))?;
        let h: Vec<u64> = header
            .split_whitespace()
            .map(|f| f.parse::<u64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::parse(1, format!("header: {e}")))?;
        let [bit_len, shots, seed] = h[..] else {
            return Err(Error::parse(1, "header must be `bit_len shots seed`"));
        };
        let mut set = SampleSet::new(bit_len as usize, seed);
        for (i, line) in lines {
            let mut f = line.split_whitespace();
            let (Some(s), Some(c), None) = (f.next(), f.next(), f.next()) else {
                return Err(Error::parse(i + 1, "expected `bitstring count`"));
            };
            if s.len() != set.bit_len {
                return Err(Error::parse(
                    i + 1,
                    format!("bitstring length {} != {}", s.len(), set.bit_len),
                ));
            }
            let bits = string_to_bits(s).map_err(|e| Error::parse(i + 1, e.to_string()))?;
            let count = c.parse::<u64>().map_err(|e| Error::parse(i + 1, e.to_string()))?;
            set.add(bits, count);
        }
        if set.shots != shots {
            return Err(Error::parse(
                1,
                format!("header declares {shots} shots, body sums to {}", set.shots),
            ));
        }
        Ok(set)
    }
}
