//! LUCJ parameter blocks and their JSON file form.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;

/// One `exp(K) exp(iJ) exp(-K)` layer.
#[derive(Clone, Debug, PartialEq)]
pub struct LucjLayer {
    /// Antisymmetric orbital-rotation generator.
    pub k: DMatrix<f64>,
    /// Symmetric same-spin couplings.
    pub j_aa: DMatrix<f64>,
    pub j_bb: DMatrix<f64>,
    /// `j_ab[(p, r)]` couples `n_pα` with `n_rβ`.
    pub j_ab: DMatrix<f64>,
}

/// Layers applied first to last, then the extra one-body term `exp(-K₂)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LucjParameters {
    pub norb: usize,
    pub layers: Vec<LucjLayer>,
    pub k2: DMatrix<f64>,
}

/// On-disk layout: matrices flattened row-major, per-layer blocks concatenated.
#[derive(Debug, Default, Deserialize, Serialize)]
pub struct ParameterFile {
    pub norb: usize,
    #[serde(default = "one")]
    pub layers: usize,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<Vec<f64>>,
    #[serde(rename = "J_aa", default, skip_serializing_if = "Option::is_none")]
    pub j_aa: Option<Vec<f64>>,
    #[serde(rename = "J_bb", default, skip_serializing_if = "Option::is_none")]
    pub j_bb: Option<Vec<f64>>,
    #[serde(rename = "J_ab", default, skip_serializing_if = "Option::is_none")]
    pub j_ab: Option<Vec<f64>>,
    #[serde(rename = "K1", default, skip_serializing_if = "Option::is_none")]
    pub k1: Option<Vec<f64>>,
    #[serde(rename = "K2", default, skip_serializing_if = "Option::is_none")]
    pub k2: Option<Vec<f64>>,
}

fn one() -> usize {
    1
}

fn shape_error(what: &str, expected: usize, got: usize) -> Error {
    Error::Shape(format!("{what}: expected {expected} values, got {got}"))
}

fn check_antisymmetric(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if (m + m.transpose()).amax() > SYMMETRY_TOL {
        return Err(Error::Shape(format!("{what} is not antisymmetric")));
    }
    Ok(())
}

fn check_symmetric(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if (m - m.transpose()).amax() > SYMMETRY_TOL {
        return Err(Error::Shape(format!("{what} is not symmetric")));
    }
    Ok(())
}

fn blocks(data: &Option<Vec<f64>>, n: usize, layers: usize, what: &str) -> Result<Vec<DMatrix<f64>>> {
    let size = n * n;
    match data {
        None => Ok(vec![DMatrix::zeros(n, n); layers]),
        Some(v) if v.len() == size * layers => Ok(v.chunks(size).map(|c| DMatrix::from_row_slice(n, n, c)).collect()),
        Some(v) => Err(shape_error(what, size * layers, v.len())),
    }
}

fn flatten(ms: &[&DMatrix<f64>]) -> Vec<f64> {
    ms.iter()
        .flat_map(|m| m.transpose().iter().copied().collect::<Vec<_>>())
        .collect()
}

impl LucjParameters {
    /// All blocks zero; the circuit acts as the identity.
    pub fn zeros(norb: usize, layers: usize) -> Self {
        let z = DMatrix::zeros(norb, norb);
        LucjParameters {
            norb,
            layers: vec![
                LucjLayer {
                    k: z.clone(),
                    j_aa: z.clone(),
                    j_bb: z.clone(),
                    j_ab: z.clone(),
                };
                layers.max(1)
            ],
            k2: z,
        }
    }

    /// Uniform entries in `[-scale, scale]` with the required symmetries.
    /// Same-spin blocks are shared between spins and `J_ab` is symmetric.
    pub fn random(norb: usize, layers: usize, scale: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let antisym = |rng: &mut ChaCha8Rng| {
            let mut m = DMatrix::zeros(norb, norb);
            for p in 0..norb {
                for r in 0..p {
                    let v = scale * (2.0 * rng.gen::<f64>() - 1.0);
                    m[(p, r)] = v;
                    m[(r, p)] = -v;
                }
            }
            m
        };
        let sym = |rng: &mut ChaCha8Rng| {
            let mut m = DMatrix::zeros(norb, norb);
            for p in 0..norb {
                for r in 0..=p {
                    let v = scale * (2.0 * rng.gen::<f64>() - 1.0);
                    m[(p, r)] = v;
                    m[(r, p)] = v;
                }
            }
            m
        };
        let layers = (0..layers.max(1))
            .map(|_| {
                let k = antisym(&mut rng);
                let j_aa = sym(&mut rng);
                let j_ab = sym(&mut rng);
                LucjLayer {
                    k,
                    j_bb: j_aa.clone(),
                    j_aa,
                    j_ab,
                }
            })
            .collect();
        let k2 = antisym(&mut rng);
        LucjParameters { norb, layers, k2 }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.norb;
        if self.layers.is_empty() {
            return Err(Error::Shape("at least one layer is required".into()));
        }
        let mut all = vec![(&self.k2, "K2", true)];
        for l in &self.layers {
            all.extend([
                (&l.k, "K", true),
                (&l.j_aa, "J_aa", false),
                (&l.j_bb, "J_bb", false),
                (&l.j_ab, "J_ab", false),
            ]);
        }
        for (m, what, anti) in all {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::Shape(format!(
                    "{what} is {}x{}, expected {n}x{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if anti {
                check_antisymmetric(m, what)?;
            } else if what != "J_ab" {
                check_symmetric(m, what)?;
            }
        }
        Ok(())
    }

    /// `K1` stands in for the first layer's `K` when `K` is absent.
    pub fn from_file(f: &ParameterFile) -> Result<Self> {
        let (n, layers) = (f.norb, f.layers.max(1));
        let mut ks = blocks(&f.k, n, layers, "K")?;
        if f.k.is_none() {
            if let Some(k1) = &f.k1 {
                ks[0] = blocks(&Some(k1.clone()), n, 1, "K1")?.remove(0);
            }
        }
        let j_aa = blocks(&f.j_aa, n, layers, "J_aa")?;
        let j_bb = if f.j_bb.is_none() {
            j_aa.clone()
        } else {
            blocks(&f.j_bb, n, layers, "J_bb")?
        };
        let j_ab = blocks(&f.j_ab, n, layers, "J_ab")?;
        let k2 = blocks(&f.k2, n, 1, "K2")?.remove(0);
        let params = LucjParameters {
            norb: n,
            layers: ks
                .into_iter()
                .zip(j_aa)
                .zip(j_bb)
                .zip(j_ab)
                .map(|(((k, j_aa), j_bb), j_ab)| LucjLayer { k, j_aa, j_bb, j_ab })
                .collect(),
            k2,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn to_file(&self) -> ParameterFile {
        let ls = &self.layers;
        ParameterFile {
            norb: self.norb,
            layers: ls.len(),
            k: Some(flatten(&ls.iter().map(|l| &l.k).collect::<Vec<_>>())),
            j_aa: Some(flatten(&ls.iter().map(|l| &l.j_aa).collect::<Vec<_>>())),
            j_bb: Some(flatten(&ls.iter().map(|l| &l.j_bb).collect::<Vec<_>>())),
            j_ab: Some(flatten(&ls.iter().map(|l| &l.j_ab).collect::<Vec<_>>())),
            k1: None,
            k2: Some(flatten(&[&self.k2])),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file(&serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("parameter file serializes")
    }

    /// Free parameters of a closed-shell parameter set: strict lower triangle
    /// of each `K`, lower triangle of `J_aa` (shared by both spins) and of a
    /// symmetric `J_ab`, then the strict lower triangle of `K₂`.
    pub fn to_vector(&self) -> Vec<f64> {
        let n = self.norb;
        let mut v = Vec::new();
        let strict = |m: &DMatrix<f64>, v: &mut Vec<f64>| (0..n).for_each(|p| (0..p).for_each(|r| v.push(m[(p, r)])));
        let lower = |m: &DMatrix<f64>, v: &mut Vec<f64>| (0..n).for_each(|p| (0..=p).for_each(|r| v.push(m[(p, r)])));
        for l in &self.layers {
            strict(&l.k, &mut v);
            lower(&l.j_aa, &mut v);
            lower(&l.j_ab, &mut v);
        }
        strict(&self.k2, &mut v);
        v
    }

    /// Inverse of [`LucjParameters::to_vector`].
    pub fn from_vector(norb: usize, layers: usize, v: &[f64]) -> Result<Self> {
        let n = norb;
        let per_layer = n * (n - 1) / 2 + n * (n + 1);
        let expected = layers * per_layer + n * (n - 1) / 2;
        if v.len() != expected {
            return Err(shape_error("parameter vector", expected, v.len()));
        }
        let mut it = v.iter().copied();
        let strict = |it: &mut dyn Iterator<Item = f64>| {
            let mut m = DMatrix::zeros(n, n);
            for p in 0..n {
                for r in 0..p {
                    let x = it.next().unwrap();
                    m[(p, r)] = x;
                    m[(r, p)] = -x;
                }
            }
            m
        };
        let lower = |it: &mut dyn Iterator<Item = f64>| {
            let mut m = DMatrix::zeros(n, n);
            for p in 0..n {
                for r in 0..=p {
                    let x = it.next().unwrap();
                    m[(p, r)] = x;
                    m[(r, p)] = x;
                }
            }
            m
        };
        let mut out = Vec::with_capacity(layers);
        for _ in 0..layers {
            let k = strict(&mut it);
            let j_aa = lower(&mut it);
            let j_ab = lower(&mut it);
            out.push(LucjLayer {
                k,
                j_bb: j_aa.clone(),
                j_aa,
                j_ab,
            });
        }
        let k2 = strict(&mut it);
        Ok(LucjParameters { norb, layers: out, k2 })
    }
}
