//! Parameters seeded from second-order perturbation theory.
//!
//! The closed-shell MP2 doubles `t_ij^ab`, read as a symmetric matrix over
//! (virtual, occupied) pairs, factor as `Σ_k μ_k u_k u_kᵀ`. Each factor gives a
//! one-body operator `X_k = Σ_σ Σ_ai u_k[ai] (a†_aσ a_iσ + h.c.)` and the layer
//! `exp(iλ_k X_k²)`, which is diagonal in the eigenbasis of `X_k`: an orbital
//! rotation and a rank-one Jastrow. To first order the doubles amplitudes are
//! proportional to `t₂`.
//!
//! Every such layer is even in the α excitation operators, so on the half
//! register it only reaches α strings of the reference symmetry. The closing
//! rotation `K₂` supplies the remaining single excitations, weighted by the
//! norm of each `(a, i)` row of `t₂`.

use nalgebra::{DMatrix, SymmetricEigen};

use super::params::{LucjLayer, LucjParameters};
use crate::error::{Error, Result};
use crate::integrals::IntegralTable;

const SCHUR_TOL: f64 = 1e-14;
const BLOCK_TOL: f64 = 1e-10;
/// Largest `K₂` entry; keeps each pair rotation well below a quarter turn.
pub const MAX_SINGLES_ANGLE: f64 = 1.2;

/// Canonical orbital energies of the closed-shell reference.
pub fn orbital_energies(table: &IntegralTable) -> Vec<f64> {
    let no = table.n_alpha();
    (0..table.norb())
        .map(|p| {
            table.h1(p, p)
                + (0..no)
                    .map(|i| 2.0 * table.eri(p, p, i, i) - table.eri(p, i, i, p))
                    .sum::<f64>()
        })
        .collect()
}

/// Opposite-spin MP2 amplitudes as a matrix indexed by `a·nocc + i`.
pub fn mp2_doubles(table: &IntegralTable) -> Result<DMatrix<f64>> {
    let (n, no) = (table.norb(), table.n_alpha());
    if table.n_beta() != no {
        return Err(Error::Sector("MP2 seeding needs a closed-shell reference".into()));
    }
    if no == 0 || no == n {
        return Err(Error::Empty("occupied-virtual pairs"));
    }
    let eps = orbital_energies(table);
    let nv = n - no;
    let idx = |a: usize, i: usize| (a - no) * no + i;
    let mut t = DMatrix::zeros(nv * no, nv * no);
    for i in 0..no {
        for a in no..n {
            for j in 0..no {
                for b in no..n {
                    let denom = eps[i] + eps[j] - eps[a] - eps[b];
                    if denom >= 0.0 {
                        return Err(Error::Range(format!(
                            "non-negative MP2 denominator for ({i},{j})->({a},{b})"
                        )));
                    }
                    t[(idx(a, i), idx(b, j))] = table.eri(i, a, j, b) / denom;
                }
            }
        }
    }
    Ok(t)
}

/// Real logarithm of a proper orthogonal matrix, antisymmetric.
pub fn orthogonal_log(o: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = o.nrows();
    if o.determinant() < 0.0 {
        return Err(Error::Range("orthogonal matrix has determinant -1".into()));
    }
    let schur = nalgebra::linalg::Schur::try_new(o.clone(), SCHUR_TOL, 10_000).ok_or(Error::Convergence {
        iterations: 10_000,
        residual: f64::NAN,
    })?;
    let (z, t) = schur.unpack();
    let mut l = DMatrix::zeros(n, n);
    let mut flipped = Vec::new();
    let mut p = 0;
    while p < n {
        if p + 1 < n && t[(p + 1, p)].abs() > BLOCK_TOL {
            let c = 0.5 * (t[(p, p)] + t[(p + 1, p + 1)]);
            let s = 0.5 * (t[(p + 1, p)] - t[(p, p + 1)]);
            let phi = s.atan2(c);
            l[(p + 1, p)] = phi;
            l[(p, p + 1)] = -phi;
            p += 2;
        } else {
            if t[(p, p)] < 0.0 {
                flipped.push(p);
            }
            p += 1;
        }
    }
    // A proper rotation has an even number of real −1 eigenvalues.
    for w in flipped.chunks(2) {
        if let [a, b] = *w {
            l[(b, a)] = std::f64::consts::PI;
            l[(a, b)] = -std::f64::consts::PI;
        }
    }
    let k = &z * l * z.transpose();
    Ok((&k - k.transpose()) * 0.5)
}

/// `layers` leading factors of the MP2 doubles with Jastrow strength
/// `doubles_scale·μ_k/2`, and `K₂[a][i] = min(singles_scale·‖t₂[ai, ·]‖, MAX_SINGLES_ANGLE)`.
pub fn mp2_parameters(
    table: &IntegralTable,
    layers: usize,
    doubles_scale: f64,
    singles_scale: f64,
) -> Result<LucjParameters> {
    if layers == 0 {
        return Err(Error::Range("layers must be positive".into()));
    }
    let (n, no) = (table.norb(), table.n_alpha());
    let t2 = mp2_doubles(table)?;
    let mut out = LucjParameters::zeros(n, layers);
    for a in no..n {
        for i in 0..no {
            let v = (singles_scale * t2.row((a - no) * no + i).norm()).min(MAX_SINGLES_ANGLE);
            out.k2[(a, i)] = v;
            out.k2[(i, a)] = -v;
        }
    }
    let eig = SymmetricEigen::new(t2);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].abs().total_cmp(&eig.eigenvalues[a].abs()));
    for (layer, &k) in out.layers.iter_mut().zip(&order) {
        let u = eig.eigenvectors.column(k);
        let mut x = DMatrix::zeros(n, n);
        for a in no..n {
            for i in 0..no {
                let v = u[(a - no) * no + i];
                x[(a, i)] = v;
                x[(i, a)] = v;
            }
        }
        let xe = SymmetricEigen::new(x);
        let mut o = xe.eigenvectors;
        if o.determinant() < 0.0 {
            o.column_mut(0).neg_mut();
        }
        let d = xe.eigenvalues;
        let j = (&d * d.transpose()) * (0.5 * doubles_scale * eig.eigenvalues[k]);
        *layer = LucjLayer {
            k: orthogonal_log(&o)?,
            j_aa: j.clone(),
            j_bb: j.clone(),
            j_ab: j,
        };
    }
    Ok(out)
}
