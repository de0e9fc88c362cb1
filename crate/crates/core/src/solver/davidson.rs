//! Lowest eigenpair of a real symmetric operator.
//!
//! Small problems go straight to a dense eigensolver; larger ones use a
//! Davidson iteration with a diagonal preconditioner.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Real symmetric linear operator.
pub trait LinearOperator {
    fn dim(&self) -> usize;

    fn diagonal(&self) -> Vec<f64>;

    /// `y = A x`; `y` arrives zeroed.
    fn apply(&self, x: &[f64], y: &mut [f64]);

    /// Dense copy, column by column through [`LinearOperator::apply`].
    fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            col.iter_mut().for_each(|v| *v = 0.0);
            self.apply(&e, &mut col);
            for i in 0..n {
                m[(i, j)] = col[i];
            }
            e[j] = 0.0;
        }
        m
    }
}

/// Eigensolver settings.
#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Residual norm `||Hv - Ev||` required for convergence.
    pub tol: f64,
    pub max_iter: usize,
    /// Dimensions up to this use dense diagonalization.
    pub dense_threshold: usize,
    /// Davidson basis size that triggers a restart.
    pub max_subspace: usize,
    /// Starting vector; defaults to the unit vector on the smallest diagonal entry.
    pub initial_guess: Option<Vec<f64>>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-9,
            max_iter: 1000,
            dense_threshold: 2000,
            max_subspace: 32,
            initial_guess: None,
        }
    }
}

/// Lowest eigenpair and diagnostics.
#[derive(Clone, Debug)]
pub struct Eigenpair {
    pub energy: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    /// Gap to the next eigenvalue estimate below 1e-10.
    pub degenerate: bool,
}

const DEGENERACY_GAP: f64 = 1e-10;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Flips the sign so that the largest-magnitude entry is positive.
pub(crate) fn fix_sign(v: &mut [f64]) {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() + 1e-14 {
            best = i;
        }
    }
    if v.get(best).is_some_and(|x| *x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn lowest_two(eig: &SymmetricEigen<f64, nalgebra::Dyn>) -> (usize, Option<usize>) {
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    (order[0], order.get(1).copied())
}

/// Dense lowest eigenpair of a symmetric matrix.
pub fn dense_ground(m: DMatrix<f64>) -> Eigenpair {
    let n = m.nrows();
    let a = m.clone();
    let eig = SymmetricEigen::new(m);
    let (lo, next) = lowest_two(&eig);
    let energy = eig.eigenvalues[lo];
    let mut vector: Vec<f64> = eig.eigenvectors.column(lo).iter().copied().collect();
    let nv = norm(&vector);
    vector.iter_mut().for_each(|x| *x /= nv);
    fix_sign(&mut vector);
    let v = nalgebra::DVector::from_column_slice(&vector);
    let r = &a * &v - &v * energy;
    Eigenpair {
        energy,
        vector,
        residual: r.norm(),
        iterations: 1,
        degenerate: next.is_some_and(|j| eig.eigenvalues[j] - energy < DEGENERACY_GAP) && n > 1,
    }
}

/// Lowest eigenpair of `op`.
pub fn solve_ground<A: LinearOperator + ?Sized>(op: &A, opts: &SolverOptions) -> Result<Eigenpair> {
    let n = op.dim();
    if n == 0 {
        return Err(Error::Empty("operator of dimension zero"));
    }
    if n <= opts.dense_threshold {
        return Ok(dense_ground(op.to_dense()));
    }
    davidson(op, opts)
}

fn orthonormalize_against(v: &mut [f64], basis: &[Vec<f64>]) -> f64 {
    for _ in 0..2 {
        for b in basis {
            let c = dot(v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
    let nv = norm(v);
    if nv > 0.0 {
        v.iter_mut().for_each(|x| *x /= nv);
    }
    nv
}

fn davidson<A: LinearOperator + ?Sized>(op: &A, opts: &SolverOptions) -> Result<Eigenpair> {
    let n = op.dim();
    let diag = op.diagonal();
    let max_sub = opts.max_subspace.max(4);

    let mut start = match &opts.initial_guess {
        Some(g) if g.len() == n && norm(g) > 0.0 => g.clone(),
        _ => {
            let mut e = vec![0.0; n];
            let imin = diag
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap_or(0);
            e[imin] = 1.0;
            e
        }
    };
    orthonormalize_against(&mut start, &[]);

    let mut basis: Vec<Vec<f64>> = vec![start];
    let mut sigma: Vec<Vec<f64>> = Vec::new();
    let mut best_residual = f64::INFINITY;
    let mut prev_ritz: Option<(Vec<f64>, Vec<f64>)> = None;

    for iter in 1..=opts.max_iter {
        while sigma.len() < basis.len() {
            let mut y = vec![0.0; n];
            op.apply(&basis[sigma.len()], &mut y);
            sigma.push(y);
        }
        let k = basis.len();
        let mut proj = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..=i {
                let v = dot(&basis[i], &sigma[j]);
                proj[(i, j)] = v;
                proj[(j, i)] = v;
            }
        }
        let eig = SymmetricEigen::new(proj);
        let (lo, next) = lowest_two(&eig);
        let theta = eig.eigenvalues[lo];
        let coef = eig.eigenvectors.column(lo);

        let mut x = vec![0.0; n];
        let mut hx = vec![0.0; n];
        for (c, (b, s)) in coef.iter().zip(basis.iter().zip(&sigma)) {
            for t in 0..n {
                x[t] += c * b[t];
                hx[t] += c * s[t];
            }
        }
        let r: Vec<f64> = hx.iter().zip(&x).map(|(h, v)| h - theta * v).collect();
        let rn = norm(&r);
        best_residual = best_residual.min(rn);
        if rn <= opts.tol {
            let nx = norm(&x);
            x.iter_mut().for_each(|v| *v /= nx);
            fix_sign(&mut x);
            return Ok(Eigenpair {
                energy: theta,
                vector: x,
                residual: rn,
                iterations: iter,
                degenerate: next.is_some_and(|j| eig.eigenvalues[j] - theta < DEGENERACY_GAP),
            });
        }

        // Diagonal preconditioner.
        let mut t: Vec<f64> = r
            .iter()
            .zip(&diag)
            .map(|(ri, di)| {
                let d = di - theta;
                if d.abs() < 1e-8 {
                    ri / 1e-8_f64.copysign(d)
                } else {
                    ri / d
                }
            })
            .collect();

        if k >= max_sub {
            // Restart from the current Ritz vector and the previous one,
            // carrying their images along so no extra products are needed.
            let nx = norm(&x);
            let x0: Vec<f64> = x.iter().map(|v| v / nx).collect();
            let hx0: Vec<f64> = hx.iter().map(|v| v / nx).collect();
            basis = vec![x0];
            sigma = vec![hx0];
            if let Some((mut p, mut hp)) = prev_ritz.take() {
                let c = dot(&p, &basis[0]);
                for t in 0..n {
                    p[t] -= c * basis[0][t];
                    hp[t] -= c * sigma[0][t];
                }
                let np = norm(&p);
                if np > 1e-3 {
                    p.iter_mut().for_each(|v| *v /= np);
                    hp.iter_mut().for_each(|v| *v /= np);
                    basis.push(p);
                    sigma.push(hp);
                }
            }
        }
        prev_ritz = Some((x, hx));

        let nt = orthonormalize_against(&mut t, &basis);
        if nt < 1e-14 || !nt.is_finite() {
            // Preconditioned residual collapsed; fall back to the raw residual.
            let mut r2 = r;
            if orthonormalize_against(&mut r2, &basis) < 1e-14 {
                return Err(Error::Convergence {
                    iterations: iter,
                    residual: best_residual,
                });
            }
            basis.push(r2);
        } else {
            basis.push(t);
        }
    }
    Err(Error::Convergence {
        iterations: opts.max_iter,
        residual: best_residual,
    })
}
