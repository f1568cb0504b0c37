//! Block inverse iteration for symmetric pencils `A x = λ B x`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sparse::{dot, norm};

pub const EIGEN_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug)]
pub struct EigenOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Extra block columns beyond the requested count.
    pub guard: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tol: EIGEN_TOL,
            max_iter: 400,
            seed: 7,
            guard: 4,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    /// `B`-orthonormal eigenvectors.
    pub vectors: Vec<Vec<f64>>,
    /// `‖A x − λ B x‖ / (‖A‖∞ ‖x‖)` per pair.
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

/// The pencil as operator actions. `solve(rhs, guess)` applies `A⁻¹`;
/// `project`, when given, restricts to an invariant subspace (for instance
/// the complement of a known kernel).
pub struct Pencil<'a> {
    pub dim: usize,
    pub apply_a: &'a dyn Fn(&[f64]) -> Vec<f64>,
    pub apply_b: &'a dyn Fn(&[f64]) -> Vec<f64>,
    pub solve: &'a dyn Fn(&[f64], &[f64]) -> Result<Vec<f64>>,
    pub project: Option<&'a dyn Fn(&mut [f64])>,
    pub a_norm: f64,
}

/// `B`-orthonormal basis of span(Y), dropping numerically dependent
/// directions.
fn b_orthonormalize(y: &[Vec<f64>], by: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let p = y.len();
    let g = DMatrix::from_fn(p, p, |i, j| 0.5 * (dot(&y[i], &by[j]) + dot(&y[j], &by[i])));
    let eig = SymmetricEigen::new(g);
    let gmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let n = y.first().map_or(0, Vec::len);
    let mut w = Vec::new();
    let mut bw = Vec::new();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    for k in order {
        let lam = eig.eigenvalues[k];
        if lam <= 1e-13 * gmax || lam <= 0.0 {
            continue;
        }
        let s = 1.0 / lam.sqrt();
        let mut col = vec![0.0; n];
        let mut bcol = vec![0.0; n];
        for j in 0..p {
            let c = eig.eigenvectors[(j, k)] * s;
            if c != 0.0 {
                for i in 0..n {
                    col[i] += c * y[j][i];
                    bcol[i] += c * by[j][i];
                }
            }
        }
        w.push(col);
        bw.push(bcol);
    }
    (w, bw)
}

fn combine_cols(cols: &[Vec<f64>], coef: &DMatrix<f64>, k: usize) -> Vec<f64> {
    let n = cols[0].len();
    let mut out = vec![0.0; n];
    for (j, c) in cols.iter().enumerate() {
        let a = coef[(j, k)];
        for i in 0..n {
            out[i] += a * c[i];
        }
    }
    out
}

/// Smallest `count` eigenpairs of the pencil.
pub fn lowest_eigenpairs(pencil: &Pencil, count: usize, opts: EigenOptions) -> Result<EigenPairs> {
    let n = pencil.dim;
    let p = (count + opts.guard).min(n);
    if count == 0 || count > n {
        return Err(Error::Invalid(format!(
            "requested {count} eigenpairs of a {n}-dimensional pencil"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let random_col = |rng: &mut ChaCha8Rng| {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        if let Some(pr) = pencil.project {
            pr(&mut v);
        }
        v
    };
    let mut x: Vec<Vec<f64>> = (0..p).map(|_| random_col(&mut rng)).collect();
    let mut theta = vec![0.0; p];
    let mut residuals = vec![f64::INFINITY; count];
    for iter in 1..=opts.max_iter {
        let mut y = Vec::with_capacity(p);
        for (j, xj) in x.iter().enumerate() {
            let rhs = (pencil.apply_b)(xj);
            let guess: Vec<f64> = if iter > 1 && theta[j] > 0.0 {
                xj.iter().map(|v| v / theta[j]).collect()
            } else {
                vec![0.0; n]
            };
            let mut yj = (pencil.solve)(&rhs, &guess)?;
            if let Some(pr) = pencil.project {
                pr(&mut yj);
            }
            y.push(yj);
        }
        let by: Vec<Vec<f64>> = y.iter().map(|v| (pencil.apply_b)(v)).collect();
        let (mut w, mut bw) = b_orthonormalize(&y, &by);
        while w.len() < p {
            // rank loss: top the block up with fresh directions
            let extra = random_col(&mut rng);
            let mut yy = w.clone();
            let mut bb = bw.clone();
            bb.push((pencil.apply_b)(&extra));
            yy.push(extra);
            let (w2, bw2) = b_orthonormalize(&yy, &bb);
            if w2.len() <= w.len() {
                break;
            }
            w = w2;
            bw = bw2;
        }
        if w.len() < count {
            return Err(Error::SpectrumNotConverged {
                iterations: iter,
                residuals,
            });
        }
        let aw: Vec<Vec<f64>> = w.iter().map(|v| (pencil.apply_a)(v)).collect();
        let q = w.len();
        let h = DMatrix::from_fn(q, q, |i, j| 0.5 * (dot(&w[i], &aw[j]) + dot(&w[j], &aw[i])));
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..q).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let mut vecs = DMatrix::zeros(q, q);
        for (k, &o) in order.iter().enumerate() {
            vecs.set_column(k, &eig.eigenvectors.column(o));
        }
        theta = order.iter().map(|&o| eig.eigenvalues[o]).collect();
        x = (0..q).map(|k| combine_cols(&w, &vecs, k)).collect();
        let ax: Vec<Vec<f64>> = (0..count).map(|k| combine_cols(&aw, &vecs, k)).collect();
        let bx: Vec<Vec<f64>> = (0..count).map(|k| combine_cols(&bw, &vecs, k)).collect();
        for k in 0..count {
            let r: Vec<f64> = ax[k].iter().zip(&bx[k]).map(|(a, b)| a - theta[k] * b).collect();
            residuals[k] = norm(&r) / (pencil.a_norm * norm(&x[k]));
        }
        if residuals.iter().all(|&r| r <= opts.tol) {
            x.truncate(count);
            theta.truncate(count);
            return Ok(EigenPairs {
                values: theta,
                vectors: x,
                residuals,
                iterations: iter,
            });
        }
        while x.len() < p {
            x.push(random_col(&mut rng));
            theta.push(0.0);
        }
    }
    Err(Error::SpectrumNotConverged {
        iterations: opts.max_iter,
        residuals,
    })
}
