//! Preconditioned conjugate gradients.
//!
//! The recurrences use the unconjugated form `x^T y`, so the same routine is
//! plain CG for real symmetric positive definite systems and COCG for complex
//! symmetric ones. Residuals are always measured in the Hermitian norm.

use std::io::Write;

use crate::error::{Error, Result};
use crate::sparse::{dot, norm, Scalar, SymSparse};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl CgOptions {
    pub fn new(tol: f64, max_iter: usize) -> Self {
        CgOptions { tol, max_iter }
    }

    /// Iteration cap that scales with the system size.
    pub fn for_dim(tol: f64, dim: usize) -> Self {
        CgOptions {
            tol,
            max_iter: (20 * dim).max(2000),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CgOutcome<T> {
    pub x: Vec<T>,
    pub iterations: usize,
    pub relative_residual: f64,
    /// Relative residual after each iteration, starting with the initial one.
    pub history: Vec<f64>,
}

/// Writes `iter,residual` lines.
pub fn write_history(history: &[f64], sink: &mut dyn Write) -> std::io::Result<()> {
    writeln!(sink, "iter,residual")?;
    for (i, r) in history.iter().enumerate() {
        writeln!(sink, "{i},{r:e}")?;
    }
    Ok(())
}

fn residual<T: Scalar>(apply: &impl Fn(&[T], &mut [T]), b: &[T], x: &[T]) -> Vec<T> {
    let mut ax = vec![T::ZERO; b.len()];
    apply(x, &mut ax);
    b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect()
}

/// Solves `A x = b` given the action of `A` and of a preconditioner.
///
/// The recursively updated residual drives the iteration; on apparent
/// convergence the true residual is recomputed and the iteration restarts
/// from the current iterate if it has drifted above `tol`.
pub fn pcg<T: Scalar>(
    apply: impl Fn(&[T], &mut [T]),
    precond: impl Fn(&[T], &mut [T]),
    b: &[T],
    x0: Option<&[T]>,
    opts: CgOptions,
) -> Result<CgOutcome<T>> {
    let n = b.len();
    if let Some(x0) = x0 {
        if x0.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: x0.len(),
            });
        }
    }
    let bnorm = norm(b);
    let mut x: Vec<T> = x0.map_or_else(|| vec![T::ZERO; n], <[T]>::to_vec);
    if bnorm == 0.0 {
        return Ok(CgOutcome {
            x: vec![T::ZERO; n],
            iterations: 0,
            relative_residual: 0.0,
            history: vec![0.0],
        });
    }
    let mut history = Vec::new();
    let mut it = 0usize;
    let mut ap = vec![T::ZERO; n];
    let mut z = vec![T::ZERO; n];
    loop {
        let mut r = residual(&apply, b, &x);
        let mut rel = norm(&r) / bnorm;
        if history.is_empty() || rel <= opts.tol {
            history.push(rel);
        }
        if rel <= opts.tol {
            return Ok(CgOutcome {
                x,
                iterations: it,
                relative_residual: rel,
                history,
            });
        }
        precond(&r, &mut z);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let restart_at = it;
        while it < opts.max_iter {
            apply(&p, &mut ap);
            let pap = dot(&p, &ap);
            if pap.abs2() == 0.0 || !pap.is_finite() {
                break;
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += p[i] * alpha;
                r[i] -= ap[i] * alpha;
            }
            it += 1;
            rel = norm(&r) / bnorm;
            history.push(rel);
            if !rel.is_finite() {
                break;
            }
            if rel <= opts.tol {
                break;
            }
            precond(&r, &mut z);
            let rz_new = dot(&r, &z);
            if rz.abs2() == 0.0 {
                break;
            }
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + p[i] * beta;
            }
        }
        let true_rel = norm(&residual(&apply, b, &x)) / bnorm;
        if true_rel <= opts.tol {
            return Ok(CgOutcome {
                x,
                iterations: it,
                relative_residual: true_rel,
                history,
            });
        }
        // no progress since the last restart, or out of budget
        if it >= opts.max_iter || it == restart_at || !true_rel.is_finite() {
            return Err(Error::NoConvergence {
                iterations: it,
                residual: true_rel,
                history,
            });
        }
    }
}

fn jacobi<T: Scalar>(diag: &[T]) -> Vec<T> {
    diag.iter()
        .map(|&d| if d.abs2() > 0.0 { T::ONE / d } else { T::ONE })
        .collect()
}

/// Jacobi-preconditioned CG (COCG for complex matrices).
pub fn jacobi_cg<T: Scalar>(a: &SymSparse<T>, b: &[T], x0: Option<&[T]>, opts: CgOptions) -> Result<CgOutcome<T>>
where
    T: std::ops::Mul<T, Output = T>,
{
    if b.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.len(),
        });
    }
    let dinv = jacobi(&a.diag());
    pcg(
        |x, y| a.matvec_into(x, y),
        |r, z| {
            for i in 0..r.len() {
                z[i] = r[i] * dinv[i];
            }
        },
        b,
        x0,
        opts,
    )
}

/// CG for a symmetric positive semidefinite `K` whose kernel is the
/// constants, on the subspace `w^T x = 0` with `w = M 1`.
///
/// The right-hand side is first projected onto the range of `K` with
/// `P = I - w 1^T / (1^T w)`; search directions are kept in the range of
/// `P^T`, so the result has zero `M`-mean.
pub fn projected_cg(k: &SymSparse<f64>, w: &[f64], b: &[f64], opts: CgOptions) -> Result<CgOutcome<f64>> {
    let n = k.dim();
    if b.len() != n || w.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if b.len() != n { b.len() } else { w.len() },
        });
    }
    let wsum: f64 = w.iter().sum();
    let project_t = |v: &mut [f64]| {
        let c = dot(w, v) / wsum;
        v.iter_mut().for_each(|x| *x -= c);
    };
    let s: f64 = b.iter().sum::<f64>() / wsum;
    let bp: Vec<f64> = b.iter().zip(w).map(|(&bi, &wi)| bi - s * wi).collect();
    let dinv = jacobi(&k.diag());
    let mut out = pcg(
        |x, y| k.matvec_into(x, y),
        |r, z| {
            for i in 0..r.len() {
                z[i] = r[i] * dinv[i];
            }
            project_t(z);
        },
        &bp,
        None,
        opts,
    )?;
    project_t(&mut out.x);
    Ok(out)
}
