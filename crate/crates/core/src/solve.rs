//! Dirichlet, Neumann and Robin solvers and the spectral diagnostics built on
//! the assembled forms.

use serde::Serialize;

use crate::cg::{jacobi_cg, projected_cg, CgOptions, CgOutcome};
use crate::eigen::{lowest_eigenpairs, EigenOptions, EigenPairs, Pencil};
use crate::error::{Error, Result};
use crate::fem::{assemble_boundary_mass, assemble_mass, assemble_stiffness, Field, RobinCoefficient};
use crate::mesh::{Locator, Mesh};
use crate::sparse::{combine, dot, norm, SymSparse};

/// Relative tolerance on `|(F,1)|` for the Neumann problem.
pub const TOL_COMPAT: f64 = 1e-10;
/// Inner CG tolerance used inside the eigensolver.
const INNER_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct ConstraintReport {
    /// `(F,1) = 1^T b` before projection.
    pub defect: f64,
    /// Constant removed from `b` to make it exactly compatible, in units of `M 1`.
    pub load_shift: f64,
    /// The returned representative has zero `M`-mean; any `u + c` also solves.
    pub mean: f64,
}

#[derive(Clone, Debug)]
pub struct LinearSolveResult {
    pub solution: Field,
    pub iterations: usize,
    pub relative_residual: f64,
    pub history: Vec<f64>,
    pub constraint: Option<ConstraintReport>,
}

impl LinearSolveResult {
    fn from_cg(out: CgOutcome<f64>, constraint: Option<ConstraintReport>) -> Self {
        LinearSolveResult {
            solution: Field::new(out.x),
            iterations: out.iterations,
            relative_residual: out.relative_residual,
            history: out.history,
            constraint,
        }
    }
}

/// Dirichlet problem `u = 0` on `boundary_dofs`, by elimination.
pub fn solve_dirichlet(k: &SymSparse, b: &[f64], boundary_dofs: &[usize], tol: f64) -> Result<LinearSolveResult> {
    solve_dirichlet_from(k, b, boundary_dofs, tol, None)
}

/// As [`solve_dirichlet`], starting CG from `guess` (interior entries used).
pub fn solve_dirichlet_from(
    k: &SymSparse,
    b: &[f64],
    boundary_dofs: &[usize],
    tol: f64,
    guess: Option<&[f64]>,
) -> Result<LinearSolveResult> {
    let n = k.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    if boundary_dofs.is_empty() {
        return Err(Error::Invalid(
            "Dirichlet problem needs at least one boundary dof".into(),
        ));
    }
    let mut fixed = vec![false; n];
    for &i in boundary_dofs {
        if i >= n {
            return Err(Error::Invalid(format!("boundary dof {i} out of range")));
        }
        fixed[i] = true;
    }
    let free: Vec<usize> = (0..n).filter(|&i| !fixed[i]).collect();
    let kr = k.restrict(&free);
    let br: Vec<f64> = free.iter().map(|&i| b[i]).collect();
    let g: Option<Vec<f64>> = guess.map(|g| free.iter().map(|&i| g[i]).collect());
    let out = jacobi_cg(&kr, &br, g.as_deref(), CgOptions::for_dim(tol, free.len()))?;
    let mut u = vec![0.0; n];
    for (j, &i) in free.iter().enumerate() {
        u[i] = out.x[j];
    }
    Ok(LinearSolveResult {
        solution: Field::new(u),
        iterations: out.iterations,
        relative_residual: out.relative_residual,
        history: out.history,
        constraint: None,
    })
}

/// Neumann problem; returns the zero `M`-mean solution.
pub fn solve_neumann(k: &SymSparse, m: &SymSparse, b: &[f64], tol: f64) -> Result<LinearSolveResult> {
    let n = k.dim();
    if b.len() != n || m.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if b.len() != n { b.len() } else { m.dim() },
        });
    }
    let defect: f64 = b.iter().sum();
    if defect.abs() > TOL_COMPAT * norm(b).max(f64::MIN_POSITIVE) {
        return Err(Error::Compatibility { defect });
    }
    let w = m.matvec(&vec![1.0; n]);
    let wsum: f64 = w.iter().sum();
    let out = projected_cg(k, &w, b, CgOptions::for_dim(tol, n))?;
    let mean = dot(&w, &out.x) / wsum;
    let report = ConstraintReport {
        defect,
        load_shift: defect / wsum,
        mean,
    };
    Ok(LinearSolveResult::from_cg(out, Some(report)))
}

/// Robin problem `(K + B) u = b`.
pub fn solve_robin(k: &SymSparse, bmat: &SymSparse, b: &[f64], tol: f64) -> Result<LinearSolveResult> {
    if bmat.total() <= 0.0 {
        return Err(Error::RobinIsNeumann);
    }
    let a = combine(&[(1.0, k), (1.0, bmat)])?;
    let out = jacobi_cg(&a, b, None, CgOptions::for_dim(tol, a.dim()))?;
    Ok(LinearSolveResult::from_cg(out, None))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    /// Nonzero eigenvalues of `K x = μ M x`.
    Neumann,
    /// Classical Steklov `K x = σ B₁ x`.
    Steklov,
    /// Trace pencil `(K + M) x = μ B₁ x`.
    Trace,
    /// `(K + B) x = λ M x`.
    RobinFredholm,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    /// `‖A x − λ B x‖ / (‖A‖∞ ‖x‖)` per pair.
    pub residuals: Vec<f64>,
    pub mesh_h: f64,
    pub which: SpectrumKind,
    pub iterations: usize,
    #[serde(skip)]
    pub vectors: Vec<Vec<f64>>,
}

impl SpectrumReport {
    fn new(pairs: EigenPairs, which: SpectrumKind, shift: f64) -> Self {
        SpectrumReport {
            eigenvalues: pairs.values.iter().map(|v| v - shift).collect(),
            residuals: pairs.residuals,
            mesh_h: f64::NAN,
            which,
            iterations: pairs.iterations,
            vectors: pairs.vectors,
        }
    }

    pub fn with_mesh_h(mut self, h: f64) -> Self {
        self.mesh_h = h;
        self
    }

    /// `1/√μ₁`, the norm of the trace operator for the trace pencil.
    pub fn trace_constant(&self) -> f64 {
        1.0 / self.eigenvalues[0].sqrt()
    }
}

fn eig_opts(tol: f64) -> EigenOptions {
    EigenOptions {
        tol,
        ..EigenOptions::default()
    }
}

fn spd_pencil(a: &SymSparse, b: &SymSparse, count: usize, tol: f64) -> Result<EigenPairs> {
    let n = a.dim();
    if b.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.dim(),
        });
    }
    let apply_a = |x: &[f64]| a.matvec(x);
    let apply_b = |x: &[f64]| b.matvec(x);
    let solve = |r: &[f64], g: &[f64]| Ok(jacobi_cg(a, r, Some(g), CgOptions::for_dim(INNER_TOL, n))?.x);
    let pencil = Pencil {
        dim: n,
        apply_a: &apply_a,
        apply_b: &apply_b,
        solve: &solve,
        project: None,
        a_norm: a.norm_inf(),
    };
    lowest_eigenpairs(&pencil, count, eig_opts(tol))
}

/// Smallest eigenvalues of `(K + B) x = λ M x`.
pub fn robin_fredholm_spectrum(
    k: &SymSparse,
    bmat: &SymSparse,
    m: &SymSparse,
    count: usize,
    tol: f64,
) -> Result<SpectrumReport> {
    if bmat.total() <= 0.0 {
        return Err(Error::RobinIsNeumann);
    }
    let a = combine(&[(1.0, k), (1.0, bmat)])?;
    Ok(SpectrumReport::new(
        spd_pencil(&a, m, count, tol)?,
        SpectrumKind::RobinFredholm,
        0.0,
    ))
}

/// Smallest nonzero eigenvalues of `K x = μ M x`, computed on the
/// zero-mean subspace.
pub fn neumann_spectrum(k: &SymSparse, m: &SymSparse, count: usize, tol: f64) -> Result<SpectrumReport> {
    let n = k.dim();
    if m.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m.dim(),
        });
    }
    let w = m.matvec(&vec![1.0; n]);
    let wsum: f64 = w.iter().sum();
    let project = |v: &mut [f64]| {
        let c = dot(&w, v) / wsum;
        v.iter_mut().for_each(|x| *x -= c);
    };
    let apply_a = |x: &[f64]| k.matvec(x);
    let apply_b = |x: &[f64]| m.matvec(x);
    let solve = |r: &[f64], _: &[f64]| Ok(projected_cg(k, &w, r, CgOptions::for_dim(INNER_TOL, n))?.x);
    let pencil = Pencil {
        dim: n,
        apply_a: &apply_a,
        apply_b: &apply_b,
        solve: &solve,
        project: Some(&project),
        a_norm: k.norm_inf(),
    };
    Ok(SpectrumReport::new(
        lowest_eigenpairs(&pencil, count, eig_opts(tol))?,
        SpectrumKind::Neumann,
        0.0,
    ))
}

/// Poincaré constant `1/√μ₂`.
pub fn poincare_constant(k: &SymSparse, m: &SymSparse, tol: f64) -> Result<f64> {
    Ok(1.0 / neumann_spectrum(k, m, 1, tol)?.eigenvalues[0].sqrt())
}

/// Smallest eigenvalues of `(K + M) x = μ B₁ x`. Inverse iteration only
/// ever applies `(K + M)⁻¹ B₁`, whose range consists of discrete harmonic
/// extensions of boundary data, so the kernel of `B₁` never enters.
pub fn steklov_spectrum(
    k: &SymSparse,
    m: &SymSparse,
    b1: &SymSparse,
    count: usize,
    tol: f64,
) -> Result<SpectrumReport> {
    let a = combine(&[(1.0, k), (1.0, m)])?;
    Ok(SpectrumReport::new(
        spd_pencil(&a, b1, count, tol)?,
        SpectrumKind::Trace,
        0.0,
    ))
}

/// Classical Steklov eigenvalues `K x = σ B₁ x`, through the definite
/// pencil `(K + B₁, B₁)` shifted by one.
pub fn classical_steklov_spectrum(k: &SymSparse, b1: &SymSparse, count: usize, tol: f64) -> Result<SpectrumReport> {
    const SHIFT: f64 = 1.0;
    let a = combine(&[(1.0, k), (SHIFT, b1)])?;
    Ok(SpectrumReport::new(
        spd_pencil(&a, b1, count, tol)?,
        SpectrumKind::Steklov,
        SHIFT,
    ))
}

/// Trace constant `1/√μ₁` of a mesh.
pub fn trace_constant(mesh: &Mesh) -> Result<f64> {
    let k = assemble_stiffness(mesh)?;
    let m = assemble_mass(mesh)?;
    let b1 = assemble_boundary_mass(mesh, &RobinCoefficient::Uniform(1.0))?;
    Ok(steklov_spectrum(&k, &m, &b1, 1, crate::eigen::EIGEN_TOL)?.trace_constant())
}

#[derive(Clone, Debug, Serialize)]
pub struct UnionReport {
    pub trace_a: f64,
    pub trace_b: f64,
    pub trace_union: f64,
    /// `C_U + C_V`, an upper bound for the union's trace constant.
    pub bound: f64,
    /// `1/(C_U + C_V)²`.
    pub floor: f64,
    pub union_eigenvalues: Vec<f64>,
    pub holds: bool,
}

fn covered_by(points: &Mesh, by: &[&Mesh], tol: f64) -> Option<usize> {
    let locs: Vec<Locator> = by.iter().map(|m| Locator::new(m)).collect();
    points
        .vertices
        .iter()
        .position(|&p| !locs.iter().any(|l| l.locate(p, tol).is_some()))
}

/// Trace constants of `U`, `V` and `U ∪ V`, checking the union bound
/// `C_{U∪V} ≤ C_U + C_V` on the first `count` trace eigenvalues.
pub fn union_embedding_check(mesh_a: &Mesh, mesh_b: &Mesh, mesh_union: &Mesh, count: usize) -> Result<UnionReport> {
    let (lo, hi) = bbox(mesh_union);
    let tol = 1e-9 * (hi[0] - lo[0]).hypot(hi[1] - lo[1]);
    for (name, m) in [("U", mesh_a), ("V", mesh_b)] {
        if let Some(v) = covered_by(m, &[mesh_union], tol) {
            return Err(Error::GeometryMismatch(format!(
                "vertex {v} of {name} lies outside the union mesh"
            )));
        }
    }
    if let Some(v) = covered_by(mesh_union, &[mesh_a, mesh_b], tol) {
        return Err(Error::GeometryMismatch(format!(
            "union vertex {v} lies in neither piece"
        )));
    }
    let (aa, ab, au) = (mesh_a.area(), mesh_b.area(), mesh_union.area());
    if au > aa + ab + 1e-9 * au || au < aa.max(ab) - 1e-9 * au {
        return Err(Error::GeometryMismatch(format!(
            "areas {aa}, {ab} inconsistent with union area {au}"
        )));
    }
    let trace_a = trace_constant(mesh_a)?;
    let trace_b = trace_constant(mesh_b)?;
    let k = assemble_stiffness(mesh_union)?;
    let m = assemble_mass(mesh_union)?;
    let b1 = assemble_boundary_mass(mesh_union, &RobinCoefficient::Uniform(1.0))?;
    let rep = steklov_spectrum(&k, &m, &b1, count, crate::eigen::EIGEN_TOL)?;
    let bound = trace_a + trace_b;
    let floor = 1.0 / (bound * bound);
    Ok(UnionReport {
        trace_a,
        trace_b,
        trace_union: rep.trace_constant(),
        bound,
        floor,
        holds: rep.eigenvalues.iter().all(|&mu| mu >= floor),
        union_eigenvalues: rep.eigenvalues,
    })
}

fn bbox(m: &Mesh) -> ([f64; 2], [f64; 2]) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in &m.vertices {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble_load, error_norms, norms, System};
    use crate::geometry::{rectangle, unit_disk, unit_square, Point};
    use crate::mesh::{refine_times, triangulate};
    use std::f64::consts::PI;

    fn square(h: f64) -> (Mesh, SymSparse, SymSparse) {
        let m = triangulate(&unit_square(), h).unwrap();
        let k = assemble_stiffness(&m).unwrap();
        let mm = assemble_mass(&m).unwrap();
        (m, k, mm)
    }

    fn sine_load(p: Point) -> f64 {
        2.0 * PI * PI * (PI * p[0]).sin() * (PI * p[1]).sin()
    }

    #[test]
    fn dirichlet_zero_load() {
        let (m, k, _) = square(0.1);
        let r = solve_dirichlet(&k, &vec![0.0; m.n_vertices()], &m.boundary_vertices(), 1e-10).unwrap();
        assert!(r.solution.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dirichlet_manufactured_rates() {
        let mut errs = Vec::new();
        for h in [0.1, 0.05, 0.025] {
            let (m, k, _) = square(h);
            let b = assemble_load(&m, sine_load).unwrap();
            let r = solve_dirichlet(&k, &b, &m.boundary_vertices(), 1e-12).unwrap();
            let u = &r.solution;
            // energy identity [u,u] = (F,u)
            let kuu = k.bilinear(&u.values, &u.values);
            assert!((kuu - dot(&b, &u.values)).abs() < 1e-9 * kuu);
            errs.push(
                error_norms(
                    &m,
                    u,
                    |p| (PI * p[0]).sin() * (PI * p[1]).sin(),
                    |p| {
                        [
                            PI * (PI * p[0]).cos() * (PI * p[1]).sin(),
                            PI * (PI * p[0]).sin() * (PI * p[1]).cos(),
                        ]
                    },
                )
                .unwrap(),
            );
        }
        for w in errs.windows(2) {
            let (l2, h1) = (w[0].0 / w[1].0, w[0].1 / w[1].1);
            assert!((l2 - 4.0).abs() < 0.4, "L2 ratio {l2}");
            assert!((h1 - 2.0).abs() < 0.2, "H1 ratio {h1}");
        }
    }

    #[test]
    fn dirichlet_galerkin_and_uniqueness() {
        let (m, k, _) = square(0.05);
        let b = assemble_load(&m, sine_load).unwrap();
        let bd = m.boundary_vertices();
        let r1 = solve_dirichlet(&k, &b, &bd, 1e-12).unwrap();
        let guess: Vec<f64> = (0..m.n_vertices()).map(|i| (i as f64).sin()).collect();
        let r2 = solve_dirichlet_from(&k, &b, &bd, 1e-12, Some(&guess)).unwrap();
        let d: Vec<f64> = r1
            .solution
            .values
            .iter()
            .zip(&r2.solution.values)
            .map(|(a, b)| a - b)
            .collect();
        let mm = assemble_mass(&m).unwrap();
        assert!(mm.bilinear(&d, &d).sqrt() < 1e-10);
        // K u - b vanishes on every interior basis function
        let ku = k.matvec(&r1.solution.values);
        let flags = m.boundary_vertex_flags();
        let bn = norm(&b);
        for i in 0..m.n_vertices() {
            if !flags[i] {
                assert!((ku[i] - b[i]).abs() <= 1e-11 * bn);
            }
        }
    }

    #[test]
    fn neumann_cosine_and_gauge() {
        let mut errs = Vec::new();
        for h in [0.1, 0.05, 0.025] {
            let (m, k, mm) = square(h);
            let b = assemble_load(&m, |p| PI * PI * (PI * p[0]).cos()).unwrap();
            let r = solve_neumann(&k, &mm, &b, 1e-12).unwrap();
            let one = vec![1.0; m.n_vertices()];
            let mean = dot(&mm.matvec(&one), &r.solution.values);
            assert!(mean.abs() < 1e-12, "{mean}");
            let shifted: Vec<f64> = r.solution.values.iter().map(|v| v + 3.0).collect();
            let (r0, r1) = (k.matvec(&r.solution.values), k.matvec(&shifted));
            assert!(r0.iter().zip(&r1).all(|(a, b)| (a - b).abs() < 1e-10));
            errs.push(
                error_norms(
                    &m,
                    &r.solution,
                    |p| (PI * p[0]).cos(),
                    |p| [-PI * (PI * p[0]).sin(), 0.0],
                )
                .unwrap()
                .0,
            );
        }
        for w in errs.windows(2) {
            assert!((w[0] / w[1] - 4.0).abs() < 0.5, "{errs:?}");
        }
    }

    #[test]
    fn neumann_rejects_incompatible_load() {
        let (m, k, mm) = square(0.1);
        let b = assemble_load(&m, |_| 1.0).unwrap();
        match solve_neumann(&k, &mm, &b, 1e-10) {
            Err(Error::Compatibility { defect }) => assert!((defect - 1.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn robin_cases() {
        let (m, k, _) = square(0.05);
        let b0 = assemble_boundary_mass(&m, &RobinCoefficient::Uniform(0.0)).unwrap();
        assert!(matches!(
            solve_robin(&k, &b0, &vec![1.0; m.n_vertices()], 1e-10),
            Err(Error::RobinIsNeumann)
        ));
        let b1 = assemble_boundary_mass(&m, &RobinCoefficient::Uniform(1.0)).unwrap();
        let r = solve_robin(&k, &b1, &vec![0.0; m.n_vertices()], 1e-10).unwrap();
        assert!(r.solution.values.iter().all(|&v| v == 0.0));
        // penalty limit
        let f = assemble_load(&m, sine_load).unwrap();
        let big = assemble_boundary_mass(&m, &RobinCoefficient::Uniform(1e6)).unwrap();
        let ur = solve_robin(&k, &big, &f, 1e-12).unwrap();
        let ud = solve_dirichlet(&k, &f, &m.boundary_vertices(), 1e-12).unwrap();
        let d: Vec<f64> = ur
            .solution
            .values
            .iter()
            .zip(&ud.solution.values)
            .map(|(a, b)| a - b)
            .collect();
        let mm = assemble_mass(&m).unwrap();
        assert!(mm.bilinear(&d, &d).sqrt() < 1e-3);
    }

    #[test]
    fn robin_disk_radial_solution() {
        let m = refine_times(&triangulate(&unit_disk(), 0.25).unwrap(), 2);
        let sys = System::assemble(&m, Some(&RobinCoefficient::Uniform(1.0))).unwrap();
        let b = assemble_load(&m, |_| 1.0).unwrap();
        let r = solve_robin(&sys.stiffness, sys.robin.as_ref().unwrap(), &b, 1e-12).unwrap();
        let center = m.vertices.iter().position(|p| p[0] == 0.0 && p[1] == 0.0).unwrap();
        assert!((r.solution.values[center] - 0.75).abs() < 0.01);
        let (l2, _) = error_norms(
            &m,
            &r.solution,
            |p| (1.0 - p[0] * p[0] - p[1] * p[1]) / 4.0 + 0.5,
            |p| [-p[0] / 2.0, -p[1] / 2.0],
        )
        .unwrap();
        assert!(l2 < 1e-2);
        assert!(norms(&r.solution, &sys).unwrap().robin.unwrap() > 0.0);
    }

    #[test]
    fn poincare_square_and_scaling() {
        let (m, k, mm) = square(0.05);
        let c = poincare_constant(&k, &mm, 1e-8).unwrap();
        assert!((c - 1.0 / PI).abs() < 0.01 / PI, "{c}");
        let m2 = m.scaled(2.0);
        let c2 = poincare_constant(&assemble_stiffness(&m2).unwrap(), &assemble_mass(&m2).unwrap(), 1e-8).unwrap();
        assert!((c2 - 2.0 * c).abs() < 1e-6 * c);
    }

    #[test]
    fn neumann_spectrum_matches_solver_operator() {
        let (m, k, mm) = square(0.1);
        let rep = neumann_spectrum(&k, &mm, 3, 1e-9).unwrap();
        for (mu, x) in rep.eigenvalues.iter().zip(&rep.vectors) {
            let b = mm.matvec(x);
            let y = solve_neumann(&k, &mm, &b, 1e-13).unwrap().solution.values;
            // Rayleigh quotient of the solution operator in the M inner product
            let q = mm.bilinear(x, &y) / mm.bilinear(x, x);
            assert!((q - 1.0 / mu).abs() < 1e-8 / mu);
        }
        assert_eq!(m.n_vertices(), k.dim());
    }

    #[test]
    fn robin_spectrum_monotone_in_h() {
        let m = triangulate(&unit_disk(), 0.25).unwrap();
        let k = assemble_stiffness(&m).unwrap();
        let mm = assemble_mass(&m).unwrap();
        let b1 = assemble_boundary_mass(&m, &RobinCoefficient::Uniform(1.0)).unwrap();
        let b2 = assemble_boundary_mass(&m, &RobinCoefficient::Uniform(2.0)).unwrap();
        let s1 = robin_fredholm_spectrum(&k, &b1, &mm, 4, 1e-8).unwrap();
        let s2 = robin_fredholm_spectrum(&k, &b2, &mm, 4, 1e-8).unwrap();
        for (a, b) in s1.eigenvalues.iter().zip(&s2.eigenvalues) {
            assert!(*a > 0.0 && b > a);
        }
        assert!(s1.residuals.iter().all(|&r| r <= 1e-8));
    }

    #[test]
    fn classical_steklov_disk_low_modes() {
        let m = refine_times(&triangulate(&unit_disk(), 0.25).unwrap(), 1);
        let k = assemble_stiffness(&m).unwrap();
        let b1 = assemble_boundary_mass(&m, &RobinCoefficient::Uniform(1.0)).unwrap();
        let s = classical_steklov_spectrum(&k, &b1, 5, 1e-8).unwrap();
        for (got, want) in s.eigenvalues.iter().zip([0.0, 1.0, 1.0, 2.0, 2.0]) {
            assert!((got - want).abs() < 0.03, "{:?}", s.eigenvalues);
        }
    }

    #[test]
    fn union_check_cases() {
        let sq = triangulate(&unit_square(), 0.125).unwrap();
        let same = union_embedding_check(&sq, &sq, &sq, 2).unwrap();
        assert!((same.trace_a - same.trace_union).abs() < 1e-9 && (same.trace_b - same.trace_union).abs() < 1e-9);
        assert!(same.holds);
        let a = triangulate(&rectangle([0.0, 0.0], [1.0, 1.0]), 0.125).unwrap();
        let b = triangulate(&rectangle([0.5, 0.0], [1.5, 1.0]), 0.125).unwrap();
        let u = triangulate(&rectangle([0.0, 0.0], [1.5, 1.0]), 0.125).unwrap();
        let rep = union_embedding_check(&a, &b, &u, 3).unwrap();
        assert!(rep.trace_union <= rep.bound && rep.holds);
        let far = triangulate(&rectangle([3.0, 0.0], [4.0, 1.0]), 0.125).unwrap();
        assert!(matches!(
            union_embedding_check(&a, &far, &u, 1),
            Err(Error::GeometryMismatch(_))
        ));
    }
}
