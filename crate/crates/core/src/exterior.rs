//! Truncated exterior problems in axisymmetric form, solved along a
//! limiting-absorption schedule `(A − k² − iε) u_ε = F`.
//!
//! Meshes live in the meridian half-plane `(r, z)`, `r >= 0`. The obstacle
//! boundary carries marker [`OBSTACLE_MARKER`], the artificial boundary
//! `|x| = R_inf` carries [`TRUNCATION_MARKER`], and axis edges are not listed.

use std::cell::RefCell;
use std::collections::HashSet;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use spade::{ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation};

use crate::cg::{jacobi_cg, pcg, CgOptions};
use crate::error::{Error, Result};
use crate::fem::{
    assemble_boundary_mass, assemble_load, assemble_mass, assemble_stiffness, integrate_field, recovered_gradient,
    Field, RobinCoefficient,
};
use crate::geometry::{point_segment_distance, winding_number, Domain, Family, Point};
use crate::mesh::{compact, push_quad, EdgeCurve, Locator, Mesh};
use crate::quadrature::{adaptive, gauss_legendre};
use crate::sparse::{combine, Scalar, SymSparse};

pub const OBSTACLE_MARKER: u32 = 0;
pub const TRUNCATION_MARKER: u32 = 9;
/// Ring growth ratio of the far-field grading.
pub const GROWTH: f64 = 1.2;

fn norm2(p: Point) -> f64 {
    p[0].hypot(p[1])
}

/// Radii `start = ρ_0 < ρ_1 < ... = end` with spacing growing from `first`
/// by at most [`GROWTH`] per ring, capped at `max_step`. The last ring is
/// clipped to `end`, so the rings below `end` do not depend on `end`.
fn graded_rings(start: f64, end: f64, first: f64, ratio: f64, max_step: f64) -> Vec<f64> {
    let mut rings = vec![start];
    let mut step = first.min(max_step);
    loop {
        let last = *rings.last().unwrap();
        let next = last + step;
        if next >= end * (1.0 - 1e-12) {
            if rings.len() > 1 && end - last < 0.5 * step {
                *rings.last_mut().unwrap() = end;
            } else {
                rings.push(end);
            }
            return rings;
        }
        rings.push(next);
        step = (step * ratio).min(max_step);
    }
}

/// Structured mesh of the meridian half-annulus `inner <= |x| <= outer`:
/// `n_theta` angular cells and rings graded geometrically with ratio
/// `min(GROWTH, 1 + π/n_theta)` (nearly square cells), radial steps capped
/// at `max_h`.
pub fn shell_mesh(inner: f64, outer: f64, n_theta: usize, max_h: f64) -> Result<Mesh> {
    if !(inner > 0.0 && outer > inner) || n_theta < 2 {
        return Err(Error::Invalid(format!(
            "shell needs 0 < inner < outer and n_theta >= 2 (got {inner}, {outer}, {n_theta})"
        )));
    }
    let ratio = GROWTH.min(1.0 + PI / n_theta as f64);
    let rings = graded_rings(inner, outer, inner * (ratio - 1.0), ratio, max_h);
    let nt = n_theta;
    let mut v = Vec::with_capacity(rings.len() * (nt + 1));
    for &rho in &rings {
        for i in 0..=nt {
            let th = PI * i as f64 / nt as f64;
            let p = if i == 0 {
                [0.0, rho]
            } else if i == nt {
                [0.0, -rho]
            } else if 2 * i == nt {
                [rho, 0.0]
            } else {
                [rho * th.sin(), rho * th.cos()]
            };
            v.push(p);
        }
    }
    let id = |i: usize, j: usize| j * (nt + 1) + i;
    let mut tris = Vec::new();
    for j in 0..rings.len() - 1 {
        for i in 0..nt {
            push_quad(&mut tris, &v, id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
        }
    }
    let tol = 1e-9 * outer;
    Ok(compact(v, tris, true, |a, b| {
        if a[0] == 0.0 && b[0] == 0.0 {
            return None;
        }
        let (ra, rb) = (norm2(a), norm2(b));
        if (ra - inner).abs() < tol && (rb - inner).abs() < tol {
            Some((
                OBSTACLE_MARKER,
                EdgeCurve::Circle {
                    center: [0.0, 0.0],
                    radius: inner,
                },
            ))
        } else {
            Some((
                TRUNCATION_MARKER,
                EdgeCurve::Circle {
                    center: [0.0, 0.0],
                    radius: outer,
                },
            ))
        }
    }))
}

/// Exterior meridian mesh between `obstacle` and `|x| = r_inf`.
pub fn build_exterior_mesh(obstacle: &Domain, r_inf: f64, target_h: f64) -> Result<Mesh> {
    build_exterior_mesh_capped(obstacle, r_inf, target_h, f64::INFINITY)
}

/// As [`build_exterior_mesh`], with every element edge kept below `max_h`
/// (wave problems need a fixed number of points per wavelength).
pub fn build_exterior_mesh_capped(obstacle: &Domain, r_inf: f64, target_h: f64, max_h: f64) -> Result<Mesh> {
    if !(target_h > 0.0) || !(max_h >= target_h) {
        return Err(Error::Invalid(format!(
            "need 0 < target_h <= max_h (got {target_h}, {max_h})"
        )));
    }
    let extent = obstacle.loops().flatten().map(|&p| norm2(p)).fold(0.0, f64::max);
    if !(extent < 0.5 * r_inf) {
        return Err(Error::TruncationRadiusTooSmall {
            extent,
            needed: 2.0 * extent,
        });
    }
    if obstacle.loops().flatten().any(|p| p[0] < 0.0) {
        return Err(Error::Invalid("obstacle cross-section must lie in r >= 0".into()));
    }
    match obstacle.family {
        Family::HalfDisk { radius } => {
            let mut nt = (PI * radius / target_h).ceil() as usize;
            if max_h.is_finite() {
                nt = nt.max((PI * r_inf / max_h).ceil() as usize);
            }
            shell_mesh(radius, r_inf, nt.max(4), max_h)
        }
        _ => cdt_exterior(obstacle, extent, r_inf, target_h, max_h),
    }
}

fn cdt_exterior(obstacle: &Domain, extent: f64, r_inf: f64, h: f64, max_h: f64) -> Result<Mesh> {
    let pieces = obstacle.filled_outer_pieces();
    let near = (1.5 * extent).max(extent + 4.0 * h);
    let rings = graded_rings(near, r_inf, h, GROWTH, max_h);
    let inside = |p: Point| pieces.iter().any(|l| winding_number(p, l) != 0);
    let clearance = |p: Point| {
        pieces
            .iter()
            .flat_map(|l| (0..l.len()).map(move |i| point_segment_distance(p, l[i], l[(i + 1) % l.len()])))
            .fold(f64::INFINITY, f64::min)
    };
    // axis vertices, top to bottom
    let n_axis = (near / h).ceil() as usize;
    let mut axis: Vec<f64> = rings.iter().rev().copied().collect();
    for i in (1..n_axis).rev() {
        axis.push(near * i as f64 / n_axis as f64);
    }
    axis.push(0.0);
    let upper: Vec<f64> = axis.clone();
    for &z in upper.iter().rev().skip(1) {
        axis.push(-z);
    }
    let axis: Vec<Point> = axis.into_iter().map(|z| [0.0, z]).filter(|p| !inside(*p)).collect();
    let last_step = rings[rings.len() - 1] - rings[rings.len() - 2];
    let n_arc = ((PI * r_inf / last_step).ceil() as usize).max(8);
    let mut outer: Vec<Point> = (1..n_arc)
        .map(|i| {
            let th = PI * i as f64 / n_arc as f64;
            [r_inf * th.sin(), -r_inf * th.cos()]
        })
        .collect();
    outer.extend(axis);
    let mut cdt: ConstrainedDelaunayTriangulation<Point2<f64>> = ConstrainedDelaunayTriangulation::new();
    let tri_err = |e| Error::Invalid(format!("triangulation: {e:?}"));
    cdt.add_constraint_edges(outer.iter().map(|p| Point2::new(p[0], p[1])), true)
        .map_err(tri_err)?;
    for l in &pieces {
        cdt.add_constraint_edges(l.iter().map(|p| Point2::new(p[0], p[1])), true)
            .map_err(tri_err)?;
    }
    let n = (near / h).ceil() as usize;
    for i in 1..n {
        for j in 0..=2 * n {
            let p = [near * i as f64 / n as f64, near * (j as f64 / n as f64 - 1.0)];
            if norm2(p) < near - 0.5 * h && !inside(p) && clearance(p) > 0.5 * h {
                cdt.insert(Point2::new(p[0], p[1])).map_err(tri_err)?;
            }
        }
    }
    for w in rings.windows(2).take(rings.len().saturating_sub(2)) {
        let rho = w[1];
        let step = w[1] - w[0];
        let m = (PI * rho / step).ceil() as usize;
        for i in 1..m {
            let th = PI * i as f64 / m as f64;
            cdt.insert(Point2::new(rho * th.sin(), -rho * th.cos()))
                .map_err(tri_err)?;
        }
    }
    let result = cdt.refine(
        RefinementParameters::<f64>::new()
            .exclude_outer_faces(true)
            .with_max_additional_vertices(2_000_000),
    );
    let excluded: HashSet<_> = result.excluded_faces.into_iter().collect();
    let vertices: Vec<Point> = cdt.vertices().map(|v| [v.position().x, v.position().y]).collect();
    let tris: Vec<[usize; 3]> = cdt
        .inner_faces()
        .filter(|f| !excluded.contains(&f.fix()))
        .map(|f| f.vertices().map(|v| v.fix().index()))
        .collect();
    let far = 0.5 * (extent + r_inf);
    Ok(compact(vertices, tris, true, |a, b| {
        if a[0] == 0.0 && b[0] == 0.0 {
            None
        } else if norm2(a) > far && norm2(b) > far {
            Some((TRUNCATION_MARKER, EdgeCurve::Straight))
        } else {
            Some((OBSTACLE_MARKER, EdgeCurve::Straight))
        }
    }))
}

/// Boundary condition on the obstacle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ObstacleBc {
    Dirichlet,
    Neumann,
    Robin { h: f64 },
}

/// Condition on the artificial boundary `|x| = R_inf`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    /// `u = 0`.
    #[default]
    Dirichlet,
    /// `∂u/∂r = (i k' − 1/R) u` with `k'² = k² + iε`.
    Absorbing,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContinuationSchedule {
    pub epsilons: Vec<f64>,
    pub k: f64,
    pub bc: ObstacleBc,
    pub truncation: Truncation,
}

impl ContinuationSchedule {
    pub fn new(epsilons: Vec<f64>, k: f64, bc: ObstacleBc) -> Result<Self> {
        let bad = |m: &str| Err(Error::InvalidSchedule(m.into()));
        if epsilons.is_empty() {
            return bad("no epsilons");
        }
        if !(k >= 0.0) || !k.is_finite() {
            return bad("k must be finite and >= 0");
        }
        if epsilons.iter().any(|e| !(*e >= 0.0 && *e <= 1.0)) {
            return bad("epsilons must lie in [0, 1]");
        }
        if epsilons.windows(2).any(|w| !(w[1] < w[0])) {
            return bad("epsilons must be strictly decreasing");
        }
        if let ObstacleBc::Robin { h } = bc {
            if !(h >= 0.0) || !h.is_finite() {
                return Err(Error::NegativeRobin(h));
            }
        }
        Ok(ContinuationSchedule {
            epsilons,
            k,
            bc,
            truncation: Truncation::Dirichlet,
        })
    }

    pub fn with_truncation(mut self, t: Truncation) -> Self {
        self.truncation = t;
        self
    }

    pub fn default_epsilons() -> Vec<f64> {
        vec![1e-1, 1e-2, 1e-3, 0.0]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeightedNormSpec {
    pub a: f64,
}

impl WeightedNormSpec {
    pub fn new(a: f64) -> Result<Self> {
        if a > 1.0 && a < 2.0 {
            Ok(WeightedNormSpec { a })
        } else {
            Err(Error::WeightExponent(a))
        }
    }
}

/// Radial bump `mass · 105/(32π w³) · (1 − ρ²/w²)²` centered on the axis at
/// height `z`, `ρ` the distance to the center.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpSource {
    pub z: f64,
    pub width: f64,
    pub mass: f64,
}

impl BumpSource {
    pub fn unit(z: f64, width: f64) -> Self {
        BumpSource { z, width, mass: 1.0 }
    }

    pub fn radial(&self, rho: f64) -> f64 {
        let w = self.width;
        if rho >= w {
            return 0.0;
        }
        let t = 1.0 - rho * rho / (w * w);
        self.mass * 105.0 / (32.0 * PI * w.powi(3)) * t * t
    }

    /// Density at a meridian point.
    pub fn density(&self, p: Point) -> f64 {
        self.radial(p[0].hypot(p[1] - self.z))
    }

    pub fn support_radius(&self) -> f64 {
        self.z.abs() + self.width
    }
}

#[derive(Clone, Debug)]
pub struct ContinuationResult {
    pub epsilons: Vec<f64>,
    pub fields: Vec<Field<Complex64>>,
    pub weighted_norms: Vec<f64>,
    /// `‖u_{ε_{j+1}} − u_{ε_j}‖_{L_{2,a}}`.
    pub pairwise_diffs: Vec<f64>,
    pub truncation_radius: f64,
    pub iterations: Vec<usize>,
    pub relative_residuals: Vec<f64>,
}

/// Assembled forms of one exterior mesh.
pub struct ExteriorSystem<'m> {
    pub mesh: &'m Mesh,
    stiffness: SymSparse,
    mass: SymSparse,
    obstacle: SymSparse,
    truncation: SymSparse,
    obstacle_dofs: Vec<usize>,
    truncation_dofs: Vec<usize>,
    pub r_inf: f64,
}

impl<'m> ExteriorSystem<'m> {
    pub fn new(mesh: &'m Mesh) -> Result<Self> {
        let marker_dofs = |m: u32| {
            let mut d: Vec<usize> = mesh
                .boundary_edges
                .iter()
                .filter(|e| e.marker == m)
                .flat_map(|e| e.v)
                .collect();
            d.sort_unstable();
            d.dedup();
            d
        };
        let only = |m: u32| RobinCoefficient::PerMarker(vec![(m, 1.0)]);
        Ok(ExteriorSystem {
            mesh,
            stiffness: assemble_stiffness(mesh)?,
            mass: assemble_mass(mesh)?,
            obstacle: assemble_boundary_mass(mesh, &only(OBSTACLE_MARKER))?,
            truncation: assemble_boundary_mass(mesh, &only(TRUNCATION_MARKER))?,
            obstacle_dofs: marker_dofs(OBSTACLE_MARKER),
            truncation_dofs: marker_dofs(TRUNCATION_MARKER),
            r_inf: mesh.vertices.iter().map(|&p| norm2(p)).fold(0.0, f64::max),
        })
    }

    /// Solves `(K_bc − (k² + iε) M) u = b` for one (possibly negative) `ε`.
    pub fn solve(
        &self,
        k: f64,
        eps: f64,
        bc: ObstacleBc,
        truncation: Truncation,
        load: &[f64],
        tol: f64,
    ) -> Result<(Vec<Complex64>, usize, f64)> {
        let n = self.mesh.n_vertices();
        if load.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: load.len(),
            });
        }
        let shift = Complex64::new(k * k, eps);
        let one = Complex64::new(1.0, 0.0);
        let mut terms = vec![(one, &self.stiffness), (-shift, &self.mass)];
        if let ObstacleBc::Robin { h } = bc {
            if !(h >= 0.0) {
                return Err(Error::NegativeRobin(h));
            }
            terms.push((Complex64::new(h, 0.0), &self.obstacle));
        }
        if truncation == Truncation::Absorbing {
            let kp = shift.sqrt();
            let kp = if kp.im < 0.0 { -kp } else { kp };
            terms.push((-(Complex64::i() * kp - 1.0 / self.r_inf), &self.truncation));
        }
        let a = combine(&terms)?;
        let mut fixed = vec![false; n];
        if bc == ObstacleBc::Dirichlet {
            self.obstacle_dofs.iter().for_each(|&i| fixed[i] = true);
        }
        if truncation == Truncation::Dirichlet {
            self.truncation_dofs.iter().for_each(|&i| fixed[i] = true);
        }
        let free: Vec<usize> = (0..n).filter(|&i| !fixed[i]).collect();
        let ar = a.restrict(&free);
        let br: Vec<Complex64> = free.iter().map(|&i| Complex64::new(load[i], 0.0)).collect();
        let out = if k == 0.0 {
            // The real part is SPD; precondition by the real operator with
            // every coefficient replaced by its modulus, which keeps the
            // spectrum on the segment from 1 to -i for any shift.
            let real_terms: Vec<(f64, &SymSparse)> = terms.iter().map(|&(c, m)| (c.norm(), m)).collect();
            let pr = combine(&real_terms)?.restrict(&free);
            let inner = CgOptions::for_dim(0.1 * tol, free.len());
            let failure = RefCell::new(None);
            let precond = |r: &[Complex64], z: &mut [Complex64]| {
                let re: Vec<f64> = r.iter().map(|c| c.re).collect();
                let im: Vec<f64> = r.iter().map(|c| c.im).collect();
                let solved =
                    jacobi_cg(&pr, &re, None, inner).and_then(|x| Ok((x.x, jacobi_cg(&pr, &im, None, inner)?.x)));
                match solved {
                    Ok((x, y)) => z
                        .iter_mut()
                        .zip(x.into_iter().zip(y))
                        .for_each(|(zi, (a, b))| *zi = Complex64::new(a, b)),
                    Err(e) => {
                        z.iter_mut().for_each(|zi| *zi = Complex64::new(0.0, 0.0));
                        failure.borrow_mut().get_or_insert(e);
                    }
                }
            };
            let out = pcg(
                |x, y| ar.matvec_into(x, y),
                precond,
                &br,
                None,
                CgOptions::new(tol, 2000),
            );
            if let Some(e) = failure.into_inner() {
                return Err(e);
            }
            out?
        } else {
            jacobi_cg(&ar, &br, None, CgOptions::new(tol, (50 * free.len()).max(5000)))?
        };
        let mut u = vec![Complex64::new(0.0, 0.0); n];
        for (j, &i) in free.iter().enumerate() {
            u[i] = out.x[j];
        }
        Ok((u, out.iterations, out.relative_residual))
    }
}

/// Solves along the schedule and records `L_{2,a}` norms and differences.
pub fn solve_shifted(
    mesh: &Mesh,
    schedule: &ContinuationSchedule,
    source: Option<&BumpSource>,
    norm_spec: WeightedNormSpec,
    tol: f64,
) -> Result<ContinuationResult> {
    let sys = ExteriorSystem::new(mesh)?;
    let load = match source {
        Some(s) => {
            if s.support_radius() > 0.5 * sys.r_inf {
                return Err(Error::SourceTooClose {
                    support: s.support_radius(),
                    limit: 0.5 * sys.r_inf,
                });
            }
            assemble_load(mesh, |p| s.density(p))?
        }
        None => vec![0.0; mesh.n_vertices()],
    };
    let solved: Vec<Result<(Vec<Complex64>, usize, f64)>> = schedule
        .epsilons
        .par_iter()
        .map(|&eps| sys.solve(schedule.k, eps, schedule.bc, schedule.truncation, &load, tol))
        .collect();
    let mut fields = Vec::new();
    let mut iterations = Vec::new();
    let mut relative_residuals = Vec::new();
    for r in solved {
        let (u, it, res) = r?;
        fields.push(Field::new(u));
        iterations.push(it);
        relative_residuals.push(res);
    }
    let weighted_norms = fields
        .iter()
        .map(|f| weighted_norm(&f.values, mesh, norm_spec))
        .collect::<Result<Vec<_>>>()?;
    let pairwise_diffs = fields
        .windows(2)
        .map(|w| {
            let d: Vec<Complex64> = w[1].values.iter().zip(&w[0].values).map(|(a, b)| a - b).collect();
            weighted_norm(&d, mesh, norm_spec)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ContinuationResult {
        epsilons: schedule.epsilons.clone(),
        fields,
        weighted_norms,
        pairwise_diffs,
        truncation_radius: sys.r_inf,
        iterations,
        relative_residuals,
    })
}

/// `(∫ |u|² (1 + |x|)^{−a} dx)^{1/2}` with the axisymmetric weight.
pub fn weighted_norm<T: Scalar>(values: &[T], mesh: &Mesh, spec: WeightedNormSpec) -> Result<f64> {
    WeightedNormSpec::new(spec.a)?;
    Ok(integrate_field(mesh, values, |x, u| u.abs2() * (1.0 + norm2(x)).powf(-spec.a))?.sqrt())
}

const ARC_SAMPLES: usize = 1440;

fn max_abs_with<T: Scalar>(loc: &Locator, values: &[T], mesh: &Mesh, rho: f64) -> Result<f64> {
    let mut best: Option<f64> = None;
    for i in 0..=ARC_SAMPLES {
        let th = PI * i as f64 / ARC_SAMPLES as f64;
        let p = [(rho * th.sin()).max(0.0), rho * th.cos()];
        if let Some((t, l)) = loc.locate(p, 1e-9 * rho) {
            let [a, b, c] = mesh.triangles[t];
            let u = values[a] * l[0] + values[b] * l[1] + values[c] * l[2];
            let m = u.abs2().sqrt();
            best = Some(best.map_or(m, |b: f64| b.max(m)));
        }
    }
    best.ok_or_else(|| Error::Invalid(format!("sphere of radius {rho} misses the mesh")))
}

/// `max |u|` over the sphere `|x| = rho`, sampled along the meridian arc.
pub fn max_abs_on_sphere<T: Scalar>(values: &[T], mesh: &Mesh, rho: f64) -> Result<f64> {
    if values.len() != mesh.n_vertices() {
        return Err(Error::DimensionMismatch {
            expected: mesh.n_vertices(),
            got: values.len(),
        });
    }
    max_abs_with(&Locator::new(mesh), values, mesh, rho)
}

/// Least-squares fit `log max_{|x|=ρ} |u| ≈ constant + exponent · log ρ`.
pub fn decay_fit<T: Scalar>(values: &[T], mesh: &Mesh, radii: &[f64]) -> Result<(f64, f64)> {
    if radii.len() < 3 {
        return Err(Error::TooFewRadii(radii.len()));
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) || !(radii[0] > 0.0) {
        return Err(Error::Invalid("radii must be positive and increasing".into()));
    }
    if values.len() != mesh.n_vertices() {
        return Err(Error::DimensionMismatch {
            expected: mesh.n_vertices(),
            got: values.len(),
        });
    }
    let loc = Locator::new(mesh);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &rho in radii {
        xs.push(rho.ln());
        ys.push(max_abs_with(&loc, values, mesh, rho)?.ln());
    }
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

fn theta_rule(panels: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(4);
    let hp = PI / panels as f64;
    (0..panels)
        .flat_map(|p| {
            let a = p as f64 * hp;
            x.iter()
                .zip(&w)
                .map(move |(xi, wi)| (a + 0.5 * hp * (xi + 1.0), 0.5 * hp * wi))
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Value and radial derivative of a P1 field at a meridian point, the
/// derivative taken from the recovered nodal gradient.
fn value_and_dr<T: Scalar>(mesh: &Mesh, loc: &Locator, values: &[T], grad: &[[T; 2]], p: Point) -> Option<(T, T)> {
    let rho = norm2(p);
    let (t, l) = loc.locate(p, 1e-9 * rho.max(1.0))?;
    let [a, b, c] = mesh.triangles[t];
    let u = values[a] * l[0] + values[b] * l[1] + values[c] * l[2];
    let g = |d: usize| grad[a][d] * l[0] + grad[b][d] * l[1] + grad[c][d] * l[2];
    Some((u, g(0) * (p[0] / rho) + g(1) * (p[1] / rho)))
}

/// `∫_{|x|=ρ} |∂u/∂r − i k u|² ds` for each radius.
pub fn radiation_residual(values: &[Complex64], mesh: &Mesh, k: f64, radii: &[f64]) -> Result<Vec<f64>> {
    if !(k > 0.0) {
        return Err(Error::RadiationNeedsK(k));
    }
    if values.len() != mesh.n_vertices() {
        return Err(Error::DimensionMismatch {
            expected: mesh.n_vertices(),
            got: values.len(),
        });
    }
    let loc = Locator::new(mesh);
    let grad = recovered_gradient(mesh, values)?;
    let rule = theta_rule(256);
    radii
        .iter()
        .map(|&rho| {
            let mut s = 0.0;
            for &(th, w) in &rule {
                let p = [rho * th.sin(), rho * th.cos()];
                let (u, dr) = value_and_dr(mesh, &loc, values, &grad, p)
                    .ok_or_else(|| Error::Invalid(format!("sphere of radius {rho} leaves the mesh")))?;
                s += w * (dr - Complex64::i() * k * u).norm_sqr() * 2.0 * PI * rho * rho * th.sin();
            }
            Ok(s)
        })
        .collect()
}

/// `γ = (−1 + i)/√2`, so that `γ² = −i`.
pub const GAMMA: Complex64 = Complex64::new(-FRAC_1_SQRT_2, FRAC_1_SQRT_2);

/// Kernel `e^{γ√ε s}/(4π s)` of `(−Δ − iε)` in three dimensions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GreenKernel {
    pub epsilon: f64,
}

impl GreenKernel {
    pub fn gamma(&self) -> Complex64 {
        GAMMA
    }

    fn kappa(&self) -> Complex64 {
        GAMMA * self.epsilon.sqrt()
    }

    pub fn at_distance(&self, s: f64) -> Complex64 {
        (self.kappa() * s).exp() / (4.0 * PI * s)
    }

    /// `d/ds` of [`at_distance`](Self::at_distance).
    pub fn derivative(&self, s: f64) -> Complex64 {
        self.at_distance(s) * (self.kappa() - 1.0 / s)
    }
}

fn d3(x: [f64; 3], y: [f64; 3]) -> f64 {
    ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt()
}

pub fn green_oracle(x: [f64; 3], y: [f64; 3], kernel: &GreenKernel) -> Result<Complex64> {
    let s = d3(x, y);
    if s == 0.0 {
        return Err(Error::Singular);
    }
    Ok(kernel.at_distance(s))
}

/// Dirichlet Green function of the exterior of the unit ball,
/// `1/(4π|x−y|) − 1/(4π|y||x−y*|)` with `y* = y/|y|²`.
pub fn kelvin_green(x: [f64; 3], y: [f64; 3]) -> Result<f64> {
    let ny = d3(y, [0.0; 3]);
    if !(ny > 1.0) {
        return Err(Error::Invalid("source point must lie outside the unit ball".into()));
    }
    let s = d3(x, y);
    if s == 0.0 {
        return Err(Error::Singular);
    }
    let ys = y.map(|c| c / (ny * ny));
    Ok(1.0 / (4.0 * PI * s) - 1.0 / (4.0 * PI * ny * d3(x, ys)))
}

/// `∫ G(x, y) F(y) dy` for the exterior unit ball, `G` from
/// [`kelvin_green`], `F` a bump source outside the ball. The direct part uses
/// the shell theorem, the image part a tensor quadrature over the bump.
pub fn bump_kelvin_oracle(x: [f64; 3], source: &BumpSource) -> Result<f64> {
    let c = [0.0, 0.0, source.z];
    let w = source.width;
    if source.z.abs() - w <= 1.0 {
        return Err(Error::Invalid("bump must lie outside the unit ball".into()));
    }
    let d = d3(x, c);
    let inner = d.min(w);
    let enclosed = adaptive(|r| 4.0 * PI * r * r * source.radial(r), 0.0, inner, 1e-14);
    let outer = if d < w {
        adaptive(|r| 4.0 * PI * r * source.radial(r), d, w, 1e-14)
    } else {
        0.0
    };
    let direct = (if d > 0.0 { enclosed / d } else { 0.0 } + outer) / (4.0 * PI);
    let (rx, rw) = gauss_legendre(16);
    let (mx, mw) = gauss_legendre(16);
    let nphi = 48;
    let mut image = 0.0;
    for (ri, rwi) in rx.iter().zip(&rw) {
        let rho = 0.5 * w * (ri + 1.0);
        let f = source.radial(rho) * rho * rho * 0.5 * w * rwi;
        for (mu, mwi) in mx.iter().zip(&mw) {
            let st = (1.0 - mu * mu).sqrt();
            for k in 0..nphi {
                let ph = 2.0 * PI * k as f64 / nphi as f64;
                let y = [c[0] + rho * st * ph.cos(), c[1] + rho * st * ph.sin(), c[2] + rho * mu];
                let ny2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
                let ys = y.map(|v| v / ny2);
                image += f * mwi * (2.0 * PI / nphi as f64) / (4.0 * PI * ny2.sqrt() * d3(x, ys));
            }
        }
    }
    Ok(direct - image)
}

/// Green representation `u(x) = ∫_{|y|=ρ} (u ∂g/∂r − g ∂u/∂r) dS_y` of a
/// field satisfying the homogeneous equation outside the sphere, evaluated
/// at the meridian point `x` (`|x| > ρ`).
pub fn green_representation(
    values: &[Complex64],
    mesh: &Mesh,
    rho: f64,
    x: Point,
    kernel: &GreenKernel,
) -> Result<Complex64> {
    if values.len() != mesh.n_vertices() {
        return Err(Error::DimensionMismatch {
            expected: mesh.n_vertices(),
            got: values.len(),
        });
    }
    if !(norm2(x) > rho) {
        return Err(Error::Invalid("evaluation point must lie outside the sphere".into()));
    }
    let loc = Locator::new(mesh);
    let grad = recovered_gradient(mesh, values)?;
    let x3 = [x[0], 0.0, x[1]];
    let nphi = 128;
    let mut s = Complex64::new(0.0, 0.0);
    for (th, w) in theta_rule(64) {
        let p = [rho * th.sin(), rho * th.cos()];
        let (u, dr) = value_and_dr(mesh, &loc, values, &grad, p)
            .ok_or_else(|| Error::Invalid(format!("sphere of radius {rho} leaves the mesh")))?;
        for k in 0..nphi {
            let ph = 2.0 * PI * (k as f64 + 0.5) / nphi as f64;
            let y = [p[0] * ph.cos(), p[0] * ph.sin(), p[1]];
            let dist = d3(x3, y);
            let g = kernel.at_distance(dist);
            let cos_n = ((y[0] - x3[0]) * y[0] + (y[1] - x3[1]) * y[1] + (y[2] - x3[2]) * y[2]) / (rho * dist);
            let dg = kernel.derivative(dist) * cos_n;
            s += (u * dg - g * dr) * (w * (2.0 * PI / nphi as f64) * rho * rho * th.sin());
        }
    }
    Ok(s)
}
