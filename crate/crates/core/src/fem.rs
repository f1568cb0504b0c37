//! P1 assembly of the stiffness, mass and boundary forms, load vectors and
//! discrete norms. Axisymmetric meshes carry the weight `2 pi r`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mesh::Mesh;
use crate::quadrature::{TriRule, TRI_DEGREE5, TRI_EDGE_MIDPOINTS};
use crate::sparse::{Scalar, SymBuilder, SymSparse};

struct Element {
    ids: [usize; 3],
    p: [Point; 3],
    area: f64,
    grads: [[f64; 2]; 3],
}

fn element(mesh: &Mesh, t: usize) -> Result<Element> {
    let ids = mesh.triangles[t];
    let p = ids.map(|v| mesh.vertices[v]);
    let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]);
    let scale = (0..3)
        .map(|i| {
            let (a, b) = (p[i], p[(i + 1) % 3]);
            (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
        })
        .fold(0.0, f64::max);
    if !(det.abs() > 1e-14 * scale) {
        return Err(Error::ZeroArea(t));
    }
    let grads = [
        [(p[1][1] - p[2][1]) / det, (p[2][0] - p[1][0]) / det],
        [(p[2][1] - p[0][1]) / det, (p[0][0] - p[2][0]) / det],
        [(p[0][1] - p[1][1]) / det, (p[1][0] - p[0][0]) / det],
    ];
    Ok(Element {
        ids,
        p,
        area: 0.5 * det.abs(),
        grads,
    })
}

fn elements(mesh: &Mesh) -> impl Iterator<Item = Result<Element>> + '_ {
    (0..mesh.triangles.len()).map(move |t| element(mesh, t))
}

fn weight(mesh: &Mesh, p: Point) -> f64 {
    if mesh.axisymmetric {
        2.0 * PI * p[0]
    } else {
        1.0
    }
}

fn at(p: &[Point; 3], l: [f64; 3]) -> Point {
    [
        l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0],
        l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1],
    ]
}

/// `K_ij = ∫ ∇λ_i · ∇λ_j`.
pub fn assemble_stiffness(mesh: &Mesh) -> Result<SymSparse> {
    let mut b = SymBuilder::new(mesh.n_vertices());
    for e in elements(mesh) {
        let e = e?;
        let c = [(e.p[0][0] + e.p[1][0] + e.p[2][0]) / 3.0, 0.0];
        let w = e.area * weight(mesh, c);
        let mut local = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                local[i][j] = w * (e.grads[i][0] * e.grads[j][0] + e.grads[i][1] * e.grads[j][1]);
            }
        }
        b.add_local(&e.ids, &local);
    }
    Ok(b.finalize())
}

/// `M_ij = ∫ λ_i λ_j`, integrated exactly (also with the linear weight).
pub fn assemble_mass(mesh: &Mesh) -> Result<SymSparse> {
    let mut b = SymBuilder::new(mesh.n_vertices());
    for e in elements(mesh) {
        let e = e?;
        let mut local = [[0.0; 3]; 3];
        if mesh.axisymmetric {
            // ∫ λ_i λ_j λ_k = 2A a!b!c!/(a+b+c+2)!
            let r = e.p.map(|q| q[0]);
            for i in 0..3 {
                for j in 0..3 {
                    let mut s = 0.0;
                    for k in 0..3 {
                        let m = match (i == j, i == k || j == k) {
                            (true, true) => 1.0 / 10.0,
                            (true, false) => 1.0 / 30.0,
                            (false, true) => 1.0 / 30.0,
                            (false, false) => 1.0 / 60.0,
                        };
                        s += r[k] * m;
                    }
                    local[i][j] = 2.0 * PI * e.area * s;
                }
            }
        } else {
            for i in 0..3 {
                for j in 0..3 {
                    local[i][j] = e.area / 12.0 * if i == j { 2.0 } else { 1.0 };
                }
            }
        }
        b.add_local(&e.ids, &local);
    }
    Ok(b.finalize())
}

/// Nonnegative boundary coefficient `h`, constant on each boundary edge.
#[derive(Clone, Debug, PartialEq)]
pub enum RobinCoefficient {
    Uniform(f64),
    /// `(marker, value)`; unlisted markers get zero.
    PerMarker(Vec<(u32, f64)>),
    /// One value per boundary edge, in mesh order.
    PerEdge(Vec<f64>),
}

impl RobinCoefficient {
    pub fn edge_values(&self, mesh: &Mesh) -> Result<Vec<f64>> {
        let vals: Vec<f64> = match self {
            RobinCoefficient::Uniform(h) => vec![*h; mesh.boundary_edges.len()],
            RobinCoefficient::PerMarker(table) => mesh
                .boundary_edges
                .iter()
                .map(|e| table.iter().find(|(m, _)| *m == e.marker).map_or(0.0, |t| t.1))
                .collect(),
            RobinCoefficient::PerEdge(v) => {
                if v.len() != mesh.boundary_edges.len() {
                    return Err(Error::DimensionMismatch {
                        expected: mesh.boundary_edges.len(),
                        got: v.len(),
                    });
                }
                v.clone()
            }
        };
        let listed: Vec<f64> = match self {
            RobinCoefficient::Uniform(h) => vec![*h],
            RobinCoefficient::PerMarker(t) => t.iter().map(|x| x.1).collect(),
            RobinCoefficient::PerEdge(v) => v.clone(),
        };
        if let Some(&bad) = listed.iter().find(|h| !(**h >= 0.0) || !h.is_finite()) {
            return Err(Error::NegativeRobin(bad));
        }
        Ok(vals)
    }
}

/// `B_ij = ∫_{∂D} h λ_i λ_j ds` over the boundary edges.
pub fn assemble_boundary_mass(mesh: &Mesh, h: &RobinCoefficient) -> Result<SymSparse> {
    let hv = h.edge_values(mesh)?;
    let mut b = SymBuilder::new(mesh.n_vertices());
    for (e, &he) in mesh.boundary_edges.iter().zip(&hv) {
        if he == 0.0 {
            continue;
        }
        let len = mesh.edge_length(e);
        let local = if mesh.axisymmetric {
            let (r0, r1) = (mesh.vertices[e.v[0]][0], mesh.vertices[e.v[1]][0]);
            // ∫_0^1 r(t) φ_a φ_b, exact for the cubic integrand
            let c = 2.0 * PI * he * len / 12.0;
            [
                [c * (3.0 * r0 + r1), c * (r0 + r1)],
                [c * (r0 + r1), c * (r0 + 3.0 * r1)],
            ]
        } else {
            let c = he * len / 6.0;
            [[2.0 * c, c], [c, 2.0 * c]]
        };
        b.add_local(&e.v, &local);
    }
    Ok(b.finalize())
}

/// `b_i = ∫ F λ_i` by the edge-midpoint rule.
pub fn assemble_load(mesh: &Mesh, f: impl Fn(Point) -> f64) -> Result<Vec<f64>> {
    let mut b = vec![0.0; mesh.n_vertices()];
    for e in elements(mesh) {
        let e = e?;
        for (l, w) in TRI_EDGE_MIDPOINTS {
            let x = at(&e.p, *l);
            let fx = f(x) * w * e.area * weight(mesh, x);
            for a in 0..3 {
                b[e.ids[a]] += fx * l[a];
            }
        }
    }
    Ok(b)
}

/// Load from nodal samples of `F`, taken as its P1 interpolant: `b = M f`.
pub fn assemble_load_samples(mass: &SymSparse, samples: &[f64]) -> Result<Vec<f64>> {
    if samples.len() != mass.dim() {
        return Err(Error::DimensionMismatch {
            expected: mass.dim(),
            got: samples.len(),
        });
    }
    Ok(mass.matvec(samples))
}

/// Nodal coefficients of a P1 function.
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T = f64> {
    pub values: Vec<T>,
}

impl Field<f64> {
    pub fn interpolate(mesh: &Mesh, f: impl Fn(Point) -> f64) -> Self {
        Field {
            values: mesh.vertices.iter().map(|&p| f(p)).collect(),
        }
    }
}

impl<T> Field<T> {
    pub fn new(values: Vec<T>) -> Self {
        Field { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Assembled forms of one mesh.
#[derive(Clone, Debug)]
pub struct System {
    pub stiffness: SymSparse,
    pub mass: SymSparse,
    /// Boundary mass with `h ≡ 1`.
    pub trace: SymSparse,
    /// Boundary mass with the problem's `h`, when there is one.
    pub robin: Option<SymSparse>,
}

impl System {
    pub fn assemble(mesh: &Mesh, h: Option<&RobinCoefficient>) -> Result<Self> {
        Ok(System {
            stiffness: assemble_stiffness(mesh)?,
            mass: assemble_mass(mesh)?,
            trace: assemble_boundary_mass(mesh, &RobinCoefficient::Uniform(1.0))?,
            robin: h.map(|h| assemble_boundary_mass(mesh, h)).transpose()?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Norms {
    pub l2: f64,
    pub h1: f64,
    pub energy: f64,
    pub trace_l2: f64,
    /// `sqrt(u^T K u + u^T B u)`, present with a Robin form.
    pub robin: Option<f64>,
}

fn quad(a: &SymSparse, u: &[f64]) -> f64 {
    a.bilinear(u, u).max(0.0)
}

pub fn norms(u: &Field, sys: &System) -> Result<Norms> {
    let n = sys.stiffness.dim();
    if u.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: u.len(),
        });
    }
    let l2 = quad(&sys.mass, &u.values);
    let en = quad(&sys.stiffness, &u.values);
    Ok(Norms {
        l2: l2.sqrt(),
        h1: (l2 + en).sqrt(),
        energy: en.sqrt(),
        trace_l2: quad(&sys.trace, &u.values).sqrt(),
        robin: sys.robin.as_ref().map(|b| (en + quad(b, &u.values)).sqrt()),
    })
}

fn integrate(mesh: &Mesh, rule: TriRule, mut f: impl FnMut(&Element, [f64; 3], Point) -> f64) -> Result<f64> {
    let mut s = 0.0;
    for e in elements(mesh) {
        let e = e?;
        for (l, w) in rule {
            let x = at(&e.p, *l);
            s += w * e.area * weight(mesh, x) * f(&e, *l, x);
        }
    }
    Ok(s)
}

/// `‖u_h − u‖_{L²}` and `‖∇(u_h − u)‖_{L²}` by the degree-five rule.
pub fn error_norms(
    mesh: &Mesh,
    u: &Field,
    exact: impl Fn(Point) -> f64,
    grad: impl Fn(Point) -> [f64; 2],
) -> Result<(f64, f64)> {
    if u.len() != mesh.n_vertices() {
        return Err(Error::DimensionMismatch {
            expected: mesh.n_vertices(),
            got: u.len(),
        });
    }
    let l2 = integrate(mesh, TRI_DEGREE5, |e, l, x| {
        let uh: f64 = (0..3).map(|a| l[a] * u.values[e.ids[a]]).sum();
        (uh - exact(x)).powi(2)
    })?;
    let h1 = integrate(mesh, TRI_DEGREE5, |e, _, x| {
        let g = grad(x);
        let mut gh = [0.0; 2];
        for a in 0..3 {
            gh[0] += u.values[e.ids[a]] * e.grads[a][0];
            gh[1] += u.values[e.ids[a]] * e.grads[a][1];
        }
        (gh[0] - g[0]).powi(2) + (gh[1] - g[1]).powi(2)
    })?;
    Ok((l2.sqrt(), h1.sqrt()))
}

/// `∫ f(x, u_h(x))` by the degree-five rule, for real or complex `u_h`.
pub fn integrate_field<T: Scalar>(mesh: &Mesh, values: &[T], f: impl Fn(Point, T) -> f64) -> Result<f64> {
    if values.len() != mesh.n_vertices() {
        return Err(Error::DimensionMismatch {
            expected: mesh.n_vertices(),
            got: values.len(),
        });
    }
    integrate(mesh, TRI_DEGREE5, |e, l, x| {
        let uh = values[e.ids[0]] * l[0] + values[e.ids[1]] * l[1] + values[e.ids[2]] * l[2];
        f(x, uh)
    })
}

/// Gradient of the P1 function `values` on triangle `t`.
pub fn gradient_in<T: Scalar>(mesh: &Mesh, t: usize, values: &[T]) -> Result<[T; 2]> {
    let e = element(mesh, t)?;
    let mut g = [T::ZERO; 2];
    for a in 0..3 {
        g[0] += values[e.ids[a]] * e.grads[a][0];
        g[1] += values[e.ids[a]] * e.grads[a][1];
    }
    Ok(g)
}

/// Nodal gradients: area-weighted averages of the P1 element gradients
/// around each vertex.
pub fn recovered_gradient<T: Scalar>(mesh: &Mesh, values: &[T]) -> Result<Vec<[T; 2]>> {
    if values.len() != mesh.n_vertices() {
        return Err(Error::DimensionMismatch {
            expected: mesh.n_vertices(),
            got: values.len(),
        });
    }
    let mut g = vec![[T::ZERO; 2]; mesh.n_vertices()];
    let mut w = vec![0.0; mesh.n_vertices()];
    for t in 0..mesh.triangles.len() {
        let e = element(mesh, t)?;
        let gt = gradient_in(mesh, t, values)?;
        for &v in &e.ids {
            g[v][0] += gt[0] * e.area;
            g[v][1] += gt[1] * e.area;
            w[v] += e.area;
        }
    }
    for (gv, wv) in g.iter_mut().zip(&w) {
        if *wv > 0.0 {
            gv[0] = gv[0] * (1.0 / wv);
            gv[1] = gv[1] * (1.0 / wv);
        }
    }
    Ok(g)
}

/// `(∫ |u_h|^p)^{1/p}` by the degree-five rule.
pub fn lp_norm(mesh: &Mesh, u: &Field, p: f64) -> Result<f64> {
    Ok(integrate_field(mesh, &u.values, |_, v| v.abs().powf(p))?.powf(1.0 / p))
}

/// `∫ f` over the mesh (with the axisymmetric weight when flagged).
pub fn integrate_fn(mesh: &Mesh, f: impl Fn(Point) -> f64) -> Result<f64> {
    integrate(mesh, TRI_DEGREE5, |_, _, x| f(x))
}
