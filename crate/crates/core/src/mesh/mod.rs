//! Conforming triangle meshes with marked boundary edges.

mod build;
pub mod io;
mod locate;

use std::collections::HashMap;

use serde::Serialize;

use crate::geometry::{chart::ChartMap, dist, lerp, Point};

pub(crate) use build::{compact, push_quad};
pub use build::{polygon_mesh, triangulate};
pub use locate::Locator;

/// Boundary edge oriented with the domain on its left.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub v: [usize; 2],
    pub marker: u32,
}

/// The true curve a boundary edge approximates, used to snap midpoints on
/// refinement.
#[derive(Clone, Debug, PartialEq)]
pub enum EdgeCurve {
    Straight,
    Circle {
        center: Point,
        radius: f64,
    },
    /// Image under `map` of the parameter segment `p0 -> p1`.
    Chart {
        map: ChartMap,
        p0: Point,
        p1: Point,
    },
}

impl EdgeCurve {
    fn split(&self, a: Point, b: Point) -> (Point, EdgeCurve, EdgeCurve) {
        match self {
            EdgeCurve::Straight => (lerp(a, b, 0.5), EdgeCurve::Straight, EdgeCurve::Straight),
            EdgeCurve::Circle { center, radius } => {
                let m = lerp(a, b, 0.5);
                let d = [m[0] - center[0], m[1] - center[1]];
                let n = d[0].hypot(d[1]);
                let m = if n > 0.0 {
                    [center[0] + radius * d[0] / n, center[1] + radius * d[1] / n]
                } else {
                    m
                };
                (m, self.clone(), self.clone())
            }
            EdgeCurve::Chart { map, p0, p1 } => {
                let pm = lerp(*p0, *p1, 0.5);
                let m = map.forward(pm).unwrap_or_else(|_| lerp(a, b, 0.5));
                (
                    m,
                    EdgeCurve::Chart {
                        map: map.clone(),
                        p0: *p0,
                        p1: pm,
                    },
                    EdgeCurve::Chart {
                        map: map.clone(),
                        p0: pm,
                        p1: *p1,
                    },
                )
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    /// Counterclockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    /// Coordinates are `(r, z)` with `r >= 0`; integrals carry the weight `2 pi r`.
    pub axisymmetric: bool,
    /// One entry per boundary edge.
    pub curves: Vec<EdgeCurve>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub min_angle_deg: f64,
    pub max_aspect: f64,
    pub vertices: usize,
    pub triangles: usize,
    pub boundary_edges: usize,
    pub boundary_loops: usize,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Mesh {
    pub fn new(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
        axisymmetric: bool,
    ) -> Self {
        let curves = vec![EdgeCurve::Straight; boundary_edges.len()];
        Mesh {
            vertices,
            triangles,
            boundary_edges,
            axisymmetric,
            curves,
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let (p, q, r) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]))
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.signed_area(t)).sum()
    }

    /// Unique undirected edges, sorted.
    pub fn edges(&self) -> Vec<[usize; 2]> {
        let mut e: Vec<[usize; 2]> = self
            .triangles
            .iter()
            .flat_map(|t| {
                (0..3).map(move |i| {
                    let (a, b) = edge_key(t[i], t[(i + 1) % 3]);
                    [a, b]
                })
            })
            .collect();
        e.sort_unstable();
        e.dedup();
        e
    }

    pub fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for [a, b] in self.edges() {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    pub fn boundary_vertex_flags(&self) -> Vec<bool> {
        let mut f = vec![false; self.vertices.len()];
        for e in &self.boundary_edges {
            f[e.v[0]] = true;
            f[e.v[1]] = true;
        }
        f
    }

    /// Vertices on the listed boundary edges, sorted.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        let f = self.boundary_vertex_flags();
        (0..f.len()).filter(|&i| f[i]).collect()
    }

    pub fn max_edge_length(&self) -> f64 {
        self.edges()
            .iter()
            .map(|e| dist(self.vertices[e[0]], self.vertices[e[1]]))
            .fold(0.0, f64::max)
    }

    pub fn edge_length(&self, e: &BoundaryEdge) -> f64 {
        dist(self.vertices[e.v[0]], self.vertices[e.v[1]])
    }

    pub fn markers(&self) -> Vec<u32> {
        let mut m: Vec<u32> = self.boundary_edges.iter().map(|e| e.marker).collect();
        m.sort_unstable();
        m.dedup();
        m
    }

    fn on_axis(&self, v: usize) -> bool {
        self.axisymmetric && self.vertices[v][0] == 0.0
    }

    /// Boundary components traced along the oriented boundary edges. At a
    /// vertex where several components touch, the walk turns through the
    /// triangles around the vertex, so a pinch does not merge loops. In
    /// axisymmetric meshes chains ending on the axis count as components.
    pub fn boundary_loops(&self) -> Vec<Vec<usize>> {
        let nb = self.boundary_edges.len();
        let mut by_start: HashMap<usize, Vec<usize>> = HashMap::new();
        let mut ends = vec![0usize; self.vertices.len()];
        for (i, e) in self.boundary_edges.iter().enumerate() {
            by_start.entry(e.v[0]).or_default().push(i);
            ends[e.v[1]] += 1;
        }
        // directed triangle edge -> triangle
        let mut half: HashMap<(usize, usize), usize> = HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for i in 0..3 {
                half.insert((tri[i], tri[(i + 1) % 3]), t);
            }
        }
        let is_boundary: HashMap<(usize, usize), usize> = self
            .boundary_edges
            .iter()
            .enumerate()
            .map(|(i, e)| ((e.v[0], e.v[1]), i))
            .collect();

        // next boundary edge after edge `i`, found by rotating around its head
        let next_edge = |i: usize| -> Option<usize> {
            let [a, v] = self.boundary_edges[i].v;
            let outgoing = by_start.get(&v)?;
            if outgoing.len() == 1 {
                return Some(outgoing[0]);
            }
            let mut t = *half.get(&(a, v))?;
            for _ in 0..self.triangles.len() {
                let tri = self.triangles[t];
                let k = tri.iter().position(|&x| x == v)?;
                let c = tri[(k + 1) % 3];
                if let Some(&j) = is_boundary.get(&(v, c)) {
                    return Some(j);
                }
                t = *half.get(&(c, v))?;
            }
            None
        };

        let mut used = vec![false; nb];
        let mut loops = Vec::new();
        // open chains first, starting where no boundary edge comes in
        let mut starts: Vec<usize> = (0..nb).filter(|&i| ends[self.boundary_edges[i].v[0]] == 0).collect();
        starts.extend(0..nb);
        for s in starts {
            if used[s] {
                continue;
            }
            let mut verts = vec![self.boundary_edges[s].v[0]];
            let mut cur = s;
            loop {
                used[cur] = true;
                verts.push(self.boundary_edges[cur].v[1]);
                match next_edge(cur) {
                    Some(n) if !used[n] => cur = n,
                    _ => break,
                }
            }
            if verts.first() == verts.last() && verts.len() > 1 {
                verts.pop();
            }
            loops.push(verts);
        }
        loops
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let nv = self.vertices.len();
        let mut min_angle = f64::INFINITY;
        let mut max_aspect: f64 = 0.0;
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= nv) || tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                violations.push(format!("bad vertex ids at triangle {t}"));
                continue;
            }
            let a = self.signed_area(t);
            if a < 0.0 {
                violations.push(format!("negative area at triangle {t}"));
            } else if a == 0.0 {
                violations.push(format!("zero area at triangle {t}"));
            }
            let p = tri.map(|v| self.vertices[v]);
            let l = [dist(p[1], p[2]), dist(p[2], p[0]), dist(p[0], p[1])];
            for i in 0..3 {
                let (x, y, z) = (l[i], l[(i + 1) % 3], l[(i + 2) % 3]);
                let c = ((y * y + z * z - x * x) / (2.0 * y * z)).clamp(-1.0, 1.0);
                min_angle = min_angle.min(c.acos().to_degrees());
            }
            // longest edge over inradius-based height, equals 2/sqrt(3) for equilateral
            let lmax = l[0].max(l[1]).max(l[2]);
            let s = 0.5 * (l[0] + l[1] + l[2]);
            let inr = a.abs() / s;
            max_aspect = max_aspect.max(lmax / (2.0 * 3f64.sqrt() * inr));
        }

        let mut count: HashMap<(usize, usize), (u32, i32)> = HashMap::new();
        for tri in &self.triangles {
            for i in 0..3 {
                let (a, b) = (tri[i], tri[(i + 1) % 3]);
                let entry = count.entry(edge_key(a, b)).or_insert((0, 0));
                entry.0 += 1;
                entry.1 += if a < b { 1 } else { -1 };
            }
        }
        let mut listed: HashMap<(usize, usize), u32> = HashMap::new();
        for e in &self.boundary_edges {
            *listed.entry(edge_key(e.v[0], e.v[1])).or_insert(0) += 1;
        }
        let mut keys: Vec<_> = count.keys().copied().collect();
        keys.sort_unstable();
        for k in keys {
            let (n, orient) = count[&k];
            let l = listed.get(&k).copied().unwrap_or(0);
            match (n, l) {
                (2, 0) if orient == 0 => {}
                (2, 0) => violations.push(format!("inconsistent orientation on edge ({}, {})", k.0, k.1)),
                (1, 1) => {}
                (1, 0) if self.on_axis(k.0) && self.on_axis(k.1) => {}
                (1, 0) => violations.push(format!("unlisted boundary edge ({}, {})", k.0, k.1)),
                (_, l) if l > 1 => violations.push(format!("boundary edge ({}, {}) listed {l} times", k.0, k.1)),
                (n, _) => violations.push(format!("edge ({}, {}) shared by {n} triangles", k.0, k.1)),
            }
        }
        for (k, _) in listed.iter().filter(|(k, _)| !count.contains_key(k)) {
            violations.push(format!("boundary edge ({}, {}) is not a triangle edge", k.0, k.1));
        }
        if self.curves.len() != self.boundary_edges.len() {
            violations.push("curve table length differs from boundary edge count".into());
        }
        if self.axisymmetric {
            if let Some(v) = (0..nv).find(|&v| self.vertices[v][0] < 0.0) {
                violations.push(format!("negative radius at vertex {v}"));
            }
        }
        let boundary_loops = self.boundary_loops().len();
        ValidationReport {
            violations,
            min_angle_deg: if min_angle.is_finite() { min_angle } else { 0.0 },
            max_aspect,
            vertices: nv,
            triangles: self.triangles.len(),
            boundary_edges: self.boundary_edges.len(),
            boundary_loops,
        }
    }

    /// Uniformly scaled copy.
    pub fn scaled(&self, k: f64) -> Mesh {
        let mut m = self.clone();
        for p in &mut m.vertices {
            *p = [k * p[0], k * p[1]];
        }
        for c in &mut m.curves {
            *c = match c {
                EdgeCurve::Straight => EdgeCurve::Straight,
                EdgeCurve::Circle { center, radius } => EdgeCurve::Circle {
                    center: [k * center[0], k * center[1]],
                    radius: k * *radius,
                },
                EdgeCurve::Chart { map, p0, p1 } => EdgeCurve::Chart {
                    map: crate::geometry::similarity_conjugate(map, k, 1.0),
                    p0: *p0,
                    p1: *p1,
                },
            };
        }
        m
    }

    /// Copy with vertices moved by `f`; when `f` reverses orientation the
    /// triangles and boundary edges are flipped to stay counterclockwise.
    /// Curve information is dropped.
    pub fn mapped<F: Fn(Point) -> Point>(&self, f: F, axisymmetric: bool) -> Mesh {
        let vertices: Vec<Point> = self.vertices.iter().map(|&p| f(p)).collect();
        let mut m = Mesh::new(
            vertices,
            self.triangles.clone(),
            self.boundary_edges.clone(),
            axisymmetric,
        );
        if !m.triangles.is_empty() && m.signed_area(0) < 0.0 {
            for t in &mut m.triangles {
                t.swap(1, 2);
            }
            for e in &mut m.boundary_edges {
                e.v.swap(0, 1);
            }
        }
        m
    }

    /// Two meshes side by side, sharing no vertices.
    pub fn disjoint_union(a: &Mesh, b: &Mesh) -> Mesh {
        let off = a.vertices.len();
        let mut m = a.clone();
        m.vertices.extend_from_slice(&b.vertices);
        m.triangles.extend(b.triangles.iter().map(|t| t.map(|v| v + off)));
        m.boundary_edges.extend(b.boundary_edges.iter().map(|e| BoundaryEdge {
            v: e.v.map(|v| v + off),
            marker: e.marker,
        }));
        m.curves.extend_from_slice(&b.curves);
        m
    }
}

/// Red refinement: every triangle is split into four through its edge
/// midpoints. Boundary midpoints are placed on the curve each edge
/// approximates.
pub fn refine(mesh: &Mesh) -> Mesh {
    let mut vertices = mesh.vertices.clone();
    let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
    let mut boundary_edges = Vec::with_capacity(2 * mesh.boundary_edges.len());
    let mut curves = Vec::with_capacity(2 * mesh.boundary_edges.len());
    for (e, curve) in mesh.boundary_edges.iter().zip(&mesh.curves) {
        let [a, b] = e.v;
        let (p, c0, c1) = curve.split(vertices[a], vertices[b]);
        let m = vertices.len();
        vertices.push(p);
        mid.insert(edge_key(a, b), m);
        boundary_edges.push(BoundaryEdge {
            v: [a, m],
            marker: e.marker,
        });
        boundary_edges.push(BoundaryEdge {
            v: [m, b],
            marker: e.marker,
        });
        curves.push(c0);
        curves.push(c1);
    }
    for [a, b] in mesh.edges() {
        mid.entry((a, b)).or_insert_with(|| {
            vertices.push(lerp(mesh.vertices[a], mesh.vertices[b], 0.5));
            vertices.len() - 1
        });
    }
    let mut triangles = Vec::with_capacity(4 * mesh.triangles.len());
    for &[a, b, c] in &mesh.triangles {
        let ab = mid[&edge_key(a, b)];
        let bc = mid[&edge_key(b, c)];
        let ca = mid[&edge_key(c, a)];
        triangles.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
    }
    Mesh {
        vertices,
        triangles,
        boundary_edges,
        axisymmetric: mesh.axisymmetric,
        curves,
    }
}

pub fn refine_times(mesh: &Mesh, levels: usize) -> Mesh {
    let mut m = mesh.clone();
    for _ in 0..levels {
        m = refine(&m);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{annulus, build_rect_union, build_spiral, unit_square};
    use proptest::prelude::*;

    fn square(h: f64) -> Mesh {
        triangulate(&unit_square(), h).unwrap()
    }

    #[test]
    fn square_counts() {
        let m = square(0.5);
        assert_eq!(m.vertices.len(), 9);
        assert_eq!(m.triangles.len(), 8);
        let r = refine(&m);
        assert_eq!(r.triangles.len(), 32);
        assert_eq!(r.vertices.len(), 25);
        assert_eq!(r.boundary_edges.len(), 2 * m.boundary_edges.len());
        let rep = r.validate();
        assert!(rep.is_valid(), "{:?}", rep.violations);
        assert!((rep.min_angle_deg - 45.0).abs() < 1e-9);
        assert!((square(0.5).validate().min_angle_deg - 45.0).abs() < 1e-9);
    }

    #[test]
    fn flipped_triangle_is_reported() {
        let mut m = square(0.5);
        m.triangles[3].swap(0, 1);
        let rep = m.validate();
        assert!(
            rep.violations.iter().any(|v| v == "negative area at triangle 3"),
            "{:?}",
            rep.violations
        );
    }

    #[test]
    fn triangle_count_scales_like_inverse_h_squared() {
        for h in [0.3, 0.1, 0.037] {
            let n = square(h).triangles.len() as f64;
            let ratio = n * h * h;
            assert!((1.0..=4.0).contains(&ratio), "h={h}: {ratio}");
        }
    }

    #[test]
    fn annulus_loops_and_markers() {
        let m = triangulate(&annulus([0.0, 0.0], 0.5, 1.0, 64), 0.2).unwrap();
        let rep = m.validate();
        assert!(rep.is_valid(), "{:?}", rep.violations);
        assert_eq!(rep.boundary_loops, 2);
        assert_eq!(m.markers(), vec![0, 1]);
    }

    #[test]
    fn rect_union_loops_match_domain() {
        for k in 1..=5 {
            let d = build_rect_union(k).unwrap();
            let m = triangulate(&d, 0.125).unwrap();
            let rep = m.validate();
            assert!(rep.is_valid(), "k={k}: {:?}", rep.violations);
            assert_eq!(rep.boundary_loops, d.loop_count(), "k={k}");
            assert!((m.area() - d.area()).abs() < 1e-12);
        }
    }

    #[test]
    fn spiral_snapping_error_is_quadratic() {
        let d = build_spiral(2).unwrap();
        let mut m = triangulate(&d, 0.4).unwrap();
        let mut c_coarse = None;
        for _ in 0..3 {
            let h = m.max_edge_length();
            let mut worst: f64 = 0.0;
            for (e, c) in m.boundary_edges.iter().zip(&m.curves) {
                if let EdgeCurve::Chart { map, p0, p1 } = c {
                    let mid = lerp(m.vertices[e.v[0]], m.vertices[e.v[1]], 0.5);
                    let truth = map.forward(lerp(*p0, *p1, 0.5)).unwrap();
                    worst = worst.max(dist(mid, truth) / (h * h));
                }
            }
            let c = *c_coarse.get_or_insert(worst);
            assert!(worst <= c * 1.05, "{worst} > {c}");
            m = refine(&m);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn refine_twice_stays_valid(h in 0.15f64..0.6) {
            let m = square(h);
            let r2 = refine(&refine(&m));
            prop_assert_eq!(r2.triangles.len(), 16 * m.triangles.len());
            prop_assert!(r2.validate().is_valid());
            prop_assert!((r2.area() - 1.0).abs() < 1e-12);
        }
    }
}
