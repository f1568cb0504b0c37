//! Mesh recipes for each domain family.

use std::collections::{HashMap, HashSet};
use std::f64::consts::{LN_2, TAU};

use spade::{ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation};

use super::{BoundaryEdge, EdgeCurve, Mesh};
use crate::error::{Error, Result};
use crate::geometry::{
    chart::ChartMap, dist, lerp, point_segment_distance, rect_union_rectangles, spiral_map, Domain, Family, Point,
    RectUnionPart,
};

/// Triangulates `domain` with elements of size about `target_h`.
///
/// Straight-sided families get structured grids whose cell size is at most
/// `target_h`. The rectangle union is graded toward the origin so that every
/// rectangle carries the same number of elements; there `target_h` is the
/// element size relative to the distance from the origin. The spiral is meshed
/// on a structured grid in logarithmic parameter coordinates, one band per
/// unit of `-ln s`.
pub fn triangulate(domain: &Domain, target_h: f64) -> Result<Mesh> {
    if !(target_h > 0.0) || !target_h.is_finite() {
        return Err(Error::Invalid(format!("target_h must be positive (got {target_h})")));
    }
    match &domain.family {
        Family::Rectangle { min, max } => Ok(rectangle_mesh(*min, *max, target_h, None)),
        Family::LShape => Ok(rectangle_mesh([0.0, 0.0], [1.0, 1.0], target_h, Some([0.5, 0.5]))),
        Family::Disk { center, radius } => Ok(disk_mesh(*center, *radius, target_h)),
        Family::Annulus { center, inner, outer } => Ok(annulus_mesh(*center, *inner, *outer, target_h)),
        Family::RectUnion { k_max, part } => rect_union_mesh(*k_max, *part, target_h),
        Family::Spiral { n_max } => spiral_mesh(*n_max, target_h),
        Family::HalfDisk { .. } | Family::Polygon => polygon_mesh(domain, target_h),
    }
}

/// Merges coincident vertices by exact coordinate match (`-0.0 == 0.0`).
#[derive(Default)]
pub(crate) struct VertexPool {
    pub vertices: Vec<Point>,
    index: HashMap<(u64, u64), usize>,
}

impl VertexPool {
    pub fn add(&mut self, p: Point) -> usize {
        let key = |x: f64| if x == 0.0 { 0u64 } else { x.to_bits() };
        *self.index.entry((key(p[0]), key(p[1]))).or_insert_with(|| {
            self.vertices.push([p[0] + 0.0, p[1] + 0.0]);
            self.vertices.len() - 1
        })
    }
}

/// Splits the quad `a b c d` (in cyclic order) along its shorter diagonal,
/// preferring `a-c` on ties.
pub(crate) fn push_quad(tris: &mut Vec<[usize; 3]>, v: &[Point], a: usize, b: usize, c: usize, d: usize) {
    if dist(v[b], v[d]) < dist(v[a], v[c]) * (1.0 - 1e-12) {
        tris.push([a, b, d]);
        tris.push([b, c, d]);
    } else {
        tris.push([a, b, c]);
        tris.push([a, c, d]);
    }
}

/// Orients triangles counterclockwise, collects the edges used by one
/// triangle only as boundary edges, and asks `classify` for their marker and
/// curve. Returning `None` from `classify` leaves the edge unlisted (axis
/// edges of meridian meshes).
pub(crate) fn finish<F>(
    vertices: Vec<Point>,
    mut triangles: Vec<[usize; 3]>,
    axisymmetric: bool,
    mut classify: F,
) -> Mesh
where
    F: FnMut(Point, Point) -> Option<(u32, EdgeCurve)>,
{
    triangles.retain(|t| t[0] != t[1] && t[1] != t[2] && t[0] != t[2]);
    for t in &mut triangles {
        let (p, q, r) = (vertices[t[0]], vertices[t[1]], vertices[t[2]]);
        if (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]) < 0.0 {
            t.swap(1, 2);
        }
    }
    let mut count: HashMap<(usize, usize), u32> = HashMap::new();
    for t in &triangles {
        for i in 0..3 {
            let (a, b) = (t[i], t[(i + 1) % 3]);
            *count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    let mut boundary_edges = Vec::new();
    let mut curves = Vec::new();
    for t in &triangles {
        for i in 0..3 {
            let (a, b) = (t[i], t[(i + 1) % 3]);
            if count[&(a.min(b), a.max(b))] == 1 {
                if let Some((marker, curve)) = classify(vertices[a], vertices[b]) {
                    boundary_edges.push(BoundaryEdge { v: [a, b], marker });
                    curves.push(curve);
                }
            }
        }
    }
    Mesh {
        vertices,
        triangles,
        boundary_edges,
        axisymmetric,
        curves,
    }
}

/// Marker of the domain loop nearest to the edge midpoint: 0 for the outer
/// loop, `k` for hole `k`.
pub(crate) fn loop_marker(domain: &Domain, a: Point, b: Point) -> u32 {
    let m = lerp(a, b, 0.5);
    let mut best = (f64::INFINITY, 0u32);
    for (k, l) in domain.loops().enumerate() {
        let n = l.len();
        for i in 0..n {
            let d = point_segment_distance(m, l[i], l[(i + 1) % n]);
            if d < best.0 {
                best = (d, k as u32);
            }
        }
    }
    best.1
}

fn cells(len: f64, h: f64) -> usize {
    ((len / h) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

fn rectangle_mesh(min: Point, max: Point, h: f64, notch: Option<Point>) -> Mesh {
    let (w, ht) = (max[0] - min[0], max[1] - min[1]);
    let (mut nx, mut ny) = (cells(w, h), cells(ht, h));
    if notch.is_some() {
        nx += nx % 2;
        ny += ny % 2;
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut v = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            v.push([
                min[0] + w * (i as f64 / nx as f64),
                min[1] + ht * (j as f64 / ny as f64),
            ]);
        }
    }
    let mut tris = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            if notch.is_some() && i >= nx / 2 && j >= ny / 2 {
                continue;
            }
            push_quad(&mut tris, &v, id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
        }
    }
    compact(v, tris, false, |_, _| Some((0, EdgeCurve::Straight)))
}

/// Drops unreferenced vertices before finishing.
pub(crate) fn compact<F>(v: Vec<Point>, tris: Vec<[usize; 3]>, axisymmetric: bool, classify: F) -> Mesh
where
    F: FnMut(Point, Point) -> Option<(u32, EdgeCurve)>,
{
    let mut map = vec![usize::MAX; v.len()];
    let mut pool = Vec::new();
    let tris = tris
        .into_iter()
        .map(|t| {
            t.map(|i| {
                if map[i] == usize::MAX {
                    map[i] = pool.len();
                    pool.push(v[i]);
                }
                map[i]
            })
        })
        .collect();
    finish(pool, tris, axisymmetric, classify)
}

/// Concentric rings with `6j` vertices on ring `j`.
fn disk_mesh(center: Point, radius: f64, h: f64) -> Mesh {
    let m = cells(radius, h);
    let mut v = vec![center];
    let mut ring_start = vec![0usize];
    for j in 1..=m {
        ring_start.push(v.len());
        let r = radius * (j as f64 / m as f64);
        for i in 0..6 * j {
            let a = TAU * (i as f64 / (6 * j) as f64);
            v.push([center[0] + r * a.cos(), center[1] + r * a.sin()]);
        }
    }
    let mut tris = Vec::new();
    for i in 0..6 {
        tris.push([0, 1 + i, 1 + (i + 1) % 6]);
    }
    for j in 2..=m {
        let (n_in, n_out) = (6 * (j - 1), 6 * j);
        let (s_in, s_out) = (ring_start[j - 1], ring_start[j]);
        let (mut a, mut b) = (0usize, 0usize);
        while a < n_in || b < n_out {
            // advance along whichever ring has the smaller next angle
            let next_in = (a + 1) as f64 / n_in as f64;
            let next_out = (b + 1) as f64 / n_out as f64;
            let va = s_in + a % n_in;
            let vb = s_out + b % n_out;
            if b < n_out && (a >= n_in || next_out <= next_in) {
                tris.push([va, vb, s_out + (b + 1) % n_out]);
                b += 1;
            } else {
                tris.push([va, vb, s_in + (a + 1) % n_in]);
                a += 1;
            }
        }
    }
    finish(v, tris, false, |_, _| Some((0, EdgeCurve::Circle { center, radius })))
}

fn annulus_mesh(center: Point, inner: f64, outer: f64, h: f64) -> Mesh {
    let nt = cells(TAU * outer, h).max(6);
    let nr = cells(outer - inner, h);
    let id = |i: usize, j: usize| j * nt + i % nt;
    let mut v = Vec::new();
    for j in 0..=nr {
        let r = inner + (outer - inner) * (j as f64 / nr as f64);
        for i in 0..nt {
            let a = TAU * (i as f64 / nt as f64);
            v.push([center[0] + r * a.cos(), center[1] + r * a.sin()]);
        }
    }
    let mut tris = Vec::new();
    for j in 0..nr {
        for i in 0..nt {
            push_quad(&mut tris, &v, id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
        }
    }
    finish(v, tris, false, |a, _| {
        let r = dist(a, center);
        if (r - outer).abs() < (r - inner).abs() {
            Some((0, EdgeCurve::Circle { center, radius: outer }))
        } else {
            Some((1, EdgeCurve::Circle { center, radius: inner }))
        }
    })
}

/// Width of the narrowest feature of the rectangle union relative to its
/// distance scale `2^-k`.
pub(crate) fn rect_union_feature(k_max: u32) -> Option<(String, f64)> {
    match k_max {
        0 => None,
        1 => Some(("rectangle P_1".into(), 0.25)),
        k => Some((format!("gap between P_{k} and P_{}", k - 1), 0.125)),
    }
}

/// Radii of the square rings around the origin: geometric with ratio at most
/// `q`, passing through every rectangle side `x1 = 0.75 * 2^-k, 1.25 * 2^-k`
/// and ending at 1.
fn rect_union_radii(k_max: u32, q: f64) -> Vec<f64> {
    let mut breaks: Vec<f64> = rect_union_rectangles(k_max)
        .iter()
        .flat_map(|&(l, r, _)| [l, r])
        .collect();
    breaks.push(1.0);
    breaks.sort_by(f64::total_cmp);
    let rho0 = 0.375 * 0.5f64.powi(k_max as i32);
    let mut radii = vec![rho0];
    for b in breaks {
        let prev = *radii.last().unwrap();
        let n = ((b / prev).ln() / q.ln() * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        for i in 1..n {
            radii.push(prev * (b / prev).powf(i as f64 / n as f64));
        }
        radii.push(b);
    }
    radii
}

fn rect_union_mesh(k_max: u32, part: RectUnionPart, h: f64) -> Result<Mesh> {
    let domain = crate::geometry::build_rect_union_part(k_max, part)?;
    if part != RectUnionPart::Wedge {
        if let Some((feature, width)) = rect_union_feature(k_max) {
            if h > width {
                return Err(Error::FeatureUnderresolved {
                    feature,
                    width,
                    target_h: h,
                });
            }
        }
    }
    let half = cells(1.0, h);
    let full = 2 * half;
    let q = 1.0 + 1.0 / half as f64;
    let radii = rect_union_radii(k_max, q);
    let frac = |i: usize| i as f64 / half as f64;

    // (u, v) points of the unit square: a core grid and square rings
    let core = radii[0];
    let mut pool = VertexPool::default();
    let mut tris = Vec::new();

    let piece = |map: &dyn Fn(Point) -> Point, pool: &mut VertexPool, tris: &mut Vec<[usize; 3]>| {
        let mut core_ids = vec![vec![0usize; half + 1]; half + 1];
        for (i, row) in core_ids.iter_mut().enumerate() {
            for (j, id) in row.iter_mut().enumerate() {
                *id = pool.add(map([core * frac(i), core * frac(j)]));
            }
        }
        for i in 0..half {
            for j in 0..half {
                let (a, b, c, d) = (
                    core_ids[i][j],
                    core_ids[i + 1][j],
                    core_ids[i + 1][j + 1],
                    core_ids[i][j + 1],
                );
                push_quad(tris, &pool.vertices, a, b, c, d);
            }
        }
        let ring = |rho: f64, i: usize| {
            if i <= half {
                [rho, rho * frac(i)]
            } else {
                [rho * frac(full - i), rho]
            }
        };
        let mut inner: Vec<usize> = (0..=full).map(|i| pool.add(map(ring(core, i)))).collect();
        for &rho in &radii[1..] {
            let outer: Vec<usize> = (0..=full).map(|i| pool.add(map(ring(rho, i)))).collect();
            for i in 0..full {
                push_quad(tris, &pool.vertices, inner[i], outer[i], outer[i + 1], inner[i + 1]);
            }
            inner = outer;
        }
    };

    let s_map = |p: Point| [p[0], -p[1]];
    let v_map = |p: Point| [p[0], p[0] / 10.0 + p[1] * (1.0 - p[0] / 10.0)];
    if part != RectUnionPart::Wedge {
        piece(&s_map, &mut pool, &mut tris);
    }
    if part != RectUnionPart::Rectangles {
        piece(&v_map, &mut pool, &mut tris);
    }
    // blocks over x2 = 0 between the sides of each rectangle
    if part != RectUnionPart::Wedge {
        let rows = if part == RectUnionPart::Whole {
            half.div_ceil(10)
        } else {
            half.div_ceil(4)
        };
        for (l, r, top) in rect_union_rectangles(k_max) {
            let cols: Vec<f64> = radii.iter().copied().filter(|&x| x >= l && x <= r).collect();
            let height = |x: f64| if part == RectUnionPart::Whole { x / 10.0 } else { top };
            let ids: Vec<Vec<usize>> = cols
                .iter()
                .map(|&x| {
                    (0..=rows)
                        .map(|m| pool.add([x, height(x) * (m as f64 / rows as f64)]))
                        .collect()
                })
                .collect();
            for c in 0..cols.len() - 1 {
                for m in 0..rows {
                    let (a, b, cc, d) = (ids[c][m], ids[c + 1][m], ids[c + 1][m + 1], ids[c][m + 1]);
                    push_quad(&mut tris, &pool.vertices, a, b, cc, d);
                }
            }
        }
    }
    let vertices = pool.vertices;
    Ok(finish(vertices, tris, false, |a, b| {
        Some((loop_marker(&domain, a, b), EdgeCurve::Straight))
    }))
}

/// Structured grid in `(sigma, lambda)`, `s = e^-sigma`, `t = s e^lambda`,
/// `sigma in [0, n_max]`, `lambda in [0, ln 2]`, mapped through the spiral
/// chart.
fn spiral_mesh(n_max: u32, h: f64) -> Result<Mesh> {
    if n_max == 0 || n_max > crate::geometry::SPIRAL_MAX_N {
        return Err(Error::TruncationLimit {
            what: "n_max",
            value: n_max as usize,
            max: crate::geometry::SPIRAL_MAX_N as usize,
        });
    }
    let per_band = cells((1.0 + TAU * TAU).sqrt(), h);
    let nl = cells(TAU * LN_2, h);
    let ns = per_band * n_max as usize;
    let param = |i: usize, j: usize| -> Point {
        let s = (-(i as f64 / per_band as f64)).exp();
        let t = if j == nl {
            2.0 * s
        } else {
            s * (LN_2 * (j as f64 / nl as f64)).exp()
        };
        [s, t]
    };
    let id = |i: usize, j: usize| i * (nl + 1) + j;
    let mut params = Vec::with_capacity((ns + 1) * (nl + 1));
    for i in 0..=ns {
        for j in 0..=nl {
            params.push(param(i, j));
        }
    }
    let v: Vec<Point> = params.iter().map(|&p| spiral_map(p)).collect::<Result<_>>()?;
    let mut tris = Vec::new();
    for i in 0..ns {
        for j in 0..nl {
            push_quad(&mut tris, &v, id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
        }
    }
    let lookup: HashMap<(u64, u64), Point> = v
        .iter()
        .zip(&params)
        .map(|(p, q)| ((p[0].to_bits(), p[1].to_bits()), *q))
        .collect();
    Ok(finish(v, tris, false, |a, b| {
        let p0 = lookup[&(a[0].to_bits(), a[1].to_bits())];
        let p1 = lookup[&(b[0].to_bits(), b[1].to_bits())];
        Some((
            0,
            EdgeCurve::Chart {
                map: ChartMap::Spiral,
                p0,
                p1,
            },
        ))
    }))
}

/// Constrained Delaunay triangulation of the domain loops, refined until
/// triangle areas are below that of an equilateral triangle of side
/// `target_h`.
pub fn polygon_mesh(domain: &Domain, target_h: f64) -> Result<Mesh> {
    let mut cdt: ConstrainedDelaunayTriangulation<Point2<f64>> = ConstrainedDelaunayTriangulation::new();
    for l in domain.loops() {
        let pts = l.iter().map(|p| Point2::new(p[0], p[1]));
        cdt.add_constraint_edges(pts, true)
            .map_err(|e| Error::Invalid(format!("triangulation: {e:?}")))?;
    }
    let max_area = 3f64.sqrt() / 4.0 * target_h * target_h;
    let result = cdt.refine(
        RefinementParameters::<f64>::new()
            .exclude_outer_faces(true)
            .with_max_allowed_area(max_area)
            .with_max_additional_vertices(4_000_000),
    );
    let excluded: HashSet<_> = result.excluded_faces.into_iter().collect();
    let vertices: Vec<Point> = cdt.vertices().map(|v| [v.position().x, v.position().y]).collect();
    let tris: Vec<[usize; 3]> = cdt
        .inner_faces()
        .filter(|f| !excluded.contains(&f.fix()))
        .map(|f| f.vertices().map(|v| v.fix().index()))
        .collect();
    Ok(compact(vertices, tris, false, |a, b| {
        Some((loop_marker(domain, a, b), EdgeCurve::Straight))
    }))
}
