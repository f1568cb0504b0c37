//! Sampled quasiisometry constants, mesh interior metric, chart arclength and
//! the one-dimensional area formula.

use petgraph::algo::dijkstra;
use petgraph::graph::{NodeIndex, UnGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rstar::{RTree, RTreeObject, AABB};
use serde::Serialize;

use super::{chart::ChartMap, dist, lerp, loop_length, polygon_signed_area, segments_cross, winding_number};
use super::{Domain, Point};
use crate::error::{Error, Result};
use crate::mesh::{Locator, Mesh};
use crate::quadrature::{adaptive, gauss_legendre, integrate_gl};

/// Locality radius of the pair sampling, relative to the region diameter.
pub const QI_DELTA: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricEstimate {
    pub lower: f64,
    pub upper: f64,
    pub samples: usize,
    pub seed: u64,
}

impl MetricEstimate {
    /// `Q = max(upper, 1/lower)`.
    pub fn constant(&self) -> f64 {
        self.upper.max(1.0 / self.lower.max(f64::MIN_POSITIVE))
    }
}

fn region_diameter(region: &[Point]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, &a) in region.iter().enumerate() {
        for &b in &region[i + 1..] {
            d = d.max(dist(a, b));
        }
    }
    d
}

/// Samples `n_samples` pairs `(y, z)` in `region` with `|y - z| <= delta *
/// diam(region)` and returns the extreme distortion ratios of `map`.
///
/// Points are drawn in coordinates relative to the bounding box, so regions
/// that differ by a similarity see the same relative sample configuration.
pub fn estimate_quasiisometry(map: &ChartMap, region: &[Point], n_samples: usize, seed: u64) -> Result<MetricEstimate> {
    if n_samples < 100 {
        return Err(Error::Invalid(format!(
            "n_samples must be at least 100 (got {n_samples})"
        )));
    }
    let area = polygon_signed_area(region).abs();
    let diam = region_diameter(region);
    if !(area > 1e-14 * diam * diam) {
        return Err(Error::EmptyRegion);
    }
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in region {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let inside = |p: Point| winding_number(p, region) != 0;
    let r_max = QI_DELTA * diam;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut lower, mut upper) = (f64::INFINITY, 0.0f64);
    let mut taken = 0;
    let mut attempts = 0usize;
    while taken < n_samples {
        attempts += 1;
        if attempts > 1000 * n_samples {
            return Err(Error::EmptyRegion);
        }
        let y = [
            lo[0] + rng.random::<f64>() * (hi[0] - lo[0]),
            lo[1] + rng.random::<f64>() * (hi[1] - lo[1]),
        ];
        let angle = rng.random::<f64>() * std::f64::consts::TAU;
        let r = r_max * (1.0 - rng.random::<f64>());
        let z = [y[0] + r * angle.cos(), y[1] + r * angle.sin()];
        if !inside(y) || !inside(z) {
            continue;
        }
        let ratio = dist(map.forward(y)?, map.forward(z)?) / dist(y, z);
        lower = lower.min(ratio);
        upper = upper.max(ratio);
        taken += 1;
    }
    Ok(MetricEstimate {
        lower,
        upper,
        samples: n_samples,
        seed,
    })
}

/// Length of the image under `map` of a parameter polyline, by adaptive
/// quadrature of the directional derivative along each segment.
pub fn chart_curve_length(map: &ChartMap, polyline: &[Point]) -> Result<f64> {
    let mut total = 0.0;
    for w in polyline.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = dist(a, b);
        if len == 0.0 {
            continue;
        }
        let dir = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
        // surface chart errors after the quadrature, which cannot carry them
        let mut err = None;
        let v = adaptive(
            |t| match map.stretch(lerp(a, b, t), dir) {
                Ok(j) => j,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            },
            0.0,
            1.0,
            1e-13,
        );
        if let Some(e) = err {
            return Err(e);
        }
        total += v * len;
    }
    Ok(total)
}

/// Both sides of the area formula for the curve `polyline` and its image:
/// `lhs` integrates the formal Jacobian (norm of the directional derivative)
/// over the parameter curve, `rhs` is the length of the image polyline at the
/// same resolution. Every segment is cut into `panels` equal panels.
pub fn area_formula_check(map: &ChartMap, polyline: &[Point], panels: usize) -> Result<(f64, f64)> {
    let panels = panels.max(1);
    for &p in polyline {
        if !map.in_chart(p) {
            return Err(Error::OutsideChart(format!(
                "curve point ({}, {}) is outside the chart",
                p[0], p[1]
            )));
        }
    }
    let rule = gauss_legendre(8);
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for w in polyline.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = dist(a, b);
        if len == 0.0 {
            continue;
        }
        let dir = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
        let mut prev = map.forward(a)?;
        for i in 0..panels {
            let t0 = i as f64 / panels as f64;
            let t1 = (i + 1) as f64 / panels as f64;
            let mut err = None;
            lhs += len
                * integrate_gl(
                    |t| {
                        map.stretch(lerp(a, b, t), dir).unwrap_or_else(|e| {
                            err.get_or_insert(e);
                            0.0
                        })
                    },
                    t0,
                    t1,
                    &rule,
                );
            if let Some(e) = err {
                return Err(e);
            }
            let next = map.forward(lerp(a, b, t1))?;
            rhs += dist(prev, next);
            prev = next;
        }
    }
    Ok((lhs, rhs))
}

/// One-dimensional Hausdorff measure of the boundary: chart arclength of the
/// boundary edges of every chart patch, or polyline length for uncharted
/// domains.
pub fn boundary_measure(domain: &Domain) -> Result<f64> {
    if domain.charts.is_empty() {
        return Ok(domain.loops().map(|l| loop_length(l)).sum());
    }
    let mut total = 0.0;
    for patch in &domain.charts {
        let n = patch.region.len();
        for i in 0..n {
            if patch.boundary.get(i).copied().unwrap_or(true) {
                total += chart_curve_length(&patch.map, &[patch.region[i], patch.region[(i + 1) % n]])?;
            }
        }
    }
    Ok(total)
}

struct Segment {
    a: Point,
    b: Point,
}

impl RTreeObject for Segment {
    type Envelope = AABB<[f64; 2]>;
    fn envelope(&self) -> Self::Envelope {
        AABB::from_corners(self.a, self.b)
    }
}

/// Shortest-path graph approximating the interior metric of a meshed domain.
///
/// Besides mesh edges, every vertex is joined by a straight segment to each
/// vertex within `rings` edge hops whenever that segment stays in the closed
/// domain. Path lengths are upper bounds for the interior metric; the extra
/// chords remove the direction bias of pure edge paths on structured meshes.
pub struct MetricGraph {
    graph: UnGraph<(), f64>,
}

pub const DEFAULT_METRIC_RINGS: usize = 3;

impl MetricGraph {
    pub fn new(mesh: &Mesh, rings: usize) -> Self {
        let nv = mesh.vertices.len();
        let adj = mesh.vertex_neighbors();
        let segments: Vec<Segment> = mesh
            .boundary_edges
            .iter()
            .map(|e| Segment {
                a: mesh.vertices[e.v[0]],
                b: mesh.vertices[e.v[1]],
            })
            .collect();
        let tree = RTree::bulk_load(segments);
        let locator = Locator::new(mesh);
        let scale = mesh.max_edge_length().max(f64::MIN_POSITIVE);

        let mut graph = UnGraph::<(), f64>::with_capacity(nv, 0);
        for _ in 0..nv {
            graph.add_node(());
        }
        for e in mesh.edges() {
            graph.add_edge(
                NodeIndex::new(e[0]),
                NodeIndex::new(e[1]),
                dist(mesh.vertices[e[0]], mesh.vertices[e[1]]),
            );
        }
        if rings > 1 {
            let mut mark = vec![usize::MAX; nv];
            for v in 0..nv {
                let mut frontier = vec![v];
                mark[v] = v;
                let mut reach = Vec::new();
                for depth in 0..rings {
                    let mut next = Vec::new();
                    for &u in &frontier {
                        for &w in &adj[u] {
                            if mark[w] != v {
                                mark[w] = v;
                                next.push(w);
                                if depth > 0 {
                                    reach.push(w);
                                }
                            }
                        }
                    }
                    frontier = next;
                }
                for w in reach {
                    if w > v && visible(mesh, &tree, &locator, v, w, scale) {
                        graph.add_edge(
                            NodeIndex::new(v),
                            NodeIndex::new(w),
                            dist(mesh.vertices[v], mesh.vertices[w]),
                        );
                    }
                }
            }
        }
        MetricGraph { graph }
    }

    pub fn distance(&self, x: usize, y: usize) -> Result<f64> {
        let n = self.graph.node_count();
        if x >= n || y >= n {
            return Err(Error::Invalid(format!(
                "vertex id out of range ({x}, {y}; {n} vertices)"
            )));
        }
        let d = dijkstra(&self.graph, NodeIndex::new(x), Some(NodeIndex::new(y)), |e| *e.weight());
        d.get(&NodeIndex::new(y))
            .copied()
            .ok_or(Error::NoPath { from: x, to: y })
    }
}

fn visible(mesh: &Mesh, tree: &RTree<Segment>, locator: &Locator, v: usize, w: usize, scale: f64) -> bool {
    let (a, b) = (mesh.vertices[v], mesh.vertices[w]);
    let env = AABB::from_corners(a, b);
    for s in tree.locate_in_envelope_intersecting(env) {
        if segments_cross(a, b, s.a, s.b) {
            return false;
        }
    }
    // grazing a boundary vertex may leave the domain; such paths go through
    // the vertex itself instead
    let len = dist(a, b);
    for s in tree.locate_in_envelope_intersecting(env) {
        for p in [s.a, s.b] {
            if p == a || p == b {
                continue;
            }
            let t = ((p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])) / (len * len);
            if t > 0.0 && t < 1.0 && dist(p, lerp(a, b, t)) < 1e-9 * scale {
                return false;
            }
        }
    }
    locator.locate(lerp(a, b, 0.5), 1e-9 * scale).is_some()
}

/// Shortest-path distance between mesh vertices `x` and `y` with the default
/// chord rings.
pub fn interior_metric(mesh: &Mesh, x: usize, y: usize) -> Result<f64> {
    MetricGraph::new(mesh, DEFAULT_METRIC_RINGS).distance(x, y)
}
