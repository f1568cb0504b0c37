//! Rough planar domains, their chart maps and metric estimates.

pub mod chart;
pub mod io;
pub mod metric;

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use chart::{similarity_conjugate, spiral_band_region, spiral_map, spiral_map_inverse, ChartMap};
pub use metric::{
    area_formula_check, boundary_measure, chart_curve_length, estimate_quasiisometry, interior_metric, MetricEstimate,
    MetricGraph,
};

pub type Point = [f64; 2];

pub const RECT_UNION_MAX_K: u32 = 12;
pub const SPIRAL_MAX_N: u32 = 20;

#[inline]
pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub(crate) fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

#[inline]
pub(crate) fn lerp(a: Point, b: Point, t: f64) -> Point {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

/// Shoelace area; positive for counterclockwise loops.
pub fn polygon_signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    let mut a = 0.0;
    for i in 0..n {
        a += cross(poly[i], poly[(i + 1) % n]);
    }
    0.5 * a
}

/// Perimeter of a closed polyline.
pub fn loop_length(poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| dist(poly[i], poly[(i + 1) % n])).sum()
}

/// Winding number of a closed polyline around `p` (zero on the curve is not
/// distinguished; use [`on_polyline`] for that).
pub fn winding_number(p: Point, poly: &[Point]) -> i32 {
    let n = poly.len();
    let mut w = 0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let side = cross(sub(b, a), sub(p, a));
        if a[1] <= p[1] {
            if b[1] > p[1] && side > 0.0 {
                w += 1;
            }
        } else if b[1] <= p[1] && side < 0.0 {
            w -= 1;
        }
    }
    w
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let d = sub(b, a);
    let len2 = d[0] * d[0] + d[1] * d[1];
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = ((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2;
    dist(p, lerp(a, b, t.clamp(0.0, 1.0)))
}

pub fn on_polyline(p: Point, poly: &[Point], tol: f64) -> bool {
    let n = poly.len();
    (0..n).any(|i| point_segment_distance(p, poly[i], poly[(i + 1) % n]) <= tol)
}

/// True when the open segments `ab` and `cd` cross at a single interior point
/// of both. Touching at endpoints and collinear overlap are reported by
/// [`segments_overlap`] instead.
pub fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = cross(sub(b, a), sub(c, a));
    let d2 = cross(sub(b, a), sub(d, a));
    let d3 = cross(sub(d, c), sub(a, c));
    let d4 = cross(sub(d, c), sub(b, c));
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Collinear segments sharing more than a point.
pub fn segments_overlap(a: Point, b: Point, c: Point, d: Point) -> bool {
    let ab = sub(b, a);
    let scale = ab[0].abs().max(ab[1].abs()).max(1e-300);
    let tol = 1e-12 * scale * scale;
    if cross(ab, sub(c, a)).abs() > tol || cross(ab, sub(d, a)).abs() > tol {
        return false;
    }
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = |p: Point| ((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2;
    let (t0, t1) = {
        let (x, y) = (t(c), t(d));
        (x.min(y), x.max(y))
    };
    t1.min(1.0) - t0.max(0.0) > 1e-12
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RectUnionPart {
    Whole,
    /// `S` together with the rectangles `P_k`.
    Rectangles,
    /// The wedge `V` alone.
    Wedge,
}

/// Recipe the mesher uses for a domain. `Polygon` falls back to a
/// constrained Delaunay triangulation of the loops.
#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    Rectangle {
        min: Point,
        max: Point,
    },
    LShape,
    Disk {
        center: Point,
        radius: f64,
    },
    Annulus {
        center: Point,
        inner: f64,
        outer: f64,
    },
    /// Meridian section `{r >= 0, r^2 + z^2 < R^2}` of a ball.
    HalfDisk {
        radius: f64,
    },
    RectUnion {
        k_max: u32,
        part: RectUnionPart,
    },
    Spiral {
        n_max: u32,
    },
    Polygon,
}

impl Family {
    pub fn to_tokens(&self) -> String {
        match self {
            Family::Rectangle { min, max } => {
                format!("rectangle {:?} {:?} {:?} {:?}", min[0], min[1], max[0], max[1])
            }
            Family::LShape => "l_shape".into(),
            Family::Disk { center, radius } => format!("disk {:?} {:?} {radius:?}", center[0], center[1]),
            Family::Annulus { center, inner, outer } => {
                format!("annulus {:?} {:?} {inner:?} {outer:?}", center[0], center[1])
            }
            Family::HalfDisk { radius } => format!("half_disk {radius:?}"),
            Family::RectUnion { k_max, part } => {
                let p = match part {
                    RectUnionPart::Whole => "whole",
                    RectUnionPart::Rectangles => "rectangles",
                    RectUnionPart::Wedge => "wedge",
                };
                format!("rect_union {k_max} {p}")
            }
            Family::Spiral { n_max } => format!("spiral {n_max}"),
            Family::Polygon => "polygon".into(),
        }
    }

    pub fn from_tokens(tokens: &[&str]) -> Result<Self> {
        let bad = || Error::Invalid(format!("family: cannot parse {:?}", tokens.join(" ")));
        let f = |i: usize| -> Result<f64> { tokens.get(i).ok_or_else(bad)?.parse().map_err(|_| bad()) };
        let u = |i: usize| -> Result<u32> { tokens.get(i).ok_or_else(bad)?.parse().map_err(|_| bad()) };
        Ok(match tokens.first().copied() {
            Some("rectangle") => Family::Rectangle {
                min: [f(1)?, f(2)?],
                max: [f(3)?, f(4)?],
            },
            Some("l_shape") => Family::LShape,
            Some("disk") => Family::Disk {
                center: [f(1)?, f(2)?],
                radius: f(3)?,
            },
            Some("annulus") => Family::Annulus {
                center: [f(1)?, f(2)?],
                inner: f(3)?,
                outer: f(4)?,
            },
            Some("half_disk") => Family::HalfDisk { radius: f(1)? },
            Some("rect_union") => {
                let part = match tokens.get(2).copied() {
                    Some("whole") | None => RectUnionPart::Whole,
                    Some("rectangles") => RectUnionPart::Rectangles,
                    Some("wedge") => RectUnionPart::Wedge,
                    _ => return Err(bad()),
                };
                Family::RectUnion { k_max: u(1)?, part }
            }
            Some("spiral") => Family::Spiral { n_max: u(1)? },
            Some("polygon") => Family::Polygon,
            _ => return Err(bad()),
        })
    }
}

/// A chart together with the parameter polygon it is applied to. `boundary[i]`
/// marks whether the image of region edge `i -> i+1` is part of the domain
/// boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartPatch {
    pub map: ChartMap,
    pub region: Vec<Point>,
    pub boundary: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    pub label: String,
    /// Counterclockwise.
    pub outer: Vec<Point>,
    /// Clockwise.
    pub holes: Vec<Vec<Point>>,
    pub charts: Vec<ChartPatch>,
    pub family: Family,
}

impl Domain {
    pub fn polygon(label: &str, outer: Vec<Point>, holes: Vec<Vec<Point>>) -> Self {
        Domain {
            label: label.into(),
            outer,
            holes,
            charts: Vec::new(),
            family: Family::Polygon,
        }
    }

    pub fn loop_count(&self) -> usize {
        1 + self.holes.len()
    }

    pub fn loops(&self) -> impl Iterator<Item = &Vec<Point>> {
        std::iter::once(&self.outer).chain(self.holes.iter())
    }

    pub fn area(&self) -> f64 {
        self.loops().map(|l| polygon_signed_area(l)).sum()
    }

    pub fn contains(&self, p: Point) -> bool {
        self.loops().map(|l| winding_number(p, l)).sum::<i32>() > 0
    }

    pub fn bbox(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in self.loops().flatten() {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        (lo, hi)
    }

    /// Structural checks of the loop invariants. Loops may touch each other or
    /// themselves at isolated vertices (the rectangle union pinches at the
    /// origin); proper crossings and overlapping edges are violations.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.outer.len() < 3 {
            out.push("outer loop has fewer than 3 vertices".into());
            return out;
        }
        if polygon_signed_area(&self.outer) <= 0.0 {
            out.push("outer loop is not counterclockwise".into());
        }
        for (k, h) in self.holes.iter().enumerate() {
            if h.len() < 3 {
                out.push(format!("hole {} has fewer than 3 vertices", k + 1));
                continue;
            }
            if polygon_signed_area(h) >= 0.0 {
                out.push(format!("hole {} is not clockwise", k + 1));
            }
            let tol = 1e-12 * (1.0 + loop_length(&self.outer));
            for &p in h {
                if winding_number(p, &self.outer) != 1 || on_polyline(p, &self.outer, tol) {
                    out.push(format!("hole {} leaves the outer loop at ({}, {})", k + 1, p[0], p[1]));
                    break;
                }
            }
        }
        let edges: Vec<(usize, Point, Point)> = self
            .loops()
            .enumerate()
            .flat_map(|(li, l)| (0..l.len()).map(move |i| (li, l[i], l[(i + 1) % l.len()])))
            .collect();
        for i in 0..edges.len() {
            for j in i + 1..edges.len() {
                let (li, a, b) = edges[i];
                let (lj, c, d) = edges[j];
                if segments_cross(a, b, c, d) || segments_overlap(a, b, c, d) {
                    out.push(format!("loops {li} and {lj} intersect near ({}, {})", a[0], a[1]));
                }
            }
        }
        out
    }

    /// Outer loop with zero-width excursions removed: the loop is split at
    /// repeated vertices and only counterclockwise pieces are kept.
    pub fn filled_outer_pieces(&self) -> Vec<Vec<Point>> {
        split_at_repeats(&self.outer)
            .into_iter()
            .filter(|l| polygon_signed_area(l) > 0.0)
            .collect()
    }

    /// Image under `(x1, x2) -> (x2 + r_offset, x1)`, the placement of a planar
    /// cross-section in the meridian half-plane of an axisymmetric body. The
    /// map reverses orientation, so loops are reversed.
    pub fn rotated_meridian(&self, r_offset: f64) -> Domain {
        let map = |l: &Vec<Point>| {
            let mut v: Vec<Point> = l.iter().map(|p| [p[1] + r_offset, p[0]]).collect();
            v.reverse();
            v
        };
        Domain {
            label: format!("{}-meridian", self.label),
            outer: map(&self.outer),
            holes: self.holes.iter().map(map).collect(),
            charts: Vec::new(),
            family: Family::Polygon,
        }
    }
}

fn split_at_repeats(l: &[Point]) -> Vec<Vec<Point>> {
    let mut out = Vec::new();
    let mut stack: Vec<Point> = Vec::new();
    for &p in l {
        if let Some(pos) = stack.iter().position(|&q| q == p) {
            let piece: Vec<Point> = stack.drain(pos..).collect();
            if piece.len() >= 3 {
                out.push(piece);
            }
        }
        stack.push(p);
    }
    if stack.len() >= 3 {
        out.push(stack);
    }
    out
}

pub fn rectangle(min: Point, max: Point) -> Domain {
    Domain {
        label: "rectangle".into(),
        outer: vec![min, [max[0], min[1]], max, [min[0], max[1]]],
        holes: Vec::new(),
        charts: Vec::new(),
        family: Family::Rectangle { min, max },
    }
}

pub fn unit_square() -> Domain {
    let mut d = rectangle([0.0, 0.0], [1.0, 1.0]);
    d.label = "square".into();
    d
}

/// `(0,1)^2` minus `[0.5,1] x [0.5,1]`.
pub fn l_shape() -> Domain {
    Domain {
        label: "l_shape".into(),
        outer: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 0.5], [0.5, 0.5], [0.5, 1.0], [0.0, 1.0]],
        holes: Vec::new(),
        charts: Vec::new(),
        family: Family::LShape,
    }
}

fn circle_points(center: Point, r: f64, n: usize, ccw: bool) -> Vec<Point> {
    (0..n)
        .map(|i| {
            let a = TAU * i as f64 / n as f64;
            let a = if ccw { a } else { -a };
            [center[0] + r * a.cos(), center[1] + r * a.sin()]
        })
        .collect()
}

/// Disk with its boundary sampled by `n` points.
pub fn disk(center: Point, radius: f64, n: usize) -> Domain {
    Domain {
        label: "disk".into(),
        outer: circle_points(center, radius, n.max(3), true),
        holes: Vec::new(),
        charts: Vec::new(),
        family: Family::Disk { center, radius },
    }
}

pub fn unit_disk() -> Domain {
    disk([0.0, 0.0], 1.0, 192)
}

pub fn annulus(center: Point, inner: f64, outer: f64, n: usize) -> Domain {
    Domain {
        label: "annulus".into(),
        outer: circle_points(center, outer, n.max(3), true),
        holes: vec![circle_points(center, inner, n.max(3), false)],
        charts: Vec::new(),
        family: Family::Annulus { center, inner, outer },
    }
}

/// Meridian half-disk `{r >= 0, r^2 + z^2 <= R^2}` in `(r, z)` coordinates.
pub fn half_disk(radius: f64, n: usize) -> Domain {
    let n = n.max(2);
    let outer = (0..=n)
        .map(|i| {
            let a = -0.5 * PI + PI * i as f64 / n as f64;
            [radius * a.cos().max(0.0), radius * a.sin()]
        })
        .collect();
    Domain {
        label: "half_disk".into(),
        outer,
        holes: Vec::new(),
        charts: Vec::new(),
        family: Family::HalfDisk { radius },
    }
}

/// Extents `(x1_min, x1_max, x2_max)` of the rectangles `P_1..P_k_max`,
/// `P_k = {|x1 - 2^-k| < 2^(-k-2), 0 <= x2 < 2^(-k-2)}`.
pub fn rect_union_rectangles(k_max: u32) -> Vec<(f64, f64, f64)> {
    (1..=k_max)
        .map(|k| {
            let c = 0.5f64.powi(k as i32);
            (0.75 * c, 1.25 * c, 0.25 * c)
        })
        .collect()
}

pub fn build_rect_union(k_max: u32) -> Result<Domain> {
    build_rect_union_part(k_max, RectUnionPart::Whole)
}

/// The rectangle union `S u V u P_1 u ... u P_k_max`, or one of the two pieces
/// it is assembled from. Every vertex lies on an axis-parallel line through a
/// rectangle side or on `x2 = x1/10`, so coordinates are exact dyadic
/// fractions up to the final division by ten.
pub fn build_rect_union_part(k_max: u32, part: RectUnionPart) -> Result<Domain> {
    if k_max > RECT_UNION_MAX_K {
        return Err(Error::TruncationLimit {
            what: "k_max",
            value: k_max as usize,
            max: RECT_UNION_MAX_K as usize,
        });
    }
    let rects = rect_union_rectangles(k_max);
    let wedge = |x: f64| x / 10.0;
    let (outer, holes, label) = match part {
        RectUnionPart::Wedge => (
            vec![[0.0, 0.0], [1.0, 0.1], [1.0, 1.0], [0.0, 1.0]],
            Vec::new(),
            "rect_union_wedge",
        ),
        RectUnionPart::Rectangles => {
            let mut o = vec![[0.0, -1.0], [1.0, -1.0], [1.0, 0.0]];
            for &(l, r, top) in &rects {
                o.extend([[r, 0.0], [r, top], [l, top], [l, 0.0]]);
            }
            o.push([0.0, 0.0]);
            (o, Vec::new(), "rect_union_rectangles")
        }
        RectUnionPart::Whole => {
            let mut o = vec![[0.0, -1.0], [1.0, -1.0], [1.0, 0.0]];
            if let (Some(&(_, r1, _)), Some(&(lk, _, _))) = (rects.first(), rects.last()) {
                o.extend([
                    [r1, 0.0],
                    [r1, wedge(r1)],
                    [1.0, 0.1],
                    [1.0, 1.0],
                    [0.0, 1.0],
                    [0.0, 0.0],
                ]);
                o.extend([[lk, wedge(lk)], [lk, 0.0], [0.0, 0.0]]);
            } else {
                o.extend([[0.0, 0.0], [1.0, 0.1], [1.0, 1.0], [0.0, 1.0], [0.0, 0.0]]);
            }
            // gaps between P_(k+1) and P_k below the wedge line, traversed clockwise
            let holes = rects
                .windows(2)
                .map(|w| {
                    let b = w[0].0;
                    let a = w[1].1;
                    vec![[a, 0.0], [a, wedge(a)], [b, wedge(b)], [b, 0.0]]
                })
                .collect();
            (o, holes, "rect_union")
        }
    };
    Ok(Domain {
        label: format!("{label}_k{k_max}"),
        outer,
        holes,
        charts: Vec::new(),
        family: Family::RectUnion { k_max, part },
    })
}

/// Closed-form bound `len(d(S u V)) + sum_k perimeter(P_k)` on the boundary
/// length of every truncation.
pub fn rect_union_length_bound() -> f64 {
    let sv = 4.0 + 2.0 + 1.0 + 0.9 + 1.01f64.sqrt();
    // perimeter(P_k) = 2 * (2^-k-1 + 2^-k-2) = 3 * 2^(-k-1), summed over k >= 1
    sv + 1.5
}

/// Sample count per unit of `log` parameter used for the polygonal outline of
/// the spiral domain.
const SPIRAL_SAMPLES_PER_BAND: usize = 48;

/// Spiral domain `phi(T n {s > e^-n_max})`, `T = {0 < s < 1, s < t < 2s}`.
pub fn build_spiral(n_max: u32) -> Result<Domain> {
    if n_max == 0 || n_max > SPIRAL_MAX_N {
        return Err(Error::TruncationLimit {
            what: "n_max",
            value: n_max as usize,
            max: SPIRAL_MAX_N as usize,
        });
    }
    let s0 = (-f64::from(n_max)).exp();
    let region = vec![[s0, s0], [1.0, 1.0], [1.0, 2.0], [s0, 2.0 * s0]];
    let m = SPIRAL_SAMPLES_PER_BAND * n_max as usize;
    let m_arc = SPIRAL_SAMPLES_PER_BAND;
    let mut param = Vec::with_capacity(2 * m + 2 * m_arc);
    // ray t = s outward, geometric in s
    for i in 0..m {
        let s = (-f64::from(n_max) * (1.0 - i as f64 / m as f64)).exp();
        param.push([s, s]);
    }
    // arc s = 1
    for i in 0..m_arc {
        param.push([1.0, 1.0 + i as f64 / m_arc as f64]);
    }
    // ray t = 2s inward
    for i in 0..m {
        let s = (-f64::from(n_max) * i as f64 / m as f64).exp();
        param.push([s, 2.0 * s]);
    }
    // inner cut s = s0
    for i in 0..m_arc {
        param.push([s0, s0 * (2.0 - i as f64 / m_arc as f64)]);
    }
    let outer = param.iter().map(|&p| spiral_map(p)).collect::<Result<Vec<_>>>()?;
    Ok(Domain {
        label: format!("spiral_n{n_max}"),
        outer,
        holes: Vec::new(),
        charts: vec![ChartPatch {
            map: ChartMap::Spiral,
            region,
            boundary: vec![true; 4],
        }],
        family: Family::Spiral { n_max },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polygon_helpers() {
        let sq = unit_square();
        assert_eq!(polygon_signed_area(&sq.outer), 1.0);
        assert_eq!(loop_length(&sq.outer), 4.0);
        assert!(sq.contains([0.5, 0.5]));
        assert!(!sq.contains([1.5, 0.5]));
        assert!(segments_cross([0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]));
        assert!(!segments_cross([0.0, 0.0], [1.0, 1.0], [1.0, 1.0], [2.0, 0.0]));
        assert!(segments_overlap([0.0, 0.0], [2.0, 0.0], [1.0, 0.0], [3.0, 0.0]));
        assert!(!segments_overlap([0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [3.0, 0.0]));
    }

    #[test]
    fn builtins_validate() {
        for d in [
            unit_square(),
            l_shape(),
            unit_disk(),
            annulus([0.0, 0.0], 0.5, 1.0, 64),
            half_disk(1.0, 32),
        ] {
            assert!(d.validate().is_empty(), "{}: {:?}", d.label, d.validate());
        }
        assert!((l_shape().area() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn rect_union_first_rectangle() {
        let r = rect_union_rectangles(1);
        assert_eq!(r, vec![(0.375, 0.625, 0.125)]);
        let d = build_rect_union(1).unwrap();
        assert!(d.contains([0.5, 0.01]));
        assert!(d.contains([0.38, 0.03]));
        assert!(!d.contains([0.7, 0.01]));
        assert!(!d.contains([0.3, 0.01]));
    }

    #[test]
    fn rect_union_loops_and_validity() {
        for k in 0..=RECT_UNION_MAX_K {
            let d = build_rect_union(k).unwrap();
            assert!(d.validate().is_empty(), "k={k}: {:?}", d.validate());
            assert_eq!(d.holes.len(), (k as usize).saturating_sub(1));
            for part in [RectUnionPart::Rectangles, RectUnionPart::Wedge] {
                let p = build_rect_union_part(k, part).unwrap();
                assert!(p.validate().is_empty(), "k={k} {part:?}: {:?}", p.validate());
            }
        }
        assert!(matches!(build_rect_union(13), Err(Error::TruncationLimit { .. })));
    }

    #[test]
    fn rect_union_area_matches_pieces() {
        for k in 0..=8u32 {
            let d = build_rect_union(k).unwrap();
            let mut expect = 1.0 + 0.95;
            for (l, r, _) in rect_union_rectangles(k) {
                expect += 0.5 * (l + r) / 10.0 * (r - l);
            }
            assert!((d.area() - expect).abs() < 1e-14, "k={k}: {} vs {expect}", d.area());
        }
    }

    #[test]
    fn rect_union_pixel_oracle() {
        // membership straight from the set definitions
        let member = |x: f64, y: f64| {
            let in_s = x > 0.0 && x < 1.0 && y > -1.0 && y < 0.0;
            let in_v = x > 0.0 && x < 1.0 && x / 10.0 <= y && y < 1.0;
            let in_p = (1..=3).any(|k| {
                let c = 0.5f64.powi(k);
                (x - c).abs() < 0.25 * c && (0.0..0.25 * c).contains(&y)
            });
            in_s || in_v || in_p
        };
        let d = build_rect_union(3).unwrap();
        let n = 400;
        let mut bad = 0;
        for i in 0..n {
            for j in 0..2 * n {
                let x = (i as f64 + 0.37) / n as f64;
                let y = -1.0 + (j as f64 + 0.61) / n as f64;
                if member(x, y) != d.contains([x, y]) {
                    bad += 1;
                }
            }
        }
        assert_eq!(bad, 0);
    }

    /// Connected components of a boolean pixel grid (4-neighbour).
    fn pixel_components(grid: &[Vec<bool>], value: bool) -> Vec<Vec<(usize, usize)>> {
        let (n, m) = (grid.len(), grid[0].len());
        let mut seen = vec![vec![false; m]; n];
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..m {
                if grid[i][j] != value || seen[i][j] {
                    continue;
                }
                let mut comp = vec![(i, j)];
                let mut stack = vec![(i, j)];
                seen[i][j] = true;
                while let Some((a, b)) = stack.pop() {
                    let nb = [(a.wrapping_sub(1), b), (a + 1, b), (a, b.wrapping_sub(1)), (a, b + 1)];
                    for (x, y) in nb {
                        if x < n && y < m && grid[x][y] == value && !seen[x][y] {
                            seen[x][y] = true;
                            stack.push((x, y));
                            comp.push((x, y));
                        }
                    }
                }
                out.push(comp);
            }
        }
        out
    }

    #[test]
    fn rect_union_without_rectangles_pixel_oracle() {
        // S and V meet only at the origin, which a pixel grid cannot resolve:
        // it sees one simply connected region
        let d = build_rect_union(0).unwrap();
        assert!(d.holes.is_empty());
        let n = 200;
        let grid: Vec<Vec<bool>> = (0..n + 2)
            .map(|i| {
                (0..2 * n + 2)
                    .map(|j| {
                        let p = [(i as f64 - 0.5) / n as f64, -1.0 + (j as f64 - 0.5) / n as f64];
                        d.contains(p)
                    })
                    .collect()
            })
            .collect();
        assert_eq!(pixel_components(&grid, true).len(), 1);
        // every background component touches the frame, so there are no holes
        let frame = |&(i, j): &(usize, usize)| i == 0 || j == 0 || i == n + 1 || j == 2 * n + 1;
        assert!(pixel_components(&grid, false).iter().all(|c| c.iter().any(frame)));
        let area = grid.iter().flatten().filter(|&&b| b).count() as f64 / (n * n) as f64;
        assert!((area - d.area()).abs() < 0.02);
    }

    #[test]
    fn filled_outer_drops_notch() {
        let d = build_rect_union(3).unwrap();
        let pieces = d.filled_outer_pieces();
        assert_eq!(pieces.len(), 1);
        assert!(polygon_signed_area(&pieces[0]) > d.area());
    }

    #[test]
    fn spiral_domain_outline() {
        let d = build_spiral(3).unwrap();
        assert!(d.validate().is_empty(), "{:?}", d.validate());
        assert!(d.area() > 0.0);
        assert!(build_spiral(0).is_err());
        assert!(build_spiral(21).is_err());
        // the common band T_1 image is the same for n_max = 1 and 2
        let a = build_spiral(1).unwrap();
        let b = build_spiral(2).unwrap();
        for p in [[0.8, 1.2], [0.5, 0.7], [0.4, 0.6]] {
            let q = spiral_map(p).unwrap();
            assert!(a.contains(q) && b.contains(q));
        }
    }

    #[test]
    fn meridian_rotation_keeps_orientation() {
        let d = build_rect_union(2).unwrap().rotated_meridian(1.5);
        assert!(d.validate().is_empty(), "{:?}", d.validate());
        assert!((d.area() - build_rect_union(2).unwrap().area()).abs() < 1e-14);
        assert!(d.bbox().0[0] >= 0.5);
    }
}
