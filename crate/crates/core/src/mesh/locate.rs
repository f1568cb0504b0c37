use rstar::primitives::{GeomWithData, Rectangle};
use rstar::{RTree, AABB};

use super::Mesh;
use crate::geometry::Point;

type Entry = GeomWithData<Rectangle<[f64; 2]>, usize>;

/// Point location in a mesh through an R-tree over triangle bounding boxes.
pub struct Locator {
    tree: RTree<Entry>,
    tris: Vec<[Point; 3]>,
}

impl Locator {
    pub fn new(mesh: &Mesh) -> Self {
        let tris: Vec<[Point; 3]> = mesh.triangles.iter().map(|t| t.map(|v| mesh.vertices[v])).collect();
        let entries = tris
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let lo = [p[0][0].min(p[1][0]).min(p[2][0]), p[0][1].min(p[1][1]).min(p[2][1])];
                let hi = [p[0][0].max(p[1][0]).max(p[2][0]), p[0][1].max(p[1][1]).max(p[2][1])];
                GeomWithData::new(Rectangle::from_corners(lo, hi), i)
            })
            .collect();
        Locator {
            tree: RTree::bulk_load(entries),
            tris,
        }
    }

    /// Triangle containing `p` (within `tol`) and its barycentric
    /// coordinates. Among several candidates the one with the largest minimum
    /// coordinate wins, so results do not depend on tree order.
    pub fn locate(&self, p: Point, tol: f64) -> Option<(usize, [f64; 3])> {
        let env = AABB::from_corners([p[0] - tol, p[1] - tol], [p[0] + tol, p[1] + tol]);
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for e in self.tree.locate_in_envelope_intersecting(env) {
            let t = e.data;
            let [a, b, c] = self.tris[t];
            let det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
            if det == 0.0 {
                continue;
            }
            let l1 = ((p[0] - a[0]) * (c[1] - a[1]) - (p[1] - a[1]) * (c[0] - a[0])) / det;
            let l2 = ((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])) / det;
            let lam = [1.0 - l1 - l2, l1, l2];
            let worst = lam[0].min(lam[1]).min(lam[2]);
            // barycentric slack equivalent to a distance `tol`
            let scale = (b[0] - a[0]).hypot(b[1] - a[1]).max((c[0] - a[0]).hypot(c[1] - a[1]));
            let slack = tol * scale / det.abs().max(f64::MIN_POSITIVE);
            if worst >= -slack - 1e-12 {
                let better = match best {
                    None => true,
                    Some((bt, _, bw)) => worst > bw || (worst == bw && t < bt),
                };
                if better {
                    best = Some((t, lam, worst));
                }
            }
        }
        best.map(|(t, l, _)| (t, l))
    }

    /// Linear interpolation of nodal values at `p`.
    pub fn interpolate<T>(&self, mesh: &Mesh, values: &[T], p: Point, tol: f64) -> Option<T>
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
    {
        let (t, l) = self.locate(p, tol)?;
        let [a, b, c] = mesh.triangles[t];
        Some(values[a] * l[0] + values[b] * l[1] + values[c] * l[2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::unit_square;
    use crate::mesh::triangulate;

    #[test]
    fn locates_and_interpolates_linear_fields() {
        let m = triangulate(&unit_square(), 0.1).unwrap();
        let loc = Locator::new(&m);
        let f: Vec<f64> = m.vertices.iter().map(|p| 2.0 * p[0] - 3.0 * p[1] + 1.0).collect();
        for p in [[0.123, 0.456], [0.0, 0.0], [1.0, 0.5], [0.999, 0.999]] {
            let v = loc.interpolate(&m, &f, p, 1e-12).unwrap();
            assert!((v - (2.0 * p[0] - 3.0 * p[1] + 1.0)).abs() < 1e-12);
        }
        assert!(loc.locate([1.1, 0.5], 1e-12).is_none());
    }
}
