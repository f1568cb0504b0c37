//! Text format `mesh <nv> <nt> <nbe> <axisym>` followed by vertex, triangle
//! and boundary-edge lines. Floats are written in shortest round-trip form,
//! so read and write are bit-exact inverses. Lines starting with `#` are
//! comments.

use std::fmt::Write as _;

use super::{BoundaryEdge, Mesh};
use crate::error::{Error, Result};

pub fn write_mesh(m: &Mesh) -> String {
    let mut out = String::with_capacity(48 * (m.vertices.len() + m.triangles.len()));
    let _ = writeln!(
        out,
        "mesh {} {} {} {}",
        m.vertices.len(),
        m.triangles.len(),
        m.boundary_edges.len(),
        u8::from(m.axisymmetric)
    );
    for p in &m.vertices {
        let _ = writeln!(out, "{:?} {:?}", p[0], p[1]);
    }
    for t in &m.triangles {
        let _ = writeln!(out, "{} {} {}", t[0], t[1], t[2]);
    }
    for e in &m.boundary_edges {
        let _ = writeln!(out, "{} {} {}", e.v[0], e.v[1], e.marker);
    }
    out
}

pub fn read_mesh(text: &str) -> Result<Mesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let perr = |line: usize, msg: &str| Error::Parse { line, msg: msg.into() };
    let (ln, head) = lines.next().ok_or_else(|| perr(0, "empty input"))?;
    let h: Vec<&str> = head.split_whitespace().collect();
    if h.len() != 5 || h[0] != "mesh" {
        return Err(perr(ln, "expected `mesh <nv> <nt> <nbe> <axisym>`"));
    }
    let num = |s: &str, ln: usize| s.parse::<usize>().map_err(|_| perr(ln, &format!("bad integer {s:?}")));
    let (nv, nt, nb) = (num(h[1], ln)?, num(h[2], ln)?, num(h[3], ln)?);
    let axisymmetric = match h[4] {
        "0" => false,
        "1" => true,
        _ => return Err(perr(ln, "axisym flag must be 0 or 1")),
    };
    let mut next = |want: usize| -> Result<(usize, Vec<&str>)> {
        let (ln, l) = lines.next().ok_or_else(|| perr(0, "unexpected end of input"))?;
        let tok: Vec<&str> = l.split_whitespace().collect();
        if tok.len() != want {
            return Err(perr(ln, &format!("expected {want} fields")));
        }
        Ok((ln, tok))
    };
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, t) = next(2)?;
        let f = |s: &str| s.parse::<f64>().map_err(|_| perr(ln, &format!("bad number {s:?}")));
        vertices.push([f(t[0])?, f(t[1])?]);
    }
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (ln, t) = next(3)?;
        let tri = [num(t[0], ln)?, num(t[1], ln)?, num(t[2], ln)?];
        if tri.iter().any(|&v| v >= nv) {
            return Err(perr(ln, "vertex id out of range"));
        }
        triangles.push(tri);
    }
    let mut edges = Vec::with_capacity(nb);
    for _ in 0..nb {
        let (ln, t) = next(3)?;
        let v = [num(t[0], ln)?, num(t[1], ln)?];
        if v.iter().any(|&x| x >= nv) {
            return Err(perr(ln, "vertex id out of range"));
        }
        let marker = t[2].parse::<u32>().map_err(|_| perr(ln, "bad marker"))?;
        edges.push(BoundaryEdge { v, marker });
    }
    Ok(Mesh::new(vertices, triangles, edges, axisymmetric))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_spiral;
    use crate::mesh::{refine, triangulate};

    #[test]
    fn roundtrip_bit_exact() {
        let m = refine(&triangulate(&build_spiral(3).unwrap(), 0.5).unwrap());
        let text = write_mesh(&m);
        let back = read_mesh(&text).unwrap();
        assert_eq!(back.triangles, m.triangles);
        assert_eq!(back.boundary_edges, m.boundary_edges);
        for (a, b) in back.vertices.iter().zip(&m.vertices) {
            assert_eq!(a[0].to_bits(), b[0].to_bits());
            assert_eq!(a[1].to_bits(), b[1].to_bits());
        }
        assert_eq!(write_mesh(&back), text);
    }

    #[test]
    fn rejects_bad_ids() {
        let err = read_mesh("mesh 3 1 0 0\n0 0\n1 0\n0 1\n0 1 7\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 5, .. }));
    }
}
