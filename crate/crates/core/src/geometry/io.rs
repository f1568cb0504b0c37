//! Line-oriented text format for domains; see `docs/formats.md`.

use std::fmt::Write as _;

use super::{chart::ChartMap, ChartPatch, Domain, Family, Point};
use crate::error::{Error, Result};

pub fn write_domain(d: &Domain) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "domain {}", d.label);
    let _ = writeln!(out, "family {}", d.family.to_tokens());
    let mut push_loop = |kind: &str, l: &[Point]| {
        let _ = writeln!(out, "loop {kind} {}", l.len());
        for p in l {
            let _ = writeln!(out, "{:?} {:?}", p[0], p[1]);
        }
    };
    push_loop("outer", &d.outer);
    for h in &d.holes {
        push_loop("hole", h);
    }
    for c in &d.charts {
        let _ = writeln!(out, "chart {}", c.map.to_tokens());
        let _ = writeln!(out, "region {}", c.region.len());
        for (i, p) in c.region.iter().enumerate() {
            let b = c.boundary.get(i).copied().unwrap_or(true);
            let _ = writeln!(out, "{:?} {:?} {}", p[0], p[1], u8::from(b));
        }
    }
    out
}

pub fn read_domain(text: &str) -> Result<Domain> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let perr = |line: usize, msg: &str| Error::Parse { line, msg: msg.into() };
    let (ln, head) = lines.next().ok_or_else(|| perr(0, "empty input"))?;
    let label = head
        .strip_prefix("domain")
        .ok_or_else(|| perr(ln, "expected `domain <label>`"))?
        .trim();
    let mut d = Domain::polygon(label, Vec::new(), Vec::new());
    let mut have_outer = false;

    let read_points =
        |lines: &mut dyn Iterator<Item = (usize, &str)>, n: usize, flags: bool| -> Result<(Vec<Point>, Vec<bool>)> {
            let mut pts = Vec::with_capacity(n);
            let mut bs = Vec::new();
            for _ in 0..n {
                let (ln, l) = lines.next().ok_or_else(|| perr(0, "unexpected end of input"))?;
                let tok: Vec<&str> = l.split_whitespace().collect();
                let want = if flags { 3 } else { 2 };
                if tok.len() != want {
                    return Err(perr(ln, &format!("expected {want} fields")));
                }
                let x: f64 = tok[0].parse().map_err(|_| perr(ln, "bad number"))?;
                let y: f64 = tok[1].parse().map_err(|_| perr(ln, "bad number"))?;
                pts.push([x, y]);
                if flags {
                    bs.push(tok[2] != "0");
                }
            }
            Ok((pts, bs))
        };

    while let Some((ln, l)) = lines.next() {
        let tok: Vec<&str> = l.split_whitespace().collect();
        match tok.first().copied() {
            Some("family") => d.family = Family::from_tokens(&tok[1..]).map_err(|e| perr(ln, &e.to_string()))?,
            Some("loop") => {
                let n: usize = tok
                    .get(2)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| perr(ln, "expected `loop outer|hole <n>`"))?;
                let (pts, _) = read_points(&mut lines, n, false)?;
                match tok.get(1).copied() {
                    Some("outer") if !have_outer => {
                        d.outer = pts;
                        have_outer = true;
                    }
                    Some("outer") => return Err(perr(ln, "second outer loop")),
                    Some("hole") => d.holes.push(pts),
                    _ => return Err(perr(ln, "loop kind must be outer or hole")),
                }
            }
            Some("chart") => {
                let map = ChartMap::from_tokens(&mut tok[1..].iter().copied()).map_err(|e| perr(ln, &e.to_string()))?;
                let (ln2, l2) = lines.next().ok_or_else(|| perr(ln, "chart without region"))?;
                let n: usize = l2
                    .strip_prefix("region")
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| perr(ln2, "expected `region <n>`"))?;
                let (region, boundary) = read_points(&mut lines, n, true)?;
                d.charts.push(ChartPatch { map, region, boundary });
            }
            _ => return Err(perr(ln, &format!("unknown record {l:?}"))),
        }
    }
    if !have_outer {
        return Err(perr(0, "missing outer loop"));
    }
    Ok(d)
}
