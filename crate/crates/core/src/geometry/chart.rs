//! Explicit quasiisometric chart maps of the plane.
//!
//! The spiral chart sends the parameter point `(s, t)` to polar coordinates
//! `rho = s`, `theta = 2 pi ln(t / s^2)`. Its inverse is single valued only on
//! a wedge of parameter space; we pick the branch `1 <= t/s < e`, which
//! contains the triangle `s < t < 2s` the spiral domains are built from.

use std::f64::consts::{E, TAU};

use super::Point;
use crate::error::{Error, Result};

pub type Jacobian = [[f64; 2]; 2];

#[derive(Clone, Debug, PartialEq)]
pub enum ChartMap {
    Identity,
    /// `x -> k x`.
    Similarity(f64),
    Spiral,
    /// `x -> k * inner(k1 * x)`.
    Composite {
        k: f64,
        inner: Box<ChartMap>,
        k1: f64,
    },
}

impl ChartMap {
    pub fn kind(&self) -> &'static str {
        match self {
            ChartMap::Identity => "identity",
            ChartMap::Similarity(_) => "similarity",
            ChartMap::Spiral => "spiral",
            ChartMap::Composite { .. } => "composite",
        }
    }

    pub fn forward(&self, p: Point) -> Result<Point> {
        match self {
            ChartMap::Identity => Ok(p),
            ChartMap::Similarity(k) => Ok([k * p[0], k * p[1]]),
            ChartMap::Spiral => spiral_map(p),
            ChartMap::Composite { k, inner, k1 } => {
                let q = inner.forward([k1 * p[0], k1 * p[1]])?;
                Ok([k * q[0], k * q[1]])
            }
        }
    }

    pub fn inverse(&self, q: Point) -> Result<Point> {
        match self {
            ChartMap::Identity => Ok(q),
            ChartMap::Similarity(k) => Ok([q[0] / k, q[1] / k]),
            ChartMap::Spiral => spiral_map_inverse(q),
            ChartMap::Composite { k, inner, k1 } => {
                let p = inner.inverse([q[0] / k, q[1] / k])?;
                Ok([p[0] / k1, p[1] / k1])
            }
        }
    }

    /// Matrix of partials `d forward_i / d p_j`.
    pub fn jacobian(&self, p: Point) -> Result<Jacobian> {
        match self {
            ChartMap::Identity => Ok([[1.0, 0.0], [0.0, 1.0]]),
            ChartMap::Similarity(k) => Ok([[*k, 0.0], [0.0, *k]]),
            ChartMap::Spiral => spiral_jacobian(p),
            ChartMap::Composite { k, inner, k1 } => {
                let j = inner.jacobian([k1 * p[0], k1 * p[1]])?;
                let c = k * k1;
                Ok([[c * j[0][0], c * j[0][1]], [c * j[1][0], c * j[1][1]]])
            }
        }
    }

    /// Norm of the directional derivative along `dir`: the one-dimensional
    /// formal Jacobian of the chart restricted to a curve with tangent `dir`.
    pub fn stretch(&self, p: Point, dir: Point) -> Result<f64> {
        let j = self.jacobian(p)?;
        let a = j[0][0] * dir[0] + j[0][1] * dir[1];
        let b = j[1][0] * dir[0] + j[1][1] * dir[1];
        Ok(a.hypot(b))
    }

    /// Whether `p` lies where forward and inverse are mutually inverse.
    pub fn in_chart(&self, p: Point) -> bool {
        match self {
            ChartMap::Identity | ChartMap::Similarity(_) => p[0].is_finite() && p[1].is_finite(),
            ChartMap::Spiral => spiral_in_branch(p),
            ChartMap::Composite { inner, k1, .. } => inner.in_chart([k1 * p[0], k1 * p[1]]),
        }
    }

    /// Text form used by the domain file format: `identity`, `similarity <k>`,
    /// `spiral`, `composite <k> <k1> <inner...>`.
    pub fn to_tokens(&self) -> String {
        match self {
            ChartMap::Identity => "identity".into(),
            ChartMap::Similarity(k) => format!("similarity {k:?}"),
            ChartMap::Spiral => "spiral".into(),
            ChartMap::Composite { k, inner, k1 } => {
                format!("composite {k:?} {k1:?} {}", inner.to_tokens())
            }
        }
    }

    pub fn from_tokens<'a, I: Iterator<Item = &'a str>>(tokens: &mut I) -> Result<Self> {
        let bad = |m: &str| Error::Invalid(format!("chart: {m}"));
        let num = |tokens: &mut I| -> Result<f64> {
            tokens
                .next()
                .ok_or_else(|| bad("missing parameter"))?
                .parse::<f64>()
                .map_err(|e| bad(&e.to_string()))
        };
        match tokens.next() {
            Some("identity") => Ok(ChartMap::Identity),
            Some("similarity") => Ok(ChartMap::Similarity(num(tokens)?)),
            Some("spiral") => Ok(ChartMap::Spiral),
            Some("composite") => {
                let k = num(tokens)?;
                let k1 = num(tokens)?;
                let inner = Box::new(ChartMap::from_tokens(tokens)?);
                Ok(ChartMap::Composite { k, inner, k1 })
            }
            Some(other) => Err(bad(&format!("unknown kind {other}"))),
            None => Err(bad("missing kind")),
        }
    }
}

/// `S_k o map o S_k1`, i.e. `x -> k * map(k1 * x)`.
pub fn similarity_conjugate(map: &ChartMap, k: f64, k1: f64) -> ChartMap {
    ChartMap::Composite {
        k,
        inner: Box::new(map.clone()),
        k1,
    }
}

fn spiral_angle(p: Point) -> Result<f64> {
    let [s, t] = p;
    if !(s > 0.0) || !(t > 0.0) {
        return Err(Error::OutsideChart(format!(
            "spiral chart needs s>0, t>0, got ({s}, {t})"
        )));
    }
    Ok(TAU * (t / (s * s)).ln())
}

/// The spiral chart `(s, t) -> (s cos theta, s sin theta)`,
/// `theta = 2 pi ln(t / s^2)`.
pub fn spiral_map(p: Point) -> Result<Point> {
    let theta = spiral_angle(p)?;
    let (sin, cos) = theta.sin_cos();
    Ok([p[0] * cos, p[0] * sin])
}

fn spiral_in_branch(p: Point) -> bool {
    let [s, t] = p;
    s > 0.0 && t >= s && t < E * s
}

/// Inverse of [`spiral_map`] on the branch `1 <= t/s < e`:
/// `s = rho`, `t = rho^2 exp(theta / 2 pi)` with `theta` unwrapped so that
/// `theta - 2 pi ln(1/rho)` lies in `[0, 2 pi)`.
pub fn spiral_map_inverse(q: Point) -> Result<Point> {
    let rho = q[0].hypot(q[1]);
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::OutsideChart(format!(
            "spiral inverse undefined at ({}, {})",
            q[0], q[1]
        )));
    }
    let base = -TAU * rho.ln();
    let raw = q[1].atan2(q[0]);
    let mut offset = (raw - base).rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU
    if offset >= TAU {
        offset -= TAU;
    }
    // ln(t/s) = offset / 2pi, computed directly to keep relative precision
    let t = rho * (offset / TAU).exp();
    Ok([rho, t])
}

fn spiral_jacobian(p: Point) -> Result<Jacobian> {
    let theta = spiral_angle(p)?;
    let [s, t] = p;
    let (sin, cos) = theta.sin_cos();
    // theta_s = -4 pi / s, theta_t = 2 pi / t
    Ok([
        [cos + 2.0 * TAU * sin, -s * sin * TAU / t],
        [sin - 2.0 * TAU * cos, s * cos * TAU / t],
    ])
}

/// Parameter-space polygon of the band `T_n = {e^-(n+1) < s < e^-(n-1), s < t < 2s}`.
pub fn spiral_band_region(n: u32) -> Vec<Point> {
    let lo = (-(f64::from(n) + 1.0)).exp();
    let hi = (-(f64::from(n) - 1.0)).exp();
    vec![[lo, lo], [hi, hi], [hi, 2.0 * hi], [lo, 2.0 * lo]]
}
