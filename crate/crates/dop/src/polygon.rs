//! Newton-Ramis polygons and local Newton polygons.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact::{rat, Point, Rational};
use crate::weyl::DiffOp;

pub type Pt = (i64, i64);

/// Sorted descending, equal slopes merged.
pub fn slope_multiset(raw: impl IntoIterator<Item = (Rational, u64)>) -> Vec<(Rational, u64)> {
    let mut m: BTreeMap<Rational, u64> = BTreeMap::new();
    for (s, k) in raw {
        if k > 0 {
            *m.entry(s).or_default() += k;
        }
    }
    m.into_iter().rev().collect()
}

fn cross(o: Pt, a: Pt, b: Pt) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Upper hull of points sorted by strictly increasing first coordinate.
fn upper_hull(pts: &[Pt]) -> Vec<Pt> {
    let mut h: Vec<Pt> = vec![];
    for &p in pts {
        while h.len() >= 2 && cross(h[h.len() - 2], h[h.len() - 1], p) >= 0 {
            h.pop();
        }
        h.push(p);
    }
    h
}

/// Lower hull of points sorted by strictly increasing first coordinate.
fn lower_hull(pts: &[Pt]) -> Vec<Pt> {
    let mut h: Vec<Pt> = vec![];
    for &p in pts {
        while h.len() >= 2 && cross(h[h.len() - 2], h[h.len() - 1], p) <= 0 {
            h.pop();
        }
        h.push(p);
    }
    h
}

/// Convex hull of the half-lines `{u <= i, v = j - i}`, stored by its finite
/// support and right boundary.
#[derive(Clone, Debug)]
pub struct NRPolygon {
    pub support: Vec<Pt>,
    /// Right-boundary vertices, top to bottom.
    pub vertices: Vec<Pt>,
    /// Finite slopes `dv/du` of right-boundary edges, multiplicity `|du|`.
    pub slopes: Vec<(Rational, u64)>,
}

impl PartialEq for NRPolygon {
    fn eq(&self, o: &NRPolygon) -> bool {
        self.vertices == o.vertices && self.slopes == o.slopes
    }
}

impl Eq for NRPolygon {}

impl NRPolygon {
    pub fn from_support(mut support: Vec<Pt>) -> NRPolygon {
        support.sort();
        support.dedup();
        let mut right: BTreeMap<i64, i64> = BTreeMap::new();
        for &(u, v) in &support {
            let e = right.entry(v).or_insert(u);
            *e = (*e).max(u);
        }
        // hull in the (v, u) plane, u concave in v
        let pts: Vec<Pt> = right.iter().map(|(&v, &u)| (v, u)).collect();
        let hull = upper_hull(&pts);
        let vertices: Vec<Pt> = hull.iter().rev().map(|&(v, u)| (u, v)).collect();
        let mut raw = vec![];
        for w in vertices.windows(2) {
            let du = w[1].0 - w[0].0;
            let dv = w[1].1 - w[0].1;
            if du != 0 {
                raw.push((rat(dv, du), du.unsigned_abs()));
            }
        }
        NRPolygon { support, vertices, slopes: slope_multiset(raw) }
    }

    pub fn has_vertical_side(&self) -> bool {
        self.vertices.windows(2).any(|w| w[0].0 == w[1].0)
    }

    pub fn slope_set(&self) -> Vec<Rational> {
        self.slopes.iter().map(|(s, _)| s.clone()).collect()
    }

    /// All finite slopes lie in `allowed`.
    pub fn slopes_within(&self, allowed: &[Rational]) -> bool {
        self.slopes.iter().all(|(s, _)| allowed.contains(s))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "support": self.support.iter().map(|&(u, v)| json!([u, v])).collect::<Vec<_>>(),
            "vertices": self.vertices.iter().map(|&(u, v)| json!([u, v])).collect::<Vec<_>>(),
            "slopes": self.slopes.iter().map(|(s, m)| json!([s.to_string(), m])).collect::<Vec<_>>(),
        })
    }
}

pub fn nr_polygon(phi: &DiffOp) -> Result<NRPolygon> {
    if phi.is_zero() {
        return Err(Error::Malformed("zero operator has no polygon".into()));
    }
    let support = phi.support().into_iter().map(|(i, j, _)| (i as i64, j as i64 - i as i64)).collect();
    Ok(NRPolygon::from_support(support))
}

/// Image polygon under `(u, v) -> (u + v, -v)`.
pub fn fourier_polygon(p: &NRPolygon) -> NRPolygon {
    NRPolygon::from_support(p.support.iter().map(|&(u, v)| (u + v, -v)).collect())
}

/// Lower boundary of the quadrants `{u <= i, v >= ord(a_i) - i}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonPolygonLocal {
    pub point: Point,
    pub points: Vec<Pt>,
    pub lower_hull: Vec<Pt>,
    pub slopes: Vec<(Rational, u64)>,
}

impl NewtonPolygonLocal {
    pub fn max_slope(&self) -> Rational {
        self.slopes.iter().map(|(s, _)| s.clone()).max().unwrap_or_else(Rational::zero)
    }

    pub fn is_regular(&self) -> bool {
        self.slopes.iter().all(|(s, _)| s.is_zero())
    }

    /// Horizontal extent of the edges of slope `s`.
    pub fn multiplicity(&self, s: &Rational) -> u64 {
        self.slopes.iter().find(|(t, _)| t == s).map_or(0, |(_, m)| *m)
    }

    pub fn positive_slopes(&self) -> Vec<(Rational, u64)> {
        self.slopes.iter().filter(|(s, _)| s.is_positive()).cloned().collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "point": self.point.name(),
            "points": self.points.iter().map(|&(u, v)| json!([u, v])).collect::<Vec<_>>(),
            "vertices": self.lower_hull.iter().map(|&(u, v)| json!([u, v])).collect::<Vec<_>>(),
            "slopes": self.slopes.iter().map(|(s, m)| json!([s.to_string(), m])).collect::<Vec<_>>(),
        })
    }
}

pub fn local_newton(phi: &DiffOp, at: Point) -> Result<NewtonPolygonLocal> {
    if phi.is_zero() {
        return Err(Error::Malformed("zero operator has no polygon".into()));
    }
    let op = match at {
        Point::Zero => phi.clone(),
        Point::Infinity => phi.invert_chart().0,
    };
    let points: Vec<Pt> = op
        .coeffs()
        .iter()
        .enumerate()
        .filter_map(|(i, a)| a.ord().map(|o| (i as i64, o as i64 - i as i64)))
        .collect();
    let mu = op.order().unwrap_or(0) as i64;
    let mut stair: Vec<Pt> = vec![];
    let mut run = i64::MAX;
    for u in (0..=mu).rev() {
        if let Some(&(_, v)) = points.iter().find(|p| p.0 == u) {
            run = run.min(v);
        }
        stair.push((u, run));
    }
    stair.reverse();
    let hull = lower_hull(&stair);
    let mut raw = vec![];
    for w in hull.windows(2) {
        raw.push((rat(w[1].1 - w[0].1, w[1].0 - w[0].0), (w[1].0 - w[0].0) as u64));
    }
    Ok(NewtonPolygonLocal { point: at, points, lower_hull: hull, slopes: slope_multiset(raw) })
}
