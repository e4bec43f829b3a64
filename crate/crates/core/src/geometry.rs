//! Planar primitives: points as complex numbers, segment predicates, and the
//! closed polyline [`LoopPath`].

use std::cmp::Ordering;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Point = Complex64;

#[inline]
pub fn cross(a: Point, b: Point) -> f64 {
    a.re * b.im - a.im * b.re
}

#[inline]
fn orient(a: Point, b: Point, c: Point) -> f64 {
    cross(b - a, c - a)
}

#[inline]
fn on_segment_collinear(a: Point, b: Point, p: Point) -> bool {
    p.re >= a.re.min(b.re) && p.re <= a.re.max(b.re) && p.im >= a.im.min(b.im) && p.im <= a.im.max(b.im)
}

/// Closed-segment intersection test from orientation signs. No tolerance is
/// applied: the answer is a deterministic function of the coordinates.
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment_collinear(c, d, a))
        || (d2 == 0.0 && on_segment_collinear(c, d, b))
        || (d3 == 0.0 && on_segment_collinear(a, b, c))
        || (d4 == 0.0 && on_segment_collinear(a, b, d))
}

pub fn point_on_segment(a: Point, b: Point, p: Point) -> bool {
    orient(a, b, p) == 0.0 && on_segment_collinear(a, b, p)
}

/// Signed shoelace area of a closed vertex cycle (no repeated endpoint).
pub fn signed_area(vertices: &[Point]) -> f64 {
    let n = vertices.len();
    let mut s = 0.0;
    for i in 0..n {
        s += cross(vertices[i], vertices[(i + 1) % n]);
    }
    0.5 * s
}

/// Winding number of the closed cycle around `z`; `None` if `z` lies on it.
pub fn winding_number(vertices: &[Point], z: Point) -> Option<i64> {
    let n = vertices.len();
    let mut w = 0i64;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        if point_on_segment(a, b, z) {
            return None;
        }
        if a.im <= z.im {
            if b.im > z.im && orient(a, b, z) > 0.0 {
                w += 1;
            }
        } else if b.im <= z.im && orient(a, b, z) < 0.0 {
            w -= 1;
        }
    }
    Some(w)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub min: Point,
    pub max: Point,
}

impl BBox {
    pub fn of(points: impl IntoIterator<Item = Point>) -> Option<BBox> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut b = BBox { min: first, max: first };
        for p in it {
            b.min.re = b.min.re.min(p.re);
            b.min.im = b.min.im.min(p.im);
            b.max.re = b.max.re.max(p.re);
            b.max.im = b.max.im.max(p.im);
        }
        Some(b)
    }

    pub fn width(&self) -> f64 {
        self.max.re - self.min.re
    }

    pub fn height(&self) -> f64 {
        self.max.im - self.min.im
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn intersects(&self, o: &BBox) -> bool {
        self.min.re <= o.max.re && o.min.re <= self.max.re && self.min.im <= o.max.im && o.min.im <= self.max.im
    }

    pub fn contains_box(&self, o: &BBox) -> bool {
        self.min.re <= o.min.re && self.min.im <= o.min.im && o.max.re <= self.max.re && o.max.im <= self.max.im
    }

    pub fn contains(&self, p: Point) -> bool {
        p.re >= self.min.re && p.re <= self.max.re && p.im >= self.min.im && p.im <= self.max.im
    }
}

/// Convex hull by the monotone chain, counterclockwise, collinear points
/// dropped.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts = points.to_vec();
    pts.sort_by(lex_cmp);
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let base = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> = if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= base + 2 && orient(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Largest distance between two of the points.
pub fn diameter(points: &[Point]) -> f64 {
    let hull = convex_hull(points);
    let mut best: f64 = 0.0;
    for i in 0..hull.len() {
        for j in i + 1..hull.len() {
            best = best.max((hull[i] - hull[j]).norm());
        }
    }
    best
}

fn lex_cmp(a: &Point, b: &Point) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// A closed planar polyline, stored as its cyclic vertex sequence without
/// the repeated closing vertex.
///
/// Two loops compare equal iff one is a cyclic shift of the other.
#[derive(Debug, Clone)]
pub struct LoopPath {
    vertices: Vec<Point>,
}

impl LoopPath {
    /// From a cyclic vertex list (closing vertex omitted).
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::Degenerate("a loop needs at least three vertices".into()));
        }
        Ok(Self { vertices })
    }

    /// From the raw representation, where the first vertex equals the last.
    pub fn from_closed(mut raw: Vec<Point>) -> Result<Self> {
        if raw.len() < 2 || raw.first() != raw.last() {
            return Err(Error::NotClosed);
        }
        raw.pop();
        Self::new(raw)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Raw representation with the closing vertex repeated.
    pub fn closed_vertices(&self) -> Vec<Point> {
        let mut v = self.vertices.clone();
        v.push(self.vertices[0]);
        v
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn bbox(&self) -> BBox {
        BBox::of(self.vertices.iter().copied()).expect("nonempty loop")
    }

    pub fn signed_area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| (b - a).norm()).sum()
    }

    pub fn is_self_avoiding(&self) -> bool {
        let mut v = self.vertices.clone();
        v.sort_by(lex_cmp);
        v.windows(2).all(|w| w[0] != w[1])
    }

    /// Rotation starting at the lexicographically smallest vertex.
    pub fn canonical(&self) -> LoopPath {
        let start = (0..self.vertices.len())
            .min_by(|&i, &j| {
                let n = self.vertices.len();
                (0..n)
                    .map(|k| lex_cmp(&self.vertices[(i + k) % n], &self.vertices[(j + k) % n]))
                    .find(|o| *o != Ordering::Equal)
                    .unwrap_or(Ordering::Equal)
            })
            .unwrap_or(0);
        let mut v = self.vertices.clone();
        v.rotate_left(start);
        LoopPath { vertices: v }
    }

    /// Whether the loop surrounds `z`: its winding number around `z` is odd.
    pub fn surrounds(&self, z: Point) -> Result<bool> {
        surrounds(self, z)
    }

    pub fn translate(&self, by: Point) -> LoopPath {
        LoopPath {
            vertices: self.vertices.iter().map(|p| p + by).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(Point) -> Point) -> LoopPath {
        LoopPath {
            vertices: self.vertices.iter().map(|&p| f(p)).collect(),
        }
    }

    /// Whether any edge of `self` meets any edge of `other`.
    pub fn intersects(&self, other: &LoopPath) -> bool {
        if !self.bbox().intersects(&other.bbox()) {
            return false;
        }
        self.segments()
            .any(|(a, b)| other.segments().any(|(c, d)| segments_intersect(a, b, c, d)))
    }
}

impl PartialEq for LoopPath {
    fn eq(&self, other: &Self) -> bool {
        self.vertices.len() == other.vertices.len() && self.canonical().vertices == other.canonical().vertices
    }
}

/// True iff the winding number of `lp` around `z` is odd; an error if `z`
/// lies on the loop.
pub fn surrounds(lp: &LoopPath, z: Point) -> Result<bool> {
    match winding_number(&lp.vertices, z) {
        Some(w) => Ok(w.rem_euclid(2) == 1),
        None => Err(Error::PointOnLoop),
    }
}
