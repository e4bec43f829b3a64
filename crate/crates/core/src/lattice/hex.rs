//! Hexagonal-grid loops bounding clusters of triangular-lattice sites.
//!
//! A triangular site `(i, j)` is the center of a hexagon whose six corners are
//! the triangles returned by [`triangles_around`]. Outer boundaries of site
//! clusters are closed walks on these corners.

use std::collections::{HashMap, HashSet, VecDeque};

use super::SiteKey;
use crate::error::{Error, Result};
use crate::geometry::{LoopPath, Point};

/// Axial offsets of the six triangular neighbors, counterclockwise from east.
pub const TRI_OFFSETS: [(i64, i64); 6] = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// The three triangular sites at the corners of a honeycomb vertex.
pub fn triangle_sites(t: SiteKey) -> [(i64, i64); 3] {
    let (i, j) = (t.i, t.j);
    if t.sub == 0 {
        [(i, j), (i + 1, j), (i, j + 1)]
    } else {
        [(i + 1, j), (i, j + 1), (i + 1, j + 1)]
    }
}

/// Corners of the hexagon centered at triangular site `c`, counterclockwise
/// starting at angle 30 degrees. The side between corners `k` and `k + 1`
/// is shared with the neighbor `c + TRI_OFFSETS[(k + 1) % 6]`.
pub fn triangles_around(c: (i64, i64)) -> [SiteKey; 6] {
    let (i, j) = c;
    [
        SiteKey::up(i, j),
        SiteKey::down(i - 1, j),
        SiteKey::up(i - 1, j),
        SiteKey::down(i - 1, j - 1),
        SiteKey::up(i, j - 1),
        SiteKey::down(i, j - 1),
    ]
}

/// Centroid of triangle `t` for a triangular lattice of spacing `a`.
pub fn triangle_centroid(t: SiteKey, a: f64) -> Point {
    let (i, j) = (t.i as f64, t.j as f64);
    if t.sub == 0 {
        Point::new(a * (i + 0.5 * j + 0.5), a * 0.5 * SQRT3 * (j + 1.0 / 3.0))
    } else {
        Point::new(a * (i + 0.5 * j + 1.0), a * 0.5 * SQRT3 * (j + 2.0 / 3.0))
    }
}

/// Position of triangular site `(i, j)` at spacing `a`.
pub fn site_position(c: (i64, i64), a: f64) -> Point {
    Point::new(a * (c.0 as f64 + 0.5 * c.1 as f64), a * 0.5 * SQRT3 * c.1 as f64)
}

/// The two triangular sites separated by the honeycomb edge `u`-`v`.
pub fn edge_sides(u: SiteKey, v: SiteKey) -> Option<[(i64, i64); 2]> {
    let a = triangle_sites(u);
    let b = triangle_sites(v);
    let common: Vec<(i64, i64)> = a.iter().copied().filter(|s| b.contains(s)).collect();
    if u.sub != v.sub && common.len() == 2 {
        Some([common[0], common[1]])
    } else {
        None
    }
}

/// A closed self-avoiding walk on the honeycomb, as a cycle of corners.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HexLoop {
    vertices: Vec<SiteKey>,
}

impl HexLoop {
    /// Validates closure, adjacency and self-avoidance.
    pub fn new(vertices: Vec<SiteKey>) -> Result<Self> {
        if vertices.len() < 6 {
            return Err(Error::NotClosed);
        }
        let n = vertices.len();
        for k in 0..n {
            if edge_sides(vertices[k], vertices[(k + 1) % n]).is_none() {
                return Err(Error::NotNearestNeighbor(k));
            }
        }
        let mut seen = HashSet::with_capacity(n);
        for (k, v) in vertices.iter().enumerate() {
            if !seen.insert(*v) {
                return Err(Error::NotSelfAvoiding(k));
            }
        }
        Ok(Self { vertices })
    }

    /// The boundary of a single hexagon.
    pub fn hexagon(c: (i64, i64)) -> Self {
        Self {
            vertices: triangles_around(c).to_vec(),
        }
    }

    pub fn vertices(&self) -> &[SiteKey] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn translate(&self, di: i64, dj: i64) -> Self {
        Self {
            vertices: self
                .vertices
                .iter()
                .map(|v| SiteKey { i: v.i + di, j: v.j + dj, sub: v.sub })
                .collect(),
        }
    }

    /// Hexagons sharing at least one side with the loop.
    pub fn adjacent_hexagons(&self) -> Vec<(i64, i64)> {
        let n = self.vertices.len();
        let mut out: Vec<(i64, i64)> = (0..n)
            .flat_map(|k| edge_sides(self.vertices[k], self.vertices[(k + 1) % n]).expect("validated loop"))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Adjacent hexagons split into those enclosed by the loop and those outside.
    pub fn adjacent_split(&self) -> (Vec<(i64, i64)>, Vec<(i64, i64)>) {
        let path = self.path(1.0);
        self.adjacent_hexagons()
            .into_iter()
            .partition(|&c| path.surrounds(site_position(c, 1.0)).unwrap_or(false))
    }

    /// Euclidean polyline for a triangular lattice of spacing `a`.
    pub fn path(&self, a: f64) -> LoopPath {
        LoopPath::new(self.vertices.iter().map(|&v| triangle_centroid(v, a)).collect()).expect("loop has at least 6 vertices")
    }

    /// Loop identity up to starting point (orientation kept).
    pub fn canonical(&self) -> Vec<SiteKey> {
        let start = (0..self.vertices.len())
            .min_by_key(|&k| (self.vertices[k].j, self.vertices[k].i, self.vertices[k].sub))
            .unwrap_or(0);
        let mut v = self.vertices.clone();
        v.rotate_left(start);
        v
    }
}

/// Outer boundary of a connected cluster of triangular sites: the loop of
/// honeycomb edges separating the cluster from the unbounded component of
/// its complement, traversed with the cluster on the left.
pub fn trace_outer_boundary(cluster: &[(i64, i64)]) -> Result<HexLoop> {
    if cluster.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let set: HashSet<(i64, i64)> = cluster.iter().copied().collect();
    if !tri_connected(&set) {
        return Err(Error::Disconnected);
    }
    let (mut i0, mut i1, mut j0, mut j1) = (i64::MAX, i64::MIN, i64::MAX, i64::MIN);
    for &(i, j) in &set {
        i0 = i0.min(i);
        i1 = i1.max(i);
        j0 = j0.min(j);
        j1 = j1.max(j);
    }
    let (i0, i1, j0, j1) = (i0 - 1, i1 + 1, j0 - 1, j1 + 1);
    let inside = |c: (i64, i64)| c.0 >= i0 && c.0 <= i1 && c.1 >= j0 && c.1 <= j1;
    let mut exterior: HashSet<(i64, i64)> = HashSet::new();
    let mut queue = VecDeque::from([(i0, j0)]);
    exterior.insert((i0, j0));
    while let Some(c) = queue.pop_front() {
        for &(di, dj) in &TRI_OFFSETS {
            let nb = (c.0 + di, c.1 + dj);
            if inside(nb) && !set.contains(&nb) && exterior.insert(nb) {
                queue.push_back(nb);
            }
        }
    }
    let is_exterior = |c: (i64, i64)| !inside(c) || exterior.contains(&c);

    let mut next: HashMap<SiteKey, SiteKey> = HashMap::new();
    let mut sorted: Vec<(i64, i64)> = set.iter().copied().collect();
    sorted.sort_unstable();
    for &s in &sorted {
        let around = triangles_around(s);
        for k in 0..6 {
            let (di, dj) = TRI_OFFSETS[(k + 1) % 6];
            if is_exterior((s.0 + di, s.1 + dj)) && next.insert(around[k], around[(k + 1) % 6]).is_some() {
                return Err(Error::Degenerate("boundary vertex with two exits".into()));
            }
        }
    }
    let start = *next.keys().min_by_key(|v| (v.j, v.i, v.sub)).ok_or(Error::EmptyDomain)?;
    let mut vertices = vec![start];
    let mut cur = next[&start];
    while cur != start {
        vertices.push(cur);
        cur = *next
            .get(&cur)
            .ok_or_else(|| Error::Degenerate("open boundary walk".into()))?;
        if vertices.len() > next.len() {
            return Err(Error::Degenerate("boundary walk does not close".into()));
        }
    }
    if vertices.len() != next.len() {
        return Err(Error::Degenerate("outer boundary splits into several loops".into()));
    }
    HexLoop::new(vertices)
}

fn tri_connected(set: &HashSet<(i64, i64)>) -> bool {
    let Some(&first) = set.iter().next() else {
        return true;
    };
    let mut seen = HashSet::from([first]);
    let mut stack = vec![first];
    while let Some(c) = stack.pop() {
        for &(di, dj) in &TRI_OFFSETS {
            let nb = (c.0 + di, c.1 + dj);
            if set.contains(&nb) && seen.insert(nb) {
                stack.push(nb);
            }
        }
    }
    seen.len() == set.len()
}

/// Probability-weight form of a hexagonal loop's neighborhood: the number of
/// hexagons that must be fixed for the loop to be a cluster boundary.
pub fn neighbor_count(lp: &HexLoop) -> usize {
    lp.adjacent_hexagons().len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hexagon_corners_are_unit_spaced() {
        let h = triangles_around((2, -1));
        for k in 0..6 {
            let d = (triangle_centroid(h[k], 1.0) - triangle_centroid(h[(k + 1) % 6], 1.0)).norm();
            assert!((d - 1.0 / SQRT3).abs() < 1e-12);
            let side = edge_sides(h[k], h[(k + 1) % 6]).unwrap();
            let (di, dj) = TRI_OFFSETS[(k + 1) % 6];
            assert!(side.contains(&(2, -1)));
            assert!(side.contains(&(2 + di, -1 + dj)));
        }
    }

    #[test]
    fn single_and_domino_lengths() {
        let one = trace_outer_boundary(&[(0, 0)]).unwrap();
        assert_eq!(one.len(), 6);
        assert_eq!(neighbor_count(&one), 7);
        assert_eq!(one.canonical(), HexLoop::hexagon((0, 0)).canonical());
        let two = trace_outer_boundary(&[(0, 0), (1, 0)]).unwrap();
        assert_eq!(two.len(), 10);
        assert_eq!(neighbor_count(&two), 10);
        let (inner, outer) = two.adjacent_split();
        assert_eq!((inner.len(), outer.len()), (2, 8));
    }

    #[test]
    fn hole_is_ignored() {
        let ring: Vec<(i64, i64)> = TRI_OFFSETS.to_vec();
        let with_hole = trace_outer_boundary(&ring).unwrap();
        let mut filled = ring.clone();
        filled.push((0, 0));
        let full = trace_outer_boundary(&filled).unwrap();
        assert_eq!(with_hole.canonical(), full.canonical());
        assert_eq!(full.len(), 18);
    }

    #[test]
    fn rejects_empty_and_disconnected() {
        assert!(trace_outer_boundary(&[]).is_err());
        assert_eq!(trace_outer_boundary(&[(0, 0), (5, 5)]).unwrap_err(), Error::Disconnected);
    }

    #[test]
    fn invalid_loops_rejected() {
        let mut v = triangles_around((0, 0)).to_vec();
        v.swap(1, 2);
        assert!(HexLoop::new(v).is_err());
        assert_eq!(HexLoop::new(triangles_around((0, 0))[..4].to_vec()).unwrap_err(), Error::NotClosed);
    }

    fn cluster_strategy() -> impl Strategy<Value = Vec<(i64, i64)>> {
        proptest::collection::vec(0usize..6, 0..25).prop_map(|steps| {
            let mut cur = (0i64, 0i64);
            let mut out = vec![cur];
            for s in steps {
                let (di, dj) = TRI_OFFSETS[s];
                cur = (cur.0 + di, cur.1 + dj);
                out.push(cur);
            }
            out.sort_unstable();
            out.dedup();
            out
        })
    }

    proptest! {
        #[test]
        fn outer_boundary_is_simple_and_surrounds_cluster(cluster in cluster_strategy()) {
            let lp = trace_outer_boundary(&cluster).unwrap();
            let path = lp.path(1.0);
            prop_assert!(path.is_self_avoiding());
            prop_assert!(path.signed_area() > 0.0);
            for &c in &cluster {
                prop_assert!(path.surrounds(site_position(c, 1.0)).unwrap());
            }
            let (inner, _) = lp.adjacent_split();
            for c in inner {
                prop_assert!(cluster.contains(&c));
            }
        }
    }
}
