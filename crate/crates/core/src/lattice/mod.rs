//! Lattice geometry: square, triangular and hexagonal (honeycomb) lattices,
//! their finite discretizations of planar shapes, and cluster labeling.
//!
//! All three lattices use integer [`SiteKey`]s. Square and triangular sites
//! are `(i, j)` in Cartesian and axial coordinates respectively. Honeycomb
//! vertices are the triangles of a triangular lattice: `sub = 0` is the up
//! triangle `{(i,j), (i+1,j), (i,j+1)}` and `sub = 1` the down triangle
//! `{(i+1,j), (i,j+1), (i+1,j+1)}`. Hexagonal faces are therefore triangular
//! sites, which is how percolation boundaries become honeycomb loops.
//!
//! The mesh of a domain is always its nearest-neighbor distance.

mod clusters;
mod graph;
pub mod hex;
mod union_find;

use std::collections::HashMap;
use std::f64::consts::PI;

pub use clusters::{bfs_site_clusters, count_bond_clusters, find_bond_clusters, find_site_clusters};
pub use graph::Graph;
pub use union_find::UnionFind;

use crate::error::{invalid, Error, Result};
use crate::geometry::{BBox, Point};

const SQRT3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LatticeKind {
    Square,
    Triangular,
    Hexagonal,
}

impl LatticeKind {
    pub fn coordination(self) -> usize {
        match self {
            LatticeKind::Square => 4,
            LatticeKind::Triangular => 6,
            LatticeKind::Hexagonal => 3,
        }
    }

    pub fn dual(self) -> LatticeKind {
        match self {
            LatticeKind::Square => LatticeKind::Square,
            LatticeKind::Triangular => LatticeKind::Hexagonal,
            LatticeKind::Hexagonal => LatticeKind::Triangular,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LatticeKind::Square => "square",
            LatticeKind::Triangular => "triangular",
            LatticeKind::Hexagonal => "hexagonal",
        }
    }
}

impl std::str::FromStr for LatticeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square" | "sq" => Ok(LatticeKind::Square),
            "triangular" | "tri" => Ok(LatticeKind::Triangular),
            "hexagonal" | "hex" | "honeycomb" => Ok(LatticeKind::Hexagonal),
            _ => Err(invalid(format!("unknown lattice '{s}'"))),
        }
    }
}

/// A bounded planar region to discretize. Boundaries are closed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Rectangle { min: Point, max: Point },
    Disc { center: Point, radius: f64 },
    /// `[x_min, x_max] x [0, height]`: a window on the upper half-plane whose
    /// bottom edge lies on the real axis.
    UpperHalfStrip { x_min: f64, x_max: f64, height: f64 },
}

impl Shape {
    pub fn unit_square() -> Shape {
        Shape::Rectangle {
            min: Point::new(0.0, 0.0),
            max: Point::new(1.0, 1.0),
        }
    }

    pub fn unit_disc() -> Shape {
        Shape::Disc {
            center: Point::new(0.0, 0.0),
            radius: 1.0,
        }
    }

    pub fn bbox(&self) -> BBox {
        match *self {
            Shape::Rectangle { min, max } => BBox { min, max },
            Shape::Disc { center, radius } => BBox {
                min: center - Point::new(radius, radius),
                max: center + Point::new(radius, radius),
            },
            Shape::UpperHalfStrip { x_min, x_max, height } => BBox {
                min: Point::new(x_min, 0.0),
                max: Point::new(x_max, height),
            },
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        self.contains_with(p, 0.0)
    }

    /// Containment with the boundary pushed outward by `tol`.
    pub fn contains_with(&self, p: Point, tol: f64) -> bool {
        match *self {
            Shape::Disc { center, radius } => (p - center).norm() <= radius + tol,
            _ => {
                let b = self.bbox();
                p.re >= b.min.re - tol && p.re <= b.max.re + tol && p.im >= b.min.im - tol && p.im <= b.max.im + tol
            }
        }
    }

    /// Strict interior containment.
    pub fn contains_strictly(&self, p: Point) -> bool {
        match *self {
            Shape::Disc { center, radius } => (p - center).norm() < radius,
            _ => {
                let b = self.bbox();
                p.re > b.min.re && p.re < b.max.re && p.im > b.min.im && p.im < b.max.im
            }
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Shape::Disc { radius, .. } => PI * radius * radius,
            _ => {
                let b = self.bbox();
                b.width() * b.height()
            }
        }
    }

    /// Size used for "macroscopic" thresholds: the side or diameter.
    pub fn scale(&self) -> f64 {
        match *self {
            Shape::Disc { radius, .. } => 2.0 * radius,
            _ => {
                let b = self.bbox();
                b.width().max(b.height())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SiteKey {
    pub i: i64,
    pub j: i64,
    pub sub: u8,
}

impl SiteKey {
    pub const fn new(i: i64, j: i64) -> Self {
        Self { i, j, sub: 0 }
    }

    pub const fn up(i: i64, j: i64) -> Self {
        Self { i, j, sub: 0 }
    }

    pub const fn down(i: i64, j: i64) -> Self {
        Self { i, j, sub: 1 }
    }
}

/// Position of a lattice vertex for a lattice of nearest-neighbor spacing `mesh`.
pub fn key_position(kind: LatticeKind, key: SiteKey, mesh: f64) -> Point {
    let (i, j) = (key.i as f64, key.j as f64);
    match kind {
        LatticeKind::Square => Point::new(i * mesh, j * mesh),
        LatticeKind::Triangular => Point::new((i + 0.5 * j) * mesh, 0.5 * SQRT3 * j * mesh),
        LatticeKind::Hexagonal => hex::triangle_centroid(key, SQRT3 * mesh),
    }
}

/// Lattice neighbors of `key` in the infinite lattice.
pub fn key_neighbors(kind: LatticeKind, key: SiteKey) -> Vec<SiteKey> {
    let SiteKey { i, j, sub } = key;
    match kind {
        LatticeKind::Square => vec![
            SiteKey::new(i + 1, j),
            SiteKey::new(i, j + 1),
            SiteKey::new(i - 1, j),
            SiteKey::new(i, j - 1),
        ],
        LatticeKind::Triangular => hex::TRI_OFFSETS
            .iter()
            .map(|&(di, dj)| SiteKey::new(i + di, j + dj))
            .collect(),
        LatticeKind::Hexagonal => {
            if sub == 0 {
                vec![SiteKey::down(i, j), SiteKey::down(i - 1, j), SiteKey::down(i, j - 1)]
            } else {
                vec![SiteKey::up(i, j), SiteKey::up(i + 1, j), SiteKey::up(i, j + 1)]
            }
        }
    }
}

/// A finite portion of a lattice.
#[derive(Debug, Clone)]
pub struct LatticeDomain {
    kind: LatticeKind,
    mesh: f64,
    keys: Vec<SiteKey>,
    positions: Vec<Point>,
    graph: Graph,
    boundary: Vec<usize>,
    index: HashMap<SiteKey, usize>,
    shape: Option<Shape>,
    /// Hexagonal faces (triangular keys) with their six corner indices in
    /// counterclockwise order; only populated for hexagonal domains.
    faces: Vec<(SiteKey, [usize; 6])>,
}

impl LatticeDomain {
    /// Sites of the infinite lattice of mesh `mesh` lying in `shape`
    /// (boundary included, up to a relative tolerance of 1e-9).
    pub fn build(kind: LatticeKind, shape: Shape, mesh: f64) -> Result<Self> {
        if !(mesh > 0.0) || !mesh.is_finite() {
            return Err(invalid("mesh must be positive"));
        }
        let b = shape.bbox();
        let tol = 1e-9 * mesh;
        let mut keys = Vec::new();
        let jy = match kind {
            LatticeKind::Square => mesh,
            LatticeKind::Triangular => 0.5 * SQRT3 * mesh,
            LatticeKind::Hexagonal => 1.5 * mesh,
        };
        let j_lo = ((b.min.im - 2.0 * mesh) / jy).floor() as i64 - 1;
        let j_hi = ((b.max.im + 2.0 * mesh) / jy).ceil() as i64 + 1;
        for j in j_lo..=j_hi {
            // Solve for the i-range from the row offset.
            let (x0, xi) = match kind {
                LatticeKind::Square => (0.0, mesh),
                LatticeKind::Triangular => (0.5 * j as f64 * mesh, mesh),
                LatticeKind::Hexagonal => (SQRT3 * mesh * 0.5 * j as f64, SQRT3 * mesh),
            };
            let i_lo = ((b.min.re - x0) / xi).floor() as i64 - 2;
            let i_hi = ((b.max.re - x0) / xi).ceil() as i64 + 2;
            for i in i_lo..=i_hi {
                let subs: &[u8] = if kind == LatticeKind::Hexagonal { &[0, 1] } else { &[0] };
                for &sub in subs {
                    let key = SiteKey { i, j, sub };
                    if shape.contains_with(key_position(kind, key, mesh), tol) {
                        keys.push(key);
                    }
                }
            }
        }
        if keys.is_empty() {
            return Err(Error::EmptyDomain);
        }
        let mut d = Self::from_keys(kind, mesh, keys)?;
        d.shape = Some(shape);
        Ok(d)
    }

    /// Domain spanned by the given keys with lattice adjacency.
    pub fn from_keys(kind: LatticeKind, mesh: f64, mut keys: Vec<SiteKey>) -> Result<Self> {
        if keys.is_empty() {
            return Err(Error::EmptyDomain);
        }
        // Row-major ordering: by j then i then sublattice.
        keys.sort_by_key(|k| (k.j, k.i, k.sub));
        keys.dedup();
        let index: HashMap<SiteKey, usize> = keys.iter().enumerate().map(|(n, &k)| (k, n)).collect();
        let mut edges = Vec::new();
        for (a, &k) in keys.iter().enumerate() {
            for nb in key_neighbors(kind, k) {
                if let Some(&b) = index.get(&nb) {
                    if a < b {
                        edges.push((a, b));
                    }
                }
            }
        }
        let graph = Graph::new(keys.len(), edges);
        Ok(Self::assemble(kind, mesh, keys, index, graph))
    }

    fn assemble(kind: LatticeKind, mesh: f64, keys: Vec<SiteKey>, index: HashMap<SiteKey, usize>, graph: Graph) -> Self {
        let positions = keys.iter().map(|&k| key_position(kind, k, mesh)).collect();
        let z = kind.coordination();
        let boundary = (0..keys.len()).filter(|&s| graph.degree(s) < z).collect();
        let mut d = Self {
            kind,
            mesh,
            keys,
            positions,
            graph,
            boundary,
            index,
            shape: None,
            faces: Vec::new(),
        };
        if kind == LatticeKind::Hexagonal {
            d.faces = d.detect_faces();
        }
        d
    }

    fn detect_faces(&self) -> Vec<(SiteKey, [usize; 6])> {
        let mut cells: Vec<SiteKey> = self
            .keys
            .iter()
            .flat_map(|k| hex::triangle_sites(*k))
            .map(|(i, j)| SiteKey::new(i, j))
            .collect();
        cells.sort_by_key(|k| (k.j, k.i));
        cells.dedup();
        let mut faces = Vec::new();
        'cells: for c in cells {
            let around = hex::triangles_around((c.i, c.j));
            let mut idx = [0usize; 6];
            for (slot, t) in around.iter().enumerate() {
                match self.index.get(t) {
                    Some(&v) => idx[slot] = v,
                    None => continue 'cells,
                }
            }
            for s in 0..6 {
                let (a, b) = (idx[s], idx[(s + 1) % 6]);
                if self.edge_between(a, b).is_none() {
                    continue 'cells;
                }
            }
            faces.push((c, idx));
        }
        faces
    }

    /// Honeycomb domain made of the given hexagonal cells (triangular-lattice
    /// keys); edges are exactly the cell sides.
    pub fn honeycomb_patch(cells: &[(i64, i64)], mesh: f64) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::EmptyDomain);
        }
        let mut keys: Vec<SiteKey> = cells.iter().flat_map(|&c| hex::triangles_around(c)).collect();
        keys.sort_by_key(|k| (k.j, k.i, k.sub));
        keys.dedup();
        let index: HashMap<SiteKey, usize> = keys.iter().enumerate().map(|(n, &k)| (k, n)).collect();
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for &c in cells {
            let t = hex::triangles_around(c);
            for s in 0..6 {
                let (a, b) = (index[&t[s]], index[&t[(s + 1) % 6]]);
                edges.push((a.min(b), a.max(b)));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        let graph = Graph::new(keys.len(), edges);
        Ok(Self::assemble(LatticeKind::Hexagonal, mesh, keys, index, graph))
    }

    /// Rhombus of `n x n` triangular sites, `(i, j)` in `[0, n)^2`.
    pub fn triangular_rhombus(n: usize, mesh: f64) -> Result<Self> {
        let keys = (0..n as i64)
            .flat_map(|j| (0..n as i64).map(move |i| SiteKey::new(i, j)))
            .collect();
        Self::from_keys(LatticeKind::Triangular, mesh, keys)
    }

    /// `w x h` square grid with unit-index spacing `mesh`.
    pub fn square_grid(w: usize, h: usize, mesh: f64) -> Result<Self> {
        let keys = (0..h as i64)
            .flat_map(|j| (0..w as i64).map(move |i| SiteKey::new(i, j)))
            .collect();
        Self::from_keys(LatticeKind::Square, mesh, keys)
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn dual_kind(&self) -> LatticeKind {
        self.kind.dual()
    }

    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    pub fn shape(&self) -> Option<Shape> {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn keys(&self) -> &[SiteKey] {
        &self.keys
    }

    pub fn key(&self, site: usize) -> SiteKey {
        self.keys[site]
    }

    pub fn site_index(&self, key: SiteKey) -> Option<usize> {
        self.index.get(&key).copied()
    }

    pub fn position(&self, site: usize) -> Point {
        self.positions[site]
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn neighbors(&self, site: usize) -> impl Iterator<Item = usize> + '_ {
        self.graph.neighbors(site)
    }

    pub fn boundary_sites(&self) -> &[usize] {
        &self.boundary
    }

    pub fn is_boundary(&self, site: usize) -> bool {
        self.graph.degree(site) < self.kind.coordination()
    }

    pub fn interior_sites(&self) -> Vec<usize> {
        (0..self.len()).filter(|&s| !self.is_boundary(s)).collect()
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.graph.incident(a).iter().find(|&&(u, _)| u == b).map(|&(_, e)| e)
    }

    /// Hexagonal faces fully present in the domain.
    pub fn faces(&self) -> &[(SiteKey, [usize; 6])] {
        &self.faces
    }

    /// Boundary sites in counterclockwise angular order around the centroid
    /// of the domain; contiguous ranges of this cycle are boundary arcs.
    pub fn boundary_cycle(&self) -> Vec<usize> {
        let n = self.len() as f64;
        let c: Point = self.positions.iter().sum::<Point>() / n;
        let mut b = self.boundary.clone();
        b.sort_by(|&x, &y| {
            let ax = (self.positions[x] - c).arg();
            let ay = (self.positions[y] - c).arg();
            ax.total_cmp(&ay).then(x.cmp(&y))
        });
        b
    }

    pub fn bbox(&self) -> BBox {
        BBox::of(self.positions.iter().copied()).expect("nonempty domain")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_unit_square_half_mesh_has_nine_sites() {
        let d = LatticeDomain::build(LatticeKind::Square, Shape::unit_square(), 0.5).unwrap();
        assert_eq!(d.len(), 9);
        assert_eq!(d.boundary_sites().len(), 8);
        assert_eq!(d.interior_sites().len(), 1);
        assert_eq!(d.graph().degree(d.interior_sites()[0]), 4);
    }

    #[test]
    fn interior_coordination_matches_lattice() {
        for (kind, mesh) in [
            (LatticeKind::Square, 0.1),
            (LatticeKind::Triangular, 1.0),
            (LatticeKind::Triangular, 0.1),
            (LatticeKind::Hexagonal, 1.0 / 8.0),
        ] {
            let d = LatticeDomain::build(kind, Shape::unit_square(), mesh).unwrap();
            for s in 0..d.len() {
                let deg = d.graph().degree(s);
                assert!(deg <= kind.coordination());
                if !d.is_boundary(s) {
                    assert_eq!(deg, kind.coordination());
                }
            }
            for &(a, b) in d.graph().edges() {
                let dist = (d.position(a) - d.position(b)).norm();
                assert!((dist - mesh).abs() < 1e-9, "{kind:?} edge length {dist}");
                assert!(d.graph().neighbors(b).any(|x| x == a));
            }
        }
    }

    #[test]
    fn hexagonal_domain_has_interior_and_faces() {
        let d = LatticeDomain::build(LatticeKind::Hexagonal, Shape::unit_square(), 1.0 / 8.0).unwrap();
        assert!(!d.interior_sites().is_empty());
        assert!(!d.faces().is_empty());
        for (_, corners) in d.faces() {
            for s in 0..6 {
                assert!(d.edge_between(corners[s], corners[(s + 1) % 6]).is_some());
            }
        }
        assert_eq!(d.dual_kind(), LatticeKind::Triangular);
    }

    #[test]
    fn empty_discretization_is_an_error() {
        let tiny = Shape::Disc {
            center: Point::new(0.3, 0.3),
            radius: 0.01,
        };
        assert_eq!(LatticeDomain::build(LatticeKind::Square, tiny, 1.0).unwrap_err(), Error::EmptyDomain);
        assert!(LatticeDomain::build(LatticeKind::Square, tiny, 0.0).is_err());
    }

    #[test]
    fn honeycomb_patch_single_cell() {
        let d = LatticeDomain::honeycomb_patch(&[(0, 0)], 1.0).unwrap();
        assert_eq!(d.len(), 6);
        assert_eq!(d.graph().edge_count(), 6);
        assert_eq!(d.faces().len(), 1);
        let two = LatticeDomain::honeycomb_patch(&[(0, 0), (1, 0)], 1.0).unwrap();
        assert_eq!(two.len(), 10);
        assert_eq!(two.graph().edge_count(), 11);
        assert_eq!(two.faces().len(), 2);
    }

    #[test]
    fn boundary_cycle_is_angular() {
        let d = LatticeDomain::build(LatticeKind::Square, Shape::unit_square(), 0.25).unwrap();
        let cyc = d.boundary_cycle();
        assert_eq!(cyc.len(), d.boundary_sites().len());
        let c = Point::new(0.5, 0.5);
        let angles: Vec<f64> = cyc.iter().map(|&s| (d.position(s) - c).arg()).collect();
        assert!(angles.windows(2).all(|w| w[0] <= w[1]));
    }
}
