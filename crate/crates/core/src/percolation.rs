//! Bernoulli site percolation on the triangular lattice (bond percolation on
//! the square lattice), crossing events, and the law of cluster boundaries.

use std::collections::HashMap;

use rand::Rng as _;

use crate::error::{invalid, Error, Result};
use crate::geometry::{LoopPath, Point};
use crate::lattice::hex::{self, HexLoop, TRI_OFFSETS};
use crate::lattice::{find_site_clusters, Graph, LatticeDomain, LatticeKind, SiteKey};
use crate::rng::{replicate, Rng, RngStream};
use crate::stats::{binomial_estimate, EstimateWithCI};

#[derive(Debug, Clone, PartialEq)]
pub struct SiteConfig {
    pub open: Vec<bool>,
    pub p: f64,
}

impl SiteConfig {
    pub fn open_count(&self) -> usize {
        self.open.iter().filter(|&&o| o).count()
    }
}

fn check_p(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(invalid(format!("probability {p} outside [0, 1]")))
    }
}

pub fn sample_site_percolation(domain: &LatticeDomain, p: f64, rng: &mut Rng) -> Result<SiteConfig> {
    check_p(p)?;
    Ok(SiteConfig {
        open: sample_bits(domain.len(), p, rng),
        p,
    })
}

/// Independent open/closed edges of `graph`.
pub fn sample_bond_percolation(graph: &Graph, p: f64, rng: &mut Rng) -> Result<Vec<bool>> {
    check_p(p)?;
    Ok(sample_bits(graph.edge_count(), p, rng))
}

fn sample_bits(n: usize, p: f64, rng: &mut Rng) -> Vec<bool> {
    if p == 0.5 {
        // One bit per site from whole words.
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let w: u64 = rng.random();
            let take = (n - out.len()).min(64);
            out.extend((0..take).map(|b| (w >> b) & 1 == 1));
        }
        out
    } else {
        (0..n).map(|_| rng.random_bool(p)).collect()
    }
}

/// Two disjoint nonempty sets of boundary sites.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossingEvent {
    arc_a: Vec<usize>,
    arc_b: Vec<usize>,
}

impl CrossingEvent {
    pub fn new(mut arc_a: Vec<usize>, mut arc_b: Vec<usize>) -> Result<Self> {
        arc_a.sort_unstable();
        arc_a.dedup();
        arc_b.sort_unstable();
        arc_b.dedup();
        if arc_a.is_empty() || arc_b.is_empty() || arc_a.iter().any(|s| arc_b.binary_search(s).is_ok()) {
            return Err(Error::BadArcs);
        }
        Ok(Self { arc_a, arc_b })
    }

    /// Arcs given as index ranges `[start, end)` into the domain's
    /// counterclockwise boundary cycle (ranges may wrap around).
    pub fn from_boundary_ranges(domain: &LatticeDomain, a: (usize, usize), b: (usize, usize)) -> Result<Self> {
        let cycle = domain.boundary_cycle();
        let take = |(s, e): (usize, usize)| -> Result<Vec<usize>> {
            let n = cycle.len();
            if s >= n || e > n {
                return Err(Error::BadArcs);
            }
            let len = if e >= s { e - s } else { n - s + e };
            Ok((0..len).map(|k| cycle[(s + k) % n]).collect())
        };
        Self::new(take(a)?, take(b)?)
    }

    pub fn arc_a(&self) -> &[usize] {
        &self.arc_a
    }

    pub fn arc_b(&self) -> &[usize] {
        &self.arc_b
    }

    /// Whether an open cluster meets both arcs.
    pub fn occurred(&self, graph: &Graph, open: &[bool]) -> bool {
        let mut target = vec![false; open.len()];
        for &s in &self.arc_b {
            target[s] = true;
        }
        let mut seen = vec![false; open.len()];
        let mut stack: Vec<usize> = Vec::new();
        for &s in &self.arc_a {
            if open[s] && !seen[s] {
                seen[s] = true;
                stack.push(s);
            }
        }
        while let Some(u) = stack.pop() {
            if target[u] {
                return true;
            }
            for v in graph.neighbors(u) {
                if open[v] && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        false
    }
}

/// Monte Carlo crossing probability with a binomial standard error.
pub fn estimate_crossing(
    domain: &LatticeDomain,
    p: f64,
    event: &CrossingEvent,
    n_samples: u64,
    stream: RngStream,
) -> Result<EstimateWithCI> {
    check_p(p)?;
    if n_samples == 0 {
        return Err(invalid("need at least one sample"));
    }
    let hits = replicate(stream, n_samples, |_, rng| {
        let open = sample_bits(domain.len(), p, rng);
        event.occurred(domain.graph(), &open)
    });
    Ok(binomial_estimate(hits.iter().filter(|&&h| h).count() as u64, n_samples))
}

/// `n x n` rhombus of the triangular lattice with its left and right sides.
/// Left-right open crossings have probability exactly 1/2 at `p = 1/2`.
pub fn rhombus_crossing(n: usize) -> Result<(LatticeDomain, CrossingEvent)> {
    if n < 2 {
        return Err(invalid("rhombus side must be at least 2"));
    }
    let d = LatticeDomain::triangular_rhombus(n, 1.0 / n as f64)?;
    let side = |i: i64| -> Vec<usize> {
        (0..n as i64)
            .map(|j| d.site_index(SiteKey::new(i, j)).expect("rhombus site"))
            .collect()
    };
    let ev = CrossingEvent::new(side(0), side(n as i64 - 1))?;
    Ok((d, ev))
}

/// Window `[-1, 3] x [0, ~2]` on the upper half-plane, discretized at `mesh`,
/// with the arcs `[0, 1]` and `[2, inf)` on its boundary. The latter is the
/// bottom edge beyond 2 together with the part of the outer boundary right of
/// `x = 1`. The window is mirror-symmetric about `x = 1`, which exchanges the
/// two arcs with the complementary pair, so the white crossing has
/// probability exactly 1/2 whenever `1 / mesh` is an integer.
pub fn half_plane_crossing(mesh: f64) -> Result<(LatticeDomain, CrossingEvent)> {
    let (d, [a, _, c, _]) = half_plane_arcs(mesh)?;
    let ev = CrossingEvent::new(a, c)?;
    Ok((d, ev))
}

/// The window of [`half_plane_crossing`] with its four boundary arcs
/// `[0,1]`, `[1,2]`, `[2,inf)`, `(-inf,0]` in counterclockwise order. Sites
/// at the marks 0, 1, 2 (and the top site above 1) belong to both arcs that
/// meet there.
pub fn half_plane_arcs(mesh: f64) -> Result<(LatticeDomain, [Vec<usize>; 4])> {
    let unit = (1.0 / mesh).round();
    if !(mesh > 0.0) || (unit * mesh - 1.0).abs() > 1e-9 || unit < 2.0 {
        return Err(invalid("half-plane window needs 1/mesh to be an integer >= 2"));
    }
    let unit = unit as i64;
    // even top row so that a site sits exactly above the mark at x = 1
    let rows = (2.0 / (0.5 * 3f64.sqrt() * mesh)).round() as i64;
    let rows = rows + rows % 2;
    let mut keys = Vec::new();
    for j in 0..=rows {
        // x = (i + j/2) mesh in [-1, 3]  <=>  2i + j in [-2 unit, 6 unit]
        for i in -4 * unit - rows..=4 * unit {
            let twice = 2 * i + j;
            if twice >= -2 * unit && twice <= 6 * unit {
                keys.push(SiteKey::new(i, j));
            }
        }
    }
    let d = LatticeDomain::from_keys(LatticeKind::Triangular, mesh, keys)?;
    let tol = 1e-9;
    let mut arcs: [Vec<usize>; 4] = Default::default();
    for &s in d.boundary_sites() {
        let z = d.position(s);
        let x = z.re;
        if z.im.abs() < tol {
            if x > -tol && x < 1.0 + tol {
                arcs[0].push(s);
            }
            if x > 1.0 - tol && x < 2.0 + tol {
                arcs[1].push(s);
            }
            if x > 2.0 - tol {
                arcs[2].push(s);
            }
            if x < tol {
                arcs[3].push(s);
            }
        } else {
            if x > 1.0 - tol {
                arcs[2].push(s);
            }
            if x < 1.0 + tol {
                arcs[3].push(s);
            }
        }
    }
    Ok((d, arcs))
}

/// `2^{-k}` with `k` the number of hexagons adjacent to the loop: the
/// probability at `p = 1/2` that the loop is the outer boundary of an open
/// cluster (inner neighbors open, outer neighbors closed).
pub fn perco_loop_mass(lp: &HexLoop) -> f64 {
    0.5f64.powi(hex::neighbor_count(lp) as i32)
}

/// Snaps a polyline drawn on the honeycomb dual to a triangular lattice of
/// spacing `a` back to honeycomb corners.
pub fn hex_loop_from_path(path: &LoopPath, a: f64) -> Result<HexLoop> {
    let sqrt3 = 3f64.sqrt();
    let mut vertices = Vec::with_capacity(path.len());
    for (k, &z) in path.vertices().iter().enumerate() {
        // invert the centroid formula for both orientations
        let jf_up = z.im / (a * 0.5 * sqrt3) - 1.0 / 3.0;
        let jf_dn = z.im / (a * 0.5 * sqrt3) - 2.0 / 3.0;
        let mut found = None;
        for (sub, jf) in [(0u8, jf_up), (1u8, jf_dn)] {
            let j = jf.round();
            if (jf - j).abs() > 1e-6 {
                continue;
            }
            let i = z.re / a - 0.5 * j - if sub == 0 { 0.5 } else { 1.0 };
            if (i - i.round()).abs() < 1e-6 {
                found = Some(SiteKey {
                    i: i.round() as i64,
                    j: j as i64,
                    sub,
                });
            }
        }
        vertices.push(found.ok_or(Error::NotNearestNeighbor(k))?);
    }
    HexLoop::new(vertices)
}

/// Cluster-based weight `p^{#C} (1-p)^{#dC}` with `dC` the sites at unit
/// distance from the cluster.
pub fn cluster_mass(cluster: &[(i64, i64)], p: f64) -> f64 {
    let set: std::collections::HashSet<(i64, i64)> = cluster.iter().copied().collect();
    let mut rim: std::collections::HashSet<(i64, i64)> = std::collections::HashSet::new();
    for &(i, j) in &set {
        for (di, dj) in TRI_OFFSETS {
            let nb = (i + di, j + dj);
            if !set.contains(&nb) {
                rim.insert(nb);
            }
        }
    }
    p.powi(set.len() as i32) * (1.0 - p).powi(rim.len() as i32)
}

/// Outer boundaries of every open cluster of a triangular-lattice sample.
/// Sites outside the domain count as closed.
pub fn cluster_loops(domain: &LatticeDomain, open: &[bool]) -> Result<Vec<HexLoop>> {
    if domain.kind() != LatticeKind::Triangular {
        return Err(invalid("cluster boundaries are defined for triangular sites"));
    }
    find_site_clusters(domain.graph(), open)
        .into_iter()
        .map(|c| {
            let sites: Vec<(i64, i64)> = c.iter().map(|&s| (domain.key(s).i, domain.key(s).j)).collect();
            hex::trace_outer_boundary(&sites)
        })
        .collect()
}

/// One critical sample and all its cluster boundaries.
pub fn sample_cluster_loops(domain: &LatticeDomain, rng: &mut Rng) -> Result<Vec<HexLoop>> {
    let cfg = sample_site_percolation(domain, 0.5, rng)?;
    cluster_loops(domain, &cfg.open)
}

/// Occurrences of a translate of `target` as a cluster boundary, over the
/// translates whose whole neighborhood lies inside the domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopDensity {
    pub hits: u64,
    pub positions: u64,
    pub samples: u64,
}

impl LoopDensity {
    /// Occurrences per admissible position, with a Poisson-type error.
    pub fn estimate(&self) -> EstimateWithCI {
        let trials = (self.positions * self.samples).max(1);
        binomial_estimate(self.hits, trials)
    }
}

/// Empirical boundary-loop mass of `target` by direct loop extraction: every
/// translate of `target` whose neighboring hexagons all lie in the domain is a
/// position, and each sample counts the positions where the translate is the
/// outer boundary of an open cluster.
pub fn empirical_loop_density(domain: &LatticeDomain, target: &HexLoop, n_samples: u64, stream: RngStream) -> Result<LoopDensity> {
    if domain.kind() != LatticeKind::Triangular {
        return Err(invalid("loop density needs a triangular domain"));
    }
    let (inner, outer) = target.adjacent_split();
    let anchor = inner[0];
    // translates (di, dj) with all neighboring hexagons present
    let mut shifts: Vec<(i64, i64)> = Vec::new();
    for k in domain.keys() {
        let (di, dj) = (k.i - anchor.0, k.j - anchor.1);
        if inner
            .iter()
            .chain(outer.iter())
            .all(|&(i, j)| domain.site_index(SiteKey::new(i + di, j + dj)).is_some())
        {
            shifts.push((di, dj));
        }
    }
    if shifts.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let wanted: HashMap<Vec<SiteKey>, ()> = shifts
        .iter()
        .map(|&(di, dj)| (target.translate(di, dj).canonical(), ()))
        .collect();
    let counts = replicate(stream, n_samples, |_, rng| -> Result<u64> {
        let loops = sample_cluster_loops(domain, rng)?;
        Ok(loops
            .iter()
            .filter(|l| l.len() == target.len() && wanted.contains_key(&l.canonical()))
            .count() as u64)
    });
    let mut hits = 0;
    for c in counts {
        hits += c?;
    }
    Ok(LoopDensity {
        hits,
        positions: shifts.len() as u64,
        samples: n_samples,
    })
}

/// Diameters (in lattice units of the domain) of the open clusters.
pub fn cluster_diameters(domain: &LatticeDomain, open: &[bool]) -> Vec<f64> {
    find_site_clusters(domain.graph(), open)
        .iter()
        .map(|c| {
            let pts: Vec<Point> = c.iter().map(|&s| domain.position(s)).collect();
            crate::geometry::BBox::of(pts).map(|b| b.diameter()).unwrap_or(0.0)
        })
        .collect()
}
