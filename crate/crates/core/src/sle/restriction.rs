//! Monte Carlo estimate of the restriction functional
//!
//! `a(Φ) = mu{ loops in the disc surrounding 0 that do not fit in Φ(U) }`
//!
//! for maps built from slits. A loop fails to fit in `Φ(U)` exactly when it
//! meets the set removed by `Φ`; since that set is attached to the unit
//! circle and the loop lies in the open disc, meeting the loop's filled
//! hull and meeting the loop itself are the same event, so the test runs on
//! the loop polyline against the removed segments.

use rand::Rng as _;

use crate::brownian::{outer_boundary, rescale_loop, sample_brownian_bridge, TimeCutoff};
use crate::error::{invalid, Error, Result};
use crate::geometry::{winding_number, Point};
use crate::lattice::{LatticeDomain, LatticeKind, Shape};
use crate::percolation::sample_cluster_loops;
use crate::rng::{replicate, Rng, RngStream};
use crate::stats::EstimateWithCI;

use super::maps::ConformalMap;

/// A source of loops approximating the loop measure restricted to loops in
/// the unit disc that surround 0.
pub trait LoopSource: Sync {
    /// Measure carried by one draw.
    fn draw_mass(&self) -> f64;
    /// The loops of one draw that lie in the open unit disc and surround 0.
    fn draw(&self, rng: &mut Rng) -> Result<Vec<Vec<Point>>>;
}

/// Brownian loops of the unit-intensity loop measure with durations in the
/// cutoff window, rooted uniformly in the disc. A loop surrounds 0 when 0
/// lies in its filled hull.
#[derive(Debug, Clone, Copy)]
pub struct BrownianHullSource {
    pub cutoff: TimeCutoff,
    pub steps: usize,
}

fn surrounds_origin(path: &crate::brownian::PlanarPath) -> Result<bool> {
    let o = Point::new(0.0, 0.0);
    let pts = path.points();
    match winding_number(pts, o) {
        None => return Ok(false),
        Some(w) if w != 0 => return Ok(true),
        _ => {}
    }
    if !path.bbox().contains(o) {
        return Ok(false);
    }
    let h = crate::brownian::diffusive_resolution(path);
    match outer_boundary(path, h) {
        Ok(b) => Ok(winding_number(b.vertices(), o).is_some_and(|w| w != 0)),
        Err(Error::Degenerate(_)) => Ok(false),
        Err(e) => Err(e),
    }
}

impl LoopSource for BrownianHullSource {
    fn draw_mass(&self) -> f64 {
        std::f64::consts::PI * self.cutoff.time_mass()
    }

    fn draw(&self, rng: &mut Rng) -> Result<Vec<Vec<Point>>> {
        let root = loop {
            let p = Point::new(2.0 * rng.random::<f64>() - 1.0, 2.0 * rng.random::<f64>() - 1.0);
            if p.norm_sqr() < 1.0 {
                break p;
            }
        };
        let t = self.cutoff.sample_duration(rng);
        let bridge = sample_brownian_bridge(self.steps, rng)?;
        let path = rescale_loop(&bridge, root, t)?;
        if path.points().iter().any(|p| p.norm_sqr() >= 1.0) || !surrounds_origin(&path)? {
            return Ok(Vec::new());
        }
        let mut pts = path.points().to_vec();
        pts.pop();
        Ok(vec![pts])
    }
}

/// Outer boundaries of open clusters of critical site percolation on the
/// triangular lattice of mesh `mesh` in the unit disc; clusters reaching
/// the outermost sites are dropped. Each draw is one configuration, so the
/// estimate is the mean number of boundaries per configuration.
#[derive(Debug, Clone)]
pub struct PercolationHullSource {
    domain: LatticeDomain,
}

impl PercolationHullSource {
    pub fn new(mesh: f64) -> Result<Self> {
        Ok(Self { domain: LatticeDomain::build(LatticeKind::Triangular, Shape::unit_disc(), mesh)? })
    }

    pub fn mesh(&self) -> f64 {
        self.domain.mesh()
    }
}

impl LoopSource for PercolationHullSource {
    fn draw_mass(&self) -> f64 {
        1.0
    }

    fn draw(&self, rng: &mut Rng) -> Result<Vec<Vec<Point>>> {
        let mesh = self.domain.mesh();
        let limit = 1.0 - 1.5 * mesh;
        let o = Point::new(0.0, 0.0);
        Ok(sample_cluster_loops(&self.domain, rng)?
            .into_iter()
            .map(|l| l.path(mesh).vertices().to_vec())
            .filter(|v| v.iter().all(|p| p.norm() < limit) && winding_number(v, o).is_some_and(|w| w != 0))
            .collect())
    }
}

/// Draws per random substream; fixed so results do not depend on the
/// number of threads.
const CHUNK: u64 = 4096;

/// Exclusion counts for several maps on common draws. Only draws that
/// produced a surrounding loop are stored; the others count as zero rows.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictionSample {
    pub draw_mass: f64,
    pub draws: u64,
    /// `rows[i][k]`: loops of the `i`-th stored draw not fitting in the
    /// image of map `k`.
    pub rows: Vec<Vec<u32>>,
    /// Loops surrounding 0 in each stored draw.
    pub surrounding: Vec<u32>,
}

impl RestrictionSample {
    /// `sum_k coef_k a(Φ_k)` with the paired standard error.
    pub fn combination(&self, coefs: &[(usize, f64)]) -> EstimateWithCI {
        let (mut s, mut s2) = (0.0, 0.0);
        for row in &self.rows {
            let x: f64 = coefs.iter().map(|&(k, c)| c * row[k] as f64).sum();
            s += x;
            s2 += x * x;
        }
        let n = self.draws as f64;
        let mean = s / n;
        let var = if self.draws > 1 { ((s2 - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
        EstimateWithCI::new(self.draw_mass * mean, self.draw_mass * (var / n).sqrt(), self.draws)
    }

    pub fn estimate(&self, k: usize) -> EstimateWithCI {
        self.combination(&[(k, 1.0)])
    }
}

/// Draws `n` times from `source` and counts, for every map, the loops that
/// do not fit in its image. Every map sees the same loops.
pub fn sample_restriction(source: &dyn LoopSource, maps: &[ConformalMap], n: u64, stream: RngStream) -> Result<RestrictionSample> {
    if n == 0 {
        return Err(invalid("need at least one draw"));
    }
    if maps.iter().any(|m| m.derivative_at_zero().is_none()) {
        return Err(invalid("maps must fix 0 with positive derivative"));
    }
    let chunks = replicate(stream, n.div_ceil(CHUNK), |c, rng| -> Result<Vec<(Vec<u32>, u32)>> {
        let mut out = Vec::new();
        for _ in 0..CHUNK.min(n - c * CHUNK) {
            let loops = source.draw(rng)?;
            if !loops.is_empty() {
                let counts = maps.iter().map(|m| loops.iter().filter(|l| m.excludes(l)).count() as u32).collect();
                out.push((counts, loops.len() as u32));
            }
        }
        Ok(out)
    });
    let mut rows = Vec::new();
    let mut surrounding = Vec::new();
    for chunk in chunks {
        for (c, s) in chunk? {
            rows.push(c);
            surrounding.push(s);
        }
    }
    Ok(RestrictionSample { draw_mass: source.draw_mass(), draws: n, rows, surrounding })
}

/// `a(Φ)` for one map.
pub fn estimate_a_functional(source: &dyn LoopSource, map: &ConformalMap, n: u64, stream: RngStream) -> Result<EstimateWithCI> {
    Ok(sample_restriction(source, std::slice::from_ref(map), n, stream)?.estimate(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sle::maps::radial_slit_map;

    fn source() -> BrownianHullSource {
        BrownianHullSource { cutoff: TimeCutoff::new(0.01, 4.0).unwrap(), steps: 128 }
    }

    #[test]
    fn identity_excludes_nothing() {
        let s = source();
        assert!(estimate_a_functional(&s, &ConformalMap::identity(), 0, RngStream::new(0, 0)).is_err());
        let e = estimate_a_functional(&s, &ConformalMap::identity(), 2000, RngStream::new(0, 0)).unwrap();
        assert_eq!(e.mean, 0.0);
    }

    #[test]
    fn drawn_loops_surround_the_origin() {
        let s = source();
        let mut rng = RngStream::new(1, 0).rng();
        let mut seen = 0;
        for _ in 0..3000 {
            for l in s.draw(&mut rng).unwrap() {
                seen += 1;
                assert!(l.iter().all(|p| p.norm() < 1.0));
                let b = crate::geometry::BBox::of(l.iter().copied()).unwrap();
                assert!(b.contains(Point::new(0.0, 0.0)));
            }
        }
        assert!(seen > 0);
    }

    #[test]
    fn longer_slits_exclude_more() {
        let d = Point::new(1.0, 0.0);
        let maps: Vec<_> = [0.1, 0.3].iter().map(|&t| radial_slit_map(t, d).unwrap()).collect();
        let r = sample_restriction(&source(), &maps, 20_000, RngStream::new(2, 0)).unwrap();
        // pathwise: the longer slit contains the shorter one
        assert!(r.rows.iter().all(|c| c[0] <= c[1]));
        assert!(r.estimate(1).mean > r.estimate(0).mean);
    }

    #[test]
    fn percolation_source_yields_surrounding_boundaries() {
        let s = PercolationHullSource::new(0.05).unwrap();
        let mut rng = RngStream::new(3, 0).rng();
        let total: usize = (0..20).map(|_| s.draw(&mut rng).unwrap().len()).sum();
        assert!(total > 0);
    }
}
