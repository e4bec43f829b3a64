//! Level lines of the field plus harmonic boundary data that jumps at a
//! marked boundary point.
//!
//! On a `W x H` square grid the bottom row is split at the middle: sites to
//! the right carry height `lambda`, sites to the left 0, and the remaining
//! boundary sites carry `lambda (1 - arg(z) / pi)` with `z` measured from
//! the split point. The interface separates sites with `F >= lambda / 2`
//! from the others.

use crate::error::{invalid, Error, Result};
use crate::geometry::Point;
use crate::rng::{replicate, Rng, RngStream};
use crate::sle::DrivingFunction;
use crate::stats::Welford;

use super::{green_matrix, Dirichlet, GffDomain, GreenMatrix};

/// The grid with its Green factor and the harmonic boundary profile for
/// `lambda = 1`, both computed once.
#[derive(Debug, Clone)]
pub struct LevelLineDomain {
    width: usize,
    height: usize,
    domain: GffDomain,
    green: GreenMatrix,
    profile: Vec<f64>,
}

impl LevelLineDomain {
    /// `width` must be even so the split falls between two sites.
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width < 4 || width % 2 != 0 || height < 3 {
            return Err(invalid("level lines need an even width >= 4 and height >= 3"));
        }
        let domain = GffDomain::rectangle(width - 2, height - 2)?;
        let green = green_matrix(&domain)?;
        let mut profile = vec![0.0; domain.len()];
        for (s, p) in profile.iter_mut().enumerate() {
            if domain.is_boundary(s) {
                let z = Self::coords(width, s);
                *p = if z.im == 0.0 {
                    if z.re > 0.0 { 1.0 } else { 0.0 }
                } else {
                    1.0 - z.arg() / std::f64::consts::PI
                };
            }
        }
        Dirichlet::new(domain.graph(), domain.interior().to_vec())?.extend(domain.graph(), &mut profile);
        Ok(Self { width, height, domain, green, profile })
    }

    fn coords(width: usize, s: usize) -> Point {
        let (x, y) = (s % width, s / width);
        Point::new(x as f64 - (width as f64 - 1.0) / 2.0, y as f64)
    }

    /// Position of a site, with the split point at the origin.
    pub fn position(&self, s: usize) -> Point {
        Self::coords(self.width, s)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn domain(&self) -> &GffDomain {
        &self.domain
    }

    /// Harmonic extension of the boundary data at `lambda = 1`.
    pub fn profile(&self) -> &[f64] {
        &self.profile
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelLine {
    /// Midpoints of the crossed primal edges, starting at the origin.
    pub points: Vec<Point>,
    /// The explored height function `F = h + lambda * profile`.
    pub heights: Vec<f64>,
}

impl LevelLine {
    /// Mean of `|x|` over the interface.
    pub fn mean_displacement(&self) -> f64 {
        self.points.iter().map(|p| p.re.abs()).sum::<f64>() / self.points.len() as f64
    }
}

/// Samples a field and follows the interface from the origin until it
/// leaves through another boundary edge. The walker keeps the high side on
/// its right; at each plaquette it turns right if the site ahead on the
/// right is low, turns left if the site ahead on the left is high, and goes
/// straight otherwise.
pub fn level_line_explore(dom: &LevelLineDomain, lambda: f64, rng: &mut Rng) -> Result<LevelLine> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(invalid("lambda must be positive"));
    }
    let h = dom.green.sample(rng);
    let heights: Vec<f64> = h.values.iter().zip(&dom.profile).map(|(a, p)| a + lambda * p).collect();
    let points = explore(dom, &heights, lambda / 2.0)?;
    Ok(LevelLine { points, heights })
}

fn explore(dom: &LevelLineDomain, heights: &[f64], level: f64) -> Result<Vec<Point>> {
    let (w, hgt) = (dom.width as i64, dom.height as i64);
    let idx = |(x, y): (i64, i64)| (y * w + x) as usize;
    let inside = |(x, y): (i64, i64)| x >= 0 && y >= 0 && x < w && y < hgt;
    let high = |s: (i64, i64)| heights[idx(s)] >= level;
    let on_boundary = |s: (i64, i64)| dom.domain.is_boundary(idx(s));
    let mid = |a: (i64, i64), b: (i64, i64)| (dom.position(idx(a)) + dom.position(idx(b))) * 0.5;

    let (mut l, mut r, mut d) = ((w / 2 - 1, 0), (w / 2, 0), (0i64, 1i64));
    let mut points = vec![mid(l, r)];
    let limit = 2 * dom.domain.graph().edge_count();
    for _ in 0..limit {
        let (la, ra) = ((l.0 + d.0, l.1 + d.1), (r.0 + d.0, r.1 + d.1));
        if !inside(la) || !inside(ra) {
            return Ok(points);
        }
        if !high(ra) {
            (l, d) = (ra, (d.1, -d.0));
        } else if high(la) {
            (r, d) = (la, (-d.1, d.0));
        } else {
            (l, r) = (la, ra);
        }
        points.push(mid(l, r));
        if on_boundary(l) && on_boundary(r) {
            return Ok(points);
        }
    }
    Err(Error::Trapped(l))
}

/// Driving function of a curve in the upper half-plane from 0, recovered by
/// unzipping: each point is sent to the tip of a vertical slit which is
/// then mapped out, and the remaining points follow.
#[derive(Debug, Clone)]
pub struct DrivingDiagnostic {
    pub driving: DrivingFunction,
    /// Quadratic variation of the driving divided by the total time.
    pub kappa_estimate: f64,
}

pub fn driving_diagnostic(curve: &[Point]) -> Result<DrivingDiagnostic> {
    if curve.len() < 2 || curve[0] != Point::new(0.0, 0.0) {
        return Err(invalid("curve must start at the origin and have a step"));
    }
    if curve[1..].iter().any(|p| !(p.im > 0.0)) {
        return Err(invalid("curve must stay in the open upper half-plane after its start"));
    }
    let mut pts: Vec<Point> = curve[1..].to_vec();
    let (mut times, mut values) = (vec![0.0], vec![0.0]);
    for k in 0..pts.len() {
        let p = pts[k];
        let (da, dt) = (-p.re, p.im * p.im / 4.0);
        if !(dt > 0.0) {
            return Err(Error::Numerical { index: k + 1, reason: "curve point mapped to the real axis".into() });
        }
        for q in &mut pts[k + 1..] {
            *q = crate::sle::forward_step(*q, da, dt);
        }
        times.push(times[k] + dt);
        values.push(values[k] + da);
    }
    let t = *times.last().unwrap_or(&0.0);
    let qv: f64 = values.windows(2).map(|v| (v[1] - v[0]).powi(2)).sum();
    let driving = DrivingFunction::new(0.0, times, values)?;
    Ok(DrivingDiagnostic { driving, kappa_estimate: qv / t })
}

/// Mean driving-variance estimate of level lines for each `lambda`.
pub fn lambda_sweep(dom: &LevelLineDomain, lambdas: &[f64], n: u64, stream: RngStream) -> Result<Vec<(f64, crate::EstimateWithCI)>> {
    lambdas
        .iter()
        .enumerate()
        .map(|(i, &lambda)| {
            let runs = replicate(stream.substream(i as u64), n, |_, rng| -> Result<f64> {
                let line = level_line_explore(dom, lambda, rng)?;
                Ok(driving_diagnostic(&line.points)?.kappa_estimate)
            });
            let mut w = Welford::new();
            for r in runs {
                w.push(r?);
            }
            Ok((lambda, w.estimate()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::segments_intersect;
    use crate::sle::{compute_trace, sample_driving};

    #[test]
    fn profile_is_antisymmetric_about_the_split() {
        let dom = LevelLineDomain::new(12, 8).unwrap();
        for s in 0..dom.domain().len() {
            let (x, y) = (s % 12, s / 12);
            let m = y * 12 + (11 - x);
            assert!((dom.profile()[s] + dom.profile()[m] - 1.0).abs() < 1e-12);
        }
        assert!(LevelLineDomain::new(11, 8).is_err());
    }

    #[test]
    fn huge_lambda_goes_straight_up() {
        let dom = LevelLineDomain::new(16, 10).unwrap();
        let line = level_line_explore(&dom, 1e9, &mut RngStream::new(0, 0).rng()).unwrap();
        assert_eq!(line.mean_displacement(), 0.0);
        assert_eq!(line.points.len(), 10);
        assert_eq!(line.points[9], Point::new(0.0, 9.0));
    }

    #[test]
    fn interfaces_are_simple_paths() {
        let dom = LevelLineDomain::new(20, 12).unwrap();
        for seed in 0..20 {
            let line = level_line_explore(&dom, 1.0, &mut RngStream::new(seed, 0).rng()).unwrap();
            let p = &line.points;
            assert!(p.len() >= 10);
            for i in 0..p.len() - 1 {
                // consecutive midpoints share a plaquette
                assert!((p[i + 1] - p[i]).norm() < 1.0 + 1e-12);
                for j in i + 2..p.len() - 1 {
                    assert!(p[i] != p[j]);
                    assert!(!segments_intersect(p[i], p[i + 1], p[j], p[j + 1]), "seed {seed}: {i} {j}");
                }
            }
            let end = p[p.len() - 1];
            assert!(end.im >= 10.5 || end.re.abs() >= 8.5, "{end}");
        }
    }

    #[test]
    fn unzipping_recovers_a_loewner_trace() {
        let mut rng = RngStream::new(3, 0).rng();
        let d = sample_driving(3.0, 1.0, 1e-3, &mut rng).unwrap();
        let tr = compute_trace(&d).unwrap();
        let diag = driving_diagnostic(&tr.points).unwrap();
        let back = &diag.driving;
        assert_eq!(back.steps(), d.steps());
        for k in 0..d.steps() {
            let (a, b) = (back.step(k), d.step(k));
            assert!((a.0 - b.0).abs() < 1e-6 && (a.1 - b.1).abs() < 1e-9, "{k}: {a:?} {b:?}");
        }
        assert!((diag.kappa_estimate - 3.0).abs() < 0.5);
        assert!(driving_diagnostic(&[Point::new(0.0, 0.0), Point::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn sweep_reports_each_lambda() {
        let dom = LevelLineDomain::new(12, 8).unwrap();
        let out = lambda_sweep(&dom, &[0.5, 2.0], 20, RngStream::new(4, 0)).unwrap();
        assert_eq!(out.len(), 2);
        assert!(out.iter().all(|(_, e)| e.mean > 0.0 && e.mean.is_finite()));
    }
}
