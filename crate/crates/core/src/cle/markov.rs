use rand::Rng as _;

use crate::brownian::{sample_loop_soup, TimeCutoff};
use crate::error::{invalid, Error, Result};
use crate::geometry::{LoopPath, Point};
use crate::lattice::Shape;
use crate::rng::{Rng, RngStream};
use crate::stats::{chi_square_homogeneity, integer_histogram, ks_two_sample};

use super::config::{boundaries_of, Region, SimpleLoopConfig};

/// Anything that draws a simple loop configuration in a region.
pub trait EnsembleSampler: Sync {
    fn sample(&self, region: &Region, rng: &mut Rng) -> Result<SimpleLoopConfig>;
}

/// Always returns the empty configuration.
#[derive(Debug, Clone, Copy, Default)]
pub struct EmptySampler;

impl EnsembleSampler for EmptySampler {
    fn sample(&self, region: &Region, _rng: &mut Rng) -> Result<SimpleLoopConfig> {
        Ok(SimpleLoopConfig::empty(region.clone()))
    }
}

/// Outer boundaries of loop-soup clusters: a Brownian loop soup is drawn on
/// the region's base shape, loops meeting a hole are discarded, and the
/// remaining clusters are outlined at resolution `h`.
#[derive(Debug, Clone, Copy)]
pub struct SoupBoundarySampler {
    pub c: f64,
    pub cutoff: TimeCutoff,
    pub steps: usize,
    pub h: f64,
}

impl EnsembleSampler for SoupBoundarySampler {
    fn sample(&self, region: &Region, rng: &mut Rng) -> Result<SimpleLoopConfig> {
        let soup = sample_loop_soup(region.base(), self.c, self.cutoff, self.steps, rng)?;
        let kept: Vec<&[Point]> = soup.loops.iter().map(|l| l.points()).filter(|l| region.admits(l)).collect();
        boundaries_of(&kept, region.clone(), self.h)
    }
}

/// A sampler without the domain Markov property: a fixed number of
/// independent discs whose radii scale with the region's bounding box,
/// kept greedily when they fit in the region and miss every earlier disc.
#[derive(Debug, Clone, Copy)]
pub struct DiscDecoySampler {
    pub count: usize,
    /// Radius range as fractions of the bounding-box diagonal.
    pub radius: (f64, f64),
    pub vertices: usize,
}

impl EnsembleSampler for DiscDecoySampler {
    fn sample(&self, region: &Region, rng: &mut Rng) -> Result<SimpleLoopConfig> {
        let b = region.bbox();
        let diag = b.diameter();
        let mut discs: Vec<(Point, f64)> = Vec::new();
        let mut loops = Vec::new();
        for _ in 0..self.count {
            let c = Point::new(b.min.re + rng.random::<f64>() * b.width(), b.min.im + rng.random::<f64>() * b.height());
            let r = diag * (self.radius.0 + rng.random::<f64>() * (self.radius.1 - self.radius.0));
            if discs.iter().any(|&(c2, r2)| (c - c2).norm() <= r + r2) {
                continue;
            }
            let poly: Vec<Point> = (0..self.vertices)
                .map(|k| c + Point::from_polar(r, std::f64::consts::TAU * k as f64 / self.vertices as f64))
                .collect();
            if !region.admits(&poly) {
                continue;
            }
            discs.push((c, r));
            loops.push(LoopPath::new(poly)?);
        }
        SimpleLoopConfig::new(region.clone(), loops)
    }
}

/// Observable compared between original and resampled interiors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResampleStatistic {
    /// Loops with a vertex in the disc.
    ProbeCount { center: Point, radius: f64 },
    /// Area of the largest loop.
    LargestArea,
}

impl ResampleStatistic {
    pub fn evaluate(&self, loops: &[&LoopPath]) -> f64 {
        match *self {
            ResampleStatistic::ProbeCount { center, radius } => {
                loops.iter().filter(|l| l.vertices().iter().any(|&v| (v - center).norm() <= radius)).count() as f64
            }
            ResampleStatistic::LargestArea => loops.iter().map(|l| l.area()).fold(0.0, f64::max),
        }
    }

    fn is_count(&self) -> bool {
        matches!(self, ResampleStatistic::ProbeCount { .. })
    }
}

#[derive(Debug, Clone)]
pub struct ResampleReport {
    pub samples: u64,
    pub statistic: ResampleStatistic,
    pub original: Vec<f64>,
    pub resampled: Vec<f64>,
    pub p_value: f64,
    pub alpha: f64,
}

impl ResampleReport {
    pub fn passed(&self) -> bool {
        self.p_value > self.alpha
    }

    pub fn mean_original(&self) -> f64 {
        self.original.iter().sum::<f64>() / self.original.len().max(1) as f64
    }

    pub fn mean_resampled(&self) -> f64 {
        self.resampled.iter().sum::<f64>() / self.resampled.len().max(1) as f64
    }
}

fn on_boundary(shape: &Shape, p: Point, tol: f64) -> bool {
    match *shape {
        Shape::Disc { center, radius } => ((p - center).norm() - radius).abs() <= tol,
        _ => {
            let b = shape.bbox();
            shape.contains_with(p, tol)
                && ((p.re - b.min.re).abs() <= tol || (p.re - b.max.re).abs() <= tol || (p.im - b.min.im).abs() <= tol || (p.im - b.max.im).abs() <= tol)
        }
    }
}

fn perimeter_points(shape: &Shape, n: usize) -> Vec<Point> {
    match *shape {
        Shape::Disc { center, radius } => (0..n).map(|k| center + Point::from_polar(radius, std::f64::consts::TAU * k as f64 / n as f64)).collect(),
        _ => {
            let b = shape.bbox();
            let corners = [b.min, Point::new(b.max.re, b.min.im), b.max, Point::new(b.min.re, b.max.im)];
            let per = n / 4;
            (0..4).flat_map(|s| (0..per).map(move |k| corners[s] + (corners[(s + 1) % 4] - corners[s]) * (k as f64 / per as f64))).collect()
        }
    }
}

/// Checks that `sub` lies in `domain` and shares part of its boundary.
pub fn check_subdomain(domain: &Shape, sub: &Shape) -> Result<()> {
    let scale = domain.scale();
    let tol = 1e-9 * scale;
    let pts = perimeter_points(sub, 4096);
    if !pts.iter().all(|&p| domain.contains_with(p, tol)) {
        return Err(Error::DetachedSubdomain);
    }
    if !pts.iter().any(|&p| on_boundary(domain, p, tol)) {
        return Err(Error::DetachedSubdomain);
    }
    Ok(())
}

/// Resampling test of the domain Markov property.
///
/// Each replica draws a configuration in `domain`, splits its loops into
/// those leaving `sub` and those staying inside, removes the interiors of
/// the leaving loops from `sub`, redraws a configuration in what remains,
/// and records the statistic on the original inside loops and on the
/// redrawn loops that stay in `sub`. The two samples are compared with a
/// chi-square homogeneity test for counts and a two-sample
/// Kolmogorov-Smirnov test for areas.
pub fn markov_resample_test(
    sampler: &dyn EnsembleSampler,
    domain: &Shape,
    sub: &Shape,
    statistic: ResampleStatistic,
    samples: u64,
    stream: RngStream,
) -> Result<ResampleReport> {
    check_subdomain(domain, sub)?;
    if samples < 2 {
        return Err(invalid("need at least two replicas"));
    }
    let pairs = crate::rng::replicate(stream, samples, |_, rng| -> Result<(f64, f64)> {
        let gamma = sampler.sample(&Region::from(*domain), rng)?;
        let (inside, leaving): (Vec<&LoopPath>, Vec<&LoopPath>) =
            gamma.loops.iter().partition(|l| l.vertices().iter().all(|&v| sub.contains(v)));
        let reduced = Region::new(*sub, leaving.into_iter().cloned().collect());
        let again = sampler.sample(&reduced, rng)?;
        let again_inside: Vec<&LoopPath> = again.loops.iter().filter(|l| l.vertices().iter().all(|&v| sub.contains(v))).collect();
        Ok((statistic.evaluate(&inside), statistic.evaluate(&again_inside)))
    });
    let mut original = Vec::with_capacity(samples as usize);
    let mut resampled = Vec::with_capacity(samples as usize);
    for p in pairs {
        let (a, b) = p?;
        original.push(a);
        resampled.push(b);
    }
    let p_value = if original.iter().chain(resampled.iter()).all(|&x| x == original[0]) {
        1.0
    } else if statistic.is_count() {
        let bins = 1 + original.iter().chain(resampled.iter()).fold(0.0f64, |m, &x| m.max(x)) as usize;
        let ha = integer_histogram(original.iter().map(|&x| x as usize), bins);
        let hb = integer_histogram(resampled.iter().map(|&x| x as usize), bins);
        chi_square_homogeneity(&ha, &hb)?.p_value
    } else {
        ks_two_sample(&original, &resampled)?.1
    };
    Ok(ResampleReport { samples, statistic, original, resampled, p_value, alpha: 0.001 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn halves() -> (Shape, Shape) {
        (Shape::unit_square(), Shape::Rectangle { min: Point::new(0.0, 0.0), max: Point::new(0.5, 1.0) })
    }

    fn probe() -> ResampleStatistic {
        ResampleStatistic::ProbeCount { center: Point::new(0.25, 0.5), radius: 0.15 }
    }

    #[test]
    fn subdomain_precondition() {
        let (d, sub) = halves();
        assert!(check_subdomain(&d, &sub).is_ok());
        let floating = Shape::Rectangle { min: Point::new(0.2, 0.2), max: Point::new(0.4, 0.4) };
        assert_eq!(check_subdomain(&d, &floating).unwrap_err(), Error::DetachedSubdomain);
        let outside = Shape::Rectangle { min: Point::new(0.5, 0.5), max: Point::new(1.5, 1.0) };
        assert_eq!(check_subdomain(&d, &outside).unwrap_err(), Error::DetachedSubdomain);
        let r = markov_resample_test(&EmptySampler, &d, &floating, probe(), 10, RngStream::new(0, 0));
        assert!(r.is_err());
    }

    #[test]
    fn empty_sampler_passes() {
        let (d, sub) = halves();
        let r = markov_resample_test(&EmptySampler, &d, &sub, probe(), 50, RngStream::new(0, 0)).unwrap();
        assert!(r.passed());
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn decoy_fails() {
        let (d, sub) = halves();
        let decoy = DiscDecoySampler { count: 30, radius: (0.02, 0.08), vertices: 24 };
        let r = markov_resample_test(&decoy, &d, &sub, probe(), 2000, RngStream::new(1, 0)).unwrap();
        assert!(!r.passed(), "p = {}", r.p_value);
    }

    #[test]
    fn soup_boundaries_pass() {
        let (d, sub) = halves();
        let s = SoupBoundarySampler { c: 0.5, cutoff: TimeCutoff::new(0.002, 0.1).unwrap(), steps: 32, h: 0.01 };
        let r = markov_resample_test(&s, &d, &sub, probe(), 1000, RngStream::new(2, 0)).unwrap();
        assert!(r.passed(), "p = {} means {} {}", r.p_value, r.mean_original(), r.mean_resampled());
    }
}
