use rand::Rng as _;
use rand_distr::{Distribution, Poisson};

use crate::error::{invalid, Result};
use crate::geometry::{BBox, Point};
use crate::lattice::Shape;
use crate::rng::{Rng, RngStream};

use super::{rescale_loop, sample_brownian_bridge, PlanarPath};

/// Loops of duration in `[t_min, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeCutoff {
    pub t_min: f64,
    pub t_max: f64,
}

impl TimeCutoff {
    pub fn new(t_min: f64, t_max: f64) -> Result<Self> {
        if !(t_min > 0.0) {
            return Err(invalid("minimal loop duration must be positive"));
        }
        if !(t_max > t_min) || t_max.is_nan() {
            return Err(invalid("duration window must satisfy t_min < t_max"));
        }
        Ok(Self { t_min, t_max })
    }

    /// `∫ dT / (2 pi T^2)` over the window.
    pub fn time_mass(&self) -> f64 {
        let hi = if self.t_max.is_finite() { 1.0 / self.t_max } else { 0.0 };
        (1.0 / self.t_min - hi) / (2.0 * std::f64::consts::PI)
    }

    /// Inverse-CDF draw from the density proportional to `T^-2`.
    pub fn sample_duration(&self, rng: &mut Rng) -> f64 {
        let u: f64 = rng.random();
        let hi = if self.t_max.is_finite() { 1.0 / self.t_max } else { 0.0 };
        1.0 / (1.0 / self.t_min - u * (1.0 / self.t_min - hi))
    }

    /// Window scaled by `s^2`, matching a spatial scaling by `s`.
    pub fn scaled(&self, s: f64) -> TimeCutoff {
        TimeCutoff { t_min: self.t_min * s * s, t_max: self.t_max * s * s }
    }
}

/// A Poisson sample of Brownian loops of intensity `c` in a bounded domain.
///
/// Candidates are drawn from `c` times the loop measure over the domain's
/// bounding box and the duration window; only loops lying entirely in the
/// domain are kept. Each kept loop carries an independent uniform mark, so
/// [`LoopSoup::thin`] yields the soup at any lower intensity on the same
/// probability space.
#[derive(Debug, Clone)]
pub struct LoopSoup {
    pub c: f64,
    pub cutoff: TimeCutoff,
    pub domain: Shape,
    pub steps: usize,
    pub loops: Vec<PlanarPath>,
    pub marks: Vec<f64>,
    /// Poisson number of candidates drawn over the bounding box.
    pub candidates: u64,
}

impl LoopSoup {
    pub fn count(&self) -> usize {
        self.loops.len()
    }

    pub fn bounding_box(&self) -> BBox {
        self.domain.bbox()
    }

    /// Expected number of candidates: `c * area(box) * time_mass`.
    pub fn candidate_mass(&self) -> f64 {
        let b = self.bounding_box();
        self.c * b.width() * b.height() * self.cutoff.time_mass()
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.candidates == 0 {
            0.0
        } else {
            self.loops.len() as f64 / self.candidates as f64
        }
    }

    /// Soup of intensity `c2 <= c` obtained by keeping loops with mark below
    /// `c2 / c`.
    pub fn thin(&self, c2: f64) -> Result<LoopSoup> {
        if !(0.0..=self.c).contains(&c2) {
            return Err(invalid("thinning needs 0 <= c2 <= c"));
        }
        let ratio = if self.c > 0.0 { c2 / self.c } else { 0.0 };
        let keep: Vec<usize> = (0..self.loops.len()).filter(|&k| self.marks[k] < ratio).collect();
        Ok(LoopSoup {
            c: c2,
            cutoff: self.cutoff,
            domain: self.domain.clone(),
            steps: self.steps,
            loops: keep.iter().map(|&k| self.loops[k].clone()).collect(),
            marks: keep.iter().map(|&k| self.marks[k] / ratio).collect(),
            candidates: self.candidates,
        })
    }
}

fn candidate(domain: &Shape, bbox: &BBox, cutoff: &TimeCutoff, steps: usize, rng: &mut Rng) -> Result<Option<PlanarPath>> {
    let z = Point::new(
        bbox.min.re + rng.random::<f64>() * bbox.width(),
        bbox.min.im + rng.random::<f64>() * bbox.height(),
    );
    let t = cutoff.sample_duration(rng);
    let gamma = sample_brownian_bridge(steps, rng)?;
    let l = rescale_loop(&gamma, z, t)?;
    Ok(if l.points().iter().all(|&p| domain.contains(p)) { Some(l) } else { None })
}

/// Loop soup of intensity `c` in `domain`, loops discretized with `steps`
/// time steps. Candidates are generated in parallel on child streams keyed
/// by a seed drawn from `rng`, so the result depends only on `rng`.
pub fn sample_loop_soup(domain: &Shape, c: f64, cutoff: TimeCutoff, steps: usize, rng: &mut Rng) -> Result<LoopSoup> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(invalid("intensity must be a nonnegative number"));
    }
    TimeCutoff::new(cutoff.t_min, cutoff.t_max)?;
    let bbox = domain.bbox();
    let mass = c * bbox.width() * bbox.height() * cutoff.time_mass();
    let candidates = if mass > 0.0 {
        Poisson::new(mass).map_err(|e| invalid(e.to_string()))?.sample(rng) as u64
    } else {
        0
    };
    let base = RngStream::new(rng.random(), 0);
    let drawn = crate::rng::replicate(base, candidates, |_, r| {
        candidate(domain, &bbox, &cutoff, steps, r).map(|l| l.map(|l| (l, r.random::<f64>())))
    });
    let mut loops = Vec::new();
    let mut marks = Vec::new();
    for d in drawn {
        if let Some((l, m)) = d? {
            loops.push(l);
            marks.push(m);
        }
    }
    Ok(LoopSoup { c, cutoff, domain: domain.clone(), steps, loops, marks, candidates })
}

/// Independent rejection estimate of the loop-measure mass (per unit
/// intensity) of loops inside `domain` within the duration window:
/// `area(box) * time_mass * P(candidate stays inside)`.
pub fn estimate_domain_mass(domain: &Shape, cutoff: TimeCutoff, steps: usize, trials: u64, stream: RngStream) -> Result<crate::stats::EstimateWithCI> {
    let bbox = domain.bbox();
    let kept = crate::rng::replicate(stream, trials, |_, r| candidate(domain, &bbox, &cutoff, steps, r).map(|l| l.is_some()));
    let mut hits = 0u64;
    for k in kept {
        if k? {
            hits += 1;
        }
    }
    let scale = bbox.width() * bbox.height() * cutoff.time_mass();
    let p = crate::stats::binomial_estimate(hits, trials);
    Ok(crate::stats::EstimateWithCI::new(p.mean * scale, p.std_error * scale, trials))
}
