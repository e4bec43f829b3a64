use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::geometry::{BBox, LoopPath, Point};
use crate::rng::Rng;

/// A sampled planar path on a time grid `0 = t_0 < ... < t_last = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarPath {
    times: Vec<f64>,
    points: Vec<Point>,
}

impl PlanarPath {
    pub fn new(times: Vec<f64>, points: Vec<Point>) -> Result<Self> {
        if times.len() != points.len() || times.len() < 2 {
            return Err(invalid("a path needs matching times and points, at least two of each"));
        }
        if times[0] != 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("times must start at 0 and increase"));
        }
        Ok(Self { times, points })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn duration(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Number of time steps.
    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }

    pub fn is_closed(&self) -> bool {
        self.points.first() == self.points.last()
    }

    pub fn root(&self) -> Point {
        self.points[0]
    }

    pub fn bbox(&self) -> BBox {
        BBox::of(self.points.iter().copied()).expect("nonempty path")
    }

    pub fn diameter(&self) -> f64 {
        self.bbox().diameter()
    }

    /// Position at time `t` by linear interpolation on the grid.
    pub fn at(&self, t: f64) -> Point {
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            return self.points[0];
        }
        if k == self.times.len() {
            return *self.points.last().unwrap();
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let s = (t - t0) / (t1 - t0);
        self.points[k - 1] + (self.points[k] - self.points[k - 1]) * s
    }

    /// Drops the repeated closing point of a closed path.
    pub fn to_loop_path(&self) -> Result<LoopPath> {
        let mut v = self.points.clone();
        if self.is_closed() {
            v.pop();
        }
        LoopPath::new(v)
    }
}

/// Unit-duration planar Brownian bridge from 0 to 0 on `steps` uniform
/// intervals: a walk with independent complex Gaussian increments of
/// per-coordinate variance `1/steps`, minus the linear interpolation of its
/// endpoint.
pub fn sample_brownian_bridge(steps: usize, rng: &mut Rng) -> Result<PlanarPath> {
    if steps < 2 {
        return Err(invalid("a bridge needs at least two steps"));
    }
    let sd = (1.0 / steps as f64).sqrt();
    let mut walk = Vec::with_capacity(steps + 1);
    let mut w = Point::new(0.0, 0.0);
    walk.push(w);
    for _ in 0..steps {
        let dx: f64 = rng.sample(StandardNormal);
        let dy: f64 = rng.sample(StandardNormal);
        w += Point::new(dx * sd, dy * sd);
        walk.push(w);
    }
    let end = w;
    let n = steps as f64;
    let points = walk.iter().enumerate().map(|(k, &p)| p - end * (k as f64 / n)).collect();
    let times = (0..=steps).map(|k| k as f64 / n).collect();
    Ok(PlanarPath { times, points })
}

/// `z + sqrt(T) * gamma(t / T)`: a loop of duration `T` rooted at `z`.
pub fn rescale_loop(gamma: &PlanarPath, z: Point, t: f64) -> Result<PlanarPath> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid("loop duration must be positive"));
    }
    let s = t.sqrt();
    Ok(PlanarPath {
        times: gamma.times.iter().map(|&u| u * t).collect(),
        points: gamma.points.iter().map(|&p| z + p * s).collect(),
    })
}
