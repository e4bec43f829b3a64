//! Chordal Loewner chains in the upper half-plane with the tip sent to 0:
//! `f_t(z) = z + a_0(t) + 2t/z + ...`. The driving function is held constant
//! on each step, so a step is the exact map `w -> sqrt((w + da)^2 + 4 dt)`:
//! shift by the increment, then open a vertical slit of half-plane capacity
//! `2 dt` at the origin. The tip of that slit lands on 0.

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::geometry::Point;
use crate::rng::Rng;

use super::maps::upper_sqrt;

#[derive(Debug, Clone, PartialEq)]
pub struct DrivingFunction {
    pub kappa: f64,
    pub times: Vec<f64>,
    /// `a_0(t_i)`.
    pub values: Vec<f64>,
}

impl DrivingFunction {
    pub fn new(kappa: f64, times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if !(kappa >= 0.0) {
            return Err(invalid("kappa must be nonnegative"));
        }
        if times.len() != values.len() || times.len() < 2 {
            return Err(invalid("driving needs matching times and values on at least one step"));
        }
        if times[0] != 0.0 || values[0] != 0.0 {
            return Err(invalid("driving starts at a_0(0) = 0"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) || values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("driving times must increase and values be finite"));
        }
        Ok(Self { kappa, times, values })
    }

    /// Identically zero driving on `steps` equal steps up to `t_max`.
    pub fn zero(t_max: f64, steps: usize) -> Result<Self> {
        if !(t_max > 0.0) || steps == 0 {
            return Err(invalid("zero driving needs a positive horizon and steps"));
        }
        let times = (0..=steps).map(|k| t_max * k as f64 / steps as f64).collect();
        Self::new(0.0, times, vec![0.0; steps + 1])
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn t_max(&self) -> f64 {
        self.times[self.steps()]
    }

    /// Increment and duration of step `k`.
    pub fn step(&self, k: usize) -> (f64, f64) {
        (self.values[k + 1] - self.values[k], self.times[k + 1] - self.times[k])
    }

    pub fn is_uniform(&self) -> bool {
        let dt = self.t_max() / self.steps() as f64;
        (0..self.steps()).all(|k| (self.step(k).1 - dt).abs() <= 1e-9 * dt)
    }

    /// Driving of the rescaled chain `lambda f_{t / lambda^2}(z / lambda)`.
    pub fn rescaled(&self, lambda: f64) -> Self {
        Self {
            kappa: self.kappa,
            times: self.times.iter().map(|t| t * lambda * lambda).collect(),
            values: self.values.iter().map(|a| a * lambda).collect(),
        }
    }
}

/// Brownian driving `a_0(t) = beta(kappa t)` on a uniform grid. The step is
/// adjusted so that a whole number of steps ends exactly at `t_max`.
pub fn sample_driving(kappa: f64, t_max: f64, dt: f64, rng: &mut Rng) -> Result<DrivingFunction> {
    if !(kappa >= 0.0) || !(dt > 0.0) || !(t_max > 0.0) {
        return Err(invalid("driving needs kappa >= 0 and positive time step and horizon"));
    }
    let steps = ((t_max / dt).round() as usize).max(1);
    let h = t_max / steps as f64;
    let sd = (kappa * h).sqrt();
    let mut times = Vec::with_capacity(steps + 1);
    let mut values = Vec::with_capacity(steps + 1);
    let mut a = 0.0;
    times.push(0.0);
    values.push(0.0);
    for k in 1..=steps {
        let z: f64 = rng.sample(StandardNormal);
        a += sd * z;
        times.push(t_max * k as f64 / steps as f64);
        values.push(a);
    }
    DrivingFunction::new(kappa, times, values)
}

#[inline]
pub(crate) fn forward_step(w: Point, da: f64, dt: f64) -> Point {
    let v = w + da;
    upper_sqrt(v * v + 4.0 * dt, v.re)
}

#[inline]
pub(crate) fn inverse_step(w: Point, da: f64, dt: f64) -> Point {
    upper_sqrt(w * w - 4.0 * dt, w.re) - da
}

/// `f_t(z)` for `z` in the closed upper half-plane minus 0. A time between
/// grid points uses a partial last step with a proportional increment.
///
/// An interior point is absorbed when its image reaches the real axis; a
/// real point is absorbed when the driving carries 0 past it.
pub fn loewner_map(driving: &DrivingFunction, z: Point, t: f64) -> Result<Point> {
    if !(z.im >= 0.0) || z == Point::new(0.0, 0.0) {
        return Err(invalid("point must lie in the closed upper half-plane away from 0"));
    }
    if !(t >= 0.0) || t > driving.t_max() * (1.0 + 1e-12) {
        return Err(invalid("time outside the driving horizon"));
    }
    let interior = z.im > 0.0;
    let mut w = z;
    for k in 0..driving.steps() {
        let t0 = driving.times[k];
        if t0 >= t {
            break;
        }
        let (mut da, mut dt) = driving.step(k);
        if driving.times[k + 1] > t {
            let frac = (t - t0) / dt;
            da *= frac;
            dt = t - t0;
        }
        let t_end = t0 + dt;
        if interior {
            w = forward_step(w, da, dt);
            if !(w.im > 1e-14 * (1.0 + w.norm())) {
                return Err(Error::Absorbed { time: t_end });
            }
        } else {
            let v = w.re + da;
            if v == 0.0 || v.signum() != w.re.signum() {
                return Err(Error::Absorbed { time: t_end });
            }
            w = Point::new(v.signum() * (v * v + 4.0 * dt).sqrt(), 0.0);
        }
    }
    Ok(w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoewnerTrace {
    pub times: Vec<f64>,
    /// `gamma(t_i) = f_{t_i}^{-1}(0)`; `points[0] = 0`.
    pub points: Vec<Point>,
    /// Steps whose tip had to be recomputed with the last step halved.
    pub subdivided: Vec<usize>,
}

impl LoewnerTrace {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Smallest imaginary part over the trace after time 0.
    pub fn min_height(&self) -> f64 {
        self.points.iter().skip(1).map(|p| p.im).fold(f64::INFINITY, f64::min)
    }

    /// Whether some trace point at distance at least `exclusion` from the
    /// origin comes within `eps` of the real axis.
    pub fn approaches_real_axis(&self, eps: f64, exclusion: f64) -> bool {
        self.points.iter().skip(1).any(|p| p.im < eps && p.norm() >= exclusion)
    }
}

fn tip(driving: &DrivingFunction, n: usize, halve_last: bool) -> Point {
    let mut w = Point::new(0.0, 0.0);
    let mut k = n;
    if halve_last {
        let (da, dt) = driving.step(n - 1);
        w = inverse_step(w, 0.5 * da, 0.5 * dt);
        w = inverse_step(w, 0.5 * da, 0.5 * dt);
        k -= 1;
    }
    for j in (0..k).rev() {
        let (da, dt) = driving.step(j);
        w = inverse_step(w, da, dt);
    }
    w
}

/// Trace points evaluated together; the lanes are independent chains of
/// square roots, so interleaving them hides the latency of each.
const LANES: usize = 8;

/// The trace `gamma(t_i)` on every grid time by zipper evaluation: the tip
/// 0 is pulled back through the inverse elementary maps in reverse order.
/// The inverse of a slit map is regular at 0 (it returns the slit tip), so
/// no offset from the boundary is needed. Costs `O(M^2)` maps.
pub fn compute_trace(driving: &DrivingFunction) -> Result<LoewnerTrace> {
    if !driving.is_uniform() {
        return Err(invalid("the trace is computed on a uniform grid"));
    }
    let m = driving.steps();
    let steps: Vec<(f64, f64)> = (0..m).map(|k| driving.step(k)).collect();
    let mut points = Vec::with_capacity(m + 1);
    let mut subdivided = Vec::new();
    points.push(Point::new(0.0, 0.0));
    let ok = |p: Point| p.re.is_finite() && p.im.is_finite() && p.im >= 0.0;
    let mut n0 = 1;
    while n0 <= m {
        let lanes = LANES.min(m + 1 - n0);
        // lane j holds the tip of time n0 + j; bring every lane down to step n0 - 1
        let mut w = [Point::new(0.0, 0.0); LANES];
        for (j, wj) in w.iter_mut().enumerate().take(lanes) {
            for &(da, dt) in steps[n0 - 1..n0 + j].iter().rev() {
                *wj = inverse_step(*wj, da, dt);
            }
        }
        for &(da, dt) in steps[..n0 - 1].iter().rev() {
            for wj in w.iter_mut() {
                *wj = inverse_step(*wj, da, dt);
            }
        }
        for (j, &p) in w.iter().enumerate().take(lanes) {
            let n = n0 + j;
            let p = if ok(p) {
                p
            } else {
                subdivided.push(n);
                let q = tip(driving, n, true);
                if !ok(q) {
                    return Err(Error::Numerical { index: n, reason: "trace point is not finite in the upper half-plane".into() });
                }
                q
            };
            points.push(p);
        }
        n0 += lanes;
    }
    Ok(LoewnerTrace { times: driving.times.clone(), points, subdivided })
}
