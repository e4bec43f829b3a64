//! Monte Carlo diagnostics of SLE: swallowing of real points, the hitting
//! function, the drift of `log f_t(z)` and the dimension of traces.

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::fractal::{box_count_dimension, densify, dyadic_scales};
use crate::geometry::{BBox, Point};
use crate::rng::{replicate, Rng, RngStream};
use crate::stats::{binomial_estimate, linear_fit, EstimateWithCI, Welford};

use super::cardy::cardy_g;
use super::loewner::{forward_step, sample_driving, LoewnerTrace};

/// Step size relative to the distance of the tracked points to 0. Their gap
/// evolves without noise and does not limit the step. The race between a
/// point reaching 0 and the gap closing carries an `O(REL_STEP^2)` bias:
/// at 0.1 the same-side pair (1, 2) at kappa = 6 gives 0.36 instead of 1/2,
/// at 0.02 it gives 0.497.
const REL_STEP: f64 = 0.02;
/// A point closer to 0 than this fraction of the tracked scale counts as
/// swallowed.
const CAPTURE: f64 = 1e-10;
const MAX_STEPS: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairOutcome {
    /// `f_t(x)` reached 0 strictly before `f_t(y)`.
    XFirst,
    /// `f_t(y)` reached 0 first, or both together.
    YFirst,
    /// Neither was swallowed within the time or step budget.
    Open,
}

/// Follows `f_t(x)` and `f_t(y)` for real `x < y` with steps shrinking with
/// the smaller of `|f_t(x)|` and `|f_t(y)|`, so the elementary maps resolve
/// the approach to 0.
fn follow_pair(kappa: f64, x: f64, y: f64, t_max: f64, rng: &mut Rng) -> (PairOutcome, f64) {
    let sk = kappa.sqrt();
    let (mut a, mut b) = (x, y);
    let straddle = x < 0.0;
    let mut t = 0.0;
    for _ in 0..MAX_STEPS {
        let gap = b - a;
        if straddle {
            if -a <= CAPTURE * gap {
                return (PairOutcome::XFirst, t);
            }
            if b <= CAPTURE * gap {
                return (PairOutcome::YFirst, t);
            }
        } else {
            if gap <= CAPTURE * b {
                return (PairOutcome::YFirst, t);
            }
            if a <= CAPTURE * gap {
                return (PairOutcome::XFirst, t);
            }
        }
        if t >= t_max {
            return (PairOutcome::Open, t);
        }
        let scale = a.abs().min(b.abs());
        let dt = (REL_STEP * scale).powi(2).min(t_max - t);
        let z: f64 = rng.sample(StandardNormal);
        let da = sk * dt.sqrt() * z;
        let (va, vb) = (a + da, b + da);
        if straddle {
            if va >= 0.0 {
                return (PairOutcome::XFirst, t + dt);
            }
            if vb <= 0.0 {
                return (PairOutcome::YFirst, t + dt);
            }
        } else if va <= 0.0 {
            return (if vb <= 0.0 { PairOutcome::YFirst } else { PairOutcome::XFirst }, t + dt);
        }
        a = va.signum() * (va * va + 4.0 * dt).sqrt();
        b = vb.signum() * (vb * vb + 4.0 * dt).sqrt();
        t += dt;
    }
    (PairOutcome::Open, t)
}

fn check_pair(x: f64, y: f64) -> Result<()> {
    if !(x < y) || x == 0.0 || y == 0.0 || !x.is_finite() || !y.is_finite() {
        return Err(invalid("need real points x < y, both nonzero"));
    }
    if y < 0.0 {
        return Err(invalid("at least y must lie to the right of the origin"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct HittingReport {
    pub kappa: f64,
    pub x: f64,
    pub y: f64,
    /// `Z_0 = y / (y - x)`.
    pub z0: f64,
    /// Frequency of `x` being swallowed strictly before `y`, over the runs
    /// that finished.
    pub estimate: EstimateWithCI,
    /// `G(Z_0)`.
    pub predicted: f64,
    pub undecided: u64,
}

impl HittingReport {
    pub fn z_score(&self) -> f64 {
        self.estimate.z_score(self.predicted)
    }
}

/// Frequency of the event that `f_t(x)` hits 0 strictly before `f_t(y)`,
/// compared with `G(y / (y - x))`.
pub fn hitting_probability_mc(kappa: f64, x: f64, y: f64, n: u64, stream: RngStream) -> Result<HittingReport> {
    check_pair(x, y)?;
    if !(kappa > 4.0 && kappa < 8.0) {
        return Err(invalid("hitting probabilities are compared for 4 < kappa < 8"));
    }
    if n == 0 {
        return Err(invalid("need at least one run"));
    }
    let z0 = y / (y - x);
    let outcomes = replicate(stream, n, |_, rng| follow_pair(kappa, x, y, f64::INFINITY, rng).0);
    let hits = outcomes.iter().filter(|&&o| o == PairOutcome::XFirst).count() as u64;
    let undecided = outcomes.iter().filter(|&&o| o == PairOutcome::Open).count() as u64;
    Ok(HittingReport {
        kappa,
        x,
        y,
        z0,
        estimate: binomial_estimate(hits, n - undecided),
        predicted: cardy_g(z0, kappa)?,
        undecided,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbsorptionReport {
    pub kappa: f64,
    pub t_max: f64,
    pub runs: u64,
    /// Runs in which `x` or `y` was swallowed by `t_max`.
    pub absorbed: u64,
}

impl AbsorptionReport {
    pub fn frequency(&self) -> EstimateWithCI {
        binomial_estimate(self.absorbed, self.runs)
    }
}

/// How often either of two real points is swallowed before `t_max`; for
/// `kappa <= 4` the curve does not return to the real axis.
pub fn absorption_by(kappa: f64, x: f64, y: f64, t_max: f64, n: u64, stream: RngStream) -> Result<AbsorptionReport> {
    check_pair(x, y)?;
    if !(kappa >= 0.0) || !(t_max > 0.0) || n == 0 {
        return Err(invalid("need kappa >= 0, a positive horizon and runs"));
    }
    let outcomes = replicate(stream, n, |_, rng| follow_pair(kappa, x, y, t_max, rng).0);
    let absorbed = outcomes.iter().filter(|&&o| o != PairOutcome::Open).count() as u64;
    Ok(AbsorptionReport { kappa, t_max, runs: n, absorbed })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleReport {
    pub kappa: f64,
    pub z: Point,
    pub times: Vec<f64>,
    /// Mean of `log f_t(z)` over the runs in which `z` survived.
    pub mean_log: Vec<Point>,
    /// Mean over runs of the least-squares slopes in `t` of the real and
    /// imaginary parts of `log f_t(z)`.
    pub slope_re: EstimateWithCI,
    pub slope_im: EstimateWithCI,
    /// `2 - kappa/2`, the coefficient of the `dt / f_t(z)^2` drift.
    pub drift_coefficient: f64,
    pub absorbed: u64,
}

impl MartingaleReport {
    /// Whether both slopes are within `k` standard errors of zero.
    pub fn slope_vanishes(&self, k: f64) -> bool {
        self.slope_re.within_sigma(0.0, k) && self.slope_im.within_sigma(0.0, k)
    }

    /// The larger of the two slope z-scores in absolute value.
    pub fn max_abs_z(&self) -> f64 {
        self.slope_re.z_score(0.0).abs().max(self.slope_im.z_score(0.0).abs())
    }
}

/// Tracks `log f_t(z)` along `n` independent chains on a uniform step `dt`
/// and records it at the grid `times` (rounded to whole steps). The mean of
/// the per-run slopes equals the slope of the mean curve, and its standard
/// error comes from the independence of runs.
pub fn martingale_diagnostic(kappa: f64, z: Point, times: &[f64], dt: f64, n: u64, stream: RngStream) -> Result<MartingaleReport> {
    if !(z.im > 0.0) {
        return Err(invalid("z must lie in the open upper half-plane"));
    }
    if times.len() < 2 || times.windows(2).any(|w| !(w[1] > w[0])) || !(times[0] >= 0.0) {
        return Err(invalid("need at least two increasing grid times"));
    }
    if !(dt > 0.0) || n == 0 {
        return Err(invalid("need a positive step and runs"));
    }
    let t_max = times[times.len() - 1];
    let marks: Vec<usize> = times.iter().map(|t| (t / dt).round() as usize).collect();
    let runs = replicate(stream, n, |_, rng| -> Result<Option<Vec<Point>>> {
        let d = sample_driving(kappa, t_max, dt, rng)?;
        let mut w = z;
        let mut out = Vec::with_capacity(marks.len());
        let mut next = 0;
        for k in 0..=d.steps() {
            while next < marks.len() && marks[next] == k {
                out.push(w.ln());
                next += 1;
            }
            if k == d.steps() {
                break;
            }
            let (da, h) = d.step(k);
            w = forward_step(w, da, h);
            if !(w.im > 1e-14 * (1.0 + w.norm())) {
                return Ok(None);
            }
        }
        Ok(Some(out))
    });
    let mut sums = vec![Point::new(0.0, 0.0); times.len()];
    let mut slope_re = Welford::new();
    let mut slope_im = Welford::new();
    let mut absorbed = 0;
    for r in runs {
        match r? {
            None => absorbed += 1,
            Some(logs) => {
                let re: Vec<f64> = logs.iter().map(|l| l.re).collect();
                let im: Vec<f64> = logs.iter().map(|l| l.im).collect();
                slope_re.push(linear_fit(times, &re)?.slope);
                slope_im.push(linear_fit(times, &im)?.slope);
                sums.iter_mut().zip(&logs).for_each(|(s, l)| *s += l);
            }
        }
    }
    let used = slope_re.count().max(1) as f64;
    Ok(MartingaleReport {
        kappa,
        z,
        times: times.to_vec(),
        mean_log: sums.into_iter().map(|s| s / used).collect(),
        slope_re: slope_re.estimate(),
        slope_im: slope_im.estimate(),
        drift_coefficient: 2.0 - kappa / 2.0,
        absorbed,
    })
}

/// Box-counting dimension of a trace polyline over dyadic boxes from
/// `extent / 2^k_min` to `extent / 2^k_max`; the polyline is densified
/// below the finest box size first.
pub fn trace_dimension(trace: &LoewnerTrace, k_min: u32, k_max: u32) -> Result<EstimateWithCI> {
    let bb = BBox::of(trace.points.iter().copied()).ok_or(Error::EmptyDomain)?;
    let extent = bb.width().max(bb.height());
    let scales = dyadic_scales(extent, k_min, k_max);
    let finest = scales[scales.len() - 1];
    box_count_dimension(&densify(&trace.points, finest / 4.0), &scales)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sle::loewner::compute_trace;
    use crate::stats::ks_two_sample;

    #[test]
    fn pair_validation() {
        let s = RngStream::new(0, 0);
        assert!(hitting_probability_mc(6.0, 1.0, -1.0, 10, s).is_err());
        assert!(hitting_probability_mc(6.0, 0.0, 1.0, 10, s).is_err());
        assert!(hitting_probability_mc(3.0, -1.0, 1.0, 10, s).is_err());
        assert!(hitting_probability_mc(6.0, -1.0, 1.0, 0, s).is_err());
    }

    #[test]
    fn symmetric_pair_is_a_coin_flip() {
        let r = hitting_probability_mc(6.0, -1.0, 1.0, 4000, RngStream::new(1, 0)).unwrap();
        assert_eq!(r.z0, 0.5);
        assert_eq!(r.undecided, 0);
        assert!(r.estimate.within_sigma(0.5, 3.0), "{:?}", r.estimate);
    }

    #[test]
    fn hitting_matches_g_on_both_branches() {
        for (kappa, x, y) in [(6.0, -1.0, 3.0), (5.0, -1.0, 2.0), (6.0, 1.0, 2.0), (7.0, 0.5, 3.0)] {
            let r = hitting_probability_mc(kappa, x, y, 4000, RngStream::new(2, 0)).unwrap();
            assert!(r.z_score().abs() < 3.5, "{kappa} {x} {y}: {:?} vs {}", r.estimate, r.predicted);
        }
    }

    #[test]
    fn simple_phase_does_not_swallow() {
        let r = absorption_by(3.0, -1.0, 1.0, 1.0, 1000, RngStream::new(3, 0)).unwrap();
        assert_eq!(r.absorbed, 0);
        let r = absorption_by(6.0, -1.0, 1.0, 1.0, 1000, RngStream::new(3, 0)).unwrap();
        assert!(r.absorbed > 100, "{r:?}");
    }

    #[test]
    fn argument_is_a_martingale_only_at_kappa_four() {
        // arg f_t(z) is bounded, so the vanishing drift makes it a true martingale
        let times: Vec<f64> = (0..=5).map(|k| 0.2 * k as f64).collect();
        let z = Point::new(1.0, 1.0);
        let flat = martingale_diagnostic(4.0, z, &times, 2e-3, 2000, RngStream::new(4, 0)).unwrap();
        assert!(flat.slope_im.within_sigma(0.0, 3.0), "{:?}", flat.slope_im);
        assert!((flat.mean_log[0] - z.ln()).norm() < 1e-12);
        for kappa in [2.0, 6.0] {
            let tilted = martingale_diagnostic(kappa, z, &times, 2e-3, 2000, RngStream::new(4, 1)).unwrap();
            assert!(!tilted.slope_im.within_sigma(0.0, 3.0), "{kappa}: {:?}", tilted.slope_im);
            assert_eq!(tilted.drift_coefficient, 2.0 - kappa / 2.0);
        }
        assert!(martingale_diagnostic(4.0, Point::new(1.0, 0.0), &times, 1e-3, 10, RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn modulus_mean_grows_even_at_kappa_four() {
        // log f_t(z) is only a local martingale: its real part leaks upward
        // through close passages of the tip, at every step size
        let times: Vec<f64> = (0..=5).map(|k| 0.2 * k as f64).collect();
        let r = martingale_diagnostic(4.0, Point::new(0.0, 1.0), &times, 2e-3, 2000, RngStream::new(4, 2)).unwrap();
        assert!(r.slope_re.mean > 0.5 && !r.slope_vanishes(3.0), "{:?}", r.slope_re);
        assert!(r.slope_im.within_sigma(0.0, 3.0));
    }

    #[test]
    fn trace_end_law_is_scale_invariant() {
        // gamma_t under the rescaled chain is lambda gamma_{t / lambda^2}
        let lambda = 1.7;
        let ends = |scale: f64, seed: u64| -> Vec<f64> {
            replicate(RngStream::new(seed, 0), 400, |_, r| {
                let d = sample_driving(6.0, scale * scale, scale * scale / 200.0, r).unwrap();
                compute_trace(&d).unwrap().points[200].norm() / scale
            })
        };
        let (_, p) = ks_two_sample(&ends(1.0, 5), &ends(lambda, 6)).unwrap();
        assert!(p > 0.001, "{p}");
    }

    #[test]
    fn vertical_slit_has_dimension_one() {
        let d = crate::sle::loewner::DrivingFunction::zero(1.0, 500).unwrap();
        let tr = compute_trace(&d).unwrap();
        let dim = trace_dimension(&tr, 2, 7).unwrap();
        assert!((dim.mean - 1.0).abs() < 0.05, "{dim:?}");
    }
}
