//! Box-counting dimension of planar point sets.

use std::collections::HashSet;

use crate::error::{invalid, Error, Result};
use crate::geometry::{BBox, Point};
use crate::stats::{linear_fit, EstimateWithCI};

/// Least-squares slope of `log N(s)` against `log(1/s)`, where `N(s)` is the
/// number of boxes of side `s` (anchored at the lower-left corner of the
/// bounding box) containing at least one point.
pub fn box_count_dimension(points: &[Point], scales: &[f64]) -> Result<EstimateWithCI> {
    if points.len() < 2 {
        return Err(invalid("box counting needs points"));
    }
    if scales.len() < 2 || scales.iter().any(|&s| !(s > 0.0)) {
        return Err(invalid("box counting needs at least two positive scales"));
    }
    let bb = BBox::of(points.iter().copied()).ok_or(Error::EmptyDomain)?;
    if bb.diameter() == 0.0 {
        return Err(Error::Degenerate("all points coincide".into()));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = scales
        .iter()
        .map(|&s| {
            let n = occupied_boxes(points, bb.min, bb.width().max(bb.height()), s);
            ((1.0 / s).ln(), (n as f64).ln())
        })
        .unzip();
    let fit = linear_fit(&xs, &ys)?;
    Ok(EstimateWithCI::new(fit.slope, fit.slope_std_error, points.len() as u64))
}

/// Boxes of side `s` tiling `[origin, origin + extent]^2`; points on the far
/// edge belong to the last box.
pub fn occupied_boxes(points: &[Point], origin: Point, extent: f64, s: f64) -> usize {
    let last = ((extent / s).ceil() as i64 - 1).max(0);
    let mut boxes = HashSet::with_capacity(points.len());
    for p in points {
        let ix = (((p.re - origin.re) / s).floor() as i64).min(last);
        let iy = (((p.im - origin.im) / s).floor() as i64).min(last);
        let k = (ix, iy);
        boxes.insert(k);
    }
    boxes.len()
}

/// Dyadic box sizes `extent / 2^k` for `k` in `k_min..=k_max`.
pub fn dyadic_scales(extent: f64, k_min: u32, k_max: u32) -> Vec<f64> {
    (k_min..=k_max).map(|k| extent / f64::powi(2.0, k as i32)).collect()
}

/// Inserts points along each segment of a polyline so that consecutive points
/// are at most `max_step` apart.
pub fn densify(polyline: &[Point], max_step: f64) -> Vec<Point> {
    let mut out = Vec::with_capacity(polyline.len());
    if let Some(&first) = polyline.first() {
        out.push(first);
    }
    for w in polyline.windows(2) {
        let d = (w[1] - w[0]).norm();
        let k = (d / max_step).ceil().max(1.0) as usize;
        for m in 1..=k {
            out.push(w[0] + (w[1] - w[0]) * (m as f64 / k as f64));
        }
    }
    out
}
