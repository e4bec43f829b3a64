use crate::brownian::{sample_loop_soup, TimeCutoff};
use crate::error::{invalid, Result};
use crate::geometry::{diameter, segments_intersect, Point};
use crate::lattice::Shape;
use crate::rng::RngStream;
use crate::stats::{linear_fit, EstimateWithCI, Welford};

use super::config::cluster_polylines;

fn check_grid(c_grid: &[f64]) -> Result<f64> {
    if c_grid.is_empty() || c_grid.iter().any(|&c| !(c >= 0.0 && c.is_finite())) {
        return Err(invalid("intensity grid must be nonempty and nonnegative"));
    }
    if c_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("intensity grid must increase"));
    }
    Ok(*c_grid.last().unwrap())
}

/// Whether a closed polyline meets the closed axis-aligned square
/// `[x0, x0 + s] x [y0, y0 + s]`.
fn meets_square(line: &[Point], x0: f64, y0: f64, s: f64) -> bool {
    let inside = |p: Point| p.re >= x0 && p.re <= x0 + s && p.im >= y0 && p.im <= y0 + s;
    if line.iter().any(|&p| inside(p)) {
        return true;
    }
    let c = [Point::new(x0, y0), Point::new(x0 + s, y0), Point::new(x0 + s, y0 + s), Point::new(x0, y0 + s)];
    let n = line.len();
    (0..n).any(|k| {
        let (a, b) = (line[k], line[(k + 1) % n]);
        (0..4).any(|e| segments_intersect(a, b, c[e], c[(e + 1) % 4]))
    })
}

/// Dyadic level of a loop: `n` with diameter in `[2^-n-1, 2^-n)`, or `None`
/// if the diameter is at least 1.
fn dyadic_level(d: f64) -> Option<usize> {
    if d >= 1.0 || d <= 0.0 {
        return None;
    }
    Some((-d.log2()).floor() as usize)
}

/// Survival of dyadic squares under the loops of their own scale.
#[derive(Debug, Clone)]
pub struct DominationReport {
    pub c_grid: Vec<f64>,
    pub depth: usize,
    /// `survival[c][n]`: fraction of level-`n` squares away from the
    /// boundary of the unit square met by no loop of level `n`.
    pub survival: Vec<Vec<EstimateWithCI>>,
    /// Largest pairwise z-score between levels `2..=depth` at any intensity.
    pub max_level_z: f64,
    /// Every replica's survival is nonincreasing along the intensity grid.
    pub pathwise_monotone: bool,
    /// Fit of pooled log survival against intensity.
    pub b_hat: f64,
    pub r_squared: f64,
}

/// Duration window that contains essentially all loops with dyadic level at
/// most `depth` fitting in the unit square.
pub fn domination_cutoff(depth: usize) -> TimeCutoff {
    let smallest = 0.5f64.powi(depth as i32 + 1);
    TimeCutoff { t_min: (smallest / 8.0).powi(2), t_max: 4.0 }
}

/// Loop-soup analogue of fractal percolation in the unit square: a square of
/// side `2^-n` dies when a loop with diameter in `[2^-n-1, 2^-n)` meets it.
/// Squares touching the boundary of the unit square are excluded, so the
/// survival should not depend on the level. Intensities are coupled by
/// thinning one soup drawn at the largest intensity.
pub fn soup_domination_check(c_grid: &[f64], depth: usize, steps: usize, samples: u64, stream: RngStream) -> Result<DominationReport> {
    let c_max = check_grid(c_grid)?;
    if !(2..=6).contains(&depth) {
        return Err(invalid("depth must lie in 2..=6"));
    }
    let cutoff = domination_cutoff(depth);
    let domain = Shape::unit_square();
    let per_replica = crate::rng::replicate(stream, samples, |_, rng| -> Result<Vec<Vec<f64>>> {
        let soup = sample_loop_soup(&domain, c_max, cutoff, steps, rng)?;
        let levels: Vec<Option<usize>> = soup.loops.iter().map(|l| dyadic_level(diameter(l.points()))).collect();
        let mut out = Vec::with_capacity(c_grid.len());
        for &c in c_grid {
            let ratio = if c_max > 0.0 { c / c_max } else { 0.0 };
            let mut row = vec![1.0; depth + 1];
            for (n, slot) in row.iter_mut().enumerate().skip(2) {
                let side = 1usize << n;
                let s = 1.0 / side as f64;
                let loops: Vec<&[Point]> = soup
                    .loops
                    .iter()
                    .zip(&levels)
                    .zip(&soup.marks)
                    .filter(|((_, &lv), &m)| lv == Some(n) && m < ratio)
                    .map(|((l, _), _)| l.points())
                    .collect();
                let mut alive = 0usize;
                let mut total = 0usize;
                for j in 1..side - 1 {
                    for i in 1..side - 1 {
                        total += 1;
                        let (x0, y0) = (i as f64 * s, j as f64 * s);
                        if !loops.iter().any(|l| meets_square(l, x0, y0, s)) {
                            alive += 1;
                        }
                    }
                }
                *slot = alive as f64 / total as f64;
            }
            out.push(row);
        }
        Ok(out)
    });
    let mut acc = vec![vec![Welford::new(); depth + 1]; c_grid.len()];
    let mut pathwise_monotone = true;
    for r in per_replica {
        let r = r?;
        for (ci, row) in r.iter().enumerate() {
            for (n, &v) in row.iter().enumerate() {
                acc[ci][n].push(v);
            }
            if ci > 0 && row.iter().zip(&r[ci - 1]).any(|(a, b)| a > b) {
                pathwise_monotone = false;
            }
        }
    }
    let survival: Vec<Vec<EstimateWithCI>> = acc.iter().map(|row| row.iter().map(|w| w.estimate()).collect()).collect();
    let mut max_level_z: f64 = 0.0;
    for row in &survival {
        for a in 2..=depth {
            for b in a + 1..=depth {
                let se = row[a].std_error.hypot(row[b].std_error);
                if se > 0.0 {
                    max_level_z = max_level_z.max((row[a].mean - row[b].mean).abs() / se);
                }
            }
        }
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (ci, &c) in c_grid.iter().enumerate() {
        let pooled: f64 = (2..=depth).map(|n| survival[ci][n].mean).sum::<f64>() / (depth - 1) as f64;
        if pooled > 0.0 {
            xs.push(c);
            ys.push(pooled.ln());
        }
    }
    let (b_hat, r_squared) = if xs.len() >= 3 {
        let fit = linear_fit(&xs, &ys)?;
        (-fit.slope, fit.r_squared)
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(DominationReport { c_grid: c_grid.to_vec(), depth, survival, max_level_z, pathwise_monotone, b_hat, r_squared })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterCountRow {
    pub c: f64,
    pub mean_macroscopic: f64,
    pub std_error: f64,
    /// Fraction of replicas with exactly one macroscopic cluster.
    pub single_frequency: f64,
    pub mean_clusters: f64,
}

#[derive(Debug, Clone)]
pub struct ClusterCountTable {
    pub rows: Vec<ClusterCountRow>,
    pub threshold: f64,
    /// Every cluster at a lower intensity lies inside one cluster at the
    /// next intensity, in every replica.
    pub pathwise_coarsening: bool,
}

impl ClusterCountTable {
    /// Whether the mean macroscopic count never increases along the grid.
    pub fn monotone_nonincreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].mean_macroscopic <= w[0].mean_macroscopic)
    }

    /// Smallest and largest intensities at which the single-cluster
    /// frequency lies strictly between 0.05 and 0.95.
    pub fn crossover_window(&self) -> Option<(f64, f64)> {
        let mid: Vec<f64> = self.rows.iter().filter(|r| r.single_frequency > 0.05 && r.single_frequency < 0.95).map(|r| r.c).collect();
        Some((*mid.first()?, *mid.last()?))
    }
}

/// Macroscopic cluster counts of coupled loop soups along an intensity
/// grid. A cluster is macroscopic when its diameter is at least a quarter
/// of the domain's scale.
pub fn cluster_count_vs_intensity(domain: &Shape, c_grid: &[f64], cutoff: TimeCutoff, steps: usize, samples: u64, stream: RngStream) -> Result<ClusterCountTable> {
    let c_max = check_grid(c_grid)?;
    let threshold = domain.scale() / 4.0;
    let per_replica = crate::rng::replicate(stream, samples, |_, rng| -> Result<(Vec<(usize, usize)>, bool)> {
        let soup = sample_loop_soup(domain, c_max, cutoff, steps, rng)?;
        let mut rows = Vec::with_capacity(c_grid.len());
        let mut coarsening = true;
        let mut prev_labels: Option<(Vec<usize>, Vec<usize>)> = None;
        for &c in c_grid {
            let ratio = if c_max > 0.0 { c / c_max } else { 0.0 };
            let idx: Vec<usize> = (0..soup.count()).filter(|&k| soup.marks[k] < ratio).collect();
            let lines: Vec<&[Point]> = idx.iter().map(|&k| soup.loops[k].points()).collect();
            let clusters = cluster_polylines(&lines);
            let mut label = vec![usize::MAX; soup.count()];
            for (ci, cl) in clusters.iter().enumerate() {
                for &m in cl {
                    label[idx[m]] = ci;
                }
            }
            if let Some((prev_idx, prev_label)) = &prev_labels {
                // loops sharing a cluster before must share one now
                let mut image: Vec<usize> = vec![usize::MAX; soup.count()];
                for &k in prev_idx {
                    let (old, new) = (prev_label[k], label[k]);
                    if image[old] == usize::MAX {
                        image[old] = new;
                    } else if image[old] != new {
                        coarsening = false;
                    }
                }
            }
            let macroscopic = clusters
                .iter()
                .filter(|cl| {
                    let pts: Vec<Point> = cl.iter().flat_map(|&m| lines[m].iter().copied()).collect();
                    diameter(&pts) >= threshold
                })
                .count();
            rows.push((macroscopic, clusters.len()));
            prev_labels = Some((idx, label));
        }
        Ok((rows, coarsening))
    });
    let mut macro_acc = vec![Welford::new(); c_grid.len()];
    let mut total_acc = vec![Welford::new(); c_grid.len()];
    let mut single = vec![0u64; c_grid.len()];
    let mut pathwise_coarsening = true;
    for r in per_replica {
        let (rows, ok) = r?;
        pathwise_coarsening &= ok;
        for (ci, &(m, t)) in rows.iter().enumerate() {
            macro_acc[ci].push(m as f64);
            total_acc[ci].push(t as f64);
            if m == 1 {
                single[ci] += 1;
            }
        }
    }
    let rows = c_grid
        .iter()
        .enumerate()
        .map(|(ci, &c)| ClusterCountRow {
            c,
            mean_macroscopic: macro_acc[ci].mean(),
            std_error: macro_acc[ci].estimate().std_error,
            single_frequency: single[ci] as f64 / samples as f64,
            mean_clusters: total_acc[ci].mean(),
        })
        .collect();
    Ok(ClusterCountTable { rows, threshold, pathwise_coarsening })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_meeting() {
        let tri = [Point::new(-1.0, 0.5), Point::new(2.0, 0.5), Point::new(0.5, 3.0)];
        assert!(meets_square(&tri, 0.0, 0.0, 1.0));
        let far = [Point::new(5.0, 5.0), Point::new(6.0, 5.0), Point::new(5.5, 6.0)];
        assert!(!meets_square(&far, 0.0, 0.0, 1.0));
        assert_eq!(dyadic_level(0.3), Some(1));
        assert_eq!(dyadic_level(0.5), Some(1));
        assert_eq!(dyadic_level(0.49), Some(1));
        assert_eq!(dyadic_level(0.24), Some(2));
        assert_eq!(dyadic_level(1.0), None);
    }

    #[test]
    fn zero_intensity_survives_everywhere() {
        let r = soup_domination_check(&[0.0], 3, 16, 5, RngStream::new(1, 0)).unwrap();
        assert!(r.survival[0].iter().all(|e| e.mean == 1.0));
    }

    #[test]
    fn survival_decreases_and_is_level_free() {
        let grid = [0.05, 0.1, 0.2, 0.3, 0.4];
        let r = soup_domination_check(&grid, 3, 16, 200, RngStream::new(2, 0)).unwrap();
        assert!(r.pathwise_monotone);
        assert!(r.r_squared > 0.95, "{r:?}");
        assert!(r.b_hat > 0.0);
        assert!(r.max_level_z < 3.5, "{}", r.max_level_z);
    }

    #[test]
    fn small_intensity_gives_singletons() {
        let cut = TimeCutoff::new(0.002, 0.05).unwrap();
        let t = cluster_count_vs_intensity(&Shape::unit_square(), &[0.05, 0.5], cut, 16, 50, RngStream::new(3, 0)).unwrap();
        assert!(t.pathwise_coarsening);
        // few loops, almost never touching
        assert!(t.rows[0].mean_clusters > 0.0);
        assert!(t.rows[0].mean_clusters <= t.rows[1].mean_clusters);
    }
}
