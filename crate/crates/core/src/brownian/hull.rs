//! Outer boundary of a closed path by rasterization and flood fill.
//!
//! The path is drawn on a grid of pitch `h` (every cell a segment passes
//! through is marked), the exterior is flood-filled with 4-connectivity from
//! a padded corner, and everything the fill cannot reach is the hull. The
//! hull's contour is traced with the hull on the left; where two hull cells
//! touch only at a corner the trace turns right so the hull stays in one
//! piece. Contour vertices are the midpoints of the grid edges, which are
//! pairwise distinct, so the returned loop is simple.

use crate::error::{Error, Result};
use crate::geometry::{LoopPath, Point};

use super::PlanarPath;

const PAD: i64 = 2;

/// Rasterized hull of a closed path.
#[derive(Debug, Clone)]
pub struct Hull {
    boundary: LoopPath,
    h: f64,
    path_cells: usize,
    hull_cells: usize,
    rim_cells: usize,
}

impl Hull {
    pub fn boundary(&self) -> &LoopPath {
        &self.boundary
    }

    pub fn into_boundary(self) -> LoopPath {
        self.boundary
    }

    pub fn resolution(&self) -> f64 {
        self.h
    }

    /// Cells touched by the path itself.
    pub fn path_cells(&self) -> usize {
        self.path_cells
    }

    /// Cells not reachable from outside: the path plus everything it encloses.
    pub fn hull_cells(&self) -> usize {
        self.hull_cells
    }

    /// Hull cells with an edge on the exterior.
    pub fn rim_cells(&self) -> usize {
        self.rim_cells
    }

    /// Area of the rasterized path, `h^2` per touched cell.
    pub fn path_area(&self) -> f64 {
        self.path_cells as f64 * self.h * self.h
    }

    /// Area of all hull cells. Biased upward by about half a cell along the
    /// rim, since the curve crosses rim cells rather than bounding them.
    pub fn cell_area(&self) -> f64 {
        self.hull_cells as f64 * self.h * self.h
    }

    /// Hull area with rim cells counted at one half.
    pub fn area(&self) -> f64 {
        (self.hull_cells as f64 - 0.5 * self.rim_cells as f64) * self.h * self.h
    }
}

#[derive(Debug, Clone)]
struct Grid {
    nx: i64,
    ny: i64,
    cells: Vec<u8>,
}

const EMPTY: u8 = 0;
const PATH: u8 = 1;
const OUTSIDE: u8 = 2;

impl Grid {
    #[inline]
    fn idx(&self, i: i64, j: i64) -> usize {
        (j * self.nx + i) as usize
    }

    #[inline]
    fn get(&self, i: i64, j: i64) -> u8 {
        if i < 0 || j < 0 || i >= self.nx || j >= self.ny {
            OUTSIDE
        } else {
            self.cells[self.idx(i, j)]
        }
    }

    fn mark(&mut self, i: i64, j: i64) {
        let k = self.idx(i, j);
        self.cells[k] = PATH;
    }

    /// Marks every cell the segment meets, walking cell to cell through
    /// shared edges.
    fn draw(&mut self, a: (f64, f64), b: (f64, f64)) {
        let (mut cx, mut cy) = (a.0.floor() as i64, a.1.floor() as i64);
        let (ex, ey) = (b.0.floor() as i64, b.1.floor() as i64);
        self.mark(cx, cy);
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let sx = if ex > cx { 1 } else { -1 };
        let sy = if ey > cy { 1 } else { -1 };
        let next_x = |cx: i64| -> f64 {
            if dx == 0.0 {
                f64::INFINITY
            } else {
                let edge = if sx > 0 { (cx + 1) as f64 } else { cx as f64 };
                (edge - a.0) / dx
            }
        };
        let next_y = |cy: i64| -> f64 {
            if dy == 0.0 {
                f64::INFINITY
            } else {
                let edge = if sy > 0 { (cy + 1) as f64 } else { cy as f64 };
                (edge - a.1) / dy
            }
        };
        let steps = (ex - cx).abs() + (ey - cy).abs();
        for _ in 0..steps {
            let step_x = if cx == ex {
                false
            } else if cy == ey {
                true
            } else {
                next_x(cx) < next_y(cy)
            };
            if step_x {
                cx += sx;
            } else {
                cy += sy;
            }
            self.mark(cx, cy);
        }
    }

    fn flood_outside(&mut self) {
        let mut stack = vec![(0i64, 0i64)];
        let k = self.idx(0, 0);
        self.cells[k] = OUTSIDE;
        while let Some((i, j)) = stack.pop() {
            for (a, b) in [(i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)] {
                if a >= 0 && b >= 0 && a < self.nx && b < self.ny {
                    let k = self.idx(a, b);
                    if self.cells[k] == EMPTY {
                        self.cells[k] = OUTSIDE;
                        stack.push((a, b));
                    }
                }
            }
        }
    }
}

// Directions: east, north, west, south.
const DIRS: [(i64, i64); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

/// Filled raster of one or more closed polylines on the grid of pitch `h`
/// anchored at `anchor`: global cell `(i, j)` covers
/// `anchor + h * ([i, i+1] x [j, j+1])`. Rasters sharing an anchor and a
/// pitch are aligned cell for cell.
#[derive(Debug, Clone)]
pub(crate) struct HullRaster {
    anchor: Point,
    h: f64,
    i0: i64,
    j0: i64,
    grid: Grid,
    path_cells: usize,
}

impl HullRaster {
    pub(crate) fn new(polylines: &[&[Point]], h: f64, anchor: Point) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(crate::error::invalid("resolution must be positive"));
        }
        let bbox = crate::geometry::BBox::of(polylines.iter().flat_map(|l| l.iter().copied()))
            .ok_or(Error::Degenerate("empty path".into()))?;
        if bbox.diameter() < 2.0 * h {
            return Err(Error::Degenerate("path diameter is below twice the resolution".into()));
        }
        let i0 = ((bbox.min.re - anchor.re) / h).floor() as i64 - PAD;
        let j0 = ((bbox.min.im - anchor.im) / h).floor() as i64 - PAD;
        let i1 = ((bbox.max.re - anchor.re) / h).floor() as i64 + PAD;
        let j1 = ((bbox.max.im - anchor.im) / h).floor() as i64 + PAD;
        let (nx, ny) = (i1 - i0 + 1, j1 - j0 + 1);
        let mut grid = Grid { nx, ny, cells: vec![EMPTY; (nx * ny) as usize] };
        let to_grid = |p: Point| ((p.re - anchor.re) / h - i0 as f64, (p.im - anchor.im) / h - j0 as f64);
        for line in polylines {
            let n = line.len();
            for k in 0..n {
                grid.draw(to_grid(line[k]), to_grid(line[(k + 1) % n]));
            }
        }
        let path_cells = grid.cells.iter().filter(|&&c| c == PATH).count();
        grid.flood_outside();
        Ok(Self { anchor, h, i0, j0, grid, path_cells })
    }

    /// Global coordinates of the hull cells, row by row.
    pub(crate) fn cells(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        (0..ny).flat_map(move |j| (0..nx).map(move |i| (i, j))).filter(move |&(i, j)| self.grid.get(i, j) != OUTSIDE).map(move |(i, j)| (i + self.i0, j + self.j0))
    }

    /// Traces the contour through edge midpoints, returning it with the
    /// hull and rim cell counts.
    fn trace(&self) -> Result<(LoopPath, usize, usize)> {
        let grid = &self.grid;
        let (nx, ny) = (grid.nx, grid.ny);
        let origin = self.anchor + Point::new(self.i0 as f64 * self.h, self.j0 as f64 * self.h);
        let h = self.h;
        // Outgoing contour edges per lattice vertex, one bit per direction.
        let vx = nx + 1;
        let mut out = vec![0u8; ((nx + 1) * (ny + 1)) as usize];
        let vid = |i: i64, j: i64| (j * vx + i) as usize;
        let mut hull_cells = 0;
        let mut rim_cells = 0;
        let mut start = None;
        for j in 0..ny {
            for i in 0..nx {
                if grid.get(i, j) == OUTSIDE {
                    continue;
                }
                hull_cells += 1;
                let mut rim = false;
                // counterclockwise around the cell: bottom, right, top, left
                let sides = [((i, j - 1), (i, j), 0u8), ((i + 1, j), (i + 1, j), 1), ((i, j + 1), (i + 1, j + 1), 2), ((i - 1, j), (i, j + 1), 3)];
                for ((ni, nj), (si, sj), d) in sides {
                    if grid.get(ni, nj) == OUTSIDE {
                        rim = true;
                        out[vid(si, sj)] |= 1 << d;
                        if start.is_none() {
                            start = Some((si, sj, d));
                        }
                    }
                }
                if rim {
                    rim_cells += 1;
                }
            }
        }
        let total_edges: usize = out.iter().map(|m| m.count_ones() as usize).sum();
        let (si, sj, sd) = start.ok_or(Error::Degenerate("empty hull".into()))?;
        let mut contour = Vec::new();
        let (mut i, mut j, mut d) = (si, sj, sd);
        loop {
            let (di, dj) = DIRS[d as usize];
            contour.push(origin + Point::new((i as f64 + 0.5 * di as f64) * h, (j as f64 + 0.5 * dj as f64) * h));
            i += di;
            j += dj;
            let m = out[vid(i, j)];
            let right = (d + 3) % 4;
            let left = (d + 1) % 4;
            d = [right, d, left]
                .into_iter()
                .find(|&c| m & (1 << c) != 0)
                .ok_or_else(|| Error::Numerical { index: contour.len(), reason: "contour trace lost the boundary".into() })?;
            if (i, j, d) == (si, sj, sd) {
                break;
            }
            if contour.len() > total_edges {
                return Err(Error::Numerical { index: contour.len(), reason: "contour trace did not close".into() });
            }
        }
        Ok((LoopPath::new(contour)?, hull_cells, rim_cells))
    }

    pub(crate) fn contour(&self) -> Result<LoopPath> {
        Ok(self.trace()?.0)
    }

    pub(crate) fn into_hull(self) -> Result<Hull> {
        let (boundary, hull_cells, rim_cells) = self.trace()?;
        Ok(Hull { boundary, h: self.h, path_cells: self.path_cells, hull_cells, rim_cells })
    }
}

/// Rasterized hull of the polyline through `points`, closed by joining the
/// last point to the first.
pub fn hull_of_points(points: &[Point], h: f64) -> Result<Hull> {
    let anchor = crate::geometry::BBox::of(points.iter().copied()).ok_or(Error::Degenerate("empty path".into()))?.min;
    HullRaster::new(&[points], h, anchor)?.into_hull()
}

/// Raster pitch matched to a path's diffusive step scale, `sqrt(T / steps)`.
/// The sampled path carries no information below one step, so finer grids
/// resolve discretization artifacts (missing sub-step excursions) rather
/// than the continuum hull.
pub fn diffusive_resolution(path: &PlanarPath) -> f64 {
    (path.duration() / path.steps() as f64).sqrt()
}

/// Outer boundary of a closed path at grid resolution `h`.
pub fn outer_boundary(path: &PlanarPath, h: f64) -> Result<LoopPath> {
    if !path.is_closed() {
        return Err(Error::NotClosed);
    }
    Ok(hull_of_points(path.points(), h)?.into_boundary())
}

/// Rasterized hull of a closed path, with its area estimates.
pub fn path_hull(path: &PlanarPath, h: f64) -> Result<Hull> {
    if !path.is_closed() {
        return Err(Error::NotClosed);
    }
    hull_of_points(path.points(), h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::segments_intersect;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn circle(r: f64, c: Point, n: usize) -> Vec<Point> {
        (0..n).map(|k| c + Point::from_polar(r, 2.0 * PI * k as f64 / n as f64)).collect()
    }

    fn is_simple(lp: &LoopPath) -> bool {
        let segs: Vec<_> = lp.segments().collect();
        let n = segs.len();
        for a in 0..n {
            for b in a + 2..n {
                if a == 0 && b == n - 1 {
                    continue;
                }
                if segments_intersect(segs[a].0, segs[a].1, segs[b].0, segs[b].1) {
                    return false;
                }
            }
        }
        lp.is_self_avoiding()
    }

    #[test]
    fn circle_contour_is_close() {
        let h = 0.01;
        let hull = hull_of_points(&circle(1.0, Point::new(0.3, 0.2), 2000), h).unwrap();
        for v in hull.boundary().vertices() {
            let r = (v - Point::new(0.3, 0.2)).norm();
            assert!((r - 1.0).abs() <= 1.5 * h, "r = {r}");
        }
        assert!((hull.area() - PI).abs() < 0.01, "{}", hull.area());
        assert!(hull.cell_area() > PI);
        assert!(is_simple(hull.boundary()));
    }

    #[test]
    fn figure_eight_hull_is_union_of_lobes() {
        // two unit circles tangent at the origin, traced as one closed path
        let mut pts = Vec::new();
        let n = 1000;
        for k in 0..n {
            pts.push(Point::new(1.0, 0.0) - Point::from_polar(1.0, 2.0 * PI * k as f64 / n as f64));
        }
        for k in 0..n {
            pts.push(Point::new(-1.0, 0.0) + Point::from_polar(1.0, 2.0 * PI * k as f64 / n as f64));
        }
        let hull = hull_of_points(&pts, 0.01).unwrap();
        assert!((hull.area() - 2.0 * PI).abs() < 0.03, "{}", hull.area());
        assert!(is_simple(hull.boundary()));
        let bb = hull.boundary().bbox();
        assert!((bb.width() - 4.0).abs() < 0.03);
    }

    #[test]
    fn degenerate_and_open_paths() {
        let tiny = circle(0.001, Point::new(0.0, 0.0), 10);
        assert!(matches!(hull_of_points(&tiny, 0.01), Err(Error::Degenerate(_))));
        let open = PlanarPath::new(vec![0.0, 1.0, 2.0], vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0)]).unwrap();
        assert_eq!(outer_boundary(&open, 0.1).unwrap_err(), Error::NotClosed);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn random_walk_hulls_are_simple_and_cover_the_path(seed in 0u64..10_000) {
            let mut rng = crate::rng::RngStream::new(seed, 0).rng();
            let b = super::super::sample_brownian_bridge(200, &mut rng).unwrap();
            let hull = path_hull(&b, 0.05).unwrap();
            prop_assert!(is_simple(hull.boundary()));
            prop_assert!(hull.hull_cells() >= hull.path_cells());
            prop_assert!(hull.cell_area() >= hull.path_area());
            // every path point lies inside or within one cell of the contour
            for &p in b.points() {
                match hull.boundary().surrounds(p) {
                    Ok(inside) => prop_assert!(inside || hull.boundary().vertices().iter().any(|v| (v - p).norm() < 0.05)),
                    Err(_) => {}
                }
            }
        }
    }
}
