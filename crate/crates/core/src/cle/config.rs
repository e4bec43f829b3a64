use std::collections::{HashMap, HashSet, VecDeque};

use crate::brownian::HullRaster;
use crate::error::{invalid, Error, Result};
use crate::geometry::{segments_intersect, BBox, LoopPath, Point};
use crate::lattice::{Shape, UnionFind};

/// Drops a repeated closing point so every polyline is a vertex cycle.
pub(crate) fn cycle_of(line: &[Point]) -> &[Point] {
    if line.len() > 1 && line.first() == line.last() {
        &line[..line.len() - 1]
    } else {
        line
    }
}

#[derive(Debug, Clone, Copy)]
struct Seg {
    owner: u32,
    pos: u32,
    a: Point,
    b: Point,
}

/// Uniform-grid spatial hash over the segments of closed polylines.
#[derive(Debug, Clone)]
pub(crate) struct SegmentIndex {
    origin: Point,
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<u32>>,
    segs: Vec<Seg>,
    lens: Vec<usize>,
}

impl SegmentIndex {
    pub(crate) fn new(lines: &[&[Point]]) -> Self {
        let lines: Vec<&[Point]> = lines.iter().map(|l| cycle_of(l)).collect();
        let mut segs = Vec::new();
        let mut total = 0.0;
        for (o, l) in lines.iter().enumerate() {
            let n = l.len();
            for k in 0..n {
                let (a, b) = (l[k], l[(k + 1) % n]);
                total += (b - a).norm();
                segs.push(Seg { owner: o as u32, pos: k as u32, a, b });
            }
        }
        let bbox = BBox::of(lines.iter().flat_map(|l| l.iter().copied())).unwrap_or(BBox { min: Point::new(0.0, 0.0), max: Point::new(1.0, 1.0) });
        let extent = bbox.width().max(bbox.height()).max(f64::MIN_POSITIVE);
        let mean = if segs.is_empty() { extent } else { total / segs.len() as f64 };
        let cell = (2.0 * mean).clamp(extent / 2048.0, extent).max(f64::MIN_POSITIVE);
        let mut idx = Self { origin: bbox.min, cell, buckets: HashMap::new(), segs, lens: lines.iter().map(|l| l.len()).collect() };
        for s in 0..idx.segs.len() {
            let (a, b) = (idx.segs[s].a, idx.segs[s].b);
            for key in idx.cells_of(a, b) {
                idx.buckets.entry(key).or_default().push(s as u32);
            }
        }
        idx
    }

    fn cells_of(&self, a: Point, b: Point) -> impl Iterator<Item = (i64, i64)> {
        let f = |x: f64, o: f64| ((x - o) / self.cell).floor() as i64;
        let (x0, x1) = (f(a.re.min(b.re), self.origin.re), f(a.re.max(b.re), self.origin.re));
        let (y0, y1) = (f(a.im.min(b.im), self.origin.im), f(a.im.max(b.im), self.origin.im));
        (y0..=y1).flat_map(move |y| (x0..=x1).map(move |x| (x, y)))
    }

    /// Whether segment `ab` meets any indexed segment.
    pub(crate) fn hits(&self, a: Point, b: Point) -> bool {
        self.cells_of(a, b).any(|key| {
            self.buckets
                .get(&key)
                .is_some_and(|v| v.iter().any(|&s| segments_intersect(a, b, self.segs[s as usize].a, self.segs[s as usize].b)))
        })
    }

    fn adjacent_in_cycle(&self, x: &Seg, y: &Seg) -> bool {
        let n = self.lens[x.owner as usize] as u32;
        let d = x.pos.abs_diff(y.pos);
        d <= 1 || d == n - 1
    }

    /// Unions every pair of polylines whose segments meet.
    fn union_crossing(&self, uf: &mut UnionFind) {
        for bucket in self.buckets.values() {
            for (k, &s) in bucket.iter().enumerate() {
                let x = self.segs[s as usize];
                for &t in &bucket[k + 1..] {
                    let y = self.segs[t as usize];
                    if x.owner == y.owner || uf.connected(x.owner as usize, y.owner as usize) {
                        continue;
                    }
                    if segments_intersect(x.a, x.b, y.a, y.b) {
                        uf.union(x.owner as usize, y.owner as usize);
                    }
                }
            }
        }
    }

    /// Whether polyline `owner` meets itself away from shared endpoints.
    fn self_crossing(&self, owner: u32) -> bool {
        self.buckets.values().any(|bucket| {
            bucket.iter().enumerate().any(|(k, &s)| {
                let x = self.segs[s as usize];
                x.owner == owner
                    && bucket[k + 1..].iter().any(|&t| {
                        let y = self.segs[t as usize];
                        y.owner == owner && !self.adjacent_in_cycle(&x, &y) && segments_intersect(x.a, x.b, y.a, y.b)
                    })
            })
        })
    }
}

/// Whether a closed polyline is a simple loop.
pub fn is_simple_polyline(line: &[Point]) -> bool {
    let line = cycle_of(line);
    if line.len() < 3 {
        return false;
    }
    !SegmentIndex::new(&[line]).self_crossing(0)
}

/// Connected components of the intersection graph of closed polylines:
/// two polylines are adjacent iff some pair of their segments meets.
/// Components are sorted by their smallest member.
pub fn cluster_polylines(lines: &[&[Point]]) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::new(lines.len());
    SegmentIndex::new(lines).union_crossing(&mut uf);
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for k in 0..lines.len() {
        groups.entry(uf.find(k)).or_default().push(k);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort_by_key(|g| g[0]);
    out
}

/// A shape with the interiors of some loops removed.
#[derive(Debug, Clone)]
pub struct Region {
    base: Shape,
    holes: Vec<LoopPath>,
    hole_index: Option<SegmentIndex>,
}

impl Region {
    pub fn new(base: Shape, holes: Vec<LoopPath>) -> Self {
        let hole_index = if holes.is_empty() {
            None
        } else {
            let lines: Vec<&[Point]> = holes.iter().map(|l| l.vertices()).collect();
            Some(SegmentIndex::new(&lines))
        };
        Self { base, holes, hole_index }
    }

    pub fn base(&self) -> &Shape {
        &self.base
    }

    pub fn holes(&self) -> &[LoopPath] {
        &self.holes
    }

    pub fn bbox(&self) -> BBox {
        self.base.bbox()
    }

    pub fn contains(&self, p: Point) -> bool {
        self.base.contains(p) && self.holes.iter().all(|h| matches!(h.surrounds(p), Ok(false)))
    }

    /// Whether the closed polyline lies in the region without touching a
    /// hole.
    pub fn admits(&self, line: &[Point]) -> bool {
        let line = cycle_of(line);
        if !line.iter().all(|&p| self.base.contains(p)) {
            return false;
        }
        if self.holes.is_empty() {
            return true;
        }
        if !line.iter().take(1).all(|&p| self.contains(p)) {
            return false;
        }
        let idx = self.hole_index.as_ref().expect("index exists when holes do");
        let n = line.len();
        !(0..n).any(|k| idx.hits(line[k], line[(k + 1) % n]))
    }
}

impl From<Shape> for Region {
    fn from(base: Shape) -> Self {
        Region::new(base, Vec::new())
    }
}

/// Pairwise disjoint, non-nested loops in a region.
#[derive(Debug, Clone)]
pub struct SimpleLoopConfig {
    pub domain: Region,
    pub loops: Vec<LoopPath>,
}

impl SimpleLoopConfig {
    pub fn new(domain: Region, loops: Vec<LoopPath>) -> Result<Self> {
        let c = Self { domain, loops };
        c.validate()?;
        Ok(c)
    }

    pub fn empty(domain: Region) -> Self {
        Self { domain, loops: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.loops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loops.is_empty()
    }

    /// Checks the two defining properties with exact predicates.
    pub fn validate(&self) -> Result<()> {
        let lines: Vec<&[Point]> = self.loops.iter().map(|l| l.vertices()).collect();
        let clusters = cluster_polylines(&lines);
        if clusters.iter().any(|c| c.len() > 1) {
            return Err(Error::OverlappingLoops);
        }
        let boxes: Vec<BBox> = self.loops.iter().map(|l| l.bbox()).collect();
        for a in 0..self.loops.len() {
            for b in 0..self.loops.len() {
                if a != b && boxes[b].contains_box(&boxes[a]) && self.loops[b].surrounds(self.loops[a].vertices()[0]) == Ok(true) {
                    return Err(Error::NestedLoops);
                }
            }
        }
        Ok(())
    }

    pub fn areas(&self) -> Vec<f64> {
        self.loops.iter().map(|l| l.area()).collect()
    }

    pub fn largest_area(&self) -> f64 {
        self.areas().into_iter().fold(0.0, f64::max)
    }

    /// Whether some loop surrounds `z`.
    pub fn covers(&self, z: Point) -> bool {
        self.loops.iter().any(|l| l.surrounds(z) == Ok(true))
    }
}

struct Item {
    members: Vec<usize>,
    raster: HullRaster,
    cells: Vec<(i64, i64)>,
}

impl Item {
    fn new(members: Vec<usize>, lines: &[&[Point]], h: f64, anchor: Point) -> Result<Option<Item>> {
        let parts: Vec<&[Point]> = members.iter().map(|&k| cycle_of(lines[k])).collect();
        match HullRaster::new(&parts, h, anchor) {
            Ok(raster) => {
                let cells: Vec<_> = raster.cells().collect();
                Ok(Some(Item { members, raster, cells }))
            }
            Err(Error::Degenerate(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }

    fn key(&self) -> (std::cmp::Reverse<usize>, (i64, i64)) {
        let (i, j) = self.cells[0];
        (std::cmp::Reverse(self.cells.len()), (j, i))
    }
}

/// Outer boundaries of clusters, keeping only the outermost.
///
/// Each cluster is filled on a grid of pitch `h` anchored at the domain's
/// bounding box, so all hulls are aligned cell for cell. A hull whose cells
/// lie inside an already placed hull is nested and dropped; hulls that
/// overlap or share a grid edge without nesting are merged into one cluster,
/// since their contours cannot be separated at this resolution. Clusters
/// below the resolution (diameter under `2h`) are dropped. A cluster made
/// of one simple loop keeps that loop exactly; every other boundary is the
/// traced contour of its filled cells.
pub fn outermost_boundaries(lines: &[&[Point]], clusters: &[Vec<usize>], domain: Region, h: f64) -> Result<SimpleLoopConfig> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid("resolution must be positive"));
    }
    let anchor = domain.bbox().min;
    let mut items = Vec::new();
    for c in clusters {
        if let Some(it) = Item::new(c.clone(), lines, h, anchor)? {
            items.push(it);
        }
    }
    items.sort_by_key(|it| it.key());
    let mut queue: VecDeque<Item> = items.into();
    let mut owner: HashMap<(i64, i64), usize> = HashMap::new();
    let mut placed: Vec<Option<Item>> = Vec::new();
    while let Some(item) = queue.pop_front() {
        let mut touched: HashSet<usize> = HashSet::new();
        let mut all_owned_by: Option<Option<usize>> = None;
        for &(i, j) in &item.cells {
            let o = owner.get(&(i, j)).copied();
            all_owned_by = match all_owned_by {
                None => Some(o),
                Some(prev) if prev == o => Some(prev),
                _ => Some(None),
            };
            for nb in [(i, j), (i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)] {
                if let Some(&r) = owner.get(&nb) {
                    touched.insert(r);
                }
            }
        }
        if touched.is_empty() {
            let id = placed.len();
            for &c in &item.cells {
                owner.insert(c, id);
            }
            placed.push(Some(item));
            continue;
        }
        if let Some(Some(r)) = all_owned_by {
            if touched.len() == 1 && touched.contains(&r) {
                continue;
            }
        }
        let mut members = item.members;
        let mut touched: Vec<usize> = touched.into_iter().collect();
        touched.sort_unstable();
        for r in touched {
            let old = placed[r].take().expect("owners point at placed items");
            for c in &old.cells {
                owner.remove(c);
            }
            members.extend(old.members);
        }
        members.sort_unstable();
        if let Some(merged) = Item::new(members, lines, h, anchor)? {
            queue.push_front(merged);
        }
    }
    let mut loops = Vec::new();
    for it in placed.into_iter().flatten() {
        let single = cycle_of(lines[it.members[0]]);
        if it.members.len() == 1 && is_simple_polyline(single) {
            loops.push(LoopPath::new(single.to_vec())?);
        } else {
            loops.push(it.raster.contour()?);
        }
    }
    loops.sort_by(|a, b| {
        let (pa, pb) = (a.canonical().vertices()[0], b.canonical().vertices()[0]);
        pa.re.total_cmp(&pb.re).then(pa.im.total_cmp(&pb.im)).then(a.len().cmp(&b.len()))
    });
    SimpleLoopConfig::new(domain, loops)
}

/// Outermost cluster boundaries of a set of closed polylines.
pub fn boundaries_of(lines: &[&[Point]], domain: Region, h: f64) -> Result<SimpleLoopConfig> {
    let clusters = cluster_polylines(lines);
    outermost_boundaries(lines, &clusters, domain, h)
}

/// Superposes two ensembles on the same domain: the union of their loops is
/// clustered and the outermost cluster boundaries are kept.
pub fn combine_ensembles(a: &SimpleLoopConfig, b: &SimpleLoopConfig, h: f64) -> Result<SimpleLoopConfig> {
    if a.domain.base != b.domain.base {
        return Err(invalid("ensembles live on different domains"));
    }
    let lines: Vec<&[Point]> = a.loops.iter().chain(b.loops.iter()).map(|l| l.vertices()).collect();
    boundaries_of(&lines, a.domain.clone(), h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn circle(c: Point, r: f64, n: usize) -> Vec<Point> {
        (0..n).map(|k| c + Point::from_polar(r, 2.0 * PI * k as f64 / n as f64)).collect()
    }

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    fn unit() -> Region {
        Shape::unit_square().into()
    }

    #[test]
    fn clustering_basics() {
        let a = circle(p(0.2, 0.2), 0.1, 64);
        let b = circle(p(0.8, 0.8), 0.1, 64);
        let c = circle(p(0.3, 0.2), 0.1, 64);
        assert_eq!(cluster_polylines(&[&a, &b]), vec![vec![0], vec![1]]);
        assert_eq!(cluster_polylines(&[&a, &c]), vec![vec![0, 1]]);
        assert_eq!(cluster_polylines(&[&a, &b, &c]), vec![vec![0, 2], vec![1]]);
        assert!(cluster_polylines(&[]).is_empty());
    }

    #[test]
    fn simple_polyline_detection() {
        assert!(is_simple_polyline(&circle(p(0.0, 0.0), 1.0, 30)));
        let eight = vec![p(0., 0.), p(1., 1.), p(1., 0.), p(0., 1.)];
        assert!(!is_simple_polyline(&eight));
        let mut closed = circle(p(0.0, 0.0), 1.0, 30);
        closed.push(closed[0]);
        assert!(is_simple_polyline(&closed));
    }

    #[test]
    fn single_simple_loop_kept_exactly_and_nesting_dropped() {
        let outer = circle(p(0.5, 0.5), 0.3, 200);
        let inner = circle(p(0.5, 0.5), 0.1, 100);
        let cfg = boundaries_of(&[&outer, &inner], unit(), 0.01).unwrap();
        assert_eq!(cfg.len(), 1);
        assert_eq!(cfg.loops[0], LoopPath::new(outer.clone()).unwrap());
    }

    #[test]
    fn crossing_loops_give_one_contour() {
        let a = circle(p(0.4, 0.5), 0.15, 200);
        let b = circle(p(0.6, 0.5), 0.15, 200);
        let cfg = boundaries_of(&[&a, &b], unit(), 0.005).unwrap();
        assert_eq!(cfg.len(), 1);
        let area = cfg.loops[0].area();
        // union of two discs of radius r with centers 0.2 apart
        let (r, d): (f64, f64) = (0.15, 0.2);
        let lens = 2.0 * r * r * (d / (2.0 * r)).acos() - 0.5 * d * (4.0 * r * r - d * d).sqrt();
        let union = 2.0 * PI * r * r - lens;
        assert!((area - union).abs() < 0.01, "{area} vs {union}");
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let a = LoopPath::new(circle(p(0.5, 0.5), 0.3, 50)).unwrap();
        let b = LoopPath::new(circle(p(0.5, 0.5), 0.1, 50)).unwrap();
        let c = LoopPath::new(circle(p(0.7, 0.5), 0.3, 50)).unwrap();
        assert_eq!(SimpleLoopConfig::new(unit(), vec![a.clone(), b]).unwrap_err(), Error::NestedLoops);
        assert_eq!(SimpleLoopConfig::new(unit(), vec![a, c]).unwrap_err(), Error::OverlappingLoops);
    }

    #[test]
    fn combine_identity_and_symmetry() {
        let g1 = boundaries_of(&[&circle(p(0.3, 0.3), 0.1, 80), &circle(p(0.7, 0.7), 0.15, 80)], unit(), 0.01).unwrap();
        let empty = SimpleLoopConfig::empty(unit());
        let same = combine_ensembles(&g1, &empty, 0.01).unwrap();
        assert_eq!(same.loops, g1.loops);
        let g2 = boundaries_of(&[&circle(p(0.4, 0.3), 0.1, 80), &circle(p(0.2, 0.8), 0.05, 80)], unit(), 0.01).unwrap();
        let ab = combine_ensembles(&g1, &g2, 0.01).unwrap();
        let ba = combine_ensembles(&g2, &g1, 0.01).unwrap();
        assert_eq!(ab.loops, ba.loops);
        assert_eq!(ab.len(), 3);
    }

    #[test]
    fn region_holes() {
        let hole = LoopPath::new(circle(p(0.5, 0.5), 0.2, 80)).unwrap();
        let r = Region::new(Shape::unit_square(), vec![hole]);
        assert!(!r.contains(p(0.5, 0.5)));
        assert!(r.contains(p(0.1, 0.1)));
        assert!(r.admits(&circle(p(0.15, 0.15), 0.05, 20)));
        assert!(!r.admits(&circle(p(0.5, 0.5), 0.05, 20)));
        assert!(!r.admits(&circle(p(0.5, 0.25), 0.1, 20)));
        assert!(!r.admits(&circle(p(0.95, 0.5), 0.1, 20)));
    }
}
