//! The random-walk loop measure: each unrooted lattice loop of length `n`
//! gets mass `d^-n`, where `d` is the coordination number.
//!
//! Sites use integer coordinates: `Z^2` for the square lattice, the axial
//! coordinates `(i, j)` with six neighbors for the triangular lattice, and
//! the brick-wall embedding for the honeycomb (the vertical bond at `(x, y)`
//! points up when `x + y` is even).

use std::collections::HashSet;

use crate::error::{invalid, Error, Result};
use crate::lattice::LatticeKind;
use crate::loop_models::saw_neighbors;

pub const MAX_RW_LOOP_LENGTH: usize = 12;

fn lattice_neighbors(kind: LatticeKind, (x, y): (i32, i32)) -> Vec<(i32, i32)> {
    match kind {
        LatticeKind::Triangular => vec![(x + 1, y), (x, y + 1), (x - 1, y + 1), (x - 1, y), (x, y - 1), (x + 1, y - 1)],
        _ => {
            let mut out = [(0, 0); 4];
            let n = saw_neighbors(kind, x, y, &mut out);
            out[..n].to_vec()
        }
    }
}

fn adjacent(kind: LatticeKind, a: (i32, i32), b: (i32, i32)) -> bool {
    lattice_neighbors(kind, a).contains(&b)
}

/// Mass `d^-n` of a lattice loop given in raw form (first site repeated at
/// the end). Any cyclic shift of the same loop has the same mass.
pub fn rw_loop_mass(kind: LatticeKind, raw: &[(i32, i32)]) -> Result<f64> {
    if raw.len() < 2 || raw.first() != raw.last() {
        return Err(Error::NotClosed);
    }
    for (k, w) in raw.windows(2).enumerate() {
        if !adjacent(kind, w[0], w[1]) {
            return Err(Error::NotNearestNeighbor(k + 1));
        }
    }
    let n = raw.len() - 1;
    Ok((kind.coordination() as f64).powi(-(n as i32)))
}

/// One equivalence class of loops modulo time shift.
#[derive(Debug, Clone, PartialEq)]
pub struct RwLoopClass {
    /// Lexicographically least rotation of the site sequence (no repeat).
    pub sites: Vec<(i32, i32)>,
    pub mass: f64,
}

impl RwLoopClass {
    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }
}

fn least_rotation(s: &[(i32, i32)]) -> Vec<(i32, i32)> {
    let n = s.len();
    let best = (0..n)
        .min_by(|&a, &b| (0..n).map(|k| s[(a + k) % n].cmp(&s[(b + k) % n])).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap_or(0);
    let mut v = s.to_vec();
    v.rotate_left(best);
    v
}

fn minimal_period(s: &[(i32, i32)]) -> usize {
    let n = s.len();
    (1..=n)
        .find(|&p| n % p == 0 && (0..n).all(|i| s[i] == s[(i + p) % n]))
        .unwrap_or(n)
}

fn graph_distance_bound(kind: LatticeKind, a: (i32, i32), b: (i32, i32)) -> usize {
    let dx = (a.0 - b.0).unsigned_abs() as usize;
    let dy = (a.1 - b.1).unsigned_abs() as usize;
    match kind {
        LatticeKind::Triangular => {
            let dz = ((a.0 + a.1) - (b.0 + b.1)).unsigned_abs() as usize;
            dx.max(dy).max(dz)
        }
        _ => dx + dy,
    }
}

/// Visits every rooted closed walk of length `n` from `origin`, as the
/// sequence of its first `n` sites.
fn for_each_rooted(kind: LatticeKind, origin: (i32, i32), n: usize, mut f: impl FnMut(&[(i32, i32)])) {
    fn rec(kind: LatticeKind, origin: (i32, i32), n: usize, path: &mut Vec<(i32, i32)>, f: &mut dyn FnMut(&[(i32, i32)])) {
        let cur = *path.last().unwrap();
        let remaining = n + 1 - path.len();
        if remaining == 0 {
            if cur == origin {
                f(&path[..n]);
            }
            return;
        }
        for nb in lattice_neighbors(kind, cur) {
            if graph_distance_bound(kind, nb, origin) < remaining {
                path.push(nb);
                rec(kind, origin, n, path, f);
                path.pop();
            }
        }
    }
    let mut path = vec![origin];
    rec(kind, origin, n, &mut path, &mut f);
}

/// All loop classes of length `1..=n_max` visiting `through`, with their
/// masses, sorted by length then by site sequence.
pub fn enumerate_rw_loops(kind: LatticeKind, n_max: usize, through: (i32, i32)) -> Result<Vec<RwLoopClass>> {
    if n_max > MAX_RW_LOOP_LENGTH {
        return Err(invalid(format!("loop length is limited to {MAX_RW_LOOP_LENGTH}")));
    }
    let d = kind.coordination() as f64;
    let mut out = Vec::new();
    for n in 1..=n_max {
        let mut seen: HashSet<Vec<(i32, i32)>> = HashSet::new();
        for_each_rooted(kind, through, n, |w| {
            seen.insert(least_rotation(w));
        });
        let mut classes: Vec<_> = seen.into_iter().collect();
        classes.sort();
        out.extend(classes.into_iter().map(|sites| RwLoopClass { sites, mass: d.powi(-(n as i32)) }));
    }
    Ok(out)
}

/// Number of loop classes of length `n` through `through`, counted without
/// hashing: a class with minimal period `p` whose site sequence visits the
/// root `v` times in `n` steps has `p * v / n` distinct rooted
/// representatives starting at the root, so each rooted walk contributes
/// `n / (p * v)`.
pub fn count_rw_loop_classes_by_period(kind: LatticeKind, n: usize, through: (i32, i32)) -> Result<f64> {
    if n > MAX_RW_LOOP_LENGTH {
        return Err(invalid(format!("loop length is limited to {MAX_RW_LOOP_LENGTH}")));
    }
    let mut total = 0.0;
    for_each_rooted(kind, through, n, |w| {
        let p = minimal_period(w);
        let v = w.iter().filter(|&&s| s == through).count();
        total += n as f64 / (p * v) as f64;
    });
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn masses() {
        let sq = [(0, 0), (1, 0), (1, 1), (0, 1), (0, 0)];
        assert_eq!(rw_loop_mass(LatticeKind::Square, &sq).unwrap(), 4f64.powi(-4));
        let shifted = [(1, 1), (0, 1), (0, 0), (1, 0), (1, 1)];
        assert_eq!(rw_loop_mass(LatticeKind::Square, &shifted).unwrap(), 4f64.powi(-4));
        // a hexagon in the brick wall: (0,0) even goes up
        let hex = [(0, 0), (0, 1), (1, 1), (2, 1), (2, 0), (1, 0), (0, 0)];
        assert_eq!(rw_loop_mass(LatticeKind::Hexagonal, &hex).unwrap(), 3f64.powi(-6));
        assert_eq!(rw_loop_mass(LatticeKind::Square, &sq[..4]), Err(Error::NotClosed));
        assert_eq!(
            rw_loop_mass(LatticeKind::Square, &[(0, 0), (1, 1), (0, 0)]),
            Err(Error::NotNearestNeighbor(1))
        );
    }

    #[test]
    fn backtrack_classes_and_parity() {
        let classes = enumerate_rw_loops(LatticeKind::Square, 3, (0, 0)).unwrap();
        assert_eq!(classes.len(), 4);
        assert!(classes.iter().all(|c| c.len() == 2 && c.mass == 1.0 / 16.0));
        let odd = enumerate_rw_loops(LatticeKind::Square, 7, (0, 0)).unwrap();
        assert!(odd.iter().all(|c| c.len() % 2 == 0));
    }

    #[test]
    fn hashing_and_period_counts_agree() {
        for kind in [LatticeKind::Square, LatticeKind::Hexagonal, LatticeKind::Triangular] {
            let n_max = if kind == LatticeKind::Triangular { 6 } else { 8 };
            let classes = enumerate_rw_loops(kind, n_max, (0, 0)).unwrap();
            for n in 1..=n_max {
                let hashed = classes.iter().filter(|c| c.len() == n).count() as f64;
                let by_period = count_rw_loop_classes_by_period(kind, n, (0, 0)).unwrap();
                assert!((hashed - by_period).abs() < 1e-9, "{kind:?} n={n}: {hashed} vs {by_period}");
            }
        }
        // square n=4 total mass through the origin
        let classes = enumerate_rw_loops(LatticeKind::Square, 4, (0, 0)).unwrap();
        let m4: f64 = classes.iter().filter(|c| c.len() == 4).map(|c| c.mass).sum();
        let oracle = count_rw_loop_classes_by_period(LatticeKind::Square, 4, (0, 0)).unwrap() / 256.0;
        assert!((m4 - oracle).abs() < 1e-15);
    }

    #[test]
    fn triangles_exist_only_off_bipartite() {
        let tri = enumerate_rw_loops(LatticeKind::Triangular, 3, (0, 0)).unwrap();
        // six triangles at the origin, two orientations each
        assert_eq!(tri.iter().filter(|c| c.len() == 3).count(), 12);
        let hex = enumerate_rw_loops(LatticeKind::Hexagonal, 6, (0, 0)).unwrap();
        assert!(hex.iter().all(|c| c.len() % 2 == 0));
    }
}
