use crate::error::{invalid, Error, Result};
use crate::geometry::LoopPath;
use crate::lattice::LatticeKind;
use crate::stats::EstimateWithCI;

const MAX_SQUARE: usize = 16;
const MAX_HEX: usize = 24;

/// Exact walk and polygon counts from the origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SawCountTable {
    pub kind: LatticeKind,
    /// `walks[n]` = number of `n`-step self-avoiding walks, `walks[0] = 1`.
    pub walks: Vec<u64>,
    /// `polygons[n]` = number of self-avoiding polygons of length `n` through
    /// the origin, up to starting point and orientation.
    pub polygons: Vec<u64>,
}

impl SawCountTable {
    pub fn n_max(&self) -> usize {
        self.walks.len() - 1
    }

    /// Every pair `(n, m)` with `n + m <= n_max` violating
    /// `A_{n+m} <= A_n A_m`.
    pub fn submultiplicativity_violations(&self) -> Vec<(usize, usize)> {
        let a = &self.walks;
        let mut bad = Vec::new();
        for n in 1..a.len() {
            for m in 1..a.len() - n {
                if a[n + m] as u128 > a[n] as u128 * a[m] as u128 {
                    bad.push((n, m));
                }
            }
        }
        bad
    }

    /// Rows `N, A_N, A'_N` as CSV.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("N,A_N,A_prime_N_unrooted_unoriented\n");
        for n in 1..self.walks.len() {
            s.push_str(&format!("{},{},{}\n", n, self.walks[n], self.polygons[n]));
        }
        s
    }
}

fn limit(kind: LatticeKind) -> Result<usize> {
    match kind {
        LatticeKind::Square => Ok(MAX_SQUARE),
        LatticeKind::Hexagonal => Ok(MAX_HEX),
        LatticeKind::Triangular => Err(invalid("walk enumeration is implemented for square and hexagonal lattices")),
    }
}

/// Honeycomb as a brick wall on `Z^2`: horizontal bonds everywhere, the
/// vertical bond at `(x, y)` goes up when `x + y` is even and down otherwise.
pub(crate) fn neighbors(kind: LatticeKind, x: i32, y: i32, out: &mut [(i32, i32); 4]) -> usize {
    match kind {
        LatticeKind::Square => {
            *out = [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)];
            4
        }
        _ => {
            let vy = if (x + y).rem_euclid(2) == 0 { y + 1 } else { y - 1 };
            out[0] = (x + 1, y);
            out[1] = (x - 1, y);
            out[2] = (x, vy);
            3
        }
    }
}

struct Walker {
    kind: LatticeKind,
    n_max: usize,
    side: i32,
    visited: Vec<bool>,
    walks: Vec<u64>,
    closures: Vec<u64>,
}

impl Walker {
    fn idx(&self, x: i32, y: i32) -> usize {
        ((y + self.n_max as i32) * self.side + x + self.n_max as i32) as usize
    }

    fn extend(&mut self, x: i32, y: i32, len: usize) {
        self.walks[len] += 1;
        let mut nb = [(0, 0); 4];
        let k = neighbors(self.kind, x, y, &mut nb);
        for &(nx, ny) in &nb[..k] {
            if nx == 0 && ny == 0 && len >= 2 && len < self.n_max {
                // closing step back to the origin
                self.closures[len + 1] += 1;
            }
            if len == self.n_max {
                continue;
            }
            let i = self.idx(nx, ny);
            if !self.visited[i] {
                self.visited[i] = true;
                self.extend(nx, ny, len + 1);
                self.visited[i] = false;
            }
        }
    }
}

fn run(kind: LatticeKind, n_max: usize) -> Result<SawCountTable> {
    let lim = limit(kind)?;
    if n_max > lim {
        return Err(Error::TooLarge {
            states: n_max as u128,
            limit: lim as u128,
        });
    }
    if n_max == 0 {
        return Err(invalid("n_max must be positive"));
    }
    let side = 2 * n_max as i32 + 1;
    let mut w = Walker {
        kind,
        n_max,
        side,
        visited: vec![false; (side * side) as usize],
        walks: vec![0; n_max + 1],
        closures: vec![0; n_max + 1],
    };
    let o = w.idx(0, 0);
    w.visited[o] = true;
    w.extend(0, 0, 0);
    // each polygon through the origin is traversed from the origin in two
    // directions
    let polygons = w.closures.iter().map(|c| c / 2).collect();
    Ok(SawCountTable {
        kind,
        walks: w.walks,
        polygons,
    })
}

/// Exact counts of `n`-step self-avoiding walks from the origin, `n <= n_max`
/// (`n_max <= 16` on the square lattice, `<= 24` on the honeycomb).
pub fn enumerate_saw(kind: LatticeKind, n_max: usize) -> Result<SawCountTable> {
    run(kind, n_max)
}

/// Same enumeration; the polygon column is the object of interest.
pub fn enumerate_sap(kind: LatticeKind, n_max: usize) -> Result<Vec<u64>> {
    Ok(run(kind, n_max)?.polygons)
}

/// `lambda^{-N}` for a self-avoiding loop of `N` edges.
pub fn sap_mass(w: &LoopPath, lambda: f64) -> Result<f64> {
    if !(lambda > 1.0) {
        return Err(invalid("growth constant must exceed 1"));
    }
    if !w.is_self_avoiding() {
        return Err(Error::NotSelfAvoiding(0));
    }
    Ok(lambda.powi(-(w.len() as i32)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnectiveEstimate {
    /// `A_N^{1/N}`, an upper bound by submultiplicativity.
    pub root: f64,
    /// `A_N / A_{N-1}`.
    pub ratio: f64,
    /// Ratio estimates with the leading `1/N` correction removed, at `N` and
    /// `N - 1`: `sqrt((n R_n - (n-2) R_{n-2}) / 2)` with `R_n = A_n / A_{n-2}`.
    /// Two-step ratios avoid the odd-even oscillation of bipartite lattices;
    /// the two parities approach the limit from opposite sides.
    pub corrected_ratios: (f64, f64),
    /// Largest `(c p_n)^{1/n}` over the tabulated polygon lengths, where
    /// `p_n = A'_n / n` and `c` is the number of vertices per lattice cell; a
    /// rigorous but slowly converging lower bound.
    pub polygon_root: f64,
    /// `[min(corrected_ratios), root]`.
    pub bracket: (f64, f64),
    pub estimate: EstimateWithCI,
}

fn corrected_ratio(a: &[u64], n: usize) -> f64 {
    let r = |m: usize| a[m] as f64 / a[m - 2] as f64;
    let nf = n as f64;
    ((nf * r(n) - (nf - 2.0) * r(n - 2)) / 2.0).sqrt()
}

/// Brackets the connective constant from a count table.
pub fn estimate_connective_constant(table: &SawCountTable) -> Result<ConnectiveEstimate> {
    let n = table.n_max();
    if n < 8 {
        return Err(invalid("need n_max >= 8"));
    }
    let a = &table.walks;
    let root = (a[n] as f64).powf(1.0 / n as f64);
    let ratio = a[n] as f64 / a[n - 1] as f64;
    let corrected = (corrected_ratio(a, n), corrected_ratio(a, n - 1));
    let cell = match table.kind {
        LatticeKind::Hexagonal => 2.0,
        _ => 1.0,
    };
    let polygon_root = (1..=n)
        .filter(|&m| table.polygons[m] > 0)
        .map(|m| (cell * table.polygons[m] as f64 / m as f64).powf(1.0 / m as f64))
        .fold(0.0, f64::max);
    let lower = corrected.0.min(corrected.1);
    let mid = 0.5 * (corrected.0 + corrected.1);
    Ok(ConnectiveEstimate {
        root,
        ratio,
        corrected_ratios: corrected,
        polygon_root,
        bracket: (lower, root),
        estimate: EstimateWithCI::new(mid, 0.5 * (corrected.0 - corrected.1).abs(), a[n]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use std::collections::HashSet;

    /// Independent oracle: explicit enumeration of walks as vertex lists with
    /// a hash-set occupancy test.
    fn naive_walks(kind: LatticeKind, n: usize) -> Vec<u64> {
        fn rec(kind: LatticeKind, path: &mut Vec<(i32, i32)>, seen: &mut HashSet<(i32, i32)>, n: usize, out: &mut Vec<u64>) {
            out[path.len() - 1] += 1;
            if path.len() - 1 == n {
                return;
            }
            let (x, y) = *path.last().unwrap();
            let mut cand = vec![(x + 1, y), (x - 1, y)];
            match kind {
                LatticeKind::Square => cand.extend([(x, y + 1), (x, y - 1)]),
                _ => cand.push((x, if (x + y) % 2 == 0 { y + 1 } else { y - 1 })),
            }
            for c in cand {
                if seen.insert(c) {
                    path.push(c);
                    rec(kind, path, seen, n, out);
                    path.pop();
                    seen.remove(&c);
                }
            }
        }
        let mut out = vec![0; n + 1];
        rec(kind, &mut vec![(0, 0)], &mut HashSet::from([(0, 0)]), n, &mut out);
        out
    }

    #[test]
    fn small_counts() {
        let sq = enumerate_saw(LatticeKind::Square, 8).unwrap();
        assert_eq!(&sq.walks[1..5], &[4, 12, 36, 100]);
        assert_eq!(sq.walks, naive_walks(LatticeKind::Square, 8));
        assert_eq!(sq.polygons[4], 4);
        assert_eq!(sq.polygons[6], 12);
        let hex = enumerate_saw(LatticeKind::Hexagonal, 10).unwrap();
        assert_eq!(hex.walks[1], 3);
        assert_eq!(hex.walks, naive_walks(LatticeKind::Hexagonal, 10));
        assert!(hex.polygons[..6].iter().all(|&c| c == 0));
        assert_eq!(hex.polygons[6], 3);
        assert!(enumerate_saw(LatticeKind::Square, 17).is_err());
        assert!(enumerate_saw(LatticeKind::Triangular, 5).is_err());
    }

    #[test]
    fn submultiplicative_and_root_decreasing() {
        let sq = enumerate_saw(LatticeKind::Square, 14).unwrap();
        assert!(sq.submultiplicativity_violations().is_empty());
        let roots: Vec<f64> = (1..=14).map(|n| (sq.walks[n] as f64).powf(1.0 / n as f64)).collect();
        assert!(roots.windows(2).all(|w| w[1] <= w[0]));
        let est = estimate_connective_constant(&sq).unwrap();
        assert!(est.root >= 2.5 && est.root <= 3.0);
        assert!(est.root >= est.bracket.0);
        assert!(est.bracket.0 < 2.638_16 && est.root > 2.638_16);
    }

    #[test]
    fn honeycomb_bracket() {
        let hex = enumerate_saw(LatticeKind::Hexagonal, 20).unwrap();
        assert_eq!(hex.walks[20], 704_304);
        assert!(hex.submultiplicativity_violations().is_empty());
        let est = estimate_connective_constant(&hex).unwrap();
        let mu = (2.0 + 2f64.sqrt()).sqrt();
        assert!(est.bracket.0 <= mu && mu <= est.bracket.1, "{est:?}");
        assert!(est.polygon_root < mu && est.ratio > mu);
    }

    #[test]
    fn masses() {
        let lam = (2.0 + 2f64.sqrt()).sqrt();
        let hexagon = LoopPath::new((0..6).map(|k| Point::from_polar(1.0, k as f64 * std::f64::consts::PI / 3.0)).collect()).unwrap();
        assert!((sap_mass(&hexagon, lam).unwrap() - (2.0 + 2f64.sqrt()).powi(-3)).abs() < 1e-15);
        assert_eq!(sap_mass(&hexagon.translate(Point::new(3.0, 1.0)), lam).unwrap(), sap_mass(&hexagon, lam).unwrap());
        let square = LoopPath::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)]).unwrap();
        assert!(sap_mass(&square, lam).unwrap() > sap_mass(&hexagon, lam).unwrap());
        // two unit squares sharing the vertex (1, 1)
        let eight = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (2.0, 1.0), (2.0, 2.0), (1.0, 2.0), (1.0, 1.0), (0.0, 1.0)];
        let bow = LoopPath::new(eight.iter().map(|&(x, y)| Point::new(x, y)).collect()).unwrap();
        assert!(sap_mass(&bow, lam).is_err());
        assert!(sap_mass(&square, 1.0).is_err());
    }
}
