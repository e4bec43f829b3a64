use crate::error::{invalid, Result};
use crate::lattice::Graph;

/// Planar dual of a `w x h` square grid: one vertex per unit face plus one
/// for the outer face. Dual edge `e` crosses primal edge `e`.
#[derive(Debug, Clone)]
pub struct SquareDual {
    pub primal: Graph,
    pub dual: Graph,
    pub outer: usize,
}

impl SquareDual {
    pub fn new(w: usize, h: usize) -> Result<Self> {
        if w < 2 || h < 2 {
            return Err(invalid("grid needs at least 2 x 2 sites"));
        }
        let primal = Graph::grid(w, h);
        let (fw, fh) = (w - 1, h - 1);
        let outer = fw * fh;
        let face = |fx: isize, fy: isize| -> usize {
            if fx < 0 || fy < 0 || fx >= fw as isize || fy >= fh as isize {
                outer
            } else {
                fy as usize * fw + fx as usize
            }
        };
        let edges = primal
            .edges()
            .iter()
            .map(|&(a, b)| {
                let (ax, ay) = ((a % w) as isize, (a / w) as isize);
                let (bx, by) = ((b % w) as isize, (b / w) as isize);
                if ay == by {
                    // horizontal edge between the faces above and below
                    let x = ax.min(bx);
                    (face(x, ay - 1), face(x, ay))
                } else {
                    let y = ay.min(by);
                    (face(ax - 1, y), face(ax, y))
                }
            })
            .collect();
        Ok(Self {
            dual: Graph::new(outer + 1, edges),
            primal,
            outer,
        })
    }

    /// Dual edge open iff the primal edge is closed.
    pub fn dual_config(open: &[bool]) -> Vec<bool> {
        open.iter().map(|o| !o).collect()
    }
}

/// `p*` with `p* / (1 - p*) = q (1 - p) / p`.
pub fn dual_p(p: f64, q: f64) -> f64 {
    let r = q * (1.0 - p) / p;
    r / (1.0 + r)
}

pub fn self_dual_p(q: f64) -> f64 {
    q.sqrt() / (1.0 + q.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use crate::spin_fk::{fk_exact, sample_fk, DEFAULT_MAX_STATES};
    use crate::stats::Welford;

    #[test]
    fn dual_structure() {
        let d = SquareDual::new(3, 3).unwrap();
        assert_eq!(d.dual.vertex_count(), 5);
        assert_eq!(d.dual.edge_count(), 12);
        assert_eq!(d.dual.degree(d.outer), 8);
        for f in 0..4 {
            assert_eq!(d.dual.degree(f), 4);
        }
        let open = vec![true; 12];
        assert!(SquareDual::dual_config(&open).iter().all(|&x| !x));
        let mixed: Vec<bool> = (0..12).map(|e| e % 3 == 0).collect();
        assert_eq!(SquareDual::dual_config(&SquareDual::dual_config(&mixed)), mixed);
        assert!((dual_p(self_dual_p(2.0), 2.0) - self_dual_p(2.0)).abs() < 1e-15);
    }

    #[test]
    fn free_fk_maps_to_dual_fk_exactly() {
        let d = SquareDual::new(3, 3).unwrap();
        for (p, q) in [(0.4, 2.0), (self_dual_p(2.0), 2.0), (0.7, 3.5)] {
            let primal = fk_exact(&d.primal, p, q, &[], DEFAULT_MAX_STATES).unwrap();
            let dual = fk_exact(&d.dual, dual_p(p, q), q, &[], DEFAULT_MAX_STATES).unwrap();
            let full = (1usize << 12) - 1;
            for mask in 0..=full {
                assert!((primal.probs[mask] - dual.probs[full ^ mask]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dual_of_sampled_free_fk_matches_wired_enumeration() {
        let d = SquareDual::new(3, 3).unwrap();
        let q = 2.0;
        let p = self_dual_p(q);
        let exact = fk_exact(&d.dual, p, q, &[], DEFAULT_MAX_STATES).unwrap();
        let exact_mean: f64 = exact.probs.iter().enumerate().map(|(m, pr)| pr * (m as u32).count_ones() as f64).sum();
        let mut rng = RngStream::new(12, 0).rng();
        let mut w = Welford::new();
        for _ in 0..20_000 {
            let primal = sample_fk(&d.primal, p, 2, &[], 30, &mut rng).unwrap();
            let dual = SquareDual::dual_config(&primal.open);
            w.push(dual.iter().filter(|&&x| x).count() as f64);
        }
        assert!(w.estimate().within_sigma(exact_mean, 3.0), "{:?} vs {exact_mean}", w.estimate());
    }
}
