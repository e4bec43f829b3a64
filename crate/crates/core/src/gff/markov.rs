//! Domain decomposition of a field along a cut: `h` is the harmonic
//! extension of its values on the cut plus two independent Dirichlet fields
//! on the pieces.

use std::collections::VecDeque;

use crate::error::{invalid, Error, Result};

use super::{Dirichlet, FieldSample, GffDomain};

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovParts {
    pub harmonic: FieldSample,
    pub first: FieldSample,
    pub second: FieldSample,
}

/// A cut with the two interior pieces it leaves and the factorization of
/// the Laplacian on their union, reusable across samples.
#[derive(Debug, Clone)]
pub struct MarkovSplit {
    cut: Vec<usize>,
    pieces: [Vec<usize>; 2],
    solver: Dirichlet,
}

impl MarkovSplit {
    pub fn new(domain: &GffDomain, cut: &[usize]) -> Result<Self> {
        let n = domain.len();
        let mut blocked = vec![false; n];
        for &c in cut {
            if c >= n || domain.is_boundary(c) {
                return Err(invalid("cut sites must be interior"));
            }
            blocked[c] = true;
        }
        let mut label = vec![usize::MAX; n];
        let mut pieces: Vec<Vec<usize>> = Vec::new();
        for &s in domain.interior() {
            if blocked[s] || label[s] != usize::MAX {
                continue;
            }
            let id = pieces.len();
            let mut piece = Vec::new();
            let mut queue = VecDeque::from([s]);
            label[s] = id;
            while let Some(v) = queue.pop_front() {
                piece.push(v);
                for u in domain.graph().neighbors(v) {
                    if !domain.is_boundary(u) && !blocked[u] && label[u] == usize::MAX {
                        label[u] = id;
                        queue.push_back(u);
                    }
                }
            }
            pieces.push(piece);
        }
        match pieces.len() {
            0 | 1 => return Err(Error::NotSeparating),
            2 => {}
            k => return Err(invalid(format!("cut leaves {k} pieces, expected 2"))),
        }
        let second = pieces.pop().unwrap_or_default();
        let first = pieces.pop().unwrap_or_default();
        let free: Vec<usize> = first.iter().chain(&second).copied().collect();
        let solver = Dirichlet::new(domain.graph(), free)?;
        Ok(Self { cut: cut.to_vec(), pieces: [first, second], solver })
    }

    pub fn pieces(&self) -> &[Vec<usize>; 2] {
        &self.pieces
    }

    pub fn cut(&self) -> &[usize] {
        &self.cut
    }

    pub fn decompose(&self, domain: &GffDomain, h: &FieldSample) -> Result<MarkovParts> {
        if h.values.len() != domain.len() {
            return Err(invalid("field does not match the domain"));
        }
        let mut harmonic = vec![0.0; domain.len()];
        for &c in &self.cut {
            harmonic[c] = h.values[c];
        }
        self.solver.extend(domain.graph(), &mut harmonic);
        let part = |piece: &[usize]| {
            let mut v = vec![0.0; domain.len()];
            for &s in piece {
                v[s] = h.values[s] - harmonic[s];
            }
            FieldSample { values: v }
        };
        Ok(MarkovParts {
            first: part(&self.pieces[0]),
            second: part(&self.pieces[1]),
            harmonic: FieldSample { values: harmonic },
        })
    }
}

/// One-shot decomposition; build a [`MarkovSplit`] to reuse the factorization.
pub fn markov_decompose(domain: &GffDomain, h: &FieldSample, cut: &[usize]) -> Result<MarkovParts> {
    MarkovSplit::new(domain, cut)?.decompose(domain, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gff::{empirical_covariance, green_matrix, sample_many};
    use crate::RngStream;

    /// Middle column of a `w x h` interior.
    fn column(w: usize, h: usize, x: usize) -> Vec<usize> {
        (1..=h).map(|y| y * (w + 2) + x).collect()
    }

    #[test]
    fn rejects_cuts_that_do_not_separate() {
        let d = GffDomain::rectangle(6, 4).unwrap();
        assert_eq!(MarkovSplit::new(&d, &[8 + 2]).unwrap_err(), Error::NotSeparating);
        assert!(MarkovSplit::new(&d, &[0]).is_err());
        // two columns leave three pieces
        let mut two = column(6, 4, 2);
        two.extend(column(6, 4, 5));
        assert!(MarkovSplit::new(&d, &two).is_err());
    }

    #[test]
    fn zero_field_splits_into_zeros() {
        let d = GffDomain::rectangle(6, 4).unwrap();
        let p = markov_decompose(&d, &FieldSample::zeros(&d), &column(6, 4, 3)).unwrap();
        assert!(p.harmonic.values.iter().chain(&p.first.values).chain(&p.second.values).all(|&v| v == 0.0));
    }

    #[test]
    fn reconstruction_is_exact_and_parts_are_harmonic() {
        let d = GffDomain::rectangle(7, 5).unwrap();
        let g = green_matrix(&d).unwrap();
        let split = MarkovSplit::new(&d, &column(7, 5, 4)).unwrap();
        for h in sample_many(&g, 20, RngStream::new(0, 0)) {
            let p = split.decompose(&d, &h).unwrap();
            for v in 0..d.len() {
                let sum = p.harmonic.values[v] + p.first.values[v] + p.second.values[v];
                assert!((sum - h.values[v]).abs() < 1e-12);
            }
            // the harmonic part is harmonic off the cut and the boundary
            for piece in split.pieces() {
                for &s in piece {
                    let nb: f64 = d.graph().neighbors(s).map(|u| p.harmonic.values[u]).sum();
                    assert!((4.0 * p.harmonic.values[s] - nb).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn pieces_are_uncorrelated() {
        let (w, hh) = (6, 4);
        let d = GffDomain::rectangle(w, hh).unwrap();
        let g = green_matrix(&d).unwrap();
        let split = MarkovSplit::new(&d, &column(w, hh, 3)).unwrap();
        let parts: Vec<MarkovParts> = sample_many(&g, 10_000, RngStream::new(1, 0)).iter().map(|h| split.decompose(&d, h).unwrap()).collect();
        let at = |f: &dyn Fn(&MarkovParts) -> &FieldSample, s: usize| parts.iter().map(|p| f(p).values[s]).collect::<Vec<_>>();
        // sites next to the cut on either side, and the farthest pair
        let (a, b) = (2 * (w + 2) + 2, 2 * (w + 2) + 4);
        let (c, e) = (4 * (w + 2) + 1, (w + 2) + w);
        for (x, y) in [(a, b), (c, e), (a, e)] {
            let cov = empirical_covariance(&at(&|p| &p.first, x), &at(&|p| &p.second, y));
            assert!(cov.within_sigma(0.0, 3.0), "{x} {y}: {cov:?}");
            let cov = empirical_covariance(&at(&|p| &p.first, x), &at(&|p| &p.harmonic, y));
            assert!(cov.within_sigma(0.0, 3.0), "{x} {y}: {cov:?}");
        }
        // the field itself is correlated across the cut
        let field = |s: usize| parts.iter().map(|p| p.harmonic.values[s] + p.first.values[s] + p.second.values[s]).collect::<Vec<_>>();
        let raw = empirical_covariance(&field(a), &field(b));
        assert!(raw.z_score(0.0) > 10.0, "{raw:?}");
    }
}
