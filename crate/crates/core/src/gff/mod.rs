//! Discrete Gaussian free field with Dirichlet boundary conditions.
//!
//! The Laplacian is the unweighted graph Laplacian `L = D - A`; the Green
//! matrix is the inverse of its block on interior sites, so that
//! `E h(x) h(y) = G(x, y)` and the field vanishes on boundary sites.

mod level_line;
mod markov;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::lattice::{Graph, LatticeDomain};
use crate::rng::{replicate, Rng, RngStream};

pub use level_line::{driving_diagnostic, lambda_sweep, level_line_explore, DrivingDiagnostic, LevelLine, LevelLineDomain};
pub use markov::{markov_decompose, MarkovParts, MarkovSplit};

/// Largest interior handled by the dense factorizations.
pub const MAX_INTERIOR: usize = 10_000;

/// A graph with a set of boundary vertices on which fields vanish.
#[derive(Debug, Clone)]
pub struct GffDomain {
    graph: Graph,
    boundary: Vec<bool>,
    interior: Vec<usize>,
}

impl GffDomain {
    pub fn new(graph: Graph, boundary: Vec<bool>) -> Result<Self> {
        if boundary.len() != graph.vertex_count() {
            return Err(invalid("one boundary flag per vertex"));
        }
        let interior: Vec<usize> = (0..boundary.len()).filter(|&v| !boundary[v]).collect();
        if interior.is_empty() {
            return Err(Error::EmptyDomain);
        }
        Ok(Self { graph, boundary, interior })
    }

    /// Sites missing a lattice neighbor are the boundary.
    pub fn from_lattice(domain: &LatticeDomain) -> Result<Self> {
        Self::new(domain.graph().clone(), (0..domain.len()).map(|s| domain.is_boundary(s)).collect())
    }

    /// `w x h` interior sites of the square lattice inside a ring of
    /// boundary sites; site `(x, y)`, `0 <= x < w + 2`, has index
    /// `y * (w + 2) + x`.
    pub fn rectangle(w: usize, h: usize) -> Result<Self> {
        if w == 0 || h == 0 {
            return Err(Error::EmptyDomain);
        }
        let (gw, gh) = (w + 2, h + 2);
        let boundary = (0..gw * gh).map(|s| {
            let (x, y) = (s % gw, s / gw);
            x == 0 || y == 0 || x == gw - 1 || y == gh - 1
        });
        Self::new(Graph::grid(gw, gh), boundary.collect())
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn len(&self) -> usize {
        self.boundary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boundary.is_empty()
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior
    }
}

/// Cholesky factor of the Laplacian block on a set of free sites; every
/// other site is held at prescribed values.
#[derive(Debug, Clone)]
pub(crate) struct Dirichlet {
    free: Vec<usize>,
    slot: Vec<Option<usize>>,
    chol: Cholesky<f64, Dyn>,
}

impl Dirichlet {
    pub(crate) fn new(graph: &Graph, free: Vec<usize>) -> Result<Self> {
        if free.len() > MAX_INTERIOR {
            return Err(Error::TooLarge { states: free.len() as u128, limit: MAX_INTERIOR as u128 });
        }
        let mut slot = vec![None; graph.vertex_count()];
        for (k, &v) in free.iter().enumerate() {
            slot[v] = Some(k);
        }
        let n = free.len();
        let mut l = DMatrix::zeros(n, n);
        for (k, &v) in free.iter().enumerate() {
            for u in graph.neighbors(v) {
                if u == v {
                    continue;
                }
                l[(k, k)] += 1.0;
                if let Some(j) = slot[u] {
                    l[(k, j)] -= 1.0;
                }
            }
        }
        // a free component with no fixed neighbor makes the block singular
        let chol = Cholesky::new(l).ok_or(Error::NotPositiveDefinite)?;
        Ok(Self { free, slot, chol })
    }

    /// Discrete harmonic extension: `values` on fixed sites are kept, free
    /// sites get the solution of the Dirichlet problem.
    pub(crate) fn extend(&self, graph: &Graph, values: &mut [f64]) {
        let mut rhs = DVector::zeros(self.free.len());
        for (k, &v) in self.free.iter().enumerate() {
            rhs[k] = graph.neighbors(v).filter(|&u| u != v && self.slot[u].is_none()).map(|u| values[u]).sum();
        }
        let u = self.chol.solve(&rhs);
        for (k, &v) in self.free.iter().enumerate() {
            values[v] = u[k];
        }
    }
}

/// `G = L_I^{-1}` on interior sites, with its lower Cholesky factor.
#[derive(Debug, Clone)]
pub struct GreenMatrix {
    sites: Vec<usize>,
    len: usize,
    entries: DMatrix<f64>,
    factor: DMatrix<f64>,
}

impl GreenMatrix {
    /// Interior sites in the order of the matrix rows.
    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn size(&self) -> usize {
        self.sites.len()
    }

    /// `G(i, j)` by row index.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// `f^T G f` for `f` given on interior rows.
    pub fn quadratic_form(&self, f: &[f64]) -> f64 {
        let v = DVector::from_column_slice(f);
        v.dot(&(&self.entries * &v))
    }

    /// One field: `h = A xi` with `A A^T = G`.
    pub fn sample(&self, rng: &mut Rng) -> FieldSample {
        let xi = DVector::from_iterator(self.size(), (0..self.size()).map(|_| StandardNormal.sample(rng)));
        let h = &self.factor * xi;
        let mut values = vec![0.0; self.len];
        for (k, &s) in self.sites.iter().enumerate() {
            values[s] = h[k];
        }
        FieldSample { values }
    }
}

/// Values on every site of the domain; zero on the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub values: Vec<f64>,
}

impl FieldSample {
    pub fn zeros(domain: &GffDomain) -> Self {
        Self { values: vec![0.0; domain.len()] }
    }

    /// Values on the sites of `green`, in row order.
    pub fn interior_values(&self, green: &GreenMatrix) -> Vec<f64> {
        green.sites.iter().map(|&s| self.values[s]).collect()
    }
}

pub fn green_matrix(domain: &GffDomain) -> Result<GreenMatrix> {
    let d = Dirichlet::new(&domain.graph, domain.interior.clone())?;
    let entries = d.chol.inverse();
    // G is symmetric up to roundoff; symmetrize before factoring
    let entries = (&entries + entries.transpose()) * 0.5;
    let factor = Cholesky::new(entries.clone()).ok_or(Error::NotPositiveDefinite)?.l();
    Ok(GreenMatrix { sites: domain.interior.clone(), len: domain.len(), entries, factor })
}

pub fn sample_dgff(green: &GreenMatrix, rng: &mut Rng) -> FieldSample {
    green.sample(rng)
}

/// `n` independent fields, one substream each.
pub fn sample_many(green: &GreenMatrix, n: u64, stream: RngStream) -> Vec<FieldSample> {
    replicate(stream, n, |_, rng| green.sample(rng))
}

/// `sum over edges (f(u) - f(v))^2`; `f` must vanish on the boundary.
pub fn dirichlet_energy(domain: &GffDomain, f: &[f64]) -> Result<f64> {
    if f.len() != domain.len() {
        return Err(invalid("one value per site"));
    }
    if domain.boundary.iter().zip(f).any(|(&b, &x)| b && x != 0.0) {
        return Err(invalid("function must vanish on the boundary"));
    }
    Ok(domain.graph.edges().iter().map(|&(u, v)| (f[u] - f[v]).powi(2)).sum())
}

/// Empirical covariance of two site values with the standard error of the
/// estimate, from the per-sample centered products.
pub fn empirical_covariance(xs: &[f64], ys: &[f64]) -> crate::EstimateWithCI {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut w = crate::stats::Welford::new();
    for (x, y) in xs.iter().zip(ys) {
        w.push((x - mx) * (y - my));
    }
    w.estimate()
}

/// Worst deviation of the empirical covariance matrix from `G` over all
/// interior pairs, in standard errors. Returns `(max |z|, row pair)`.
pub fn covariance_deviation(green: &GreenMatrix, samples: &[FieldSample]) -> Result<(f64, (usize, usize))> {
    let n = samples.len();
    if n < 2 {
        return Err(invalid("need at least two samples"));
    }
    let p = green.size();
    let mut x = DMatrix::from_fn(n, p, |k, i| samples[k].values[green.sites[i]]);
    for mut c in x.column_iter_mut() {
        let m = c.mean();
        c.add_scalar_mut(-m);
    }
    let nf = n as f64;
    let c = x.transpose() * &x / nf;
    let x2 = x.map(|v| v * v);
    let q = x2.transpose() * &x2 / nf;
    let mut worst = (0.0, (0, 0));
    for i in 0..p {
        for j in i..p {
            // variance of the per-sample products, unbiased
            let var = (q[(i, j)] - c[(i, j)] * c[(i, j)]) * nf / (nf - 1.0);
            let se = (var / nf).sqrt();
            let z = (c[(i, j)] - green.entries[(i, j)]).abs() / se;
            if z > worst.0 {
                worst = (z, (i, j));
            }
        }
    }
    Ok(worst)
}

/// Expected visits to `y` of a simple random walk from `x` killed on first
/// reaching the boundary.
pub fn random_walk_visits(domain: &GffDomain, x: usize, y: usize, n: u64, stream: RngStream) -> Result<crate::EstimateWithCI> {
    use rand::Rng as _;
    if domain.boundary[x] {
        return Err(invalid("walk must start in the interior"));
    }
    let g = &domain.graph;
    let counts = replicate(stream, n, |_, rng| {
        let (mut v, mut visits) = (x, 0u64);
        while !domain.boundary[v] {
            if v == y {
                visits += 1;
            }
            let inc = g.incident(v);
            v = inc[rng.random_range(0..inc.len())].0;
        }
        visits
    });
    let mut w = crate::stats::Welford::new();
    for c in counts {
        w.push(c as f64);
    }
    Ok(w.estimate())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn path_with_one_interior_vertex() {
        let d = GffDomain::new(Graph::path(3), vec![true, false, true]).unwrap();
        let g = green_matrix(&d).unwrap();
        assert_eq!(g.size(), 1);
        assert!((g.entry(0, 0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn isolated_free_component_is_singular() {
        // vertices 2 and 3 form a component with no boundary
        let graph = Graph::new(4, vec![(0, 1), (2, 3)]);
        let d = GffDomain::new(graph, vec![true, false, false, false]).unwrap();
        assert_eq!(green_matrix(&d).unwrap_err(), Error::NotPositiveDefinite);
        assert!(GffDomain::new(Graph::path(2), vec![true, true]).is_err());
    }

    #[test]
    fn disconnected_interior_is_block_diagonal() {
        // a path 0-1-2-3-4 with 2 on the boundary splits the interior
        let d = GffDomain::new(Graph::path(5), vec![true, false, true, false, true]).unwrap();
        let g = green_matrix(&d).unwrap();
        assert_eq!(g.entry(0, 1), 0.0);
        assert!((g.entry(0, 0) - 0.5).abs() < 1e-15 && (g.entry(1, 1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn green_is_symmetric_and_inverts_the_laplacian() {
        let d = GffDomain::rectangle(6, 5).unwrap();
        let g = green_matrix(&d).unwrap();
        let m = g.matrix();
        assert!((m - m.transpose()).amax() < 1e-12);
        // L G = I, with L assembled independently from the grid
        let w = 8;
        let n = g.size();
        let mut lg = DMatrix::<f64>::zeros(n, n);
        for (i, &s) in g.sites().iter().enumerate() {
            let (x, y) = (s % w, s / w);
            let nbrs = [(x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)];
            for j in 0..n {
                let mut v = 4.0 * m[(i, j)];
                for &(a, b) in &nbrs {
                    if let Some(k) = g.sites().iter().position(|&t| t == b * w + a) {
                        v -= m[(k, j)];
                    }
                }
                lg[(i, j)] = v;
            }
        }
        assert!((lg - DMatrix::<f64>::identity(n, n)).amax() < 1e-12);
    }

    #[test]
    fn diagonal_grows_with_the_domain() {
        // the center of a 5x5 interior, then of 7x7 and 9x9 containing it
        let center = |w: usize| {
            let d = GffDomain::rectangle(w, w).unwrap();
            let g = green_matrix(&d).unwrap();
            let s = (w / 2 + 1) * (w + 2) + w / 2 + 1;
            let i = g.sites().iter().position(|&t| t == s).unwrap();
            g.entry(i, i)
        };
        let (a, b, c) = (center(5), center(7), center(9));
        assert!(a < b && b < c, "{a} {b} {c}");
    }

    #[test]
    fn energy_examples() {
        let d = GffDomain::rectangle(4, 4).unwrap();
        assert_eq!(dirichlet_energy(&d, &vec![0.0; d.len()]).unwrap(), 0.0);
        let mut f = vec![0.0; d.len()];
        f[2 * 6 + 2] = 1.0;
        assert_eq!(dirichlet_energy(&d, &f).unwrap(), 4.0);
        f[0] = 1.0;
        assert!(dirichlet_energy(&d, &f).is_err());
    }

    #[test]
    fn energy_is_the_quadratic_form_of_the_laplacian() {
        // (h, h) = h^T L h, so f^T G^{-1} f is the energy of f
        let d = GffDomain::rectangle(4, 3).unwrap();
        let g = green_matrix(&d).unwrap();
        let mut f = vec![0.0; d.len()];
        for (k, &s) in g.sites().iter().enumerate() {
            f[s] = (k as f64 * 0.37).sin();
        }
        let fi = DVector::from_iterator(g.size(), g.sites().iter().map(|&s| f[s]));
        let lap = g.matrix().clone().try_inverse().unwrap();
        assert!((fi.dot(&(&lap * &fi)) - dirichlet_energy(&d, &f).unwrap()).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn energy_invariant_under_grid_symmetries(vals in proptest::collection::vec(-2.0f64..2.0, 16)) {
            let d = GffDomain::rectangle(4, 4).unwrap();
            let at = |f: &dyn Fn(usize, usize) -> (usize, usize)| {
                let mut g = vec![0.0; d.len()];
                for y in 0..4 {
                    for x in 0..4 {
                        let (a, b) = f(x, y);
                        g[(b + 1) * 6 + a + 1] = vals[y * 4 + x];
                    }
                }
                dirichlet_energy(&d, &g).unwrap()
            };
            let e = at(&|x, y| (x, y));
            for other in [at(&|x, y| (3 - x, y)), at(&|x, y| (y, x)), at(&|x, y| (3 - y, x)), at(&|x, y| (3 - x, 3 - y))] {
                prop_assert!((e - other).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sample_moments_match_green() {
        let d = GffDomain::rectangle(5, 5).unwrap();
        let g = green_matrix(&d).unwrap();
        let samples = sample_many(&g, 10_000, RngStream::new(0, 0));
        assert!(samples.iter().all(|s| (0..d.len()).all(|v| !d.is_boundary(v) || s.values[v] == 0.0)));
        let (z, pair) = covariance_deviation(&g, &samples).unwrap();
        assert!(z < 5.0, "{z} at {pair:?}");
        for i in [0, 12, 24] {
            let xs: Vec<f64> = samples.iter().map(|s| s.values[g.sites()[i]]).collect();
            let mut w = crate::stats::Welford::new();
            xs.iter().for_each(|&x| w.push(x));
            assert!(w.estimate().within_sigma(0.0, 3.0));
        }
    }

    #[test]
    fn linear_functional_variance_is_the_quadratic_form() {
        let d = GffDomain::rectangle(4, 4).unwrap();
        let g = green_matrix(&d).unwrap();
        let f: Vec<f64> = (0..g.size()).map(|k| if k % 3 == 0 { 1.0 } else { -0.5 }).collect();
        let samples = sample_many(&g, 10_000, RngStream::new(1, 0));
        let sums: Vec<f64> = samples.iter().map(|s| s.interior_values(&g).iter().zip(&f).map(|(a, b)| a * b).sum()).collect();
        let var = empirical_covariance(&sums, &sums);
        assert!(var.within_sigma(g.quadratic_form(&f), 3.0), "{var:?} vs {}", g.quadratic_form(&f));
    }

    #[test]
    fn green_counts_random_walk_visits() {
        // N(x, y) = deg * G(x, y) for the walk killed at the boundary
        let d = GffDomain::rectangle(8, 8).unwrap();
        let g = green_matrix(&d).unwrap();
        for (i, j) in [(0, 0), (27, 27), (27, 36), (0, 63), (9, 54)] {
            let (x, y) = (g.sites()[i], g.sites()[j]);
            let e = random_walk_visits(&d, x, y, 20_000, RngStream::new(2, i as u64 * 64 + j as u64)).unwrap();
            assert!(e.within_sigma(4.0 * g.entry(i, j), 3.0), "{i} {j}: {e:?} vs {}", 4.0 * g.entry(i, j));
        }
    }
}
