use crate::error::{invalid, Result};
use crate::lattice::{Graph, UnionFind};
use crate::rng::Rng;

use super::potts::{p_to_beta, sample_bonds_into, SwChain};

#[derive(Debug, Clone, PartialEq)]
pub struct BondConfig {
    pub open: Vec<bool>,
    pub p: f64,
    pub q: f64,
}

impl BondConfig {
    pub fn open_count(&self) -> usize {
        self.open.iter().filter(|&&o| o).count()
    }
}

/// Clusters of the open edges, with the sites in `wired` identified into one
/// vertex.
pub fn fk_cluster_count(graph: &Graph, open: &[bool], wired: &[usize]) -> usize {
    let mut uf = UnionFind::new(graph.vertex_count());
    for w in wired.windows(2) {
        uf.union(w[0], w[1]);
    }
    for (e, &(a, b)) in graph.edges().iter().enumerate() {
        if open[e] {
            uf.union(a, b);
        }
    }
    uf.components()
}

/// Unnormalized FK weight `p^o (1-p)^c q^k` with free boundary.
pub fn fk_weight(graph: &Graph, open: &[bool], p: f64, q: f64) -> f64 {
    fk_weight_wired(graph, open, p, q, &[])
}

/// FK weight after identifying the sites in `wired`.
pub fn fk_weight_wired(graph: &Graph, open: &[bool], p: f64, q: f64, wired: &[usize]) -> f64 {
    let o = open.iter().filter(|&&x| x).count() as i32;
    let c = open.len() as i32 - o;
    let k = fk_cluster_count(graph, open, wired) as i32;
    p.powi(o) * (1.0 - p).powi(c) * q.powi(k)
}

/// Bond step of the Edwards-Sokal coupling: each agreeing edge is open with
/// probability `p`.
pub fn sample_bonds_given_spins(graph: &Graph, spins: &[u32], p: f64, rng: &mut Rng) -> Vec<bool> {
    let mut out = vec![false; graph.edge_count()];
    sample_bonds_into(graph, spins, p, rng, &mut out);
    out
}

/// FK sample for integer `q` through the Swendsen-Wang chain; wired sites are
/// realized as a common pinned color.
pub fn sample_fk(graph: &Graph, p: f64, q: u32, wired: &[usize], sweeps: usize, rng: &mut Rng) -> Result<BondConfig> {
    if !(0.0..1.0).contains(&p) {
        return Err(invalid("FK sampling needs p in [0, 1)"));
    }
    if sweeps == 0 {
        return Err(invalid("sweeps must be >= 1"));
    }
    let mut pins = vec![None; graph.vertex_count()];
    for &w in wired {
        pins[w] = Some(0);
    }
    let mut chain = SwChain::new(graph, q, p_to_beta(p), pins, rng)?;
    for _ in 0..sweeps {
        chain.step(rng);
    }
    Ok(BondConfig {
        open: sample_bonds_given_spins(graph, chain.spins(), p, rng),
        p,
        q: q as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_examples() {
        let g = Graph::grid(3, 2);
        let open: Vec<bool> = (0..g.edge_count()).map(|e| e % 2 == 0).collect();
        let o = open.iter().filter(|&&x| x).count() as i32;
        let bern = 0.3f64.powi(o) * 0.7f64.powi(g.edge_count() as i32 - o);
        assert!((fk_weight(&g, &open, 0.3, 1.0) - bern).abs() < 1e-15);
        let closed = vec![false; g.edge_count()];
        assert!((fk_weight(&g, &closed, 0.4, 2.5) - 0.6f64.powi(7) * 2.5f64.powi(6)).abs() < 1e-12);
        assert_eq!(fk_weight(&Graph::path(2), &[true], 0.5, 2.0), 1.0);
        assert_eq!(fk_cluster_count(&g, &closed, &[0, 5]), 5);
    }
}
