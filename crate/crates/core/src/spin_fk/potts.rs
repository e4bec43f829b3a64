use rand::Rng as _;

use crate::error::{invalid, Error, Result};
use crate::lattice::{Graph, UnionFind};
use crate::rng::Rng;
use crate::stats::{binomial_estimate, EstimateWithCI};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundaryCondition {
    Free,
    /// Every boundary site carries this color.
    Fixed(u32),
    /// Two disjoint boundary arcs with their own colors; other sites free.
    TwoArc {
        arc_a: Vec<usize>,
        color_a: u32,
        arc_b: Vec<usize>,
        color_b: u32,
    },
}

impl BoundaryCondition {
    /// Per-site pinned color for a graph of `n` sites whose boundary is
    /// `boundary_sites`.
    pub fn pins(&self, n: usize, boundary_sites: &[usize], q: u32) -> Result<Vec<Option<u32>>> {
        let mut pins = vec![None; n];
        let mut set = |sites: &[usize], c: u32| -> Result<()> {
            if c >= q {
                return Err(invalid(format!("color {c} out of range for q = {q}")));
            }
            for &s in sites {
                if s >= n {
                    return Err(invalid(format!("site {s} out of range")));
                }
                if matches!(pins[s], Some(old) if old != c) {
                    return Err(Error::BadArcs);
                }
                pins[s] = Some(c);
            }
            Ok(())
        };
        match self {
            BoundaryCondition::Free => {}
            BoundaryCondition::Fixed(c) => set(boundary_sites, *c)?,
            BoundaryCondition::TwoArc {
                arc_a,
                color_a,
                arc_b,
                color_b,
            } => {
                set(arc_a, *color_a)?;
                set(arc_b, *color_b)?;
            }
        }
        Ok(pins)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinConfig {
    pub spins: Vec<u32>,
    pub q: u32,
}

/// Number of edges whose endpoints disagree.
pub fn hamiltonian(graph: &Graph, spins: &[u32]) -> u64 {
    graph.edges().iter().filter(|&&(a, b)| spins[a] != spins[b]).count() as u64
}

/// Unnormalized Boltzmann weight `exp(-beta H)`.
pub fn boltzmann_weight(graph: &Graph, spins: &[u32], beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok((-beta * hamiltonian(graph, spins) as f64).exp())
}

pub fn beta_to_p(beta: f64) -> f64 {
    1.0 - (-beta).exp()
}

pub fn p_to_beta(p: f64) -> f64 {
    -(1.0 - p).ln()
}

fn check_beta(beta: f64) -> Result<()> {
    if beta >= 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(invalid("beta must be finite and nonnegative"))
    }
}

fn check_q(q: u32) -> Result<()> {
    if q >= 2 {
        Ok(())
    } else {
        Err(invalid("q must be an integer >= 2"))
    }
}

/// Swendsen-Wang chain for the q-state Potts model: open each agreeing edge
/// with probability `1 - exp(-beta)`, then recolor every bond cluster
/// uniformly (clusters containing a pinned site take its color).
#[derive(Debug, Clone)]
pub struct SwChain<'g> {
    graph: &'g Graph,
    q: u32,
    p: f64,
    pins: Vec<Option<u32>>,
    spins: Vec<u32>,
    bonds: Vec<bool>,
    labels: Vec<usize>,
    cluster_colors: Vec<Option<u32>>,
}

impl<'g> SwChain<'g> {
    pub fn new(graph: &'g Graph, q: u32, beta: f64, pins: Vec<Option<u32>>, rng: &mut Rng) -> Result<Self> {
        check_q(q)?;
        check_beta(beta)?;
        if pins.len() != graph.vertex_count() {
            return Err(invalid("one pin slot per site"));
        }
        if pins.iter().flatten().any(|&c| c >= q) {
            return Err(invalid("pinned color out of range"));
        }
        let spins = pins.iter().map(|pin| pin.unwrap_or_else(|| rng.random_range(0..q))).collect();
        Ok(Self {
            graph,
            q,
            p: beta_to_p(beta),
            pins,
            spins,
            bonds: vec![false; graph.edge_count()],
            labels: vec![0; graph.vertex_count()],
            cluster_colors: Vec::new(),
        })
    }

    pub fn step(&mut self, rng: &mut Rng) {
        let n = self.graph.vertex_count();
        loop {
            sample_bonds_into(self.graph, &self.spins, self.p, rng, &mut self.bonds);
            let mut uf = UnionFind::new(n);
            for (e, &(a, b)) in self.graph.edges().iter().enumerate() {
                if self.bonds[e] {
                    uf.union(a, b);
                }
            }
            let mut slot = vec![usize::MAX; n];
            self.cluster_colors.clear();
            let mut conflict = false;
            for s in 0..n {
                let r = uf.find(s);
                if slot[r] == usize::MAX {
                    slot[r] = self.cluster_colors.len();
                    self.cluster_colors.push(None);
                }
                let k = slot[r];
                self.labels[s] = k;
                if let Some(c) = self.pins[s] {
                    match self.cluster_colors[k] {
                        Some(old) if old != c => conflict = true,
                        _ => self.cluster_colors[k] = Some(c),
                    }
                }
            }
            // Bonds join equal spins only, so a cluster never meets two pinned
            // colors once the state respects the pins; retry defensively.
            if !conflict {
                break;
            }
        }
        let draws: Vec<u32> = self
            .cluster_colors
            .iter()
            .map(|c| c.unwrap_or_else(|| rng.random_range(0..self.q)))
            .collect();
        for s in 0..n {
            self.spins[s] = draws[self.labels[s]];
        }
    }

    pub fn spins(&self) -> &[u32] {
        &self.spins
    }

    /// Bond configuration drawn in the last step.
    pub fn bonds(&self) -> &[bool] {
        &self.bonds
    }

    /// Cluster index of every site in the last bond configuration.
    pub fn cluster_labels(&self) -> &[usize] {
        &self.labels
    }

    /// Pinned color of each cluster of the last bond configuration.
    pub fn cluster_pins(&self) -> &[Option<u32>] {
        &self.cluster_colors
    }

    /// Adds `mass` times the conditional law of the next spin state given the
    /// last bond configuration (uniform over admissible cluster colorings) to
    /// `out`, indexed like the exact enumeration. Averaging this over a run
    /// gives a Rao-Blackwellized estimate of the stationary law.
    pub fn accumulate_conditional_law(&self, out: &mut [f64], mass: f64) {
        let free = self.cluster_colors.iter().filter(|c| c.is_none()).count() as i32;
        let per = mass / (self.q as f64).powi(free);
        super::exact::spread_over_colorings(out, &self.labels, &self.cluster_colors, self.q, per);
    }

    /// Index of the current state in the exact enumeration order.
    pub fn state_index(&self) -> usize {
        self.spins.iter().rev().fold(0, |acc, &s| acc * self.q as usize + s as usize)
    }

    pub fn config(&self) -> SpinConfig {
        SpinConfig {
            spins: self.spins.clone(),
            q: self.q,
        }
    }
}

pub(crate) fn sample_bonds_into(graph: &Graph, spins: &[u32], p: f64, rng: &mut Rng, out: &mut [bool]) {
    for (e, &(a, b)) in graph.edges().iter().enumerate() {
        out[e] = spins[a] == spins[b] && rng.random::<f64>() < p;
    }
}

pub fn sample_potts_sw(
    graph: &Graph,
    q: u32,
    beta: f64,
    pins: Vec<Option<u32>>,
    sweeps: usize,
    rng: &mut Rng,
) -> Result<SpinConfig> {
    if sweeps == 0 {
        return Err(invalid("sweeps must be >= 1"));
    }
    let mut chain = SwChain::new(graph, q, beta, pins, rng)?;
    for _ in 0..sweeps {
        chain.step(rng);
    }
    Ok(chain.config())
}

/// One systematic heat-bath sweep over the unpinned sites.
pub fn heat_bath_sweep(graph: &Graph, q: u32, beta: f64, pins: &[Option<u32>], spins: &mut [u32], rng: &mut Rng) {
    let mut w = vec![0.0f64; q as usize];
    for s in 0..graph.vertex_count() {
        if pins[s].is_some() {
            continue;
        }
        let mut agree = vec![0u32; q as usize];
        for t in graph.neighbors(s) {
            agree[spins[t] as usize] += 1;
        }
        let deg = graph.degree(s) as f64;
        for c in 0..q as usize {
            w[c] = (-beta * (deg - agree[c] as f64)).exp();
        }
        let total: f64 = w.iter().sum();
        let mut u = rng.random::<f64>() * total;
        let mut pick = q - 1;
        for (c, &wc) in w.iter().enumerate() {
            if u < wc {
                pick = c as u32;
                break;
            }
            u -= wc;
        }
        spins[s] = pick;
    }
}

/// `P(sigma(x) = sigma(y)) - 1/q` from samples.
pub fn two_point_function(samples: &[SpinConfig], x: usize, y: usize) -> Result<EstimateWithCI> {
    let first = samples.first().ok_or_else(|| invalid("need at least one sample"))?;
    let q = first.q as f64;
    if x == y {
        return Ok(EstimateWithCI::new(1.0 - 1.0 / q, 0.0, samples.len() as u64));
    }
    let agree = samples.iter().filter(|s| s.spins[x] == s.spins[y]).count() as u64;
    let b = binomial_estimate(agree, samples.len() as u64);
    Ok(EstimateWithCI::new(b.mean - 1.0 / q, b.std_error, b.n_samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use proptest::prelude::*;

    #[test]
    fn hamiltonian_examples() {
        let g = Graph::grid(2, 2);
        assert_eq!(hamiltonian(&g, &[0, 0, 0, 0]), 0);
        assert_eq!(hamiltonian(&g, &[0, 1, 1, 0]), 4);
        let g3 = Graph::grid(3, 3);
        let mut s = vec![0; 9];
        s[4] = 1;
        assert_eq!(hamiltonian(&g3, &s), 4);
    }

    #[test]
    fn weights() {
        let g = Graph::grid(3, 3);
        let s = vec![0, 1, 0, 1, 0, 1, 0, 1, 0];
        assert_eq!(boltzmann_weight(&g, &s, 0.0).unwrap(), 1.0);
        assert_eq!(boltzmann_weight(&g, &[2; 9], 3.0).unwrap(), 1.0);
        let mut one = vec![0; 9];
        one[4] = 1;
        assert!((boltzmann_weight(&g, &one, 2f64.ln()).unwrap() - 1.0 / 16.0).abs() < 1e-15);
        assert!(boltzmann_weight(&g, &one, -1.0).is_err());
    }

    #[test]
    fn pins_respected() {
        let g = Graph::grid(4, 4);
        let boundary: Vec<usize> = (0..16).filter(|&s| g.degree(s) < 4).collect();
        let pins = BoundaryCondition::Fixed(2).pins(16, &boundary, 3).unwrap();
        let mut rng = RngStream::new(3, 0).rng();
        let mut chain = SwChain::new(&g, 3, 0.8, pins.clone(), &mut rng).unwrap();
        for _ in 0..200 {
            chain.step(&mut rng);
            for &b in &boundary {
                assert_eq!(chain.spins()[b], 2);
            }
        }
        let two = BoundaryCondition::TwoArc {
            arc_a: vec![0, 1],
            color_a: 0,
            arc_b: vec![1, 2],
            color_b: 1,
        };
        assert!(two.pins(16, &boundary, 2).is_err());
        assert!(BoundaryCondition::Fixed(3).pins(16, &boundary, 3).is_err());
    }

    #[test]
    fn infinite_temperature_is_uniform() {
        let g = Graph::path(2);
        let mut rng = RngStream::new(4, 0).rng();
        let samples: Vec<SpinConfig> = (0..20_000)
            .map(|_| sample_potts_sw(&g, 3, 0.0, vec![None; 2], 1, &mut rng).unwrap())
            .collect();
        let f = two_point_function(&samples, 0, 1).unwrap();
        assert!(f.within_sigma(0.0, 3.0), "{f:?}");
        assert_eq!(two_point_function(&samples, 1, 1).unwrap().mean, 1.0 - 1.0 / 3.0);
    }

    #[test]
    fn single_edge_two_point_function() {
        // p = 1/2, q = 2: P(x <-> y) = p / (p + (1 - p) q) = 1/3, F = 1/6
        let g = Graph::path(2);
        let beta = p_to_beta(0.5);
        let mut rng = RngStream::new(5, 0).rng();
        let mut chain = SwChain::new(&g, 2, beta, vec![None; 2], &mut rng).unwrap();
        // independent replicas: the chain itself is autocorrelated
        let mut samples = Vec::new();
        for _ in 0..20_000 {
            for _ in 0..10 {
                chain.step(&mut rng);
            }
            samples.push(chain.config());
        }
        let f = two_point_function(&samples, 0, 1).unwrap();
        assert!(f.within_sigma(1.0 / 6.0, 3.0), "{f:?}");
    }

    #[test]
    fn heat_bath_agrees_with_swendsen_wang() {
        let g = Graph::grid(3, 3);
        let beta = 0.9;
        let mut rng = RngStream::new(6, 0).rng();
        let pins = vec![None; 9];
        let mut hb: Vec<u32> = vec![0; 9];
        let mut chain = SwChain::new(&g, 3, beta, pins.clone(), &mut rng).unwrap();
        let (mut e_hb, mut e_sw) = (crate::stats::Welford::new(), crate::stats::Welford::new());
        for k in 0..60_000 {
            heat_bath_sweep(&g, 3, beta, &pins, &mut hb, &mut rng);
            chain.step(&mut rng);
            if k >= 100 {
                e_hb.push(hamiltonian(&g, &hb) as f64);
                e_sw.push(hamiltonian(&g, chain.spins()) as f64);
            }
        }
        let exact = crate::spin_fk::potts_exact(&g, 3, beta, &pins, 1 << 20).unwrap();
        let mean_h: f64 = exact
            .probs
            .iter()
            .enumerate()
            .map(|(k, p)| p * hamiltonian(&g, &crate::spin_fk::decode_spins(k, 9, 3)) as f64)
            .sum();
        // loose: heat-bath samples are autocorrelated
        assert!((e_hb.mean() - mean_h).abs() < 0.1, "{} {}", e_hb.mean(), mean_h);
        assert!((e_sw.mean() - mean_h).abs() < 0.1, "{} {}", e_sw.mean(), mean_h);
    }

    proptest! {
        #[test]
        fn hamiltonian_color_permutation_invariant(spins in proptest::collection::vec(0u32..3, 9), shift in 1u32..3) {
            let g = Graph::grid(3, 3);
            let permuted: Vec<u32> = spins.iter().map(|&s| (s + shift) % 3).collect();
            prop_assert_eq!(hamiltonian(&g, &spins), hamiltonian(&g, &permuted));
        }
    }
}
