use std::collections::HashMap;

use rand::Rng as _;

use crate::error::{invalid, Error, Result};
use crate::lattice::{Graph, LatticeDomain, LatticeKind};
use crate::rng::Rng;

/// Disjoint loops on a honeycomb domain, stored as the set of occupied
/// edges. On a graph of maximum degree 3 the even subgraphs are exactly the
/// disjoint unions of simple cycles.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LoopConfig {
    pub edges: Vec<bool>,
}

impl LoopConfig {
    pub fn empty(graph: &Graph) -> Self {
        Self {
            edges: vec![false; graph.edge_count()],
        }
    }

    /// Builds a configuration from vertex cycles, rejecting loops that are not
    /// closed lattice paths or that share a vertex.
    pub fn from_loops(graph: &Graph, loops: &[Vec<usize>]) -> Result<Self> {
        let mut used = vec![false; graph.vertex_count()];
        let mut edges = vec![false; graph.edge_count()];
        for lp in loops {
            if lp.len() < 3 {
                return Err(Error::NotClosed);
            }
            for (k, &v) in lp.iter().enumerate() {
                if used[v] {
                    return Err(Error::OverlappingLoops);
                }
                used[v] = true;
                let w = lp[(k + 1) % lp.len()];
                let e = graph
                    .incident(v)
                    .iter()
                    .find(|&&(u, _)| u == w)
                    .map(|&(_, e)| e)
                    .ok_or(Error::NotNearestNeighbor(k))?;
                edges[e] = true;
            }
        }
        Ok(Self { edges })
    }

    pub fn degrees(&self, graph: &Graph) -> Vec<u8> {
        let mut deg = vec![0u8; graph.vertex_count()];
        for (e, &(a, b)) in graph.edges().iter().enumerate() {
            if self.edges[e] {
                deg[a] += 1;
                deg[b] += 1;
            }
        }
        deg
    }

    pub fn is_valid(&self, graph: &Graph) -> bool {
        self.edges.len() == graph.edge_count() && self.degrees(graph).iter().all(|&d| d == 0 || d == 2)
    }

    /// Vertex cycles of the configuration.
    pub fn loops(&self, graph: &Graph) -> Vec<Vec<usize>> {
        let deg = self.degrees(graph);
        let mut seen = vec![false; graph.vertex_count()];
        let mut out = Vec::new();
        for start in 0..graph.vertex_count() {
            if deg[start] != 2 || seen[start] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut prev_edge = usize::MAX;
            let mut cur = start;
            loop {
                let &(next, e) = graph
                    .incident(cur)
                    .iter()
                    .find(|&&(_, e)| self.edges[e] && e != prev_edge)
                    .expect("degree-2 vertex");
                if next == start {
                    break;
                }
                seen[next] = true;
                cycle.push(next);
                prev_edge = e;
                cur = next;
            }
            out.push(cycle);
        }
        out
    }

    /// Number of loops `l`.
    pub fn loop_count(&self, graph: &Graph) -> usize {
        self.loops(graph).len()
    }

    /// Total length `L`.
    pub fn total_length(&self) -> usize {
        self.edges.iter().filter(|&&x| x).count()
    }
}

fn check_params(n: f64, theta: f64) -> Result<()> {
    if n > 0.0 && theta > 0.0 && theta.is_finite() && n.is_finite() {
        Ok(())
    } else {
        Err(invalid("O(N) weights need N > 0 and theta > 0"))
    }
}

/// `N^l theta^L`.
pub fn on_weight(graph: &Graph, config: &LoopConfig, n: f64, theta: f64) -> Result<f64> {
    if !config.is_valid(graph) {
        return Err(Error::OverlappingLoops);
    }
    Ok(n.powi(config.loop_count(graph) as i32) * theta.powi(config.total_length() as i32))
}

/// Every loop configuration with its weight, and their sum.
#[derive(Debug, Clone)]
pub struct OnExact {
    pub partition: f64,
    pub configs: Vec<(LoopConfig, f64)>,
}

impl OnExact {
    pub fn probability(&self, config: &LoopConfig) -> f64 {
        self.configs
            .iter()
            .find(|(c, _)| c == config)
            .map_or(0.0, |(_, w)| w / self.partition)
    }
}

/// Exact partition function by backtracking over edges with degree
/// constraints (each vertex ends with degree 0 or 2).
pub fn exact_on_partition(graph: &Graph, n: f64, theta: f64, max_edges: usize) -> Result<OnExact> {
    check_params(n, theta)?;
    let m = graph.edge_count();
    if m > max_edges {
        return Err(Error::TooLarge {
            states: 1u128 << m.min(127),
            limit: 1u128 << max_edges.min(127),
        });
    }
    // last edge index touching each vertex: its degree is final afterwards
    let mut last = vec![None; graph.vertex_count()];
    for (e, &(a, b)) in graph.edges().iter().enumerate() {
        last[a] = Some(e);
        last[b] = Some(e);
    }
    let mut configs = Vec::new();
    let mut state = vec![false; m];
    let mut deg = vec![0u8; graph.vertex_count()];
    fn rec(
        e: usize,
        graph: &Graph,
        last: &[Option<usize>],
        state: &mut Vec<bool>,
        deg: &mut Vec<u8>,
        out: &mut Vec<LoopConfig>,
    ) {
        if e == state.len() {
            out.push(LoopConfig { edges: state.clone() });
            return;
        }
        let (a, b) = graph.edges()[e];
        for take in [false, true] {
            if take {
                deg[a] += 1;
                deg[b] += 1;
            }
            let ok = |v: usize| deg[v] <= 2 && (last[v] != Some(e) || deg[v] != 1);
            if ok(a) && ok(b) {
                state[e] = take;
                rec(e + 1, graph, last, state, deg, out);
            }
            if take {
                deg[a] -= 1;
                deg[b] -= 1;
            }
        }
        state[e] = false;
    }
    let mut found = Vec::new();
    rec(0, graph, &last, &mut state, &mut deg, &mut found);
    let mut z = 0.0;
    for c in found {
        let w = n.powi(c.loop_count(graph) as i32) * theta.powi(c.total_length() as i32);
        z += w;
        configs.push((c, w));
    }
    Ok(OnExact { partition: z, configs })
}

/// Critical weight `1 / sqrt(2 + sqrt(2 - N))` for `N` in `[0, 2]`.
pub fn nienhuis_theta_c(n: f64) -> Result<f64> {
    if !(0.0..=2.0).contains(&n) {
        return Err(invalid("theta_c(N) is defined for N in [0, 2]"));
    }
    Ok(1.0 / (2.0 + (2.0 - n).sqrt()).sqrt())
}

/// Edge ids of each complete hexagonal face of the domain.
fn face_edges(domain: &LatticeDomain) -> Vec<[usize; 6]> {
    domain
        .faces()
        .iter()
        .map(|(_, c)| {
            let mut e = [0; 6];
            for k in 0..6 {
                e[k] = domain.edge_between(c[k], c[(k + 1) % 6]).expect("face side");
            }
            e
        })
        .collect()
}

/// Metropolis chain on face flips: toggle the six sides of a uniformly chosen
/// hexagon and accept with probability `min(1, N^{dl} theta^{dL})`.
#[derive(Debug, Clone)]
pub struct OnChain<'d> {
    domain: &'d LatticeDomain,
    faces: Vec<[usize; 6]>,
    n: f64,
    theta: f64,
    config: LoopConfig,
    loops: usize,
}

impl<'d> OnChain<'d> {
    pub fn new(domain: &'d LatticeDomain, n: f64, theta: f64) -> Result<Self> {
        check_params(n, theta)?;
        if domain.kind() != LatticeKind::Hexagonal {
            return Err(invalid("the O(N) model lives on the honeycomb"));
        }
        Ok(Self {
            domain,
            faces: face_edges(domain),
            n,
            theta,
            config: LoopConfig::empty(domain.graph()),
            loops: 0,
        })
    }

    pub fn config(&self) -> &LoopConfig {
        &self.config
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    /// One proposal.
    pub fn step(&mut self, rng: &mut Rng) {
        if self.faces.is_empty() {
            return;
        }
        let f = self.faces[rng.random_range(0..self.faces.len())];
        let d_len: i32 = f.iter().map(|&e| if self.config.edges[e] { -1 } else { 1 }).sum();
        for &e in &f {
            self.config.edges[e] ^= true;
        }
        let new_loops = self.config.loop_count(self.domain.graph());
        let ratio = self.n.powi(new_loops as i32 - self.loops as i32) * self.theta.powi(d_len);
        if ratio >= 1.0 || rng.random::<f64>() < ratio {
            self.loops = new_loops;
        } else {
            for &e in &f {
                self.config.edges[e] ^= true;
            }
        }
    }

    /// `face_count` proposals.
    pub fn sweep(&mut self, rng: &mut Rng) {
        for _ in 0..self.faces.len().max(1) {
            self.step(rng);
        }
    }
}

pub fn sample_on_model(domain: &LatticeDomain, n: f64, theta: f64, sweeps: usize, rng: &mut Rng) -> Result<LoopConfig> {
    let mut chain = OnChain::new(domain, n, theta)?;
    for _ in 0..sweeps {
        chain.sweep(rng);
    }
    Ok(chain.config.clone())
}

/// Transition matrix of one face-flip proposal over the exactly enumerated
/// states, for checking reversibility.
pub fn on_transition_matrix(domain: &LatticeDomain, exact: &OnExact, n: f64, theta: f64) -> Result<Vec<Vec<f64>>> {
    check_params(n, theta)?;
    let graph = domain.graph();
    let faces = face_edges(domain);
    if faces.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let index: HashMap<&LoopConfig, usize> = exact.configs.iter().enumerate().map(|(k, (c, _))| (c, k)).collect();
    let s = exact.configs.len();
    let mut p = vec![vec![0.0; s]; s];
    for (k, (c, w)) in exact.configs.iter().enumerate() {
        let mut stay = 1.0;
        for f in &faces {
            let mut next = c.clone();
            for &e in f {
                next.edges[e] ^= true;
            }
            let j = *index.get(&next).ok_or(Error::Degenerate("flip left the state space".into()))?;
            let w2 = n.powi(next.loop_count(graph) as i32) * theta.powi(next.total_length() as i32);
            let a = (w2 / w).min(1.0) / faces.len() as f64;
            p[k][j] += a;
            stay -= a;
        }
        p[k][k] += stay;
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::hex::edge_sides;
    use crate::rng::RngStream;
    use crate::stats::total_variation;

    fn patch(cells: &[(i64, i64)]) -> LatticeDomain {
        LatticeDomain::honeycomb_patch(cells, 1.0).unwrap()
    }

    #[test]
    fn weights() {
        let d = patch(&[(0, 0), (3, 0)]);
        let g = d.graph();
        assert_eq!(on_weight(g, &LoopConfig::empty(g), 2.0, 0.3).unwrap(), 1.0);
        let one = LoopConfig::from_loops(g, &[(0..6).map(|k| d.faces()[0].1[k]).collect()]).unwrap();
        assert!((on_weight(g, &one, 1.0, 0.5).unwrap() - 2f64.powi(-6)).abs() < 1e-15);
        let both = LoopConfig::from_loops(g, &[d.faces()[0].1.to_vec(), d.faces()[1].1.to_vec()]).unwrap();
        let theta: f64 = 0.4;
        assert!((on_weight(g, &both, 2.0, theta).unwrap() - 4.0 * theta.powi(12)).abs() < 1e-15);
        let clash = LoopConfig::from_loops(g, &[d.faces()[0].1.to_vec(), d.faces()[0].1.to_vec()]);
        assert_eq!(clash.unwrap_err(), Error::OverlappingLoops);
        let mut bad = LoopConfig::empty(g);
        bad.edges[0] = true;
        assert_eq!(on_weight(g, &bad, 1.0, 0.5).unwrap_err(), Error::OverlappingLoops);
    }

    #[test]
    fn partitions() {
        let tree = Graph::path(4);
        assert_eq!(exact_on_partition(&tree, 1.5, 0.5, 30).unwrap().partition, 1.0);
        let (n, theta) = (1.7, 0.6);
        let one = patch(&[(0, 0)]);
        let z1 = exact_on_partition(one.graph(), n, theta, 30).unwrap().partition;
        assert!((z1 - (1.0 + n * theta.powi(6))).abs() < 1e-14);
        let two = patch(&[(0, 0), (1, 0)]);
        let z2 = exact_on_partition(two.graph(), n, theta, 30).unwrap();
        // empty, either hexagon, the 10-cycle around both
        assert_eq!(z2.configs.len(), 4);
        let expect = 1.0 + 2.0 * n * theta.powi(6) + n * theta.powi(10);
        assert!((z2.partition - expect).abs() < 1e-14);
        let big = LatticeDomain::build(LatticeKind::Hexagonal, crate::lattice::Shape::unit_square(), 0.1).unwrap();
        assert!(exact_on_partition(big.graph(), n, theta, 30).is_err());
    }

    #[test]
    fn theta_c_values() {
        assert!((nienhuis_theta_c(2.0).unwrap() - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!((nienhuis_theta_c(1.0).unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((1.0 / nienhuis_theta_c(0.0).unwrap() - (2.0 + 2f64.sqrt()).sqrt()).abs() < 1e-15);
        assert!(nienhuis_theta_c(2.5).is_err());
    }

    #[test]
    fn detailed_balance_exact() {
        for cells in [vec![(0, 0)], vec![(0, 0), (1, 0)], vec![(0, 0), (1, 0), (0, 1)]] {
            let d = patch(&cells);
            let (n, theta) = (1.3, 0.7);
            let ex = exact_on_partition(d.graph(), n, theta, 40).unwrap();
            let p = on_transition_matrix(&d, &ex, n, theta).unwrap();
            for i in 0..p.len() {
                assert!((p[i].iter().sum::<f64>() - 1.0).abs() < 1e-12);
                for j in 0..p.len() {
                    let flow = ex.configs[i].1 * p[i][j] - ex.configs[j].1 * p[j][i];
                    assert!(flow.abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn chain_matches_enumeration() {
        let (n, theta) = (1.5, 0.8);
        let one = patch(&[(0, 0)]);
        let mut rng = RngStream::new(2, 0).rng();
        let mut chain = OnChain::new(&one, n, theta).unwrap();
        let mut present = 0u64;
        let runs = 40_000u64;
        for _ in 0..runs {
            chain.sweep(&mut rng);
            present += (chain.config().total_length() > 0) as u64;
        }
        let exact = n * theta.powi(6) / (1.0 + n * theta.powi(6));
        let est = crate::stats::binomial_estimate(present, runs);
        // single-face chain: successive states are correlated, allow for it
        assert!((est.mean - exact).abs() < 5.0 * est.std_error * 2.0, "{est:?} {exact}");

        let two = patch(&[(0, 0), (1, 0)]);
        let ex = exact_on_partition(two.graph(), n, theta, 30).unwrap();
        let mut chain = OnChain::new(&two, n, theta).unwrap();
        let mut counts = vec![0.0; ex.configs.len()];
        for _ in 0..100_000 {
            chain.sweep(&mut rng);
            let k = ex.configs.iter().position(|(c, _)| c == chain.config()).unwrap();
            counts[k] += 1e-5;
        }
        let exact: Vec<f64> = ex.configs.iter().map(|(_, w)| w / ex.partition).collect();
        assert!(total_variation(&counts, &exact) < 0.02);
    }

    #[test]
    fn small_theta_freezes_empty() {
        let d = patch(&[(0, 0), (1, 0), (0, 1)]);
        let mut rng = RngStream::new(3, 0).rng();
        let empty = (0..500)
            .filter(|_| sample_on_model(&d, 1.0, 0.05, 5, &mut rng).unwrap().total_length() == 0)
            .count();
        assert!(empty >= 499);
    }

    #[test]
    fn ising_contours_at_n_one() {
        // spins on hexagons, exterior fixed; domain walls are the loops
        let cells = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1)];
        let d = patch(&cells);
        let g = d.graph();
        let theta: f64 = 0.45;
        let ex = exact_on_partition(g, 1.0, theta, 40).unwrap();
        let side_cells: Vec<[Option<usize>; 2]> = g
            .edges()
            .iter()
            .map(|&(a, b)| {
                let s = edge_sides(d.key(a), d.key(b)).unwrap();
                [0, 1].map(|k| cells.iter().position(|&c| c == s[k]))
            })
            .collect();
        let mut z_ising = 0.0;
        let mut walls_seen = std::collections::HashSet::new();
        for mask in 0u32..1 << cells.len() {
            let spin = |c: Option<usize>| c.is_some_and(|k| mask >> k & 1 == 1);
            let walls: Vec<bool> = side_cells.iter().map(|s| spin(s[0]) != spin(s[1])).collect();
            let h = walls.iter().filter(|&&w| w).count();
            let w = theta.powi(h as i32);
            z_ising += w;
            let cfg = LoopConfig { edges: walls };
            assert!((ex.probability(&cfg) - w / ex.partition).abs() < 1e-14);
            walls_seen.insert(cfg);
        }
        assert!((z_ising - ex.partition).abs() < 1e-12);
        assert_eq!(walls_seen.len(), ex.configs.len());
    }
}
