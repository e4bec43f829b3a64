//! Exhaustive enumeration over spin and bond configurations of small graphs.

use crate::error::{invalid, Error, Result};
use crate::lattice::{Graph, UnionFind};

use super::fk::fk_weight_wired;
use super::potts::{beta_to_p, p_to_beta};

pub const DEFAULT_MAX_STATES: u128 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    Potts { q: u32, beta: f64 },
    Fk { p: f64, q: f64 },
}

/// Normalized probabilities over every configuration, and the partition sum.
/// Potts states are indexed by `sum_s spin_s q^s`; bond states by the bit
/// mask of open edges.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDistribution {
    pub probs: Vec<f64>,
    pub partition: f64,
}

fn state_count(base: u128, exp: usize, limit: u128) -> Result<usize> {
    let mut states: u128 = 1;
    for _ in 0..exp {
        states = states.saturating_mul(base);
    }
    if states > limit {
        return Err(Error::TooLarge { states, limit });
    }
    Ok(states as usize)
}

pub fn decode_spins(mut index: usize, n: usize, q: u32) -> Vec<u32> {
    (0..n)
        .map(|_| {
            let s = (index % q as usize) as u32;
            index /= q as usize;
            s
        })
        .collect()
}

pub fn exact_partition(graph: &Graph, model: Model, max_states: u128) -> Result<ExactDistribution> {
    match model {
        Model::Potts { q, beta } => potts_exact(graph, q, beta, &vec![None; graph.vertex_count()], max_states),
        Model::Fk { p, q } => fk_exact(graph, p, q, &[], max_states),
    }
}

/// Boltzmann distribution; states violating a pin get probability zero.
pub fn potts_exact(graph: &Graph, q: u32, beta: f64, pins: &[Option<u32>], max_states: u128) -> Result<ExactDistribution> {
    if q < 2 || !(beta >= 0.0) {
        return Err(invalid("Potts enumeration needs q >= 2 and beta >= 0"));
    }
    let n = graph.vertex_count();
    let count = state_count(q as u128, n, max_states)?;
    let mut spins = vec![0u32; n];
    let mut weights = vec![0.0; count];
    for (k, w) in weights.iter_mut().enumerate() {
        if k > 0 {
            // odometer increment
            for s in spins.iter_mut() {
                *s += 1;
                if *s < q {
                    break;
                }
                *s = 0;
            }
        }
        if pins.iter().zip(&spins).any(|(p, &s)| matches!(p, Some(c) if *c != s)) {
            continue;
        }
        let h = graph.edges().iter().filter(|&&(a, b)| spins[a] != spins[b]).count();
        *w = (-beta * h as f64).exp();
    }
    normalize(weights)
}

/// FK distribution over all bond configurations, wired sites identified.
pub fn fk_exact(graph: &Graph, p: f64, q: f64, wired: &[usize], max_states: u128) -> Result<ExactDistribution> {
    if !(0.0..=1.0).contains(&p) || !(q > 0.0) {
        return Err(invalid("FK enumeration needs p in [0,1] and q > 0"));
    }
    let m = graph.edge_count();
    let count = state_count(2, m, max_states)?;
    let weights = (0..count)
        .map(|mask| fk_weight_wired(graph, &mask_to_bonds(mask, m), p, q, wired))
        .collect();
    normalize(weights)
}

fn normalize(weights: Vec<f64>) -> Result<ExactDistribution> {
    let z: f64 = weights.iter().sum();
    if !(z > 0.0) {
        return Err(Error::Degenerate("partition function vanishes".into()));
    }
    Ok(ExactDistribution {
        probs: weights.iter().map(|w| w / z).collect(),
        partition: z,
    })
}

fn mask_to_bonds(mask: usize, m: usize) -> Vec<bool> {
    (0..m).map(|e| mask >> e & 1 == 1).collect()
}

fn cluster_labels(graph: &Graph, mask: usize) -> (Vec<usize>, usize) {
    let n = graph.vertex_count();
    let mut uf = UnionFind::new(n);
    for (e, &(a, b)) in graph.edges().iter().enumerate() {
        if mask >> e & 1 == 1 {
            uf.union(a, b);
        }
    }
    let mut slot = vec![usize::MAX; n];
    let mut k = 0;
    let labels = (0..n)
        .map(|s| {
            let r = uf.find(s);
            if slot[r] == usize::MAX {
                slot[r] = k;
                k += 1;
            }
            slot[r]
        })
        .collect();
    (labels, k)
}

/// Adds `mass` to every spin state constant on the clusters given by
/// `labels`; clusters with a pin take only that color.
pub(crate) fn spread_over_colorings(out: &mut [f64], labels: &[usize], pins: &[Option<u32>], q: u32, mass: f64) {
    let k = pins.len();
    let mut place = vec![0usize; k];
    let mut pow = 1usize;
    for &l in labels {
        place[l] += pow;
        pow *= q as usize;
    }
    let lo: Vec<u32> = pins.iter().map(|p| p.unwrap_or(0)).collect();
    let hi: Vec<u32> = pins.iter().map(|p| p.map_or(q, |c| c + 1)).collect();
    let mut colors = lo.clone();
    let mut index: usize = (0..k).map(|c| lo[c] as usize * place[c]).sum();
    loop {
        out[index] += mass;
        let mut c = 0;
        loop {
            if c == k {
                return;
            }
            colors[c] += 1;
            index += place[c];
            if colors[c] < hi[c] {
                break;
            }
            index -= (hi[c] - lo[c]) as usize * place[c];
            colors[c] = lo[c];
            c += 1;
        }
    }
}

/// Spin marginal of the Edwards-Sokal coupling: draw `omega` from the free FK
/// measure and color each cluster uniformly.
pub fn es_spin_marginal(graph: &Graph, p: f64, q: u32, max_states: u128) -> Result<Vec<f64>> {
    let n = graph.vertex_count();
    let fk = fk_exact(graph, p, q as f64, &[], max_states)?;
    let mut out = vec![0.0; state_count(q as u128, n, max_states)?];
    for (mask, &w) in fk.probs.iter().enumerate() {
        let (labels, k) = cluster_labels(graph, mask);
        spread_over_colorings(&mut out, &labels, &vec![None; k], q, w / (q as f64).powi(k as i32));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationCheck {
    /// `P(sigma(x) = sigma(y)) - 1/q` under the Potts measure with
    /// `beta = -ln(1 - p)`.
    pub potts_side: f64,
    /// `(1 - 1/q) P(x <-> y)` under the FK measure.
    pub fk_side: f64,
}

impl CorrelationCheck {
    pub fn difference(&self) -> f64 {
        (self.potts_side - self.fk_side).abs()
    }
}

pub fn correlation_identity_check(graph: &Graph, p: f64, q: u32, x: usize, y: usize) -> Result<CorrelationCheck> {
    let n = graph.vertex_count();
    if x >= n || y >= n {
        return Err(invalid("site out of range"));
    }
    let qf = q as f64;
    let potts = potts_exact(graph, q, p_to_beta(p), &vec![None; n], DEFAULT_MAX_STATES)?;
    let mut agree = 0.0;
    for (k, &pr) in potts.probs.iter().enumerate() {
        let s = decode_spins(k, n, q);
        if s[x] == s[y] {
            agree += pr;
        }
    }
    let fk = fk_exact(graph, p, qf, &[], DEFAULT_MAX_STATES)?;
    let mut connected = 0.0;
    for (mask, &pr) in fk.probs.iter().enumerate() {
        let (labels, _) = cluster_labels(graph, mask);
        if labels[x] == labels[y] {
            connected += pr;
        }
    }
    Ok(CorrelationCheck {
        potts_side: agree - 1.0 / qf,
        fk_side: (1.0 - 1.0 / qf) * connected,
    })
}

/// One exact Swendsen-Wang transition applied to a distribution over spin
/// states (free boundary).
pub fn sw_kernel_apply(graph: &Graph, q: u32, beta: f64, dist: &[f64]) -> Result<Vec<f64>> {
    let n = graph.vertex_count();
    let m = graph.edge_count();
    if m > 30 {
        return Err(Error::TooLarge {
            states: 1u128 << m,
            limit: 1 << 30,
        });
    }
    if dist.len() != state_count(q as u128, n, DEFAULT_MAX_STATES)? {
        return Err(invalid("distribution has the wrong number of states"));
    }
    let p = beta_to_p(beta);
    // joint mass of each bond configuration after the bond step
    let mut bond_mass = vec![0.0; 1usize << m];
    for (k, &pr) in dist.iter().enumerate() {
        if pr == 0.0 {
            continue;
        }
        let s = decode_spins(k, n, q);
        let agree: usize = graph
            .edges()
            .iter()
            .enumerate()
            .filter(|(_, &(a, b))| s[a] == s[b])
            .fold(0, |acc, (e, _)| acc | 1 << e);
        let a = agree.count_ones() as i32;
        let mut sub = agree;
        loop {
            let o = sub.count_ones() as i32;
            bond_mass[sub] += pr * p.powi(o) * (1.0 - p).powi(a - o);
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & agree;
        }
    }
    let mut out = vec![0.0; dist.len()];
    for (mask, &w) in bond_mass.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let (labels, k) = cluster_labels(graph, mask);
        spread_over_colorings(&mut out, &labels, &vec![None; k], q, w / (q as f64).powi(k as i32));
    }
    Ok(out)
}

/// All spanning trees as edge indicator vectors, in increasing mask order.
pub fn spanning_trees(graph: &Graph) -> Vec<Vec<bool>> {
    let n = graph.vertex_count();
    let m = graph.edge_count();
    assert!(m <= 24, "spanning-tree enumeration is for small graphs");
    let mut out = Vec::new();
    for mask in 0usize..1 << m {
        if mask.count_ones() as usize + 1 != n {
            continue;
        }
        let mut uf = UnionFind::new(n);
        let acyclic = graph
            .edges()
            .iter()
            .enumerate()
            .filter(|(e, _)| mask >> e & 1 == 1)
            .all(|(_, &(a, b))| uf.union(a, b));
        if acyclic {
            out.push(mask_to_bonds(mask, m));
        }
    }
    out
}
