use rand::seq::IndexedRandom;

use crate::error::{Error, Result};
use crate::lattice::Graph;
use crate::rng::Rng;

/// Uniform spanning tree by Wilson's algorithm: loop-erased random walks from
/// each vertex not yet in the tree, stopped on hitting it. Returns the tree as
/// open edges.
pub fn sample_ust_wilson(graph: &Graph, rng: &mut Rng) -> Result<Vec<bool>> {
    let n = graph.vertex_count();
    if n == 0 || !graph.is_connected() {
        return Err(Error::Disconnected);
    }
    let mut in_tree = vec![false; n];
    // next[v] = (neighbor, edge) of the last exit from v; following it from
    // any start traces the loop-erased path
    let mut next: Vec<(usize, usize)> = vec![(usize::MAX, usize::MAX); n];
    in_tree[0] = true;
    let mut open = vec![false; graph.edge_count()];
    for start in 1..n {
        let mut u = start;
        while !in_tree[u] {
            let &(v, e) = graph.incident(u).choose(rng).expect("connected graph has no isolated vertex");
            next[u] = (v, e);
            u = v;
        }
        let mut u = start;
        while !in_tree[u] {
            in_tree[u] = true;
            let (v, e) = next[u];
            open[e] = true;
            u = v;
        }
    }
    Ok(open)
}
