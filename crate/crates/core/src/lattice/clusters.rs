use std::collections::VecDeque;

use super::{Graph, UnionFind};

/// Connected components of open sites, each sorted, listed in order of their
/// smallest site.
pub fn find_site_clusters(graph: &Graph, open: &[bool]) -> Vec<Vec<usize>> {
    assert_eq!(open.len(), graph.vertex_count(), "one state per site");
    let mut uf = UnionFind::new(open.len());
    for &(a, b) in graph.edges() {
        if open[a] && open[b] {
            uf.union(a, b);
        }
    }
    group(&mut uf, (0..open.len()).filter(|&s| open[s]))
}

/// Components of the spanning subgraph of open edges; every site belongs to
/// exactly one cluster (isolated sites are singletons).
pub fn find_bond_clusters(graph: &Graph, open_edges: &[bool]) -> Vec<Vec<usize>> {
    let mut uf = bond_union_find(graph, open_edges);
    group(&mut uf, 0..graph.vertex_count())
}

pub fn count_bond_clusters(graph: &Graph, open_edges: &[bool]) -> usize {
    let uf = bond_union_find(graph, open_edges);
    uf.components()
}

pub(crate) fn bond_union_find(graph: &Graph, open_edges: &[bool]) -> UnionFind {
    assert_eq!(open_edges.len(), graph.edge_count(), "one state per edge");
    let mut uf = UnionFind::new(graph.vertex_count());
    for (e, &(a, b)) in graph.edges().iter().enumerate() {
        if open_edges[e] {
            uf.union(a, b);
        }
    }
    uf
}

fn group(uf: &mut UnionFind, sites: impl Iterator<Item = usize>) -> Vec<Vec<usize>> {
    let mut slot = vec![usize::MAX; uf.len()];
    let mut out: Vec<Vec<usize>> = Vec::new();
    for s in sites {
        let r = uf.find(s);
        if slot[r] == usize::MAX {
            slot[r] = out.len();
            out.push(Vec::new());
        }
        out[slot[r]].push(s);
    }
    out
}

/// Breadth-first labeling; kept as an independent check on union-find.
pub fn bfs_site_clusters(graph: &Graph, open: &[bool]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; open.len()];
    let mut out = Vec::new();
    for s in 0..open.len() {
        if !open[s] || seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for v in graph.neighbors(u) {
                if open[v] && !seen[v] {
                    seen[v] = true;
                    comp.push(v);
                    q.push_back(v);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}
