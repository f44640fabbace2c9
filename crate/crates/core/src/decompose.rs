//! Strongly connected components of the variable dependence graph and their
//! depths in the condensation DAG.

use std::collections::BTreeSet;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

use crate::system::SppSystem;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Scc {
    /// Member components, ascending.
    pub vars: Vec<usize>,
    /// False for a single component that does not depend on itself.
    pub nontrivial: bool,
}

/// Condensation of the dependence graph `i -> k` iff `f_i` mentions `X_k`.
///
/// SCC ids are assigned in order of their smallest member. A top SCC is one
/// no other SCC depends on; `depth[s]` is the length of the longest path from
/// a top SCC down to `s`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub scc_of: Vec<usize>,
    pub sccs: Vec<Scc>,
    pub depth: Vec<usize>,
    pub height: usize,
    pub width: usize,
    /// Every SCC precedes the SCCs it depends on.
    pub topo_order: Vec<usize>,
    /// `edges[s]`: SCCs that `s` depends on directly (excluding itself).
    pub edges: Vec<Vec<usize>>,
}

impl Decomposition {
    pub fn len(&self) -> usize {
        self.sccs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sccs.is_empty()
    }

    pub fn is_strongly_connected(&self) -> bool {
        self.sccs.len() == 1
    }

    /// SCC ids of depth `t`, ascending.
    pub fn at_depth(&self, t: usize) -> Vec<usize> {
        (0..self.sccs.len()).filter(|&s| self.depth[s] == t).collect()
    }

    /// Members of all SCCs with depth greater than `t`.
    pub fn vars_deeper_than(&self, t: usize) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.sccs.len())
            .filter(|&s| self.depth[s] > t)
            .flat_map(|s| self.sccs[s].vars.iter().copied())
            .collect();
        v.sort_unstable();
        v
    }
}

pub fn scc_decompose(sys: &SppSystem) -> Decomposition {
    decompose_graph(sys.len(), |i| sys.dependencies(i))
}

/// Decomposes the graph on `0..n` with successor function `deps`.
pub fn decompose_graph(n: usize, deps: impl Fn(usize) -> Vec<usize>) -> Decomposition {
    let mut g = DiGraph::<usize, ()>::with_capacity(n, 0);
    let nodes: Vec<_> = (0..n).map(|i| g.add_node(i)).collect();
    let succ: Vec<Vec<usize>> = (0..n).map(&deps).collect();
    for (i, ks) in succ.iter().enumerate() {
        for &k in ks {
            g.add_edge(nodes[i], nodes[k], ());
        }
    }
    let mut comps: Vec<Vec<usize>> = tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut v: Vec<usize> = c.into_iter().map(|ix| g[ix]).collect();
            v.sort_unstable();
            v
        })
        .collect();
    comps.sort_by_key(|c| c[0]);

    let mut scc_of = vec![0; n];
    for (s, c) in comps.iter().enumerate() {
        for &v in c {
            scc_of[v] = s;
        }
    }
    let sccs: Vec<Scc> = comps
        .iter()
        .map(|c| Scc {
            nontrivial: c.len() > 1 || succ[c[0]].contains(&c[0]),
            vars: c.clone(),
        })
        .collect();
    let m = sccs.len();
    let mut edges: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); m];
    for (i, ks) in succ.iter().enumerate() {
        for &k in ks {
            if scc_of[i] != scc_of[k] {
                edges[scc_of[i]].insert(scc_of[k]);
            }
        }
    }

    // Kahn's algorithm from the top SCCs, smallest id first.
    let mut indeg = vec![0usize; m];
    for e in &edges {
        for &t in e {
            indeg[t] += 1;
        }
    }
    let mut ready: BTreeSet<usize> = (0..m).filter(|&s| indeg[s] == 0).collect();
    let mut topo_order = Vec::with_capacity(m);
    let mut depth = vec![0usize; m];
    while let Some(s) = ready.pop_first() {
        topo_order.push(s);
        for &t in &edges[s] {
            depth[t] = depth[t].max(depth[s] + 1);
            indeg[t] -= 1;
            if indeg[t] == 0 {
                ready.insert(t);
            }
        }
    }
    let height = depth.iter().copied().max().unwrap_or(0);
    let width = (0..=height)
        .map(|t| depth.iter().filter(|&&d| d == t).count())
        .max()
        .unwrap_or(0);
    Decomposition {
        scc_of,
        sccs,
        depth,
        height,
        width,
        topo_order,
        edges: edges.into_iter().map(|e| e.into_iter().collect()).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::dsl::parse_system;

    #[test]
    fn chain_family_depths() {
        let d = scc_decompose(&catalog::worst_case_family(3));
        assert_eq!(d.len(), 3);
        assert!(d.sccs.iter().all(|s| s.vars.len() == 1 && s.nontrivial));
        assert_eq!(d.depth, vec![2, 1, 0]);
        assert_eq!((d.height, d.width), (2, 1));
        assert_eq!(d.topo_order, vec![2, 1, 0]);
        assert_eq!(d.vars_deeper_than(0), vec![0, 1]);
    }

    #[test]
    fn back_button_is_one_scc() {
        let d = scc_decompose(&catalog::back_button());
        assert!(d.is_strongly_connected());
        assert_eq!(d.sccs[0].vars, vec![0, 1, 2]);
        assert!(d.sccs[0].nontrivial);
        assert_eq!(d.depth, vec![0]);
    }

    #[test]
    fn constant_is_trivial() {
        let d = scc_decompose(&parse_system("X = 0.5").unwrap());
        assert_eq!(d.len(), 1);
        assert!(!d.sccs[0].nontrivial);
        assert_eq!((d.height, d.width), (0, 1));
    }

    #[test]
    fn diamond_width() {
        let sys = parse_system("A = 0.5*B + 0.5*C\nB = 0.5*D + 0.1\nC = 0.5*D + 0.1\nD = 0.5").unwrap();
        let d = scc_decompose(&sys);
        assert_eq!(d.depth, vec![0, 1, 1, 2]);
        assert_eq!((d.height, d.width), (2, 2));
        assert_eq!(d.at_depth(1), vec![1, 2]);
    }
}
