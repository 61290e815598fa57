//! Network topology: incidence matrix and a fundamental cycle basis for the
//! linearized (angle-free) Kirchhoff voltage law.
//!
//! The spanning forest is grown depth-first from the lowest-indexed bus of
//! every component, scanning incident lines in input order, so the basis is
//! a deterministic function of the input ordering.

use crate::model::Network;

/// Bus × line incidence: column `l` has `+1` at the line's `from` bus and
/// `-1` at its `to` bus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix {
    pub n_buses: usize,
    /// `(from, to)` bus indices per line.
    pub columns: Vec<(usize, usize)>,
}

impl IncidenceMatrix {
    pub fn n_lines(&self) -> usize {
        self.columns.len()
    }

    pub fn get(&self, bus: usize, line: usize) -> i8 {
        let (f, t) = self.columns[line];
        if bus == f {
            1
        } else if bus == t {
            -1
        } else {
            0
        }
    }

    /// Nonzero entries as `(bus, line, value)`.
    pub fn triplets(&self) -> Vec<(usize, usize, i8)> {
        self.columns.iter().enumerate().flat_map(|(l, &(f, t))| [(f, l, 1), (t, l, -1)]).collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<i8>> {
        let mut k = vec![vec![0i8; self.n_lines()]; self.n_buses];
        for (b, l, v) in self.triplets() {
            k[b][l] = v;
        }
        k
    }
}

/// Line × cycle orientation matrix, stored column-wise: every cycle is a list
/// of `(line, ±1)` entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleBasis {
    pub n_lines: usize,
    pub cycles: Vec<Vec<(usize, i8)>>,
}

impl CycleBasis {
    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    pub fn get(&self, line: usize, cycle: usize) -> i8 {
        self.cycles[cycle].iter().find(|(l, _)| *l == line).map_or(0, |&(_, s)| s)
    }

    /// `K · C` in exact integer arithmetic, `n_buses × n_cycles`.
    pub fn boundary(&self, k: &IncidenceMatrix) -> Vec<Vec<i64>> {
        let mut out = vec![vec![0i64; self.cycles.len()]; k.n_buses];
        for (c, cycle) in self.cycles.iter().enumerate() {
            for &(l, s) in cycle {
                let (f, t) = k.columns[l];
                out[f][c] += s as i64;
                out[t][c] -= s as i64;
            }
        }
        out
    }

    pub fn is_closed_under(&self, k: &IncidenceMatrix) -> bool {
        self.boundary(k).iter().flatten().all(|&v| v == 0)
    }
}

fn edges_of(network: &Network) -> (usize, Vec<(usize, usize)>) {
    let lookup = network.bus_lookup();
    let edges = network.lines.iter().map(|l| (lookup[l.bus_from.as_str()], lookup[l.bus_to.as_str()])).collect();
    (network.buses.len(), edges)
}

/// Requires every line endpoint to name an existing bus.
pub fn incidence_matrix(network: &Network) -> IncidenceMatrix {
    let (n, edges) = edges_of(network);
    IncidenceMatrix { n_buses: n, columns: edges }
}

/// Component label of every bus, numbered in order of the lowest bus index.
pub fn connected_components(network: &Network) -> Vec<usize> {
    let (n, edges) = edges_of(network);
    components_from_edges(n, &edges)
}

pub fn components_from_edges(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    spanning_forest(n, edges).component
}

struct Forest {
    component: Vec<usize>,
    parent: Vec<Option<(usize, usize)>>, // (parent node, line)
    depth: Vec<usize>,
    tree_edge: Vec<bool>,
}

fn spanning_forest(n: usize, edges: &[(usize, usize)]) -> Forest {
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (l, &(a, b)) in edges.iter().enumerate() {
        adj[a].push((l, b));
        adj[b].push((l, a));
    }
    let mut component = vec![usize::MAX; n];
    let mut parent = vec![None; n];
    let mut depth = vec![0; n];
    let mut tree_edge = vec![false; edges.len()];
    let mut n_comp = 0;
    for root in 0..n {
        if component[root] != usize::MAX {
            continue;
        }
        component[root] = n_comp;
        let mut stack = vec![(root, 0usize)];
        while let Some(top) = stack.last_mut() {
            let (node, next) = *top;
            if next == adj[node].len() {
                stack.pop();
                continue;
            }
            top.1 += 1;
            let (l, other) = adj[node][next];
            if component[other] == usize::MAX {
                component[other] = n_comp;
                parent[other] = Some((node, l));
                depth[other] = depth[node] + 1;
                tree_edge[l] = true;
                stack.push((other, 0));
            }
        }
        n_comp += 1;
    }
    Forest { component, parent, depth, tree_edge }
}

/// Fundamental cycle basis for an arbitrary multigraph given as directed
/// edges `(from, to)` over nodes `0..n`.
pub fn cycle_basis_from_edges(n: usize, edges: &[(usize, usize)]) -> CycleBasis {
    let forest = spanning_forest(n, edges);
    let mut cycles = Vec::new();
    for (l, &(u, v)) in edges.iter().enumerate() {
        if forest.tree_edge[l] {
            continue;
        }
        // Closed walk: u --l--> v, then along the tree from v back to u.
        let mut cycle = vec![(l, 1i8)];
        let mut up_from_v = Vec::new();
        let mut up_from_u = Vec::new();
        let (mut a, mut b) = (v, u);
        while forest.depth[a] > forest.depth[b] {
            let (p, e) = forest.parent[a].expect("non-root has parent");
            up_from_v.push((a, p, e));
            a = p;
        }
        while forest.depth[b] > forest.depth[a] {
            let (p, e) = forest.parent[b].expect("non-root has parent");
            up_from_u.push((b, p, e));
            b = p;
        }
        while a != b {
            let (pa, ea) = forest.parent[a].expect("non-root has parent");
            up_from_v.push((a, pa, ea));
            a = pa;
            let (pb, eb) = forest.parent[b].expect("non-root has parent");
            up_from_u.push((b, pb, eb));
            b = pb;
        }
        // v up to the common ancestor ...
        for &(child, par, e) in &up_from_v {
            cycle.push((e, orientation(edges[e], child, par)));
        }
        // ... then down to u.
        for &(child, par, e) in up_from_u.iter().rev() {
            cycle.push((e, orientation(edges[e], par, child)));
        }
        cycles.push(cycle);
    }
    CycleBasis { n_lines: edges.len(), cycles }
}

fn orientation(edge: (usize, usize), walk_from: usize, walk_to: usize) -> i8 {
    if edge == (walk_from, walk_to) {
        1
    } else {
        debug_assert_eq!(edge, (walk_to, walk_from));
        -1
    }
}

/// Requires every line endpoint to name an existing bus.
pub fn cycle_basis(network: &Network) -> CycleBasis {
    let (n, edges) = edges_of(network);
    cycle_basis_from_edges(n, &edges)
}
