#![allow(dead_code)]

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sfg_core::graph::{NodeId, SfgGraph, SymbolId};
use sfg_core::poly::{Poly, RationalFn};

pub mod checks;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// Random polynomial of degree `0..=max_degree`; `positive` draws every
/// coefficient from [0.2, 1.5], otherwise from [-1.5, 1.5].
pub fn random_poly(rng: &mut ChaCha8Rng, max_degree: usize, positive: bool) -> Poly {
    let degree = rng.gen_range(0..=max_degree);
    let coeffs = (0..=degree)
        .map(|_| {
            if positive {
                rng.gen_range(0.2..1.5)
            } else {
                let c: f64 = rng.gen_range(0.2..1.5);
                if rng.gen_bool(0.5) { c } else { -c }
            }
        })
        .collect();
    Poly::new(coeffs)
}

pub fn random_gain(rng: &mut ChaCha8Rng, max_degree: usize) -> RationalFn {
    RationalFn::new(random_poly(rng, max_degree, false), random_poly(rng, max_degree, true)).unwrap()
}

/// Random graph on nodes `1..=nodes` with input 1 and output `nodes`, a
/// guaranteed forward path, and `branches` branches in total (parallels,
/// self-branches and branches into the input or out of the output allowed).
pub fn random_graph(rng: &mut ChaCha8Rng, nodes: u32, branches: usize, max_degree: usize) -> SfgGraph {
    let mut g = SfgGraph::new(1, nodes);
    for id in 1..=nodes {
        g.add_node(id, None);
    }
    let mut path = vec![1];
    for mid in 2..nodes {
        if rng.gen_bool(0.5) {
            path.push(mid);
        }
    }
    path.push(nodes);
    if nodes == 1 {
        path = vec![1];
    }
    for w in path.windows(2) {
        g.add_branch(w[0], w[1], random_gain(rng, max_degree), &[]).unwrap();
    }
    while g.branches().len() < branches {
        let u = rng.gen_range(1..=nodes);
        let v = rng.gen_range(1..=nodes);
        g.add_branch(u, v, random_gain(rng, max_degree), &[]).unwrap();
    }
    g
}

/// Random sample point away from the real axis.
pub fn random_point(rng: &mut ChaCha8Rng) -> Complex64 {
    let re = rng.gen_range(-1.0..1.5);
    let im: f64 = rng.gen_range(0.3..2.0);
    Complex64::new(re, if rng.gen_bool(0.5) { im } else { -im })
}

pub fn no_symbols() -> BTreeMap<SymbolId, Complex64> {
    BTreeMap::new()
}

pub fn rel_err(got: Complex64, want: Complex64) -> f64 {
    (got - want).norm() / want.norm().max(f64::MIN_POSITIVE)
}

/// Brute-force elementary circuits: DFS from every start node through
/// larger nodes only, excluding nodes already on the path. Returns canonical
/// node sequences, sorted.
pub fn brute_force_circuits(g: &SfgGraph) -> Vec<Vec<NodeId>> {
    let mut adj: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for b in g.branches() {
        adj.entry(b.from).or_default().push(b.to);
    }
    let mut out = Vec::new();
    fn dfs(
        adj: &BTreeMap<NodeId, Vec<NodeId>>,
        start: NodeId,
        path: &mut Vec<NodeId>,
        out: &mut Vec<Vec<NodeId>>,
    ) {
        let last = *path.last().unwrap();
        for &next in adj.get(&last).map(Vec::as_slice).unwrap_or(&[]) {
            if next == start {
                out.push(path.clone());
            } else if next > start && !path.contains(&next) {
                path.push(next);
                dfs(adj, start, path, out);
                path.pop();
            }
        }
    }
    for start in g.nodes() {
        dfs(&adj, start, &mut vec![start], &mut out);
    }
    out.sort();
    out.dedup();
    out
}

pub fn node_id_range(n: u32) -> std::ops::RangeInclusive<NodeId> {
    1..=n
}
