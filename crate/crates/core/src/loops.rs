//! Elementary circuits of the closed graph, their gains, and the pairwise
//! touch relation.
//!
//! Circuits are found with Johnson's algorithm: for each start vertex `s`
//! (in ascending order) the strongly connected component containing `s` in
//! the subgraph induced by vertices `>= s` is searched with the usual
//! blocked-set bookkeeping. Self-branches are read straight off the branch
//! list and never enter the search.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::graph::{NodeId, SfgGraph, SymbolId};
use crate::poly::{Poly, RationalFn};

/// Default cap on the number of circuits before enumeration gives up.
pub const DEFAULT_LOOP_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LoopError {
    #[error("more than {0} loops; the graph is too large for exhaustive enumeration")]
    TooManyLoops(usize),
    #[error("parallel branches {0} -> {1}; run preprocessing first")]
    ParallelBranches(NodeId, NodeId),
}

/// A product of symbols: a sorted multiset of user symbols plus the exponent
/// of the `1/G` marker.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial {
    symbols: Vec<SymbolId>,
    inv_g: u32,
}

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn from_symbols<'a>(symbols: impl IntoIterator<Item = &'a SymbolId>) -> Self {
        let mut m = Self::one();
        for s in symbols {
            if s.is_inv_g() {
                m.inv_g += 1;
            } else {
                m.symbols.push(s.clone());
            }
        }
        m.symbols.sort();
        m
    }

    pub fn is_one(&self) -> bool {
        self.symbols.is_empty() && self.inv_g == 0
    }

    pub fn symbols(&self) -> &[SymbolId] {
        &self.symbols
    }

    pub fn inv_g(&self) -> u32 {
        self.inv_g
    }

    pub fn exponent(&self, sym: &SymbolId) -> u32 {
        if sym.is_inv_g() {
            return self.inv_g;
        }
        self.symbols.iter().filter(|s| *s == sym).count() as u32
    }

    pub fn mul(&self, rhs: &Monomial) -> Monomial {
        let mut symbols = self.symbols.clone();
        symbols.extend(rhs.symbols.iter().cloned());
        symbols.sort();
        Monomial {
            symbols,
            inv_g: self.inv_g + rhs.inv_g,
        }
    }

    /// Drops every occurrence of `sym`.
    pub fn without(&self, sym: &SymbolId) -> Monomial {
        if sym.is_inv_g() {
            return Monomial {
                symbols: self.symbols.clone(),
                inv_g: 0,
            };
        }
        Monomial {
            symbols: self.symbols.iter().filter(|s| *s != sym).cloned().collect(),
            inv_g: self.inv_g,
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return f.write_str("1");
        }
        let mut parts: Vec<String> = Vec::new();
        let mut i = 0;
        while i < self.symbols.len() {
            let s = &self.symbols[i];
            let k = self.symbols[i..].iter().take_while(|t| *t == s).count();
            parts.push(if k == 1 { s.to_string() } else { format!("{s}^{k}") });
            i += k;
        }
        match self.inv_g {
            0 => {}
            1 => parts.push(crate::graph::INV_G_NAME.into()),
            k => parts.push(format!("({})^{k}", crate::graph::INV_G_NAME)),
        }
        f.write_str(&parts.join("*"))
    }
}

/// Exact identity of a denominator polynomial, used to find least common
/// denominators without floating-point gcds.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FactorKey(Vec<u64>);

impl FactorKey {
    pub fn of(p: &Poly) -> Self {
        Self(p.coeffs().iter().map(|c| c.to_bits()).collect())
    }

    pub fn poly(&self) -> Poly {
        Poly::new(self.0.iter().map(|&b| f64::from_bits(b)).collect())
    }
}

/// Multiset of branch denominators whose product is a gain's denominator.
pub type DenFactors = BTreeMap<FactorKey, u32>;

/// A loop (or combination) gain: a symbol monomial times a rational part.
///
/// `den_factors` records which branch denominators were multiplied into
/// `rational.den()`, so that sums can be brought over a least common
/// denominator exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicGain {
    pub monomial: Monomial,
    pub rational: RationalFn,
    pub den_factors: DenFactors,
}

impl SymbolicGain {
    pub fn one() -> Self {
        Self {
            monomial: Monomial::one(),
            rational: RationalFn::one(),
            den_factors: DenFactors::new(),
        }
    }

    /// Gain of a single branch.
    pub fn of_branch(gain: &RationalFn, symbols: &[SymbolId]) -> Self {
        let mut den_factors = DenFactors::new();
        if *gain.den() != Poly::one() {
            den_factors.insert(FactorKey::of(gain.den()), 1);
        }
        Self {
            monomial: Monomial::from_symbols(symbols),
            rational: gain.clone(),
            den_factors,
        }
    }

    pub fn mul(&self, rhs: &SymbolicGain) -> SymbolicGain {
        let mut den_factors = self.den_factors.clone();
        for (k, m) in &rhs.den_factors {
            *den_factors.entry(k.clone()).or_insert(0) += m;
        }
        SymbolicGain {
            monomial: self.monomial.mul(&rhs.monomial),
            rational: &self.rational * &rhs.rational,
            den_factors,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopRec {
    pub index: usize,
    /// Rotated so the smallest node id comes first.
    pub node_seq: Vec<NodeId>,
    /// `branch_ids[k]` runs from `node_seq[k]` to `node_seq[k + 1]`
    /// (cyclically).
    pub branch_ids: Vec<usize>,
    pub node_set: BTreeSet<NodeId>,
}

impl LoopRec {
    pub fn len(&self) -> usize {
        self.node_seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_seq.is_empty()
    }

    pub fn is_self_loop(&self) -> bool {
        self.node_seq.len() == 1
    }
}

/// Enumerates the elementary circuits of `g` with the default cap.
pub fn find_loops(g: &SfgGraph) -> Result<Vec<LoopRec>, LoopError> {
    find_loops_capped(g, DEFAULT_LOOP_CAP)
}

/// Enumerates the elementary circuits of `g`, in lexicographic order of
/// their canonical node sequences.
pub fn find_loops_capped(g: &SfgGraph, cap: usize) -> Result<Vec<LoopRec>, LoopError> {
    let ids: Vec<NodeId> = g.nodes().collect();
    let index: HashMap<NodeId, usize> = ids.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let n = ids.len();

    let mut edge = HashMap::new();
    let mut adj = vec![Vec::new(); n];
    let mut self_loops = Vec::new();
    for b in g.branches() {
        if edge.insert((b.from, b.to), b.id).is_some() {
            return Err(LoopError::ParallelBranches(b.from, b.to));
        }
        let (u, v) = (index[&b.from], index[&b.to]);
        if u == v {
            self_loops.push(u);
        } else {
            adj[u].push(v);
        }
    }
    for list in adj.iter_mut() {
        list.sort_unstable();
    }

    let mut cycles: Vec<Vec<usize>> = self_loops.into_iter().map(|u| vec![u]).collect();
    if cycles.len() > cap {
        return Err(LoopError::TooManyLoops(cap));
    }
    let mut search = Johnson::new(n);
    for s in 0..n {
        let comp = component_of(&adj, s);
        if comp.len() < 2 {
            continue;
        }
        search.reset(&comp);
        search.circuit(s, s, &adj, &mut cycles, cap)?;
    }

    let mut loops: Vec<LoopRec> = cycles
        .into_iter()
        .map(|c| {
            let node_seq: Vec<NodeId> = c.iter().map(|&i| ids[i]).collect();
            let branch_ids = (0..node_seq.len())
                .map(|k| {
                    let from = node_seq[k];
                    let to = node_seq[(k + 1) % node_seq.len()];
                    edge[&(from, to)]
                })
                .collect();
            LoopRec {
                index: 0,
                node_set: node_seq.iter().copied().collect(),
                node_seq,
                branch_ids,
            }
        })
        .collect();
    loops.sort_by(|a, b| a.node_seq.cmp(&b.node_seq));
    for (i, l) in loops.iter_mut().enumerate() {
        l.index = i;
    }
    Ok(loops)
}

/// Vertices of the strongly connected component containing `s` in the
/// subgraph induced by vertices `>= s`, as a membership mask.
fn component_of(adj: &[Vec<usize>], s: usize) -> Vec<usize> {
    let n = adj.len();
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(u) = stack.pop() {
            let next: Box<dyn Iterator<Item = usize>> = if forward {
                Box::new(adj[u].iter().copied())
            } else {
                Box::new((s..n).filter(move |&w| adj[w].binary_search(&u).is_ok()))
            };
            for v in next {
                if v >= s && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    };
    let fwd = reach(true);
    let bwd = reach(false);
    (s..n).filter(|&v| fwd[v] && bwd[v]).collect()
}

struct Johnson {
    blocked: Vec<bool>,
    blocked_by: Vec<BTreeSet<usize>>,
    in_comp: Vec<bool>,
    stack: Vec<usize>,
}

impl Johnson {
    fn new(n: usize) -> Self {
        Self {
            blocked: vec![false; n],
            blocked_by: vec![BTreeSet::new(); n],
            in_comp: vec![false; n],
            stack: Vec::new(),
        }
    }

    fn reset(&mut self, comp: &[usize]) {
        self.in_comp.iter_mut().for_each(|x| *x = false);
        for &v in comp {
            self.in_comp[v] = true;
            self.blocked[v] = false;
            self.blocked_by[v].clear();
        }
        self.stack.clear();
    }

    fn unblock(&mut self, u: usize) {
        let mut work = vec![u];
        while let Some(w) = work.pop() {
            if !self.blocked[w] {
                continue;
            }
            self.blocked[w] = false;
            let waiting = std::mem::take(&mut self.blocked_by[w]);
            work.extend(waiting.into_iter().filter(|&x| self.blocked[x]));
        }
    }

    fn circuit(
        &mut self,
        v: usize,
        s: usize,
        adj: &[Vec<usize>],
        out: &mut Vec<Vec<usize>>,
        cap: usize,
    ) -> Result<bool, LoopError> {
        let mut found = false;
        self.stack.push(v);
        self.blocked[v] = true;
        for &w in &adj[v] {
            if !self.in_comp[w] {
                continue;
            }
            if w == s {
                out.push(self.stack.clone());
                if out.len() > cap {
                    return Err(LoopError::TooManyLoops(cap));
                }
                found = true;
            } else if !self.blocked[w] && self.circuit(w, s, adj, out, cap)? {
                found = true;
            }
        }
        if found {
            self.unblock(v);
        } else {
            for &w in &adj[v] {
                if self.in_comp[w] {
                    self.blocked_by[w].insert(v);
                }
            }
        }
        self.stack.pop();
        Ok(found)
    }
}

/// Product of the gains of the branches a loop traverses.
pub fn loop_gain(l: &LoopRec, g: &SfgGraph) -> SymbolicGain {
    l.branch_ids
        .iter()
        .map(|&id| {
            let b = g.branch(id).expect("loop branch belongs to the graph");
            SymbolicGain::of_branch(&b.gain, &b.symbols)
        })
        .fold(SymbolicGain::one(), |acc, b| acc.mul(&b))
}

/// Symmetric loop-contact relation; two loops touch when they share a node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TouchMatrix {
    n: usize,
    cells: Vec<bool>,
}

impl TouchMatrix {
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut cells = vec![true; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let t = f(i, j);
                cells[i * n + j] = t;
                cells[j * n + i] = t;
            }
        }
        Self { n, cells }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn touch(&self, i: usize, j: usize) -> bool {
        self.cells[i * self.n + j]
    }

    /// Loops that do not touch `i`, ascending.
    pub fn partners(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&j| !self.touch(i, j))
    }
}

pub fn touch_matrix(loops: &[LoopRec]) -> TouchMatrix {
    TouchMatrix::from_fn(loops.len(), |i, j| {
        !loops[i].node_set.is_disjoint(&loops[j].node_set)
    })
}
