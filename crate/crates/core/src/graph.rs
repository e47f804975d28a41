//! Signal-flow-graph model, file ingestion and the preprocessing transforms.
//!
//! A graph is built either programmatically or from the JSON file format and
//! then passed through [`SfgGraph::preprocess`] (parallel-branch node
//! insertion followed by terminal augmentation) and [`SfgGraph::close`],
//! which adds the `1/G` branch from the output back to the input.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{Poly, PolyError, RationalFn};

pub type NodeId = u32;

/// Reserved name of the closure marker.
pub const INV_G_NAME: &str = "1/G";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("malformed graph file: {0}")]
    Syntax(String),
    #[error("unknown node {node} referenced by branch {branch}")]
    UnknownNode { branch: usize, node: NodeId },
    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),
    #[error("cannot determine the {0} node: designate it explicitly")]
    AmbiguousTerminal(&'static str),
    #[error("designated {which} node {node} is not declared")]
    UnknownTerminal { which: &'static str, node: NodeId },
    #[error("the symbol name `1/G` is reserved")]
    ReservedSymbol,
    #[error("branch {branch} uses undeclared symbol `{symbol}`")]
    UndeclaredSymbol { branch: usize, symbol: String },
    #[error("branch {branch} repeats symbol `{symbol}`")]
    RepeatedSymbol { branch: usize, symbol: String },
    #[error("invalid symbol name `{0}`")]
    InvalidSymbol(String),
    #[error("branch {branch} has an invalid gain: {source}")]
    BadGain { branch: usize, source: PolyError },
    #[error("graph is already closed")]
    AlreadyClosed,
    #[error("operation requires an unclosed graph")]
    Closed,
}

/// A symbolic branch factor, or the distinguished `1/G` closure marker.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolId {
    name: String,
}

impl SymbolId {
    /// A user symbol. Rejects the reserved `1/G` name and empty or
    /// whitespace-containing names.
    pub fn new(name: impl Into<String>) -> Result<Self, GraphError> {
        let name = name.into();
        if name == INV_G_NAME {
            return Err(GraphError::ReservedSymbol);
        }
        if name.is_empty() || name.chars().any(|c| c.is_whitespace() || c == '=') {
            return Err(GraphError::InvalidSymbol(name));
        }
        Ok(Self { name })
    }

    pub fn inv_g() -> Self {
        Self {
            name: INV_G_NAME.to_string(),
        }
    }

    pub fn is_inv_g(&self) -> bool {
        self.name == INV_G_NAME
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Display for SymbolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub id: usize,
    pub from: NodeId,
    pub to: NodeId,
    pub gain: RationalFn,
    /// Sorted, each symbol at most once.
    pub symbols: Vec<SymbolId>,
}

impl Branch {
    pub fn is_closure(&self) -> bool {
        self.symbols.iter().any(SymbolId::is_inv_g)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SfgGraph {
    nodes: BTreeMap<NodeId, Option<String>>,
    branches: Vec<Branch>,
    symbols: BTreeSet<SymbolId>,
    input: NodeId,
    output: NodeId,
    closed: bool,
}

impl SfgGraph {
    /// An empty graph with the given terminals declared as nodes.
    pub fn new(input: NodeId, output: NodeId) -> Self {
        let mut nodes = BTreeMap::new();
        nodes.insert(input, None);
        nodes.insert(output, None);
        Self {
            nodes,
            branches: Vec::new(),
            symbols: BTreeSet::new(),
            input,
            output,
            closed: false,
        }
    }

    /// Declares a node; re-declaring an existing node only updates its label.
    pub fn add_node(&mut self, id: NodeId, label: Option<&str>) -> &mut Self {
        let slot = self.nodes.entry(id).or_insert(None);
        if label.is_some() {
            *slot = label.map(str::to_string);
        }
        self
    }

    pub fn declare_symbol(&mut self, sym: SymbolId) -> &mut Self {
        self.symbols.insert(sym);
        self
    }

    /// Appends a branch, declaring its endpoints and symbols as needed.
    /// Returns the new branch id.
    pub fn add_branch(
        &mut self,
        from: NodeId,
        to: NodeId,
        gain: RationalFn,
        symbols: &[SymbolId],
    ) -> Result<usize, GraphError> {
        let id = self.next_branch_id();
        let symbols = normalize_symbols(id, symbols.to_vec())?;
        self.add_node(from, None).add_node(to, None);
        for s in &symbols {
            if !s.is_inv_g() {
                self.symbols.insert(s.clone());
            }
        }
        self.branches.push(Branch {
            id,
            from,
            to,
            gain,
            symbols,
        });
        Ok(id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.keys().copied()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn label(&self, id: NodeId) -> Option<&str> {
        self.nodes.get(&id).and_then(|l| l.as_deref())
    }

    pub fn has_node(&self, id: NodeId) -> bool {
        self.nodes.contains_key(&id)
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn branch(&self, id: usize) -> Option<&Branch> {
        self.branches.iter().find(|b| b.id == id)
    }

    pub fn symbols(&self) -> impl Iterator<Item = &SymbolId> {
        self.symbols.iter()
    }

    pub fn input(&self) -> NodeId {
        self.input
    }

    pub fn output(&self) -> NodeId {
        self.output
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Returns a copy with different terminals. Clears the closed state by
    /// dropping any closure branch.
    pub fn with_terminals(&self, input: NodeId, output: NodeId) -> Result<Self, GraphError> {
        for (which, node) in [("input", input), ("output", output)] {
            if !self.has_node(node) {
                return Err(GraphError::UnknownTerminal { which, node });
            }
        }
        let mut g = self.clone();
        g.branches.retain(|b| !b.is_closure());
        g.closed = false;
        g.input = input;
        g.output = output;
        Ok(g)
    }

    fn next_branch_id(&self) -> usize {
        self.branches.iter().map(|b| b.id + 1).max().unwrap_or(0)
    }

    fn fresh_node(&self) -> NodeId {
        self.nodes.keys().next_back().map_or(1, |&m| m + 1)
    }

    /// Resolves parallel branches by inserting a node: every branch after the
    /// first between the same ordered pair is rerouted through a fresh node,
    /// keeping its gain on the first half and a unit gain on the second.
    pub fn insert_parallel_nodes(&self) -> Self {
        let mut g = self.clone();
        let mut seen = BTreeSet::new();
        let mut extra = Vec::new();
        let mut next_id = g.next_branch_id();
        let mut fresh = g.fresh_node();
        for b in g.branches.iter_mut() {
            if seen.insert((b.from, b.to)) {
                continue;
            }
            let mid = fresh;
            fresh += 1;
            extra.push((
                mid,
                Branch {
                    id: next_id,
                    from: mid,
                    to: b.to,
                    gain: RationalFn::one(),
                    symbols: Vec::new(),
                },
            ));
            next_id += 1;
            b.to = mid;
        }
        for (mid, branch) in extra {
            g.nodes.insert(mid, None);
            g.branches.push(branch);
        }
        g
    }

    /// Makes the input a pure source and the output a pure sink by adding
    /// fresh terminal nodes joined with unit-gain branches where needed.
    pub fn augment_terminals(&self) -> Self {
        let mut g = self.clone();
        let shared = g.input == g.output;
        let input_fed = shared || g.branches.iter().any(|b| b.to == g.input);
        let output_drains = shared || g.branches.iter().any(|b| b.from == g.output);
        if input_fed {
            let src = g.fresh_node();
            let old = g.input;
            g.nodes.insert(src, None);
            let id = g.next_branch_id();
            g.branches.push(Branch {
                id,
                from: src,
                to: old,
                gain: RationalFn::one(),
                symbols: Vec::new(),
            });
            g.input = src;
        }
        if output_drains {
            let sink = g.fresh_node();
            let old = g.output;
            g.nodes.insert(sink, None);
            let id = g.next_branch_id();
            g.branches.push(Branch {
                id,
                from: old,
                to: sink,
                gain: RationalFn::one(),
                symbols: Vec::new(),
            });
            g.output = sink;
        }
        g
    }

    /// Parallel-branch insertion followed by terminal augmentation.
    pub fn preprocess(&self) -> Self {
        self.insert_parallel_nodes().augment_terminals()
    }

    /// Adds the `1/G` branch from the output to the input.
    pub fn close(&self) -> Result<Self, GraphError> {
        if self.closed {
            return Err(GraphError::AlreadyClosed);
        }
        let mut g = self.clone();
        let id = g.next_branch_id();
        g.branches.push(Branch {
            id,
            from: g.output,
            to: g.input,
            gain: RationalFn::one(),
            symbols: vec![SymbolId::inv_g()],
        });
        g.closed = true;
        Ok(g)
    }

    /// Lists violated structural invariants of a preprocessed (and possibly
    /// closed) graph. Empty means the graph is ready for loop enumeration.
    pub fn structural_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut pairs = BTreeSet::new();
        for b in &self.branches {
            if !self.has_node(b.from) || !self.has_node(b.to) {
                out.push(format!("branch {} has an undeclared endpoint", b.id));
            }
            if !pairs.insert((b.from, b.to)) {
                out.push(format!("parallel branches {} -> {}", b.from, b.to));
            }
            if !b.is_closure() {
                if b.to == self.input {
                    out.push(format!("input {} has incoming branch {}", self.input, b.id));
                }
                if b.from == self.output {
                    out.push(format!("output {} has outgoing branch {}", self.output, b.id));
                }
            }
        }
        let closures: Vec<_> = self.branches.iter().filter(|b| b.is_closure()).collect();
        match (self.closed, closures.as_slice()) {
            (false, []) => {}
            (true, [c]) => {
                if c.from != self.output || c.to != self.input || c.gain != RationalFn::one() {
                    out.push("closure branch is not a unit output -> input branch".into());
                }
            }
            _ => out.push(format!(
                "closed={} with {} closure branches",
                self.closed,
                closures.len()
            )),
        }
        out
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        parse_graph(text)
    }

    /// Canonical file text (nodes sorted, explicit terminals). Closed graphs
    /// cannot be written because the closure marker is not a legal symbol in
    /// files.
    pub fn to_json(&self) -> Result<String, GraphError> {
        if self.closed {
            return Err(GraphError::Closed);
        }
        let file = self.to_file();
        Ok(serde_json::to_string_pretty(&file).expect("graph file serializes"))
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            nodes: self
                .nodes
                .iter()
                .map(|(&id, label)| NodeEntry {
                    id,
                    label: label.clone(),
                })
                .collect(),
            branches: self
                .branches
                .iter()
                .filter(|b| !b.is_closure())
                .map(|b| BranchEntry {
                    from: b.from,
                    to: b.to,
                    num: b.gain.num().coeffs().to_vec(),
                    den: b.gain.den().coeffs().to_vec(),
                    symbols: b.symbols.iter().map(|s| s.name().to_string()).collect(),
                })
                .collect(),
            input: Some(self.input),
            output: Some(self.output),
            symbols: self.symbols.iter().map(|s| s.name().to_string()).collect(),
        }
    }
}

fn normalize_symbols(branch: usize, mut symbols: Vec<SymbolId>) -> Result<Vec<SymbolId>, GraphError> {
    symbols.sort();
    for w in symbols.windows(2) {
        if w[0] == w[1] {
            return Err(GraphError::RepeatedSymbol {
                branch,
                symbol: w[0].name().to_string(),
            });
        }
    }
    Ok(symbols)
}

/// On-disk graph description. Unknown keys (such as an editor layout
/// section) are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub nodes: Vec<NodeEntry>,
    pub branches: Vec<BranchEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<NodeId>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub symbols: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeEntry {
    pub id: NodeId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchEntry {
    pub from: NodeId,
    pub to: NodeId,
    pub num: Vec<f64>,
    #[serde(default = "unit_den")]
    pub den: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub symbols: Vec<String>,
}

fn unit_den() -> Vec<f64> {
    vec![1.0]
}

/// Parses the JSON graph file format into an unclosed, unpreprocessed graph.
pub fn parse_graph(text: &str) -> Result<SfgGraph, GraphError> {
    let file: GraphFile =
        serde_json::from_str(text).map_err(|e| GraphError::Syntax(e.to_string()))?;
    SfgGraph::try_from(file)
}

impl TryFrom<GraphFile> for SfgGraph {
    type Error = GraphError;

    fn try_from(file: GraphFile) -> Result<Self, GraphError> {
        let mut nodes = BTreeMap::new();
        for n in &file.nodes {
            if nodes.insert(n.id, n.label.clone()).is_some() {
                return Err(GraphError::DuplicateNode(n.id));
            }
        }
        let declared = file.symbols.iter().map(SymbolId::new).collect::<Result<BTreeSet<_>, _>>()?;
        let mut symbols = declared.clone();

        let mut branches = Vec::with_capacity(file.branches.len());
        for (id, e) in file.branches.iter().enumerate() {
            for node in [e.from, e.to] {
                if !nodes.contains_key(&node) {
                    return Err(GraphError::UnknownNode { branch: id, node });
                }
            }
            let gain = RationalFn::from_coeffs(e.num.clone(), e.den.clone())
                .map_err(|source| GraphError::BadGain { branch: id, source })?;
            let gain_degree = gain.num().degree().max(gain.den().degree());
            if gain_degree >= crate::poly::DEGREE_CAP {
                return Err(GraphError::BadGain {
                    branch: id,
                    source: PolyError::DegreeCap(gain_degree),
                });
            }
            let mut syms = Vec::with_capacity(e.symbols.len());
            for name in &e.symbols {
                let s = SymbolId::new(name.as_str())?;
                if !file.symbols.is_empty() && !declared.contains(&s) {
                    return Err(GraphError::UndeclaredSymbol {
                        branch: id,
                        symbol: name.clone(),
                    });
                }
                symbols.insert(s.clone());
                syms.push(s);
            }
            branches.push(Branch {
                id,
                from: e.from,
                to: e.to,
                gain,
                symbols: normalize_symbols(id, syms)?,
            });
        }

        let resolve = |which: &'static str, explicit: Option<NodeId>, free: Vec<NodeId>| {
            match explicit {
                Some(node) if nodes.contains_key(&node) => Ok(node),
                Some(node) => Err(GraphError::UnknownTerminal { which, node }),
                None => match free.as_slice() {
                    [only] => Ok(*only),
                    _ => Err(GraphError::AmbiguousTerminal(which)),
                },
            }
        };
        let no_incoming = nodes
            .keys()
            .copied()
            .filter(|n| !branches.iter().any(|b| b.to == *n))
            .collect();
        let no_outgoing = nodes
            .keys()
            .copied()
            .filter(|n| !branches.iter().any(|b| b.from == *n))
            .collect();
        let input = resolve("input", file.input, no_incoming)?;
        let output = resolve("output", file.output, no_outgoing)?;

        Ok(SfgGraph {
            nodes,
            branches,
            symbols,
            input,
            output,
            closed: false,
        })
    }
}

/// Convenience for building a gain from ascending coefficient slices.
pub fn gain(num: &[f64], den: &[f64]) -> RationalFn {
    RationalFn::new(Poly::new(num.to_vec()), Poly::new(den.to_vec()))
        .expect("nonzero denominator")
}

#[cfg(test)]
mod tests {
    use super::*;

    const CASCADE: &str = r#"{
        "nodes": [{"id": 1, "label": "in"}, {"id": 2}, {"id": 3}, {"id": 4}, {"id": 5, "label": "out"}],
        "branches": [
            {"from": 1, "to": 2, "num": [1], "den": [1, 1]},
            {"from": 2, "to": 3, "num": [4, 1], "den": [2, 1]},
            {"from": 3, "to": 4, "num": [1], "den": [1], "symbols": ["V"]},
            {"from": 4, "to": 5, "num": [2]}
        ],
        "symbols": ["V"]
    }"#;

    #[test]
    fn parse_minimal() {
        let g = parse_graph(
            r#"{"nodes":[{"id":1},{"id":2}],"branches":[{"from":1,"to":2,"num":[1],"den":[1]}]}"#,
        )
        .unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.branches().len(), 1);
        assert_eq!((g.input(), g.output()), (1, 2));
        assert!(!g.is_closed());
    }

    #[test]
    fn parse_cascade_detects_terminals_and_symbols() {
        let g = parse_graph(CASCADE).unwrap();
        assert_eq!(g.node_count(), 5);
        assert_eq!((g.input(), g.output()), (1, 5));
        assert_eq!(g.label(1), Some("in"));
        assert_eq!(g.branches()[1].gain, gain(&[4.0, 1.0], &[2.0, 1.0]));
        assert_eq!(g.branches()[2].symbols, vec![SymbolId::new("V").unwrap()]);
        assert_eq!(g.symbols().count(), 1);
    }

    #[test]
    fn parse_errors() {
        let unknown = r#"{"nodes":[{"id":1}],"branches":[{"from":1,"to":9,"num":[1]}]}"#;
        let err = parse_graph(unknown).unwrap_err();
        assert_eq!(err, GraphError::UnknownNode { branch: 0, node: 9 });
        assert!(err.to_string().contains("unknown node"));

        let dup = r#"{"nodes":[{"id":1},{"id":1}],"branches":[]}"#;
        assert_eq!(parse_graph(dup).unwrap_err(), GraphError::DuplicateNode(1));

        let ambiguous = r#"{"nodes":[{"id":1},{"id":2},{"id":3}],
            "branches":[{"from":1,"to":3,"num":[1]},{"from":2,"to":3,"num":[1]}]}"#;
        assert_eq!(
            parse_graph(ambiguous).unwrap_err(),
            GraphError::AmbiguousTerminal("input")
        );
        let fixed = ambiguous.replacen("\"branches\"", "\"input\": 2, \"branches\"", 1);
        assert_eq!(parse_graph(&fixed).unwrap().input(), 2);

        let reserved = r#"{"nodes":[{"id":1},{"id":2}],
            "branches":[{"from":1,"to":2,"num":[1],"symbols":["1/G"]}]}"#;
        assert_eq!(parse_graph(reserved).unwrap_err(), GraphError::ReservedSymbol);

        let undeclared = r#"{"nodes":[{"id":1},{"id":2}],"symbols":["V"],
            "branches":[{"from":1,"to":2,"num":[1],"symbols":["W"]}]}"#;
        assert!(matches!(
            parse_graph(undeclared),
            Err(GraphError::UndeclaredSymbol { branch: 0, .. })
        ));

        let zero_den = r#"{"nodes":[{"id":1},{"id":2}],
            "branches":[{"from":1,"to":2,"num":[1],"den":[0]}]}"#;
        assert!(matches!(parse_graph(zero_den), Err(GraphError::BadGain { branch: 0, .. })));

        assert!(matches!(parse_graph("{nodes"), Err(GraphError::Syntax(_))));
    }

    #[test]
    fn sidecar_keys_are_ignored() {
        let with_layout = CASCADE.replacen(
            "\"symbols\": [\"V\"]\n    }",
            "\"symbols\": [\"V\"], \"layout\": {\"1\": [10, 20]}\n    }",
            1,
        );
        assert_ne!(with_layout, CASCADE);
        assert_eq!(parse_graph(&with_layout).unwrap(), parse_graph(CASCADE).unwrap());
    }

    #[test]
    fn serialize_round_trip_on_canonical_form() {
        let text = parse_graph(CASCADE).unwrap().to_json().unwrap();
        let again = parse_graph(&text).unwrap().to_json().unwrap();
        assert_eq!(text, again);
    }

    #[test]
    fn parallel_branches_are_split_gain_first() {
        let a = gain(&[2.0], &[1.0]);
        let b = gain(&[3.0], &[1.0, 1.0]);
        let mut g = SfgGraph::new(1, 2);
        g.add_branch(1, 2, a.clone(), &[]).unwrap();
        g.add_branch(1, 2, b.clone(), &[]).unwrap();
        let h = g.insert_parallel_nodes();
        let triples: Vec<_> = h
            .branches()
            .iter()
            .map(|br| (br.from, br.to, br.gain.clone()))
            .collect();
        assert_eq!(
            triples,
            vec![(1, 2, a), (1, 3, b), (3, 2, RationalFn::one())]
        );
        assert!(h.structural_violations().is_empty());
    }

    #[test]
    fn no_parallels_is_identity() {
        let g = parse_graph(CASCADE).unwrap();
        assert_eq!(g.insert_parallel_nodes(), g);
        assert_eq!(g.augment_terminals(), g);
    }

    #[test]
    fn fresh_ids_go_above_the_maximum() {
        let mut g = SfgGraph::new(1, 7);
        g.add_branch(1, 7, RationalFn::one(), &[]).unwrap();
        g.add_branch(1, 7, RationalFn::constant(0.5), &[]).unwrap();
        g.add_node(3, None);
        let h = g.insert_parallel_nodes();
        assert!(h.has_node(8));
        assert_eq!(h.branches()[1].to, 8);
    }

    #[test]
    fn augmentation_cases() {
        let mut g = SfgGraph::new(2, 5);
        g.add_branch(2, 5, RationalFn::one(), &[]).unwrap();
        g.add_branch(5, 2, RationalFn::constant(-0.5), &[]).unwrap();
        let h = g.augment_terminals();
        assert_eq!(h.input(), 6);
        assert_eq!(h.output(), 7);
        assert!(h.branches().iter().any(|b| b.from == 6 && b.to == 2 && b.gain == RationalFn::one()));
        assert!(h.branches().iter().any(|b| b.from == 5 && b.to == 7));
        assert!(h.structural_violations().is_empty());

        let mut both = SfgGraph::new(1, 1);
        both.add_branch(1, 2, RationalFn::one(), &[]).unwrap();
        both.add_branch(2, 1, RationalFn::one(), &[]).unwrap();
        let h = both.augment_terminals();
        assert_eq!(h.node_count(), 4);
        assert_ne!(h.input(), h.output());
        assert!(h.structural_violations().is_empty());
    }

    #[test]
    fn close_adds_one_marker_branch() {
        let g = parse_graph(CASCADE).unwrap().preprocess();
        let c = g.close().unwrap();
        assert_eq!(c.branches().len(), 5);
        let last = c.branches().last().unwrap();
        assert_eq!((last.from, last.to), (5, 1));
        assert!(last.is_closure());
        assert!(c.is_closed());
        assert!(c.structural_violations().is_empty());
        assert_eq!(c.close().unwrap_err(), GraphError::AlreadyClosed);
        assert_eq!(c.close().unwrap_err().to_string(), "graph is already closed");
        assert_eq!(c.to_json().unwrap_err(), GraphError::Closed);
    }

    #[test]
    fn symbol_rules() {
        assert_eq!(SymbolId::new("1/G").unwrap_err(), GraphError::ReservedSymbol);
        assert!(SymbolId::new("a b").is_err());
        assert!(SymbolId::inv_g().is_inv_g());
        let v = SymbolId::new("V").unwrap();
        let mut g = SfgGraph::new(1, 2);
        assert!(matches!(
            g.add_branch(1, 2, RationalFn::one(), &[v.clone(), v]),
            Err(GraphError::RepeatedSymbol { .. })
        ));
    }
}
