//! Undirected simple graphs with dense node ids.
//!
//! Nodes are numbered `0..n` in order of first appearance in the input and
//! keep their original label in a side table. Neighbor lists are kept
//! sorted so `has_edge` is a binary search; a flat edge vector with a
//! position index supports uniform edge sampling and O(1) removal.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for NodeId {
    fn from(v: usize) -> Self {
        NodeId(v as u32)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An unordered pair of distinct nodes, stored as `(min, max)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    lo: NodeId,
    hi: NodeId,
}

impl Edge {
    pub fn new(u: NodeId, v: NodeId) -> Result<Self> {
        match u.cmp(&v) {
            std::cmp::Ordering::Less => Ok(Edge { lo: u, hi: v }),
            std::cmp::Ordering::Greater => Ok(Edge { lo: v, hi: u }),
            std::cmp::Ordering::Equal => Err(Error::SelfLoopEdge(u)),
        }
    }

    /// Shorthand for tests and fixtures. Panics on a self-loop.
    pub fn of(u: usize, v: usize) -> Self {
        Edge::new(u.into(), v.into()).expect("self-loop edge")
    }

    pub fn lo(self) -> NodeId {
        self.lo
    }

    pub fn hi(self) -> NodeId {
        self.hi
    }

    pub fn endpoints(self) -> (NodeId, NodeId) {
        (self.lo, self.hi)
    }

    pub fn touches(self, v: NodeId) -> bool {
        self.lo == v || self.hi == v
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

#[derive(Debug, Clone)]
pub struct Graph {
    adjacency: Vec<Vec<NodeId>>,
    edges: Vec<Edge>,
    slot: HashMap<Edge, usize>,
    labels: Vec<String>,
    label_index: HashMap<String, NodeId>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels && self.adjacency == other.adjacency
    }
}

impl Eq for Graph {}

impl Graph {
    /// `n` isolated nodes labelled `"0"..n`.
    pub fn with_nodes(n: usize) -> Self {
        let labels: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        Self::with_labels(labels)
    }

    fn with_labels(labels: Vec<String>) -> Self {
        let label_index = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), NodeId::from(i)))
            .collect();
        Graph {
            adjacency: vec![Vec::new(); labels.len()],
            edges: Vec::new(),
            slot: HashMap::new(),
            labels,
            label_index,
        }
    }

    /// Builds a graph on `n` nodes from index pairs. Duplicates are merged.
    pub fn from_edges(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::with_nodes(n);
        for &(u, v) in pairs {
            let e = Edge::new(g.check(u.into())?, g.check(v.into())?)?;
            if !g.contains(e) {
                g.insert_unchecked(e);
            }
        }
        Ok(g)
    }

    /// Parses a whitespace-separated edge list.
    ///
    /// Lines starting with `#` or `%` and blank lines are skipped. Extra
    /// columns after the two labels (weights, timestamps) are ignored.
    /// Labels get dense ids by first appearance.
    pub fn parse_edge_list<R: BufRead>(reader: R) -> Result<Self> {
        let mut labels: Vec<String> = Vec::new();
        let mut index: HashMap<String, NodeId> = HashMap::new();
        let mut pairs: Vec<(NodeId, NodeId)> = Vec::new();

        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = lineno + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
                continue;
            }
            let mut tokens = trimmed.split_whitespace();
            let (Some(a), Some(b)) = (tokens.next(), tokens.next()) else {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected two node labels, got {trimmed:?}"),
                });
            };
            if a == b {
                return Err(Error::SelfLoop {
                    line: lineno,
                    label: a.to_string(),
                });
            }
            let mut intern = |label: &str| -> NodeId {
                *index.entry(label.to_string()).or_insert_with(|| {
                    labels.push(label.to_string());
                    NodeId::from(labels.len() - 1)
                })
            };
            let u = intern(a);
            let v = intern(b);
            pairs.push((u, v));
        }

        let mut g = Graph::with_labels(labels);
        for (u, v) in pairs {
            let e = Edge::new(u, v)?;
            if !g.contains(e) {
                g.insert_unchecked(e);
            }
        }
        Ok(g)
    }

    pub fn parse_str(text: &str) -> Result<Self> {
        Self::parse_edge_list(text.as_bytes())
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.node_count()).map(NodeId::from)
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adjacency[v.index()].len()
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adjacency[v.index()]
    }

    pub fn label(&self, v: NodeId) -> &str {
        &self.labels[v.index()]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn node_by_label(&self, label: &str) -> Option<NodeId> {
        self.label_index.get(label).copied()
    }

    /// Edges in internal storage order. The order changes as edges are
    /// removed and added but is fully determined by the mutation history.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_at(&self, i: usize) -> Edge {
        self.edges[i]
    }

    pub fn sorted_edges(&self) -> Vec<Edge> {
        let mut out = self.edges.clone();
        out.sort_unstable();
        out
    }

    pub fn edge_set(&self) -> BTreeSet<Edge> {
        self.edges.iter().copied().collect()
    }

    fn check(&self, v: NodeId) -> Result<NodeId> {
        if v.index() < self.node_count() {
            Ok(v)
        } else {
            Err(Error::NodeOutOfRange {
                node: v,
                node_count: self.node_count(),
            })
        }
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> Result<bool> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Ok(false);
        }
        Ok(self.adjacent(u, v))
    }

    /// Unchecked adjacency test; ids must be in range.
    #[inline]
    pub fn adjacent(&self, u: NodeId, v: NodeId) -> bool {
        let (a, b) = if self.degree(u) <= self.degree(v) {
            (u, v)
        } else {
            (v, u)
        };
        self.adjacency[a.index()].binary_search(&b).is_ok()
    }

    #[inline]
    pub fn contains(&self, e: Edge) -> bool {
        e.hi.index() < self.node_count() && self.adjacent(e.lo, e.hi)
    }

    pub fn add_edge(&mut self, e: Edge) -> Result<()> {
        self.check(e.hi)?;
        if self.contains(e) {
            return Err(Error::EdgePresent(e));
        }
        self.insert_unchecked(e);
        Ok(())
    }

    pub fn remove_edge(&mut self, e: Edge) -> Result<()> {
        self.check(e.hi)?;
        let Some(pos) = self.slot.remove(&e) else {
            return Err(Error::EdgeAbsent(e));
        };
        self.edges.swap_remove(pos);
        if let Some(&moved) = self.edges.get(pos) {
            self.slot.insert(moved, pos);
        }
        for (a, b) in [(e.lo, e.hi), (e.hi, e.lo)] {
            let list = &mut self.adjacency[a.index()];
            let at = list.binary_search(&b).expect("adjacency out of sync");
            list.remove(at);
        }
        Ok(())
    }

    fn insert_unchecked(&mut self, e: Edge) {
        self.slot.insert(e, self.edges.len());
        self.edges.push(e);
        for (a, b) in [(e.lo, e.hi), (e.hi, e.lo)] {
            let list = &mut self.adjacency[a.index()];
            let at = list.binary_search(&b).unwrap_err();
            list.insert(at, b);
        }
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    /// Node degrees as a sorted multiset.
    pub fn degree_sequence(&self) -> Vec<usize> {
        let mut d = self.degrees();
        d.sort_unstable();
        d
    }

    /// Writes dense ids, one edge per line, sorted by `(min, max)`.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        for e in self.sorted_edges() {
            writeln!(w, "{} {}", e.lo, e.hi)?;
        }
        Ok(())
    }

    /// Same ordering as [`Graph::write_edge_list`] but with original labels,
    /// so the file can be aligned back onto the source graph.
    pub fn write_labeled_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        for e in self.sorted_edges() {
            writeln!(w, "{} {}", self.label(e.lo), self.label(e.hi))?;
        }
        Ok(())
    }

    pub fn to_edge_list_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_edge_list(&mut buf).expect("writing to a Vec");
        String::from_utf8(buf).expect("ascii ids")
    }

    /// Re-expresses this graph in `reference`'s node ids by matching labels.
    ///
    /// Every label here must exist in `reference`. Nodes of `reference` that
    /// do not appear here become isolated.
    pub fn align_to(&self, reference: &Graph) -> Result<Graph> {
        let mut map = Vec::with_capacity(self.node_count());
        for label in &self.labels {
            let id = reference
                .node_by_label(label)
                .ok_or_else(|| Error::UnknownLabel(label.clone()))?;
            map.push(id);
        }
        let mut g = Graph::with_labels(reference.labels.clone());
        for e in self.sorted_edges() {
            let aligned = Edge::new(map[e.lo.index()], map[e.hi.index()])?;
            g.add_edge(aligned)?;
        }
        Ok(g)
    }

    /// Relabels node ids through `perm` (old id -> new id). Labels travel
    /// with their nodes.
    pub fn permuted(&self, perm: &[usize]) -> Result<Graph> {
        let n = self.node_count();
        if perm.len() != n {
            return Err(Error::NodeCountMismatch {
                left: n,
                right: perm.len(),
            });
        }
        let mut labels = vec![String::new(); n];
        for (old, &new) in perm.iter().enumerate() {
            labels[new] = self.labels[old].clone();
        }
        let mut g = Graph::with_labels(labels);
        for e in self.sorted_edges() {
            g.add_edge(Edge::new(
                perm[e.lo.index()].into(),
                perm[e.hi.index()].into(),
            )?)?;
        }
        Ok(g)
    }

    /// Debug check that adjacency, edge vector and slot index agree.
    pub fn is_consistent(&self) -> bool {
        let adj_total: usize = self.adjacency.iter().map(Vec::len).sum();
        if adj_total != 2 * self.edges.len() || self.slot.len() != self.edges.len() {
            return false;
        }
        let sorted = self
            .adjacency
            .iter()
            .all(|l| l.windows(2).all(|w| w[0] < w[1]));
        sorted
            && self
                .edges
                .iter()
                .enumerate()
                .all(|(i, e)| self.slot.get(e) == Some(&i) && self.adjacent(e.lo, e.hi))
    }
}
