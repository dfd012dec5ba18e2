//! k-shell (core number) decomposition.
//!
//! [`decompose`] is the bucket-queue peeling of Batagelj and Zaversnik,
//! linear in `|V| + |E|`. [`Decomposer`] keeps its buffers between calls
//! for loops that decompose many near-identical graphs. [`naive_shells`]
//! is a direct, slow transcription of the pruning definition and exists
//! to cross-check the fast path.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::graph::{Graph, NodeId};

/// Core number of every node, indexed by dense node id.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ShellIndex(Vec<u32>);

impl ShellIndex {
    pub fn from_vec(shells: Vec<u32>) -> Self {
        ShellIndex(shells)
    }

    pub fn get(&self, v: NodeId) -> u32 {
        self.0[v.index()]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Degeneracy of the graph; 0 for an empty graph.
    pub fn max_shell(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn histogram(&self) -> ShellHistogram {
        shell_histogram(self)
    }

    /// Nodes with shell `>= k`, i.e. the k-core.
    pub fn core_members(&self, k: u32) -> Vec<NodeId> {
        self.0
            .iter()
            .enumerate()
            .filter(|&(_, &s)| s >= k)
            .map(|(i, _)| NodeId::from(i))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShellHistogram {
    pub counts: BTreeMap<u32, usize>,
    pub total: usize,
}

impl ShellHistogram {
    pub fn fraction(&self, k: u32) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.counts.get(&k).copied().unwrap_or(0) as f64 / self.total as f64
    }

    pub fn fractions(&self) -> BTreeMap<u32, f64> {
        self.counts.keys().map(|&k| (k, self.fraction(k))).collect()
    }
}

pub fn shell_histogram(idx: &ShellIndex) -> ShellHistogram {
    let mut counts = BTreeMap::new();
    for &k in idx.as_slice() {
        *counts.entry(k).or_insert(0) += 1;
    }
    ShellHistogram {
        counts,
        total: idx.len(),
    }
}

/// Computes the k-shell index of every node.
pub fn decompose(g: &Graph) -> ShellIndex {
    let mut d = Decomposer::default();
    let mut out = Vec::new();
    d.decompose_into(g, &mut out);
    ShellIndex(out)
}

/// Reusable workspace for the bucket-queue decomposition.
#[derive(Debug, Default, Clone)]
pub struct Decomposer {
    degree: Vec<u32>,
    bin: Vec<u32>,
    pos: Vec<u32>,
    order: Vec<u32>,
}

impl Decomposer {
    pub fn decompose(&mut self, g: &Graph) -> ShellIndex {
        let mut out = Vec::new();
        self.decompose_into(g, &mut out);
        ShellIndex(out)
    }

    /// Writes core numbers into `out`, resizing it to `g.node_count()`.
    pub fn decompose_into(&mut self, g: &Graph, out: &mut Vec<u32>) {
        let n = g.node_count();
        out.clear();
        if n == 0 {
            return;
        }

        let degree = &mut self.degree;
        degree.clear();
        degree.extend(g.nodes().map(|v| g.degree(v) as u32));
        let max_deg = degree.iter().copied().max().unwrap_or(0) as usize;

        // bin[d] = start offset of degree-d block in `order`
        let bin = &mut self.bin;
        bin.clear();
        bin.resize(max_deg + 1, 0);
        for &d in degree.iter() {
            bin[d as usize] += 1;
        }
        let mut start = 0u32;
        for b in bin.iter_mut() {
            let count = *b;
            *b = start;
            start += count;
        }

        let pos = &mut self.pos;
        let order = &mut self.order;
        pos.clear();
        pos.resize(n, 0);
        order.clear();
        order.resize(n, 0);
        for v in 0..n {
            let d = degree[v] as usize;
            pos[v] = bin[d];
            order[bin[d] as usize] = v as u32;
            bin[d] += 1;
        }
        for d in (1..=max_deg).rev() {
            bin[d] = bin[d - 1];
        }
        bin[0] = 0;

        for i in 0..n {
            let v = order[i] as usize;
            let dv = degree[v];
            for &u in g.neighbors(NodeId::from(v)) {
                let u = u.index();
                let du = degree[u];
                if du > dv {
                    // swap u with the first node of its bin, then shrink the bin
                    let pu = pos[u];
                    let pw = bin[du as usize];
                    let w = order[pw as usize] as usize;
                    if u != w {
                        pos[u] = pw;
                        order[pu as usize] = w as u32;
                        pos[w] = pu;
                        order[pw as usize] = u as u32;
                    }
                    bin[du as usize] += 1;
                    degree[u] = du - 1;
                }
            }
        }

        out.extend_from_slice(degree);
    }
}

/// Reference decomposition by repeated pruning.
///
/// For `k = 1, 2, ...`, repeatedly deletes every surviving node whose
/// surviving degree is below `k`; nodes deleted in pass `k` get shell
/// `k - 1`. Quadratic or worse; use only for verification.
pub fn naive_shells(g: &Graph) -> ShellIndex {
    let n = g.node_count();
    let mut alive = vec![true; n];
    let mut shell = vec![0u32; n];
    let mut remaining = n;
    let mut k = 1u32;
    while remaining > 0 {
        loop {
            let doomed: Vec<usize> = (0..n)
                .filter(|&v| alive[v])
                .filter(|&v| {
                    let live_deg = g
                        .neighbors(NodeId::from(v))
                        .iter()
                        .filter(|u| alive[u.index()])
                        .count();
                    (live_deg as u32) < k
                })
                .collect();
            if doomed.is_empty() {
                break;
            }
            for v in doomed {
                alive[v] = false;
                shell[v] = k - 1;
                remaining -= 1;
            }
        }
        k += 1;
    }
    ShellIndex(shell)
}
