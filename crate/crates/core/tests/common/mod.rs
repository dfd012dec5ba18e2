#![allow(dead_code)]

use kshell_core::kshell::decompose;
use kshell_core::metrics::changed_nodes;
use kshell_core::rewiring::{case_holds, CaseTag};
use kshell_core::{Edge, Graph, NodeId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded G(n, p).
pub fn gnp(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                pairs.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &pairs).unwrap()
}

/// Seeded G(n, m): `m` distinct links drawn uniformly.
pub fn gnm(n: usize, m: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Graph::with_nodes(n);
    let m = m.min(n * (n - 1) / 2);
    while g.edge_count() < m {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u != v && !g.contains(Edge::of(u, v)) {
            g.add_edge(Edge::of(u, v)).unwrap();
        }
    }
    g
}

/// Best ASR reachable with one rewiring, by trying every ordered pair of
/// links under both cases.
pub fn best_single_rewiring_asr(g: &Graph) -> Option<f64> {
    let shells = decompose(g);
    let edges = g.sorted_edges();
    let mut best: Option<f64> = None;
    for (a, e1) in edges.iter().enumerate() {
        for e2 in &edges[a + 1..] {
            let first = e1.endpoints();
            let (u, v): (NodeId, NodeId) = e2.endpoints();
            for second in [(u, v), (v, u)] {
                for tag in [CaseTag::CaseI, CaseTag::CaseII] {
                    if !case_holds(g, first, second, tag) {
                        continue;
                    }
                    let mv = kshell_core::rewiring::validate_move(g, first, second, tag).unwrap();
                    let mut h = g.clone();
                    mv.apply_to(&mut h).unwrap();
                    let asr = changed_nodes(&shells, &decompose(&h)).unwrap() as f64
                        / g.node_count() as f64;
                    best = Some(best.map_or(asr, |b: f64| b.max(asr)));
                }
            }
        }
    }
    best
}
