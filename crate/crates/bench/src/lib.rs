//! Shared fixtures for the criterion benchmarks.

use kshell_core::Graph;

/// Seeded Erdős-Rényi graph `G(n, p)`. Isolated nodes are kept.
pub fn gnp(n: usize, p: f64, seed: u64) -> Graph {
    // splitmix64, so the fixture does not depend on any RNG crate version
    let mut state = seed;
    let mut next = move || {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        ((z ^ (z >> 31)) >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if next() < p {
                pairs.push((i, j));
            }
        }
    }
    Graph::from_edges(n, &pairs).expect("valid pairs")
}

pub fn karate() -> Graph {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/karate.txt");
    let text = std::fs::read_to_string(path).expect("vendored karate edge list");
    Graph::parse_str(&text).expect("karate parses")
}
