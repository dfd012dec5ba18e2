//! Attack success rate, link change rate and links per node.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::kshell::ShellIndex;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub asr: f64,
    pub lcr: f64,
    /// `None` when no node changed shell.
    pub lpn: Option<f64>,
    pub changed_nodes: usize,
    pub changed_links: usize,
}

impl MetricReport {
    pub fn from_counts(
        changed_nodes: usize,
        node_count: usize,
        changed_links: usize,
        edge_count: usize,
    ) -> Self {
        MetricReport {
            asr: ratio(changed_nodes, node_count),
            lcr: ratio(changed_links, edge_count),
            lpn: link_per_node(changed_links, changed_nodes),
            changed_nodes,
            changed_links,
        }
    }

    /// Compares `adversarial` against `original`, whose shell index the
    /// caller already has.
    pub fn evaluate(
        original: &Graph,
        original_shells: &ShellIndex,
        adversarial: &Graph,
        adversarial_shells: &ShellIndex,
    ) -> Result<Self> {
        let nodes = changed_nodes(original_shells, adversarial_shells)?;
        let links = changed_links(original, adversarial)?;
        Ok(Self::from_counts(
            nodes,
            original.node_count(),
            links,
            original.edge_count(),
        ))
    }

    /// CSV rendering of `lpn`; empty when undefined.
    pub fn lpn_field(&self) -> String {
        self.lpn.map(|v| v.to_string()).unwrap_or_default()
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Number of nodes whose shell differs, in either direction.
pub fn changed_nodes(before: &ShellIndex, after: &ShellIndex) -> Result<usize> {
    if before.len() != after.len() {
        return Err(Error::NodeCountMismatch {
            left: before.len(),
            right: after.len(),
        });
    }
    Ok(before
        .as_slice()
        .iter()
        .zip(after.as_slice())
        .filter(|(a, b)| a != b)
        .count())
}

pub fn attack_success_rate(before: &ShellIndex, after: &ShellIndex) -> Result<f64> {
    Ok(ratio(changed_nodes(before, after)?, before.len()))
}

/// Number of original links absent from `adversarial`.
pub fn changed_links(original: &Graph, adversarial: &Graph) -> Result<usize> {
    if original.node_count() != adversarial.node_count() {
        return Err(Error::NodeCountMismatch {
            left: original.node_count(),
            right: adversarial.node_count(),
        });
    }
    if original.edge_count() != adversarial.edge_count() {
        return Err(Error::EdgeCountMismatch {
            original: original.edge_count(),
            adversarial: adversarial.edge_count(),
        });
    }
    Ok(original
        .edges()
        .iter()
        .filter(|&&e| !adversarial.contains(e))
        .count())
}

pub fn link_change_rate(original: &Graph, adversarial: &Graph) -> Result<f64> {
    Ok(ratio(
        changed_links(original, adversarial)?,
        original.edge_count(),
    ))
}

pub fn link_per_node(changed_links: usize, changed_nodes: usize) -> Option<f64> {
    (changed_nodes > 0).then(|| changed_links as f64 / changed_nodes as f64)
}
