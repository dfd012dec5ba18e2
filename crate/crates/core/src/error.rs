use thiserror::Error;

use crate::attack::AttackResult;
use crate::graph::{Edge, NodeId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: self-loop on node {label:?}")]
    SelfLoop { line: usize, label: String },

    #[error("node {node} out of range for graph with {node_count} nodes")]
    NodeOutOfRange { node: NodeId, node_count: usize },

    #[error("edge {0} would be a self-loop")]
    SelfLoopEdge(NodeId),

    #[error("edge {0} is already present")]
    EdgePresent(Edge),

    #[error("edge {0} is not present")]
    EdgeAbsent(Edge),

    #[error("rewiring needs two distinct edges, got {0} twice")]
    SameEdge(Edge),

    #[error("rewiring needs at least two edges, graph has {0}")]
    TooFewEdges(usize),

    #[error("move no longer applies to the graph: {0}")]
    StaleMove(String),

    #[error("shell indices cover {left} and {right} nodes")]
    NodeCountMismatch { left: usize, right: usize },

    #[error("original graph has {original} edges, adversarial graph has {adversarial}")]
    EdgeCountMismatch { original: usize, adversarial: usize },

    #[error("label {0:?} does not exist in the reference graph")]
    UnknownLabel(String),

    #[error("invalid attack configuration: {0}")]
    InvalidConfig(String),

    #[error("round {round}: no feasible rewiring found within {budget} draws")]
    Stuck {
        round: usize,
        budget: u32,
        partial: Box<AttackResult>,
    },

    #[error("dataset {name}: expected {expected}, found {found}")]
    VersionMismatch {
        name: String,
        expected: String,
        found: String,
    },

    #[error("dataset {name}: file {path} not found")]
    DatasetMissing { name: String, path: String },

    #[error("unknown dataset {0:?}")]
    UnknownDataset(String),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Config(#[from] toml::de::Error),
}
