//! Robustness of k-shell structure under degree-preserving link rewiring.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`]: undirected simple graphs and edge-list I/O
//! * [`kshell`]: core-number decomposition (fast and reference)
//! * [`rewiring`]: Case I / Case II two-link rewiring and the edit log
//! * [`metrics`]: ASR, LCR and LPN
//! * [`attack`]: random, heuristic and simulated-annealing attacks
//! * [`harness`]: dataset registry, sweeps and CSV / JSON output

pub mod attack;
pub mod error;
pub mod graph;
pub mod harness;
pub mod kshell;
pub mod metrics;
pub mod rewiring;

pub use attack::{run_attack, AnnealMode, AttackConfig, AttackResult, Strategy};
pub use error::{Error, Result};
pub use graph::{Edge, Graph, NodeId};
pub use kshell::{decompose, ShellHistogram, ShellIndex};
pub use metrics::MetricReport;
pub use rewiring::{BothCasesPolicy, CaseTag, EditLog, RewiringMove};
