//! Degree-preserving two-link rewiring.
//!
//! Two links `(i, j)` and `(u, v)` are released and replaced either by
//! `(i, v), (j, u)` (Case I) or by `(i, u), (j, v)` (Case II). A case is
//! feasible when both new links are absent and neither is a self-loop.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseTag {
    CaseI,
    CaseII,
}

/// What to do when a link pair satisfies both cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BothCasesPolicy {
    #[default]
    #[serde(rename = "prefer-1")]
    PreferCaseI,
    #[serde(rename = "prefer-2")]
    PreferCaseII,
    Random,
    /// Accept a case only when the other one fails.
    #[serde(rename = "reject")]
    RejectLiteral,
}

impl FromStr for BothCasesPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prefer-1" | "prefer-case-1" => Ok(Self::PreferCaseI),
            "prefer-2" | "prefer-case-2" => Ok(Self::PreferCaseII),
            "random" => Ok(Self::Random),
            "reject" | "reject-literal" => Ok(Self::RejectLiteral),
            other => Err(Error::InvalidConfig(format!(
                "unknown both-cases policy {other:?} (expected prefer-1, prefer-2, random or reject)"
            ))),
        }
    }
}

impl fmt::Display for BothCasesPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::PreferCaseI => "prefer-1",
            Self::PreferCaseII => "prefer-2",
            Self::Random => "random",
            Self::RejectLiteral => "reject",
        })
    }
}

/// An oriented link `(i, j)` as selected for rewiring.
pub type Link = (NodeId, NodeId);

/// A validated rewiring of links `(i, j)` and `(u, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RewiringMove {
    first: Link,
    second: Link,
    tag: CaseTag,
}

impl RewiringMove {
    pub fn tag(&self) -> CaseTag {
        self.tag
    }

    pub fn links(&self) -> (Link, Link) {
        (self.first, self.second)
    }

    pub fn removed(&self) -> [Edge; 2] {
        let ((i, j), (u, v)) = (self.first, self.second);
        [edge(i, j), edge(u, v)]
    }

    pub fn added(&self) -> [Edge; 2] {
        let ((i, j), (u, v)) = (self.first, self.second);
        match self.tag {
            CaseTag::CaseI => [edge(i, v), edge(j, u)],
            CaseTag::CaseII => [edge(i, u), edge(j, v)],
        }
    }

    /// The move that undoes this one, expressed as a Case I rewiring of the
    /// two added links.
    pub fn inverse(&self) -> RewiringMove {
        let ((i, j), (u, v)) = (self.first, self.second);
        // Case I on (a, b), (c, d) adds (a, d), (b, c).
        let (first, second) = match self.tag {
            CaseTag::CaseI => ((i, v), (u, j)),
            CaseTag::CaseII => ((i, u), (v, j)),
        };
        RewiringMove {
            first,
            second,
            tag: CaseTag::CaseI,
        }
    }

    /// Mutates `g` without touching any edit log. Fails without modifying
    /// `g` if the move no longer fits it.
    pub fn apply_to(&self, g: &mut Graph) -> Result<()> {
        let removed = self.removed();
        let added = self.added();
        for e in removed {
            if !g.contains(e) {
                return Err(Error::StaleMove(format!("link {e} is gone")));
            }
        }
        for e in added {
            if g.contains(e) {
                return Err(Error::StaleMove(format!("link {e} already exists")));
            }
        }
        for e in removed {
            g.remove_edge(e)?;
        }
        for e in added {
            g.add_edge(e)?;
        }
        Ok(())
    }

    /// Undoes a previous [`RewiringMove::apply_to`].
    pub fn revert_on(&self, g: &mut Graph) -> Result<()> {
        self.inverse().apply_to(g)
    }
}

fn edge(a: NodeId, b: NodeId) -> Edge {
    Edge::new(a, b).expect("validated rewiring never creates a self-loop")
}

/// Whether `tag` is feasible for links `(i, j)` and `(u, v)` on `g`.
pub fn case_holds(g: &Graph, first: Link, second: Link, tag: CaseTag) -> bool {
    let ((i, j), (u, v)) = (first, second);
    let (a, b) = match tag {
        CaseTag::CaseI => ((i, v), (j, u)),
        CaseTag::CaseII => ((i, u), (j, v)),
    };
    a.0 != a.1 && b.0 != b.1 && !g.adjacent(a.0, a.1) && !g.adjacent(b.0, b.1)
}

fn check_links(g: &Graph, first: Link, second: Link) -> Result<()> {
    let e1 = Edge::new(first.0, first.1)?;
    let e2 = Edge::new(second.0, second.1)?;
    for e in [e1, e2] {
        if e.hi().index() >= g.node_count() {
            return Err(Error::NodeOutOfRange {
                node: e.hi(),
                node_count: g.node_count(),
            });
        }
        if !g.contains(e) {
            return Err(Error::EdgeAbsent(e));
        }
    }
    if e1 == e2 {
        return Err(Error::SameEdge(e1));
    }
    Ok(())
}

/// Decides which case, if any, applies to links `(i, j)` and `(u, v)`.
///
/// `rng` is consulted only under [`BothCasesPolicy::Random`] when both
/// cases hold.
pub fn judge_constraints<R: Rng + ?Sized>(
    g: &Graph,
    first: Link,
    second: Link,
    policy: BothCasesPolicy,
    rng: &mut R,
) -> Result<Option<CaseTag>> {
    check_links(g, first, second)?;
    let one = case_holds(g, first, second, CaseTag::CaseI);
    let two = case_holds(g, first, second, CaseTag::CaseII);
    Ok(match (one, two) {
        (false, false) => None,
        (true, false) => Some(CaseTag::CaseI),
        (false, true) => Some(CaseTag::CaseII),
        (true, true) => match policy {
            BothCasesPolicy::PreferCaseI => Some(CaseTag::CaseI),
            BothCasesPolicy::PreferCaseII => Some(CaseTag::CaseII),
            BothCasesPolicy::Random => Some(if rng.random_bool(0.5) {
                CaseTag::CaseI
            } else {
                CaseTag::CaseII
            }),
            BothCasesPolicy::RejectLiteral => None,
        },
    })
}

/// Builds a move for a specific case, failing if that case does not hold.
pub fn validate_move(g: &Graph, first: Link, second: Link, tag: CaseTag) -> Result<RewiringMove> {
    check_links(g, first, second)?;
    if !case_holds(g, first, second, tag) {
        return Err(Error::StaleMove(format!(
            "{tag:?} is not feasible for {first:?}, {second:?}"
        )));
    }
    Ok(RewiringMove { first, second, tag })
}

/// Judges a link pair and wraps the outcome as a move.
pub fn propose<R: Rng + ?Sized>(
    g: &Graph,
    first: Link,
    second: Link,
    policy: BothCasesPolicy,
    rng: &mut R,
) -> Result<Option<RewiringMove>> {
    Ok(
        judge_constraints(g, first, second, policy, rng)?.map(|tag| RewiringMove {
            first,
            second,
            tag,
        }),
    )
}

/// Orients `e2` by a coin flip so both cases are reachable under a
/// preference policy.
pub(crate) fn orient_pair<R: Rng + ?Sized>(e1: Edge, e2: Edge, rng: &mut R) -> (Link, Link) {
    let second = if rng.random_bool(0.5) {
        (e2.lo(), e2.hi())
    } else {
        (e2.hi(), e2.lo())
    };
    ((e1.lo(), e1.hi()), second)
}

/// Draws two distinct links uniformly at random and judges them.
///
/// Returns `Ok(None)` when the drawn pair is infeasible; callers retry.
pub fn random_feasible_move<R: Rng + ?Sized>(
    g: &Graph,
    policy: BothCasesPolicy,
    rng: &mut R,
) -> Result<Option<RewiringMove>> {
    let m = g.edge_count();
    if m < 2 {
        return Err(Error::TooFewEdges(m));
    }
    let a = rng.random_range(0..m);
    let mut b = rng.random_range(0..m - 1);
    if b >= a {
        b += 1;
    }
    let (first, second) = orient_pair(g.edge_at(a), g.edge_at(b), rng);
    propose(g, first, second, policy, rng)
}

/// Calls [`random_feasible_move`] up to `budget` times.
///
/// Returns the move and the number of draws it took, or `None` if the
/// budget ran out.
pub fn draw_feasible_move<R: Rng + ?Sized>(
    g: &Graph,
    policy: BothCasesPolicy,
    rng: &mut R,
    budget: u32,
) -> Result<Option<(RewiringMove, u32)>> {
    for draw in 1..=budget {
        if let Some(mv) = random_feasible_move(g, policy, rng)? {
            return Ok(Some((mv, draw)));
        }
    }
    Ok(None)
}

/// Net link changes relative to the original graph.
///
/// Edits cancel: re-adding an original link drops it from `removed`, and
/// removing a previously added link drops it from `added`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditLog {
    removed: BTreeSet<Edge>,
    added: BTreeSet<Edge>,
}

impl EditLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.removed.is_empty() && self.added.is_empty()
    }

    /// Original links no longer present.
    pub fn removed_original(&self) -> &BTreeSet<Edge> {
        &self.removed
    }

    /// Present links that were not in the original graph.
    pub fn added_foreign(&self) -> &BTreeSet<Edge> {
        &self.added
    }

    pub fn record(&mut self, mv: &RewiringMove) {
        for e in mv.removed() {
            if !self.added.remove(&e) {
                self.removed.insert(e);
            }
        }
        for e in mv.added() {
            if !self.removed.remove(&e) {
                self.added.insert(e);
            }
        }
    }

    /// `{"removed": [[a, b], ...], "added": [[a, b], ...]}` with node labels.
    pub fn to_json(&self, g: &Graph) -> serde_json::Value {
        let labelled = |set: &BTreeSet<Edge>| -> Vec<[String; 2]> {
            set.iter()
                .map(|e| [g.label(e.lo()).to_string(), g.label(e.hi()).to_string()])
                .collect()
        };
        serde_json::json!({
            "removed": labelled(&self.removed),
            "added": labelled(&self.added),
        })
    }
}

/// Applies `mv` to `g` and records it in `log`.
pub fn apply_move(g: &mut Graph, mv: &RewiringMove, log: &mut EditLog) -> Result<()> {
    mv.apply_to(g)?;
    log.record(mv);
    Ok(())
}
