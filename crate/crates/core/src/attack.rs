//! Random, heuristic and simulated-annealing rewiring attacks.
//!
//! All three drivers share the select / judge / apply mechanism from
//! [`crate::rewiring`] and record a [`MetricReport`] after every round.
//! Attack success is always measured against the shells of the graph the
//! attack started from.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::kshell::{Decomposer, ShellIndex};
use crate::metrics::MetricReport;
use crate::rewiring::{
    apply_move, draw_feasible_move, orient_pair, propose, random_feasible_move, BothCasesPolicy,
    EditLog, RewiringMove,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "ra")]
    Random,
    #[serde(rename = "ha")]
    Heuristic,
    #[serde(rename = "sa")]
    Annealing,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Random, Strategy::Heuristic, Strategy::Annealing];

    pub fn short_name(self) -> &'static str {
        match self {
            Strategy::Random => "ra",
            Strategy::Heuristic => "ha",
            Strategy::Annealing => "sa",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ra" | "random" => Ok(Strategy::Random),
            "ha" | "heuristic" => Ok(Strategy::Heuristic),
            "sa" | "annealing" => Ok(Strategy::Annealing),
            other => Err(Error::InvalidConfig(format!(
                "unknown attack method {other:?}"
            ))),
        }
    }
}

/// How annealing candidates relate to each other within one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnnealMode {
    /// Every candidate is one rewiring away from the round's starting
    /// graph; the last accepted candidate becomes the next graph.
    #[default]
    Literal,
    /// Accepted candidates are kept and later candidates build on them.
    Compounding,
}

impl FromStr for AnnealMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(AnnealMode::Literal),
            "compounding" => Ok(AnnealMode::Compounding),
            other => Err(Error::InvalidConfig(format!(
                "unknown anneal mode {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AttackConfig {
    pub strategy: Strategy,
    pub rounds: usize,
    pub initial_temp: f64,
    pub terminate_temp: f64,
    pub seed: u64,
    pub both_cases: BothCasesPolicy,
    /// Fraction of links, by shell weight, that the heuristic attack draws
    /// from at each end of the ranking.
    pub ha_quantile: f64,
    /// Consecutive infeasible draws tolerated before a round is stuck.
    pub retry_budget: u32,
    pub anneal_mode: AnnealMode,
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            strategy: Strategy::Annealing,
            rounds: 1,
            initial_temp: 1.0,
            terminate_temp: 1e-6,
            seed: 0,
            both_cases: BothCasesPolicy::PreferCaseI,
            ha_quantile: 0.2,
            retry_budget: 1000,
            anneal_mode: AnnealMode::Literal,
        }
    }
}

impl AttackConfig {
    pub fn new(strategy: Strategy, rounds: usize, seed: u64) -> Self {
        AttackConfig {
            strategy,
            rounds,
            seed,
            ..Default::default()
        }
    }

    /// Rejects configurations no attack can run with. A terminate
    /// temperature at or above the initial one is allowed and makes every
    /// annealing round a no-op.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.rounds == 0 {
            return bad("rounds must be at least 1".into());
        }
        if !(self.initial_temp.is_finite() && self.initial_temp > 0.0) {
            return bad(format!(
                "initial temperature must be positive, got {}",
                self.initial_temp
            ));
        }
        if !(self.terminate_temp.is_finite() && self.terminate_temp > 0.0) {
            return bad(format!(
                "terminate temperature must be positive, got {}",
                self.terminate_temp
            ));
        }
        if !(self.ha_quantile > 0.0 && self.ha_quantile <= 1.0) {
            return bad(format!(
                "ha quantile must be in (0, 1], got {}",
                self.ha_quantile
            ));
        }
        if self.retry_budget == 0 {
            return bad("retry budget must be at least 1".into());
        }
        Ok(())
    }
}

/// Temperature and acceptance bookkeeping for one annealing loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealingState {
    pub tau: u32,
    pub temp: f64,
    pub asr_prev: f64,
    initial_temp: f64,
    factorial: f64,
}

impl AnnealingState {
    pub fn new(initial_temp: f64, asr0: f64) -> Self {
        AnnealingState {
            tau: 0,
            temp: initial_temp,
            asr_prev: asr0,
            initial_temp,
            factorial: 1.0,
        }
    }

    pub fn is_hot(&self, terminate_temp: f64) -> bool {
        self.temp > terminate_temp
    }

    /// Advances one step: `T_tau = T_{tau-1} / tau`, computed as `T / tau!`
    /// so that no rounding accumulates.
    pub fn cool(&mut self) {
        self.tau += 1;
        self.factorial *= self.tau as f64;
        self.temp = self.initial_temp / self.factorial;
    }

    pub fn acceptance_probability(&self, asr: f64) -> f64 {
        acceptance_probability(asr - self.asr_prev, self.temp)
    }

    /// Accepts strict improvements outright and anything else with the
    /// Metropolis probability. A rejected candidate leaves `asr_prev` as is.
    pub fn consider<R: Rng + ?Sized>(&mut self, asr: f64, rng: &mut R) -> bool {
        let accept = asr > self.asr_prev || rng.random::<f64>() < self.acceptance_probability(asr);
        if accept {
            self.asr_prev = asr;
        }
        accept
    }
}

/// `exp(-|delta| / temp)`.
pub fn acceptance_probability(delta_asr: f64, temp: f64) -> f64 {
    (-delta_asr.abs() / temp).exp()
}

/// Temperature after `tau` cooling steps from `initial`, i.e. `initial / tau!`.
pub fn cooled_temperature(initial: f64, tau: u32) -> f64 {
    let mut state = AnnealingState::new(initial, 0.0);
    for _ in 0..tau {
        state.cool();
    }
    state.temp
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackResult {
    pub final_graph: Graph,
    pub edit_log: EditLog,
    /// One report per completed round.
    pub trajectory: Vec<MetricReport>,
    pub config: AttackConfig,
    /// Moves that were kept, grouped by round.
    pub moves: Vec<Vec<RewiringMove>>,
    pub accepted_moves: usize,
    /// Feasible candidates considered.
    pub proposed_moves: usize,
    pub original_shells: ShellIndex,
    pub final_shells: ShellIndex,
}

impl AttackResult {
    pub fn rounds_completed(&self) -> usize {
        self.trajectory.len()
    }

    /// Metrics after the last completed round, or all-zero if none ran.
    pub fn report(&self) -> MetricReport {
        self.trajectory.last().copied().unwrap_or(MetricReport {
            asr: 0.0,
            lcr: 0.0,
            lpn: None,
            changed_nodes: 0,
            changed_links: 0,
        })
    }

    /// `round,asr,lcr,lpn,changed_nodes,changed_links` per round.
    pub fn write_trajectory_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "round",
            "asr",
            "lcr",
            "lpn",
            "changed_nodes",
            "changed_links",
        ])?;
        for (i, r) in self.trajectory.iter().enumerate() {
            out.write_record([
                (i + 1).to_string(),
                r.asr.to_string(),
                r.lcr.to_string(),
                r.lpn_field(),
                r.changed_nodes.to_string(),
                r.changed_links.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Runs the strategy named in `cfg`.
pub fn run_attack(g: &Graph, cfg: &AttackConfig) -> Result<AttackResult> {
    match cfg.strategy {
        Strategy::Random => attack_random(g, cfg),
        Strategy::Heuristic => attack_heuristic(g, cfg),
        Strategy::Annealing => attack_sa(g, cfg),
    }
}

struct Run<'a> {
    original: &'a Graph,
    cfg: &'a AttackConfig,
    original_shells: ShellIndex,
    graph: Graph,
    log: EditLog,
    trajectory: Vec<MetricReport>,
    moves: Vec<Vec<RewiringMove>>,
    accepted: usize,
    proposed: usize,
    decomposer: Decomposer,
    scratch: Vec<u32>,
    rng: ChaCha8Rng,
}

impl<'a> Run<'a> {
    fn start(g: &'a Graph, cfg: &'a AttackConfig, expected: Strategy) -> Result<Self> {
        cfg.validate()?;
        if cfg.strategy != expected {
            return Err(Error::InvalidConfig(format!(
                "config names strategy {} but {} was invoked",
                cfg.strategy, expected
            )));
        }
        if g.edge_count() < 2 {
            return Err(Error::TooFewEdges(g.edge_count()));
        }
        let mut decomposer = Decomposer::default();
        let original_shells = decomposer.decompose(g);
        Ok(Run {
            original: g,
            cfg,
            original_shells,
            graph: g.clone(),
            log: EditLog::new(),
            trajectory: Vec::with_capacity(cfg.rounds),
            moves: Vec::with_capacity(cfg.rounds),
            accepted: 0,
            proposed: 0,
            decomposer,
            scratch: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        })
    }

    /// ASR of the working graph against the original shells.
    fn current_asr(&mut self) -> f64 {
        self.decomposer
            .decompose_into(&self.graph, &mut self.scratch);
        let changed = self
            .scratch
            .iter()
            .zip(self.original_shells.as_slice())
            .filter(|(a, b)| a != b)
            .count();
        changed as f64 / self.graph.node_count() as f64
    }

    fn keep(&mut self, mv: RewiringMove) -> Result<()> {
        apply_move(&mut self.graph, &mv, &mut self.log)?;
        self.accepted += 1;
        Ok(())
    }

    fn end_round(&mut self, kept: Vec<RewiringMove>) -> Result<()> {
        let shells = self.decomposer.decompose(&self.graph);
        let report =
            MetricReport::evaluate(self.original, &self.original_shells, &self.graph, &shells)?;
        self.trajectory.push(report);
        self.moves.push(kept);
        Ok(())
    }

    fn stuck(self, round: usize) -> Error {
        let budget = self.cfg.retry_budget;
        Error::Stuck {
            round,
            budget,
            partial: Box::new(self.finish()),
        }
    }

    fn finish(mut self) -> AttackResult {
        let final_shells = self.decomposer.decompose(&self.graph);
        AttackResult {
            final_graph: self.graph,
            edit_log: self.log,
            trajectory: self.trajectory,
            config: self.cfg.clone(),
            moves: self.moves,
            accepted_moves: self.accepted,
            proposed_moves: self.proposed,
            original_shells: self.original_shells,
            final_shells,
        }
    }
}

/// Applies one uniformly drawn feasible rewiring per round.
pub fn attack_random(g: &Graph, cfg: &AttackConfig) -> Result<AttackResult> {
    let mut run = Run::start(g, cfg, Strategy::Random)?;
    for round in 1..=cfg.rounds {
        let drawn = draw_feasible_move(&run.graph, cfg.both_cases, &mut run.rng, cfg.retry_budget)?;
        let Some((mv, _)) = drawn else {
            return Err(run.stuck(round));
        };
        run.proposed += 1;
        run.keep(mv)?;
        run.end_round(vec![mv])?;
    }
    Ok(run.finish())
}

/// Indices of links at the high and low ends of the shell-weight ranking.
///
/// The weight of link `(i, j)` is `k_i + k_j` under `shells`. Each end
/// holds at least `ceil(quantile * m)` links and is widened to include
/// every link tied with its boundary weight.
pub fn heuristic_pools(g: &Graph, shells: &ShellIndex, quantile: f64) -> (Vec<usize>, Vec<usize>) {
    let m = g.edge_count();
    if m == 0 {
        return (Vec::new(), Vec::new());
    }
    let weight = |i: usize| {
        let e = g.edge_at(i);
        shells.get(e.lo()) + shells.get(e.hi())
    };
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&i| (weight(i), g.edge_at(i)));
    let cut = ((quantile * m as f64).ceil() as usize).clamp(1, m);
    let low_bound = weight(order[cut - 1]);
    let high_bound = weight(order[m - cut]);
    let high = order
        .iter()
        .copied()
        .filter(|&i| weight(i) >= high_bound)
        .collect();
    let low = order
        .iter()
        .copied()
        .filter(|&i| weight(i) <= low_bound)
        .collect();
    (high, low)
}

/// Pairs a link between high-shell nodes with one between low-shell nodes.
pub fn attack_heuristic(g: &Graph, cfg: &AttackConfig) -> Result<AttackResult> {
    let mut run = Run::start(g, cfg, Strategy::Heuristic)?;
    for round in 1..=cfg.rounds {
        let shells = run.decomposer.decompose(&run.graph);
        let (high, low) = heuristic_pools(&run.graph, &shells, cfg.ha_quantile);
        let mut found = None;
        for _ in 0..cfg.retry_budget {
            let a = high[run.rng.random_range(0..high.len())];
            let b = low[run.rng.random_range(0..low.len())];
            if a == b {
                continue;
            }
            let (first, second) =
                orient_pair(run.graph.edge_at(a), run.graph.edge_at(b), &mut run.rng);
            if let Some(mv) = propose(&run.graph, first, second, cfg.both_cases, &mut run.rng)? {
                found = Some(mv);
                break;
            }
        }
        let Some(mv) = found else {
            return Err(run.stuck(round));
        };
        run.proposed += 1;
        run.keep(mv)?;
        run.end_round(vec![mv])?;
    }
    Ok(run.finish())
}

/// Simulated-annealing attack.
///
/// Each round starts an annealing loop at `initial_temp` with the current
/// ASR as baseline. Every feasible candidate cools the system by
/// `T_tau = T_{tau-1} / tau` and is accepted if it raises ASR, or with
/// probability `exp(-|dASR| / T_tau)` otherwise. The loop ends once the
/// temperature drops to `terminate_temp`.
pub fn attack_sa(g: &Graph, cfg: &AttackConfig) -> Result<AttackResult> {
    let mut run = Run::start(g, cfg, Strategy::Annealing)?;
    for round in 1..=cfg.rounds {
        let asr0 = run.current_asr();
        let mut state = AnnealingState::new(cfg.initial_temp, asr0);
        let mut chosen: Option<RewiringMove> = None;
        let mut kept = Vec::new();
        let mut misses = 0u32;

        while state.is_hot(cfg.terminate_temp) {
            let Some(mv) = random_feasible_move(&run.graph, cfg.both_cases, &mut run.rng)? else {
                misses += 1;
                if misses >= cfg.retry_budget {
                    return Err(run.stuck(round));
                }
                continue;
            };
            misses = 0;
            run.proposed += 1;
            state.cool();

            mv.apply_to(&mut run.graph)?;
            let asr = run.current_asr();
            let accepted = state.consider(asr, &mut run.rng);
            match cfg.anneal_mode {
                AnnealMode::Literal => {
                    mv.revert_on(&mut run.graph)?;
                    if accepted {
                        chosen = Some(mv);
                    }
                }
                AnnealMode::Compounding => {
                    if accepted {
                        run.log.record(&mv);
                        run.accepted += 1;
                        kept.push(mv);
                    } else {
                        mv.revert_on(&mut run.graph)?;
                    }
                }
            }
        }

        if let Some(mv) = chosen {
            run.keep(mv)?;
            kept.push(mv);
        }
        run.end_round(kept)?;
    }
    Ok(run.finish())
}
