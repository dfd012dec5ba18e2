//! Dataset registry, budget sweeps and result emission.
//!
//! A sweep runs every `(strategy, rounds, seed)` cell independently, in
//! parallel, and reports the realized link change rate of each run; the
//! round count is the only budget knob.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::attack::{run_attack, AnnealMode, AttackConfig, AttackResult, Strategy};
use crate::error::{Error, Result};
use crate::graph::{Edge, Graph};
use crate::kshell::decompose;
use crate::metrics::MetricReport;
use crate::rewiring::BothCasesPolicy;

pub const DATA_DIR_ENV: &str = "KSHELL_DATA_DIR";

/// Directory holding dataset edge lists: `$KSHELL_DATA_DIR` if set,
/// otherwise the `data/` directory at the workspace root.
pub fn data_dir() -> PathBuf {
    match std::env::var_os(DATA_DIR_ENV) {
        Some(dir) => PathBuf::from(dir),
        None => Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub name: String,
    /// File name relative to [`data_dir`], or an absolute path.
    pub file: String,
    pub expected_nodes: usize,
    pub expected_edges: usize,
    pub expected_max_shell: u32,
    /// SHA-256 of the vendored copy, if one ships with the crate.
    #[serde(default)]
    pub sha256: Option<String>,
}

const KARATE_SHA256: &str = "87f8fc8644f035844ca1cbb46fd85534dd0bdbf115048fd02dd0669bc22cb219";

impl DatasetSpec {
    fn builtin_entry(
        name: &str,
        file: &str,
        n: usize,
        m: usize,
        k: u32,
        sha: Option<&str>,
    ) -> Self {
        DatasetSpec {
            name: name.into(),
            file: file.into(),
            expected_nodes: n,
            expected_edges: m,
            expected_max_shell: k,
            sha256: sha.map(str::to_string),
        }
    }

    /// Karate, Dolphin, Thrones and Facebook with their reference
    /// node, link and maximum-shell counts.
    pub fn registry() -> Vec<DatasetSpec> {
        vec![
            Self::builtin_entry("karate", "karate.txt", 34, 78, 4, Some(KARATE_SHA256)),
            Self::builtin_entry("dolphins", "dolphins.txt", 62, 159, 4, None),
            Self::builtin_entry("thrones", "thrones.txt", 107, 352, 7, None),
            Self::builtin_entry("facebook", "facebook.txt", 1266, 6451, 11, None),
        ]
    }

    pub fn builtin(name: &str) -> Result<DatasetSpec> {
        let wanted = name.to_ascii_lowercase();
        let wanted = match wanted.as_str() {
            "dolphin" => "dolphins",
            "throne" => "thrones",
            other => other,
        };
        Self::registry()
            .into_iter()
            .find(|d| d.name == wanted)
            .ok_or_else(|| Error::UnknownDataset(name.to_string()))
    }

    pub fn path(&self) -> PathBuf {
        let p = Path::new(&self.file);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            data_dir().join(p)
        }
    }

    pub fn is_available(&self) -> bool {
        self.path().is_file()
    }

    fn expected(&self) -> DatasetStats {
        DatasetStats {
            nodes: self.expected_nodes,
            edges: self.expected_edges,
            max_shell: self.expected_max_shell,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DatasetStats {
    pub nodes: usize,
    pub edges: usize,
    pub max_shell: u32,
}

impl DatasetStats {
    pub fn of(g: &Graph) -> Self {
        DatasetStats {
            nodes: g.node_count(),
            edges: g.edge_count(),
            max_shell: decompose(g).max_shell(),
        }
    }
}

impl std::fmt::Display for DatasetStats {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} nodes / {} links / max shell {}",
            self.nodes, self.edges, self.max_shell
        )
    }
}

/// What was found on disk for a dataset, without judging it.
#[derive(Debug, Clone)]
pub struct DatasetReport {
    pub graph: Graph,
    pub stats: DatasetStats,
    pub sha256: String,
    /// `None` when the dataset entry carries no checksum.
    pub checksum_matches: Option<bool>,
}

impl DatasetReport {
    pub fn matches(&self, spec: &DatasetSpec) -> bool {
        self.stats == spec.expected()
    }
}

pub fn inspect_dataset(spec: &DatasetSpec) -> Result<DatasetReport> {
    let path = spec.path();
    let bytes = fs::read(&path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::DatasetMissing {
            name: spec.name.clone(),
            path: path.display().to_string(),
        },
        _ => Error::Io(e),
    })?;
    let sha256 = hex::encode(Sha256::digest(&bytes));
    let graph = Graph::parse_edge_list(bytes.as_slice())?;
    let stats = DatasetStats::of(&graph);
    let checksum_matches = spec
        .sha256
        .as_ref()
        .map(|s| s.eq_ignore_ascii_case(&sha256));
    Ok(DatasetReport {
        graph,
        stats,
        sha256,
        checksum_matches,
    })
}

/// Loads a dataset and insists it matches the expected statistics.
pub fn load_dataset(spec: &DatasetSpec) -> Result<Graph> {
    let report = inspect_dataset(spec)?;
    if !report.matches(spec) {
        return Err(Error::VersionMismatch {
            name: spec.name.clone(),
            expected: spec.expected().to_string(),
            found: report.stats.to_string(),
        });
    }
    Ok(report.graph)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DatasetRef {
    Builtin(String),
    Custom(DatasetSpec),
}

impl DatasetRef {
    pub fn resolve(&self) -> Result<DatasetSpec> {
        match self {
            DatasetRef::Builtin(name) => DatasetSpec::builtin(name),
            DatasetRef::Custom(spec) => Ok(spec.clone()),
        }
    }
}

/// Declarative sweep description, read from TOML.
///
/// ```toml
/// dataset = "karate"
/// strategies = ["ra", "ha", "sa"]
/// round_schedule = [1, 2, 4, 8]
/// seeds = [1, 2, 3]
/// initial_temp = 1.0
/// terminate_temp = 1e-6
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub dataset: DatasetRef,
    pub strategies: Vec<Strategy>,
    pub round_schedule: Vec<usize>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_initial_temp")]
    pub initial_temp: f64,
    #[serde(default = "default_terminate_temp")]
    pub terminate_temp: f64,
    #[serde(default = "default_ha_quantile")]
    pub ha_quantile: f64,
    #[serde(default)]
    pub both_cases: BothCasesPolicy,
    #[serde(default)]
    pub anneal_mode: AnnealMode,
    #[serde(default = "default_retry_budget")]
    pub retry_budget: u32,
}

fn default_initial_temp() -> f64 {
    AttackConfig::default().initial_temp
}
fn default_terminate_temp() -> f64 {
    AttackConfig::default().terminate_temp
}
fn default_ha_quantile() -> f64 {
    AttackConfig::default().ha_quantile
}
fn default_retry_budget() -> u32 {
    AttackConfig::default().retry_budget
}

impl SweepSpec {
    pub fn new(
        dataset: &str,
        strategies: Vec<Strategy>,
        round_schedule: Vec<usize>,
        seeds: Vec<u64>,
    ) -> Self {
        let d = AttackConfig::default();
        SweepSpec {
            dataset: DatasetRef::Builtin(dataset.to_string()),
            strategies,
            round_schedule,
            seeds,
            initial_temp: d.initial_temp,
            terminate_temp: d.terminate_temp,
            ha_quantile: d.ha_quantile,
            both_cases: d.both_cases,
            anneal_mode: d.anneal_mode,
            retry_budget: d.retry_budget,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: SweepSpec = toml::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::InvalidSweep("seeds must not be empty".into()));
        }
        if self.strategies.is_empty() {
            return Err(Error::InvalidSweep("strategies must not be empty".into()));
        }
        if self.round_schedule.is_empty() || self.round_schedule.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSweep(
                "round_schedule must be non-empty and strictly increasing".into(),
            ));
        }
        self.config_for(self.strategies[0], self.round_schedule[0], self.seeds[0])
            .validate()
    }

    pub fn config_for(&self, strategy: Strategy, rounds: usize, seed: u64) -> AttackConfig {
        AttackConfig {
            strategy,
            rounds,
            initial_temp: self.initial_temp,
            terminate_temp: self.terminate_temp,
            seed,
            both_cases: self.both_cases,
            ha_quantile: self.ha_quantile,
            retry_budget: self.retry_budget,
            anneal_mode: self.anneal_mode,
        }
    }

    /// Cells in emission order: strategy, then rounds, then seed.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &strategy in &self.strategies {
            for &rounds in &self.round_schedule {
                for &seed in &self.seeds {
                    out.push(Cell {
                        strategy,
                        rounds,
                        seed,
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub strategy: Strategy,
    pub rounds: usize,
    pub seed: u64,
}

impl Cell {
    pub fn file_stem(&self, dataset: &str) -> String {
        format!(
            "{dataset}-{}-r{}-s{}",
            self.strategy, self.rounds, self.seed
        )
    }
}

/// One row of `records.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub dataset: String,
    pub method: Strategy,
    pub seed: u64,
    pub rounds: usize,
    pub lcr: f64,
    pub asr: f64,
    pub lpn: Option<f64>,
    pub changed_nodes: usize,
    pub changed_links: usize,
    pub wall_time_ms: f64,
    pub error: Option<String>,
}

impl SweepRecord {
    /// Record with the timing column zeroed, for determinism comparisons.
    pub fn without_timing(&self) -> SweepRecord {
        SweepRecord {
            wall_time_ms: 0.0,
            ..self.clone()
        }
    }

    pub fn report(&self) -> MetricReport {
        MetricReport {
            asr: self.asr,
            lcr: self.lcr,
            lpn: self.lpn,
            changed_nodes: self.changed_nodes,
            changed_links: self.changed_links,
        }
    }
}

pub const RECORD_HEADER: [&str; 11] = [
    "dataset",
    "method",
    "seed",
    "rounds",
    "lcr",
    "asr",
    "lpn",
    "changed_nodes",
    "changed_links",
    "wall_time_ms",
    "error",
];

pub const MEDIAN_HEADER: [&str; 10] = [
    "dataset",
    "method",
    "rounds",
    "runs",
    "failed",
    "lcr",
    "asr",
    "lpn",
    "changed_nodes",
    "changed_links",
];

/// Per-`(method, rounds)` medians across seeds. Failed runs are excluded;
/// LPN medians skip runs where it is undefined.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MedianRecord {
    pub dataset: String,
    pub method: Strategy,
    pub rounds: usize,
    pub runs: usize,
    pub failed: usize,
    pub lcr: f64,
    pub asr: f64,
    pub lpn: Option<f64>,
    pub changed_nodes: f64,
    pub changed_links: f64,
}

#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub cell: Cell,
    pub record: SweepRecord,
    pub result: Option<AttackResult>,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub dataset: String,
    pub cells: Vec<CellOutcome>,
    pub medians: Vec<MedianRecord>,
}

impl SweepOutcome {
    pub fn records(&self) -> impl Iterator<Item = &SweepRecord> {
        self.cells.iter().map(|c| &c.record)
    }
}

/// Median of a non-empty slice; the mean of the middle pair for even length.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    })
}

fn run_cell(dataset: &str, graph: &Graph, spec: &SweepSpec, cell: Cell) -> CellOutcome {
    let cfg = spec.config_for(cell.strategy, cell.rounds, cell.seed);
    let started = Instant::now();
    let outcome = run_attack(graph, &cfg);
    let wall_time_ms = started.elapsed().as_secs_f64() * 1e3;
    let base = SweepRecord {
        dataset: dataset.to_string(),
        method: cell.strategy,
        seed: cell.seed,
        rounds: cell.rounds,
        lcr: f64::NAN,
        asr: f64::NAN,
        lpn: None,
        changed_nodes: 0,
        changed_links: 0,
        wall_time_ms,
        error: None,
    };
    match outcome {
        Ok(result) => {
            let r = result.report();
            let record = SweepRecord {
                lcr: r.lcr,
                asr: r.asr,
                lpn: r.lpn,
                changed_nodes: r.changed_nodes,
                changed_links: r.changed_links,
                ..base
            };
            CellOutcome {
                cell,
                record,
                result: Some(result),
            }
        }
        Err(e) => CellOutcome {
            cell,
            record: SweepRecord {
                error: Some(e.to_string()),
                ..base
            },
            result: None,
        },
    }
}

/// Runs every cell of `spec` on `graph`. Failed runs become error rows.
pub fn run_sweep_on(dataset: &str, graph: &Graph, spec: &SweepSpec) -> Result<SweepOutcome> {
    spec.validate()?;
    let cells: Vec<CellOutcome> = spec
        .cells()
        .into_par_iter()
        .map(|cell| run_cell(dataset, graph, spec, cell))
        .collect();
    let medians = aggregate_medians(dataset, &cells);
    Ok(SweepOutcome {
        dataset: dataset.to_string(),
        cells,
        medians,
    })
}

/// Loads the sweep's dataset (validated) and runs it.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutcome> {
    let dataset = spec.dataset.resolve()?;
    let graph = load_dataset(&dataset)?;
    run_sweep_on(&dataset.name, &graph, spec)
}

pub fn aggregate_medians(dataset: &str, cells: &[CellOutcome]) -> Vec<MedianRecord> {
    let mut groups: BTreeMap<(Strategy, usize), Vec<&SweepRecord>> = BTreeMap::new();
    for c in cells {
        groups
            .entry((c.cell.strategy, c.cell.rounds))
            .or_default()
            .push(&c.record);
    }
    groups
        .into_iter()
        .map(|((method, rounds), records)| {
            let ok: Vec<&SweepRecord> = records
                .iter()
                .copied()
                .filter(|r| r.error.is_none())
                .collect();
            let col =
                |f: fn(&SweepRecord) -> f64| -> Vec<f64> { ok.iter().map(|r| f(r)).collect() };
            let lpns: Vec<f64> = ok.iter().filter_map(|r| r.lpn).collect();
            MedianRecord {
                dataset: dataset.to_string(),
                method,
                rounds,
                runs: ok.len(),
                failed: records.len() - ok.len(),
                lcr: median(&col(|r| r.lcr)).unwrap_or(f64::NAN),
                asr: median(&col(|r| r.asr)).unwrap_or(f64::NAN),
                lpn: median(&lpns),
                changed_nodes: median(&col(|r| r.changed_nodes as f64)).unwrap_or(f64::NAN),
                changed_links: median(&col(|r| r.changed_links as f64)).unwrap_or(f64::NAN),
            }
        })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}

/// Writes `records.csv` rows, flushing after each one.
pub fn write_records<'a, W: Write>(
    w: W,
    records: impl IntoIterator<Item = &'a SweepRecord>,
) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(RECORD_HEADER)?;
    for r in records {
        out.write_record([
            r.dataset.clone(),
            r.method.to_string(),
            r.seed.to_string(),
            r.rounds.to_string(),
            num(r.lcr),
            num(r.asr),
            opt(r.lpn),
            r.changed_nodes.to_string(),
            r.changed_links.to_string(),
            format!("{:.3}", r.wall_time_ms),
            r.error.clone().unwrap_or_default(),
        ])?;
        out.flush()?;
    }
    Ok(())
}

pub fn write_medians<'a, W: Write>(
    w: W,
    medians: impl IntoIterator<Item = &'a MedianRecord>,
) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(MEDIAN_HEADER)?;
    for m in medians {
        out.write_record([
            m.dataset.clone(),
            m.method.to_string(),
            m.rounds.to_string(),
            m.runs.to_string(),
            m.failed.to_string(),
            num(m.lcr),
            num(m.asr),
            opt(m.lpn),
            num(m.changed_nodes),
            num(m.changed_links),
        ])?;
        out.flush()?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeShellChange {
    pub label: String,
    pub original_shell: u32,
    pub adversarial_shell: u32,
    pub delta: i64,
    /// Whether any link incident to the node was removed or added.
    pub touched: bool,
}

/// Everything needed to redraw an attacked graph next to the original.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseStudy {
    pub strategy: Strategy,
    pub rounds: usize,
    pub seed: u64,
    pub asr: f64,
    pub lcr: f64,
    pub lpn: Option<f64>,
    pub removed: Vec<[String; 2]>,
    pub added: Vec<[String; 2]>,
    pub nodes: Vec<NodeShellChange>,
}

pub fn emit_case_study(g: &Graph, result: &AttackResult) -> CaseStudy {
    let log = &result.edit_log;
    let labelled = |edges: &std::collections::BTreeSet<Edge>| -> Vec<[String; 2]> {
        edges
            .iter()
            .map(|e| [g.label(e.lo()).to_string(), g.label(e.hi()).to_string()])
            .collect()
    };
    let mut touched = vec![false; g.node_count()];
    for e in log.removed_original().iter().chain(log.added_foreign()) {
        touched[e.lo().index()] = true;
        touched[e.hi().index()] = true;
    }
    let nodes = g
        .nodes()
        .map(|v| {
            let before = result.original_shells.get(v);
            let after = result.final_shells.get(v);
            NodeShellChange {
                label: g.label(v).to_string(),
                original_shell: before,
                adversarial_shell: after,
                delta: after as i64 - before as i64,
                touched: touched[v.index()],
            }
        })
        .collect();
    let report = result.report();
    CaseStudy {
        strategy: result.config.strategy,
        rounds: result.rounds_completed(),
        seed: result.config.seed,
        asr: report.asr,
        lcr: report.lcr,
        lpn: report.lpn,
        removed: labelled(log.removed_original()),
        added: labelled(log.added_foreign()),
        nodes,
    }
}

/// Writes `records.csv`, `medians.csv` and per-cell edit logs and case
/// studies into `dir`.
pub fn write_sweep_outputs(dir: &Path, graph: &Graph, outcome: &SweepOutcome) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_records(
        fs::File::create(dir.join("records.csv"))?,
        outcome.records(),
    )?;
    write_medians(fs::File::create(dir.join("medians.csv"))?, &outcome.medians)?;
    for c in &outcome.cells {
        let Some(result) = &c.result else { continue };
        let stem = c.cell.file_stem(&outcome.dataset);
        let log = result.edit_log.to_json(graph);
        fs::write(
            dir.join(format!("editlog-{stem}.json")),
            serde_json::to_vec_pretty(&log)?,
        )?;
        let study = emit_case_study(graph, result);
        fs::write(
            dir.join(format!("case-study-{stem}.json")),
            serde_json::to_vec_pretty(&study)?,
        )?;
    }
    Ok(())
}
