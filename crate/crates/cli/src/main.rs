use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use kshell_core::harness::{self, DatasetSpec, SweepSpec};
use kshell_core::metrics::MetricReport;
use kshell_core::{
    decompose, run_attack, AnnealMode, AttackConfig, BothCasesPolicy, Graph, Strategy,
};

#[derive(Parser)]
#[command(
    name = "kshell",
    version,
    about = "k-shell robustness under degree-preserving rewiring attacks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print every node's k-shell as CSV, followed by a shell histogram.
    Decompose { edgelist: PathBuf },

    /// Compare an adversarial graph against the original.
    Evaluate {
        original: PathBuf,
        adversarial: PathBuf,
        /// Print a header line before the record.
        #[arg(long)]
        header: bool,
    },

    /// Run one attack and write the adversarial graph, edit log and trajectory.
    Attack {
        edgelist: PathBuf,
        #[arg(long, default_value = "sa")]
        method: Strategy,
        #[arg(long, default_value_t = 1)]
        rounds: usize,
        #[arg(long, default_value_t = 1.0)]
        temp: f64,
        #[arg(long = "temp-min", default_value_t = 1e-6)]
        temp_min: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "ha-quantile", default_value_t = 0.2)]
        ha_quantile: f64,
        #[arg(long = "both-cases", default_value = "prefer-1")]
        both_cases: BothCasesPolicy,
        #[arg(long = "anneal-mode", default_value = "literal")]
        anneal_mode: AnnealMode,
        #[arg(long = "retry-budget", default_value_t = 1000)]
        retry_budget: u32,
        #[arg(long)]
        out: PathBuf,
    },

    /// Run a budget sweep described by a TOML file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },

    /// Check the registered datasets against their reference statistics.
    Datasets,
}

fn read_graph(path: &Path) -> anyhow::Result<Graph> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Graph::parse_edge_list(BufReader::new(file))
        .with_context(|| format!("parsing {}", path.display()))
}

fn cmd_decompose(path: &Path) -> anyhow::Result<()> {
    let g = read_graph(path)?;
    let shells = decompose(&g);
    let stdout = io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "node,shell")?;
    for v in g.nodes() {
        writeln!(out, "{},{}", g.label(v), shells.get(v))?;
    }
    let hist = shells.histogram();
    writeln!(
        out,
        "# nodes={} links={} max_shell={}",
        g.node_count(),
        g.edge_count(),
        shells.max_shell()
    )?;
    writeln!(out, "# shell,count,fraction")?;
    for (k, count) in &hist.counts {
        writeln!(out, "# {k},{count},{:.4}", hist.fraction(*k))?;
    }
    Ok(())
}

fn cmd_evaluate(original: &Path, adversarial: &Path, header: bool) -> anyhow::Result<()> {
    let g = read_graph(original)?;
    let h = read_graph(adversarial)?
        .align_to(&g)
        .context("adversarial graph uses labels missing from the original")?;
    let report = MetricReport::evaluate(&g, &decompose(&g), &h, &decompose(&h))?;
    if header {
        println!("asr,lcr,lpn,changed_nodes,changed_links");
    }
    println!(
        "{},{},{},{},{}",
        report.asr,
        report.lcr,
        report.lpn_field(),
        report.changed_nodes,
        report.changed_links
    );
    Ok(())
}

fn cmd_attack(edgelist: &Path, cfg: AttackConfig, out: &Path) -> anyhow::Result<()> {
    let g = read_graph(edgelist)?;
    let (result, stuck) = match run_attack(&g, &cfg) {
        Ok(r) => (r, None),
        Err(kshell_core::Error::Stuck {
            round,
            budget,
            partial,
        }) => (*partial, Some((round, budget))),
        Err(e) => return Err(e.into()),
    };

    fs::create_dir_all(out)?;
    result
        .final_graph
        .write_labeled_edge_list(fs::File::create(out.join("adversarial.txt"))?)?;
    fs::write(
        out.join("editlog.json"),
        serde_json::to_vec_pretty(&result.edit_log.to_json(&g))?,
    )?;
    result.write_trajectory_csv(fs::File::create(out.join("trajectory.csv"))?)?;
    fs::write(
        out.join("case-study.json"),
        serde_json::to_vec_pretty(&harness::emit_case_study(&g, &result))?,
    )?;

    let r = result.report();
    eprintln!(
        "{}: {} rounds, asr={:.4} lcr={:.4} lpn={} ({} proposed, {} kept)",
        cfg.strategy,
        result.rounds_completed(),
        r.asr,
        r.lcr,
        r.lpn_field(),
        result.proposed_moves,
        result.accepted_moves
    );
    if let Some((round, budget)) = stuck {
        bail!("round {round}: no feasible rewiring within {budget} draws; partial results written");
    }
    Ok(())
}

fn cmd_sweep(config: &Path, out: &Path) -> anyhow::Result<()> {
    let text =
        fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let spec = SweepSpec::from_toml(&text)?;
    let dataset = spec.dataset.resolve()?;
    let graph = harness::load_dataset(&dataset)?;
    let outcome = harness::run_sweep_on(&dataset.name, &graph, &spec)?;
    harness::write_sweep_outputs(out, &graph, &outcome)?;
    let failed = outcome.records().filter(|r| r.error.is_some()).count();
    eprintln!(
        "{}: {} runs ({} failed), results in {}",
        dataset.name,
        outcome.cells.len(),
        failed,
        out.display()
    );
    Ok(())
}

fn cmd_datasets() -> anyhow::Result<()> {
    println!("dataset,expected,found,status");
    for spec in DatasetSpec::registry() {
        let expected = format!(
            "{}/{}/{}",
            spec.expected_nodes, spec.expected_edges, spec.expected_max_shell
        );
        match harness::inspect_dataset(&spec) {
            Ok(report) => {
                let s = report.stats;
                let status = if report.matches(&spec) {
                    "ok"
                } else {
                    "version-mismatch"
                };
                println!(
                    "{},{expected},{}/{}/{},{status}",
                    spec.name, s.nodes, s.edges, s.max_shell
                );
            }
            Err(kshell_core::Error::DatasetMissing { path, .. }) => {
                println!("{},{expected},,missing ({path})", spec.name);
            }
            Err(e) => println!("{},{expected},,error ({e})", spec.name),
        }
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Decompose { edgelist } => cmd_decompose(&edgelist),
        Command::Evaluate {
            original,
            adversarial,
            header,
        } => cmd_evaluate(&original, &adversarial, header),
        Command::Attack {
            edgelist,
            method,
            rounds,
            temp,
            temp_min,
            seed,
            ha_quantile,
            both_cases,
            anneal_mode,
            retry_budget,
            out,
        } => {
            let cfg = AttackConfig {
                strategy: method,
                rounds,
                initial_temp: temp,
                terminate_temp: temp_min,
                seed,
                both_cases,
                ha_quantile,
                retry_budget,
                anneal_mode,
            };
            cmd_attack(&edgelist, cfg, &out)
        }
        Command::Sweep { config, out } => cmd_sweep(&config, &out),
        Command::Datasets => cmd_datasets(),
    }
}
