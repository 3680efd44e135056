use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::{DateTime, Utc};
use clap::error::ErrorKind;
use clap::Parser;

use pgrepair::constraint::{emit_error_queries, parse_constraints};
use pgrepair::error::PipelineError;
use pgrepair::graph::{parse_timestamp, PropertyGraph};
use pgrepair::pipeline::{run_pipeline_traced, PipelineConfig, SolverKind};
use pgrepair::solvers::SolverStatus;

/// Detect and repair constraint violations in a property graph.
#[derive(Debug, Parser)]
#[command(name = "pgrepair", version)]
struct Cli {
    /// Property graph JSON.
    #[arg(long, value_name = "FILE")]
    graph: PathBuf,
    /// RGPC constraints, one per `;`-terminated statement pair.
    #[arg(long, value_name = "FILE")]
    constraints: PathBuf,
    /// Allow label deletions.
    #[arg(long)]
    labels: bool,
    /// Only consider objects within K steps of path endpoints.
    #[arg(long, value_name = "K", conflicts_with = "sample")]
    neighbourhood: Option<usize>,
    /// Only consider 2K sampled edges per violation.
    #[arg(long, value_name = "K")]
    sample: Option<usize>,
    /// ilp, greedy, lp-greedy or ilp-explicit.
    #[arg(long, default_value = "ilp")]
    solver: SolverKind,
    /// Skip the greedy trimming phase.
    #[arg(long)]
    approximate: bool,
    /// Numeric property holding per-object deletion costs.
    #[arg(long, value_name = "KEY")]
    custom_weight_key: Option<String>,
    /// Value of NOW() in predicates (defaults to the current time).
    #[arg(long, value_name = "ISO8601", value_parser = parse_now)]
    now: Option<DateTime<Utc>>,
    /// Seed for sampled errors.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_name = "N")]
    max_matches: Option<usize>,
    #[arg(long, value_name = "N")]
    max_path_length: Option<usize>,
    /// Accepting runs per path in label mode.
    #[arg(long, value_name = "N")]
    max_runs: Option<usize>,
    /// Branch-and-bound nodes per component.
    #[arg(long, value_name = "N")]
    max_nodes: Option<usize>,
    /// Write the repaired graph here.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
    /// Write the GQL error queries here.
    #[arg(long, value_name = "FILE")]
    emit_queries: Option<PathBuf>,
    /// Write the first conflict hypergraph here.
    #[arg(long, value_name = "FILE")]
    dump_hypergraph: Option<PathBuf>,
    /// Include stage timings in the report.
    #[arg(long)]
    timings: bool,
}

fn parse_now(s: &str) -> Result<DateTime<Utc>, String> {
    parse_timestamp(s).ok_or_else(|| format!("`{s}` is not an ISO 8601 date or timestamp"))
}

fn write(path: &Path, contents: &str) -> Result<(), PipelineError> {
    fs::write(path, contents).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))
}

fn config(cli: &Cli) -> PipelineConfig {
    let mut config = PipelineConfig::new(cli.now.unwrap_or_else(Utc::now));
    config.label_mode = cli.labels;
    config.neighbourhood_k = cli.neighbourhood;
    config.sample_k = cli.sample;
    config.solver = cli.solver;
    config.approximate = cli.approximate;
    config.custom_weight_key = cli.custom_weight_key.clone();
    config.seed = cli.seed;
    config.timings = cli.timings;
    if let Some(n) = cli.max_matches {
        config.match_limits.max_matches = n;
    }
    if let Some(n) = cli.max_path_length {
        config.match_limits.max_path_length = n;
    }
    if let Some(n) = cli.max_runs {
        config.max_runs = n;
    }
    if let Some(n) = cli.max_nodes {
        config.solver_limits.max_nodes = n;
    }
    config
}

fn run(cli: &Cli) -> Result<u8, PipelineError> {
    let graph = PropertyGraph::load(&cli.graph)?;
    let text = fs::read_to_string(&cli.constraints)
        .map_err(|e| PipelineError::Config(format!("{}: {e}", cli.constraints.display())))?;
    let constraints = parse_constraints(&text)?;
    if let Some(path) = &cli.emit_queries {
        write(path, &emit_error_queries(&constraints))?;
    }

    let outcome = run_pipeline_traced(&graph, &constraints, &config(cli))?;
    let report = &outcome.report;

    if let Some(path) = &cli.dump_hypergraph {
        let json = outcome.hypergraphs.first().map(|h| h.to_json()).unwrap_or_else(|| "[]".into());
        write(path, &(json + "\n"))?;
    }
    if let Some(path) = &cli.out {
        outcome.graph.save(path)?;
    }
    match &cli.report {
        Some(path) => write(path, &(report.to_json() + "\n"))?,
        None => println!("{}", report.to_json()),
    }

    eprintln!(
        "{} violation(s), {} deletion(s), weight {}, status {:?}, satisfied {}",
        report.error_counts.iter().sum::<usize>(),
        report.deletions.len(),
        report.total_weight,
        report.solver_status,
        report.verification.satisfied,
    );

    let exact = report.verification.satisfied
        && report.solver_status != SolverStatus::Approximate
        && report.verification.single_object_maximal != Some(false);
    Ok(if exact { 0 } else { 1 })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(3);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
