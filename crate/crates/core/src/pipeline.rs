//! Detection, hypergraph construction, solving, deletion and verification.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::automata::DEFAULT_MAX_RUNS;
use crate::conflict::{
    compute_weights, neighbourhood_error, plan_from_vertices, sample_error, token_errors_with_base, topological_error,
    ConflictHypergraph, WeightMode,
};
use crate::constraint::Constraint;
use crate::error::{LimitError, PipelineError};
use crate::graph::{DeletionPlan, ObjectId, PropertyGraph, Token};
use crate::matcher::{find_violating_matches_compiled, CompiledConstraint, Match, MatchLimits};
use crate::solvers::{
    incident_map, lp_guided_greedy, naive_greedy, solve_ilp, solve_ilp_explicit, Cover, CoverInstance, SolverLimits,
    SolverStatus,
};

/// Graphs above this size skip the single-object maximality check.
pub const MAXIMALITY_CHECK_MAX_OBJECTS: usize = 1000;
/// Exhaustive maximality is only attempted up to this many deleted objects.
pub const FULL_MAXIMALITY_MAX_DELETIONS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    #[default]
    Ilp,
    Greedy,
    LpGreedy,
    IlpExplicit,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Ilp => "ilp",
            SolverKind::Greedy => "greedy",
            SolverKind::LpGreedy => "lp-greedy",
            SolverKind::IlpExplicit => "ilp-explicit",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [SolverKind::Ilp, SolverKind::Greedy, SolverKind::LpGreedy, SolverKind::IlpExplicit]
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown solver `{s}` (expected ilp, greedy, lp-greedy or ilp-explicit)"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Allow label deletions.
    pub label_mode: bool,
    /// Restrict errors to the `k`-neighbourhoods of path endpoints.
    pub neighbourhood_k: Option<usize>,
    /// Restrict errors to `2k` sampled edges per match.
    pub sample_k: Option<usize>,
    pub solver: SolverKind,
    /// Skip the greedy trimming phase.
    pub approximate: bool,
    pub custom_weight_key: Option<String>,
    pub now: DateTime<Utc>,
    pub seed: u64,
    pub match_limits: MatchLimits,
    pub max_runs: usize,
    pub solver_limits: SolverLimits,
    /// Record stage timings in the report.
    pub timings: bool,
}

impl PipelineConfig {
    pub fn new(now: DateTime<Utc>) -> Self {
        PipelineConfig {
            label_mode: false,
            neighbourhood_k: None,
            sample_k: None,
            solver: SolverKind::Ilp,
            approximate: false,
            custom_weight_key: None,
            now,
            seed: 0,
            match_limits: MatchLimits::default(),
            max_runs: DEFAULT_MAX_RUNS,
            solver_limits: SolverLimits::default(),
            timings: false,
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let fail = |m: &str| Err(PipelineError::Config(m.into()));
        if self.neighbourhood_k.is_some() && self.sample_k.is_some() {
            return fail("neighbourhood and sample errors are mutually exclusive");
        }
        if self.neighbourhood_k == Some(0) || self.sample_k == Some(0) {
            return fail("the neighbourhood or sample size must be at least 1");
        }
        if self.label_mode && self.custom_weight_key.is_some() {
            return fail("custom weights cannot be combined with label deletions");
        }
        if self.solver == SolverKind::IlpExplicit && self.custom_weight_key.is_some() {
            return fail("the explicit-dependency ILP does not use weights");
        }
        if self.max_runs == 0 || self.match_limits.max_matches == 0 {
            return fail("limits must be positive");
        }
        Ok(())
    }

    fn weight_mode(&self) -> WeightMode {
        if self.label_mode {
            WeightMode::Label
        } else if self.custom_weight_key.is_some() {
            WeightMode::Custom
        } else {
            WeightMode::Topological
        }
    }

    fn restricted(&self) -> bool {
        self.neighbourhood_k.is_some() || self.sample_k.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub satisfied: bool,
    /// `None` when the check was skipped because the graph is too large.
    pub single_object_maximal: Option<bool>,
}

/// Milliseconds per stage, summed over iterations.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub detection_ms: f64,
    pub solve_ms: f64,
    pub apply_ms: f64,
    pub verification_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairReport {
    /// Violating matches per constraint in the input graph.
    pub error_counts: Vec<usize>,
    /// Hyperedges per iteration.
    pub hyperedge_counts: Vec<usize>,
    pub deletions: DeletionPlan,
    pub total_weight: f64,
    pub solver: SolverKind,
    pub solver_status: SolverStatus,
    pub iterations: usize,
    /// Set for label-mode runs over constraints that are not positive.
    pub iterative: bool,
    pub verification: Verification,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

impl RepairReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

/// Violating matches and the conflict hypergraph of one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub matches: Vec<Vec<Match>>,
    pub hypergraph: ConflictHypergraph,
}

/// Full pipeline result, including the hypergraph of every iteration.
#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub graph: PropertyGraph,
    pub report: RepairReport,
    pub hypergraphs: Vec<ConflictHypergraph>,
}

/// Steps 1 to 3: matches per constraint and their errors in construction order.
pub fn detect(
    graph: &PropertyGraph,
    compiled: &[CompiledConstraint],
    config: &PipelineConfig,
) -> Result<Detection, PipelineError> {
    let mut matches = Vec::with_capacity(compiled.len());
    let mut hypergraph = ConflictHypergraph::new();
    let mut counter = 0u64;
    for c in compiled {
        let found = find_violating_matches_compiled(graph, c, config.now, config.match_limits)?;
        for m in &found {
            let base = if let Some(k) = config.neighbourhood_k {
                neighbourhood_error(m, k)
            } else if let Some(k) = config.sample_k {
                sample_error(graph, m, k, config.seed.wrapping_add(counter))
            } else {
                topological_error(m)
            };
            counter += 1;
            if config.label_mode {
                for e in token_errors_with_base(graph, c, m, config.max_runs, base)? {
                    hypergraph.add(e);
                }
            } else {
                hypergraph.add(base);
            }
        }
        matches.push(found);
    }
    Ok(Detection { matches, hypergraph })
}

fn solve(
    graph: &PropertyGraph,
    hypergraph: &ConflictHypergraph,
    config: &PipelineConfig,
) -> Result<Cover, PipelineError> {
    if config.solver == SolverKind::IlpExplicit {
        let incident = incident_map(graph, hypergraph);
        return Ok(solve_ilp_explicit(hypergraph, &incident, &config.solver_limits)?);
    }
    let weights = compute_weights(graph, config.weight_mode(), config.custom_weight_key.as_deref())?;
    let instance = CoverInstance::new(hypergraph, |v| weights.weight(v))?;
    Ok(match config.solver {
        SolverKind::Ilp => solve_ilp(&instance, &config.solver_limits)?,
        SolverKind::Greedy => naive_greedy(&instance, config.approximate),
        SolverKind::LpGreedy => lp_guided_greedy(&instance, config.approximate, &config.solver_limits)?,
        SolverKind::IlpExplicit => unreachable!(),
    })
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1000.0
}

pub fn run_pipeline(
    graph: &PropertyGraph,
    constraints: &[Constraint],
    config: &PipelineConfig,
) -> Result<(PropertyGraph, RepairReport), PipelineError> {
    let outcome = run_pipeline_traced(graph, constraints, config)?;
    Ok((outcome.graph, outcome.report))
}

pub fn run_pipeline_traced(
    graph: &PropertyGraph,
    constraints: &[Constraint],
    config: &PipelineConfig,
) -> Result<PipelineOutcome, PipelineError> {
    config.validate()?;
    let compiled: Vec<CompiledConstraint> = constraints.iter().map(CompiledConstraint::new).collect();
    let iterative = config.label_mode && constraints.iter().any(|c| !c.is_positive());
    let max_iterations = graph.object_count() + graph.tokens().count() + 1;

    let mut timings = Timings::default();
    let mut current = graph.clone();
    let mut deletions = DeletionPlan::default();
    let mut hypergraphs = Vec::new();
    let mut error_counts = Vec::new();
    let mut total_weight = 0.0;
    let mut status = None;
    let mut iterations = 0;

    loop {
        let t = Instant::now();
        let detection = detect(&current, &compiled, config)?;
        timings.detection_ms += ms(t);
        if iterations == 0 {
            error_counts = detection.matches.iter().map(Vec::len).collect();
        }
        if detection.hypergraph.is_empty() {
            break;
        }
        iterations += 1;
        if iterations > max_iterations {
            return Err(PipelineError::NoProgress(max_iterations));
        }

        let t = Instant::now();
        let cover = solve(&current, &detection.hypergraph, config)?;
        timings.solve_ms += ms(t);
        total_weight += cover.weight;
        status.get_or_insert(cover.status);

        let t = Instant::now();
        let plan = plan_from_vertices(&cover.vertices);
        current = current.apply_deletions(&plan);
        deletions.extend(plan);
        timings.apply_ms += ms(t);
        hypergraphs.push(detection.hypergraph);

        if !iterative {
            break;
        }
    }

    let status = if config.restricted() { SolverStatus::Approximate } else { status.unwrap_or(SolverStatus::Optimal) };

    let t = Instant::now();
    let satisfied = satisfies_compiled(&current, &compiled, config.now, config.match_limits)?;
    let single_object_maximal = if graph.object_count() <= MAXIMALITY_CHECK_MAX_OBJECTS {
        Some(single_object_maximality_compiled(graph, &current, &compiled, config.now, config.match_limits)?)
    } else {
        None
    };
    timings.verification_ms += ms(t);

    let report = RepairReport {
        error_counts,
        hyperedge_counts: hypergraphs.iter().map(ConflictHypergraph::len).collect(),
        deletions,
        total_weight,
        solver: config.solver,
        solver_status: status,
        iterations,
        iterative,
        verification: Verification { satisfied, single_object_maximal },
        timings: config.timings.then_some(timings),
    };
    Ok(PipelineOutcome { graph: current, report, hypergraphs })
}

/// True iff no constraint has a violating match.
pub fn check_satisfies(
    graph: &PropertyGraph,
    constraints: &[Constraint],
    now: DateTime<Utc>,
) -> Result<bool, LimitError> {
    let compiled: Vec<CompiledConstraint> = constraints.iter().map(CompiledConstraint::new).collect();
    satisfies_compiled(graph, &compiled, now, MatchLimits::default())
}

fn satisfies_compiled(
    graph: &PropertyGraph,
    compiled: &[CompiledConstraint],
    now: DateTime<Utc>,
    limits: MatchLimits,
) -> Result<bool, LimitError> {
    for c in compiled {
        if !find_violating_matches_compiled(graph, c, now, limits)?.is_empty() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A single object removed from `original` that can be put back into
/// `repaired` on its own.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Removed {
    Node(ObjectId),
    Edge(ObjectId),
    Label(Token),
}

fn removed_objects(original: &PropertyGraph, repaired: &PropertyGraph) -> Vec<Removed> {
    let mut out = Vec::new();
    for (id, data) in original.nodes() {
        match repaired.node(id) {
            None => out.push(Removed::Node(ObjectId::Node(id.clone()))),
            Some(r) => out.extend(
                data.labels
                    .difference(&r.labels)
                    .map(|l| Removed::Label(Token::new(ObjectId::Node(id.clone()), l.clone()))),
            ),
        }
    }
    for (id, data) in original.edges() {
        match repaired.edge(id) {
            None => out.push(Removed::Edge(ObjectId::Edge(id.clone()))),
            Some(r) => out.extend(
                data.labels
                    .difference(&r.labels)
                    .map(|l| Removed::Label(Token::new(ObjectId::Edge(id.clone()), l.clone()))),
            ),
        }
    }
    out
}

/// Puts `object` back into `graph`; `None` if it cannot stand alone.
fn restore(graph: &PropertyGraph, original: &PropertyGraph, object: &Removed) -> Option<PropertyGraph> {
    match object {
        Removed::Node(ObjectId::Node(n)) => Some(graph.with_node(n.clone(), original.node(n)?.clone())),
        Removed::Edge(ObjectId::Edge(e)) => graph.with_edge(e.clone(), original.edge(e)?.clone()),
        Removed::Label(t) => graph.with_label(t),
        _ => None,
    }
}

/// Necessary condition for maximality: putting back any single removed node
/// (without its edges), edge (if both endpoints remain) or label must
/// re-introduce a violation.
pub fn check_single_object_maximality(
    original: &PropertyGraph,
    repaired: &PropertyGraph,
    constraints: &[Constraint],
    now: DateTime<Utc>,
) -> Result<bool, LimitError> {
    let compiled: Vec<CompiledConstraint> = constraints.iter().map(CompiledConstraint::new).collect();
    single_object_maximality_compiled(original, repaired, &compiled, now, MatchLimits::default())
}

fn single_object_maximality_compiled(
    original: &PropertyGraph,
    repaired: &PropertyGraph,
    compiled: &[CompiledConstraint],
    now: DateTime<Utc>,
    limits: MatchLimits,
) -> Result<bool, LimitError> {
    for object in removed_objects(original, repaired) {
        if let Some(g) = restore(repaired, original, &object) {
            if satisfies_compiled(&g, compiled, now, limits)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Exact maximality: no non-empty set of removed objects can be put back
/// without a violation. Restored nodes carry all their original labels.
/// `None` when more than [`FULL_MAXIMALITY_MAX_DELETIONS`] objects were
/// removed.
pub fn check_maximality(
    original: &PropertyGraph,
    repaired: &PropertyGraph,
    constraints: &[Constraint],
    now: DateTime<Utc>,
) -> Result<Option<bool>, LimitError> {
    let mut removed = removed_objects(original, repaired);
    if removed.len() > FULL_MAXIMALITY_MAX_DELETIONS {
        return Ok(None);
    }
    removed.sort();
    let compiled: Vec<CompiledConstraint> = constraints.iter().map(CompiledConstraint::new).collect();
    'subsets: for mask in 1u32..(1 << removed.len()) {
        let mut g = repaired.clone();
        for (i, object) in removed.iter().enumerate() {
            if mask >> i & 1 == 1 {
                match restore(&g, original, object) {
                    Some(next) => g = next,
                    None => continue 'subsets,
                }
            }
        }
        if satisfies_compiled(&g, &compiled, now, MatchLimits::default())? {
            return Ok(Some(false));
        }
    }
    Ok(Some(true))
}
