//! Generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use rand::seq::SliceRandom;
use rand::Rng;

use pgrepair::conflict::{ConflictHypergraph, Vertex};
use pgrepair::constraint::{parse_constraint, Constraint, PathPattern};
use pgrepair::graph::{Direction, EdgeRecord, NodeId, NodeRecord, Path, PropertyGraph, TraceItem, Value};
use pgrepair::solvers::CoverInstance;

pub fn now() -> DateTime<Utc> {
    "2025-01-01T00:00:00Z".parse().unwrap()
}

pub const ORGANISATION_JSON: &str = include_str!("../data/organisation.json");
pub const RUNNING_RGPC: &str = include_str!("../data/running.rgpc");

pub fn organisation() -> PropertyGraph {
    PropertyGraph::from_json_str(ORGANISATION_JSON).unwrap()
}

pub fn running() -> Constraint {
    parse_constraint(RUNNING_RGPC).unwrap()
}

// ---- hypergraphs ----

pub fn vertex(i: usize) -> Vertex {
    Vertex::Node(NodeId(format!("v{i:02}")))
}

/// At most 12 vertices, at most 8 hyperedges, integer weights 1 to 5.
pub fn random_instance(rng: &mut impl Rng) -> CoverInstance {
    let n = rng.gen_range(1..=12);
    let weights: BTreeMap<Vertex, f64> = (0..n).map(|i| (vertex(i), rng.gen_range(1..=5) as f64)).collect();
    let m = rng.gen_range(1..=8);
    let h: ConflictHypergraph = (0..m)
        .map(|_| {
            let size = rng.gen_range(1..=n.min(5));
            let mut ids: Vec<usize> = (0..n).collect();
            ids.shuffle(rng);
            ids[..size].iter().map(|&i| vertex(i)).collect::<BTreeSet<_>>()
        })
        .collect();
    CoverInstance::new(&h, |v| weights[v]).unwrap()
}

/// Exhaustive minimum cover weight, written independently of the library.
pub fn min_cover_weight(instance: &CoverInstance) -> f64 {
    let n = instance.len();
    let mut best = f64::INFINITY;
    for set in 0u32..(1 << n) {
        if instance.hyperedges().iter().all(|e| e.iter().any(|&i| set >> i & 1 == 1)) {
            let w: f64 = (0..n).filter(|i| set >> i & 1 == 1).map(|i| instance.weights()[i]).sum();
            best = best.min(w);
        }
    }
    if n == 0 {
        0.0
    } else {
        best
    }
}

// ---- patterns ----

pub const TRACE_LABELS: [&str; 3] = ["a", "b", "c"];

pub fn random_label_expr(rng: &mut impl Rng, labels: &[&str], negation: bool) -> String {
    let atom = |rng: &mut dyn rand::RngCore| {
        let l = labels[rng.gen_range(0..labels.len())];
        if negation && rng.gen_bool(0.3) {
            format!("!{l}")
        } else {
            l.to_string()
        }
    };
    match rng.gen_range(0..6) {
        0 => format!("{} & {}", atom(rng), atom(rng)),
        1 => format!("{} | {}", atom(rng), atom(rng)),
        _ => atom(rng),
    }
}

fn label_part(rng: &mut impl Rng, labels: &[&str], negation: bool, optional: bool) -> String {
    if optional && rng.gen_bool(0.4) {
        String::new()
    } else {
        format!(":{}", random_label_expr(rng, labels, negation))
    }
}

fn random_edge(rng: &mut impl Rng, labels: &[&str], negation: bool, labelled: bool, reverse: bool) -> String {
    let label = label_part(rng, labels, negation, !labelled);
    if reverse && rng.gen_bool(0.25) {
        format!("<-[{label}]-")
    } else {
        format!("-[{label}]->")
    }
}

/// Options for random path patterns.
#[derive(Clone, Copy)]
pub struct PatternShape<'a> {
    pub labels: &'a [&'a str],
    pub negation: bool,
    pub reverse: bool,
    /// Require labels on edges inside repetitions.
    pub labelled_loops: bool,
}

fn random_sequence(rng: &mut impl Rng, shape: PatternShape, depth: usize, needs_edge: bool, in_loop: bool) -> String {
    let n = rng.gen_range(1..=3);
    let mut items: Vec<String> = (0..n).map(|_| random_item(rng, shape, depth, in_loop)).collect();
    if needs_edge {
        let at = rng.gen_range(0..=items.len());
        items.insert(at, random_edge(rng, shape.labels, shape.negation, shape.labelled_loops, shape.reverse));
    }
    items.concat()
}

fn random_item(rng: &mut impl Rng, shape: PatternShape, depth: usize, in_loop: bool) -> String {
    let choices = if depth > 0 { 6 } else { 3 };
    match rng.gen_range(0..choices) {
        0 => format!("({})", label_part(rng, shape.labels, shape.negation, true)),
        1 | 2 => random_edge(rng, shape.labels, shape.negation, in_loop && shape.labelled_loops, shape.reverse),
        3 | 4 => {
            let mut body = random_sequence(rng, shape, depth - 1, true, true);
            if rng.gen_bool(0.3) {
                body = format!("{body} | {}", random_sequence(rng, shape, depth - 1, true, true));
            }
            let op = if rng.gen_bool(0.5) { "*" } else { "+" };
            format!("[{body}]{op}")
        }
        _ => format!(
            "[{} | {}]",
            random_sequence(rng, shape, depth - 1, false, in_loop),
            random_sequence(rng, shape, depth - 1, false, in_loop)
        ),
    }
}

/// A pattern without node variables, in constraint syntax.
pub fn random_pattern_text(rng: &mut impl Rng, shape: PatternShape) -> String {
    random_sequence(rng, shape, 2, false, false)
}

/// A pattern starting at `(from)` and ending at `(to)`.
pub fn random_anchored_pattern_text(rng: &mut impl Rng, shape: PatternShape, from: &str, to: &str) -> String {
    let head = format!("({from}{})", label_part(rng, shape.labels, shape.negation, true));
    let tail = format!("({to}{})", label_part(rng, shape.labels, shape.negation, true));
    format!("{head}{}{tail}", random_sequence(rng, shape, 1, false, false))
}

pub fn parse_pattern(text: &str) -> PathPattern {
    let c = parse_constraint(&format!("z = {text}; {{}} => {{false}}")).unwrap_or_else(|e| panic!("{text}: {e}"));
    c.patterns.into_iter().next().unwrap().1
}

// ---- traces and the recursive oracle ----

pub fn random_trace(rng: &mut impl Rng, max_edges: usize) -> Vec<TraceItem> {
    let labels = |rng: &mut dyn rand::RngCore| -> BTreeSet<String> {
        TRACE_LABELS.iter().filter(|_| rng.gen_bool(0.45)).map(|l| l.to_string()).collect()
    };
    let n = rng.gen_range(0..=max_edges);
    let mut trace = vec![TraceItem { labels: labels(rng), direction: None }];
    for _ in 0..n {
        let direction = if rng.gen_bool(0.8) { Direction::Forward } else { Direction::Reverse };
        trace.push(TraceItem { labels: labels(rng), direction: Some(direction) });
        trace.push(TraceItem { labels: labels(rng), direction: None });
    }
    trace
}

fn label_holds(label: &pgrepair::constraint::LabelExpr, item: &TraceItem) -> bool {
    label.eval_with(&|l| item.has(l))
}

/// Node positions (even trace indices) at which a match of `p` starting at
/// position `i` can end.
pub fn oracle_ends(p: &PathPattern, trace: &[TraceItem], i: usize) -> BTreeSet<usize> {
    match p {
        PathPattern::Node { label, .. } => {
            if label_holds(label, &trace[i]) {
                BTreeSet::from([i])
            } else {
                BTreeSet::new()
            }
        }
        PathPattern::Edge { direction, label } => {
            if i + 2 < trace.len() && trace[i + 1].direction == Some(*direction) && label_holds(label, &trace[i + 1]) {
                BTreeSet::from([i + 2])
            } else {
                BTreeSet::new()
            }
        }
        PathPattern::Concat(items) => {
            let mut at = BTreeSet::from([i]);
            for item in items {
                at = at.iter().flat_map(|&j| oracle_ends(item, trace, j)).collect();
            }
            at
        }
        PathPattern::Union(a, b) => {
            let mut out = oracle_ends(a, trace, i);
            out.extend(oracle_ends(b, trace, i));
            out
        }
        PathPattern::Star(body) => {
            let mut reached = BTreeSet::from([i]);
            let mut frontier = vec![i];
            while let Some(j) = frontier.pop() {
                for k in oracle_ends(body, trace, j) {
                    if reached.insert(k) {
                        frontier.push(k);
                    }
                }
            }
            reached
        }
    }
}

pub fn oracle_accepts(p: &PathPattern, trace: &[TraceItem]) -> bool {
    oracle_ends(p, trace, 0).contains(&(trace.len() - 1))
}

type Binding = BTreeMap<String, NodeId>;

/// Like [`oracle_ends`], also binding named node variables outside loops.
fn oracle_bind(
    p: &PathPattern,
    trace: &[TraceItem],
    nodes: &[NodeId],
    i: usize,
    binding: &Binding,
) -> Vec<(usize, Binding)> {
    match p {
        PathPattern::Node { var, label } => {
            if !label_holds(label, &trace[i]) {
                return Vec::new();
            }
            let mut b = binding.clone();
            if let Some(v) = var.as_ref().filter(|v| !v.is_internal()) {
                let node = &nodes[i / 2];
                match b.get(&v.0) {
                    Some(bound) if bound != node => return Vec::new(),
                    _ => {
                        b.insert(v.0.clone(), node.clone());
                    }
                }
            }
            vec![(i, b)]
        }
        PathPattern::Concat(items) => {
            let mut states = vec![(i, binding.clone())];
            for item in items {
                states = states.iter().flat_map(|(j, b)| oracle_bind(item, trace, nodes, *j, b)).collect();
            }
            states
        }
        PathPattern::Union(a, b) => {
            let mut out = oracle_bind(a, trace, nodes, i, binding);
            out.extend(oracle_bind(b, trace, nodes, i, binding));
            out
        }
        other => oracle_ends(other, trace, i).into_iter().map(|j| (j, binding.clone())).collect(),
    }
}

/// Every trail of the graph (no repeated edge, either direction, self-loops
/// forward only), up to `max_len` edges.
pub fn trails(graph: &PropertyGraph, max_len: usize) -> Vec<Path> {
    fn extend(graph: &PropertyGraph, path: &mut Path, max_len: usize, out: &mut Vec<Path>) {
        out.push(path.clone());
        if path.steps.len() == max_len {
            return;
        }
        let here = path.end().clone();
        let mut moves = Vec::new();
        for (id, e) in graph.edges() {
            if path.steps.iter().any(|s| &s.edge == id) {
                continue;
            }
            if e.source == here {
                moves.push((id.clone(), Direction::Forward, e.target.clone()));
            }
            if e.target == here && e.source != e.target {
                moves.push((id.clone(), Direction::Reverse, e.source.clone()));
            }
        }
        for (edge, dir, node) in moves {
            path.push(edge, dir, node);
            extend(graph, path, max_len, out);
            path.steps.pop();
        }
    }
    let mut out = Vec::new();
    for (id, _) in graph.nodes() {
        extend(graph, &mut Path::single(id.clone()), max_len, &mut out);
    }
    out
}

/// Matches of a single-pattern constraint as (path, named bindings), by
/// enumerating trails and running the recursive oracle on each trace.
pub fn oracle_matches(graph: &PropertyGraph, pattern: &PathPattern) -> BTreeSet<(String, Binding)> {
    let mut out = BTreeSet::new();
    for path in trails(graph, graph.edge_count()) {
        let trace = path.trace(graph).unwrap();
        let nodes: Vec<NodeId> = path.nodes().cloned().collect();
        for (end, b) in oracle_bind(pattern, &trace, &nodes, 0, &Binding::new()) {
            if end == trace.len() - 1 {
                out.insert((path.to_string(), b));
            }
        }
    }
    out
}

// ---- graphs ----

/// Nodes carry up to two labels and an optional integer `v`; every edge has
/// exactly one label.
pub fn random_graph(rng: &mut impl Rng, max_nodes: usize, max_edges: usize, labels: &[&str]) -> PropertyGraph {
    let n = rng.gen_range(1..=max_nodes);
    let m = rng.gen_range(0..=max_edges);
    let nodes = (0..n)
        .map(|i| {
            let k = rng.gen_range(0..=2);
            let mut ls: Vec<String> = labels.choose_multiple(rng, k).map(|l| l.to_string()).collect();
            ls.sort();
            let mut properties = BTreeMap::new();
            if rng.gen_bool(0.8) {
                properties.insert("v".to_string(), Value::Int(rng.gen_range(0..4)));
            }
            NodeRecord { id: format!("n{i:02}"), labels: ls, properties }
        })
        .collect();
    let edges = (0..m)
        .map(|i| EdgeRecord {
            id: format!("e{i:02}"),
            src: format!("n{:02}", rng.gen_range(0..n)),
            dst: format!("n{:02}", rng.gen_range(0..n)),
            labels: vec![labels[rng.gen_range(0..labels.len())].to_string()],
            properties: BTreeMap::new(),
        })
        .collect();
    PropertyGraph::build(nodes, edges).unwrap()
}

const CONDITIONS: [&str; 5] = ["{false}", "{x.v <= y.v}", "{x != y}", "{x.v = 1}", "{y.v > x.v}"];
const FILTERS: [&str; 3] = ["{}", "{}", "{x.v >= 1}"];

/// A positive constraint with one or two path patterns of minimum length at
/// most 3.
pub fn random_positive_constraint(rng: &mut impl Rng, labels: &[&str]) -> Constraint {
    let shape = PatternShape { labels, negation: false, reverse: true, labelled_loops: true };
    loop {
        let first = random_anchored_pattern_text(rng, shape, "x", "y");
        let mut text = format!("z = {first}");
        if rng.gen_bool(0.35) {
            text += &format!(", w = {}", random_anchored_pattern_text(rng, shape, "y", "v"));
        }
        let filter = FILTERS[rng.gen_range(0..FILTERS.len())];
        let condition = CONDITIONS[rng.gen_range(0..CONDITIONS.len())];
        let c = parse_constraint(&format!("{text}; {filter} => {condition}")).unwrap_or_else(|e| panic!("{text}: {e}"));
        if c.patterns.iter().all(|(_, p)| p.min_match_length() <= 3) {
            return c;
        }
    }
}
