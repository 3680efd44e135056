//! Errors, the conflict hypergraph and vertex weights.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LimitError, WeightError};
use crate::graph::{DeletionPlan, EdgeId, NodeId, ObjectId, Path, PropertyGraph, Token, Value};
use crate::matcher::{CompiledConstraint, Match};

/// A deletable object: a node, an edge or a single label of an object.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Vertex {
    Node(NodeId),
    Edge(EdgeId),
    Token(Token),
}

impl Vertex {
    pub fn id(&self) -> &str {
        match self {
            Vertex::Node(n) => n.as_str(),
            Vertex::Edge(e) => e.as_str(),
            Vertex::Token(t) => t.object.as_str(),
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Vertex::Node(_) => 0,
            Vertex::Edge(_) => 1,
            Vertex::Token(_) => 2,
        }
    }

    fn label(&self) -> Option<&str> {
        match self {
            Vertex::Token(t) => Some(&t.label),
            _ => None,
        }
    }
}

impl From<ObjectId> for Vertex {
    fn from(o: ObjectId) -> Self {
        match o {
            ObjectId::Node(n) => Vertex::Node(n),
            ObjectId::Edge(e) => Vertex::Edge(e),
        }
    }
}

/// Ordered by id, then kind, then label.
impl Ord for Vertex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.id().cmp(other.id()).then(self.rank().cmp(&other.rank())).then_with(|| self.label().cmp(&other.label()))
    }
}

impl PartialOrd for Vertex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Vertex::Node(n) => write!(f, "{n}"),
            Vertex::Edge(e) => write!(f, "{e}"),
            Vertex::Token(t) => write!(f, "{t}"),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct VertexRecord {
    kind: String,
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    /// Kind of the labelled object, for tokens.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    object: Option<String>,
}

impl Serialize for Vertex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let (kind, label, object) = match self {
            Vertex::Node(_) => ("node", None, None),
            Vertex::Edge(_) => ("edge", None, None),
            Vertex::Token(t) => {
                let object = match t.object {
                    ObjectId::Node(_) => "node",
                    ObjectId::Edge(_) => "edge",
                };
                ("token", Some(t.label.clone()), Some(object.to_owned()))
            }
        };
        VertexRecord { kind: kind.into(), id: self.id().into(), label, object }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Vertex {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let r = VertexRecord::deserialize(d)?;
        match (r.kind.as_str(), r.label, r.object.as_deref()) {
            ("node", None, None) => Ok(Vertex::Node(NodeId(r.id))),
            ("edge", None, None) => Ok(Vertex::Edge(EdgeId(r.id))),
            ("token", Some(label), Some("node")) => Ok(Vertex::Token(Token::new(ObjectId::Node(NodeId(r.id)), label))),
            ("token", Some(label), Some("edge")) => Ok(Vertex::Token(Token::new(ObjectId::Edge(EdgeId(r.id)), label))),
            (kind, _, _) => Err(D::Error::custom(format!("invalid vertex record of kind `{kind}`"))),
        }
    }
}

pub type Error = BTreeSet<Vertex>;

/// All nodes and edges on the paths of a match.
pub fn topological_error(m: &Match) -> Error {
    m.objects().into_iter().map(Vertex::from).collect()
}

/// One error per combination of accepting runs, each extending the
/// topological error with the essential tokens of its runs.
pub fn token_errors(
    graph: &PropertyGraph,
    compiled: &CompiledConstraint,
    m: &Match,
    max_runs: usize,
) -> Result<Vec<Error>, LimitError> {
    token_errors_with_base(graph, compiled, m, max_runs, topological_error(m))
}

/// Like [`token_errors`] but extending `base` instead of the topological error.
pub fn token_errors_with_base(
    graph: &PropertyGraph,
    compiled: &CompiledConstraint,
    m: &Match,
    max_runs: usize,
    base: Error,
) -> Result<Vec<Error>, LimitError> {
    let mut per_pattern: Vec<Vec<BTreeSet<Token>>> = Vec::new();
    for (automaton, (_, path)) in compiled.automata.iter().zip(&m.paths) {
        let trace = path.trace(graph).expect("matched paths are valid");
        let runs = automaton.accepting_runs(&trace, max_runs)?;
        let mut sets: Vec<BTreeSet<Token>> = Vec::new();
        for run in &runs {
            let tokens = automaton.essential_tokens(graph, path, run);
            if !sets.contains(&tokens) {
                sets.push(tokens);
            }
        }
        per_pattern.push(sets);
    }
    let mut errors = vec![base];
    for sets in per_pattern {
        let mut next = Vec::new();
        for e in &errors {
            for tokens in &sets {
                let mut combined = e.clone();
                combined.extend(tokens.iter().cloned().map(Vertex::Token));
                if !next.contains(&combined) {
                    next.push(combined);
                }
                if next.len() > max_runs {
                    return Err(LimitError::Runs(max_runs));
                }
            }
        }
        errors = next;
    }
    Ok(errors)
}

/// Objects within distance `k` of either endpoint of a path.
fn endpoint_neighbourhood(path: &Path, k: usize) -> Vec<ObjectId> {
    let objects = path.objects();
    let last = objects.len() - 1;
    objects.into_iter().enumerate().filter(|(i, _)| *i <= 2 * k || *i + 2 * k >= last).map(|(_, o)| o).collect()
}

/// The topological `k`-neighbourhood error of a match.
pub fn neighbourhood_error(m: &Match, k: usize) -> Error {
    m.paths.iter().flat_map(|(_, p)| endpoint_neighbourhood(p, k)).map(Vertex::from).collect()
}

/// Up to `2k` edges drawn uniformly from the topological error, plus their
/// endpoints. Errors without edges are returned unchanged.
pub fn sample_error(graph: &PropertyGraph, m: &Match, k: usize, seed: u64) -> Error {
    let full = topological_error(m);
    let edges: Vec<&EdgeId> = full
        .iter()
        .filter_map(|v| match v {
            Vertex::Edge(e) => Some(e),
            _ => None,
        })
        .collect();
    if edges.is_empty() {
        return full;
    }
    let chosen: Vec<&EdgeId> = if edges.len() <= 2 * k {
        edges
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked: Vec<usize> = sample(&mut rng, edges.len(), 2 * k).into_vec();
        picked.sort_unstable();
        picked.into_iter().map(|i| edges[i]).collect()
    };
    let mut out = Error::new();
    for e in chosen {
        let data = graph.edge(e).expect("matched edges exist");
        out.insert(Vertex::Edge(e.clone()));
        out.insert(Vertex::Node(data.source.clone()));
        out.insert(Vertex::Node(data.target.clone()));
    }
    out
}

/// Hyperedges are errors, stored once each in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConflictHypergraph {
    edges: Vec<Error>,
    seen: HashSet<Error>,
}

impl Eq for ConflictHypergraph {}

impl ConflictHypergraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an error; returns false for empty or duplicate errors.
    pub fn add(&mut self, error: Error) -> bool {
        if error.is_empty() || self.seen.contains(&error) {
            return false;
        }
        self.seen.insert(error.clone());
        self.edges.push(error);
        true
    }

    pub fn hyperedges(&self) -> &[Error] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// The union of all hyperedges.
    pub fn vertices(&self) -> BTreeSet<Vertex> {
        self.edges.iter().flatten().cloned().collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.edges).expect("vertices always serialize")
    }
}

impl FromIterator<Error> for ConflictHypergraph {
    fn from_iter<I: IntoIterator<Item = Error>>(iter: I) -> Self {
        let mut h = ConflictHypergraph::new();
        for e in iter {
            h.add(e);
        }
        h
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    Topological,
    Label,
    Custom,
}

/// Positive weights for every node, edge and token of a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightFunction {
    nodes: BTreeMap<NodeId, f64>,
    edges: BTreeMap<EdgeId, f64>,
    token: f64,
}

impl WeightFunction {
    pub fn weight(&self, v: &Vertex) -> f64 {
        match v {
            Vertex::Node(n) => self.nodes.get(n).copied().unwrap_or(1.0),
            Vertex::Edge(e) => self.edges.get(e).copied().unwrap_or(1.0),
            Vertex::Token(_) => self.token,
        }
    }
}

fn custom_weight(graph: &PropertyGraph, object: ObjectId, key: &str) -> Result<f64, WeightError> {
    let value = match graph.property(&object, key) {
        Some(Value::Int(i)) => *i as f64,
        Some(Value::Float(x)) => *x,
        _ => return Err(WeightError::MissingCustomWeight { object: object.as_str().into(), key: key.into() }),
    };
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(WeightError::NonPositive { object: object.as_str().into(), value })
    }
}

/// Weights for the given mode.
///
/// * topological: `w(e) = 1`, `w(n) = deg(n) + 1`
/// * label: `w(t) = 1` for tokens, `w(e) = |labels(e)| + 1`,
///   `w(n) = |labels(n)| + sum of w(e) over incident e + 1`
/// * custom: `w(e) = c(e)`, `w(n) = c(n) + sum of w(e) over incident e`,
///   where `c` reads the numeric property `custom_key`
pub fn compute_weights(
    graph: &PropertyGraph,
    mode: WeightMode,
    custom_key: Option<&str>,
) -> Result<WeightFunction, WeightError> {
    let mut edges = BTreeMap::new();
    for (id, data) in graph.edges() {
        let w = match mode {
            WeightMode::Topological => 1.0,
            WeightMode::Label => data.labels.len() as f64 + 1.0,
            WeightMode::Custom => {
                let key = custom_key.unwrap_or_default();
                custom_weight(graph, ObjectId::Edge(id.clone()), key)?
            }
        };
        edges.insert(id.clone(), w);
    }
    let mut nodes = BTreeMap::new();
    for (id, data) in graph.nodes() {
        let incident: f64 = graph.incident_edges(id).expect("node exists").iter().map(|e| edges[e]).sum();
        let w = match mode {
            WeightMode::Topological => incident + 1.0,
            WeightMode::Label => data.labels.len() as f64 + incident + 1.0,
            WeightMode::Custom => {
                let key = custom_key.unwrap_or_default();
                custom_weight(graph, ObjectId::Node(id.clone()), key)? + incident
            }
        };
        nodes.insert(id.clone(), w);
    }
    Ok(WeightFunction { nodes, edges, token: 1.0 })
}

/// The deletions selected by a set of vertices.
pub fn plan_from_vertices<'a>(vertices: impl IntoIterator<Item = &'a Vertex>) -> DeletionPlan {
    let mut plan = DeletionPlan::default();
    for v in vertices {
        match v {
            Vertex::Node(n) => {
                plan.nodes.insert(n.clone());
            }
            Vertex::Edge(e) => {
                plan.edges.insert(e.clone());
            }
            Vertex::Token(t) => {
                plan.labels.insert(t.clone());
            }
        }
    }
    plan
}
