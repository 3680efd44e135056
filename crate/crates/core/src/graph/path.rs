use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{EdgeId, Label, NodeId, ObjectId, PropertyGraph};
use crate::error::GraphError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Reverse,
}

impl Direction {
    /// The pseudo-label marking the traversal direction in an extended trace.
    pub fn marker(self) -> &'static str {
        match self {
            Direction::Forward => "fw",
            Direction::Reverse => "bw",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Step {
    pub edge: EdgeId,
    pub direction: Direction,
    pub node: NodeId,
}

/// A non-empty alternating sequence of nodes and traversed edges.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Path {
    pub start: NodeId,
    pub steps: Vec<Step>,
}

/// One element of an extended trace: the labels of a node (no direction) or
/// of an edge together with its traversal direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceItem {
    pub labels: BTreeSet<Label>,
    pub direction: Option<Direction>,
}

impl TraceItem {
    pub fn has(&self, label: &str) -> bool {
        self.labels.contains(label)
    }
}

impl fmt::Display for TraceItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<&str> = self.labels.iter().map(String::as_str).collect();
        if let Some(d) = self.direction {
            parts.push(d.marker());
        }
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl Path {
    pub fn single(node: NodeId) -> Self {
        Path { start: node, steps: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn end(&self) -> &NodeId {
        self.steps.last().map(|s| &s.node).unwrap_or(&self.start)
    }

    /// Node at position `i` (0 is the start node).
    pub fn node_at(&self, i: usize) -> &NodeId {
        if i == 0 {
            &self.start
        } else {
            &self.steps[i - 1].node
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = &NodeId> {
        std::iter::once(&self.start).chain(self.steps.iter().map(|s| &s.node))
    }

    pub fn edges(&self) -> impl Iterator<Item = &EdgeId> {
        self.steps.iter().map(|s| &s.edge)
    }

    /// Objects in path order: `v0, e1, v1, ..., en, vn`.
    pub fn objects(&self) -> Vec<ObjectId> {
        let mut out = Vec::with_capacity(2 * self.steps.len() + 1);
        out.push(ObjectId::Node(self.start.clone()));
        for s in &self.steps {
            out.push(ObjectId::Edge(s.edge.clone()));
            out.push(ObjectId::Node(s.node.clone()));
        }
        out
    }

    pub fn push(&mut self, edge: EdgeId, direction: Direction, node: NodeId) {
        self.steps.push(Step { edge, direction, node });
    }

    pub fn is_trail(&self) -> bool {
        let mut seen = HashSet::new();
        self.edges().all(|e| seen.insert(e))
    }

    /// Checks that the path is well formed in `graph`.
    ///
    /// A self-loop is always a forward step; a reverse step over a self-loop is
    /// rejected so that every path has exactly one representation.
    pub fn validate(&self, graph: &PropertyGraph) -> Result<(), GraphError> {
        if !graph.contains_node(&self.start) {
            return Err(GraphError::UnknownObject(self.start.0.clone()));
        }
        let mut prev = &self.start;
        for step in &self.steps {
            let edge = graph.edge(&step.edge).ok_or_else(|| GraphError::UnknownObject(step.edge.0.clone()))?;
            if !graph.contains_node(&step.node) {
                return Err(GraphError::UnknownObject(step.node.0.clone()));
            }
            let ok = match step.direction {
                Direction::Forward => &edge.source == prev && edge.target == step.node,
                Direction::Reverse => !edge.is_self_loop() && &edge.target == prev && edge.source == step.node,
            };
            if !ok {
                return Err(GraphError::InvalidPath(format!(
                    "edge {} does not connect {} to {} in direction {:?}",
                    step.edge, prev, step.node, step.direction
                )));
            }
            prev = &step.node;
        }
        Ok(())
    }

    /// The extended trace: node label sets alternating with edge label sets,
    /// each edge tagged with its traversal direction.
    pub fn trace(&self, graph: &PropertyGraph) -> Result<Vec<TraceItem>, GraphError> {
        self.validate(graph)?;
        let node_labels = |n: &NodeId| graph.node(n).map(|d| d.labels.clone()).unwrap_or_default();
        let mut out = Vec::with_capacity(2 * self.steps.len() + 1);
        out.push(TraceItem { labels: node_labels(&self.start), direction: None });
        for step in &self.steps {
            let labels = graph.edge(&step.edge).map(|d| d.labels.clone()).unwrap_or_default();
            out.push(TraceItem { labels, direction: Some(step.direction) });
            out.push(TraceItem { labels: node_labels(&step.node), direction: None });
        }
        Ok(out)
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}", self.start)?;
        for s in &self.steps {
            match s.direction {
                Direction::Forward => write!(f, ",{}", s.edge)?,
                Direction::Reverse => write!(f, ",~{}", s.edge)?,
            }
            write!(f, ",{}", s.node)?;
        }
        write!(f, ">")
    }
}
