//! In-memory property graphs, paths, traces and deletion plans.
//!
//! A [`PropertyGraph`] is immutable once built. Repairs never mutate a graph in
//! place; [`PropertyGraph::apply_deletions`] produces a new subgraph instead.

mod io;
mod path;
mod value;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GraphError;

pub use io::{EdgeRecord, GraphDocument, NodeRecord};
pub use path::{Direction, Path, Step, TraceItem};
pub use value::{format_timestamp, parse_timestamp, Value};

pub type Label = String;
pub type Key = String;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub String);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub String);

impl NodeId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl EdgeId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_owned())
    }
}

impl From<&str> for EdgeId {
    fn from(s: &str) -> Self {
        EdgeId(s.to_owned())
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A node or an edge.
///
/// Ordered by id string first so that tie-breaks are lexicographic on ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "lowercase")]
pub enum ObjectId {
    Node(NodeId),
    Edge(EdgeId),
}

impl ObjectId {
    pub fn as_str(&self) -> &str {
        match self {
            ObjectId::Node(n) => n.as_str(),
            ObjectId::Edge(e) => e.as_str(),
        }
    }

    fn kind_rank(&self) -> u8 {
        match self {
            ObjectId::Node(_) => 0,
            ObjectId::Edge(_) => 1,
        }
    }
}

impl Ord for ObjectId {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.as_str().cmp(other.as_str()).then(self.kind_rank().cmp(&other.kind_rank()))
    }
}

impl PartialOrd for ObjectId {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A single label on a single object: the unit of a label deletion.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Token {
    pub object: ObjectId,
    pub label: Label,
}

impl Token {
    pub fn new(object: ObjectId, label: impl Into<Label>) -> Self {
        Token { object, label: label.into() }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.object, self.label)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NodeData {
    pub labels: BTreeSet<Label>,
    pub properties: BTreeMap<Key, Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeData {
    pub source: NodeId,
    pub target: NodeId,
    pub labels: BTreeSet<Label>,
    pub properties: BTreeMap<Key, Value>,
}

impl EdgeData {
    pub fn is_self_loop(&self) -> bool {
        self.source == self.target
    }
}

/// Objects selected for deletion from a source graph.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DeletionPlan {
    pub nodes: BTreeSet<NodeId>,
    pub edges: BTreeSet<EdgeId>,
    pub labels: BTreeSet<Token>,
}

impl DeletionPlan {
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.edges.is_empty() && self.labels.is_empty()
    }

    pub fn len(&self) -> usize {
        self.nodes.len() + self.edges.len() + self.labels.len()
    }

    pub fn extend(&mut self, other: DeletionPlan) {
        self.nodes.extend(other.nodes);
        self.edges.extend(other.edges);
        self.labels.extend(other.labels);
    }

    pub fn is_subset(&self, other: &DeletionPlan) -> bool {
        self.nodes.is_subset(&other.nodes) && self.edges.is_subset(&other.edges) && self.labels.is_subset(&other.labels)
    }
}

/// A directed multigraph whose nodes and edges carry label sets and typed
/// properties.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PropertyGraph {
    nodes: BTreeMap<NodeId, NodeData>,
    edges: BTreeMap<EdgeId, EdgeData>,
    outgoing: BTreeMap<NodeId, BTreeSet<EdgeId>>,
    incoming: BTreeMap<NodeId, BTreeSet<EdgeId>>,
}

impl PropertyGraph {
    /// Builds a graph from node and edge records, validating ids, endpoints
    /// and property values.
    pub fn build(nodes: Vec<NodeRecord>, edges: Vec<EdgeRecord>) -> Result<Self, GraphError> {
        let mut graph = PropertyGraph::default();
        for record in nodes {
            let id = NodeId(record.id);
            check_values(id.as_str(), &record.properties)?;
            if graph.nodes.contains_key(&id) {
                return Err(GraphError::DuplicateId(id.0));
            }
            graph.outgoing.insert(id.clone(), BTreeSet::new());
            graph.incoming.insert(id.clone(), BTreeSet::new());
            graph
                .nodes
                .insert(id, NodeData { labels: record.labels.into_iter().collect(), properties: record.properties });
        }
        for record in edges {
            let id = EdgeId(record.id);
            check_values(id.as_str(), &record.properties)?;
            if graph.edges.contains_key(&id) || graph.nodes.contains_key(&NodeId(id.0.clone())) {
                return Err(GraphError::DuplicateId(id.0));
            }
            let source = NodeId(record.src);
            let target = NodeId(record.dst);
            for endpoint in [&source, &target] {
                if !graph.nodes.contains_key(endpoint) {
                    return Err(GraphError::DanglingEndpoint { edge: id.0.clone(), node: endpoint.0.clone() });
                }
            }
            graph.outgoing.get_mut(&source).expect("checked").insert(id.clone());
            graph.incoming.get_mut(&target).expect("checked").insert(id.clone());
            graph.edges.insert(
                id,
                EdgeData { source, target, labels: record.labels.into_iter().collect(), properties: record.properties },
            );
        }
        Ok(graph)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn object_count(&self) -> usize {
        self.nodes.len() + self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&NodeId, &NodeData)> {
        self.nodes.iter()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&EdgeId, &EdgeData)> {
        self.edges.iter()
    }

    pub fn node(&self, id: &NodeId) -> Option<&NodeData> {
        self.nodes.get(id)
    }

    pub fn edge(&self, id: &EdgeId) -> Option<&EdgeData> {
        self.edges.get(id)
    }

    pub fn contains_node(&self, id: &NodeId) -> bool {
        self.nodes.contains_key(id)
    }

    pub fn contains_edge(&self, id: &EdgeId) -> bool {
        self.edges.contains_key(id)
    }

    pub fn contains_object(&self, id: &ObjectId) -> bool {
        match id {
            ObjectId::Node(n) => self.contains_node(n),
            ObjectId::Edge(e) => self.contains_edge(e),
        }
    }

    pub fn labels(&self, id: &ObjectId) -> Option<&BTreeSet<Label>> {
        match id {
            ObjectId::Node(n) => self.nodes.get(n).map(|d| &d.labels),
            ObjectId::Edge(e) => self.edges.get(e).map(|d| &d.labels),
        }
    }

    pub fn property(&self, id: &ObjectId, key: &str) -> Option<&Value> {
        match id {
            ObjectId::Node(n) => self.nodes.get(n)?.properties.get(key),
            ObjectId::Edge(e) => self.edges.get(e)?.properties.get(key),
        }
    }

    pub fn outgoing(&self, node: &NodeId) -> impl Iterator<Item = &EdgeId> {
        self.outgoing.get(node).into_iter().flatten()
    }

    pub fn incoming(&self, node: &NodeId) -> impl Iterator<Item = &EdgeId> {
        self.incoming.get(node).into_iter().flatten()
    }

    /// All edges having `node` as source or target. Self-loops appear once.
    pub fn incident_edges(&self, node: &NodeId) -> Result<BTreeSet<EdgeId>, GraphError> {
        if !self.contains_node(node) {
            return Err(GraphError::UnknownObject(node.0.clone()));
        }
        Ok(self.outgoing(node).chain(self.incoming(node)).cloned().collect())
    }

    pub fn degree(&self, node: &NodeId) -> usize {
        self.incident_edges(node).map(|s| s.len()).unwrap_or(0)
    }

    /// All `(object, label)` pairs of the graph.
    pub fn tokens(&self) -> impl Iterator<Item = Token> + '_ {
        let node_tokens = self
            .nodes
            .iter()
            .flat_map(|(id, d)| d.labels.iter().map(move |l| Token::new(ObjectId::Node(id.clone()), l.clone())));
        let edge_tokens = self
            .edges
            .iter()
            .flat_map(|(id, d)| d.labels.iter().map(move |l| Token::new(ObjectId::Edge(id.clone()), l.clone())));
        node_tokens.chain(edge_tokens)
    }

    /// Checks that every object referenced by `plan` exists in this graph.
    pub fn validate_plan(&self, plan: &DeletionPlan) -> Result<(), GraphError> {
        for n in &plan.nodes {
            if !self.contains_node(n) {
                return Err(GraphError::UnknownObject(n.0.clone()));
            }
        }
        for e in &plan.edges {
            if !self.contains_edge(e) {
                return Err(GraphError::UnknownObject(e.0.clone()));
            }
        }
        for t in &plan.labels {
            match self.labels(&t.object) {
                Some(ls) if ls.contains(&t.label) => {}
                _ => return Err(GraphError::UnknownObject(t.to_string())),
            }
        }
        Ok(())
    }

    /// Returns the subgraph obtained by deleting the planned objects.
    ///
    /// Deleting a node also deletes every incident edge. Deleting a token
    /// removes exactly that label; the object itself stays.
    pub fn apply_deletions(&self, plan: &DeletionPlan) -> PropertyGraph {
        let mut out = PropertyGraph::default();
        for (id, data) in &self.nodes {
            if plan.nodes.contains(id) {
                continue;
            }
            let mut data = data.clone();
            data.labels.retain(|l| !plan.labels.contains(&Token::new(ObjectId::Node(id.clone()), l.clone())));
            out.outgoing.insert(id.clone(), BTreeSet::new());
            out.incoming.insert(id.clone(), BTreeSet::new());
            out.nodes.insert(id.clone(), data);
        }
        for (id, data) in &self.edges {
            if plan.edges.contains(id) || !out.nodes.contains_key(&data.source) || !out.nodes.contains_key(&data.target)
            {
                continue;
            }
            let mut data = data.clone();
            data.labels.retain(|l| !plan.labels.contains(&Token::new(ObjectId::Edge(id.clone()), l.clone())));
            out.outgoing.get_mut(&data.source).expect("kept").insert(id.clone());
            out.incoming.get_mut(&data.target).expect("kept").insert(id.clone());
            out.edges.insert(id.clone(), data);
        }
        out
    }

    /// True iff `self` is a subgraph of `other`: every node, edge, label and
    /// property of `self` is present in `other` with the same endpoints and
    /// values.
    pub fn is_subgraph_of(&self, other: &PropertyGraph) -> bool {
        let nodes_ok = self.nodes.iter().all(|(id, d)| match other.nodes.get(id) {
            Some(o) => d.labels.is_subset(&o.labels) && props_contained(&d.properties, &o.properties),
            None => false,
        });
        let edges_ok = self.edges.iter().all(|(id, d)| match other.edges.get(id) {
            Some(o) => {
                d.source == o.source
                    && d.target == o.target
                    && d.labels.is_subset(&o.labels)
                    && props_contained(&d.properties, &o.properties)
            }
            None => false,
        });
        nodes_ok && edges_ok
    }

    /// Re-inserts a node (with the given data) without any edges.
    pub(crate) fn with_node(&self, id: NodeId, data: NodeData) -> PropertyGraph {
        let mut out = self.clone();
        out.outgoing.entry(id.clone()).or_default();
        out.incoming.entry(id.clone()).or_default();
        out.nodes.insert(id, data);
        out
    }

    /// Re-inserts an edge. Returns `None` if an endpoint is missing.
    pub(crate) fn with_edge(&self, id: EdgeId, data: EdgeData) -> Option<PropertyGraph> {
        if !self.contains_node(&data.source) || !self.contains_node(&data.target) {
            return None;
        }
        let mut out = self.clone();
        out.outgoing.get_mut(&data.source)?.insert(id.clone());
        out.incoming.get_mut(&data.target)?.insert(id.clone());
        out.edges.insert(id, data);
        Some(out)
    }

    /// Re-adds a single label. Returns `None` if the object is missing.
    pub(crate) fn with_label(&self, token: &Token) -> Option<PropertyGraph> {
        let mut out = self.clone();
        let labels = match &token.object {
            ObjectId::Node(n) => &mut out.nodes.get_mut(n)?.labels,
            ObjectId::Edge(e) => &mut out.edges.get_mut(e)?.labels,
        };
        labels.insert(token.label.clone());
        Some(out)
    }
}

fn props_contained(small: &BTreeMap<Key, Value>, big: &BTreeMap<Key, Value>) -> bool {
    small.iter().all(|(k, v)| big.get(k) == Some(v))
}

fn check_values(id: &str, props: &BTreeMap<Key, Value>) -> Result<(), GraphError> {
    for (key, value) in props {
        if !value.is_finite() {
            return Err(GraphError::MalformedValue {
                object: id.to_owned(),
                key: key.clone(),
                reason: "non-finite float".into(),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use chrono::{TimeZone, Utc};

    fn props(pairs: &[(&str, Value)]) -> BTreeMap<Key, Value> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    pub fn node(id: &str, labels: &[&str], p: &[(&str, Value)]) -> NodeRecord {
        NodeRecord { id: id.into(), labels: labels.iter().map(|s| s.to_string()).collect(), properties: props(p) }
    }

    pub fn edge(id: &str, src: &str, dst: &str, labels: &[&str]) -> EdgeRecord {
        EdgeRecord {
            id: id.into(),
            src: src.into(),
            dst: dst.into(),
            labels: labels.iter().map(|s| s.to_string()).collect(),
            properties: BTreeMap::new(),
        }
    }

    /// The five-node organisation fragment used throughout the tests.
    pub fn organisation() -> PropertyGraph {
        let start = Utc.with_ymd_and_hms(2024, 3, 1, 9, 0, 0).unwrap();
        PropertyGraph::build(
            vec![
                node("p1", &["person"], &[("name", Value::String("Alex".into())), ("access_level", Value::Int(6))]),
                node("t1", &["task"], &[("start", Value::Timestamp(start))]),
                node("d1", &["document", "important"], &[("access_level", Value::Int(5)), ("#pages", Value::Int(12))]),
                node("d2", &["document"], &[("access_level", Value::Int(3))]),
                node("d3", &["document", "important"], &[("access_level", Value::Int(7)), ("#pages", Value::Int(40))]),
            ],
            vec![
                edge("w1", "p1", "t1", &["works_on"]),
                edge("r1", "t1", "d1", &["references"]),
                edge("r2", "t1", "d2", &["references"]),
                edge("r3", "d1", "d3", &["references"]),
                edge("r4", "d1", "d3", &["references"]),
            ],
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn nid(s: &str) -> NodeId {
        NodeId::from(s)
    }

    fn eid(s: &str) -> EdgeId {
        EdgeId::from(s)
    }

    #[test]
    fn builds_the_organisation_fragment() {
        let g = organisation();
        assert_eq!(g.node_count(), 5);
        assert_eq!(g.edge_count(), 5);
        let d3 = g.node(&nid("d3")).unwrap();
        assert!(d3.labels.contains("document") && d3.labels.contains("important"));
    }

    #[test]
    fn empty_graph() {
        let g = PropertyGraph::build(vec![], vec![]).unwrap();
        assert!(g.is_empty());
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn rejects_dangling_and_duplicate_ids() {
        let err = PropertyGraph::build(vec![node("a", &[], &[])], vec![edge("e", "a", "zz", &[])]);
        assert!(matches!(err, Err(GraphError::DanglingEndpoint { ref node, .. }) if node == "zz"));
        let dup = PropertyGraph::build(vec![node("a", &[], &[]), node("a", &[], &[])], vec![]);
        assert!(matches!(dup, Err(GraphError::DuplicateId(_))));
        let clash = PropertyGraph::build(vec![node("a", &[], &[])], vec![edge("a", "a", "a", &[])]);
        assert!(matches!(clash, Err(GraphError::DuplicateId(_))));
    }

    #[test]
    fn rejects_non_finite_floats() {
        let err = PropertyGraph::build(vec![node("a", &[], &[("x", Value::Float(f64::INFINITY))])], vec![]);
        assert!(matches!(err, Err(GraphError::MalformedValue { .. })));
    }

    #[test]
    fn incident_edges_of_d1() {
        let g = organisation();
        let expected: BTreeSet<EdgeId> = ["r1", "r3", "r4"].iter().map(|s| eid(s)).collect();
        assert_eq!(g.incident_edges(&nid("d1")).unwrap(), expected);
        assert!(g.incident_edges(&nid("nope")).is_err());
    }

    #[test]
    fn isolated_node_and_self_loop() {
        let g = PropertyGraph::build(vec![node("a", &[], &[]), node("b", &[], &[])], vec![edge("e", "a", "a", &[])])
            .unwrap();
        assert!(g.incident_edges(&nid("b")).unwrap().is_empty());
        assert_eq!(g.incident_edges(&nid("a")).unwrap().len(), 1);
    }

    #[test]
    fn deleting_a_node_cascades_to_incident_edges() {
        let g = organisation();
        let plan = DeletionPlan { nodes: [nid("d3")].into(), ..Default::default() };
        let h = g.apply_deletions(&plan);
        assert!(!h.contains_edge(&eid("r3")));
        assert!(!h.contains_edge(&eid("r4")));
        assert!(h.contains_edge(&eid("r1")));
        assert!(h.is_subgraph_of(&g));
    }

    #[test]
    fn empty_plan_is_identity() {
        let g = organisation();
        assert_eq!(g.apply_deletions(&DeletionPlan::default()), g);
    }

    #[test]
    fn token_deletion_keeps_the_object() {
        let g = organisation();
        let plan =
            DeletionPlan { labels: [Token::new(ObjectId::Edge(eid("r1")), "references")].into(), ..Default::default() };
        let h = g.apply_deletions(&plan);
        let r1 = h.edge(&eid("r1")).unwrap();
        assert!(r1.labels.is_empty());
        assert_eq!(r1.source, nid("t1"));
        assert!(h.is_subgraph_of(&g));
        assert!(!g.is_subgraph_of(&h));
    }

    #[test]
    fn validate_plan_rejects_unknown_label() {
        let g = organisation();
        let plan =
            DeletionPlan { labels: [Token::new(ObjectId::Node(nid("d2")), "important")].into(), ..Default::default() };
        assert!(g.validate_plan(&plan).is_err());
    }

    #[test]
    fn object_ids_order_by_id_string() {
        let a = ObjectId::Edge(eid("r1"));
        let b = ObjectId::Edge(eid("w1"));
        let c = ObjectId::Node(nid("d3"));
        let mut v = vec![b.clone(), a.clone(), c.clone()];
        v.sort();
        assert_eq!(v, vec![c, a, b]);
    }
}
