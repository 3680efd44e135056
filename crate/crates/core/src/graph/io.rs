use std::collections::BTreeMap;
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};

use super::{Key, Label, PropertyGraph, Value};
use crate::error::GraphError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: String,
    #[serde(default)]
    pub labels: Vec<Label>,
    #[serde(default)]
    pub properties: BTreeMap<Key, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub id: String,
    pub src: String,
    pub dst: String,
    #[serde(default)]
    pub labels: Vec<Label>,
    #[serde(default)]
    pub properties: BTreeMap<Key, Value>,
}

/// The on-disk JSON shape of a property graph.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    #[serde(default)]
    pub nodes: Vec<NodeRecord>,
    #[serde(default)]
    pub edges: Vec<EdgeRecord>,
}

impl PropertyGraph {
    pub fn from_document(doc: GraphDocument) -> Result<Self, GraphError> {
        PropertyGraph::build(doc.nodes, doc.edges)
    }

    /// Canonical document: records sorted by id, labels sorted.
    pub fn to_document(&self) -> GraphDocument {
        GraphDocument {
            nodes: self
                .nodes()
                .map(|(id, d)| NodeRecord {
                    id: id.0.clone(),
                    labels: d.labels.iter().cloned().collect(),
                    properties: d.properties.clone(),
                })
                .collect(),
            edges: self
                .edges()
                .map(|(id, d)| EdgeRecord {
                    id: id.0.clone(),
                    src: d.source.0.clone(),
                    dst: d.target.0.clone(),
                    labels: d.labels.iter().cloned().collect(),
                    properties: d.properties.clone(),
                })
                .collect(),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self, GraphError> {
        let doc: GraphDocument = serde_json::from_str(s).map_err(|e| GraphError::Json(e.to_string()))?;
        PropertyGraph::from_document(doc)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("graph documents always serialize")
    }

    pub fn load(path: impl AsRef<FsPath>) -> Result<Self, GraphError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| GraphError::Io(format!("{}: {e}", path.display())))?;
        PropertyGraph::from_json_str(&text)
    }

    pub fn save(&self, path: impl AsRef<FsPath>) -> Result<(), GraphError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json_string() + "\n")
            .map_err(|e| GraphError::Io(format!("{}: {e}", path.display())))
    }
}
