//! The unweighted cover program in which deleting a node requires deleting
//! each of its incident edges explicitly.

use std::collections::{BTreeMap, BTreeSet};

use super::ilp::solve_binary;
use super::{BinaryProgram, Cover, Row, SolverLimits, SolverStatus};
use crate::conflict::{ConflictHypergraph, Vertex};
use crate::error::SolverError;
use crate::graph::{EdgeId, NodeId, PropertyGraph};

/// Incident edges of every node vertex of the hypergraph.
pub fn incident_map(graph: &PropertyGraph, hypergraph: &ConflictHypergraph) -> BTreeMap<NodeId, BTreeSet<EdgeId>> {
    hypergraph
        .vertices()
        .into_iter()
        .filter_map(|v| match v {
            Vertex::Node(n) => {
                let edges = graph.incident_edges(&n).unwrap_or_default();
                Some((n, edges))
            }
            _ => None,
        })
        .collect()
}

/// Minimises the number of deleted objects subject to the cover rows and
/// `|E_n|·x_n ≤ Σ x_e` for every node `n`. The weight of the result is its
/// size.
pub fn solve_ilp_explicit(
    hypergraph: &ConflictHypergraph,
    incident: &BTreeMap<NodeId, BTreeSet<EdgeId>>,
    limits: &SolverLimits,
) -> Result<Cover, SolverError> {
    let mut vertices = hypergraph.vertices();
    for v in vertices.clone() {
        if let Vertex::Node(n) = v {
            for e in incident.get(&n).into_iter().flatten() {
                vertices.insert(Vertex::Edge(e.clone()));
            }
        }
    }
    let vertices: Vec<Vertex> = vertices.into_iter().collect();
    let index = |v: &Vertex| vertices.binary_search(v).expect("collected vertex");

    let mut rows: Vec<Row> = hypergraph
        .hyperedges()
        .iter()
        .map(|e| Row { coeffs: e.iter().map(|v| (index(v), 1.0)).collect(), rhs: 1.0 })
        .collect();
    for (i, v) in vertices.iter().enumerate() {
        let Vertex::Node(n) = v else { continue };
        let edges = incident.get(n).map(|s| s.len()).unwrap_or(0);
        if edges == 0 {
            continue;
        }
        let mut coeffs = vec![(i, -(edges as f64))];
        coeffs.extend(incident[n].iter().map(|e| (index(&Vertex::Edge(e.clone())), 1.0)));
        rows.push(Row { coeffs, rhs: 0.0 });
    }

    let program = BinaryProgram { cost: vec![1.0; vertices.len()], rows, bounded: true };
    let x = solve_binary(&program, limits)?;
    let chosen: BTreeSet<Vertex> = vertices.into_iter().zip(x).filter(|(_, x)| *x).map(|(v, _)| v).collect();
    Ok(Cover { weight: chosen.len() as f64, vertices: chosen, status: SolverStatus::Optimal })
}
