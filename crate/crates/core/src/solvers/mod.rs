//! Minimum-weight vertex cover over a conflict hypergraph.

mod brute;
mod explicit;
mod greedy;
mod ilp;
mod lp;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use brute::{brute_force_min_cover, BRUTE_FORCE_MAX_VERTICES};
pub use explicit::{incident_map, solve_ilp_explicit};
pub use greedy::{lp_guided_greedy, naive_greedy, naive_greedy_with, TieBreak};
pub use ilp::solve_ilp;
pub use lp::{solve_lp, FractionalSolution};

use crate::conflict::{ConflictHypergraph, Vertex};
use crate::error::WeightError;

/// Feasibility and candidate threshold.
pub const EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverStatus {
    Optimal,
    Minimal,
    Approximate,
    Timeout,
}

/// Budgets for the exact solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverLimits {
    /// Branch-and-bound nodes per connected component.
    pub max_nodes: usize,
    /// Simplex pivots per LP.
    pub max_iterations: usize,
}

impl Default for SolverLimits {
    fn default() -> Self {
        SolverLimits { max_nodes: 200_000, max_iterations: 1_000_000 }
    }
}

/// A set of vertices hitting every hyperedge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cover {
    pub vertices: BTreeSet<Vertex>,
    pub weight: f64,
    pub status: SolverStatus,
}

/// A hypergraph with positive vertex weights, indexed for the solvers.
/// Vertices are sorted; hyperedges keep their input order.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverInstance {
    vertices: Vec<Vertex>,
    weights: Vec<f64>,
    edges: Vec<Vec<usize>>,
}

impl CoverInstance {
    pub fn new(hypergraph: &ConflictHypergraph, weight: impl Fn(&Vertex) -> f64) -> Result<Self, WeightError> {
        let vertices: Vec<Vertex> = hypergraph.vertices().into_iter().collect();
        let mut weights = Vec::with_capacity(vertices.len());
        for v in &vertices {
            let w = weight(v);
            if !(w > 0.0 && w.is_finite()) {
                return Err(WeightError::NonPositive { object: v.to_string(), value: w });
            }
            weights.push(w);
        }
        let edges = hypergraph
            .hyperedges()
            .iter()
            .map(|e| e.iter().map(|v| vertices.binary_search(v).expect("vertex of hyperedge")).collect())
            .collect();
        Ok(CoverInstance { vertices, weights, edges })
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Hyperedges as sorted vertex indices.
    pub fn hyperedges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn index_of(&self, v: &Vertex) -> Option<usize> {
        self.vertices.binary_search(v).ok()
    }

    pub fn weight_of<'a>(&self, vertices: impl IntoIterator<Item = &'a Vertex>) -> f64 {
        vertices.into_iter().filter_map(|v| self.index_of(v)).map(|i| self.weights[i]).sum()
    }

    pub fn is_cover(&self, vertices: &BTreeSet<Vertex>) -> bool {
        self.edges.iter().all(|e| e.iter().any(|&i| vertices.contains(&self.vertices[i])))
    }

    /// A cover is minimal when each member is the only member of some hyperedge.
    pub fn is_minimal_cover(&self, vertices: &BTreeSet<Vertex>) -> bool {
        self.is_cover(vertices)
            && vertices.iter().all(|v| {
                self.edges.iter().any(|e| {
                    let mut hit = e.iter().map(|&i| &self.vertices[i]).filter(|u| vertices.contains(*u));
                    hit.next() == Some(v) && hit.next().is_none()
                })
            })
    }

    fn cover_from(&self, selected: impl IntoIterator<Item = usize>, status: SolverStatus) -> Cover {
        let mut weight = 0.0;
        let mut vertices = BTreeSet::new();
        for i in selected {
            if vertices.insert(self.vertices[i].clone()) {
                weight += self.weights[i];
            }
        }
        Cover { vertices, weight, status }
    }

    fn program(&self) -> BinaryProgram {
        BinaryProgram {
            cost: self.weights.clone(),
            rows: self.edges.iter().map(|e| Row { coeffs: e.iter().map(|&i| (i, 1.0)).collect(), rhs: 1.0 }).collect(),
            bounded: false,
        }
    }
}

/// `coeffs · x ≥ rhs`
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

/// `min cost · x` over `x ∈ {0,1}ⁿ` subject to the rows, with `cost ≥ 0`.
/// `bounded` adds `x ≤ 1` to the relaxation, which plain covering rows do not
/// need.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct BinaryProgram {
    pub cost: Vec<f64>,
    pub rows: Vec<Row>,
    pub bounded: bool,
}

impl BinaryProgram {
    fn has_integral_costs(&self) -> bool {
        self.cost.iter().all(|c| (c - c.round()).abs() < 1e-9)
    }

    fn is_feasible(&self, x: &[bool]) -> bool {
        self.rows.iter().all(|r| {
            let lhs: f64 = r.coeffs.iter().filter(|(j, _)| x[*j]).map(|(_, a)| a).sum();
            lhs >= r.rhs - EPSILON
        })
    }
}

/// Splits a program into independent parts. Each part lists its variables
/// in ascending order and is renumbered to `0..k`. Variables without rows
/// are left out.
pub(crate) fn program_components(program: &BinaryProgram) -> Vec<(Vec<usize>, BinaryProgram)> {
    let n = program.cost.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for row in &program.rows {
        if let Some(&(first, _)) = row.coeffs.first() {
            for &(j, _) in &row.coeffs[1..] {
                let (a, b) = (find(&mut parent, first), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut in_row = vec![false; n];
    for row in &program.rows {
        for &(j, _) in &row.coeffs {
            in_row[j] = true;
        }
    }

    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut group_of_root = vec![usize::MAX; n];
    for j in (0..n).filter(|&j| in_row[j]) {
        let root = find(&mut parent, j);
        if group_of_root[root] == usize::MAX {
            group_of_root[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[group_of_root[root]].push(j);
    }

    let mut local = vec![usize::MAX; n];
    let mut parts: Vec<(Vec<usize>, BinaryProgram)> = groups
        .into_iter()
        .map(|vars| {
            for (k, &j) in vars.iter().enumerate() {
                local[j] = k;
            }
            let cost = vars.iter().map(|&j| program.cost[j]).collect();
            (vars, BinaryProgram { cost, rows: Vec::new(), bounded: program.bounded })
        })
        .collect();
    let mut part_of = vec![usize::MAX; n];
    for (p, (vars, _)) in parts.iter().enumerate() {
        for &j in vars {
            part_of[j] = p;
        }
    }
    for row in &program.rows {
        match row.coeffs.first() {
            Some(&(first, _)) => {
                let coeffs = row.coeffs.iter().map(|&(j, a)| (local[j], a)).collect();
                parts[part_of[first]].1.rows.push(Row { coeffs, rhs: row.rhs });
            }
            None if row.rhs > EPSILON => {
                // An empty unsatisfiable row; keep it so the solver reports it.
                parts.push((Vec::new(), BinaryProgram { cost: Vec::new(), rows: vec![row.clone()], bounded: false }));
            }
            None => {}
        }
    }
    parts
}
