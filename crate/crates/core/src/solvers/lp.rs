//! Linear programs of the form `min c·x` subject to `Ax ≥ b`, `x ≥ 0`, with
//! `c ≥ 0`. They are solved through their dual `max b·y` subject to
//! `Aᵀy ≤ c`, `y ≥ 0`, for which the slack basis is feasible, using a dense
//! tableau and Bland's rule.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{program_components, BinaryProgram, CoverInstance, SolverLimits, EPSILON};
use crate::conflict::Vertex;
use crate::error::SolverError;

/// An optimal point of the LP relaxation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionalSolution {
    pub assignment: BTreeMap<Vertex, f64>,
    pub objective: f64,
}

impl FractionalSolution {
    pub fn value(&self, v: &Vertex) -> f64 {
        self.assignment.get(v).copied().unwrap_or(0.0)
    }

    /// True when every value is within tolerance of 0 or 1.
    pub fn is_integral(&self) -> bool {
        self.assignment.values().all(|x| x.min(1.0 - x).abs() <= EPSILON)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

/// Solves the relaxation of `program`, adding `x ≤ 1` rows when it is bounded.
pub(crate) fn minimize(program: &BinaryProgram, max_iterations: usize) -> Result<LpSolution, SolverError> {
    let n = program.cost.len();
    let mut rows: Vec<(Vec<(usize, f64)>, f64)> = program.rows.iter().map(|r| (r.coeffs.clone(), r.rhs)).collect();
    if program.bounded {
        rows.extend((0..n).map(|j| (vec![(j, -1.0)], -1.0)));
    }
    if rows.is_empty() || n == 0 {
        if rows.iter().any(|(_, rhs)| *rhs > EPSILON) {
            return Err(SolverError::Infeasible);
        }
        return Ok(LpSolution { x: vec![0.0; n], objective: 0.0 });
    }

    let m = rows.len();
    let width = m + n + 1;
    // One tableau row per primal variable; columns are the dual variables,
    // then the slacks, then the right-hand side.
    let mut t = vec![0.0; n * width];
    for (i, (coeffs, _)) in rows.iter().enumerate() {
        for &(j, a) in coeffs {
            t[j * width + i] += a;
        }
    }
    for j in 0..n {
        t[j * width + m + j] = 1.0;
        t[j * width + width - 1] = program.cost[j];
    }
    let mut obj = vec![0.0; width];
    for (i, (_, rhs)) in rows.iter().enumerate() {
        obj[i] = -rhs;
    }
    let mut basis: Vec<usize> = (m..m + n).collect();

    let mut iterations = 0;
    while let Some(enter) = (0..m + n).find(|&k| obj[k] < -EPSILON) {
        iterations += 1;
        if iterations > max_iterations {
            return Err(SolverError::IterationLimit(max_iterations));
        }
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..n {
            let a = t[r * width + enter];
            if a <= EPSILON {
                continue;
            }
            let ratio = t[r * width + width - 1] / a;
            leave = match leave {
                None => Some((r, ratio)),
                Some((best, q)) => {
                    if ratio < q - 1e-12 || (ratio <= q + 1e-12 && basis[r] < basis[best]) {
                        Some((r, ratio))
                    } else {
                        Some((best, q))
                    }
                }
            };
        }
        let Some((pivot_row, _)) = leave else {
            return Err(SolverError::Infeasible);
        };
        pivot(&mut t, &mut obj, width, pivot_row, enter);
        basis[pivot_row] = enter;
    }

    let x: Vec<f64> = (0..n).map(|j| obj[m + j].max(0.0)).collect();
    Ok(LpSolution { x, objective: obj[width - 1] })
}

fn pivot(t: &mut [f64], obj: &mut [f64], width: usize, row: usize, col: usize) {
    let p = t[row * width + col];
    for k in 0..width {
        t[row * width + k] /= p;
    }
    let pivot_row: Vec<f64> = t[row * width..(row + 1) * width].to_vec();
    let rows = t.len() / width;
    for r in (0..rows).filter(|&r| r != row) {
        let f = t[r * width + col];
        if f != 0.0 {
            for (k, pk) in pivot_row.iter().enumerate() {
                t[r * width + k] -= f * pk;
            }
        }
    }
    let f = obj[col];
    if f != 0.0 {
        for (k, pk) in pivot_row.iter().enumerate() {
            obj[k] -= f * pk;
        }
    }
}

/// The LP relaxation of the minimum-weight vertex cover problem.
pub fn solve_lp(instance: &CoverInstance, limits: &SolverLimits) -> Result<FractionalSolution, SolverError> {
    let program = instance.program();
    let mut x = vec![0.0; instance.len()];
    for (vars, sub) in program_components(&program) {
        let sol = minimize(&sub, limits.max_iterations)?;
        for (local, &global) in vars.iter().enumerate() {
            x[global] = sol.x[local].min(1.0);
        }
    }
    let objective = x.iter().zip(instance.weights()).map(|(x, w)| x * w).sum();
    let assignment = instance.vertices().iter().cloned().zip(x).collect();
    Ok(FractionalSolution { assignment, objective })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::tests::{instance, running_instance};
    use crate::solvers::Row;

    fn lp(instance: &CoverInstance) -> FractionalSolution {
        solve_lp(instance, &SolverLimits::default()).unwrap()
    }

    #[test]
    fn running_example_relaxation_is_one() {
        let inst = running_instance();
        let sol = lp(&inst);
        assert!((sol.objective - 1.0).abs() < 1e-6);
        for e in inst.hyperedges() {
            let s: f64 = e.iter().map(|&i| sol.value(&inst.vertices()[i])).sum();
            assert!(s >= 1.0 - 1e-6);
        }
    }

    #[test]
    fn single_pair() {
        let sol = lp(&instance(&[("a", 1.0), ("b", 1.0)], &[&["a", "b"]]));
        assert!((sol.objective - 1.0).abs() < 1e-6);
    }

    #[test]
    fn empty_instance() {
        let sol = lp(&instance(&[], &[]));
        assert_eq!(sol.objective, 0.0);
        assert!(sol.assignment.is_empty());
    }

    #[test]
    fn odd_cycle_is_fractional() {
        let inst = instance(&[("a", 1.0), ("b", 1.0), ("c", 1.0)], &[&["a", "b"], &["b", "c"], &["a", "c"]]);
        let sol = lp(&inst);
        assert!((sol.objective - 1.5).abs() < 1e-6);
        assert!(!sol.is_integral());
    }

    #[test]
    fn weights_steer_the_relaxation() {
        let inst = instance(&[("a", 5.0), ("b", 1.0), ("c", 1.0)], &[&["a", "b"], &["a", "c"]]);
        let sol = lp(&inst);
        assert!((sol.objective - 2.0).abs() < 1e-6);
        assert!(sol.value(&inst.vertices()[0]) < 1e-6);
    }

    #[test]
    fn bounded_general_rows() {
        // min x0 + x1 subject to x0 - x1 >= 0.5 and x1 >= 0.25
        let program = BinaryProgram {
            cost: vec![1.0, 1.0],
            rows: vec![Row { coeffs: vec![(0, 1.0), (1, -1.0)], rhs: 0.5 }, Row { coeffs: vec![(1, 1.0)], rhs: 0.25 }],
            bounded: true,
        };
        let sol = minimize(&program, 1000).unwrap();
        assert!((sol.objective - 1.0).abs() < 1e-6, "{sol:?}");
        assert!((sol.x[0] - 0.75).abs() < 1e-6);
    }

    #[test]
    fn infeasible_rows() {
        let program =
            BinaryProgram { cost: vec![1.0], rows: vec![Row { coeffs: vec![(0, 1.0)], rhs: 2.0 }], bounded: true };
        assert_eq!(minimize(&program, 1000), Err(SolverError::Infeasible));
    }
}
