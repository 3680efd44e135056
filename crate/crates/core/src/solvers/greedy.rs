//! Selection and trimming heuristics.

use super::lp::solve_lp;
use super::{Cover, CoverInstance, SolverLimits, SolverStatus, EPSILON};
use crate::error::SolverError;

/// Picks one of the minimal-weight candidates of a hyperedge. Candidates are
/// vertex indices in ascending order; the result is a position in the slice.
pub type TieBreak<'a> = &'a dyn Fn(&CoverInstance, &[usize]) -> usize;

fn smallest_id(_: &CoverInstance, _: &[usize]) -> usize {
    0
}

/// Greedy cover with the smallest-id tie-break. `approximate` skips trimming.
pub fn naive_greedy(instance: &CoverInstance, approximate: bool) -> Cover {
    naive_greedy_with(instance, approximate, &smallest_id)
}

pub fn naive_greedy_with(instance: &CoverInstance, approximate: bool, tie_break: TieBreak<'_>) -> Cover {
    let all = vec![true; instance.len()];
    greedy(instance, &all, approximate, tie_break)
}

/// Greedy restricted to vertices with a positive value in the LP relaxation.
pub fn lp_guided_greedy(
    instance: &CoverInstance,
    approximate: bool,
    limits: &SolverLimits,
) -> Result<Cover, SolverError> {
    let lp = solve_lp(instance, limits)?;
    let allowed: Vec<bool> = instance.vertices().iter().map(|v| lp.value(v) > EPSILON).collect();
    Ok(greedy(instance, &allowed, approximate, &smallest_id))
}

fn greedy(instance: &CoverInstance, allowed: &[bool], approximate: bool, tie_break: TieBreak<'_>) -> Cover {
    let w = instance.weights();
    let mut selected = vec![false; instance.len()];

    for edge in instance.hyperedges() {
        let mut candidates: Vec<usize> = edge.iter().copied().filter(|&i| allowed[i]).collect();
        if candidates.is_empty() {
            candidates = edge.clone();
        }
        let min = candidates.iter().map(|&i| w[i]).fold(f64::INFINITY, f64::min);
        let minimal: Vec<usize> = candidates.into_iter().filter(|&i| w[i] <= min + EPSILON).collect();
        if minimal.iter().any(|&i| selected[i]) {
            continue;
        }
        let pos = tie_break(instance, &minimal).min(minimal.len() - 1);
        selected[minimal[pos]] = true;
    }

    if approximate {
        return instance.cover_from((0..selected.len()).filter(|&i| selected[i]), SolverStatus::Approximate);
    }

    let mut order: Vec<usize> = (0..selected.len()).filter(|&i| selected[i]).collect();
    order.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));
    for v in order {
        let needed = instance.hyperedges().iter().any(|e| e.contains(&v) && e.iter().all(|&u| u == v || !selected[u]));
        if !needed {
            selected[v] = false;
        }
    }
    instance.cover_from((0..selected.len()).filter(|&i| selected[i]), SolverStatus::Minimal)
}
