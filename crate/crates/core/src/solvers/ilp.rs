//! Branch and bound over the LP relaxation.

use super::lp::minimize;
use super::{program_components, BinaryProgram, Cover, CoverInstance, Row, SolverLimits, SolverStatus, EPSILON};
use crate::error::SolverError;

/// An exact minimum-weight cover. Among optimal covers the one with the
/// lexicographically smallest sorted vertex sequence is returned.
pub fn solve_ilp(instance: &CoverInstance, limits: &SolverLimits) -> Result<Cover, SolverError> {
    let x = solve_binary(&instance.program(), limits)?;
    Ok(instance.cover_from((0..x.len()).filter(|&i| x[i]), SolverStatus::Optimal))
}

/// Optimal 0/1 assignment, lexicographically largest in variable order among
/// the optima, solved per independent component.
pub(crate) fn solve_binary(program: &BinaryProgram, limits: &SolverLimits) -> Result<Vec<bool>, SolverError> {
    let mut x = vec![false; program.cost.len()];
    for (vars, part) in program_components(program) {
        let local = solve_component(&part, limits)?;
        for (k, &j) in vars.iter().enumerate() {
            x[j] = local[k];
        }
    }
    Ok(x)
}

fn solve_component(program: &BinaryProgram, limits: &SolverLimits) -> Result<Vec<bool>, SolverError> {
    let n = program.cost.len();
    let mut search = Search::new(program, limits);
    let mut fixed = vec![None; n];
    search.branch(&mut fixed)?;
    let (optimum, mut incumbent) = search.best.take().ok_or(SolverError::Infeasible)?;

    for j in 0..n {
        if incumbent[j] {
            fixed[j] = Some(true);
            continue;
        }
        fixed[j] = Some(true);
        search.target = Some(optimum);
        search.best = None;
        search.branch(&mut fixed)?;
        match search.best.take() {
            Some((_, x)) => incumbent = x,
            None => fixed[j] = Some(false),
        }
    }
    Ok(incumbent)
}

struct Search<'a> {
    program: &'a BinaryProgram,
    limits: &'a SolverLimits,
    integral: bool,
    nodes: usize,
    /// When set, stop at the first assignment within this cost.
    target: Option<f64>,
    best: Option<(f64, Vec<bool>)>,
}

enum Reduced {
    Infeasible,
    Program { free: Vec<usize>, program: BinaryProgram, fixed_cost: f64 },
}

impl<'a> Search<'a> {
    fn new(program: &'a BinaryProgram, limits: &'a SolverLimits) -> Self {
        Search { program, limits, integral: program.has_integral_costs(), nodes: 0, target: None, best: None }
    }

    fn done(&self) -> bool {
        self.target.is_some() && self.best.is_some()
    }

    fn reduce(&self, fixed: &[Option<bool>]) -> Reduced {
        let mut local = vec![usize::MAX; fixed.len()];
        let free: Vec<usize> = (0..fixed.len()).filter(|&j| fixed[j].is_none()).collect();
        for (k, &j) in free.iter().enumerate() {
            local[j] = k;
        }
        let mut rows = Vec::new();
        for row in &self.program.rows {
            let mut rhs = row.rhs;
            let mut coeffs = Vec::new();
            for &(j, a) in &row.coeffs {
                match fixed[j] {
                    Some(true) => rhs -= a,
                    Some(false) => {}
                    None => coeffs.push((local[j], a)),
                }
            }
            if rhs <= EPSILON && coeffs.iter().all(|(_, a)| *a >= 0.0) {
                continue;
            }
            let reachable: f64 = coeffs.iter().map(|(_, a)| a.max(0.0)).sum();
            if reachable < rhs - EPSILON {
                return Reduced::Infeasible;
            }
            rows.push(Row { coeffs, rhs });
        }
        let fixed_cost = (0..fixed.len()).filter(|&j| fixed[j] == Some(true)).map(|j| self.program.cost[j]).sum();
        let cost = free.iter().map(|&j| self.program.cost[j]).collect();
        Reduced::Program { free, program: BinaryProgram { cost, rows, bounded: self.program.bounded }, fixed_cost }
    }

    fn branch(&mut self, fixed: &mut Vec<Option<bool>>) -> Result<(), SolverError> {
        self.nodes += 1;
        if self.nodes > self.limits.max_nodes {
            return Err(SolverError::Timeout(self.limits.max_nodes));
        }
        let Reduced::Program { free, program, fixed_cost } = self.reduce(fixed) else {
            return Ok(());
        };
        let lp = match minimize(&program, self.limits.max_iterations) {
            Ok(lp) => lp,
            Err(SolverError::Infeasible) => return Ok(()),
            Err(e) => return Err(e),
        };
        let mut bound = fixed_cost + lp.objective;
        if self.integral {
            bound = (bound - EPSILON).ceil();
        }
        match (self.target, &self.best) {
            (Some(target), _) if bound > target + EPSILON => return Ok(()),
            (None, Some((best, _))) if bound >= best - EPSILON => return Ok(()),
            _ => {}
        }

        let mut pick: Option<(usize, f64)> = None;
        for (k, &v) in lp.x.iter().enumerate() {
            let frac = v.min(1.0 - v);
            if frac > EPSILON && pick.is_none_or(|(_, f)| frac > f + 1e-12) {
                pick = Some((k, frac));
            }
        }

        if pick.is_none() {
            let mut x: Vec<bool> = fixed.iter().map(|f| *f == Some(true)).collect();
            for (k, &j) in free.iter().enumerate() {
                x[j] = lp.x[k] > 0.5;
            }
            if self.program.is_feasible(&x) {
                let cost: f64 = (0..x.len()).filter(|&j| x[j]).map(|j| self.program.cost[j]).sum();
                let better = match (self.target, &self.best) {
                    (Some(target), _) => cost <= target + EPSILON,
                    (None, Some((best, _))) => cost < best - EPSILON,
                    (None, None) => true,
                };
                if better {
                    self.best = Some((cost, x));
                }
                return Ok(());
            }
            // Rounding failed numerically; branch on the first free variable.
            pick = Some((0, 0.0));
        }

        let j = free[pick.expect("branch variable").0];
        for value in [true, false] {
            fixed[j] = Some(value);
            let r = self.branch(fixed);
            fixed[j] = None;
            r?;
            if self.done() {
                break;
            }
        }
        Ok(())
    }
}
