//! Enumeration of violating matches.
//!
//! Each path pattern is evaluated by a depth-first walk over the product of
//! the graph and the pattern's automaton. Bound paths are trails: no edge
//! occurs twice in one path. Path patterns are joined on shared node
//! variables.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use chrono::{DateTime, Utc};

use crate::automata::{compile_automaton, RgpcAutomaton, StateKind};
use crate::constraint::{Constraint, NodeVar, Operand, PathVar, Predicate};
use crate::error::LimitError;
use crate::graph::{Direction, EdgeId, NodeId, ObjectId, Path, PropertyGraph, Value};

pub const DEFAULT_MAX_MATCHES: usize = 1_000_000;
pub const DEFAULT_MAX_PATH_LENGTH: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchLimits {
    pub max_matches: usize,
    pub max_path_length: usize,
}

impl Default for MatchLimits {
    fn default() -> Self {
        MatchLimits { max_matches: DEFAULT_MAX_MATCHES, max_path_length: DEFAULT_MAX_PATH_LENGTH }
    }
}

/// A total assignment of the path and node variables of a constraint.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Match {
    /// Bound paths in pattern order.
    pub paths: Vec<(PathVar, Path)>,
    pub nodes: BTreeMap<NodeVar, NodeId>,
}

impl Match {
    pub fn path(&self, var: &str) -> Option<&Path> {
        self.paths.iter().find(|(z, _)| z.0 == var).map(|(_, p)| p)
    }

    pub fn node(&self, var: &str) -> Option<&NodeId> {
        self.nodes.get(&NodeVar(var.to_owned()))
    }

    /// Nodes and edges on all bound paths.
    pub fn objects(&self) -> BTreeSet<ObjectId> {
        self.paths.iter().flat_map(|(_, p)| p.objects()).collect()
    }
}

/// A constraint together with the automata of its path patterns.
#[derive(Debug, Clone)]
pub struct CompiledConstraint {
    pub constraint: Constraint,
    pub automata: Vec<RgpcAutomaton>,
}

impl CompiledConstraint {
    pub fn new(constraint: &Constraint) -> Self {
        let automata = constraint.patterns.iter().map(|(_, p)| compile_automaton(p)).collect();
        CompiledConstraint { constraint: constraint.clone(), automata }
    }
}

/// Evaluates a predicate. Comparisons involving a missing property, or values
/// of incomparable types, are false.
pub fn eval_predicate(
    graph: &PropertyGraph,
    nodes: &BTreeMap<NodeVar, NodeId>,
    predicate: &Predicate,
    now: DateTime<Utc>,
) -> bool {
    let property =
        |var: &NodeVar, key: &str| -> Option<&Value> { graph.property(&ObjectId::Node(nodes.get(var)?.clone()), key) };
    match predicate {
        Predicate::False => false,
        Predicate::VarEq(a, b) => nodes.get(a).is_some() && nodes.get(a) == nodes.get(b),
        Predicate::VarNe(a, b) => match (nodes.get(a), nodes.get(b)) {
            (Some(x), Some(y)) => x != y,
            _ => false,
        },
        Predicate::Compare { left, op, right } => {
            let Some(l) = property(&left.var, &left.key) else {
                return false;
            };
            let now_value;
            let r = match right {
                Operand::Property(p) => match property(&p.var, &p.key) {
                    Some(v) => v,
                    None => return false,
                },
                Operand::Const(v) => v,
                Operand::Now => {
                    now_value = Value::Timestamp(now);
                    &now_value
                }
            };
            l.compare(r).is_some_and(|o| op.holds(o))
        }
    }
}

/// All matches `mu` of the constraint's pattern with `mu |= F` and not
/// `mu |= C`, sorted.
pub fn find_violating_matches(
    graph: &PropertyGraph,
    constraint: &Constraint,
    now: DateTime<Utc>,
    limits: MatchLimits,
) -> Result<Vec<Match>, LimitError> {
    find_violating_matches_compiled(graph, &CompiledConstraint::new(constraint), now, limits)
}

pub fn find_violating_matches_compiled(
    graph: &PropertyGraph,
    compiled: &CompiledConstraint,
    now: DateTime<Utc>,
    limits: MatchLimits,
) -> Result<Vec<Match>, LimitError> {
    let c = &compiled.constraint;
    let all = find_matches_compiled(graph, compiled, limits)?;
    Ok(all
        .into_iter()
        .filter(|m| {
            c.filter.iter().all(|p| eval_predicate(graph, &m.nodes, p, now))
                && !c.condition.iter().all(|p| eval_predicate(graph, &m.nodes, p, now))
        })
        .collect())
}

/// All matches of the constraint's graph pattern, sorted.
pub fn find_matches(
    graph: &PropertyGraph,
    constraint: &Constraint,
    limits: MatchLimits,
) -> Result<Vec<Match>, LimitError> {
    find_matches_compiled(graph, &CompiledConstraint::new(constraint), limits)
}

pub fn find_matches_compiled(
    graph: &PropertyGraph,
    compiled: &CompiledConstraint,
    limits: MatchLimits,
) -> Result<Vec<Match>, LimitError> {
    let k = compiled.automata.len();
    // Smaller automata first; ties keep pattern order.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&i| compiled.automata[i].transitions().len());

    let mut results = BTreeSet::new();
    let mut paths: Vec<Option<Path>> = vec![None; k];
    let mut bindings = BTreeMap::new();
    join(graph, compiled, &order, 0, &mut paths, &mut bindings, &mut results, limits)?;
    Ok(results.into_iter().collect())
}

#[allow(clippy::too_many_arguments)]
fn join(
    graph: &PropertyGraph,
    compiled: &CompiledConstraint,
    order: &[usize],
    depth: usize,
    paths: &mut Vec<Option<Path>>,
    bindings: &mut BTreeMap<NodeVar, NodeId>,
    results: &mut BTreeSet<Match>,
    limits: MatchLimits,
) -> Result<(), LimitError> {
    if depth == order.len() {
        let m = Match {
            paths: compiled
                .constraint
                .patterns
                .iter()
                .zip(paths.iter())
                .map(|((z, _), p)| (z.clone(), p.clone().expect("all patterns bound")))
                .collect(),
            nodes: bindings.clone(),
        };
        results.insert(m);
        if results.len() > limits.max_matches {
            return Err(LimitError::Matches(limits.max_matches));
        }
        return Ok(());
    }
    let i = order[depth];
    let found = PatternWalk::run(graph, &compiled.automata[i], bindings, limits)?;
    for (path, bound) in found {
        let saved = bindings.clone();
        bindings.extend(bound);
        paths[i] = Some(path);
        join(graph, compiled, order, depth + 1, paths, bindings, results, limits)?;
        paths[i] = None;
        *bindings = saved;
    }
    Ok(())
}

/// Product walk of one automaton over the graph.
struct PatternWalk<'a> {
    graph: &'a PropertyGraph,
    automaton: &'a RgpcAutomaton,
    fixed: &'a BTreeMap<NodeVar, NodeId>,
    limits: MatchLimits,
    used: HashSet<EdgeId>,
    local: BTreeMap<NodeVar, NodeId>,
    out: BTreeSet<(Path, Bindings)>,
}

type Bindings = BTreeMap<NodeVar, NodeId>;

impl<'a> PatternWalk<'a> {
    /// Paths accepted by the automaton from every admissible start node,
    /// with the variables they bind beyond `fixed`.
    fn run(
        graph: &'a PropertyGraph,
        automaton: &'a RgpcAutomaton,
        fixed: &'a BTreeMap<NodeVar, NodeId>,
        limits: MatchLimits,
    ) -> Result<BTreeSet<(Path, Bindings)>, LimitError> {
        let mut walk = PatternWalk {
            graph,
            automaton,
            fixed,
            limits,
            used: HashSet::new(),
            local: BTreeMap::new(),
            out: BTreeSet::new(),
        };
        let starts: Vec<NodeId> = match walk.fixed_start() {
            Some(n) => graph.contains_node(&n).then_some(n).into_iter().collect(),
            None => graph.nodes().map(|(id, _)| id.clone()).collect(),
        };
        for start in starts {
            let mut path = Path::single(start);
            walk.node_step(automaton.initial(), &mut path)?;
        }
        Ok(walk.out)
    }

    /// A start node forced by a variable bound on every initial transition.
    fn fixed_start(&self) -> Option<NodeId> {
        let a = self.automaton;
        let mut common: Option<BTreeSet<&NodeVar>> = None;
        for &ti in a.outgoing(a.initial()) {
            let vars: BTreeSet<&NodeVar> = a.transitions()[ti].vars.iter().collect();
            common = Some(match common {
                None => vars,
                Some(c) => c.intersection(&vars).copied().collect(),
            });
        }
        common?.into_iter().find_map(|v| self.fixed.get(v).cloned())
    }

    fn lookup(&self, var: &NodeVar) -> Option<&NodeId> {
        self.fixed.get(var).or_else(|| self.local.get(var))
    }

    /// At a node state: read the current node.
    fn node_step(&mut self, state: usize, path: &mut Path) -> Result<(), LimitError> {
        debug_assert_eq!(self.automaton.kind(state), StateKind::Node);
        let node = path.end().clone();
        let Some(data) = self.graph.node(&node) else {
            return Ok(());
        };
        for &ti in self.automaton.outgoing(state) {
            let t = &self.automaton.transitions()[ti];
            if !t.guard.label.eval(&data.labels) {
                continue;
            }
            if t.vars.iter().any(|v| self.lookup(v).is_some_and(|n| *n != node)) {
                continue;
            }
            let added: Vec<NodeVar> = t.vars.iter().filter(|v| self.lookup(v).is_none()).cloned().collect();
            for v in &added {
                self.local.insert(v.clone(), node.clone());
            }
            let to = t.to;
            let result = if to == self.automaton.accepting() {
                self.out.insert((path.clone(), self.local.clone()));
                if self.out.len() > self.limits.max_matches {
                    Err(LimitError::Matches(self.limits.max_matches))
                } else {
                    Ok(())
                }
            } else {
                self.edge_step(to, path)
            };
            for v in &added {
                self.local.remove(v);
            }
            result?;
        }
        Ok(())
    }

    /// At an edge state: traverse an unused edge incident to the current node.
    fn edge_step(&mut self, state: usize, path: &mut Path) -> Result<(), LimitError> {
        if path.len() >= self.limits.max_path_length {
            return Err(LimitError::PathLength(self.limits.max_path_length));
        }
        let node = path.end().clone();
        let graph = self.graph;
        let mut moves: Vec<(EdgeId, Direction, NodeId)> = Vec::new();
        for e in graph.outgoing(&node) {
            let d = graph.edge(e).expect("indexed edge");
            moves.push((e.clone(), Direction::Forward, d.target.clone()));
        }
        for e in graph.incoming(&node) {
            let d = graph.edge(e).expect("indexed edge");
            if !d.is_self_loop() {
                moves.push((e.clone(), Direction::Reverse, d.source.clone()));
            }
        }
        for &ti in self.automaton.outgoing(state) {
            let t = &self.automaton.transitions()[ti];
            for (e, dir, next) in &moves {
                if t.guard.direction != Some(*dir) || self.used.contains(e) {
                    continue;
                }
                if !t.guard.label.eval(&graph.edge(e).expect("indexed edge").labels) {
                    continue;
                }
                self.used.insert(e.clone());
                path.push(e.clone(), *dir, next.clone());
                let r = self.node_step(t.to, path);
                path.steps.pop();
                self.used.remove(e);
                r?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::parse_constraint;
    use crate::graph::fixtures::{edge, node, organisation};
    use chrono::TimeZone;

    pub(crate) const RUNNING: &str =
        "z = (x:person)-[:works_on]->(u:task)[-[:references]->(:document)]+(y:document & important); \
        {u.start <= NOW()} => {x.access_level >= y.access_level}";

    fn now() -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2025, 1, 1, 0, 0, 0).unwrap()
    }

    fn nid(s: &str) -> NodeId {
        NodeId::from(s)
    }

    #[test]
    fn running_example_has_two_violations() {
        let g = organisation();
        let c = parse_constraint(RUNNING).unwrap();
        let ms = find_violating_matches(&g, &c, now(), MatchLimits::default()).unwrap();
        let shown: Vec<String> = ms.iter().map(|m| m.paths[0].1.to_string()).collect();
        assert_eq!(shown, vec!["<p1,w1,t1,r1,d1,r3,d3>", "<p1,w1,t1,r1,d1,r4,d3>"]);
        assert_eq!(ms[0].node("x"), Some(&nid("p1")));
        assert_eq!(ms[0].node("u"), Some(&nid("t1")));
        assert_eq!(ms[0].node("y"), Some(&nid("d3")));
    }

    #[test]
    fn filter_before_task_start_hides_violations() {
        let g = organisation();
        let c = parse_constraint(RUNNING).unwrap();
        let early = Utc.with_ymd_and_hms(2020, 1, 1, 0, 0, 0).unwrap();
        assert!(find_violating_matches(&g, &c, early, MatchLimits::default()).unwrap().is_empty());
    }

    #[test]
    fn empty_graph_has_no_matches() {
        let g = PropertyGraph::default();
        let c = parse_constraint("z = (x); {} => {false}").unwrap();
        assert!(find_violating_matches(&g, &c, now(), MatchLimits::default()).unwrap().is_empty());
    }

    #[test]
    fn reference_cycle_matches_once_per_start_node() {
        let g = PropertyGraph::build(
            vec![node("a", &["d"], &[]), node("b", &["d"], &[]), node("c", &["d"], &[])],
            vec![edge("e1", "a", "b", &["r"]), edge("e2", "b", "c", &["r"]), edge("e3", "c", "a", &["r"])],
        )
        .unwrap();
        let c = parse_constraint("z = (x:d)[-[:r]->(:d)]+(x); {} => {false}").unwrap();
        let ms = find_violating_matches(&g, &c, now(), MatchLimits::default()).unwrap();
        assert_eq!(ms.len(), 3);
        assert!(ms.iter().all(|m| m.paths[0].1.len() == 3));
    }

    #[test]
    fn predicates_follow_the_missing_property_rule() {
        let g = organisation();
        let mut b = BTreeMap::new();
        b.insert(NodeVar("x".into()), nid("p1"));
        b.insert(NodeVar("y".into()), nid("d3"));
        let pred = |s: &str| parse_constraint(&format!("z = (x)(y); {{}} => {{{s}}}")).unwrap().condition.remove(0);
        assert!(!eval_predicate(&g, &b, &pred("x.access_level >= y.access_level"), now()));
        assert!(eval_predicate(&g, &b, &pred("x = x"), now()));
        assert!(eval_predicate(&g, &b, &pred("x != y"), now()));
        b.insert(NodeVar("x".into()), nid("t1"));
        assert!(!eval_predicate(&g, &b, &pred("x.edited <= 2020-12-31"), now()));
        assert!(!eval_predicate(&g, &b, &pred("x.edited > 2020-12-31"), now()));
        assert!(eval_predicate(&g, &b, &pred("x.start < NOW()"), now()));
        assert!(!eval_predicate(&g, &b, &pred("false"), now()));
        // Integers and floats compare numerically; other mixes are false.
        b.insert(NodeVar("x".into()), nid("p1"));
        assert!(eval_predicate(&g, &b, &pred("x.access_level < 6.5"), now()));
        assert!(!eval_predicate(&g, &b, &pred("x.access_level != \"6\""), now()));
    }

    #[test]
    fn joins_on_shared_variables() {
        let g = organisation();
        let c = parse_constraint("a = (x:task)-[:references]->(y), b = (y)-[:references]->(w); {} => {false}").unwrap();
        let ms = find_matches(&g, &c, MatchLimits::default()).unwrap();
        // t1 -> d1 -> d3 via r3 or r4.
        assert_eq!(ms.len(), 2);
        assert!(ms.iter().all(|m| m.node("y") == Some(&nid("d1"))));
    }

    #[test]
    fn reverse_traversal() {
        let g = organisation();
        let c = parse_constraint("z = (x:document)<-[:references]-(y:task); {} => {false}").unwrap();
        let ms = find_matches(&g, &c, MatchLimits::default()).unwrap();
        let shown: Vec<String> = ms.iter().map(|m| m.paths[0].1.to_string()).collect();
        assert_eq!(shown, vec!["<d1,~r1,t1>", "<d2,~r2,t1>"]);
    }

    #[test]
    fn self_loops_are_traversed_forward_only() {
        let g = PropertyGraph::build(vec![node("a", &[], &[])], vec![edge("l", "a", "a", &["r"])]).unwrap();
        let fw = parse_constraint("z = (x)-[:r]->(y); {} => {false}").unwrap();
        assert_eq!(find_matches(&g, &fw, MatchLimits::default()).unwrap().len(), 1);
        let bw = parse_constraint("z = (x)<-[:r]-(y); {} => {false}").unwrap();
        assert!(find_matches(&g, &bw, MatchLimits::default()).unwrap().is_empty());
    }

    #[test]
    fn limits_are_errors() {
        let g = organisation();
        let c = parse_constraint("z = (x); {} => {false}").unwrap();
        let tight = MatchLimits { max_matches: 3, ..MatchLimits::default() };
        assert_eq!(find_matches(&g, &c, tight), Err(LimitError::Matches(3)));
        let long = parse_constraint("z = (x)[-[]->]*(y); {} => {false}").unwrap();
        let short = MatchLimits { max_path_length: 1, ..MatchLimits::default() };
        assert_eq!(find_matches(&g, &long, short), Err(LimitError::PathLength(1)));
    }
}
