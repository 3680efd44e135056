//! Symbolic automata for RGPC path patterns.
//!
//! States are split into node states, whose outgoing transitions read the
//! labels of a node, and edge states, whose outgoing transitions read the
//! labels of an edge together with its traversal direction. There are no
//! epsilon transitions and exactly one accepting state.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::constraint::{LabelExpr, NodeVar, PathPattern};
use crate::error::LimitError;
use crate::graph::{Direction, Label, Path, PropertyGraph, Token, TraceItem};

pub const DEFAULT_MAX_RUNS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Node,
    Edge,
}

/// A transition formula. Edge transitions also fix the traversal direction,
/// which plays the role of the `fw`/`bw` pseudo-labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Guard {
    pub direction: Option<Direction>,
    pub label: LabelExpr,
}

impl Guard {
    fn node(label: LabelExpr) -> Self {
        Guard { direction: None, label }
    }

    pub fn accepts(&self, item: &TraceItem) -> bool {
        self.direction == item.direction && self.label.eval(&item.labels)
    }

    /// Whether the guard still holds after removing `label` from the item.
    pub fn accepts_without(&self, item: &TraceItem, label: &str) -> bool {
        self.direction == item.direction && self.label.eval_with(&|l| l != label && item.labels.contains(l))
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.direction, &self.label) {
            (None, l) => write!(f, "{l}"),
            (Some(d), LabelExpr::True) => f.write_str(d.marker()),
            (Some(d), l @ LabelExpr::Or(..)) => write!(f, "{} & ({l})", d.marker()),
            (Some(d), l) => write!(f, "{} & {l}", d.marker()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub from: usize,
    pub guard: Guard,
    pub to: usize,
    /// Node variables bound to the node read by this transition.
    pub vars: Vec<NodeVar>,
}

/// A run, given by the index of the transition taken at each trace position.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Run {
    pub transitions: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgpcAutomaton {
    kinds: Vec<StateKind>,
    transitions: Vec<Transition>,
    initial: usize,
    accepting: usize,
    labels: BTreeSet<Label>,
    outgoing: Vec<Vec<usize>>,
}

struct Fragment {
    init: usize,
    accept: usize,
    trans: Vec<Transition>,
}

struct Builder {
    kinds: Vec<StateKind>,
}

impl Builder {
    fn state(&mut self, kind: StateKind) -> usize {
        self.kinds.push(kind);
        self.kinds.len() - 1
    }

    fn build(&mut self, p: &PathPattern) -> Fragment {
        match p {
            PathPattern::Node { var, label } => {
                let init = self.state(StateKind::Node);
                let accept = self.state(StateKind::Edge);
                let vars = var.iter().cloned().collect();
                Fragment {
                    init,
                    accept,
                    trans: vec![Transition { from: init, guard: Guard::node(label.clone()), to: accept, vars }],
                }
            }
            PathPattern::Edge { direction, label } => {
                let init = self.state(StateKind::Node);
                let s = self.state(StateKind::Edge);
                let t = self.state(StateKind::Node);
                let accept = self.state(StateKind::Edge);
                let top = || Guard::node(LabelExpr::True);
                let trans = vec![
                    Transition { from: init, guard: top(), to: s, vars: vec![] },
                    Transition {
                        from: s,
                        guard: Guard { direction: Some(*direction), label: label.clone() },
                        to: t,
                        vars: vec![],
                    },
                    Transition { from: t, guard: top(), to: accept, vars: vec![] },
                ];
                Fragment { init, accept, trans }
            }
            PathPattern::Concat(items) => {
                if let Some(body) = p.as_plus() {
                    let body = self.build(body);
                    return self.repeat(body, false);
                }
                let mut parts = items.iter().map(|c| self.build(c));
                let first = parts.next().expect("concatenations are non-empty");
                parts.fold(first, concat)
            }
            PathPattern::Union(a, b) => {
                let a = self.build(a);
                let b = self.build(b);
                let init = self.state(StateKind::Node);
                let accept = self.state(StateKind::Edge);
                let mut trans = Vec::new();
                for f in [&a, &b] {
                    for t in &f.trans {
                        let from = if t.from == f.init { init } else { t.from };
                        let to = if t.to == f.accept { accept } else { t.to };
                        trans.push(Transition { from, to, ..t.clone() });
                    }
                }
                Fragment { init, accept, trans: dedup(trans) }
            }
            PathPattern::Star(c) => {
                let body = self.build(c);
                self.repeat(body, true)
            }
        }
    }

    /// Kleene star (`zero = true`) or plus of a fragment that never matches a
    /// single node.
    fn repeat(&mut self, f: Fragment, zero: bool) -> Fragment {
        let init = self.state(StateKind::Node);
        let accept = self.state(StateKind::Edge);
        let mut trans = Vec::new();
        if zero {
            trans.push(Transition { from: init, guard: Guard::node(LabelExpr::True), to: accept, vars: vec![] });
        }
        for t in &f.trans {
            if t.from == f.init {
                trans.push(Transition { from: init, ..t.clone() });
            } else if t.to == f.accept {
                trans.push(Transition { to: accept, ..t.clone() });
            } else {
                trans.push(t.clone());
            }
        }
        trans.extend(seam(&f.trans, f.accept, &f.trans, f.init));
        Fragment { init, accept, trans: dedup(trans) }
    }
}

/// Transitions into `accept` merged with transitions out of `init`.
fn seam(into: &[Transition], accept: usize, out: &[Transition], init: usize) -> Vec<Transition> {
    let mut merged = Vec::new();
    for t1 in into.iter().filter(|t| t.to == accept) {
        for t2 in out.iter().filter(|t| t.from == init) {
            let mut vars = t1.vars.clone();
            vars.extend(t2.vars.iter().cloned());
            vars.sort();
            vars.dedup();
            merged.push(Transition {
                from: t1.from,
                guard: Guard::node(LabelExpr::and(t1.guard.label.clone(), t2.guard.label.clone())),
                to: t2.to,
                vars,
            });
        }
    }
    merged
}

fn concat(a: Fragment, b: Fragment) -> Fragment {
    let merged = seam(&a.trans, a.accept, &b.trans, b.init);
    let mut trans: Vec<Transition> = a.trans.iter().filter(|t| t.to != a.accept).cloned().collect();
    trans.extend(b.trans.iter().filter(|t| t.from != b.init).cloned());
    trans.extend(merged);
    Fragment { init: a.init, accept: b.accept, trans: dedup(trans) }
}

fn dedup(trans: Vec<Transition>) -> Vec<Transition> {
    let mut out: Vec<Transition> = Vec::with_capacity(trans.len());
    for t in trans {
        if !out.contains(&t) {
            out.push(t);
        }
    }
    out
}

/// Compiles a validated path pattern into an automaton accepting exactly the
/// extended traces of the paths it matches.
pub fn compile_automaton(pattern: &PathPattern) -> RgpcAutomaton {
    let mut b = Builder { kinds: Vec::new() };
    let frag = b.build(pattern);

    // Keep states that are reachable and co-reachable, numbered by discovery.
    let n = b.kinds.len();
    let mut fwd = vec![false; n];
    let mut bwd = vec![false; n];
    fwd[frag.init] = true;
    bwd[frag.accept] = true;
    let mut changed = true;
    while changed {
        changed = false;
        for t in &frag.trans {
            if fwd[t.from] && !fwd[t.to] {
                fwd[t.to] = true;
                changed = true;
            }
            if bwd[t.to] && !bwd[t.from] {
                bwd[t.from] = true;
                changed = true;
            }
        }
    }
    let live: Vec<Transition> =
        frag.trans.into_iter().filter(|t| fwd[t.from] && bwd[t.from] && fwd[t.to] && bwd[t.to]).collect();

    let mut index = vec![usize::MAX; n];
    let mut kinds = Vec::new();
    let mut number = |s: usize, kinds: &mut Vec<StateKind>| {
        if index[s] == usize::MAX {
            index[s] = kinds.len();
            kinds.push(b.kinds[s]);
        }
        index[s]
    };
    let initial = number(frag.init, &mut kinds);
    let mut queue = VecDeque::from([frag.init]);
    let mut seen = vec![false; n];
    seen[frag.init] = true;
    while let Some(s) = queue.pop_front() {
        for t in live.iter().filter(|t| t.from == s) {
            number(t.to, &mut kinds);
            if !seen[t.to] {
                seen[t.to] = true;
                queue.push_back(t.to);
            }
        }
    }
    let accepting = number(frag.accept, &mut kinds);
    let mut transitions: Vec<Transition> =
        live.into_iter().map(|t| Transition { from: index[t.from], to: index[t.to], ..t }).collect();
    transitions.sort_by_key(|t| t.from);

    let mut outgoing = vec![Vec::new(); kinds.len()];
    for (i, t) in transitions.iter().enumerate() {
        outgoing[t.from].push(i);
    }
    RgpcAutomaton { kinds, transitions, initial, accepting, labels: pattern.labels(), outgoing }
}

impl RgpcAutomaton {
    pub fn state_count(&self) -> usize {
        self.kinds.len()
    }

    pub fn kind(&self, state: usize) -> StateKind {
        self.kinds[state]
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn accepting(&self) -> usize {
        self.accepting
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Indices of the transitions leaving `state`, in construction order.
    pub fn outgoing(&self, state: usize) -> &[usize] {
        &self.outgoing[state]
    }

    /// Labels mentioned by the pattern (without the direction markers).
    pub fn labels(&self) -> &BTreeSet<Label> {
        &self.labels
    }

    pub fn accepts(&self, trace: &[TraceItem]) -> bool {
        let mut current = BTreeSet::from([self.initial]);
        for item in trace {
            current = current
                .iter()
                .flat_map(|&s| self.outgoing[s].iter())
                .map(|&i| &self.transitions[i])
                .filter(|t| t.guard.accepts(item))
                .map(|t| t.to)
                .collect();
            if current.is_empty() {
                return false;
            }
        }
        current.contains(&self.accepting)
    }

    pub fn accepts_path(&self, graph: &PropertyGraph, path: &Path) -> bool {
        path.trace(graph).map(|t| self.accepts(&t)).unwrap_or(false)
    }

    /// All accepting runs on `trace`, in lexicographic order of transition
    /// indices. More than `max_runs` runs is an error.
    pub fn accepting_runs(&self, trace: &[TraceItem], max_runs: usize) -> Result<Vec<Run>, LimitError> {
        // live[i] holds the states from which the suffix trace[i..] is accepted.
        let n = trace.len();
        let mut live = vec![BTreeSet::new(); n + 1];
        live[n].insert(self.accepting);
        for i in (0..n).rev() {
            let next = &live[i + 1];
            live[i] = self
                .transitions
                .iter()
                .filter(|t| next.contains(&t.to) && t.guard.accepts(&trace[i]))
                .map(|t| t.from)
                .collect();
        }
        let mut runs = Vec::new();
        if n == 0 || !live[0].contains(&self.initial) {
            return Ok(runs);
        }
        let mut stack: Vec<usize> = Vec::new();
        self.collect_runs(trace, &live, self.initial, &mut stack, &mut runs, max_runs)?;
        Ok(runs)
    }

    fn collect_runs(
        &self,
        trace: &[TraceItem],
        live: &[BTreeSet<usize>],
        state: usize,
        stack: &mut Vec<usize>,
        runs: &mut Vec<Run>,
        max_runs: usize,
    ) -> Result<(), LimitError> {
        let i = stack.len();
        if i == trace.len() {
            if runs.len() == max_runs {
                return Err(LimitError::Runs(max_runs));
            }
            runs.push(Run { transitions: stack.clone() });
            return Ok(());
        }
        for &ti in &self.outgoing[state] {
            let t = &self.transitions[ti];
            if live[i + 1].contains(&t.to) && t.guard.accepts(&trace[i]) {
                stack.push(ti);
                self.collect_runs(trace, live, t.to, stack, runs, max_runs)?;
                stack.pop();
            }
        }
        Ok(())
    }

    /// The state sequence `q0 q1 ... qn` of a run.
    pub fn run_states(&self, run: &Run) -> Vec<usize> {
        std::iter::once(self.initial).chain(run.transitions.iter().map(|&i| self.transitions[i].to)).collect()
    }

    /// Tokens on `path` whose removal falsifies the transition of `run` that
    /// reads their object.
    pub fn essential_tokens(&self, graph: &PropertyGraph, path: &Path, run: &Run) -> BTreeSet<Token> {
        let mut out = BTreeSet::new();
        if self.labels.is_empty() {
            return out;
        }
        let Ok(trace) = path.trace(graph) else {
            return out;
        };
        for ((object, item), &ti) in path.objects().into_iter().zip(&trace).zip(&run.transitions) {
            let guard = &self.transitions[ti].guard;
            for label in &item.labels {
                if !guard.accepts_without(item, label) {
                    out.insert(Token::new(object.clone(), label.clone()));
                }
            }
        }
        out
    }

    /// Length of the shortest accepted trace, ignoring guard satisfiability.
    pub fn shortest_trace_len(&self) -> Option<usize> {
        let mut dist = vec![usize::MAX; self.kinds.len()];
        dist[self.initial] = 0;
        let mut queue = VecDeque::from([self.initial]);
        while let Some(s) = queue.pop_front() {
            for &ti in &self.outgoing[s] {
                let to = self.transitions[ti].to;
                if dist[to] == usize::MAX {
                    dist[to] = dist[s] + 1;
                    queue.push_back(to);
                }
            }
        }
        (dist[self.accepting] != usize::MAX).then(|| dist[self.accepting])
    }

    /// Graphviz rendering. Node states are circles, edge states boxes.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph rgpc {\n  rankdir=LR;\n");
        for (s, kind) in self.kinds.iter().enumerate() {
            let shape = match kind {
                StateKind::Node => "circle",
                StateKind::Edge => "box",
            };
            let periphery = if s == self.accepting { ", peripheries=2" } else { "" };
            let _ = writeln!(out, "  q{s} [label=\"{s}\", shape={shape}{periphery}];");
        }
        let _ = writeln!(out, "  start [shape=point];\n  start -> q{};", self.initial);
        for t in &self.transitions {
            let label = t.guard.to_string().replace('"', "\\\"");
            let _ = writeln!(out, "  q{} -> q{} [label=\"{label}\"];", t.from, t.to);
        }
        out.push_str("}\n");
        out
    }
}
