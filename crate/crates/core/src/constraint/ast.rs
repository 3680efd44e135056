use std::collections::BTreeSet;
use std::fmt;
use std::fmt::Write as _;

use crate::graph::{Direction, Label, Value};

/// A propositional formula over labels. `True` is the unrestricted pattern.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LabelExpr {
    True,
    Label(Label),
    Not(Box<LabelExpr>),
    And(Box<LabelExpr>, Box<LabelExpr>),
    Or(Box<LabelExpr>, Box<LabelExpr>),
}

impl LabelExpr {
    pub fn label(l: impl Into<Label>) -> Self {
        LabelExpr::Label(l.into())
    }

    /// Conjunction that drops `True` operands.
    pub fn and(a: LabelExpr, b: LabelExpr) -> LabelExpr {
        match (a, b) {
            (LabelExpr::True, x) | (x, LabelExpr::True) => x,
            (a, b) => LabelExpr::And(Box::new(a), Box::new(b)),
        }
    }

    pub fn or(a: LabelExpr, b: LabelExpr) -> LabelExpr {
        LabelExpr::Or(Box::new(a), Box::new(b))
    }

    pub fn negate(a: LabelExpr) -> LabelExpr {
        LabelExpr::Not(Box::new(a))
    }

    /// Evaluates the formula with `has(l)` deciding whether label `l` is set.
    pub fn eval_with(&self, has: &dyn Fn(&str) -> bool) -> bool {
        match self {
            LabelExpr::True => true,
            LabelExpr::Label(l) => has(l),
            LabelExpr::Not(a) => !a.eval_with(has),
            LabelExpr::And(a, b) => a.eval_with(has) && b.eval_with(has),
            LabelExpr::Or(a, b) => a.eval_with(has) || b.eval_with(has),
        }
    }

    pub fn eval(&self, labels: &BTreeSet<Label>) -> bool {
        self.eval_with(&|l| labels.contains(l))
    }

    pub fn collect_labels(&self, out: &mut BTreeSet<Label>) {
        match self {
            LabelExpr::True => {}
            LabelExpr::Label(l) => {
                out.insert(l.clone());
            }
            LabelExpr::Not(a) => a.collect_labels(out),
            LabelExpr::And(a, b) | LabelExpr::Or(a, b) => {
                a.collect_labels(out);
                b.collect_labels(out);
            }
        }
    }

    pub fn has_negation(&self) -> bool {
        match self {
            LabelExpr::True | LabelExpr::Label(_) => false,
            LabelExpr::Not(_) => true,
            LabelExpr::And(a, b) | LabelExpr::Or(a, b) => a.has_negation() || b.has_negation(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            LabelExpr::Or(..) => 0,
            LabelExpr::And(..) => 1,
            LabelExpr::Not(_) => 2,
            LabelExpr::True | LabelExpr::Label(_) => 3,
        }
    }

    /// Writes the formula with the given infix symbols.
    pub(crate) fn write_with(&self, f: &mut dyn fmt::Write, and: &str, or: &str, not: &str, top: &str) -> fmt::Result {
        let child = |f: &mut dyn fmt::Write, c: &LabelExpr, min: u8| -> fmt::Result {
            if c.precedence() < min {
                f.write_char('(')?;
                c.write_with(f, and, or, not, top)?;
                f.write_char(')')
            } else {
                c.write_with(f, and, or, not, top)
            }
        };
        match self {
            LabelExpr::True => f.write_str(top),
            LabelExpr::Label(l) => write_name(f, l),
            LabelExpr::Not(a) => {
                f.write_str(not)?;
                child(f, a, 2)
            }
            LabelExpr::And(a, b) => {
                child(f, a, 1)?;
                f.write_str(and)?;
                child(f, b, 2)
            }
            LabelExpr::Or(a, b) => {
                child(f, a, 0)?;
                f.write_str(or)?;
                child(f, b, 1)
            }
        }
    }
}

impl fmt::Display for LabelExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_with(f, " & ", " | ", "!", "%")
    }
}

pub(crate) fn is_plain_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Writes a label or key, backtick-quoting it when it is not a plain identifier.
pub(crate) fn write_name(f: &mut dyn fmt::Write, s: &str) -> fmt::Result {
    if is_plain_identifier(s) && !is_keyword(s) {
        f.write_str(s)
    } else {
        write!(f, "`{}`", s.replace('`', "``"))
    }
}

pub(crate) fn is_keyword(s: &str) -> bool {
    matches!(s, "true" | "false" | "NOW")
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeVar(pub String);

impl NodeVar {
    /// Internal variables are generated for anonymous node patterns and can
    /// never be written in source text.
    pub fn is_internal(&self) -> bool {
        self.0.starts_with('#')
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PathVar(pub String);

impl PathVar {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PathVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PathPattern {
    Node { var: Option<NodeVar>, label: LabelExpr },
    Edge { direction: Direction, label: LabelExpr },
    Concat(Vec<PathPattern>),
    Union(Box<PathPattern>, Box<PathPattern>),
    Star(Box<PathPattern>),
}

impl PathPattern {
    pub fn node(var: Option<&str>, label: LabelExpr) -> Self {
        PathPattern::Node { var: var.map(|v| NodeVar(v.to_owned())), label }
    }

    pub fn edge(direction: Direction, label: LabelExpr) -> Self {
        PathPattern::Edge { direction, label }
    }

    /// `p+` as `p p*`.
    pub fn plus(p: PathPattern) -> Self {
        PathPattern::Concat(vec![p.clone(), PathPattern::Star(Box::new(p))])
    }

    /// Minimum number of edges on any path this pattern matches.
    pub fn min_match_length(&self) -> usize {
        match self {
            PathPattern::Node { .. } => 0,
            PathPattern::Edge { .. } => 1,
            PathPattern::Concat(cs) => cs.iter().map(PathPattern::min_match_length).sum(),
            PathPattern::Union(a, b) => a.min_match_length().min(b.min_match_length()),
            PathPattern::Star(_) => 0,
        }
    }

    /// Node variables in order of first occurrence.
    pub fn node_vars(&self) -> Vec<NodeVar> {
        let mut out = Vec::new();
        self.visit_vars(&mut |v| {
            if !out.contains(v) {
                out.push(v.clone());
            }
        });
        out
    }

    fn visit_vars(&self, f: &mut dyn FnMut(&NodeVar)) {
        match self {
            PathPattern::Node { var: Some(v), .. } => f(v),
            PathPattern::Node { var: None, .. } | PathPattern::Edge { .. } => {}
            PathPattern::Concat(cs) => cs.iter().for_each(|c| c.visit_vars(f)),
            PathPattern::Union(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            PathPattern::Star(c) => c.visit_vars(f),
        }
    }

    pub fn has_node_vars(&self) -> bool {
        let mut any = false;
        self.visit_vars(&mut |_| any = true);
        any
    }

    pub fn label_exprs(&self) -> Vec<&LabelExpr> {
        let mut out = Vec::new();
        self.collect_exprs(&mut out);
        out
    }

    fn collect_exprs<'a>(&'a self, out: &mut Vec<&'a LabelExpr>) {
        match self {
            PathPattern::Node { label, .. } | PathPattern::Edge { label, .. } => out.push(label),
            PathPattern::Concat(cs) => cs.iter().for_each(|c| c.collect_exprs(out)),
            PathPattern::Union(a, b) => {
                a.collect_exprs(out);
                b.collect_exprs(out);
            }
            PathPattern::Star(c) => c.collect_exprs(out),
        }
    }

    /// Labels mentioned anywhere in the pattern.
    pub fn labels(&self) -> BTreeSet<Label> {
        let mut out = BTreeSet::new();
        for e in self.label_exprs() {
            e.collect_labels(&mut out);
        }
        out
    }

    /// Structural equality ignoring internal node variables.
    pub fn same_shape(&self, other: &PathPattern) -> bool {
        use PathPattern::*;
        match (self, other) {
            (Node { var: v1, label: l1 }, Node { var: v2, label: l2 }) => {
                let user = |v: &Option<NodeVar>| v.as_ref().filter(|v| !v.is_internal()).cloned();
                l1 == l2 && user(v1) == user(v2)
            }
            (Edge { direction: d1, label: l1 }, Edge { direction: d2, label: l2 }) => d1 == d2 && l1 == l2,
            (Concat(a), Concat(b)) => a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.same_shape(y)),
            (Union(a1, b1), Union(a2, b2)) => a1.same_shape(a2) && b1.same_shape(b2),
            (Star(a), Star(b)) => a.same_shape(b),
            _ => false,
        }
    }

    /// If this is `p p*`, returns `p`.
    pub fn as_plus(&self) -> Option<&PathPattern> {
        match self {
            PathPattern::Concat(cs) if cs.len() == 2 => match &cs[1] {
                PathPattern::Star(inner) if cs[0].same_shape(inner) => Some(&cs[0]),
                _ => None,
            },
            _ => None,
        }
    }

    /// Checks the structural restrictions: no node variables below union or
    /// repetition, and no repetition of a pattern that matches a length-0 path.
    pub fn validate(&self) -> Result<(), String> {
        match self {
            PathPattern::Node { .. } | PathPattern::Edge { .. } => Ok(()),
            PathPattern::Concat(cs) => {
                if cs.is_empty() {
                    return Err("empty concatenation".into());
                }
                cs.iter().try_for_each(PathPattern::validate)
            }
            PathPattern::Union(a, b) => {
                if self.has_node_vars() {
                    return Err("node variables are not allowed inside a union".into());
                }
                a.validate()?;
                b.validate()
            }
            PathPattern::Star(c) => {
                if c.has_node_vars() {
                    return Err("node variables are not allowed inside a repetition".into());
                }
                if c.min_match_length() == 0 {
                    return Err("a repeated pattern must not match a path of length 0".into());
                }
                c.validate()
            }
        }
    }
}

/// Canonical printer. `parse(print(p)) == p`.
impl fmt::Display for PathPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathPattern::Concat(cs) => write_sequence(f, cs),
            other => write_item(f, other),
        }
    }
}

fn write_sequence(f: &mut fmt::Formatter<'_>, items: &[PathPattern]) -> fmt::Result {
    items.iter().try_for_each(|c| write_item(f, c))
}

fn write_item(f: &mut fmt::Formatter<'_>, p: &PathPattern) -> fmt::Result {
    match p {
        PathPattern::Node { var, label } => {
            f.write_char('(')?;
            if let Some(v) = var.as_ref().filter(|v| !v.is_internal()) {
                f.write_str(&v.0)?;
            }
            if *label != LabelExpr::True {
                f.write_char(':')?;
                write!(f, "{label}")?;
            }
            f.write_char(')')
        }
        PathPattern::Edge { direction, label } => {
            let (open, close) = match direction {
                Direction::Forward => ("-[", "]->"),
                Direction::Reverse => ("<-[", "]-"),
            };
            f.write_str(open)?;
            if *label != LabelExpr::True {
                write!(f, ":{label}")?;
            }
            f.write_str(close)
        }
        PathPattern::Concat(_) => match p.as_plus() {
            Some(body) => {
                write_grouped(f, body)?;
                f.write_char('+')
            }
            None => write_grouped(f, p),
        },
        PathPattern::Union(..) => write_grouped(f, p),
        PathPattern::Star(c) => {
            write_grouped(f, c)?;
            f.write_char('*')
        }
    }
}

fn write_grouped(f: &mut fmt::Formatter<'_>, p: &PathPattern) -> fmt::Result {
    f.write_char('[')?;
    match p {
        PathPattern::Concat(cs) => write_sequence(f, cs)?,
        PathPattern::Union(a, b) => {
            write_alternative(f, a)?;
            f.write_str(" | ")?;
            write_alternative(f, b)?;
        }
        other => write_item(f, other)?,
    }
    f.write_char(']')
}

fn write_alternative(f: &mut fmt::Formatter<'_>, p: &PathPattern) -> fmt::Result {
    match p {
        PathPattern::Concat(cs) if p.as_plus().is_none() => write_sequence(f, cs),
        PathPattern::Union(..) => write_grouped(f, p),
        other => write_item(f, other),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompOp {
    Eq,
    Ne,
    Le,
    Ge,
    Lt,
    Gt,
}

impl CompOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CompOp::Eq => "=",
            CompOp::Ne => "!=",
            CompOp::Le => "<=",
            CompOp::Ge => ">=",
            CompOp::Lt => "<",
            CompOp::Gt => ">",
        }
    }

    /// The operator with its operands swapped: `a op b` iff `b op.flip() a`.
    pub fn flip(self) -> CompOp {
        match self {
            CompOp::Le => CompOp::Ge,
            CompOp::Ge => CompOp::Le,
            CompOp::Lt => CompOp::Gt,
            CompOp::Gt => CompOp::Lt,
            other => other,
        }
    }

    pub fn negate(self) -> CompOp {
        match self {
            CompOp::Eq => CompOp::Ne,
            CompOp::Ne => CompOp::Eq,
            CompOp::Le => CompOp::Gt,
            CompOp::Ge => CompOp::Lt,
            CompOp::Lt => CompOp::Ge,
            CompOp::Gt => CompOp::Le,
        }
    }

    pub fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CompOp::Eq => ord == Equal,
            CompOp::Ne => ord != Equal,
            CompOp::Le => ord != Greater,
            CompOp::Ge => ord != Less,
            CompOp::Lt => ord == Less,
            CompOp::Gt => ord == Greater,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PropertyRef {
    pub var: NodeVar,
    pub key: String,
}

impl fmt::Display for PropertyRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.", self.var)?;
        write_name(f, &self.key)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Property(PropertyRef),
    Const(Value),
    /// The current timestamp, fixed when a pipeline run starts.
    Now,
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Property(p) => write!(f, "{p}"),
            Operand::Const(v) => write!(f, "{v}"),
            Operand::Now => f.write_str("NOW()"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Predicate {
    False,
    VarEq(NodeVar, NodeVar),
    VarNe(NodeVar, NodeVar),
    Compare { left: PropertyRef, op: CompOp, right: Operand },
}

impl Predicate {
    pub fn vars(&self) -> Vec<&NodeVar> {
        match self {
            Predicate::False => vec![],
            Predicate::VarEq(a, b) | Predicate::VarNe(a, b) => vec![a, b],
            Predicate::Compare { left, right, .. } => {
                let mut v = vec![&left.var];
                if let Operand::Property(p) = right {
                    v.push(&p.var);
                }
                v
            }
        }
    }

    /// Property references in left-to-right order.
    pub fn properties(&self) -> Vec<&PropertyRef> {
        match self {
            Predicate::Compare { left, right: Operand::Property(r), .. } => vec![left, r],
            Predicate::Compare { left, .. } => vec![left],
            _ => vec![],
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::False => f.write_str("false"),
            Predicate::VarEq(a, b) => write!(f, "{a} = {b}"),
            Predicate::VarNe(a, b) => write!(f, "{a} != {b}"),
            Predicate::Compare { left, op, right } => write!(f, "{left} {} {right}", op.symbol()),
        }
    }
}

/// `z1 = p1, ..., zk = pk; F => C`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub patterns: Vec<(PathVar, PathPattern)>,
    pub filter: Vec<Predicate>,
    pub condition: Vec<Predicate>,
}

impl Constraint {
    /// All node variables, including internal ones, in order of occurrence.
    pub fn node_vars(&self) -> Vec<NodeVar> {
        let mut out: Vec<NodeVar> = Vec::new();
        for (_, p) in &self.patterns {
            for v in p.node_vars() {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        out
    }

    /// True iff no label expression in the pattern uses negation.
    pub fn is_positive(&self) -> bool {
        self.patterns.iter().all(|(_, p)| p.label_exprs().iter().all(|e| !e.has_negation()))
    }

    pub fn mentions_labels(&self) -> bool {
        self.patterns.iter().any(|(_, p)| !p.labels().is_empty())
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.patterns.is_empty() {
            return Err("a constraint needs at least one path pattern".into());
        }
        let mut path_vars = BTreeSet::new();
        for (z, p) in &self.patterns {
            if !path_vars.insert(z.0.as_str()) {
                return Err(format!("duplicate path variable `{z}`"));
            }
            p.validate()?;
        }
        let node_vars = self.node_vars();
        if let Some(v) = node_vars.iter().find(|v| path_vars.contains(v.0.as_str())) {
            return Err(format!("`{v}` is used both as a path and a node variable"));
        }
        for pred in self.filter.iter().chain(&self.condition) {
            for v in pred.vars() {
                if v.is_internal() || !node_vars.contains(v) {
                    return Err(format!("predicate `{pred}` uses unknown node variable `{v}`"));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (z, p)) in self.patterns.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{z} = {p}")?;
        }
        f.write_str("; ")?;
        write_predicates(f, &self.filter)?;
        f.write_str(" => ")?;
        write_predicates(f, &self.condition)
    }
}

fn write_predicates(f: &mut fmt::Formatter<'_>, preds: &[Predicate]) -> fmt::Result {
    f.write_char('{')?;
    for (i, p) in preds.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{p}")?;
    }
    f.write_char('}')
}
