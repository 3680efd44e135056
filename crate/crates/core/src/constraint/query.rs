//! Rewriting of constraints into GQL-style error queries. The output is text
//! for inspection or for running against an external database.

use std::fmt::{self, Write as _};

use super::ast::{write_name, CompOp, Constraint, LabelExpr, Operand, PathPattern, Predicate, PropertyRef};
use crate::graph::{format_timestamp, Direction, Value};

/// The error query of `constraint`: every returned row is a violating match.
pub fn emit_error_query(constraint: &Constraint) -> String {
    let mut out = String::new();
    for (i, (z, p)) in constraint.patterns.iter().enumerate() {
        out.push_str(if i == 0 { "MATCH " } else { "      " });
        let _ = write!(out, "{} = ", z.0);
        let _ = write_gql_pattern(&mut out, p);
        if i + 1 < constraint.patterns.len() {
            out.push(',');
        }
        out.push('\n');
    }

    let mut conjuncts: Vec<String> = Vec::new();
    for pred in &constraint.filter {
        for prop in pred.properties() {
            conjuncts.push(format!("{} IS NOT NULL", gql_property(prop)));
        }
        conjuncts.push(gql_predicate(pred));
    }
    if let Some(negation) = negated_condition(&constraint.condition) {
        conjuncts.push(negation);
    }
    if !conjuncts.is_empty() {
        let _ = writeln!(out, "FILTER {}", conjuncts.join("\nAND "));
    }

    let vars: Vec<&str> = constraint.patterns.iter().map(|(z, _)| z.0.as_str()).collect();
    let _ = write!(out, "RETURN {}", vars.join(", "));
    out
}

/// Emits the error queries of all constraints, separated by blank lines.
pub fn emit_error_queries(constraints: &[Constraint]) -> String {
    let mut out = constraints.iter().map(emit_error_query).collect::<Vec<_>>().join(";\n\n");
    if !out.is_empty() {
        out.push_str(";\n");
    }
    out
}

/// `None` when the negated condition is a tautology.
fn negated_condition(condition: &[Predicate]) -> Option<String> {
    if condition.contains(&Predicate::False) {
        return None;
    }
    if condition.is_empty() {
        return Some("FALSE".into());
    }
    let mut disjuncts = Vec::new();
    for pred in condition {
        disjuncts.push(gql_negated_predicate(pred));
    }
    for pred in condition {
        for prop in pred.properties() {
            disjuncts.push(format!("{} IS NULL", gql_property(prop)));
        }
    }
    Some(if disjuncts.len() == 1 {
        disjuncts.pop().expect("one")
    } else {
        format!("({})", disjuncts.join("\n     OR "))
    })
}

fn gql_predicate(p: &Predicate) -> String {
    match p {
        Predicate::False => "FALSE".into(),
        Predicate::VarEq(a, b) => format!("{} = {}", a.0, b.0),
        Predicate::VarNe(a, b) => format!("{} <> {}", a.0, b.0),
        Predicate::Compare { left, op, right } => {
            format!("{} {} {}", gql_property(left), gql_op(*op), gql_operand(right))
        }
    }
}

fn gql_negated_predicate(p: &Predicate) -> String {
    match p {
        Predicate::False => "TRUE".into(),
        Predicate::VarEq(a, b) => format!("{} <> {}", a.0, b.0),
        Predicate::VarNe(a, b) => format!("{} = {}", a.0, b.0),
        Predicate::Compare { left, op, right } => {
            format!("{} {} {}", gql_property(left), gql_op(op.negate()), gql_operand(right))
        }
    }
}

fn gql_op(op: CompOp) -> &'static str {
    match op {
        CompOp::Ne => "<>",
        other => other.symbol(),
    }
}

fn gql_property(p: &PropertyRef) -> String {
    let mut s = format!("{}.", p.var.0);
    let _ = write_name(&mut s, &p.key);
    s
}

fn gql_operand(o: &Operand) -> String {
    match o {
        Operand::Property(p) => gql_property(p),
        Operand::Now => "NOW()".into(),
        Operand::Const(Value::Timestamp(t)) => format!("ZONED_DATETIME('{}')", format_timestamp(t)),
        Operand::Const(Value::String(s)) => format!("'{}'", s.replace('\\', "\\\\").replace('\'', "\\'")),
        Operand::Const(Value::Bool(b)) => if *b { "TRUE" } else { "FALSE" }.into(),
        Operand::Const(v) => v.to_string(),
    }
}

fn write_gql_label(out: &mut String, e: &LabelExpr) -> fmt::Result {
    if *e != LabelExpr::True {
        out.push(':');
        e.write_with(out, " & ", " | ", "!", "%")?;
    }
    Ok(())
}

fn write_gql_pattern(out: &mut String, p: &PathPattern) -> fmt::Result {
    match p {
        PathPattern::Node { var, label } => {
            out.push('(');
            if let Some(v) = var.as_ref().filter(|v| !v.is_internal()) {
                out.push_str(&v.0);
            }
            write_gql_label(out, label)?;
            out.push(')');
        }
        PathPattern::Edge { direction, label } => {
            out.push_str(match direction {
                Direction::Forward => "-[",
                Direction::Reverse => "<-[",
            });
            write_gql_label(out, label)?;
            out.push_str(match direction {
                Direction::Forward => "]->",
                Direction::Reverse => "]-",
            });
        }
        PathPattern::Concat(items) => match p.as_plus() {
            Some(body) => {
                write_gql_group(out, body)?;
                out.push('+');
            }
            None => {
                for item in items {
                    match item {
                        PathPattern::Concat(_) if item.as_plus().is_none() => write_gql_group(out, item)?,
                        _ => write_gql_pattern(out, item)?,
                    }
                }
            }
        },
        PathPattern::Union(..) => write_gql_group(out, p)?,
        PathPattern::Star(c) => {
            write_gql_group(out, c)?;
            out.push('*');
        }
    }
    Ok(())
}

fn write_gql_group(out: &mut String, p: &PathPattern) -> fmt::Result {
    out.push('(');
    match p {
        PathPattern::Union(a, b) => {
            write_gql_pattern(out, a)?;
            out.push_str(" | ");
            write_gql_pattern(out, b)?;
        }
        other => write_gql_pattern(out, other)?,
    }
    out.push(')');
    Ok(())
}
