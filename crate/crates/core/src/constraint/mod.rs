//! The RGPC constraint language: AST, parser and error-query emission.

mod ast;
mod parser;
mod query;

pub use ast::{CompOp, Constraint, LabelExpr, NodeVar, Operand, PathPattern, PathVar, Predicate, PropertyRef};
pub use parser::{parse_constraint, parse_constraints};
pub use query::{emit_error_queries, emit_error_query};
