//! Detection and repair of constraint violations in property graphs.

pub mod automata;
pub mod conflict;
pub mod constraint;
pub mod error;
pub mod graph;
pub mod matcher;
pub mod pipeline;
pub mod solvers;
