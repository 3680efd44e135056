use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("edge `{edge}` references undeclared node `{node}`")]
    DanglingEndpoint { edge: String, node: String },
    #[error("malformed value for `{object}.{key}`: {reason}")]
    MalformedValue { object: String, key: String, reason: String },
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("invalid graph JSON: {0}")]
    Json(String),
    #[error("{0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstraintError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("invalid constraint at {line}:{column}: {message}")]
    Validation { line: usize, column: usize, message: String },
}

/// A resource cap was hit. Never a silent truncation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LimitError {
    #[error("match limit of {0} exceeded")]
    Matches(usize),
    #[error("path length limit of {0} exceeded")]
    PathLength(usize),
    #[error("run limit of {0} accepting runs per path exceeded")]
    Runs(usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeightError {
    #[error("object `{object}` has no numeric `{key}` property")]
    MissingCustomWeight { object: String, key: String },
    #[error("object `{object}` has non-positive weight {value}")]
    NonPositive { object: String, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("branch-and-bound budget of {0} nodes exhausted")]
    Timeout(usize),
    #[error("LP simplex iteration limit of {0} exceeded")]
    IterationLimit(usize),
    #[error("brute-force oracle supports at most {max} vertices, got {actual}")]
    OracleTooLarge { max: usize, actual: usize },
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error(transparent)]
    Limit(#[from] LimitError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("repair did not converge after {0} iterations")]
    NoProgress(usize),
}

impl PipelineError {
    /// Process exit code: 2 for resource limits and timeouts, 3 for bad input.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Limit(_) | PipelineError::Solver(_) | PipelineError::NoProgress(_) => 2,
            PipelineError::Config(_)
            | PipelineError::Graph(_)
            | PipelineError::Constraint(_)
            | PipelineError::Weight(_) => 3,
        }
    }
}
