use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degree {0} is outside [0, 1]")]
    DegreeOutOfRange(f64),
    #[error("graded scale needs n >= 1")]
    InvalidScale,
    #[error("typicality operator may not be nested: {0}")]
    NestedTypicality(String),
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown concept name `{0}`")]
    UnknownConcept(String),
    #[error("unknown role name `{0}`")]
    UnknownRole(String),
    #[error("unknown individual `{0}`")]
    UnknownIndividual(String),
    #[error("unknown domain element `{0}`")]
    UnknownElement(String),
    #[error("`{0}` is not a distinguished concept of the knowledge base")]
    NotDistinguished(String),
    #[error("no activation function given for distinguished concept `{0}`")]
    MissingActivation(String),
    #[error("invalid interpretation: {0}")]
    InvalidInterpretation(String),
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("network graph contains a cycle through unit {0}")]
    CyclicNetwork(String),
    #[error("unsupported activation `{0}`: {1}")]
    UnsupportedActivation(String, String),
    #[error("stimulus error: {0}")]
    Stimulus(String),
    #[error("unit {0} has no concept name")]
    UnnamedUnit(String),
    #[error("query outside the role-free fragment: {0}")]
    NotRoleFree(String),
    #[error("dependency cycle among distinguished concepts through `{0}`")]
    CyclicKb(String),
    #[error("search budget exceeded: {explored} valuations explored, limit {budget} (space size {space})")]
    BudgetExceeded { explored: u64, budget: u64, space: f64 },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
