use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate metric: no positive distance")]
    DegenerateMetric,

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("triangle inequality violated at ({0}, {1}, {2}): d({0},{2}) > d({0},{1}) + d({1},{2})")]
    TriangleViolation(usize, usize, usize),

    #[error("invalid reward distribution at vertex {vertex}: {reason}")]
    InvalidDistribution { vertex: usize, reason: String },

    #[error("pmf mass ≠ 1 at vertex {vertex} (sum is {sum})")]
    PmfMass { vertex: usize, sum: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("instance kind mismatch: {0}")]
    KindMismatch(String),

    #[error("size gate exceeded: {what} is {actual}, limit {limit}; {hint}")]
    SizeGate {
        what: &'static str,
        actual: usize,
        limit: usize,
        hint: &'static str,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("policy did not terminate by phase {phase}: {diagnostic}")]
    NonTermination { phase: u32, diagnostic: String },

    #[error("linear program failure: {0}")]
    Lp(String),

    #[error("numeric overflow: {0}")]
    Overflow(String),
}

pub type Result<T> = std::result::Result<T, Error>;
