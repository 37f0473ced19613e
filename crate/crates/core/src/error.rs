use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("field modes differ (exact-rational vs complex-float)")]
    ModeMismatch,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("group order {order} exceeds the enumeration cap {cap}")]
    CapExceeded { order: u64, cap: u64 },
    #[error("the trivial group has no proper subgroups")]
    TrivialGroup,
    #[error("matrices live over different groups")]
    GroupMismatch,
    #[error("characters must differ")]
    EqualCharacters,
    #[error("identity element not allowed here")]
    IdentityElement,
    #[error("incomplete eigenvalue family: expected {expected}, got {got}")]
    IncompleteEigenvalues { expected: usize, got: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("negative coefficient in an entry that must lie in A^+")]
    NegativeCoefficient,
    #[error("exponent guard exceeded: |g({index})| has {bits} bits, limit {limit}")]
    ExponentGuard { index: usize, bits: u64, limit: u64 },
    #[error("support guard exceeded: an entry reached {terms} terms, limit {limit}")]
    SupportGuard { terms: usize, limit: usize },
    #[error("schedule value g({index}) = {value} is not positive")]
    NonPositiveSchedule { index: usize, value: String },
    #[error("term {index} is not column-stochastic at x=1 (column sum {sum})")]
    NotStochastic { index: usize, sum: String },
    #[error("ergodicity too slow at horizon: block {block} did not close within {cap} terms")]
    TelescopingStalled { block: usize, cap: usize },
    #[error("telescoping cuts must be strictly increasing")]
    NonIncreasingCuts,
    #[error("index {index} out of range (have {len})")]
    OutOfRange { index: usize, len: usize },
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("overlapping index sets at index {0}")]
    OverlappingSets(usize),
    #[error("window extension cap of {0} terms reached")]
    WindowCap(usize),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("polynomial is zero and cannot be normalized")]
    ZeroPolynomial,
    #[error("not a blowup: {0}")]
    NotBlowup(String),
    #[error("sequence is not ergodic: {0}")]
    NotErgodic(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
