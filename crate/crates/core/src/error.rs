use thiserror::Error;

/// Errors raised while building kernels or running the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("kernel is not symmetric at index pair ({0}, {1})")]
    Asymmetric(usize, usize),

    #[error("negative kernel entry {value} at ({i}, {j}); apply an explicit shift of at least {shift}")]
    NegativeEntry {
        i: usize,
        j: usize,
        value: f64,
        shift: f64,
    },

    #[error("log kernel on a domain of diameter {diameter} > 1 takes negative values; wrap it in a shift of at least {shift}")]
    LogNeedsShift { diameter: f64, shift: f64 },

    #[error("shift by {shift} would make entry ({i}, {j}) negative")]
    ShiftTooNegative { shift: f64, i: usize, j: usize },

    #[error("negative scale factor {0}")]
    NegativeScale(f64),

    #[error("invalid kernel description: {0}")]
    InvalidSpec(String),

    #[error("matrix must be {expected}x{expected}, found a row of length {found}")]
    NotSquare { expected: usize, found: usize },

    #[error("point descriptors must be pairwise distinct: {0} appears twice")]
    DuplicatePoint(String),

    #[error("grid needs at least 2 points, got {0}")]
    GridTooSmall(usize),

    #[error("subset must be nonempty")]
    EmptySubset,

    #[error("index {index} out of range for a space of {size} points")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("measure lives on {measure} points but the kernel on {kernel}")]
    SpaceMismatch { measure: usize, kernel: usize },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("degree must be at least {min}, got {got}")]
    DegreeTooSmall { min: usize, got: usize },

    #[error("enumeration needs {candidates} candidates, over the budget of {budget}; use the exchange heuristic instead")]
    BudgetExceeded { candidates: u128, budget: u64 },

    #[error("space of {size} points exceeds the limit of {limit} for {what}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("kernel takes the value +inf at ({0}, {1}); this operation needs a finite-valued kernel")]
    InfiniteEntry(usize, usize),

    #[error("{0}")]
    Precondition(String),

    #[error("closed-form kernels cannot be evaluated in exact rational mode")]
    NotRepresentable,

    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),

    #[error("internal solver failure: {0}")]
    Internal(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
