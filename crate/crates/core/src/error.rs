use thiserror::Error;

pub type Result<T, E = DppError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum DppError {
    #[error("dimension {n} out of range {min}..={max}")]
    DimensionOutOfRange { n: usize, min: usize, max: usize },

    #[error("integer overflow computing {0}")]
    Overflow(&'static str),

    #[error("principal minor for subset {subset} is not positive")]
    NonpositiveMinor { subset: String },

    #[error("principal minor for subset {subset} vanishes")]
    ZeroMinor { subset: String },

    #[error("principal submatrix for subset {subset} is singular")]
    SingularMinor { subset: String },

    #[error("coordinate p_{subset} vanishes")]
    ZeroCoordinate { subset: String },

    #[error("coordinate sum vanishes")]
    ZeroSum,

    #[error("block is empty")]
    EmptyBlock,

    #[error("zero denominator in closed-form estimate")]
    ZeroDenominator,

    #[error("chart coordinate x_{{{i}{j}}} vanishes; point lies outside the chart rooted at {root}")]
    ZeroChartCoordinate { root: usize, i: usize, j: usize },

    #[error("singular Jacobian")]
    SingularJacobian,

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    MaxIterations { iterations: usize, residual: f64 },

    #[error("path failure: {0}")]
    PathFailure(String),

    #[error("monodromy stalled at {found} solutions, expected {expected}")]
    StallWithoutTarget { found: usize, expected: usize },

    #[error("convergence balls of points {i} and {j} overlap; distinctness is inconclusive")]
    InconclusiveBall { i: usize, j: usize },

    #[error("no ML degree known for dimension {0}")]
    MissingMlDegree(usize),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
