use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("axis count below minimum: n[{axis}] = {count}, need at least {min}")]
    AxisCountBelowMinimum {
        axis: usize,
        count: usize,
        min: usize,
    },

    #[error("axis extent must be positive: extent[{axis}] = {value}")]
    NonPositiveExtent { axis: usize, value: f64 },

    #[error("node count {nodes} exceeds the configured cap {cap}")]
    NodeCountExceedsCap { nodes: usize, cap: usize },

    #[error("shape descriptor lies outside the grid: {0}")]
    ShapeOutsideGrid(String),

    #[error("empty domain")]
    EmptyDomain,

    #[error("grids do not match: {0}")]
    GridMismatch(String),

    #[error("drift bound violated: sup |V| = {sup:.6e} exceeds tau = {tau:.6e}")]
    DriftBoundViolated { sup: f64, tau: f64 },

    #[error("coercivity shift requires 0 < delta < 1, got {0}")]
    InvalidDelta(f64),

    #[error("iteration cap {cap} exceeded, final relative residual {residual:.3e}")]
    IterationCap { cap: usize, residual: f64 },

    #[error("iterative solver breakdown, relative residual {residual:.3e}")]
    SolverBreakdown { residual: f64 },

    #[error("eigensolver lost positivity: most negative component {min:.3e} (grid too coarse for this drift)")]
    LostPositivity { min: f64 },

    #[error("eigenvalue sequence did not stabilize; history: {history:?}")]
    Oscillation { history: Vec<f64> },

    #[error("degenerate test family: all divergence integrals below 1e-12")]
    DegenerateTestFamily,

    #[error("ball of radius {radius} at ({x}, {y}) escapes the box")]
    BallEscapesBox { x: f64, y: f64, radius: f64 },

    #[error("center outside support influence: boundary integral of u^2 vanished at r = {radius}")]
    VanishingBoundaryMass { radius: f64 },

    #[error("target measure {m} exceeds the measure of the box {box_measure}")]
    MeasureExceedsBox { m: f64, box_measure: f64 },

    #[error("empty free boundary")]
    EmptyBoundary,

    #[error("nondegeneracy check inapplicable: {0}")]
    Inapplicable(String),

    #[error("misaligned grids: {0}")]
    MisalignedGrids(String),

    #[error("oracle unresolved: lambda at n = {n} and 2n disagree by {rel:.3e} relative (limit {limit:.1e})")]
    OracleUnresolved { n: usize, rel: f64, limit: f64 },

    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },

    #[error("malformed {format} file {path}: {message}")]
    Format {
        format: &'static str,
        path: String,
        message: String,
    },

    #[error("support violation: {0}")]
    SupportViolation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
