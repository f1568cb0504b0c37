use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("truncation limit exceeded: {what} = {value} (max {max})")]
    TruncationLimit {
        what: &'static str,
        value: usize,
        max: usize,
    },

    #[error("outside chart: {0}")]
    OutsideChart(String),

    #[error("empty region")]
    EmptyRegion,

    #[error("no path between vertices {from} and {to}")]
    NoPath { from: usize, to: usize },

    #[error("feature underresolved: {feature} (width {width}, target_h {target_h})")]
    FeatureUnderresolved { feature: String, width: f64, target_h: f64 },

    #[error("zero area at triangle {0}")]
    ZeroArea(usize),

    #[error("Robin coefficient must be nonnegative (got {0})")]
    NegativeRobin(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("no convergence after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("Neumann compatibility (F,1)=0 fails: defect {defect:e}")]
    Compatibility { defect: f64 },

    #[error("Robin reduces to Neumann; use solve_neumann")]
    RobinIsNeumann,

    #[error("spectrum not converged after {iterations} iterations (residuals {residuals:?})")]
    SpectrumNotConverged { iterations: usize, residuals: Vec<f64> },

    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),

    #[error("weight exponent must be in (1,2) (got {0})")]
    WeightExponent(f64),

    #[error("decay fit needs at least 3 radii (got {0})")]
    TooFewRadii(usize),

    #[error("radiation residual requires k>0 (got {0})")]
    RadiationNeedsK(f64),

    #[error("source too close to truncation: support radius {support} exceeds R_inf/2 = {limit}")]
    SourceTooClose { support: f64, limit: f64 },

    #[error("truncation radius too small: obstacle reaches {extent}, need R_inf > {needed}")]
    TruncationRadiusTooSmall { extent: f64, needed: f64 },

    #[error("invalid continuation schedule: {0}")]
    InvalidSchedule(String),

    #[error("singular kernel: x = y")]
    Singular,

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
