use thiserror::Error;

/// Errors raised by the library. Validation problems (bad input) and
/// numerical failures are kept apart so the CLI can map them to exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("ellipse needs 0 < b < a (got a = {a}, b = {b}); otherwise the curvature maxima sit on the symmetry axis")]
    EllipseAxes { a: f64, b: f64 },

    #[error("non-regular parametrization: |M'(θ)| = {speed:e} at θ = {theta}")]
    NonRegular { theta: f64, speed: f64 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("no non-degenerate maxima: curvature is constant")]
    ConstantCurvature,

    #[error("expected one or two global curvature maxima, found {0}")]
    WellCount(usize),

    #[error("degenerate curvature maximum at s = {s}: κ'' = {kappa_second:e}")]
    DegenerateWell { s: f64, kappa_second: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("root bracketing failed: {0}")]
    Bracketing(String),

    #[error("weight â = {weight} left the admissible band at σ = {sigma}, τ = {tau}")]
    WeightOutOfRange { sigma: f64, tau: f64, weight: f64 },

    #[error("domain must contain exactly one well, found {0}")]
    DomainWells(usize),

    #[error("cutoff support violates the single-well requirement: {0}")]
    CutoffSupport(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("amplitude integrand is singular at the well under both sign choices (s = {0})")]
    AmplitudeSign(f64),

    #[error("numerical underflow: {0}")]
    Underflow(String),

    #[error("counting budget exceeded: {count} > {budget}")]
    Budget { count: usize, budget: usize },

    #[error("no bracket constant below the cap {0}")]
    BracketCap(f64),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by the input rather than by a solver.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidCurve(_)
                | Error::EllipseAxes { .. }
                | Error::NonRegular { .. }
                | Error::ConstantCurvature
                | Error::WellCount(_)
                | Error::DegenerateWell { .. }
                | Error::InvalidParameter(_)
                | Error::WeightOutOfRange { .. }
                | Error::DomainWells(_)
                | Error::CutoffSupport(_)
                | Error::GridMismatch(_)
                | Error::Config(_)
                | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
