use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("shifted energy E' = {shifted} is not positive (E = {energy}, floor = {floor})")]
    NonPositiveShiftedEnergy { energy: f64, floor: f64, shifted: f64 },

    #[error("distances r1 = {r1}, r2 = {r2} cannot be realized with R = {r}")]
    UnrealizableGeometry { r1: f64, r2: f64, r: f64 },

    #[error("potential is singular at xi = {xi}, eta = {eta}")]
    SingularPoint { xi: f64, eta: f64 },

    #[error("Kummer function has a pole: b = {0} is a non-positive integer")]
    PoleInB(f64),

    #[error("series did not converge within {terms} terms")]
    NoConvergence { terms: usize },

    #[error("argument {0} lies outside the domain of validity")]
    DomainEdge(f64),

    #[error("tail start at xi = {xi_max} is too shallow (depth {depth} < {required})")]
    TailTooClose { xi_max: f64, depth: f64, required: f64 },

    #[error("step size underflow at x = {at} (step {step:e})")]
    StepUnderflow { at: f64, step: f64 },

    #[error("no sign change of the angular condition found in [{lo}, {hi}]")]
    BracketFailure { lo: f64, hi: f64 },

    #[error("no root of the radial mismatch in energy bracket [{lo}, {hi}]")]
    NoRootInBracket { lo: f64, hi: f64 },

    #[error("node count mismatch: expected (n, q) = ({want_n}, {want_q}), found ({got_n}, {got_q})")]
    NodeCountMismatch { want_n: u32, want_q: u32, got_n: u32, got_q: u32 },

    #[error("expansion coefficients are undefined for Z = 0")]
    ZeroCharge,

    #[error("transition-point derivative vanishes")]
    DegenerateTransition,

    #[error("logarithmic term ln(1 - x) is undefined for x = {0} >= 1")]
    LogBranch(f64),

    #[error("banded Cholesky factorization failed at pivot {pivot}")]
    FactorizationFailure { pivot: usize },

    #[error("iteration stalled after {iterations} iterations (residual {residual:e})")]
    IterationStall { iterations: usize, residual: f64 },

    #[error("at least {needed} points are required, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
