use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library reports.
///
/// The enum is `Clone` so cached results (see
/// [`FitCache`](crate::polycore::FitCache)) can hand the same error to every
/// caller; I/O errors are therefore carried as text.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("degenerate grid: min == max ({0})")]
    DegenerateGrid(f64),
    #[error("polynomial degree {degree} exceeds the cap of {max}")]
    DegreeTooHigh { degree: usize, max: usize },
    #[error("underdetermined fit: {points} points for degree {degree}")]
    Underdetermined { points: usize, degree: usize },
    #[error("ill-conditioned system (condition estimate {0:.3e})")]
    IllConditioned(f64),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("point {point} maps to {normalized} outside the allowed range")]
    ExtrapolationOutOfRange { point: f64, normalized: f64 },

    #[error("numerical fault: {0}")]
    NumericalFault(String),
    #[error("zero-norm target in batch item {0}")]
    ZeroTarget(usize),
    #[error("gradient missing for parameter `{0}`")]
    GradientMissing(String),
    #[error("backward called without a recorded forward pass")]
    NoTape,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("solver diverged at sample {sample}, t = {time}")]
    SolverDiverged { sample: usize, time: f64 },
    #[error("CFL violation: courant number {courant:.3} exceeds {limit}")]
    CflViolation { courant: f64, limit: f64 },

    #[error("channel {0} has zero standard deviation")]
    DegenerateChannel(usize),
    #[error("dataset is already normalized")]
    AlreadyNormalized,
    #[error("dataset is not normalized")]
    NotNormalized,

    #[error("format error: {0}")]
    Format(String),
    #[error("checksum error: {0}")]
    Checksum(String),
    #[error("i/o error: {0}")]
    Io(String),

    #[error("empty test split")]
    EmptySplit,
    #[error("grid incompatible: {0}")]
    GridIncompatible(String),
    #[error("length {0} is not a power of two")]
    LengthNotPow2(usize),
    #[error("clock too coarse: resolution {resolution_ns} ns vs median {median_ns} ns")]
    ClockTooCoarse { resolution_ns: f64, median_ns: f64 },
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
