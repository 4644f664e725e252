//! Mapping from failures to the process exit-code contract.

use sno_core::Error;

pub const CONFIG: u8 = 2;
pub const NUMERIC: u8 = 3;
pub const FORMAT: u8 = 4;
pub const INTERNAL: u8 = 1;

/// Shown at the end of `--help`.
pub const CONTRACT: &str = "\
Exit codes:
  0  success
  1  unexpected internal error
  2  configuration error: bad flags, malformed config or spec file, invalid
     parameters, non-numeric rows in a signal file
  3  numerical fault: solver divergence, CFL violation, ill-conditioned fit,
     non-finite loss, degenerate normalization channel
  4  format, shape or I/O error: unreadable, corrupt or version-mismatched
     files, channel or grid mismatch between model and data";

/// A problem with the command line or a config file that the library never
/// sees.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn core_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::InvalidGrid(_)
        | Error::DegenerateGrid(_)
        | Error::DegreeTooHigh { .. }
        | Error::Underdetermined { .. }
        | Error::LengthNotPow2(_) => CONFIG,
        Error::IllConditioned(_)
        | Error::NumericalFault(_)
        | Error::ZeroTarget(_)
        | Error::SolverDiverged { .. }
        | Error::CflViolation { .. }
        | Error::DegenerateChannel(_)
        | Error::ClockTooCoarse { .. } => NUMERIC,
        Error::ShapeMismatch(_)
        | Error::ExtrapolationOutOfRange { .. }
        | Error::Format(_)
        | Error::Checksum(_)
        | Error::Io(_)
        | Error::EmptySplit
        | Error::GridIncompatible(_)
        | Error::AlreadyNormalized
        | Error::NotNormalized => FORMAT,
        Error::GradientMissing(_) | Error::NoTape => INTERNAL,
    }
}

/// Exit code of the first error in the chain that has a defined class.
pub fn code_for(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return core_code(e);
        }
        if cause.is::<UsageError>() || cause.is::<toml::de::Error>() || cause.is::<csv::Error>() {
            return CONFIG;
        }
        if cause.is::<std::io::Error>() {
            return FORMAT;
        }
    }
    INTERNAL
}
