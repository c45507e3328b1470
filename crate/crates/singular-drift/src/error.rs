//! Error taxonomy shared by every module in the crate.
//!
//! Three failure classes cover the whole library surface:
//!
//! * [`Error::Domain`]: a scalar argument lies outside the mathematical
//!   domain of the requested quantity (a tail exponent outside (0,1), a
//!   non-positive time, a path value where the integrand is singular).
//! * [`Error::Usage`]: inputs are individually valid but structurally
//!   inconsistent: mis-ordered exit barriers, a drift family that does not
//!   support the requested transform, too few points for a fit.
//! * [`Error::NonConvergence`]: an iterative routine exhausted its budget
//!   before reaching its tolerance.
//!
//! The command-line front end maps the three classes onto distinct process
//! exit codes, so the classification is part of the public contract, not
//! just diagnostics.

use std::fmt;

/// Unified error type for all fallible operations in the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    Domain {
        /// Name of the offending argument.
        arg: &'static str,
        /// The value that was rejected.
        value: f64,
        /// Human-readable statement of the violated constraint.
        constraint: &'static str,
    },
    /// A structurally invalid request built from individually valid inputs.
    Usage(String),
    /// An iterative routine failed to reach its tolerance within budget.
    NonConvergence {
        /// Short description of the routine that failed.
        what: &'static str,
        /// Number of iterations (or subdivisions) performed before giving up.
        iterations: usize,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain {
                arg,
                value,
                constraint,
            } => write!(f, "domain error: {arg} = {value} violates {constraint}"),
            Error::Usage(msg) => write!(f, "usage error: {msg}"),
            Error::NonConvergence { what, iterations } => {
                write!(f, "non-convergence: {what} after {iterations} iterations")
            }
        }
    }
}

impl std::error::Error for Error {}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
