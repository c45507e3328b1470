//! CLI failure categories, each carrying a distinct process exit code so
//! that scripts can tell a bad config from a bad computation.

use std::fmt;

use singular_drift::Error as LibError;

/// Everything that can go wrong while running a subcommand.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable, unparsable, or incomplete configuration, including
    /// structurally invalid requests the config described (exit 2).
    Config(String),
    /// An argument outside the mathematical domain of the operation
    /// (exit 3).
    Domain(LibError),
    /// An iterative routine ran out of budget (exit 4).
    NonConvergence(LibError),
    /// Filesystem trouble reading inputs or writing artifacts (exit 5).
    Io(String),
}

impl CliError {
    /// Process exit code for this failure category.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Domain(_) => 3,
            CliError::NonConvergence(_) => 4,
            CliError::Io(_) => 5,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "invalid config: {msg}"),
            CliError::Domain(err) => write!(f, "domain error: {err}"),
            CliError::NonConvergence(err) => write!(f, "no convergence: {err}"),
            CliError::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl From<String> for CliError {
    fn from(msg: String) -> Self {
        CliError::Config(msg)
    }
}

impl From<LibError> for CliError {
    fn from(err: LibError) -> Self {
        match err {
            LibError::Domain { .. } => CliError::Domain(err),
            // A structurally invalid request is something the config asked
            // for, so it lands in the config category.
            LibError::Usage(_) => CliError::Config(err.to_string()),
            LibError::NonConvergence { .. } => CliError::NonConvergence(err),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_are_distinct_and_nonzero() {
        let errors = [
            CliError::Config("x".into()),
            CliError::Domain(LibError::Usage("d".into())),
            CliError::NonConvergence(LibError::Usage("n".into())),
            CliError::Io("io".into()),
        ];
        let codes: Vec<u8> = errors.iter().map(CliError::exit_code).collect();
        assert_eq!(codes, vec![2, 3, 4, 5]);
    }

    #[test]
    fn library_errors_map_by_variant() {
        let domain = LibError::Domain {
            arg: "p",
            value: 2.0,
            constraint: "0 < p < 1",
        };
        assert_eq!(CliError::from(domain).exit_code(), 3);
        let usage = LibError::Usage("bad combination".into());
        assert_eq!(CliError::from(usage).exit_code(), 2);
        let stuck = LibError::NonConvergence {
            what: "quadrature",
            iterations: 50,
        };
        assert_eq!(CliError::from(stuck).exit_code(), 4);
    }
}
