//! Terminal failure type: a one-line message for standard error plus the
//! process exit code — 2 for usage/input problems, 1 for verification
//! failures.

use lnml_core::LnmlError;

/// A failure that ends the run.
#[derive(Debug)]
pub struct Failure {
    /// Process exit code: 1 verification failure, 2 usage/input error.
    pub code: u8,
    /// One-line diagnostic printed to standard error.
    pub message: String,
}

impl Failure {
    /// Usage or input error (exit code 2).
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    /// Verification failure (exit code 1).
    pub fn verification(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

impl From<LnmlError> for Failure {
    /// Library errors surface as usage errors: every call from here feeds
    /// the library user-supplied data or parameters.
    fn from(e: LnmlError) -> Self {
        Self::usage(e.to_string())
    }
}
