//! Error-to-exit-code policy of the driver.
//!
//! Exit codes are part of the external interface and are kept deliberately
//! coarse: `2` for anything wrong with the configuration (parse failures,
//! unknown keys, missing keys, values outside their documented domains),
//! `3` when an iterative solve gives up before its residual target, `4` when
//! a requested quantity is genuinely divergent (the infrared limit of a
//! moving electron's cloud norm, for instance), and `1` for environment
//! failures such as an unwritable output path.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Configuration problems; the message names the offending file or key.
    Config(String),
    /// Filesystem problems around reading configs or writing artifacts.
    Io(String),
    /// Errors surfaced by the numerical engine.
    Engine(irqed::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 1,
            CliError::Engine(e) => match e {
                irqed::Error::NoConvergence { .. } | irqed::Error::LinearSolve { .. } => 3,
                irqed::Error::Divergent { .. } => 4,
                // Domain violations, resource caps, thin data and quadrature
                // failures all trace back to the requested parameters.
                _ => 2,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config: {msg}"),
            CliError::Io(msg) => write!(f, "io: {msg}"),
            CliError::Engine(e) => write!(f, "{e}"),
        }
    }
}

impl From<irqed::Error> for CliError {
    fn from(e: irqed::Error) -> Self {
        CliError::Engine(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;
