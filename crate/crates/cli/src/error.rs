use std::fmt;

use adomian_core::Error;

/// A failure that ends the run with a specific exit status.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BLOW_UP: i32 = 3;
pub const EXIT_DOMAIN: i32 = 4;

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    /// Maps a core error raised while working on `context`.
    pub fn from_core(context: &'static str) -> impl Fn(Error) -> CliError {
        move |e| {
            let code = match e {
                Error::BlowUp { .. } | Error::NonFiniteCoefficient { .. } => EXIT_BLOW_UP,
                Error::Domain { .. } => EXIT_DOMAIN,
                _ => EXIT_CONFIG,
            };
            let message = match e {
                Error::BlowUp { t } => {
                    format!("{context}: reference integrator blew up at t = {t:e}")
                }
                Error::Domain { x, value, .. } => {
                    format!("{context}: square-root argument {value:e} is negative at x = {x}")
                }
                other => format!("{context}: {other}"),
            };
            CliError { code, message }
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::config(format!("i/o: {e}"))
    }
}
