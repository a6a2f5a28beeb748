use std::fmt;
use std::path::Path;

use pointfrac::io::fmt_sci;
use pointfrac::Error;

pub const EXIT_VERIFY: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_POLE: u8 = 3;

/// Message plus process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INPUT, message: message.into() }
    }

    pub fn verify(message: impl Into<String>) -> Self {
        Failure { code: EXIT_VERIFY, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::PoleAtLambda { .. } | Error::NotInvertible => EXIT_POLE,
            Error::QuadratureFailure(_) | Error::BracketFailure(_) => EXIT_VERIFY,
            _ => EXIT_INPUT,
        };
        let message = match e {
            Error::PoleAtLambda { lambda } => format!("resolvent pole at lambda* = {}", fmt_sci(lambda)),
            other => other.to_string(),
        };
        Failure { code, message }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Writes to `out` or, without a path, to stdout.
pub fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Float cell: `%.12e`, or empty for a missing value.
pub fn cell(x: Option<f64>) -> String {
    x.map(fmt_sci).unwrap_or_default()
}

/// Quotes a free-text CSV field when it needs it.
pub fn text_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\"").replace('\n', " "))
    } else {
        s.to_string()
    }
}
