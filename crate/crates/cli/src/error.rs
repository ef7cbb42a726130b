use std::ops::Range;

use thiserror::Error;

/// Exit status for bad input of any kind.
pub const EXIT_VALIDATION: u8 = 2;
/// Exit status when the numerics fail on valid input.
pub const EXIT_NUMERIC: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    /// A configuration problem, located by line and column when known.
    #[error("{origin}:{line}:{column}: {message}")]
    Config {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("GAUSS_SHARE_THREADS: {0}")]
    Threads(String),
    #[error(transparent)]
    Core(#[from] gauss_share::error::Error),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("text output: {0}")]
    Text(#[from] toml::ser::Error),
}

impl CliError {
    /// Builds a [`CliError::Config`] pointing at the start of `span`
    /// (the first line when there is no span).
    pub fn anchored(origin: &str, text: &str, span: Option<Range<usize>>, message: String) -> Self {
        let offset = span.map_or(0, |s| s.start.min(text.len()));
        let before = &text[..offset];
        let line = before.matches('\n').count() + 1;
        let column = before.rfind('\n').map_or(offset, |nl| offset - nl - 1) + 1;
        CliError::Config {
            origin: origin.to_string(),
            line,
            column,
            message,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numeric() => EXIT_NUMERIC,
            _ => EXIT_VALIDATION,
        }
    }
}
