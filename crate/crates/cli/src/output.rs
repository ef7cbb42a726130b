//! CSV and structured-text emission.

use std::io::Write;

use clap::ValueEnum;
use gauss_share::capacity::PublicRate;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Significant digits written for every real number in CSV output.
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Text,
}

/// Scientific notation with [`SIGNIFICANT_DIGITS`] digits, `inf` or `NaN`.
pub fn real(x: f64) -> String {
    if x.is_finite() {
        format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
    } else {
        x.to_string()
    }
}

pub fn opt_real(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

pub fn rate(rp: PublicRate) -> String {
    match rp {
        PublicRate::Finite(r) => real(r),
        PublicRate::Infinite => "inf".into(),
    }
}

/// Writes a header and rows with the `csv` crate (comma delimiter, `.` decimals).
pub fn write_csv<W: Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Serializes `value` as a TOML document.
pub fn write_text<W: Write, T: Serialize>(mut out: W, value: &T) -> Result<(), CliError> {
    let doc = toml::to_string(value)?;
    out.write_all(doc.as_bytes()).map_err(|e| CliError::Io {
        path: "output".into(),
        source: e,
    })
}
