//! Plain-text dataset parsing and the bundled 73-observation risk dataset.
//!
//! Values are separated by whitespace, commas or newlines. `#` starts a
//! comment that runs to the end of the line and a bare `-` marks an empty
//! cell. Decimals always use `.`, whatever the locale.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::Sample;

/// Built-in tag for the bundled risk-management dataset.
pub const RISK73_TAG: &str = "risk73";

const RISK73_TEXT: &str = include_str!("../data/risk73.txt");

/// Parsed contents of a dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFile {
    pub path: String,
    /// Values in file order.
    pub values: Vec<f64>,
    /// Number of `-` placeholders.
    pub skipped: usize,
    /// Number of comment lines or trailing comments.
    pub comments: usize,
}

impl DatasetFile {
    pub fn sample(&self) -> Result<Sample> {
        Sample::new(self.values.clone())
    }
}

/// Parse dataset text. `path` is only used for reporting.
pub fn parse_dataset_str(path: &str, text: &str) -> Result<DatasetFile> {
    let mut values = Vec::new();
    let mut skipped = 0;
    let mut comments = 0;

    for (line_no, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => {
                comments += 1;
                &raw[..pos]
            }
            None => raw,
        };
        let mut column = 0;
        for token in line.split(|c: char| c.is_whitespace() || c == ',') {
            let start = column;
            column += token.chars().count() + 1;
            if token.is_empty() {
                continue;
            }
            if token == "-" {
                skipped += 1;
                continue;
            }
            let err = |message: String| Error::Parse {
                line: line_no + 1,
                column: start + 1,
                message,
            };
            let x: f64 = token
                .parse()
                .map_err(|_| err(format!("`{token}` is not a decimal number")))?;
            if !(x > 0.0 && x < 1.0) {
                return Err(err(format!(
                    "`{token}` is outside the open interval (0, 1)"
                )));
            }
            values.push(x);
        }
    }

    if values.is_empty() {
        return Err(Error::Parse {
            line: 0,
            column: 0,
            message: format!("{path}: no observations found"),
        });
    }
    Ok(DatasetFile {
        path: path.to_string(),
        values,
        skipped,
        comments,
    })
}

/// The bundled risk-management dataset (73 observations).
pub fn risk73() -> DatasetFile {
    parse_dataset_str(RISK73_TAG, RISK73_TEXT).expect("bundled dataset is valid")
}
