//! Plain-text series files: one value per line.
//!
//! Lines starting with `#` and blank lines are skipped. A single non-numeric
//! first data line is taken as a column header. Values are written with the
//! shortest representation that round-trips.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::stats::Series;

/// Reads raw values; rejects multi-column rows and non-finite values.
pub fn read_values<R: BufRead>(reader: R) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    let mut seen_data = false;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let field = text.trim_end_matches(',').trim();
        if field.contains(',') || field.contains(char::is_whitespace) {
            return Err(Error::Parse(format!(
                "line {}: expected a single column, got '{text}'",
                i + 1
            )));
        }
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(v) => return Err(Error::Parse(format!("line {}: non-finite value {v}", i + 1))),
            Err(_) if !seen_data && values.is_empty() => {}
            Err(_) => return Err(Error::Parse(format!("line {}: not a number: '{field}'", i + 1))),
        }
        seen_data = true;
    }
    Ok(values)
}

pub fn read_series<T: Scalar, R: BufRead>(reader: R) -> Result<Series<T>> {
    let values = read_values(reader)?;
    Series::new(values.into_iter().map(T::from_f64_lossy).collect())
}

/// Writes `# key=value` header lines followed by one value per line.
pub fn write_series<T: Scalar, W: Write>(mut w: W, values: &[T], metadata: &[(&str, String)]) -> Result<()> {
    for (k, v) in metadata {
        writeln!(w, "# {k}={v}")?;
    }
    for v in values {
        writeln!(w, "{v}")?;
    }
    w.flush()?;
    Ok(())
}
