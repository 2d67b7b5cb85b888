//! JSON-lines and CSV rendering of tables and reports.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// One JSON object per line, or a CSV file with a header row; field order
/// follows the struct declaration.
pub fn table<T: Serialize>(rows: &[T], format: Format) -> Result<String> {
    match format {
        Format::Json => {
            let mut out = String::new();
            for r in rows {
                out.push_str(&serde_json::to_string(r).map_err(|e| Error::Io(e.to_string()))?);
                out.push('\n');
            }
            Ok(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in rows {
                w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
        }
    }
}

/// A single JSON document, or `field,value` CSV rows with JSON-encoded values.
pub fn report<T: Serialize>(r: &T, format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(serde_json::to_string(r).map_err(|e| Error::Io(e.to_string()))? + "\n"),
        Format::Csv => {
            let v = serde_json::to_value(r).map_err(|e| Error::Io(e.to_string()))?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["field", "value"]).map_err(|e| Error::Io(e.to_string()))?;
            if let serde_json::Value::Object(m) = v {
                for (k, val) in m {
                    w.write_record([k, val.to_string()]).map_err(|e| Error::Io(e.to_string()))?;
                }
            }
            let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
        }
    }
}

/// `f64` rendered with 17 significant digits so that it round-trips.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        #[serde(rename = "D")]
        d: i64,
        trace: String,
    }

    #[test]
    fn json_and_csv_agree() {
        let rows = vec![Row { d: 3, trace: "-248".into() }, Row { d: 4, trace: "492".into() }];
        assert_eq!(table(&rows, Format::Json).unwrap(), "{\"D\":3,\"trace\":\"-248\"}\n{\"D\":4,\"trace\":\"492\"}\n");
        assert_eq!(table(&rows, Format::Csv).unwrap(), "D,trace\n3,-248\n4,492\n");
    }
}
