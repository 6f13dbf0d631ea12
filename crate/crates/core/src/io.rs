//! Artifact writing: RFC-4180 CSV and JSON, each tagged with the SHA-256
//! hash of the run configuration.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Hex SHA-256 of the compact JSON form of `config` (keys sorted).
pub fn config_hash<T: Serialize>(config: &T) -> Result<String> {
    let value = serde_json::to_value(config)?;
    let bytes = serde_json::to_vec(&value)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

/// Shortest round-trip decimal form; −0 prints as 0.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        "0e0".to_owned()
    } else if x.is_finite() {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

/// CSV with a leading `# config_hash=<hex>` line, then the header row.
pub fn write_csv<P, I, R>(path: P, hash: &str, header: &[&str], rows: I) -> Result<()>
where
    P: AsRef<Path>,
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut file = BufWriter::new(File::create(path)?);
    write!(file, "# config_hash={hash}\r\n")?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(file);
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.into_iter().collect::<Vec<_>>()).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Numeric rows of a file written by [`write_csv`].
pub fn read_csv(path: impl AsRef<Path>) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).map_err(csv_err)?;
    let header = r.headers().map_err(csv_err)?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| Error::InvalidParameter(format!("bad number {s:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

#[derive(Serialize)]
struct Tagged<'a, T: Serialize> {
    config_hash: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

/// Pretty JSON object with a `config_hash` field ahead of the body's fields.
pub fn write_json<T: Serialize>(path: impl AsRef<Path>, hash: &str, body: &T) -> Result<()> {
    let mut file = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut file, &Tagged { config_hash: hash, body })?;
    writeln!(file)?;
    file.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::InvalidParameter(format!("csv: {other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        let rows = vec![vec![fmt_f64(0.1), fmt_f64(-2.5e-300)], vec![fmt_f64(1.0 / 3.0), fmt_f64(7.0)]];
        write_csv(&p, "abc", &["x", "y"], rows).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("# config_hash=abc\r\n"));
        assert!(text.contains("x,y\r\n"));
        let (h, r) = read_csv(&p).unwrap();
        assert_eq!(h, ["x", "y"]);
        assert_eq!(r[1][0], 1.0 / 3.0);
        assert_eq!(r[0][1], -2.5e-300);
    }

    #[test]
    fn hash_ignores_field_order() {
        let a: serde_json::Value = serde_json::from_str(r#"{"a":1,"b":[2,3]}"#).unwrap();
        let b: serde_json::Value = serde_json::from_str(r#"{"b":[2,3],"a":1}"#).unwrap();
        assert_eq!(config_hash(&a).unwrap(), config_hash(&b).unwrap());
        assert_eq!(config_hash(&a).unwrap().len(), 64);
    }
}
