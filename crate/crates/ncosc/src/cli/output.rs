//! Artifact assembly: RFC-4180 CSV with 17-significant-digit floats, JSON
//! reports, and the manifest sidecar. Data artifacts carry no timestamps so
//! reruns are byte-identical.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Artifact {
    pub name: String,
    pub schema_version: u32,
    pub bytes: Vec<u8>,
}

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// RFC-4180 field quoting: quote only when the field contains a comma, a
/// quote, or a line break; embedded quotes are doubled.
pub fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') || s.contains('\r') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub struct CsvWriter {
    buf: String,
    columns: usize,
}

impl CsvWriter {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = String::new();
        buf.push_str(
            &header
                .iter()
                .map(|h| csv_field(h))
                .collect::<Vec<_>>()
                .join(","),
        );
        buf.push_str("\r\n");
        Self {
            buf,
            columns: header.len(),
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        debug_assert_eq!(fields.len(), self.columns);
        self.buf.push_str(
            &fields
                .iter()
                .map(|f| csv_field(f))
                .collect::<Vec<_>>()
                .join(","),
        );
        self.buf.push_str("\r\n");
    }

    pub fn into_artifact(self, name: impl Into<String>, schema_version: u32) -> Artifact {
        Artifact {
            name: name.into(),
            schema_version,
            bytes: self.buf.into_bytes(),
        }
    }
}

pub fn json_artifact<T: Serialize>(
    name: impl Into<String>,
    schema_version: u32,
    value: &T,
) -> Result<Artifact> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| Error::Config(format!("serialization failure: {e}")))?;
    bytes.push(b'\n');
    Ok(Artifact {
        name: name.into(),
        schema_version,
        bytes,
    })
}

#[derive(Serialize)]
struct ManifestEntry<'a> {
    file: &'a str,
    schema_version: u32,
    bytes: usize,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'a str,
    version: &'a str,
    command: &'a str,
    artifacts: Vec<ManifestEntry<'a>>,
    warnings: &'a [String],
}

/// Write all artifacts plus a manifest sidecar into `out_dir`.
pub fn write_artifacts(
    out_dir: &Path,
    command: &str,
    artifacts: &[Artifact],
    warnings: &[String],
) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    for artifact in artifacts {
        std::fs::write(out_dir.join(&artifact.name), &artifact.bytes)?;
    }
    let manifest = Manifest {
        tool: "ncosc",
        version: env!("CARGO_PKG_VERSION"),
        command,
        artifacts: artifacts
            .iter()
            .map(|a| ManifestEntry {
                file: &a.name,
                schema_version: a.schema_version,
                bytes: a.bytes.len(),
            })
            .collect(),
        warnings,
    };
    let manifest = json_artifact("manifest.json", 1, &manifest)?;
    std::fs::write(out_dir.join(&manifest.name), &manifest.bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_round_trips() {
        for x in [1.0025, -0.9025, 1.0 / 3.0, 2.220446049250313e-16] {
            let s = fmt_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }

    #[test]
    fn quoting_rules() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }

    #[test]
    fn csv_layout() {
        let mut w = CsvWriter::new(&["a", "b"]);
        w.row(&["1".into(), "x,y".into()]);
        let a = w.into_artifact("t.csv", 1);
        assert_eq!(String::from_utf8(a.bytes).unwrap(), "a,b\r\n1,\"x,y\"\r\n");
    }
}
