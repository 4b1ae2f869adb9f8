//! Summary JSON and plot-data files.

use crate::config::Format;
use crate::error::CliError;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

/// Pretty JSON with every float printed to 17 significant digits, so the
/// same numbers always produce the same bytes.
struct FixedFloats<'a>(PrettyFormatter<'a>);

impl Formatter for FixedFloats<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serializes with sorted keys (the default map is ordered) and fixed
/// float formatting.
pub fn to_json_bytes(value: &Value) -> Vec<u8> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloats(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("serializing a JSON value into memory cannot fail");
    buf.push(b'\n');
    buf
}

pub struct OutputDir {
    pub dir: PathBuf,
    pub csv: bool,
    pub binary: bool,
}

fn out_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Output(format!("{}: {e}", path.display()))
}

impl OutputDir {
    pub fn create(dir: PathBuf, formats: &[Format]) -> Result<Self, CliError> {
        std::fs::create_dir_all(&dir).map_err(|e| out_err(&dir, e))?;
        if !dir.is_dir() {
            return Err(out_err(&dir, "not a directory"));
        }
        Ok(Self { dir, csv: formats.contains(&Format::Csv), binary: formats.contains(&Format::Binary) })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write_bytes(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let p = self.path(name);
        std::fs::write(&p, bytes).map_err(|e| out_err(&p, e))?;
        Ok(p)
    }

    /// Writes a CSV table when CSV output is enabled.
    pub fn csv(&self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<Option<PathBuf>, CliError> {
        if !self.csv {
            return Ok(None);
        }
        let p = self.path(name);
        let write = || -> io::Result<()> {
            let mut w = BufWriter::new(File::create(&p)?);
            writeln!(w, "{}", header.join(","))?;
            for row in rows {
                let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
                writeln!(w, "{}", cells.join(","))?;
            }
            w.flush()
        };
        write().map_err(|e| out_err(&p, e))?;
        Ok(Some(p))
    }

    /// Runs a writer against a new file; library I/O errors become output
    /// errors.
    pub fn with_file(
        &self,
        name: &str,
        f: impl FnOnce(BufWriter<File>) -> lenscope::Result<()>,
    ) -> Result<PathBuf, CliError> {
        let p = self.path(name);
        let file = File::create(&p).map_err(|e| out_err(&p, e))?;
        f(BufWriter::new(file)).map_err(|e| out_err(&p, e))?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_have_seventeen_digits_and_keys_are_sorted() {
        let v = json!({"b": 0.1, "a": [1.0, -2.5e-300], "c": 3});
        let s = String::from_utf8(to_json_bytes(&v)).unwrap();
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
        assert!(s.contains("1.0000000000000001e-1"));
        assert!(s.contains("-2.5000000000000000e-300"));
        assert!(s.contains("\"c\": 3"));
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["b"].as_f64(), Some(0.1));
    }
}
