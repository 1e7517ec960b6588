//! Signal files: one real per line, or raw little-endian f64.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalFormat {
    CsvText,
    F64LeBinary,
}

impl SignalFormat {
    pub fn from_binary_flag(binary: bool) -> Self {
        if binary {
            SignalFormat::F64LeBinary
        } else {
            SignalFormat::CsvText
        }
    }
}

pub fn read_signal(path: &Path, format: SignalFormat) -> Result<Vec<f64>, String> {
    let bytes = fs::read(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let samples = match format {
        SignalFormat::CsvText => parse_text(&bytes, path)?,
        SignalFormat::F64LeBinary => {
            if bytes.len() % 8 != 0 {
                return Err(format!(
                    "{}: length {} is not a multiple of 8 bytes",
                    path.display(),
                    bytes.len()
                ));
            }
            bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect()
        }
    };
    if samples.is_empty() {
        return Err(format!("{}: signal is empty", path.display()));
    }
    Ok(samples)
}

fn parse_text(bytes: &[u8], path: &Path) -> Result<Vec<f64>, String> {
    let text = std::str::from_utf8(bytes).map_err(|_| format!("{}: not UTF-8 text", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let v: f64 = t
            .parse()
            .map_err(|_| format!("{}:{}: not a number: {t:?}", path.display(), i + 1))?;
        if !v.is_finite() {
            return Err(format!("{}:{}: non-finite sample", path.display(), i + 1));
        }
        out.push(v);
    }
    Ok(out)
}

pub fn write_signal<W: Write>(mut out: W, samples: &[f64], format: SignalFormat) -> io::Result<()> {
    match format {
        SignalFormat::CsvText => {
            for v in samples {
                writeln!(out, "{v:?}")?;
            }
        }
        SignalFormat::F64LeBinary => {
            for v in samples {
                out.write_all(&v.to_le_bytes())?;
            }
        }
    }
    out.flush()
}
