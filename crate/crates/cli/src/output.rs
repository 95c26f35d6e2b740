//! Record emission. Records are canonical JSON: object keys sorted, floats
//! in scientific notation with 17 significant digits, one record per line.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::failure::Failure;

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write the record to this file instead of standard output.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,

    /// Human-readable key/value view instead of a JSON record.
    #[arg(long)]
    pub pretty: bool,
}

struct Canonical;

impl Formatter for Canonical {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }
}

/// One canonical JSON line.
pub fn canonical_line<T: Serialize>(record: &T) -> Result<String, Failure> {
    let value = serde_json::to_value(record).map_err(|e| Failure::Config(e.to_string()))?;
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Canonical);
    value
        .serialize(&mut ser)
        .map_err(|e| Failure::Config(e.to_string()))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("JSON is UTF-8"))
}

fn pretty_lines(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                pretty_lines(&key(k), x, out);
            }
        }
        Value::Array(xs) if xs.iter().all(|x| !x.is_object() && !x.is_array()) => {
            let items: Vec<String> = xs.iter().map(scalar).collect();
            out.push((prefix.to_string(), items.join(" ")));
        }
        Value::Array(xs) => {
            for (i, x) in xs.iter().enumerate() {
                pretty_lines(&format!("{prefix}[{i}]"), x, out);
            }
        }
        _ => out.push((prefix.to_string(), scalar(v))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => "-".into(),
        Value::String(s) => s.clone(),
        Value::Number(n) if n.is_f64() => format!("{:.6e}", n.as_f64().expect("float")),
        other => other.to_string(),
    }
}

pub fn pretty_text<T: Serialize>(record: &T) -> Result<String, Failure> {
    let value = serde_json::to_value(record).map_err(|e| Failure::Config(e.to_string()))?;
    let mut rows = Vec::new();
    pretty_lines("", &value, &mut rows);
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    Ok(rows
        .iter()
        .map(|(k, v)| format!("{k:<width$}  {v}\n"))
        .collect())
}

/// Writes the record to `--out` or standard output.
pub fn emit<T: Serialize>(args: &OutputArgs, record: &T) -> Result<(), Failure> {
    let text = if args.pretty {
        pretty_text(record)?
    } else {
        canonical_line(record)?
    };
    match &args.out {
        Some(path) => write_file(path, text.as_bytes()).map(|_| ()),
        None => {
            io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// Writes `bytes` and returns their SHA-256 in hex.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<String, Failure> {
    let mut f = File::create(path)
        .map_err(|e| Failure::Config(format!("cannot create {}: {e}", path.display())))?;
    f.write_all(bytes)?;
    Ok(sha256_hex(bytes))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Fails unless `dir` is an existing directory.
pub fn require_dir(dir: &Path) -> Result<(), Failure> {
    if dir.is_dir() {
        Ok(())
    } else {
        Err(Failure::Config(format!(
            "output directory {} does not exist",
            dir.display()
        )))
    }
}
