//! Emission helpers shared by the subcommands: round-trip-safe floats,
//! CSV assembly, and file-or-stdout writing. Formatting is locale-free and
//! deterministic, so identical inputs produce identical bytes.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

/// 17 significant digits: enough to round-trip any `f64` exactly.
pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

/// One CSV line from already-formatted cells, newline-terminated.
pub fn csv_line(cells: &[&str]) -> String {
    let mut line = cells.join(",");
    line.push('\n');
    line
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> io::Result<()> {
    match path {
        Some(p) => fs::write(p, text),
        None => io::stdout().write_all(text.as_bytes()),
    }
}

/// A file named `name` in the same directory as `primary`.
pub fn sibling(primary: &Path, name: &str) -> PathBuf {
    match primary.parent() {
        Some(dir) => dir.join(name),
        None => PathBuf::from(name),
    }
}

/// Pretty JSON with a trailing newline.
pub fn json_text(value: &serde_json::Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    text
}
