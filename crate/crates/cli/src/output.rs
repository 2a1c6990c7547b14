//! File emission with a provenance header.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn header_line(hash: &str) -> String {
    format!("# hbar-quench {VERSION} config-sha256 {hash}")
}

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(hash: &str, columns: &[&str]) -> Self {
        let mut text = header_line(hash);
        text.push('\n');
        text.push_str(&columns.join(","));
        text.push('\n');
        Self { text }
    }

    pub fn comment(&mut self, line: &str) {
        // comments go above the column names
        let at = self.text.find('\n').map_or(0, |i| i + 1);
        self.text.insert_str(at, &format!("# {line}\n"));
    }

    pub fn row(&mut self, fields: &[String]) {
        let _ = writeln!(self.text, "{}", fields.join(","));
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    generator: String,
    config_sha256: &'a str,
    data: &'a T,
}

pub fn json<T: Serialize>(hash: &str, data: &T) -> Result<String> {
    let env = Envelope { generator: format!("hbar-quench {VERSION}"), config_sha256: hash, data };
    let mut s = serde_json::to_string_pretty(&env)?;
    s.push('\n');
    Ok(s)
}

pub fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

/// `10` for integral charges, otherwise the shortest round-trip form.
pub fn charge_tag(q: f64) -> String {
    format!("Q{q}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut c = Csv::new("abc", &["x", "y"]);
        c.row(&[num(1.0), num(0.1)]);
        c.comment("note");
        let lines: Vec<&str> = c.text().lines().collect();
        assert!(lines[0].starts_with("# hbar-quench") && lines[0].ends_with("abc"));
        assert_eq!(lines[1], "# note");
        assert_eq!(lines[2], "x,y");
        assert_eq!(lines[3], "1.0000000000000000e0,1.0000000000000001e-1");
    }

    #[test]
    fn tags() {
        assert_eq!(charge_tag(10.0), "Q10");
        assert_eq!(charge_tag(2.5), "Q2.5");
    }
}
