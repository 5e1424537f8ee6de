//! Command reports and their two renderings.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

/// Version of the structured report layout.
pub const SCHEMA_VERSION: u32 = 1;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Human,
    Structured,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub key: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub tool_version: String,
    pub command: String,
    pub flags: BTreeMap<String, String>,
    pub model: String,
    pub model_hash: String,
    pub pass: bool,
    /// Why the command failed, when it did.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    /// The human-readable table, in display order.
    pub rows: Vec<Row>,
    pub results: serde_json::Value,
}

impl Report {
    pub fn new(command: &str, flags: BTreeMap<String, String>, model: &str, model_hash: &str) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            tool_version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            flags,
            model: model.to_string(),
            model_hash: model_hash.to_string(),
            pass: true,
            witness: None,
            rows: Vec::new(),
            results: serde_json::Value::Null,
        }
    }

    pub fn row(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.rows.push(Row {
            key: key.into(),
            value: value.to_string(),
        });
        self
    }

    pub fn fail(&mut self, witness: impl Into<String>) -> &mut Self {
        self.pass = false;
        self.witness = Some(witness.into());
        self
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Structured => {
                let mut s = serde_json::to_string_pretty(self).expect("serializable report");
                s.push('\n');
                s
            }
            Format::Human => self.render_human(),
        }
    }

    fn render_human(&self) -> String {
        let mut s = String::new();
        let flags: Vec<String> = self.flags.iter().map(|(k, v)| format!("--{k} {v}")).collect();
        let _ = writeln!(s, "{}", [self.command.clone(), flags.join(" ")].join(" ").trim_end());
        let _ = writeln!(s, "model    {} (sha256 {})", self.model, short_hash(&self.model_hash));
        let _ = writeln!(s, "version  sullivan {}", self.tool_version);
        let _ = writeln!(s, "status   {}", if self.pass { "PASS" } else { "FAIL" });
        if let Some(w) = &self.witness {
            let _ = writeln!(s, "witness  {w}");
        }
        if !self.rows.is_empty() {
            s.push('\n');
            let width = self.rows.iter().map(|r| display_width(&r.key)).max().unwrap_or(0);
            for r in &self.rows {
                let pad = width - display_width(&r.key);
                let _ = writeln!(s, "  {}{}  {}", r.key, " ".repeat(pad), r.value);
            }
        }
        s
    }
}

// combining marks such as the bar in m̄ take no column
fn display_width(s: &str) -> usize {
    s.chars().filter(|c| !('\u{300}'..='\u{36f}').contains(c)).count()
}

fn short_hash(h: &str) -> &str {
    &h[..h.len().min(12)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn human_rows_are_aligned() {
        let mut r = Report::new("euler", BTreeMap::new(), "s2", "0123456789abcdef");
        r.row("m", 2).row("chi", 2);
        let out = r.render(Format::Human);
        assert!(out.contains("model    s2 (sha256 0123456789ab)"));
        assert!(out.contains("  m    2\n  chi  2\n"));
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn structured_round_trip() {
        let mut r = Report::new("validate", BTreeMap::new(), "x", "ff");
        r.fail("d²z = x^3");
        let text = r.render(Format::Structured);
        let back: Report = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.exit_code(), 1);
    }
}
