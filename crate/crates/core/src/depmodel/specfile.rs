//! `.deps` files: one line per target, `target <- source1, source2`.

use thiserror::Error;

use super::{DependencePair, DependenceSet};
use crate::minilang::is_identifier;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct DepsFileError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedDeps {
    pub set: DependenceSet,
    /// Duplicate pairs that were dropped.
    pub warnings: Vec<String>,
}

pub fn parse_deps(text: &str) -> Result<ParsedDeps, DepsFileError> {
    let mut set = DependenceSet::default();
    let mut warnings = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| DepsFileError {
            line: line_no,
            message,
        };
        let (target, sources) = line
            .split_once("<-")
            .ok_or_else(|| err("expected `target <- source, ...`".to_string()))?;
        let target = target.trim();
        if !is_identifier(target) {
            return Err(err(format!("invalid target `{target}`")));
        }
        let sources = sources.trim();
        if sources.is_empty() {
            continue;
        }
        for src in sources.split(',') {
            let src = src.trim();
            if !is_identifier(src) {
                return Err(err(format!("invalid source `{src}`")));
            }
            let pair = DependencePair::new(target, src);
            if set.pairs.contains(&pair) {
                warnings.push(format!("line {line_no}: duplicate pair {pair} ignored"));
            } else {
                set.pairs.insert(pair);
            }
        }
    }
    Ok(ParsedDeps { set, warnings })
}

/// Canonical `.deps` text: targets in order, sources sorted.
pub fn format_deps(set: &DependenceSet) -> String {
    let mut out = String::new();
    for (target, sources) in set.by_target() {
        out.push_str(target);
        out.push_str(" <- ");
        out.push_str(&sources.join(", "));
        out.push('\n');
    }
    out
}
