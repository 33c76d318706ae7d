use std::collections::BTreeSet;

use thiserror::Error;

use super::{Conflict, Diagnosis};
use crate::minilang::StmtId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ConflictFileError {
    pub line: usize,
    pub message: String,
}

/// One conflict per line, space-separated positive ids. Blank lines and `#`
/// comments are skipped.
pub fn parse_conflicts(text: &str) -> Result<Vec<Conflict>, ConflictFileError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut members = BTreeSet::new();
        for tok in line.split_whitespace() {
            match tok.parse::<u32>() {
                Ok(n) if n > 0 => {
                    members.insert(StmtId(n));
                }
                _ => {
                    return Err(ConflictFileError {
                        line: idx + 1,
                        message: format!("`{tok}` is not a positive integer id"),
                    })
                }
            }
        }
        out.extend(Conflict::new(members));
    }
    Ok(out)
}

/// One diagnosis per line, ids space-separated; the empty diagnosis is `{}`.
pub fn format_diagnoses(diagnoses: &[Diagnosis]) -> String {
    let mut out = String::new();
    for d in diagnoses {
        if d.is_empty() {
            out.push_str("{}");
        } else {
            let ids: Vec<String> = d.members().iter().map(|i| i.to_string()).collect();
            out.push_str(&ids.join(" "));
        }
        out.push('\n');
    }
    out
}
