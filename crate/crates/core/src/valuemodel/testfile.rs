//! `.test` files: `in <var> = <int>` and `expect <var> = <int>` lines. A line
//! consisting of `---` starts the next test case.

use std::collections::BTreeMap;

use thiserror::Error;

use super::TestCase;
use crate::minilang::is_identifier;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct TestFileError {
    pub line: usize,
    pub message: String,
}

pub fn parse_tests(text: &str) -> Result<Vec<TestCase>, TestFileError> {
    let mut cases = Vec::new();
    let mut current = TestCase::default();
    let mut started = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line == "---" {
            if started {
                cases.push(std::mem::take(&mut current));
                started = false;
            }
            continue;
        }
        let err = |message: String| TestFileError {
            line: line_no,
            message,
        };
        let (keyword, rest) = line
            .split_once(char::is_whitespace)
            .ok_or_else(|| err("expected `in <var> = <int>` or `expect <var> = <int>`".into()))?;
        let (var, value) = rest
            .split_once('=')
            .ok_or_else(|| err("missing `=`".into()))?;
        let var = var.trim();
        if !is_identifier(var) {
            return Err(err(format!("invalid variable `{var}`")));
        }
        let value: i64 = value
            .trim()
            .parse()
            .map_err(|_| err(format!("invalid integer `{}`", value.trim())))?;
        let map: &mut BTreeMap<String, i64> = match keyword {
            "in" => &mut current.inputs,
            "expect" => &mut current.expected,
            other => return Err(err(format!("unknown keyword `{other}`"))),
        };
        if map.insert(var.to_string(), value).is_some() {
            return Err(err(format!("`{var}` given twice in one test case")));
        }
        started = true;
    }
    if started {
        cases.push(current);
    }
    Ok(cases)
}

pub fn format_tests(cases: &[TestCase]) -> String {
    let mut out = String::new();
    for (i, case) in cases.iter().enumerate() {
        if i > 0 {
            out.push_str("---\n");
        }
        for (k, v) in &case.inputs {
            out.push_str(&format!("in {k} = {v}\n"));
        }
        for (k, v) in &case.expected {
            out.push_str(&format!("expect {k} = {v}\n"));
        }
    }
    out
}
