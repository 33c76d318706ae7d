//! MiniLang: a small structured imperative language over integers.
//!
//! Programs declare their inputs and outputs, then list statements:
//!
//! ```text
//! input a, b;
//! output c;
//! a := a + 2;
//! b := b + a;
//! c := a + b;
//! ```
//!
//! Statements are assignments, `if (..) { .. } else { .. }` and
//! `while (..) { .. }`. Booleans are integers (zero is false). `#` starts a
//! line comment. Variable names may contain dots (`name.lastname`), which
//! stands in for record field access.

mod ast;
mod check;
mod interp;
mod lexer;
mod parser;
mod pretty;

use thiserror::Error;

pub use ast::{assign_ids, assigned_vars, to_roman, walk, BinOp, Expr, Program, Stmt, StmtId, StmtKind};
pub use check::{check_program, definitely_assigned_before};
pub use interp::{apply_binop, run, Env, EvalLimits, DEFAULT_MAX_LOOP_ITERATIONS};
pub use lexer::is_identifier;
pub use parser::{parse_syntax, parse_with_lines};
pub use pretty::{expr_to_string, pretty, stmt_header};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}{}", expected_suffix(.expected))]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
    pub expected: Vec<String>,
}

fn expected_suffix(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected {})", expected.join(" or "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticError {
    #[error("variable `{var}` read at statement {stmt} is not assigned on every path")]
    UnassignedRead { var: String, stmt: StmtId },
    #[error("variable `{var}` declared twice in {list} list")]
    DuplicateDeclaration { var: String, list: &'static str },
    #[error("output `{var}` is not assigned on every path")]
    OutputNotAssigned { var: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseProgramError {
    #[error("syntax error at {0}")]
    Syntax(#[from] ParseError),
    #[error("semantic error: {0}")]
    Semantic(#[from] SemanticError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("loop at statement {stmt} exceeded {limit} iterations")]
    LoopLimitExceeded { stmt: StmtId, limit: u64 },
    #[error("division by zero at statement {stmt}")]
    DivisionByZero { stmt: StmtId },
    #[error("missing value for input `{0}`")]
    MissingInput(String),
    #[error("`{0}` is not a declared input")]
    UnexpectedInput(String),
    #[error("variable `{var}` unbound at statement {stmt}")]
    UnboundVariable { var: String, stmt: StmtId },
    #[error("loop limit must be at least 1")]
    InvalidLimits,
}

/// Parse and statically check a program.
pub fn parse(src: &str) -> Result<Program, ParseProgramError> {
    let p = parse_syntax(src)?;
    check_program(&p)?;
    Ok(p)
}
