use std::fmt::Write;

use super::ast::{Expr, Program, Stmt, StmtKind};

/// Canonical source text for a program. Re-parsing the output yields a
/// structurally equal program.
pub fn pretty(p: &Program) -> String {
    let mut out = String::new();
    out.push_str("input");
    write_list(&mut out, &p.inputs);
    out.push_str(";\noutput");
    write_list(&mut out, &p.outputs);
    out.push_str(";\n");
    for stmt in &p.body {
        write_stmt(&mut out, stmt, 0);
    }
    out
}

fn write_list(out: &mut String, names: &[String]) {
    for (i, n) in names.iter().enumerate() {
        out.push_str(if i == 0 { " " } else { ", " });
        out.push_str(n);
    }
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn write_stmt(out: &mut String, stmt: &Stmt, depth: usize) {
    indent(out, depth);
    match &stmt.kind {
        StmtKind::Assign { .. } => {
            out.push_str(&stmt_header(stmt));
            out.push('\n');
        }
        StmtKind::If {
            cond,
            then_block,
            else_block,
        } => {
            let _ = writeln!(out, "if ({}) {{", expr_to_string(cond));
            for s in then_block {
                write_stmt(out, s, depth + 1);
            }
            indent(out, depth);
            if else_block.is_empty() {
                out.push_str("}\n");
            } else {
                out.push_str("} else {\n");
                for s in else_block {
                    write_stmt(out, s, depth + 1);
                }
                indent(out, depth);
                out.push_str("}\n");
            }
        }
        StmtKind::While { cond, body } => {
            let _ = writeln!(out, "while ({}) {{", expr_to_string(cond));
            for s in body {
                write_stmt(out, s, depth + 1);
            }
            indent(out, depth);
            out.push_str("}\n");
        }
    }
}

/// One-line rendering of a statement: the full text of an assignment, or the
/// header of a compound statement.
pub fn stmt_header(stmt: &Stmt) -> String {
    match &stmt.kind {
        StmtKind::Assign { target, rhs } => format!("{target} := {};", expr_to_string(rhs)),
        StmtKind::If { cond, .. } => format!("if ({})", expr_to_string(cond)),
        StmtKind::While { cond, .. } => format!("while ({})", expr_to_string(cond)),
    }
}

pub fn expr_to_string(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, 0);
    out
}

// `min` is the weakest precedence that may appear here without parentheses.
fn write_expr(out: &mut String, e: &Expr, min: u8) {
    match e {
        Expr::Int(n) => {
            let _ = write!(out, "{n}");
        }
        Expr::Var(v) => out.push_str(v),
        Expr::Not(inner) => {
            out.push_str("not ");
            write_expr(out, inner, u8::MAX);
        }
        Expr::Binary(op, l, r) => {
            let prec = op.precedence();
            let wrap = prec < min;
            if wrap {
                out.push('(');
            }
            write_expr(out, l, prec);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(out, r, prec + 1);
            if wrap {
                out.push(')');
            }
        }
    }
}
