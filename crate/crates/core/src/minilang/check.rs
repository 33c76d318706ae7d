use std::collections::BTreeSet;

use super::ast::{Expr, Program, Stmt, StmtId, StmtKind};
use super::SemanticError;

/// Static well-formedness: no duplicate declarations, every read is
/// definitely assigned on all paths, every output is definitely assigned at
/// exit.
pub fn check_program(p: &Program) -> Result<(), SemanticError> {
    let mut seen = BTreeSet::new();
    for v in &p.inputs {
        if !seen.insert(v) {
            return Err(SemanticError::DuplicateDeclaration {
                var: v.clone(),
                list: "input",
            });
        }
    }
    let mut seen = BTreeSet::new();
    for v in &p.outputs {
        if !seen.insert(v) {
            return Err(SemanticError::DuplicateDeclaration {
                var: v.clone(),
                list: "output",
            });
        }
    }

    let initial: BTreeSet<String> = p.inputs.iter().cloned().collect();
    let at_exit = check_block(&p.body, initial)?;
    for out in &p.outputs {
        if !at_exit.contains(out) {
            return Err(SemanticError::OutputNotAssigned { var: out.clone() });
        }
    }
    Ok(())
}

/// Variables definitely assigned before each statement, keyed by id. Used by
/// the mutation operators to pick replacement variables.
pub fn definitely_assigned_before(p: &Program) -> Vec<(StmtId, BTreeSet<String>)> {
    fn go(block: &[Stmt], mut assigned: BTreeSet<String>, out: &mut Vec<(StmtId, BTreeSet<String>)>) -> BTreeSet<String> {
        for stmt in block {
            out.push((stmt.id, assigned.clone()));
            match &stmt.kind {
                StmtKind::Assign { target, .. } => {
                    assigned.insert(target.clone());
                }
                StmtKind::If {
                    then_block,
                    else_block,
                    ..
                } => {
                    let t = go(then_block, assigned.clone(), out);
                    let e = go(else_block, assigned.clone(), out);
                    assigned = t.intersection(&e).cloned().collect();
                }
                StmtKind::While { body, .. } => {
                    go(body, assigned.clone(), out);
                }
            }
        }
        assigned
    }
    let mut out = Vec::new();
    go(&p.body, p.inputs.iter().cloned().collect(), &mut out);
    out
}

fn check_reads(e: &Expr, assigned: &BTreeSet<String>, stmt: StmtId) -> Result<(), SemanticError> {
    for v in e.vars() {
        if !assigned.contains(&v) {
            return Err(SemanticError::UnassignedRead { var: v, stmt });
        }
    }
    Ok(())
}

fn check_block(block: &[Stmt], mut assigned: BTreeSet<String>) -> Result<BTreeSet<String>, SemanticError> {
    for stmt in block {
        match &stmt.kind {
            StmtKind::Assign { target, rhs } => {
                check_reads(rhs, &assigned, stmt.id)?;
                assigned.insert(target.clone());
            }
            StmtKind::If {
                cond,
                then_block,
                else_block,
            } => {
                check_reads(cond, &assigned, stmt.id)?;
                let t = check_block(then_block, assigned.clone())?;
                let e = check_block(else_block, assigned.clone())?;
                assigned = t.intersection(&e).cloned().collect();
            }
            StmtKind::While { cond, body } => {
                check_reads(cond, &assigned, stmt.id)?;
                // the body may run zero times
                check_block(body, assigned.clone())?;
            }
        }
    }
    Ok(assigned)
}

#[cfg(test)]
mod tests {
    use super::super::{parse, parse_syntax, ParseProgramError};
    use super::*;

    fn semantic(src: &str) -> SemanticError {
        match parse(src).unwrap_err() {
            ParseProgramError::Semantic(e) => e,
            other => panic!("expected semantic error, got {other}"),
        }
    }

    #[test]
    fn unassigned_read_is_rejected() {
        assert_eq!(
            semantic("input x; output y; y := z;"),
            SemanticError::UnassignedRead {
                var: "z".into(),
                stmt: StmtId(1)
            }
        );
    }

    #[test]
    fn one_armed_if_does_not_define() {
        let e = semantic("input a; output b; if (a > 0) { b := 1; } c := b;");
        assert_eq!(
            e,
            SemanticError::UnassignedRead {
                var: "b".into(),
                stmt: StmtId(3)
            }
        );
        parse("input a; output b; if (a > 0) { b := 1; } else { b := 2; } c := b;").unwrap();
    }

    #[test]
    fn loop_body_does_not_define() {
        let e = semantic("input n; output s; while (n > 0) { s := 1; n := n - 1; }");
        assert_eq!(e, SemanticError::OutputNotAssigned { var: "s".into() });
    }

    #[test]
    fn loop_carried_read_needs_prior_definition() {
        let e = semantic("input n; output n; while (n > 0) { n := n - t; t := 1; }");
        assert!(matches!(e, SemanticError::UnassignedRead { ref var, .. } if var == "t"));
    }

    #[test]
    fn duplicate_declarations() {
        assert!(matches!(
            semantic("input a, a; output a;"),
            SemanticError::DuplicateDeclaration { list: "input", .. }
        ));
        assert!(matches!(
            semantic("input a; output a, a;"),
            SemanticError::DuplicateDeclaration { list: "output", .. }
        ));
    }

    #[test]
    fn assigned_before_tracks_paths() {
        let p = parse_syntax("input a; output c; b := a; if (a > 0) { c := b; } else { c := 0; } d := c;").unwrap();
        let before = definitely_assigned_before(&p);
        let last = before.iter().find(|(id, _)| *id == StmtId(5)).unwrap();
        assert_eq!(last.1, ["a", "b", "c"].iter().map(|s| s.to_string()).collect());
    }
}
