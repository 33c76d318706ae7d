//! Single-statement fault injection.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::minilang::{check_program, definitely_assigned_before, stmt_header, BinOp, Expr, Program, Stmt, StmtId, StmtKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MutationOperator {
    OperatorReplace,
    RhsVarReplace,
    LhsVarReplace,
    ConstPerturb,
}

impl MutationOperator {
    pub const ALL: [MutationOperator; 4] = [
        MutationOperator::OperatorReplace,
        MutationOperator::RhsVarReplace,
        MutationOperator::LhsVarReplace,
        MutationOperator::ConstPerturb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MutationOperator::OperatorReplace => "operator-replace",
            MutationOperator::RhsVarReplace => "rhs-var-replace",
            MutationOperator::LhsVarReplace => "lhs-var-replace",
            MutationOperator::ConstPerturb => "const-perturb",
        }
    }

    pub fn fault_side(self) -> FaultSide {
        match self {
            MutationOperator::OperatorReplace => FaultSide::Operator,
            MutationOperator::RhsVarReplace => FaultSide::Rhs,
            MutationOperator::LhsVarReplace => FaultSide::Lhs,
            MutationOperator::ConstPerturb => FaultSide::Const,
        }
    }
}

impl fmt::Display for MutationOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MutationOperator {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MutationOperator::ALL
            .into_iter()
            .find(|op| op.name() == s)
            .ok_or_else(|| {
                format!(
                    "unknown mutation kind `{s}` (expected one of: {})",
                    MutationOperator::ALL.map(|o| o.name()).join(", ")
                )
            })
    }
}

/// Where in an assignment the fault sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FaultSide {
    Lhs,
    Rhs,
    Operator,
    Const,
}

impl FaultSide {
    /// Operator and constant faults sit on the right-hand side too.
    pub fn is_left(self) -> bool {
        self == FaultSide::Lhs
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MutationKind {
    OperatorReplace { from: BinOp, to: BinOp },
    RhsVarReplace { from: String, to: String },
    LhsVarReplace { from: String, to: String },
    ConstPerturb { from: i64, to: i64 },
}

impl MutationKind {
    pub fn operator(&self) -> MutationOperator {
        match self {
            MutationKind::OperatorReplace { .. } => MutationOperator::OperatorReplace,
            MutationKind::RhsVarReplace { .. } => MutationOperator::RhsVarReplace,
            MutationKind::LhsVarReplace { .. } => MutationOperator::LhsVarReplace,
            MutationKind::ConstPerturb { .. } => MutationOperator::ConstPerturb,
        }
    }
}

impl fmt::Display for MutationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MutationKind::OperatorReplace { from, to } => write!(f, "operator {from} -> {to}"),
            MutationKind::RhsVarReplace { from, to } => write!(f, "right-hand variable {from} -> {to}"),
            MutationKind::LhsVarReplace { from, to } => write!(f, "left-hand variable {from} -> {to}"),
            MutationKind::ConstPerturb { from, to } => write!(f, "constant {from} -> {to}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mutation {
    pub statement_id: StmtId,
    pub kind: MutationKind,
    /// Pre-order index of the mutated node among nodes of its kind within the
    /// right-hand side (0 for left-hand replacements).
    pub occurrence: usize,
    pub original_text: String,
    pub mutated_text: String,
}

impl fmt::Display for Mutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "statement {} ({}): {}: `{}` -> `{}`",
            self.statement_id,
            self.statement_id.roman(),
            self.kind,
            self.original_text,
            self.mutated_text
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MutationError {
    #[error("no site admits a {0} mutation")]
    NotApplicable(MutationOperator),
    #[error("statement {0} is not an assignment")]
    NotAnAssignment(StmtId),
    #[error("mutation does not match statement {0}")]
    NoSuchSite(StmtId),
    #[error("mutant is not well-formed: {0}")]
    IllFormed(String),
}

fn stmt_mut(block: &mut [Stmt], id: StmtId) -> Option<&mut Stmt> {
    for stmt in block {
        if stmt.id == id {
            return Some(stmt);
        }
        let found = match &mut stmt.kind {
            StmtKind::Assign { .. } => None,
            StmtKind::If {
                then_block,
                else_block,
                ..
            } => stmt_mut(then_block, id).or_else(|| stmt_mut(else_block, id)),
            StmtKind::While { body, .. } => stmt_mut(body, id),
        };
        if found.is_some() {
            return found;
        }
    }
    None
}

fn binops(e: &Expr, out: &mut Vec<BinOp>) {
    match e {
        Expr::Int(_) | Expr::Var(_) => {}
        Expr::Not(inner) => binops(inner, out),
        Expr::Binary(op, l, r) => {
            out.push(*op);
            binops(l, out);
            binops(r, out);
        }
    }
}

fn var_refs(e: &Expr, out: &mut Vec<String>) {
    match e {
        Expr::Int(_) => {}
        Expr::Var(v) => out.push(v.clone()),
        Expr::Not(inner) => var_refs(inner, out),
        Expr::Binary(_, l, r) => {
            var_refs(l, out);
            var_refs(r, out);
        }
    }
}

fn int_lits(e: &Expr, out: &mut Vec<i64>) {
    match e {
        Expr::Int(n) => out.push(*n),
        Expr::Var(_) => {}
        Expr::Not(inner) => int_lits(inner, out),
        Expr::Binary(_, l, r) => {
            int_lits(l, out);
            int_lits(r, out);
        }
    }
}

/// Rewrites the `n`-th node accepted by `edit` (pre-order). `edit` returns
/// true when it accepts the node, mutating it only if `hit` is set.
fn rewrite_nth(e: &mut Expr, n: usize, seen: &mut usize, edit: &mut dyn FnMut(&mut Expr, bool) -> bool) -> bool {
    let hit = *seen == n;
    if edit(e, false) {
        if hit {
            return edit(e, true);
        }
        *seen += 1;
    }
    match e {
        Expr::Int(_) | Expr::Var(_) => false,
        Expr::Not(inner) => rewrite_nth(inner, n, seen, edit),
        Expr::Binary(_, l, r) => rewrite_nth(l, n, seen, edit) || rewrite_nth(r, n, seen, edit),
    }
}

/// Apply a specific mutation to statement `id`. The result is checked for
/// well-formedness.
pub fn apply_mutation(p: &Program, id: StmtId, kind: &MutationKind, occurrence: usize) -> Result<(Program, Mutation), MutationError> {
    let mut mutant = p.clone();
    let stmt = stmt_mut(&mut mutant.body, id).ok_or(MutationError::NotAnAssignment(id))?;
    let original_text = stmt_header(stmt);
    let StmtKind::Assign { target, rhs } = &mut stmt.kind else {
        return Err(MutationError::NotAnAssignment(id));
    };
    let mut seen = 0;
    let applied = match kind {
        MutationKind::OperatorReplace { from, to } => rewrite_nth(rhs, occurrence, &mut seen, &mut |e, apply| match e {
            Expr::Binary(op, _, _) => {
                if apply {
                    if *op != *from {
                        return false;
                    }
                    *op = *to;
                }
                true
            }
            _ => false,
        }),
        MutationKind::RhsVarReplace { from, to } => rewrite_nth(rhs, occurrence, &mut seen, &mut |e, apply| match e {
            Expr::Var(v) => {
                if apply {
                    if v != from {
                        return false;
                    }
                    *v = to.clone();
                }
                true
            }
            _ => false,
        }),
        MutationKind::ConstPerturb { from, to } => rewrite_nth(rhs, occurrence, &mut seen, &mut |e, apply| match e {
            Expr::Int(n) => {
                if apply {
                    if n != from {
                        return false;
                    }
                    *n = *to;
                }
                true
            }
            _ => false,
        }),
        MutationKind::LhsVarReplace { from, to } => {
            if target != from {
                false
            } else {
                *target = to.clone();
                true
            }
        }
    };
    if !applied {
        return Err(MutationError::NoSuchSite(id));
    }
    let mutated_text = stmt_header(stmt);
    if mutated_text == original_text {
        return Err(MutationError::NoSuchSite(id));
    }
    check_program(&mutant).map_err(|e| MutationError::IllFormed(e.to_string()))?;
    let mutation = Mutation {
        statement_id: id,
        kind: kind.clone(),
        occurrence,
        original_text,
        mutated_text,
    };
    Ok((mutant, mutation))
}

/// Every well-formed mutant of the given operator, in deterministic order
/// (statement id, then site, then replacement).
pub fn enumerate_mutations(p: &Program, op: MutationOperator) -> Vec<(Program, Mutation)> {
    let visible = definitely_assigned_before(p);
    let all_vars: BTreeSet<String> = p.variables();
    let mut out = Vec::new();
    for stmt in p.statements() {
        let StmtKind::Assign { target, rhs } = &stmt.kind else { continue };
        let mut candidates: Vec<(MutationKind, usize)> = Vec::new();
        match op {
            MutationOperator::OperatorReplace => {
                let mut ops = Vec::new();
                binops(rhs, &mut ops);
                for (i, from) in ops.into_iter().enumerate() {
                    for &to in from.siblings() {
                        if to != from {
                            candidates.push((MutationKind::OperatorReplace { from, to }, i));
                        }
                    }
                }
            }
            MutationOperator::RhsVarReplace => {
                let mut refs = Vec::new();
                var_refs(rhs, &mut refs);
                let in_scope = visible
                    .iter()
                    .find(|(id, _)| *id == stmt.id)
                    .map(|(_, vars)| vars.clone())
                    .unwrap_or_default();
                for (i, from) in refs.into_iter().enumerate() {
                    for to in in_scope.iter().filter(|v| **v != from) {
                        candidates.push((
                            MutationKind::RhsVarReplace {
                                from: from.clone(),
                                to: to.clone(),
                            },
                            i,
                        ));
                    }
                }
            }
            MutationOperator::LhsVarReplace => {
                for to in all_vars.iter().filter(|v| *v != target) {
                    candidates.push((
                        MutationKind::LhsVarReplace {
                            from: target.clone(),
                            to: to.clone(),
                        },
                        0,
                    ));
                }
            }
            MutationOperator::ConstPerturb => {
                let mut lits = Vec::new();
                int_lits(rhs, &mut lits);
                for (i, from) in lits.into_iter().enumerate() {
                    for to in [from.wrapping_add(1), from.wrapping_sub(1)] {
                        candidates.push((MutationKind::ConstPerturb { from, to }, i));
                    }
                }
            }
        }
        for (kind, occurrence) in candidates {
            if let Ok(m) = apply_mutation(p, stmt.id, &kind, occurrence) {
                out.push(m);
            }
        }
    }
    out
}

/// Pick one mutant of the given operator, deterministically from `seed`.
pub fn inject_mutation(p: &Program, seed: u64, op: MutationOperator) -> Result<(Program, Mutation), MutationError> {
    let mut all = enumerate_mutations(p, op);
    if all.is_empty() {
        return Err(MutationError::NotApplicable(op));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = rng.gen_range(0..all.len());
    Ok(all.swap_remove(pick))
}
