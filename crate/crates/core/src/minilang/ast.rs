use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Identifier of a statement. Ids are 1-based and follow textual order; they
/// double as component identifiers during diagnosis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StmtId(pub u32);

impl StmtId {
    /// Roman-numeral rendering used in reports (1 -> I, 3 -> III).
    pub fn roman(self) -> String {
        to_roman(self.0)
    }
}

impl fmt::Display for StmtId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn to_roman(mut n: u32) -> String {
    if n == 0 {
        return "0".to_string();
    }
    const TABLE: [(u32, &str); 13] = [
        (1000, "M"),
        (900, "CM"),
        (500, "D"),
        (400, "CD"),
        (100, "C"),
        (90, "XC"),
        (50, "L"),
        (40, "XL"),
        (10, "X"),
        (9, "IX"),
        (5, "V"),
        (4, "IV"),
        (1, "I"),
    ];
    let mut out = String::new();
    for &(value, glyph) in &TABLE {
        while n >= value {
            out.push_str(glyph);
            n -= value;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub const ALL: [BinOp; 12] = [
        BinOp::Add,
        BinOp::Sub,
        BinOp::Mul,
        BinOp::Div,
        BinOp::Lt,
        BinOp::Le,
        BinOp::Gt,
        BinOp::Ge,
        BinOp::Eq,
        BinOp::Ne,
        BinOp::And,
        BinOp::Or,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "and",
            BinOp::Or => "or",
        }
    }

    /// Binding strength; larger binds tighter. All binary operators are
    /// left-associative.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div => 6,
        }
    }

    /// Operators a mutation may swap this one for: same family, different op.
    pub fn siblings(self) -> &'static [BinOp] {
        match self {
            BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => {
                &[BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div]
            }
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne => &[
                BinOp::Lt,
                BinOp::Le,
                BinOp::Gt,
                BinOp::Ge,
                BinOp::Eq,
                BinOp::Ne,
            ],
            BinOp::And | BinOp::Or => &[BinOp::And, BinOp::Or],
        }
    }
}

impl fmt::Display for BinOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Expr {
    Int(i64),
    Var(String),
    Not(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// Variables read by the expression, deduplicated and sorted.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Int(_) => {}
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Not(e) => e.collect_vars(out),
            Expr::Binary(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Stmt {
    pub id: StmtId,
    pub kind: StmtKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StmtKind {
    Assign {
        target: String,
        rhs: Expr,
    },
    If {
        cond: Expr,
        then_block: Vec<Stmt>,
        else_block: Vec<Stmt>,
    },
    While {
        cond: Expr,
        body: Vec<Stmt>,
    },
}

impl Stmt {
    pub fn is_assign(&self) -> bool {
        matches!(self.kind, StmtKind::Assign { .. })
    }

    /// The variable this statement defines, if it is an assignment.
    pub fn target(&self) -> Option<&str> {
        match &self.kind {
            StmtKind::Assign { target, .. } => Some(target),
            _ => None,
        }
    }
}

/// Visit every statement in pre-order (textual order).
pub fn walk<'a>(block: &'a [Stmt], f: &mut dyn FnMut(&'a Stmt)) {
    for stmt in block {
        f(stmt);
        match &stmt.kind {
            StmtKind::Assign { .. } => {}
            StmtKind::If {
                then_block,
                else_block,
                ..
            } => {
                walk(then_block, f);
                walk(else_block, f);
            }
            StmtKind::While { body, .. } => walk(body, f),
        }
    }
}

/// Variables assigned anywhere inside the block, including nested blocks.
pub fn assigned_vars(block: &[Stmt]) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    walk(block, &mut |s| {
        if let Some(t) = s.target() {
            out.insert(t.to_string());
        }
    });
    out
}

/// Assignment ids inside the block, including nested blocks.
pub fn assign_ids(block: &[Stmt]) -> BTreeSet<StmtId> {
    let mut out = BTreeSet::new();
    walk(block, &mut |s| {
        if s.is_assign() {
            out.insert(s.id);
        }
    });
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Program {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub body: Vec<Stmt>,
}

impl Program {
    pub fn statements(&self) -> Vec<&Stmt> {
        let mut out = Vec::new();
        walk(&self.body, &mut |s| out.push(s));
        out
    }

    pub fn statement(&self, id: StmtId) -> Option<&Stmt> {
        self.statements().into_iter().find(|s| s.id == id)
    }

    pub fn statement_count(&self) -> usize {
        self.statements().len()
    }

    /// Ids of assignment statements: the diagnosable components.
    pub fn assign_ids(&self) -> BTreeSet<StmtId> {
        assign_ids(&self.body)
    }

    pub fn assigned_vars(&self) -> BTreeSet<String> {
        assigned_vars(&self.body)
    }

    /// Inputs plus every assigned variable.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut vars: BTreeSet<String> = self.inputs.iter().cloned().collect();
        vars.extend(self.assigned_vars());
        vars
    }

    /// Assignment statements defining `var`.
    pub fn definers(&self, var: &str) -> BTreeSet<StmtId> {
        self.statements()
            .into_iter()
            .filter(|s| s.target() == Some(var))
            .map(|s| s.id)
            .collect()
    }

    /// Reassign ids 1.. in textual order. Used after structural edits.
    pub fn renumber(&mut self) {
        fn go(block: &mut [Stmt], next: &mut u32) {
            for stmt in block {
                stmt.id = StmtId(*next);
                *next += 1;
                match &mut stmt.kind {
                    StmtKind::Assign { .. } => {}
                    StmtKind::If {
                        then_block,
                        else_block,
                        ..
                    } => {
                        go(then_block, next);
                        go(else_block, next);
                    }
                    StmtKind::While { body, .. } => go(body, next),
                }
            }
        }
        let mut next = 1;
        go(&mut self.body, &mut next);
    }
}
