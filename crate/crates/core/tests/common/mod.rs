#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use faultloc::minilang::{check_program, run, BinOp, EvalLimits, Expr, Program, Stmt, StmtId, StmtKind};
use faultloc::valuemodel::TestCase;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const INPUTS: [&str; 3] = ["a", "b", "c"];
const LOCALS: [&str; 4] = ["x", "y", "z", "w"];

/// Random expression over `vars`; any operator, any nesting.
pub fn random_expr(rng: &mut ChaCha8Rng, vars: &[String], depth: u32) -> Expr {
    let leaf = depth == 0 || rng.gen_bool(0.35);
    if leaf {
        if !vars.is_empty() && rng.gen_bool(0.6) {
            return Expr::Var(vars.choose(rng).unwrap().clone());
        }
        return Expr::Int(rng.gen_range(-4..=6));
    }
    if rng.gen_bool(0.1) {
        return Expr::Not(Box::new(random_expr(rng, vars, depth - 1)));
    }
    let op = *BinOp::ALL.choose(rng).unwrap();
    Expr::binary(op, random_expr(rng, vars, depth - 1), random_expr(rng, vars, depth - 1))
}

fn arith_expr(rng: &mut ChaCha8Rng, vars: &[String], depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.4) {
        if !vars.is_empty() && rng.gen_bool(0.7) {
            return Expr::Var(vars.choose(rng).unwrap().clone());
        }
        return Expr::Int(rng.gen_range(0..=5));
    }
    let op = *[BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Add].choose(rng).unwrap();
    Expr::binary(op, arith_expr(rng, vars, depth - 1), arith_expr(rng, vars, depth - 1))
}

struct Gen {
    rng: ChaCha8Rng,
    budget: usize,
    loops: usize,
    arith_only: bool,
}

impl Gen {
    fn expr(&mut self, defined: &BTreeSet<String>) -> Expr {
        let vars: Vec<String> = defined.iter().filter(|v| !v.starts_with('k')).cloned().collect();
        if self.arith_only {
            arith_expr(&mut self.rng, &vars, 2)
        } else {
            random_expr(&mut self.rng, &vars, 3)
        }
    }

    fn assign(&mut self, defined: &mut BTreeSet<String>, protected: &BTreeSet<String>) -> Stmt {
        let pool: Vec<&str> = LOCALS
            .iter()
            .chain(INPUTS.iter())
            .copied()
            .filter(|v| !protected.contains(*v))
            .collect();
        let target = pool.choose(&mut self.rng).unwrap().to_string();
        let rhs = self.expr(defined);
        defined.insert(target.clone());
        Stmt {
            id: StmtId(0),
            kind: StmtKind::Assign { target, rhs },
        }
    }

    fn block(&mut self, defined: &mut BTreeSet<String>, protected: &BTreeSet<String>, depth: u32) -> Vec<Stmt> {
        let mut out = Vec::new();
        while self.budget > 0 {
            self.budget -= 1;
            let roll = self.rng.gen_range(0..10);
            if depth < 2 && roll == 0 && self.budget >= 3 && self.loops < 2 {
                // Bounded loop: a fresh counter that only the loop decrements.
                let k = format!("k{}", self.loops);
                self.loops += 1;
                self.budget -= 2;
                let bound = self.rng.gen_range(0..=3);
                out.push(Stmt {
                    id: StmtId(0),
                    kind: StmtKind::Assign {
                        target: k.clone(),
                        rhs: Expr::Int(bound),
                    },
                });
                defined.insert(k.clone());
                let mut inner_protected = protected.clone();
                inner_protected.insert(k.clone());
                let mut inner = defined.clone();
                let budget_after = self.budget.saturating_sub(2);
                self.budget = self.budget.min(2);
                let mut body = self.block(&mut inner, &inner_protected, depth + 1);
                self.budget += budget_after;
                body.push(Stmt {
                    id: StmtId(0),
                    kind: StmtKind::Assign {
                        target: k.clone(),
                        rhs: Expr::binary(BinOp::Sub, Expr::var(&k), Expr::Int(1)),
                    },
                });
                out.push(Stmt {
                    id: StmtId(0),
                    kind: StmtKind::While {
                        cond: Expr::binary(BinOp::Gt, Expr::var(&k), Expr::Int(0)),
                        body,
                    },
                });
            } else if depth < 2 && roll <= 2 && self.budget >= 2 {
                let cond = self.expr(defined);
                let budget_after = self.budget.saturating_sub(2);
                self.budget = self.budget.min(2);
                let mut t = defined.clone();
                let then_block = self.block(&mut t, protected, depth + 1);
                self.budget = self.rng.gen_range(0..=1);
                let mut e = defined.clone();
                let else_block = self.block(&mut e, protected, depth + 1);
                self.budget = budget_after;
                *defined = t.intersection(&e).cloned().collect();
                out.push(Stmt {
                    id: StmtId(0),
                    kind: StmtKind::If {
                        cond,
                        then_block,
                        else_block,
                    },
                });
            } else {
                out.push(self.assign(defined, protected));
            }
            if depth > 0 && self.rng.gen_bool(0.4) {
                break;
            }
        }
        out
    }
}

fn build(seed: u64, max_stmts: usize, arith_only: bool) -> Program {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        budget: 0,
        loops: 0,
        arith_only,
    };
    let n_inputs = g.rng.gen_range(1..=3);
    let inputs: Vec<String> = INPUTS[..n_inputs].iter().map(|s| s.to_string()).collect();
    g.budget = g.rng.gen_range(1..=max_stmts);
    let mut defined: BTreeSet<String> = inputs.iter().cloned().collect();
    let mut body = g.block(&mut defined, &BTreeSet::new(), 0);
    let assigned: Vec<String> = faultloc::minilang::assigned_vars(&body)
        .into_iter()
        .filter(|v| defined.contains(v) && !v.starts_with('k'))
        .collect();
    let outputs = if assigned.is_empty() {
        let target = LOCALS[0].to_string();
        body.push(Stmt {
            id: StmtId(0),
            kind: StmtKind::Assign {
                target: target.clone(),
                rhs: Expr::var(&inputs[0]),
            },
        });
        vec![target]
    } else {
        let n = g.rng.gen_range(1..=assigned.len().min(2));
        let mut outs: Vec<String> = assigned.choose_multiple(&mut g.rng, n).cloned().collect();
        outs.sort();
        outs
    };
    let mut p = Program { inputs, outputs, body };
    p.renumber();
    check_program(&p).unwrap_or_else(|e| panic!("generator produced an ill-formed program (seed {seed}): {e}"));
    p
}

/// A well-formed program with at most roughly `max_stmts` statements, using
/// every operator. Loops always terminate.
pub fn random_program(seed: u64, max_stmts: usize) -> Program {
    build(seed, max_stmts, false)
}

/// Like [`random_program`] but arithmetic right-hand sides only, so runs
/// never divide by zero.
pub fn random_arith_program(seed: u64, max_stmts: usize) -> Program {
    build(seed, max_stmts, true)
}

/// Random inputs with expected outputs taken from a concrete run, or `None`
/// when the run fails.
pub fn observed_test(p: &Program, rng: &mut ChaCha8Rng) -> Option<TestCase> {
    let inputs: BTreeMap<String, i64> = p.inputs.iter().map(|v| (v.clone(), rng.gen_range(-5..=9))).collect();
    let env = run(p, &inputs, EvalLimits::default()).ok()?;
    let expected = p.outputs.iter().map(|o| (o.clone(), env[o])).collect();
    Some(TestCase { inputs, expected })
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
