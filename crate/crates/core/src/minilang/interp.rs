use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ast::{BinOp, Expr, Program, Stmt, StmtId, StmtKind};
use super::EvalError;

pub const DEFAULT_MAX_LOOP_ITERATIONS: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalLimits {
    /// Iterations allowed per execution of a single `while` statement.
    pub max_loop_iterations: u64,
}

impl Default for EvalLimits {
    fn default() -> Self {
        EvalLimits {
            max_loop_iterations: DEFAULT_MAX_LOOP_ITERATIONS,
        }
    }
}

impl EvalLimits {
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.max_loop_iterations == 0 {
            return Err(EvalError::InvalidLimits);
        }
        Ok(())
    }
}

pub type Env = BTreeMap<String, i64>;

/// Integer semantics shared by the concrete interpreter and the value model.
/// Arithmetic wraps; comparisons and logic yield 0/1. `None` means division
/// by zero.
pub fn apply_binop(op: BinOp, a: i64, b: i64) -> Option<i64> {
    let truth = |c: bool| c as i64;
    Some(match op {
        BinOp::Add => a.wrapping_add(b),
        BinOp::Sub => a.wrapping_sub(b),
        BinOp::Mul => a.wrapping_mul(b),
        BinOp::Div => {
            if b == 0 {
                return None;
            }
            a.wrapping_div(b)
        }
        BinOp::Lt => truth(a < b),
        BinOp::Le => truth(a <= b),
        BinOp::Gt => truth(a > b),
        BinOp::Ge => truth(a >= b),
        BinOp::Eq => truth(a == b),
        BinOp::Ne => truth(a != b),
        BinOp::And => truth(a != 0 && b != 0),
        BinOp::Or => truth(a != 0 || b != 0),
    })
}

/// Run a program concretely. Returns final values of inputs and every
/// variable assigned on the executed path.
pub fn run(p: &Program, inputs: &BTreeMap<String, i64>, limits: EvalLimits) -> Result<Env, EvalError> {
    limits.validate()?;
    let declared: Vec<&String> = p.inputs.iter().collect();
    for name in &declared {
        if !inputs.contains_key(*name) {
            return Err(EvalError::MissingInput((*name).clone()));
        }
    }
    if let Some(extra) = inputs.keys().find(|k| !p.inputs.contains(k)) {
        return Err(EvalError::UnexpectedInput(extra.clone()));
    }
    let mut env: Env = inputs.clone();
    exec_block(&p.body, &mut env, limits)?;
    Ok(env)
}

fn exec_block(block: &[Stmt], env: &mut Env, limits: EvalLimits) -> Result<(), EvalError> {
    for stmt in block {
        match &stmt.kind {
            StmtKind::Assign { target, rhs } => {
                let v = eval(rhs, env, stmt.id)?;
                env.insert(target.clone(), v);
            }
            StmtKind::If {
                cond,
                then_block,
                else_block,
            } => {
                if eval(cond, env, stmt.id)? != 0 {
                    exec_block(then_block, env, limits)?;
                } else {
                    exec_block(else_block, env, limits)?;
                }
            }
            StmtKind::While { cond, body } => {
                let mut iterations = 0u64;
                while eval(cond, env, stmt.id)? != 0 {
                    if iterations == limits.max_loop_iterations {
                        return Err(EvalError::LoopLimitExceeded {
                            stmt: stmt.id,
                            limit: limits.max_loop_iterations,
                        });
                    }
                    iterations += 1;
                    exec_block(body, env, limits)?;
                }
            }
        }
    }
    Ok(())
}

fn eval(e: &Expr, env: &Env, stmt: StmtId) -> Result<i64, EvalError> {
    Ok(match e {
        Expr::Int(n) => *n,
        Expr::Var(v) => *env
            .get(v)
            .ok_or_else(|| EvalError::UnboundVariable { var: v.clone(), stmt })?,
        Expr::Not(inner) => (eval(inner, env, stmt)? == 0) as i64,
        Expr::Binary(op, l, r) => {
            let a = eval(l, env, stmt)?;
            let b = eval(r, env, stmt)?;
            apply_binop(*op, a, b).ok_or(EvalError::DivisionByZero { stmt })?
        }
    })
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn env(pairs: &[(&str, i64)]) -> BTreeMap<String, i64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn paper_value_example_outputs_eight() {
        let p = parse("input a, b; output c; a := a + 2; b := b + a; c := a + a;").unwrap();
        let out = run(&p, &env(&[("a", 2), ("b", 2)]), EvalLimits::default()).unwrap();
        assert_eq!(out, env(&[("a", 4), ("b", 6), ("c", 8)]));
    }

    #[test]
    fn corrected_value_example_outputs_ten() {
        let p = parse("input a, b; output c; a := a + 2; b := b + a; c := a + b;").unwrap();
        let out = run(&p, &env(&[("a", 2), ("b", 2)]), EvalLimits::default()).unwrap();
        assert_eq!(out, env(&[("a", 4), ("b", 6), ("c", 10)]));
    }

    #[test]
    fn summation_loop() {
        let p = parse("input n; output s; s := 0; i := 0; while (i < n) { s := s + i; i := i + 1; }").unwrap();
        let out = run(&p, &env(&[("n", 4)]), EvalLimits::default()).unwrap();
        // 0 + 1 + 2 + 3
        assert_eq!(out["s"], 6);
        assert_eq!(out["i"], 4);
    }

    #[test]
    fn loop_limit_is_per_loop_execution() {
        let p = parse("input n; output s; s := 0; i := 0; while (i < n) { s := s + i; i := i + 1; }").unwrap();
        let exact = EvalLimits { max_loop_iterations: 4 };
        let larger = EvalLimits { max_loop_iterations: 1000 };
        assert_eq!(
            run(&p, &env(&[("n", 4)]), exact).unwrap(),
            run(&p, &env(&[("n", 4)]), larger).unwrap()
        );
        let tight = EvalLimits { max_loop_iterations: 3 };
        assert_eq!(
            run(&p, &env(&[("n", 4)]), tight).unwrap_err(),
            EvalError::LoopLimitExceeded {
                stmt: StmtId(3),
                limit: 3
            }
        );
        assert_eq!(
            run(&p, &env(&[("n", 4)]), EvalLimits { max_loop_iterations: 0 }).unwrap_err(),
            EvalError::InvalidLimits
        );
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let p = parse("input a; output b; b := 10 / a;").unwrap();
        assert_eq!(
            run(&p, &env(&[("a", 0)]), EvalLimits::default()).unwrap_err(),
            EvalError::DivisionByZero { stmt: StmtId(1) }
        );
        assert_eq!(run(&p, &env(&[("a", 3)]), EvalLimits::default()).unwrap()["b"], 3);
    }

    #[test]
    fn inputs_must_match_declaration() {
        let p = parse("input a; output a;").unwrap();
        assert_eq!(
            run(&p, &env(&[]), EvalLimits::default()).unwrap_err(),
            EvalError::MissingInput("a".into())
        );
        assert_eq!(
            run(&p, &env(&[("a", 1), ("z", 2)]), EvalLimits::default()).unwrap_err(),
            EvalError::UnexpectedInput("z".into())
        );
    }

    #[test]
    fn booleans_are_integers() {
        let p = parse("input a, b; output x, y, z; x := a < b; y := not a; z := a and b or 0;").unwrap();
        let out = run(&p, &env(&[("a", 3), ("b", 0)]), EvalLimits::default()).unwrap();
        assert_eq!((out["x"], out["y"], out["z"]), (0, 0, 0));
    }
}
