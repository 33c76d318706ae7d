//! Value-based model: forward evaluation over `Known(n) | Unknown` with
//! dynamic provenance.
//!
//! An abnormal assignment sets its target to `Unknown`. Operators are strict
//! in `Unknown`. Every value carries the set of assignments that could change
//! it, including assignments feeding the conditions that decided whether the
//! value was written. A Known output that contradicts its expected value
//! yields a conflict made of that provenance.
//!
//! Only forward simulation is performed; observations are not propagated
//! backwards through statements.

mod testfile;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnosis::{Conflict, Verdict};
use crate::minilang::{apply_binop, assign_ids, assigned_vars, EvalError, EvalLimits, Expr, Program, Stmt, StmtId, StmtKind};

pub use testfile::{format_tests, parse_tests, TestFileError};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub inputs: BTreeMap<String, i64>,
    pub expected: BTreeMap<String, i64>,
}

impl TestCase {
    pub fn validate(&self, p: &Program) -> Result<(), ValueError> {
        let declared: BTreeSet<&String> = p.inputs.iter().collect();
        let given: BTreeSet<&String> = self.inputs.keys().collect();
        if declared != given {
            return Err(ValueError::InvalidTest(format!(
                "inputs {:?} do not match declared inputs {:?}",
                given, declared
            )));
        }
        if self.expected.is_empty() {
            return Err(ValueError::InvalidTest("no expected values".into()));
        }
        if let Some(v) = self.expected.keys().find(|v| !p.outputs.contains(v)) {
            return Err(ValueError::InvalidTest(format!("`{v}` is not a declared output")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Value {
    Known(i64),
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialValue {
    pub value: Value,
    pub provenance: BTreeSet<StmtId>,
}

impl PartialValue {
    pub fn known(n: i64, provenance: BTreeSet<StmtId>) -> Self {
        PartialValue {
            value: Value::Known(n),
            provenance,
        }
    }

    pub fn unknown(provenance: BTreeSet<StmtId>) -> Self {
        PartialValue {
            value: Value::Unknown,
            provenance,
        }
    }

    pub fn as_known(&self) -> Option<i64> {
        match self.value {
            Value::Known(n) => Some(n),
            Value::Unknown => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialEnv {
    pub values: BTreeMap<String, PartialValue>,
    /// Divisions by zero absorbed as Unknown.
    pub warnings: Vec<String>,
}

impl PartialEnv {
    pub fn get(&self, var: &str) -> Option<&PartialValue> {
        self.values.get(var)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValueError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("statement {0} is not an assignment of the program")]
    UnknownStatement(StmtId),
    #[error("invalid test case: {0}")]
    InvalidTest(String),
    #[error("expected {var} = {expected} contradicts {actual}, which no normal statement produced")]
    InexplicableMismatch { var: String, expected: i64, actual: i64 },
}

struct Evaluator<'a> {
    abnormal: &'a BTreeSet<StmtId>,
    limits: EvalLimits,
    warnings: Vec<String>,
}

type Vals = BTreeMap<String, PartialValue>;

impl Evaluator<'_> {
    fn expr(&mut self, e: &Expr, env: &Vals, stmt: StmtId) -> Result<PartialValue, EvalError> {
        Ok(match e {
            Expr::Int(n) => PartialValue::known(*n, BTreeSet::new()),
            Expr::Var(v) => env
                .get(v)
                .cloned()
                .ok_or_else(|| EvalError::UnboundVariable { var: v.clone(), stmt })?,
            Expr::Not(inner) => {
                let mut pv = self.expr(inner, env, stmt)?;
                if let Value::Known(n) = pv.value {
                    pv.value = Value::Known((n == 0) as i64);
                }
                pv
            }
            Expr::Binary(op, l, r) => {
                let a = self.expr(l, env, stmt)?;
                let b = self.expr(r, env, stmt)?;
                let mut prov = a.provenance;
                prov.extend(b.provenance);
                match (a.value, b.value) {
                    (Value::Known(x), Value::Known(y)) => match apply_binop(*op, x, y) {
                        Some(n) => PartialValue::known(n, prov),
                        None => {
                            self.warnings.push(format!("division by zero at statement {stmt}; value treated as unknown"));
                            PartialValue::unknown(prov)
                        }
                    },
                    _ => PartialValue::unknown(prov),
                }
            }
        })
    }

    fn block(&mut self, block: &[Stmt], env: &mut Vals, ctl: &BTreeSet<StmtId>) -> Result<(), EvalError> {
        for stmt in block {
            self.stmt(stmt, env, ctl)?;
        }
        Ok(())
    }

    fn stmt(&mut self, stmt: &Stmt, env: &mut Vals, ctl: &BTreeSet<StmtId>) -> Result<(), EvalError> {
        match &stmt.kind {
            StmtKind::Assign { target, rhs } => {
                let pv = if self.abnormal.contains(&stmt.id) {
                    PartialValue::unknown(BTreeSet::from([stmt.id]))
                } else {
                    let mut pv = self.expr(rhs, env, stmt.id)?;
                    pv.provenance.insert(stmt.id);
                    pv.provenance.extend(ctl.iter().copied());
                    pv
                };
                env.insert(target.clone(), pv);
            }
            StmtKind::If {
                cond,
                then_block,
                else_block,
            } => {
                let c = self.expr(cond, env, stmt.id)?;
                let mut inner = ctl.clone();
                inner.extend(c.provenance.iter().copied());
                match c.value {
                    Value::Known(n) => {
                        let taken = if n != 0 { then_block } else { else_block };
                        self.block(taken, env, &inner)?;
                        // Whether either branch wrote these depended on the condition.
                        let mut touched = assigned_vars(then_block);
                        touched.extend(assigned_vars(else_block));
                        add_provenance(env, &touched, &c.provenance);
                    }
                    Value::Unknown => {
                        let mut then_env = env.clone();
                        self.block(then_block, &mut then_env, &inner)?;
                        let mut else_env = env.clone();
                        self.block(else_block, &mut else_env, &inner)?;
                        let then_set = assigned_vars(then_block);
                        let else_set = assigned_vars(else_block);
                        merge(env, then_env, else_env, &then_set, &else_set, &c.provenance);
                    }
                }
            }
            StmtKind::While { cond, body } => {
                let body_vars = assigned_vars(body);
                let mut cond_prov = BTreeSet::new();
                let mut iterations = 0u64;
                loop {
                    let c = self.expr(cond, env, stmt.id)?;
                    cond_prov.extend(c.provenance.iter().copied());
                    match c.value {
                        Value::Known(0) => break,
                        Value::Known(_) => {
                            if iterations == self.limits.max_loop_iterations {
                                return Err(EvalError::LoopLimitExceeded {
                                    stmt: stmt.id,
                                    limit: self.limits.max_loop_iterations,
                                });
                            }
                            iterations += 1;
                            let mut inner = ctl.clone();
                            inner.extend(c.provenance.iter().copied());
                            self.block(body, env, &inner)?;
                        }
                        Value::Unknown => {
                            let mut prov = cond_prov.clone();
                            prov.extend(ctl.iter().copied());
                            prov.extend(assign_ids(body));
                            for v in &body_vars {
                                let mut p = env.get(v).map(|pv| pv.provenance.clone()).unwrap_or_default();
                                p.extend(prov.iter().copied());
                                env.insert(v.clone(), PartialValue::unknown(p));
                            }
                            break;
                        }
                    }
                }
                add_provenance(env, &body_vars, &cond_prov);
            }
        }
        Ok(())
    }
}

fn add_provenance(env: &mut Vals, vars: &BTreeSet<String>, prov: &BTreeSet<StmtId>) {
    for v in vars {
        if let Some(pv) = env.get_mut(v) {
            pv.provenance.extend(prov.iter().copied());
        }
    }
}

fn merge(
    env: &mut Vals,
    mut then_env: Vals,
    mut else_env: Vals,
    then_set: &BTreeSet<String>,
    else_set: &BTreeSet<String>,
    cond_prov: &BTreeSet<StmtId>,
) {
    let touched: BTreeSet<String> = then_set.union(else_set).cloned().collect();
    for v in touched {
        let t = then_env.remove(&v);
        let e = else_env.remove(&v);
        let same_status = then_set.contains(&v) == else_set.contains(&v);
        let mut prov: BTreeSet<StmtId> = cond_prov.clone();
        for pv in t.iter().chain(e.iter()) {
            prov.extend(pv.provenance.iter().copied());
        }
        let value = match (&t, &e) {
            (Some(a), Some(b)) if same_status && a.value == b.value => a.value,
            (None, None) => continue,
            _ => Value::Unknown,
        };
        env.insert(v, PartialValue { value, provenance: prov });
    }
}

fn validate_assumptions(p: &Program, assumptions: &BTreeSet<StmtId>) -> Result<(), ValueError> {
    let assigns = p.assign_ids();
    match assumptions.iter().find(|id| !assigns.contains(id)) {
        Some(id) => Err(ValueError::UnknownStatement(*id)),
        None => Ok(()),
    }
}

/// Forward evaluation with `assumptions` abnormal.
pub fn evaluate_partial(
    p: &Program,
    t: &TestCase,
    assumptions: &BTreeSet<StmtId>,
    limits: EvalLimits,
) -> Result<PartialEnv, ValueError> {
    limits.validate()?;
    validate_assumptions(p, assumptions)?;
    t.validate(p)?;
    let mut env: Vals = t
        .inputs
        .iter()
        .map(|(k, v)| (k.clone(), PartialValue::known(*v, BTreeSet::new())))
        .collect();
    let mut ev = Evaluator {
        abnormal: assumptions,
        limits,
        warnings: Vec::new(),
    };
    ev.block(&p.body, &mut env, &BTreeSet::new())?;
    Ok(PartialEnv {
        values: env,
        warnings: ev.warnings,
    })
}

/// Conflict between the expected outputs of `t` and the forward evaluation,
/// or [`Verdict::Consistent`] when every expectation is Unknown or met.
pub fn value_conflict(
    p: &Program,
    t: &TestCase,
    assumptions: &BTreeSet<StmtId>,
    limits: EvalLimits,
) -> Result<Verdict, ValueError> {
    let env = evaluate_partial(p, t, assumptions, limits)?;
    let mut members = BTreeSet::new();
    for (var, &expected) in &t.expected {
        let Some(pv) = env.get(var) else { continue };
        let Value::Known(actual) = pv.value else { continue };
        if actual == expected {
            continue;
        }
        let normal: BTreeSet<StmtId> = pv.provenance.difference(assumptions).copied().collect();
        if normal.is_empty() {
            return Err(ValueError::InexplicableMismatch {
                var: var.clone(),
                expected,
                actual,
            });
        }
        members.extend(normal);
    }
    Ok(match Conflict::new(members) {
        Some(c) => Verdict::Conflict(c),
        None => Verdict::Consistent,
    })
}

/// Value-model verdict pooled over several test cases: the first test case
/// that produces a conflict decides.
pub fn value_conflict_all(
    p: &Program,
    tests: &[TestCase],
    assumptions: &BTreeSet<StmtId>,
    limits: EvalLimits,
) -> Result<Verdict, ValueError> {
    for t in tests {
        if let Verdict::Conflict(c) = value_conflict(p, t, assumptions, limits)? {
            return Ok(Verdict::Conflict(c));
        }
    }
    Ok(Verdict::Consistent)
}
