//! End-to-end dependence analysis: which initial input values may influence
//! the final value of each variable.

use std::collections::{BTreeMap, BTreeSet};

use crate::minilang::{Expr, Program, Stmt, StmtId, StmtKind};

/// Abstract value of one variable.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Flow {
    /// Unconstrained, produced by an abnormal statement.
    Top,
    /// Input sources, each with the statements on some chain from it.
    Sources(BTreeMap<String, BTreeSet<StmtId>>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Fact {
    flow: Flow,
    /// Every assignment whose abnormality would turn this fact into Top.
    cone: BTreeSet<StmtId>,
}

impl Fact {
    fn empty() -> Fact {
        Fact {
            flow: Flow::Sources(BTreeMap::new()),
            cone: BTreeSet::new(),
        }
    }

    fn join_with(&mut self, other: &Fact) {
        self.cone.extend(other.cone.iter().copied());
        match (&mut self.flow, &other.flow) {
            (Flow::Top, _) => {}
            (slot @ Flow::Sources(_), Flow::Top) => *slot = Flow::Top,
            (Flow::Sources(mine), Flow::Sources(theirs)) => {
                for (src, prov) in theirs {
                    mine.entry(src.clone()).or_default().extend(prov.iter().copied());
                }
            }
        }
    }
}

type State = BTreeMap<String, Fact>;

fn join_states(a: &mut State, b: &State) {
    for (var, fact) in b {
        match a.get_mut(var) {
            Some(mine) => mine.join_with(fact),
            None => {
                a.insert(var.clone(), fact.clone());
            }
        }
    }
}

fn expr_fact(e: &Expr, state: &State) -> Fact {
    let mut fact = Fact::empty();
    for v in e.vars() {
        if let Some(f) = state.get(&v) {
            fact.join_with(f);
        }
    }
    fact
}

/// Fixpoint iteration counts, per `while` statement (maximum over every time
/// the loop was analyzed).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FixpointStats {
    pub loop_iterations: BTreeMap<StmtId, usize>,
}

impl FixpointStats {
    pub fn max_iterations(&self) -> usize {
        self.loop_iterations.values().copied().max().unwrap_or(0)
    }
}

pub(super) struct GlobalResult {
    /// Per assigned variable: `None` for Top, otherwise source -> chain.
    pub finals: BTreeMap<String, Option<BTreeMap<String, BTreeSet<StmtId>>>>,
    pub cones: BTreeMap<String, BTreeSet<StmtId>>,
    pub stats: FixpointStats,
}

struct Analyzer<'a> {
    abnormal: &'a BTreeSet<StmtId>,
    stats: FixpointStats,
}

impl Analyzer<'_> {
    fn block(&mut self, block: &[Stmt], mut state: State, ctl: &Fact) -> State {
        for stmt in block {
            state = self.stmt(stmt, state, ctl);
        }
        state
    }

    fn stmt(&mut self, stmt: &Stmt, mut state: State, ctl: &Fact) -> State {
        match &stmt.kind {
            StmtKind::Assign { target, rhs } => {
                let fact = if self.abnormal.contains(&stmt.id) {
                    Fact {
                        flow: Flow::Top,
                        cone: BTreeSet::from([stmt.id]),
                    }
                } else {
                    let mut f = expr_fact(rhs, &state);
                    f.join_with(ctl);
                    f.cone.insert(stmt.id);
                    if let Flow::Sources(srcs) = &mut f.flow {
                        for prov in srcs.values_mut() {
                            prov.insert(stmt.id);
                        }
                    }
                    f
                };
                state.insert(target.clone(), fact);
                state
            }
            StmtKind::If {
                cond,
                then_block,
                else_block,
            } => {
                let mut inner = ctl.clone();
                inner.join_with(&expr_fact(cond, &state));
                let mut out = self.block(then_block, state.clone(), &inner);
                let other = self.block(else_block, state, &inner);
                join_states(&mut out, &other);
                out
            }
            StmtKind::While { cond, body } => {
                let mut head = state;
                let mut iterations = 0usize;
                loop {
                    iterations += 1;
                    let mut inner = ctl.clone();
                    inner.join_with(&expr_fact(cond, &head));
                    let body_out = self.block(body, head.clone(), &inner);
                    let mut next = head.clone();
                    join_states(&mut next, &body_out);
                    if next == head {
                        break;
                    }
                    head = next;
                }
                let slot = self.stats.loop_iterations.entry(stmt.id).or_insert(0);
                *slot = (*slot).max(iterations);
                head
            }
        }
    }
}

pub(super) fn analyze(p: &Program, abnormal: &BTreeSet<StmtId>) -> GlobalResult {
    let mut initial = State::new();
    for input in &p.inputs {
        initial.insert(
            input.clone(),
            Fact {
                flow: Flow::Sources(BTreeMap::from([(input.clone(), BTreeSet::new())])),
                cone: BTreeSet::new(),
            },
        );
    }
    let mut analyzer = Analyzer {
        abnormal,
        stats: FixpointStats::default(),
    };
    let exit = analyzer.block(&p.body, initial, &Fact::empty());

    let mut finals = BTreeMap::new();
    let mut cones = BTreeMap::new();
    for var in p.assigned_vars() {
        let Some(fact) = exit.get(&var) else { continue };
        let flow = match &fact.flow {
            Flow::Top => None,
            Flow::Sources(srcs) => Some(srcs.clone()),
        };
        finals.insert(var.clone(), flow);
        cones.insert(var, fact.cone.clone());
    }
    GlobalResult {
        finals,
        cones,
        stats: analyzer.stats,
    }
}
