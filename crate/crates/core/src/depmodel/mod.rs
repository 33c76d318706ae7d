//! Abstract dependence model.
//!
//! A pair `(x, y)` states that a new value of `y` may produce a new value of
//! `x`. The model computes the pairs a program exhibits, compares them with a
//! specified set, and turns each discrepancy into a conflict over the
//! assignment statements assumed to behave normally. An abnormal assignment
//! makes its target unconstrained (Top): it matches every specified pair on
//! that target and contributes no pairs of its own.

mod global;
mod specfile;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnosis::Conflict;
use crate::minilang::{walk, Program, Stmt, StmtId, StmtKind};

pub use global::FixpointStats;
pub use specfile::{format_deps, parse_deps, DepsFileError, ParsedDeps};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DependencePair {
    pub target: String,
    pub source: String,
}

impl DependencePair {
    pub fn new(target: &str, source: &str) -> Self {
        DependencePair {
            target: target.to_string(),
            source: source.to_string(),
        }
    }
}

impl fmt::Display for DependencePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.target, self.source)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    /// Per definition: the target depends on the variables of its right-hand
    /// side and of every enclosing condition.
    #[default]
    Local,
    /// End to end: final values depending on initial input values.
    Global,
}

impl FromStr for Granularity {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "local" => Ok(Granularity::Local),
            "global" => Ok(Granularity::Global),
            other => Err(format!("unknown granularity `{other}` (expected local or global)")),
        }
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Granularity::Local => "local",
            Granularity::Global => "global",
        })
    }
}

/// A set of dependence pairs. Computed sets also record which statements
/// produced each pair, which targets are Top, and which statements could make
/// each target Top (`blame`). Specified sets only carry `pairs`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependenceSet {
    pub pairs: BTreeSet<DependencePair>,
    pub provenance: BTreeMap<DependencePair, BTreeSet<StmtId>>,
    pub top: BTreeSet<String>,
    pub blame: BTreeMap<String, BTreeSet<StmtId>>,
}

impl DependenceSet {
    pub fn from_pairs<I: IntoIterator<Item = DependencePair>>(pairs: I) -> Self {
        DependenceSet {
            pairs: pairs.into_iter().collect(),
            ..Default::default()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty() && self.top.is_empty()
    }

    fn add(&mut self, pair: DependencePair, prov: impl IntoIterator<Item = StmtId>) {
        self.provenance.entry(pair.clone()).or_default().extend(prov);
        self.pairs.insert(pair);
    }

    /// Sources per target, for listing.
    pub fn by_target(&self) -> BTreeMap<&str, Vec<&str>> {
        let mut out: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for p in &self.pairs {
            out.entry(&p.target).or_default().push(&p.source);
        }
        out
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependenceDiff {
    pub missing: BTreeSet<DependencePair>,
    pub spurious: BTreeSet<DependencePair>,
}

impl DependenceDiff {
    pub fn is_empty(&self) -> bool {
        self.missing.is_empty() && self.spurious.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DepError {
    #[error("statement {0} is not an assignment of the program")]
    UnknownStatement(StmtId),
    #[error("{kind} pair {pair} cannot be blamed on any normal statement")]
    InexplicableMismatch {
        pair: DependencePair,
        kind: &'static str,
    },
}

fn validate_assumptions(p: &Program, assumptions: &BTreeSet<StmtId>) -> Result<(), DepError> {
    let assigns = p.assign_ids();
    match assumptions.iter().find(|id| !assigns.contains(id)) {
        Some(id) => Err(DepError::UnknownStatement(*id)),
        None => Ok(()),
    }
}

/// Dependences of `p` with the statements in `assumptions` treated as
/// abnormal.
pub fn compute_dependences(
    p: &Program,
    g: Granularity,
    assumptions: &BTreeSet<StmtId>,
) -> Result<DependenceSet, DepError> {
    Ok(compute_with_stats(p, g, assumptions)?.0)
}

/// As [`compute_dependences`], also returning fixpoint iteration counts (all
/// zero for local granularity).
pub fn compute_with_stats(
    p: &Program,
    g: Granularity,
    assumptions: &BTreeSet<StmtId>,
) -> Result<(DependenceSet, FixpointStats), DepError> {
    validate_assumptions(p, assumptions)?;
    Ok(match g {
        Granularity::Local => (local(p, assumptions), FixpointStats::default()),
        Granularity::Global => {
            let result = global::analyze(p, assumptions);
            let mut set = DependenceSet::default();
            for (var, flow) in result.finals {
                match flow {
                    None => {
                        set.top.insert(var);
                    }
                    Some(sources) => {
                        for (src, prov) in sources {
                            set.add(DependencePair::new(&var, &src), prov);
                        }
                    }
                }
            }
            for (var, cone) in result.cones {
                if set.top.contains(&var) {
                    continue;
                }
                let normal: BTreeSet<StmtId> = cone.difference(assumptions).copied().collect();
                set.blame.insert(var, normal);
            }
            (set, result.stats)
        }
    })
}

fn local(p: &Program, abnormal: &BTreeSet<StmtId>) -> DependenceSet {
    fn go(block: &[Stmt], ctl: &BTreeSet<String>, abnormal: &BTreeSet<StmtId>, set: &mut DependenceSet) {
        for stmt in block {
            match &stmt.kind {
                StmtKind::Assign { target, rhs } => {
                    if abnormal.contains(&stmt.id) {
                        set.top.insert(target.clone());
                        continue;
                    }
                    let mut sources = rhs.vars();
                    sources.extend(ctl.iter().cloned());
                    for src in sources {
                        set.add(DependencePair::new(target, &src), [stmt.id]);
                    }
                }
                StmtKind::If {
                    cond,
                    then_block,
                    else_block,
                } => {
                    let mut inner = ctl.clone();
                    inner.extend(cond.vars());
                    go(then_block, &inner, abnormal, set);
                    go(else_block, &inner, abnormal, set);
                }
                StmtKind::While { cond, body } => {
                    let mut inner = ctl.clone();
                    inner.extend(cond.vars());
                    go(body, &inner, abnormal, set);
                }
            }
        }
    }
    let mut set = DependenceSet::default();
    go(&p.body, &BTreeSet::new(), abnormal, &mut set);

    // Under local granularity only a definer of x can make x Top.
    walk(&p.body, &mut |s| {
        if let Some(t) = s.target() {
            if !set.top.contains(t) {
                set.blame.entry(t.to_string()).or_default().insert(s.id);
            }
        }
    });
    set
}

/// Missing and spurious pairs of `computed` relative to `specified`. A
/// specified pair on a Top target is never missing.
pub fn compare_dependences(computed: &DependenceSet, specified: &DependenceSet) -> DependenceDiff {
    DependenceDiff {
        missing: specified
            .pairs
            .difference(&computed.pairs)
            .filter(|p| !computed.top.contains(&p.target))
            .cloned()
            .collect(),
        spurious: computed.pairs.difference(&specified.pairs).cloned().collect(),
    }
}

/// One conflict per discrepancy between the program's dependences (under
/// `assumptions`) and `specified`: missing pairs first, then spurious, each in
/// pair order.
pub fn dep_conflicts(
    p: &Program,
    specified: &DependenceSet,
    g: Granularity,
    assumptions: &BTreeSet<StmtId>,
) -> Result<Vec<Conflict>, DepError> {
    let computed = compute_dependences(p, g, assumptions)?;
    let diff = compare_dependences(&computed, specified);
    let empty = BTreeSet::new();
    let blame = |target: &str| computed.blame.get(target).unwrap_or(&empty);

    let mut conflicts = Vec::new();
    for pair in &diff.missing {
        let members: BTreeSet<StmtId> = blame(&pair.target).difference(assumptions).copied().collect();
        conflicts.push(Conflict::new(members).ok_or_else(|| DepError::InexplicableMismatch {
            pair: pair.clone(),
            kind: "missing",
        })?);
    }
    for pair in &diff.spurious {
        let source = match g {
            Granularity::Local => computed.provenance.get(pair).unwrap_or(&empty),
            Granularity::Global => blame(&pair.target),
        };
        let members: BTreeSet<StmtId> = source.difference(assumptions).copied().collect();
        conflicts.push(Conflict::new(members).ok_or_else(|| DepError::InexplicableMismatch {
            pair: pair.clone(),
            kind: "spurious",
        })?);
    }
    Ok(conflicts)
}
