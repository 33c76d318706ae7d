//! Consistency-based diagnosis over statement components.
//!
//! An oracle answers, for a set of statements assumed abnormal, whether the
//! remaining statements are consistent with the observations; if not it
//! returns a conflict, a set of normal statements that cannot all be correct.
//! [`diagnose`] grows a hitting-set tree over the conflicts discovered on
//! demand and reports the subset-minimal diagnoses up to a cardinality bound.
//! [`brute_force_diagnose`] enumerates assumption sets directly and is kept
//! as an independent reference.

mod conflictfile;

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::minilang::StmtId;

pub use conflictfile::{format_diagnoses, parse_conflicts, ConflictFileError};

pub type Assumptions = BTreeSet<StmtId>;

pub const DEFAULT_MAX_CARDINALITY: usize = 3;
pub const BRUTE_FORCE_COMPONENT_CAP: usize = 20;

/// Nonempty set of statements that cannot all behave normally.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Conflict(BTreeSet<StmtId>);

impl Conflict {
    pub fn new(members: BTreeSet<StmtId>) -> Option<Conflict> {
        if members.is_empty() {
            None
        } else {
            Some(Conflict(members))
        }
    }

    pub fn from_ids(ids: &[u32]) -> Option<Conflict> {
        Conflict::new(ids.iter().map(|&i| StmtId(i)).collect())
    }

    pub fn members(&self) -> &BTreeSet<StmtId> {
        &self.0
    }

    pub fn is_hit_by(&self, set: &BTreeSet<StmtId>) -> bool {
        !self.0.is_disjoint(set)
    }
}

impl fmt::Display for Conflict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_set(f, &self.0)
    }
}

/// Candidate set of faulty statements. Ordered by cardinality, then
/// lexicographically by members.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Diagnosis(BTreeSet<StmtId>);

impl Diagnosis {
    pub fn new(members: BTreeSet<StmtId>) -> Diagnosis {
        Diagnosis(members)
    }

    pub fn from_ids(ids: &[u32]) -> Diagnosis {
        Diagnosis(ids.iter().map(|&i| StmtId(i)).collect())
    }

    pub fn members(&self) -> &BTreeSet<StmtId> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, id: StmtId) -> bool {
        self.0.contains(&id)
    }
}

impl Ord for Diagnosis {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.iter().cmp(other.0.iter()))
    }
}

impl PartialOrd for Diagnosis {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Diagnosis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_set(f, &self.0)
    }
}

fn write_set(f: &mut fmt::Formatter<'_>, set: &BTreeSet<StmtId>) -> fmt::Result {
    f.write_str("{")?;
    for (i, id) in set.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{id}")?;
    }
    f.write_str("}")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Consistent,
    Conflict(Conflict),
}

pub type OracleError = Box<dyn std::error::Error + Send + Sync>;

/// Consistency check under a set of abnormal statements. Must be
/// deterministic and monotone: enlarging the assumption set never turns a
/// consistent answer into a conflict.
pub trait Oracle {
    fn check(&self, assumptions: &Assumptions) -> Result<Verdict, OracleError>;
}

impl<F> Oracle for F
where
    F: Fn(&Assumptions) -> Result<Verdict, OracleError>,
{
    fn check(&self, assumptions: &Assumptions) -> Result<Verdict, OracleError> {
        self(assumptions)
    }
}

#[derive(Debug, Error)]
pub enum DiagnosisError {
    #[error("oracle failed under assumptions {assumptions:?}: {source}")]
    Oracle {
        assumptions: Vec<StmtId>,
        #[source]
        source: OracleError,
    },
    #[error("oracle returned conflict {conflict} containing non-component or abnormal statements")]
    InvalidConflict { conflict: Conflict },
    #[error("{count} components exceed the brute-force cap of {cap}")]
    TooManyComponents { count: usize, cap: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagnoseOptions {
    pub max_cardinality: usize,
    /// Shrink each discovered conflict by greedy deletion before use.
    pub minimize_conflicts: bool,
}

impl Default for DiagnoseOptions {
    fn default() -> Self {
        DiagnoseOptions {
            max_cardinality: DEFAULT_MAX_CARDINALITY,
            minimize_conflicts: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagnosisReport {
    pub diagnoses: Vec<Diagnosis>,
    pub conflicts_used: Vec<Conflict>,
    pub oracle_calls: usize,
}

impl DiagnosisReport {
    /// True when the empty set is the only diagnosis: no anomaly.
    pub fn is_consistent(&self) -> bool {
        self.diagnoses.len() == 1 && self.diagnoses[0].is_empty()
    }
}

struct Counted<'a, O: ?Sized> {
    oracle: &'a O,
    calls: usize,
}

impl<O: Oracle + ?Sized> Counted<'_, O> {
    fn check(&mut self, assumptions: &Assumptions) -> Result<Verdict, DiagnosisError> {
        self.calls += 1;
        self.oracle
            .check(assumptions)
            .map_err(|source| DiagnosisError::Oracle {
                assumptions: assumptions.iter().copied().collect(),
                source,
            })
    }
}

/// Reiter-style diagnosis with on-demand conflict generation.
///
/// Breadth-first hitting-set tree. A node is closed when its path set
/// contains an already found diagnosis; a node reuses any known conflict its
/// path set does not hit instead of calling the oracle; identical path sets
/// on one level are merged. Conflicts need not be minimal.
pub fn diagnose<O: Oracle + ?Sized>(
    oracle: &O,
    components: &BTreeSet<StmtId>,
    opts: DiagnoseOptions,
) -> Result<DiagnosisReport, DiagnosisError> {
    let mut counted = Counted { oracle, calls: 0 };
    let mut conflicts: Vec<Conflict> = Vec::new();
    let mut found: Vec<BTreeSet<StmtId>> = Vec::new();
    let mut level: BTreeSet<BTreeSet<StmtId>> = BTreeSet::from([BTreeSet::new()]);

    for depth in 0..=opts.max_cardinality {
        let mut next: BTreeSet<BTreeSet<StmtId>> = BTreeSet::new();
        for path in &level {
            if found.iter().any(|d| d.is_subset(path)) {
                continue;
            }
            let label = match conflicts.iter().find(|c| !c.is_hit_by(path)) {
                Some(c) => c.clone(),
                None => match counted.check(path)? {
                    Verdict::Consistent => {
                        found.push(path.clone());
                        continue;
                    }
                    Verdict::Conflict(c) => {
                        if !c.members().is_subset(components) || c.is_hit_by(path) {
                            return Err(DiagnosisError::InvalidConflict { conflict: c });
                        }
                        let c = if opts.minimize_conflicts {
                            minimize(&mut counted, components, c)?
                        } else {
                            c
                        };
                        conflicts.push(c.clone());
                        c
                    }
                },
            };
            if depth == opts.max_cardinality {
                continue;
            }
            for &e in label.members() {
                let mut child = path.clone();
                child.insert(e);
                next.insert(child);
            }
        }
        if next.is_empty() {
            break;
        }
        level = next;
    }

    let mut diagnoses: Vec<Diagnosis> = found.into_iter().map(Diagnosis).collect();
    diagnoses.sort();
    Ok(DiagnosisReport {
        diagnoses,
        conflicts_used: conflicts,
        oracle_calls: counted.calls,
    })
}

// Greedy deletion: drop each member if the rest still conflicts when every
// other component is assumed abnormal.
fn minimize<O: Oracle + ?Sized>(
    counted: &mut Counted<'_, O>,
    components: &BTreeSet<StmtId>,
    conflict: Conflict,
) -> Result<Conflict, DiagnosisError> {
    let mut current = conflict.0;
    let order: Vec<StmtId> = current.iter().copied().collect();
    for e in order {
        if !current.contains(&e) || current.len() == 1 {
            continue;
        }
        let mut candidate = current.clone();
        candidate.remove(&e);
        let assumptions: Assumptions = components.difference(&candidate).copied().collect();
        if let Verdict::Conflict(c) = counted.check(&assumptions)? {
            if c.members().is_subset(&candidate) {
                current = c.0;
            }
        }
    }
    Ok(Conflict(current))
}

/// Subset-minimal hitting sets of `conflicts` with at most `max_cardinality`
/// members, in report order. An empty conflict list yields the empty set.
pub fn minimal_hitting_sets(conflicts: &[Conflict], max_cardinality: usize) -> Vec<Diagnosis> {
    let components: BTreeSet<StmtId> = conflicts.iter().flat_map(|c| c.0.iter().copied()).collect();
    let oracle = |h: &Assumptions| -> Result<Verdict, OracleError> {
        Ok(match conflicts.iter().find(|c| !c.is_hit_by(h)) {
            Some(c) => Verdict::Conflict(Conflict(c.0.difference(h).copied().collect())),
            None => Verdict::Consistent,
        })
    };
    let opts = DiagnoseOptions {
        max_cardinality,
        minimize_conflicts: false,
    };
    match diagnose(&oracle, &components, opts) {
        Ok(report) => report.diagnoses,
        Err(e) => unreachable!("static conflict oracle cannot fail: {e}"),
    }
}

/// Reference enumeration: subsets by increasing cardinality; a subset is a
/// diagnosis when the oracle finds it consistent and it contains no earlier
/// diagnosis.
pub fn brute_force_diagnose<O: Oracle + ?Sized>(
    oracle: &O,
    components: &BTreeSet<StmtId>,
    max_cardinality: usize,
) -> Result<Vec<Diagnosis>, DiagnosisError> {
    if components.len() > BRUTE_FORCE_COMPONENT_CAP {
        return Err(DiagnosisError::TooManyComponents {
            count: components.len(),
            cap: BRUTE_FORCE_COMPONENT_CAP,
        });
    }
    let items: Vec<StmtId> = components.iter().copied().collect();
    let mut found: Vec<BTreeSet<StmtId>> = Vec::new();
    for k in 0..=max_cardinality.min(items.len()) {
        for combo in combinations(items.len(), k) {
            let set: BTreeSet<StmtId> = combo.iter().map(|&i| items[i]).collect();
            if found.iter().any(|d| d.is_subset(&set)) {
                continue;
            }
            let verdict = oracle.check(&set).map_err(|source| DiagnosisError::Oracle {
                assumptions: set.iter().copied().collect(),
                source,
            })?;
            if verdict == Verdict::Consistent {
                found.push(set);
            }
        }
    }
    let mut out: Vec<Diagnosis> = found.into_iter().map(Diagnosis).collect();
    out.sort();
    Ok(out)
}

/// All k-subsets of 0..n in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(ids: &[u32]) -> Conflict {
        Conflict::from_ids(ids).unwrap()
    }

    fn d(ids: &[u32]) -> Diagnosis {
        Diagnosis::from_ids(ids)
    }

    fn comps(n: u32) -> BTreeSet<StmtId> {
        (1..=n).map(StmtId).collect()
    }

    #[test]
    fn combinations_are_lexicographic() {
        assert_eq!(combinations(4, 2), vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert!(combinations(2, 3).is_empty());
    }

    #[test]
    fn two_overlapping_conflicts() {
        assert_eq!(minimal_hitting_sets(&[c(&[1, 2]), c(&[2, 3])], 3), vec![d(&[2]), d(&[1, 3])]);
    }

    #[test]
    fn no_conflicts_means_empty_diagnosis() {
        assert_eq!(minimal_hitting_sets(&[], 3), vec![d(&[])]);
    }

    #[test]
    fn cardinality_bound_is_respected() {
        let conflicts = [c(&[1]), c(&[2]), c(&[3])];
        assert_eq!(minimal_hitting_sets(&conflicts, 3), vec![d(&[1, 2, 3])]);
        assert!(minimal_hitting_sets(&conflicts, 2).is_empty());
    }

    #[test]
    fn non_minimal_conflicts_are_tolerated() {
        let conflicts = [c(&[1, 2, 3]), c(&[1, 2]), c(&[3])];
        assert_eq!(minimal_hitting_sets(&conflicts, 3), vec![d(&[1, 3]), d(&[2, 3])]);
    }

    #[test]
    fn ordering_is_cardinality_then_lexicographic() {
        let mut v = vec![d(&[2, 3]), d(&[4]), d(&[1, 5]), d(&[]), d(&[1])];
        v.sort();
        assert_eq!(v, vec![d(&[]), d(&[1]), d(&[4]), d(&[1, 5]), d(&[2, 3])]);
    }

    #[test]
    fn always_consistent_oracle() {
        let oracle = |_: &Assumptions| -> Result<Verdict, OracleError> { Ok(Verdict::Consistent) };
        let report = diagnose(&oracle, &comps(3), DiagnoseOptions::default()).unwrap();
        assert_eq!(report.diagnoses, vec![d(&[])]);
        assert_eq!(report.oracle_calls, 1);
        assert!(report.is_consistent());
        assert_eq!(brute_force_diagnose(&oracle, &comps(3), 0).unwrap(), vec![d(&[])]);
    }

    #[test]
    fn brute_force_with_zero_cardinality() {
        let inconsistent = |_: &Assumptions| -> Result<Verdict, OracleError> { Ok(Verdict::Conflict(c(&[1]))) };
        assert!(brute_force_diagnose(&inconsistent, &comps(2), 0).unwrap().is_empty());
    }

    #[test]
    fn brute_force_cap() {
        let oracle = |_: &Assumptions| -> Result<Verdict, OracleError> { Ok(Verdict::Consistent) };
        assert!(matches!(
            brute_force_diagnose(&oracle, &comps(21), 1),
            Err(DiagnosisError::TooManyComponents { count: 21, cap: 20 })
        ));
    }

    #[test]
    fn oracle_errors_carry_assumptions() {
        let oracle = |h: &Assumptions| -> Result<Verdict, OracleError> {
            if h.contains(&StmtId(2)) {
                Err("loop limit".into())
            } else {
                Ok(Verdict::Conflict(Conflict(comps(3).difference(h).copied().collect())))
            }
        };
        match diagnose(&oracle, &comps(3), DiagnoseOptions::default()) {
            Err(DiagnosisError::Oracle { assumptions, .. }) => assert_eq!(assumptions, vec![StmtId(2)]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn minimization_shrinks_conflicts() {
        // True minimal conflicts {1,2} and {3}; the oracle reports padded ones.
        let truth = [c(&[1, 2]), c(&[3])];
        let all = comps(4);
        let oracle = |h: &Assumptions| -> Result<Verdict, OracleError> {
            Ok(match truth.iter().find(|t| !t.is_hit_by(h)) {
                Some(_) => Verdict::Conflict(Conflict(all.difference(h).copied().collect())),
                None => Verdict::Consistent,
            })
        };
        let plain = diagnose(&oracle, &all, DiagnoseOptions::default()).unwrap();
        let small = diagnose(
            &oracle,
            &all,
            DiagnoseOptions {
                minimize_conflicts: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(plain.diagnoses, vec![d(&[1, 3]), d(&[2, 3])]);
        assert_eq!(small.diagnoses, plain.diagnoses);
        assert!(small.conflicts_used.iter().all(|k| k.members().len() <= 2));
    }

    #[test]
    fn invalid_conflicts_are_reported() {
        let oracle = |_: &Assumptions| -> Result<Verdict, OracleError> { Ok(Verdict::Conflict(c(&[9]))) };
        assert!(matches!(
            diagnose(&oracle, &comps(3), DiagnoseOptions::default()),
            Err(DiagnosisError::InvalidConflict { .. })
        ));
    }
}
