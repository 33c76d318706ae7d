//! Seeded mutation benchmark comparing the two localization models.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::corpus::CorpusEntry;
use super::mutation::{inject_mutation, FaultSide, Mutation, MutationOperator};
use crate::depmodel::{compare_dependences, compute_dependences, DepError, Granularity};
use crate::diagnosis::{Diagnosis, DiagnoseOptions, DiagnosisError, Oracle, Verdict, DEFAULT_MAX_CARDINALITY};
use crate::localize::{components, DepOracle, ValueOracle};
use crate::minilang::{run, EvalLimits, Program};
use crate::valuemodel::ValueError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    ValueBased,
    DependenceBased,
}

impl Model {
    pub const ALL: [Model; 2] = [Model::ValueBased, Model::DependenceBased];

    pub fn name(self) -> &'static str {
        match self {
            Model::ValueBased => "value",
            Model::DependenceBased => "dep",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub granularity: Granularity,
    pub max_cardinality: usize,
    pub minimize_conflicts: bool,
    pub limits: EvalLimits,
    /// Worker threads; 0 and 1 both mean sequential.
    pub jobs: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            granularity: Granularity::Local,
            max_cardinality: DEFAULT_MAX_CARDINALITY,
            minimize_conflicts: false,
            limits: EvalLimits::default(),
            jobs: 1,
        }
    }
}

impl BenchConfig {
    fn options(&self) -> DiagnoseOptions {
        DiagnoseOptions {
            max_cardinality: self.max_cardinality,
            minimize_conflicts: self.minimize_conflicts,
        }
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("corpus entry `{name}` is inconsistent: {reason}")]
    CorpusInconsistent { name: String, reason: String },
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialResult {
    pub model: Model,
    /// Some conflict arose under the all-normal assumption.
    pub detected: bool,
    /// The singleton of the mutated statement is a minimal diagnosis.
    pub localized: bool,
    /// The mutated statement occurs in at least one minimal diagnosis.
    pub fault_in_diagnosis: bool,
    pub diagnosis_count: usize,
    pub fault_side: FaultSide,
    pub diagnoses: Vec<Diagnosis>,
    /// Every returned diagnosis is consistent when re-checked.
    pub sound: bool,
    pub oracle_calls: usize,
    /// The observations contradict the mutant but no statement can be
    /// blamed (for instance an output that is no longer assigned). Counts as
    /// undetected: no conflict arose.
    pub unexplained: bool,
    /// Set when the model could not produce a result (for instance a loop
    /// that no longer terminates, or an unexplained mismatch).
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutantRecord {
    pub program: String,
    pub operator: MutationOperator,
    pub seed: u64,
    pub mutation: Mutation,
    /// No model found a conflict on the bundled observations.
    pub equivalent: bool,
    pub trials: Vec<TrialResult>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skipped {
    pub program: String,
    pub operator: MutationOperator,
    pub seed: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    pub model: Model,
    pub operator: MutationOperator,
    pub trials: usize,
    pub detected: usize,
    pub localized: usize,
    pub fault_in_diagnosis: usize,
    pub errors: usize,
    pub detection_rate: f64,
    pub localization_rate: f64,
    /// Over detected trials only; 0 when none were detected.
    pub mean_diagnosis_count: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideStats {
    pub model: Model,
    /// `lhs` or `rhs`; operator and constant faults count as `rhs`.
    pub side: String,
    pub trials: usize,
    pub detected: usize,
    pub localized: usize,
    pub fault_in_diagnosis: usize,
    pub detection_rate: f64,
    pub localization_rate: f64,
}

/// The claim that the value model finds faults on both sides of an
/// assignment while the dependence model finds them only on the right.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideClaim {
    pub value_finds_lhs: bool,
    pub value_finds_rhs: bool,
    pub dep_finds_lhs: bool,
    pub dep_finds_rhs: bool,
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub config: BenchConfig,
    pub seeds: Vec<u64>,
    pub operators: Vec<MutationOperator>,
    pub mutants: Vec<MutantRecord>,
    pub skipped: Vec<Skipped>,
    pub cells: Vec<CellStats>,
    pub sides: Vec<SideStats>,
    pub side_claim: SideClaim,
    pub equivalent_mutants: usize,
    pub soundness_violations: usize,
    /// Detected value-model trials whose mutated statement is in no diagnosis.
    pub completeness_violations: usize,
    pub unexplained_trials: usize,
    /// Trials that failed for any other reason, mostly loop limits.
    pub aborted_trials: usize,
}

/// Check that the reference program passes its tests and exhibits exactly
/// its specified dependences.
pub fn check_entry(entry: &CorpusEntry, config: &BenchConfig) -> Result<(), BenchError> {
    let fail = |reason: String| BenchError::CorpusInconsistent {
        name: entry.name.clone(),
        reason,
    };
    if entry.tests.is_empty() {
        return Err(fail("no test cases".into()));
    }
    for (i, t) in entry.tests.iter().enumerate() {
        t.validate(&entry.program).map_err(|e| fail(format!("test {}: {e}", i + 1)))?;
        let env = run(&entry.program, &t.inputs, config.limits).map_err(|e| fail(format!("test {}: {e}", i + 1)))?;
        for (var, want) in &t.expected {
            if env.get(var) != Some(want) {
                return Err(fail(format!("test {}: {var} = {:?}, expected {want}", i + 1, env.get(var))));
            }
        }
    }
    let computed = compute_dependences(&entry.program, config.granularity, &BTreeSet::new())
        .map_err(|e| fail(e.to_string()))?;
    let diff = compare_dependences(&computed, &entry.spec);
    if !diff.is_empty() {
        let list = |s: &BTreeSet<_>| s.iter().map(|p: &crate::depmodel::DependencePair| p.to_string()).collect::<Vec<_>>().join(" ");
        return Err(fail(format!(
            "dependences differ from spec (missing: {}; spurious: {})",
            list(&diff.missing),
            list(&diff.spurious)
        )));
    }
    Ok(())
}

/// Run one model on one mutant.
pub fn run_trial(
    entry: &CorpusEntry,
    mutant: &Program,
    mutation: &Mutation,
    model: Model,
    config: &BenchConfig,
) -> TrialResult {
    match model {
        Model::ValueBased => {
            let oracle = ValueOracle {
                program: mutant,
                tests: &entry.tests,
                limits: config.limits,
            };
            trial(&oracle, mutant, mutation, model, config)
        }
        Model::DependenceBased => {
            let oracle = DepOracle {
                program: mutant,
                spec: &entry.spec,
                granularity: config.granularity,
            };
            trial(&oracle, mutant, mutation, model, config)
        }
    }
}

fn trial<O: Oracle>(oracle: &O, mutant: &Program, mutation: &Mutation, model: Model, config: &BenchConfig) -> TrialResult {
    let fault = mutation.statement_id;
    let mut result = TrialResult {
        model,
        detected: false,
        localized: false,
        fault_in_diagnosis: false,
        diagnosis_count: 0,
        fault_side: mutation.kind.operator().fault_side(),
        diagnoses: Vec::new(),
        sound: true,
        oracle_calls: 0,
        unexplained: false,
        error: None,
    };
    let report = match crate::diagnosis::diagnose(oracle, &components(mutant), config.options()) {
        Ok(r) => r,
        Err(e) => {
            result.unexplained = is_unexplained(&e);
            result.error = Some(e.to_string());
            return result;
        }
    };
    result.detected = !report.conflicts_used.is_empty();
    result.localized = report.diagnoses.contains(&Diagnosis::new([fault].into()));
    result.fault_in_diagnosis = report.diagnoses.iter().any(|d| d.contains(fault));
    result.diagnosis_count = report.diagnoses.len();
    result.oracle_calls = report.oracle_calls;
    result.sound = report
        .diagnoses
        .iter()
        .all(|d| matches!(oracle.check(d.members()), Ok(Verdict::Consistent)));
    result.diagnoses = report.diagnoses;
    result
}

fn is_unexplained(e: &DiagnosisError) -> bool {
    let DiagnosisError::Oracle { source, .. } = e else { return false };
    matches!(source.downcast_ref::<ValueError>(), Some(ValueError::InexplicableMismatch { .. }))
        || matches!(source.downcast_ref::<DepError>(), Some(DepError::InexplicableMismatch { .. }))
}

struct Job<'a> {
    entry: &'a CorpusEntry,
    operator: MutationOperator,
    seed: u64,
}

/// Inject one mutant per (entry, operator, seed), localize it with both
/// models and aggregate. The report does not depend on `config.jobs`.
pub fn run_benchmark(
    corpus: &[CorpusEntry],
    seeds: &[u64],
    operators: &[MutationOperator],
    config: BenchConfig,
) -> Result<BenchmarkReport, BenchError> {
    for entry in corpus {
        check_entry(entry, &config)?;
    }
    let mut jobs = Vec::new();
    for entry in corpus {
        for &operator in operators {
            for &seed in seeds {
                jobs.push(Job { entry, operator, seed });
            }
        }
    }
    let work = |job: &Job| -> Result<MutantRecord, Skipped> {
        let Job { entry, operator, seed } = *job;
        let (mutant, mutation) = inject_mutation(&entry.program, seed, operator).map_err(|e| Skipped {
            program: entry.name.clone(),
            operator,
            seed,
            reason: e.to_string(),
        })?;
        let trials: Vec<TrialResult> = Model::ALL
            .iter()
            .map(|&m| run_trial(entry, &mutant, &mutation, m, &config))
            .collect();
        Ok(MutantRecord {
            program: entry.name.clone(),
            operator,
            seed,
            equivalent: trials.iter().all(|t| !t.detected && t.error.is_none()),
            mutation,
            trials,
        })
    };
    let outcomes: Vec<Result<MutantRecord, Skipped>> = if config.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| BenchError::Pool(e.to_string()))?;
        pool.install(|| jobs.par_iter().map(work).collect())
    } else {
        jobs.iter().map(work).collect()
    };
    let mut mutants = Vec::new();
    let mut skipped = Vec::new();
    for o in outcomes {
        match o {
            Ok(m) => mutants.push(m),
            Err(s) => skipped.push(s),
        }
    }
    Ok(aggregate(config, seeds, operators, mutants, skipped))
}

fn rate(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn aggregate(
    config: BenchConfig,
    seeds: &[u64],
    operators: &[MutationOperator],
    mutants: Vec<MutantRecord>,
    skipped: Vec<Skipped>,
) -> BenchmarkReport {
    let mut ops: Vec<MutationOperator> = operators.to_vec();
    ops.sort();
    ops.dedup();

    #[derive(Default)]
    struct Acc {
        trials: usize,
        detected: usize,
        localized: usize,
        in_diag: usize,
        errors: usize,
        diag_sum: usize,
    }
    let mut by_cell: BTreeMap<(Model, MutationOperator), Acc> = BTreeMap::new();
    let mut by_side: BTreeMap<(Model, bool), Acc> = BTreeMap::new();
    let mut soundness_violations = 0;
    let mut completeness_violations = 0;
    let mut aborted_trials = 0;
    let mut unexplained_trials = 0;
    for m in &mutants {
        for t in &m.trials {
            for acc in [
                by_cell.entry((t.model, m.operator)).or_default(),
                by_side.entry((t.model, t.fault_side.is_left())).or_default(),
            ] {
                acc.trials += 1;
                acc.detected += t.detected as usize;
                acc.localized += t.localized as usize;
                acc.in_diag += t.fault_in_diagnosis as usize;
                acc.errors += t.error.is_some() as usize;
                if t.detected {
                    acc.diag_sum += t.diagnosis_count;
                }
            }
            soundness_violations += !t.sound as usize;
            unexplained_trials += t.unexplained as usize;
            aborted_trials += (t.error.is_some() && !t.unexplained) as usize;
            if t.model == Model::ValueBased && t.detected && !t.fault_in_diagnosis {
                completeness_violations += 1;
            }
        }
    }

    let mut cells = Vec::new();
    for model in Model::ALL {
        for &operator in &ops {
            let a = by_cell.remove(&(model, operator)).unwrap_or_default();
            cells.push(CellStats {
                model,
                operator,
                trials: a.trials,
                detected: a.detected,
                localized: a.localized,
                fault_in_diagnosis: a.in_diag,
                errors: a.errors,
                detection_rate: rate(a.detected, a.trials),
                localization_rate: rate(a.localized, a.trials),
                mean_diagnosis_count: if a.detected == 0 {
                    0.0
                } else {
                    a.diag_sum as f64 / a.detected as f64
                },
            });
        }
    }
    let mut sides = Vec::new();
    for model in Model::ALL {
        for left in [true, false] {
            let a = by_side.remove(&(model, left)).unwrap_or_default();
            sides.push(SideStats {
                model,
                side: if left { "lhs" } else { "rhs" }.to_string(),
                trials: a.trials,
                detected: a.detected,
                localized: a.localized,
                fault_in_diagnosis: a.in_diag,
                detection_rate: rate(a.detected, a.trials),
                localization_rate: rate(a.localized, a.trials),
            });
        }
    }
    let finds = |model: Model, side: &str| {
        sides
            .iter()
            .any(|s| s.model == model && s.side == side && s.fault_in_diagnosis > 0)
    };
    let mut claim = SideClaim {
        value_finds_lhs: finds(Model::ValueBased, "lhs"),
        value_finds_rhs: finds(Model::ValueBased, "rhs"),
        dep_finds_lhs: finds(Model::DependenceBased, "lhs"),
        dep_finds_rhs: finds(Model::DependenceBased, "rhs"),
        verdict: String::new(),
    };
    let has_lhs = sides.iter().any(|s| s.side == "lhs" && s.trials > 0);
    let has_rhs = sides.iter().any(|s| s.side == "rhs" && s.trials > 0);
    claim.verdict = if !has_lhs || !has_rhs {
        "undetermined"
    } else if claim.value_finds_lhs && claim.value_finds_rhs && claim.dep_finds_rhs && !claim.dep_finds_lhs {
        "confirmed"
    } else {
        "refuted"
    }
    .to_string();

    BenchmarkReport {
        config,
        seeds: seeds.to_vec(),
        operators: ops,
        equivalent_mutants: mutants.iter().filter(|m| m.equivalent).count(),
        mutants,
        skipped,
        cells,
        sides,
        side_claim: claim,
        soundness_violations,
        completeness_violations,
        unexplained_trials,
        aborted_trials,
    }
}

impl BenchmarkReport {
    pub fn total_trials(&self) -> usize {
        self.mutants.iter().map(|m| m.trials.len()).sum()
    }

    /// Every trial that localizes its fault also detected it, and every rate
    /// is a proportion.
    pub fn is_internally_consistent(&self) -> bool {
        let trials_ok = self
            .mutants
            .iter()
            .flat_map(|m| &m.trials)
            .all(|t| (!t.localized || t.detected) && (!t.localized || t.fault_in_diagnosis));
        let rates_ok = self
            .cells
            .iter()
            .flat_map(|c| [c.detection_rate, c.localization_rate])
            .chain(self.sides.iter().flat_map(|s| [s.detection_rate, s.localization_rate]))
            .all(|r| (0.0..=1.0).contains(&r));
        let sums_ok = self.cells.iter().map(|c| c.trials).sum::<usize>() == self.mutants.len() * Model::ALL.len()
            && self.total_trials() == self.mutants.len() * Model::ALL.len();
        trials_ok && rates_ok && sums_ok
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned plain-text summary.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<6} {:<17} {:>6} {:>8} {:>9} {:>7} {:>6} {:>9}",
            "model", "operator", "trials", "detected", "localized", "in-diag", "errors", "mean-diag"
        );
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{:<6} {:<17} {:>6} {:>8} {:>9} {:>7} {:>6} {:>9.2}",
                c.model.name(),
                c.operator.name(),
                c.trials,
                format!("{:.2}", c.detection_rate),
                format!("{:.2}", c.localization_rate),
                c.fault_in_diagnosis,
                c.errors,
                c.mean_diagnosis_count
            );
        }
        out.push('\n');
        let _ = writeln!(
            out,
            "{:<6} {:<5} {:>6} {:>8} {:>9} {:>7}",
            "model", "side", "trials", "detected", "localized", "in-diag"
        );
        for s in &self.sides {
            let _ = writeln!(
                out,
                "{:<6} {:<5} {:>6} {:>8} {:>9} {:>7}",
                s.model.name(),
                s.side,
                s.trials,
                format!("{:.2}", s.detection_rate),
                format!("{:.2}", s.localization_rate),
                s.fault_in_diagnosis
            );
        }
        out.push('\n');
        let c = &self.side_claim;
        let _ = writeln!(
            out,
            "value model finds lhs/rhs faults: {}/{}; dependence model: {}/{}",
            yes(c.value_finds_lhs),
            yes(c.value_finds_rhs),
            yes(c.dep_finds_lhs),
            yes(c.dep_finds_rhs)
        );
        let _ = writeln!(out, "claim \"dependence model finds faults only on the right-hand side\": {}", c.verdict);
        let _ = writeln!(
            out,
            "mutants: {} ({} equivalent, {} skipped); trials: {} ({} unexplained, {} aborted)",
            self.mutants.len(),
            self.equivalent_mutants,
            self.skipped.len(),
            self.total_trials(),
            self.unexplained_trials,
            self.aborted_trials
        );
        let _ = writeln!(
            out,
            "soundness violations: {}; single-fault completeness violations: {}",
            self.soundness_violations, self.completeness_violations
        );
        out
    }
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::faultlab::mutation::MutationKind;
    use crate::minilang::StmtId;

    fn paper_corpus() -> Vec<CorpusEntry> {
        vec![
            CorpusEntry::from_sources(
                "iv_a",
                "input a, b; output c; a := a + 2; b := b + a; c := a + b;",
                "in a = 2\nin b = 2\nexpect c = 10\n",
                "a <- a\nb <- a, b\nc <- a, b\n",
            )
            .unwrap(),
            CorpusEntry::from_sources(
                "iv_b",
                "input b, c; output a, b, c; a := b; b := c; c := a + b;",
                "in b = 1\nin c = 2\nexpect a = 1\nexpect b = 2\nexpect c = 3\n",
                "a <- b\nb <- c\nc <- a, b\n",
            )
            .unwrap(),
        ]
    }

    fn seed_for(p: &Program, want: &MutationKind, at: u32) -> u64 {
        (0..1000)
            .find(|&s| {
                let (_, m) = inject_mutation(p, s, MutationOperator::RhsVarReplace).unwrap();
                m.statement_id == StmtId(at) && &m.kind == want && m.occurrence == 1
            })
            .expect("some seed reproduces the mutation")
    }

    #[test]
    fn paper_mutations_are_localized() {
        let corpus = paper_corpus();
        let seed_a = seed_for(
            &corpus[0].program,
            &MutationKind::RhsVarReplace {
                from: "b".into(),
                to: "a".into(),
            },
            3,
        );
        let seed_b = seed_for(
            &corpus[1].program,
            &MutationKind::RhsVarReplace {
                from: "b".into(),
                to: "c".into(),
            },
            3,
        );
        let config = BenchConfig::default();
        let a = run_benchmark(&corpus[..1], &[seed_a], &[MutationOperator::RhsVarReplace], config).unwrap();
        let b = run_benchmark(&corpus[1..], &[seed_b], &[MutationOperator::RhsVarReplace], config).unwrap();
        let value_a = &a.mutants[0].trials[0];
        assert!(value_a.detected);
        assert_eq!(value_a.diagnoses, vec![Diagnosis::from_ids(&[1]), Diagnosis::from_ids(&[3])]);
        let dep_b = &b.mutants[0].trials[1];
        assert!(dep_b.detected);
        assert_eq!(dep_b.diagnoses, vec![Diagnosis::from_ids(&[3])]);
    }

    #[test]
    fn inconsistent_entry_is_rejected() {
        let mut corpus = paper_corpus();
        corpus[1].spec = crate::depmodel::parse_deps("a <- c\n").unwrap().set;
        let err = run_benchmark(&corpus, &[0], &[MutationOperator::RhsVarReplace], BenchConfig::default()).unwrap_err();
        assert!(matches!(err, BenchError::CorpusInconsistent { ref name, .. } if name == "iv_b"), "{err}");
    }

    #[test]
    fn parallel_run_matches_sequential() {
        let corpus = paper_corpus();
        let seq = run_benchmark(&corpus, &[0, 1, 2], &MutationOperator::ALL, BenchConfig::default()).unwrap();
        let par = run_benchmark(
            &corpus,
            &[0, 1, 2],
            &MutationOperator::ALL,
            BenchConfig {
                jobs: 4,
                ..BenchConfig::default()
            },
        )
        .unwrap();
        assert_eq!(seq.mutants, par.mutants);
        assert_eq!(seq.to_table(), par.to_table());
        assert!(seq.is_internally_consistent());
    }

    #[test]
    fn not_applicable_kinds_are_skipped() {
        let corpus = vec![CorpusEntry::from_sources("one", "input; output x; x := 1;", "expect x = 1\n", "").unwrap()];
        let r = run_benchmark(&corpus, &[0], &[MutationOperator::RhsVarReplace], BenchConfig::default()).unwrap();
        assert!(r.mutants.is_empty());
        assert_eq!(r.skipped.len(), 1);
        assert_eq!(r.side_claim.verdict, "undetermined");
    }
}
