//! Diagnosis oracles backed by the two models.

use std::collections::BTreeSet;

use crate::depmodel::{dep_conflicts, DependenceSet, Granularity};
use crate::diagnosis::{diagnose, Assumptions, DiagnoseOptions, DiagnosisError, DiagnosisReport, Oracle, OracleError, Verdict};
use crate::minilang::{EvalLimits, Program, StmtId};
use crate::valuemodel::{value_conflict_all, TestCase};

/// Value-based consistency: expected outputs of every test case against
/// forward evaluation.
pub struct ValueOracle<'a> {
    pub program: &'a Program,
    pub tests: &'a [TestCase],
    pub limits: EvalLimits,
}

impl Oracle for ValueOracle<'_> {
    fn check(&self, assumptions: &Assumptions) -> Result<Verdict, OracleError> {
        Ok(value_conflict_all(self.program, self.tests, assumptions, self.limits)?)
    }
}

/// Dependence-based consistency: computed dependences against a
/// specification. Only the first conflict is handed to the search; later
/// ones are rediscovered on demand.
pub struct DepOracle<'a> {
    pub program: &'a Program,
    pub spec: &'a DependenceSet,
    pub granularity: Granularity,
}

impl Oracle for DepOracle<'_> {
    fn check(&self, assumptions: &Assumptions) -> Result<Verdict, OracleError> {
        let conflicts = dep_conflicts(self.program, self.spec, self.granularity, assumptions)?;
        Ok(match conflicts.into_iter().next() {
            Some(c) => Verdict::Conflict(c),
            None => Verdict::Consistent,
        })
    }
}

pub fn components(p: &Program) -> BTreeSet<StmtId> {
    p.assign_ids()
}

pub fn localize_values(
    p: &Program,
    tests: &[TestCase],
    limits: EvalLimits,
    opts: DiagnoseOptions,
) -> Result<DiagnosisReport, DiagnosisError> {
    let oracle = ValueOracle {
        program: p,
        tests,
        limits,
    };
    diagnose(&oracle, &components(p), opts)
}

pub fn localize_dependences(
    p: &Program,
    spec: &DependenceSet,
    granularity: Granularity,
    opts: DiagnoseOptions,
) -> Result<DiagnosisReport, DiagnosisError> {
    let oracle = DepOracle {
        program: p,
        spec,
        granularity,
    };
    diagnose(&oracle, &components(p), opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::depmodel::compute_dependences;
    use crate::diagnosis::{brute_force_diagnose, Diagnosis};
    use crate::minilang::parse;

    #[test]
    fn value_example_diagnoses() {
        let p = parse("input a, b; output c; a := a + 2; b := b + a; c := a + a;").unwrap();
        let tests = [TestCase {
            inputs: [("a".to_string(), 2), ("b".to_string(), 2)].into(),
            expected: [("c".to_string(), 10)].into(),
        }];
        let report = localize_values(&p, &tests, EvalLimits::default(), DiagnoseOptions::default()).unwrap();
        assert_eq!(report.diagnoses, vec![Diagnosis::from_ids(&[1]), Diagnosis::from_ids(&[3])]);
        let oracle = ValueOracle {
            program: &p,
            tests: &tests,
            limits: EvalLimits::default(),
        };
        assert_eq!(brute_force_diagnose(&oracle, &components(&p), 3).unwrap(), report.diagnoses);
    }

    #[test]
    fn dependence_example_diagnoses() {
        let buggy = parse("input b, c; output a, b, c; a := b; b := c; c := a + c;").unwrap();
        let correct = parse("input b, c; output a, b, c; a := b; b := c; c := a + b;").unwrap();
        let spec = compute_dependences(&correct, Granularity::Local, &BTreeSet::new()).unwrap();
        let report = localize_dependences(&buggy, &spec, Granularity::Local, DiagnoseOptions::default()).unwrap();
        assert_eq!(report.diagnoses, vec![Diagnosis::from_ids(&[3])]);
        let oracle = DepOracle {
            program: &buggy,
            spec: &spec,
            granularity: Granularity::Local,
        };
        assert_eq!(brute_force_diagnose(&oracle, &components(&buggy), 3).unwrap(), report.diagnoses);
    }
}
