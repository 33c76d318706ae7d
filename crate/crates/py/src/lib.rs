//! Python bindings: `import pyfaultloc`.

use std::collections::{BTreeMap, BTreeSet};

use faultloc::depmodel::{self, DependenceSet, Granularity};
use faultloc::diagnosis::{self, Conflict, DiagnoseOptions, Diagnosis, Verdict};
use faultloc::faultlab::{self, BenchConfig, MutationOperator};
use faultloc::localize;
use faultloc::minilang::{self, EvalLimits, Program, StmtId};
use faultloc::valuemodel::{self, TestCase};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn granularity(s: &str) -> PyResult<Granularity> {
    s.parse().map_err(value_err)
}

fn limits(loop_limit: u64) -> PyResult<EvalLimits> {
    if loop_limit == 0 {
        return Err(value_err("loop_limit must be at least 1"));
    }
    Ok(EvalLimits {
        max_loop_iterations: loop_limit,
    })
}

fn stmt_ids(ids: &[u32]) -> BTreeSet<StmtId> {
    ids.iter().map(|&i| StmtId(i)).collect()
}

fn to_lists(ds: &[Diagnosis]) -> Vec<Vec<u32>> {
    ds.iter().map(|d| d.members().iter().map(|i| i.0).collect()).collect()
}

fn spec_from_text(text: &str) -> PyResult<DependenceSet> {
    Ok(depmodel::parse_deps(text).map_err(value_err)?.set)
}

/// A parsed and checked MiniLang program.
#[pyclass(name = "Program", module = "pyfaultloc", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyProgram {
    inner: Program,
}

#[pymethods]
impl PyProgram {
    #[new]
    fn new(source: &str) -> PyResult<Self> {
        Ok(PyProgram {
            inner: minilang::parse(source).map_err(value_err)?,
        })
    }

    #[getter]
    fn inputs(&self) -> Vec<String> {
        self.inner.inputs.clone()
    }

    #[getter]
    fn outputs(&self) -> Vec<String> {
        self.inner.outputs.clone()
    }

    fn pretty(&self) -> String {
        minilang::pretty(&self.inner)
    }

    /// `(id, roman label, header text)` for every statement.
    fn statements(&self) -> Vec<(u32, String, String)> {
        self.inner
            .statements()
            .iter()
            .map(|s| (s.id.0, s.id.roman(), minilang::stmt_header(s)))
            .collect()
    }

    /// Ids of the assignment statements, the diagnosable components.
    fn assignments(&self) -> Vec<u32> {
        self.inner.assign_ids().iter().map(|i| i.0).collect()
    }

    #[pyo3(signature = (inputs, loop_limit = minilang::DEFAULT_MAX_LOOP_ITERATIONS))]
    fn run(&self, inputs: BTreeMap<String, i64>, loop_limit: u64) -> PyResult<BTreeMap<String, i64>> {
        minilang::run(&self.inner, &inputs, limits(loop_limit)?).map_err(runtime_err)
    }

    /// Dependence pairs `(target, source)` with `abnormal` statements
    /// unconstrained.
    #[pyo3(signature = (granularity = "local", abnormal = Vec::new()))]
    fn dependences(&self, granularity: &str, abnormal: Vec<u32>) -> PyResult<Vec<(String, String)>> {
        let set = depmodel::compute_dependences(&self.inner, self::granularity(granularity)?, &stmt_ids(&abnormal))
            .map_err(value_err)?;
        Ok(set.pairs.into_iter().map(|p| (p.target, p.source)).collect())
    }

    fn __str__(&self) -> String {
        self.pretty()
    }

    fn __repr__(&self) -> String {
        format!(
            "Program(inputs={:?}, outputs={:?}, statements={})",
            self.inner.inputs,
            self.inner.outputs,
            self.inner.statements().len()
        )
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

/// Input values and expected outputs for one run.
#[pyclass(name = "TestCase", module = "pyfaultloc", frozen, from_py_object)]
#[derive(Clone)]
pub struct PyTestCase {
    inner: TestCase,
}

#[pymethods]
impl PyTestCase {
    #[new]
    fn new(inputs: BTreeMap<String, i64>, expected: BTreeMap<String, i64>) -> Self {
        PyTestCase {
            inner: TestCase { inputs, expected },
        }
    }

    #[getter]
    fn inputs(&self) -> BTreeMap<String, i64> {
        self.inner.inputs.clone()
    }

    #[getter]
    fn expected(&self) -> BTreeMap<String, i64> {
        self.inner.expected.clone()
    }

    fn __repr__(&self) -> String {
        format!("TestCase(inputs={:?}, expected={:?})", self.inner.inputs, self.inner.expected)
    }
}

fn unwrap_tests(tests: &[PyTestCase], p: &Program) -> PyResult<Vec<TestCase>> {
    let tests: Vec<TestCase> = tests.iter().map(|t| t.inner.clone()).collect();
    for t in &tests {
        t.validate(p).map_err(value_err)?;
    }
    Ok(tests)
}

#[pyfunction]
fn parse(source: &str) -> PyResult<PyProgram> {
    PyProgram::new(source)
}

/// Parse `.test` text into test cases.
#[pyfunction]
fn parse_tests(text: &str) -> PyResult<Vec<PyTestCase>> {
    Ok(valuemodel::parse_tests(text)
        .map_err(value_err)?
        .into_iter()
        .map(|inner| PyTestCase { inner })
        .collect())
}

/// `(missing, spurious)` pairs of the program against `.deps` text.
#[pyfunction]
#[pyo3(signature = (program, spec, granularity = "local"))]
fn compare_dependences(
    program: &PyProgram,
    spec: &str,
    granularity: &str,
) -> PyResult<(Vec<(String, String)>, Vec<(String, String)>)> {
    let spec = spec_from_text(spec)?;
    let computed = depmodel::compute_dependences(&program.inner, self::granularity(granularity)?, &BTreeSet::new())
        .map_err(value_err)?;
    let diff = depmodel::compare_dependences(&computed, &spec);
    let pairs = |s: BTreeSet<depmodel::DependencePair>| s.into_iter().map(|p| (p.target, p.source)).collect();
    Ok((pairs(diff.missing), pairs(diff.spurious)))
}

/// Dependence-model conflicts under the given abnormal statements.
#[pyfunction]
#[pyo3(signature = (program, spec, granularity = "local", abnormal = Vec::new()))]
fn dependence_conflicts(program: &PyProgram, spec: &str, granularity: &str, abnormal: Vec<u32>) -> PyResult<Vec<Vec<u32>>> {
    let spec = spec_from_text(spec)?;
    let cs = depmodel::dep_conflicts(&program.inner, &spec, self::granularity(granularity)?, &stmt_ids(&abnormal))
        .map_err(runtime_err)?;
    Ok(cs.iter().map(|c| c.members().iter().map(|i| i.0).collect()).collect())
}

/// Value-model conflict over all tests, or `None` when consistent.
#[pyfunction]
#[pyo3(signature = (program, tests, abnormal = Vec::new(), loop_limit = minilang::DEFAULT_MAX_LOOP_ITERATIONS))]
fn value_conflict(program: &PyProgram, tests: Vec<PyTestCase>, abnormal: Vec<u32>, loop_limit: u64) -> PyResult<Option<Vec<u32>>> {
    let tests = unwrap_tests(&tests, &program.inner)?;
    let verdict = valuemodel::value_conflict_all(&program.inner, &tests, &stmt_ids(&abnormal), limits(loop_limit)?)
        .map_err(runtime_err)?;
    Ok(match verdict {
        Verdict::Consistent => None,
        Verdict::Conflict(c) => Some(c.members().iter().map(|i| i.0).collect()),
    })
}

/// Minimal diagnoses, each a sorted list of statement ids. `[[]]` means the
/// program is consistent with its observations.
#[pyfunction]
#[pyo3(signature = (
    program, model, tests = None, spec = None, granularity = "local", max_card = diagnosis::DEFAULT_MAX_CARDINALITY,
    loop_limit = minilang::DEFAULT_MAX_LOOP_ITERATIONS, minimize_conflicts = false
))]
#[allow(clippy::too_many_arguments)]
fn localize_faults(
    program: &PyProgram,
    model: &str,
    tests: Option<Vec<PyTestCase>>,
    spec: Option<&str>,
    granularity: &str,
    max_card: usize,
    loop_limit: u64,
    minimize_conflicts: bool,
) -> PyResult<Vec<Vec<u32>>> {
    let opts = DiagnoseOptions {
        max_cardinality: max_card,
        minimize_conflicts,
    };
    let report = match model {
        "value" => {
            let tests = tests.ok_or_else(|| value_err("the value model needs tests"))?;
            let tests = unwrap_tests(&tests, &program.inner)?;
            localize::localize_values(&program.inner, &tests, limits(loop_limit)?, opts)
        }
        "dep" => {
            let spec = spec_from_text(spec.ok_or_else(|| value_err("the dependence model needs a spec"))?)?;
            localize::localize_dependences(&program.inner, &spec, self::granularity(granularity)?, opts)
        }
        other => return Err(value_err(format!("unknown model `{other}` (expected value or dep)"))),
    }
    .map_err(runtime_err)?;
    Ok(to_lists(&report.diagnoses))
}

/// Minimal hitting sets of a conflict family.
#[pyfunction]
#[pyo3(signature = (conflicts, max_card = diagnosis::DEFAULT_MAX_CARDINALITY))]
fn minimal_hitting_sets(conflicts: Vec<Vec<u32>>, max_card: usize) -> PyResult<Vec<Vec<u32>>> {
    let mut family = Vec::new();
    for c in conflicts {
        if c.contains(&0) {
            return Err(value_err("statement ids start at 1"));
        }
        family.push(Conflict::from_ids(&c).ok_or_else(|| value_err("conflicts must be nonempty"))?);
    }
    Ok(to_lists(&diagnosis::minimal_hitting_sets(&family, max_card)))
}

/// One seeded mutant: `(mutant, description)`.
#[pyfunction]
fn inject_mutation(program: &PyProgram, seed: u64, kind: &str) -> PyResult<(PyProgram, String)> {
    let op: MutationOperator = kind.parse().map_err(value_err)?;
    let (inner, m) = faultlab::inject_mutation(&program.inner, seed, op).map_err(value_err)?;
    Ok((PyProgram { inner }, m.to_string()))
}

/// Benchmark report over the bundled corpus, as JSON text.
#[pyfunction]
#[pyo3(signature = (seeds, kinds = None, jobs = 1))]
fn run_benchmark(py: Python<'_>, seeds: Vec<u64>, kinds: Option<Vec<String>>, jobs: usize) -> PyResult<String> {
    let ops: Vec<MutationOperator> = match kinds {
        Some(ks) => ks.iter().map(|k| k.parse()).collect::<Result<_, _>>().map_err(value_err)?,
        None => MutationOperator::ALL.to_vec(),
    };
    let config = BenchConfig {
        jobs,
        ..BenchConfig::default()
    };
    let report = py
        .detach(|| faultlab::run_benchmark(&faultlab::builtin_corpus(), &seeds, &ops, config))
        .map_err(runtime_err)?;
    Ok(report.to_json())
}

/// Run the command-line interface: `(exit code, stdout, stderr)`.
#[pyfunction]
fn run_cli(args: Vec<String>) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("faultloc".to_string()).chain(args);
    let code = faultloc::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8_lossy(&out).into_owned(), String::from_utf8_lossy(&err).into_owned())
}

#[pymodule]
fn pyfaultloc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyProgram>()?;
    m.add_class::<PyTestCase>()?;
    m.add_function(wrap_pyfunction!(parse, m)?)?;
    m.add_function(wrap_pyfunction!(parse_tests, m)?)?;
    m.add_function(wrap_pyfunction!(compare_dependences, m)?)?;
    m.add_function(wrap_pyfunction!(dependence_conflicts, m)?)?;
    m.add_function(wrap_pyfunction!(value_conflict, m)?)?;
    m.add_function(wrap_pyfunction!(localize_faults, m)?)?;
    m.add_function(wrap_pyfunction!(minimal_hitting_sets, m)?)?;
    m.add_function(wrap_pyfunction!(inject_mutation, m)?)?;
    m.add_function(wrap_pyfunction!(run_benchmark, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
