//! Benchmark corpora: a program, its test cases and its dependence spec.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::depmodel::{parse_deps, DependenceSet};
use crate::minilang::{parse, Program};
use crate::valuemodel::{parse_tests, TestCase};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusEntry {
    pub name: String,
    pub program: Program,
    pub tests: Vec<TestCase>,
    pub spec: DependenceSet,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Invalid { path: PathBuf, message: String },
    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },
}

impl CorpusEntry {
    /// Build an entry from source texts. Errors name the offending part.
    pub fn from_sources(name: &str, program: &str, tests: &str, spec: &str) -> Result<CorpusEntry, String> {
        let program = parse(program).map_err(|e| format!("program: {e}"))?;
        let tests = parse_tests(tests).map_err(|e| format!("tests: {e}"))?;
        let spec = parse_deps(spec).map_err(|e| format!("spec: {e}"))?.set;
        Ok(CorpusEntry {
            name: name.to_string(),
            program,
            tests,
            spec,
        })
    }
}

fn read(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Load a manifest: each non-comment line names `program tests spec`,
/// relative to the manifest's directory.
pub fn load_manifest(path: &Path) -> Result<Vec<CorpusEntry>, CorpusError> {
    let text = read(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [prog, tests, spec] = parts[..] else {
            return Err(CorpusError::Manifest {
                line: idx + 1,
                message: format!("expected 3 paths, found {}", parts.len()),
            });
        };
        let prog_path = base.join(prog);
        let name = Path::new(prog)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| prog.to_string());
        let entry = CorpusEntry::from_sources(
            &name,
            &read(&prog_path)?,
            &read(&base.join(tests))?,
            &read(&base.join(spec))?,
        )
        .map_err(|message| CorpusError::Invalid {
            path: prog_path.clone(),
            message,
        })?;
        entries.push(entry);
    }
    Ok(entries)
}

macro_rules! builtin {
    ($($name:literal),* $(,)?) => {
        &[$((
            $name,
            include_str!(concat!("../../corpus/", $name, ".mini")),
            include_str!(concat!("../../corpus/", $name, ".test")),
            include_str!(concat!("../../corpus/", $name, ".deps")),
        )),*]
    };
}

const BUILTIN: &[(&str, &str, &str, &str)] = builtin!(
    "p01_sum",
    "p02_rotate",
    "p03_record",
    "p04_temperature",
    "p05_squares",
    "p06_maxdiff",
    "p07_clamp",
    "p08_sign",
    "p09_sumloop",
    "p10_power",
);

/// The bundled ten-program corpus.
pub fn builtin_corpus() -> Vec<CorpusEntry> {
    BUILTIN
        .iter()
        .map(|(name, p, t, s)| CorpusEntry::from_sources(name, p, t, s).expect("bundled corpus is well-formed"))
        .collect()
}
