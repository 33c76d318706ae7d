//! The `faultloc` command line.
//!
//! Exit codes: 0 success or consistent, 1 anomaly found, 2 usage or input
//! error, 3 model or internal error.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use crate::depmodel::{compare_dependences, compute_with_stats, format_deps, parse_deps, DependenceSet, Granularity};
use crate::diagnosis::{format_diagnoses, minimal_hitting_sets, parse_conflicts, DiagnoseOptions, DiagnosisError, DiagnosisReport};
use crate::faultlab::{builtin_corpus, inject_mutation, load_manifest, run_benchmark, BenchConfig, MutationOperator};
use crate::localize::{localize_dependences, localize_values};
use crate::minilang::{check_program, parse_with_lines, pretty, stmt_header, EvalLimits, Program, StmtId};
use crate::valuemodel::{parse_tests, TestCase};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ANOMALY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "faultloc", version, about = "Model-based fault localization for MiniLang programs")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Value,
    Dep,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and check a program, then pretty-print it.
    Parse {
        #[arg(long)]
        program: PathBuf,
    },
    /// List the dependences a program exhibits.
    Deps {
        #[arg(long)]
        program: PathBuf,
        #[arg(long, default_value = "local")]
        granularity: Granularity,
    },
    /// Compare computed dependences with a specification.
    Check {
        #[arg(long)]
        program: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value = "local")]
        granularity: Granularity,
    },
    /// Compute minimal diagnoses with the value or dependence model.
    Localize(LocalizeArgs),
    /// Inject one seeded mutation.
    Inject {
        #[arg(long)]
        program: PathBuf,
        #[arg(long)]
        kind: MutationOperator,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the mutation benchmark over a corpus.
    Bench(BenchArgs),
    /// Minimal hitting sets of the conflicts in a file.
    Hs {
        #[arg(long)]
        conflicts: PathBuf,
        #[arg(long, default_value_t = crate::diagnosis::DEFAULT_MAX_CARDINALITY)]
        max_card: usize,
    },
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[arg(long, default_value = "local")]
    granularity: Granularity,
    #[arg(long, default_value_t = crate::diagnosis::DEFAULT_MAX_CARDINALITY)]
    max_card: usize,
    #[arg(long, default_value_t = crate::minilang::DEFAULT_MAX_LOOP_ITERATIONS,
          value_parser = clap::value_parser!(u64).range(1..))]
    loop_limit: u64,
    /// Shrink conflicts by greedy deletion before use.
    #[arg(long)]
    minimize_conflicts: bool,
}

#[derive(Args, Debug)]
struct LocalizeArgs {
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long)]
    program: PathBuf,
    /// Test cases (value model).
    #[arg(long)]
    test: Option<PathBuf>,
    /// Dependence specification (dependence model).
    #[arg(long)]
    spec: Option<PathBuf>,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Corpus manifest; the bundled corpus when omitted.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// `a..b` (end exclusive) or a comma-separated list.
    #[arg(long, default_value = "0..5", value_parser = parse_seeds)]
    seeds: Seeds,
    /// Mutation kinds; all kinds when omitted.
    #[arg(long = "kind")]
    kinds: Vec<MutationOperator>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Debug, Clone)]
struct Seeds(Vec<u64>);

fn parse_seeds(s: &str) -> Result<Seeds, String> {
    seed_list(s).map(Seeds)
}

fn seed_list(s: &str) -> Result<Vec<u64>, String> {
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| format!("invalid range start `{a}`"))?;
        let b: u64 = b.trim().parse().map_err(|_| format!("invalid range end `{b}`"))?;
        if a >= b {
            return Err(format!("empty seed range `{s}`"));
        }
        return Ok((a..b).collect());
    }
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| format!("invalid seed `{t}`")))
        .collect()
}

struct Failure {
    code: i32,
    message: String,
}

fn usage(message: String) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message,
    }
}

fn internal(message: String) -> Failure {
    Failure {
        code: EXIT_INTERNAL,
        message,
    }
}

/// What a command produced: exit code, text rendering, JSON result.
struct Outcome {
    code: i32,
    text: String,
    result: Json,
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_program(path: &Path) -> Result<(Program, BTreeMap<StmtId, usize>), Failure> {
    let src = read(path)?;
    let (p, lines) = parse_with_lines(&src).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    check_program(&p).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok((p, lines))
}

fn load_spec(path: &Path, warnings: &mut Vec<String>) -> Result<DependenceSet, Failure> {
    let parsed = parse_deps(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    warnings.extend(parsed.warnings.into_iter().map(|w| format!("{}: {w}", path.display())));
    Ok(parsed.set)
}

fn load_tests(path: &Path, p: &Program) -> Result<Vec<TestCase>, Failure> {
    let tests = parse_tests(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    if tests.is_empty() {
        return Err(usage(format!("{}: no test cases", path.display())));
    }
    for (i, t) in tests.iter().enumerate() {
        t.validate(p)
            .map_err(|e| usage(format!("{}: test {}: {e}", path.display(), i + 1)))?;
    }
    Ok(tests)
}

fn pair_json(set: &BTreeSet<crate::depmodel::DependencePair>) -> Json {
    Json::Array(set.iter().map(|p| json!([p.target, p.source])).collect())
}

fn ids_json(ids: &BTreeSet<StmtId>) -> Json {
    Json::Array(ids.iter().map(|i| json!(i.0)).collect())
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

/// Run the CLI on `args` (including the program name) and return the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(rendered.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(rendered.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    let mut warnings = Vec::new();
    let (name, inputs, outcome) = dispatch(&cli.command, &mut warnings);
    for w in &warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    match outcome {
        Ok(o) => {
            let written = match cli.format {
                Format::Text => out.write_all(o.text.as_bytes()),
                Format::Json => {
                    let doc = json!({
                        "command": name,
                        "inputs": inputs,
                        "result": o.result,
                        "version": env!("CARGO_PKG_VERSION"),
                    });
                    writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json"))
                }
            };
            if written.is_err() {
                return EXIT_INTERNAL;
            }
            o.code
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cmd: &Command, warnings: &mut Vec<String>) -> (&'static str, Json, Result<Outcome, Failure>) {
    match cmd {
        Command::Parse { program } => ("parse", json!({ "program": path_str(program) }), cmd_parse(program)),
        Command::Deps { program, granularity } => (
            "deps",
            json!({ "program": path_str(program), "granularity": granularity.to_string() }),
            cmd_deps(program, *granularity),
        ),
        Command::Check {
            program,
            spec,
            granularity,
        } => (
            "check",
            json!({
                "program": path_str(program),
                "spec": path_str(spec),
                "granularity": granularity.to_string(),
            }),
            cmd_check(program, spec, *granularity, warnings),
        ),
        Command::Localize(a) => (
            "localize",
            json!({
                "model": match a.model { ModelArg::Value => "value", ModelArg::Dep => "dep" },
                "program": path_str(&a.program),
                "test": a.test.as_deref().map(path_str),
                "spec": a.spec.as_deref().map(path_str),
                "granularity": a.search.granularity.to_string(),
                "max_card": a.search.max_card,
                "loop_limit": a.search.loop_limit,
                "minimize_conflicts": a.search.minimize_conflicts,
            }),
            cmd_localize(a, warnings),
        ),
        Command::Inject { program, kind, seed } => (
            "inject",
            json!({ "program": path_str(program), "kind": kind.name(), "seed": seed }),
            cmd_inject(program, *kind, *seed),
        ),
        Command::Bench(a) => (
            "bench",
            json!({
                "manifest": a.manifest.as_deref().map(path_str),
                "seeds": a.seeds.0,
                "kinds": a.kinds.iter().map(|k| k.name()).collect::<Vec<_>>(),
                "jobs": a.jobs,
                "granularity": a.search.granularity.to_string(),
                "max_card": a.search.max_card,
                "loop_limit": a.search.loop_limit,
                "minimize_conflicts": a.search.minimize_conflicts,
            }),
            cmd_bench(a),
        ),
        Command::Hs { conflicts, max_card } => (
            "hs",
            json!({ "conflicts": path_str(conflicts), "max_card": max_card }),
            cmd_hs(conflicts, *max_card),
        ),
    }
}

fn cmd_parse(path: &Path) -> Result<Outcome, Failure> {
    let (p, lines) = load_program(path)?;
    let statements: Vec<Json> = p
        .statements()
        .iter()
        .map(|s| {
            json!({
                "id": s.id.0,
                "label": s.id.roman(),
                "line": lines.get(&s.id),
                "text": stmt_header(s),
            })
        })
        .collect();
    let text = pretty(&p);
    Ok(Outcome {
        code: EXIT_OK,
        result: json!({
            "inputs": p.inputs,
            "outputs": p.outputs,
            "statements": statements,
            "pretty": text,
        }),
        text,
    })
}

fn cmd_deps(path: &Path, g: Granularity) -> Result<Outcome, Failure> {
    let (p, _) = load_program(path)?;
    let (set, stats) = compute_with_stats(&p, g, &BTreeSet::new()).map_err(|e| internal(e.to_string()))?;
    let iterations: BTreeMap<String, usize> = stats.loop_iterations.iter().map(|(k, v)| (k.0.to_string(), *v)).collect();
    Ok(Outcome {
        code: EXIT_OK,
        text: format_deps(&set),
        result: json!({ "pairs": pair_json(&set.pairs), "fixpoint_iterations": iterations }),
    })
}

fn cmd_check(path: &Path, spec: &Path, g: Granularity, warnings: &mut Vec<String>) -> Result<Outcome, Failure> {
    let (p, _) = load_program(path)?;
    let spec = load_spec(spec, warnings)?;
    let computed = crate::depmodel::compute_dependences(&p, g, &BTreeSet::new()).map_err(|e| internal(e.to_string()))?;
    let diff = compare_dependences(&computed, &spec);
    let mut text = String::new();
    if diff.is_empty() {
        text.push_str("consistent\n");
    }
    for pair in &diff.missing {
        text.push_str(&format!("missing {pair}\n"));
    }
    for pair in &diff.spurious {
        text.push_str(&format!("spurious {pair}\n"));
    }
    Ok(Outcome {
        code: if diff.is_empty() { EXIT_OK } else { EXIT_ANOMALY },
        text,
        result: json!({
            "consistent": diff.is_empty(),
            "missing": pair_json(&diff.missing),
            "spurious": pair_json(&diff.spurious),
        }),
    })
}

fn search_error(e: DiagnosisError) -> Failure {
    match e {
        DiagnosisError::TooManyComponents { .. } => usage(e.to_string()),
        _ => internal(e.to_string()),
    }
}

fn cmd_localize(a: &LocalizeArgs, warnings: &mut Vec<String>) -> Result<Outcome, Failure> {
    let (p, lines) = load_program(&a.program)?;
    let opts = DiagnoseOptions {
        max_cardinality: a.search.max_card,
        minimize_conflicts: a.search.minimize_conflicts,
    };
    let report = match a.model {
        ModelArg::Value => {
            let path = a.test.as_deref().ok_or_else(|| usage("--model value requires --test".into()))?;
            let tests = load_tests(path, &p)?;
            let limits = EvalLimits {
                max_loop_iterations: a.search.loop_limit,
            };
            localize_values(&p, &tests, limits, opts).map_err(search_error)?
        }
        ModelArg::Dep => {
            let path = a.spec.as_deref().ok_or_else(|| usage("--model dep requires --spec".into()))?;
            let spec = load_spec(path, warnings)?;
            localize_dependences(&p, &spec, a.search.granularity, opts).map_err(search_error)?
        }
    };
    Ok(render_report(&p, &lines, &report, a.search.max_card))
}

fn render_report(p: &Program, lines: &BTreeMap<StmtId, usize>, r: &DiagnosisReport, max_card: usize) -> Outcome {
    let consistent = r.is_consistent();
    let mut text = String::new();
    if consistent {
        text.push_str("consistent: no conflict found\n");
    } else {
        text.push_str("conflicts:\n");
        for c in &r.conflicts_used {
            text.push_str(&format!("  {c}\n"));
        }
        if r.diagnoses.is_empty() {
            text.push_str(&format!("no diagnosis of cardinality <= {max_card}\n"));
        } else {
            text.push_str(&format!("diagnoses ({}):\n", r.diagnoses.len()));
        }
        for d in &r.diagnoses {
            let labels: Vec<String> = d.members().iter().map(|i| i.roman()).collect();
            text.push_str(&format!("  {{{}}}\n", labels.join(", ")));
            for id in d.members() {
                let line = lines.get(id).map(|l| l.to_string()).unwrap_or_else(|| "?".into());
                let src = p.statement(*id).map(stmt_header).unwrap_or_default();
                text.push_str(&format!("    {:<5} statement {id}, line {line}: {src}\n", id.roman()));
            }
        }
    }
    text.push_str(&format!("oracle calls: {}\n", r.oracle_calls));
    let diagnoses: Vec<Json> = r
        .diagnoses
        .iter()
        .map(|d| {
            json!({
                "statements": ids_json(d.members()),
                "labels": d.members().iter().map(|i| i.roman()).collect::<Vec<_>>(),
                "lines": d.members().iter().map(|i| lines.get(i)).collect::<Vec<_>>(),
            })
        })
        .collect();
    Outcome {
        code: if consistent { EXIT_OK } else { EXIT_ANOMALY },
        text,
        result: json!({
            "consistent": consistent,
            "conflicts": r.conflicts_used.iter().map(|c| ids_json(c.members())).collect::<Vec<_>>(),
            "diagnoses": diagnoses,
            "oracle_calls": r.oracle_calls,
        }),
    }
}

fn cmd_inject(path: &Path, kind: MutationOperator, seed: u64) -> Result<Outcome, Failure> {
    let (p, _) = load_program(path)?;
    let (mutant, m) = inject_mutation(&p, seed, kind).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let source = pretty(&mutant);
    Ok(Outcome {
        code: EXIT_OK,
        text: format!("# {m}\n{source}"),
        result: json!({
            "mutation": serde_json::to_value(&m).expect("json"),
            "mutant": source,
        }),
    })
}

fn cmd_bench(a: &BenchArgs) -> Result<Outcome, Failure> {
    let corpus = match &a.manifest {
        Some(path) => load_manifest(path).map_err(|e| usage(e.to_string()))?,
        None => builtin_corpus(),
    };
    let kinds: Vec<MutationOperator> = if a.kinds.is_empty() {
        MutationOperator::ALL.to_vec()
    } else {
        a.kinds.clone()
    };
    let config = BenchConfig {
        granularity: a.search.granularity,
        max_cardinality: a.search.max_card,
        minimize_conflicts: a.search.minimize_conflicts,
        limits: EvalLimits {
            max_loop_iterations: a.search.loop_limit,
        },
        jobs: a.jobs,
    };
    let report = run_benchmark(&corpus, &a.seeds.0, &kinds, config).map_err(|e| match e {
        crate::faultlab::BenchError::CorpusInconsistent { .. } => usage(e.to_string()),
        other => internal(other.to_string()),
    })?;
    Ok(Outcome {
        code: EXIT_OK,
        text: report.to_table(),
        result: serde_json::to_value(&report).expect("json"),
    })
}

fn cmd_hs(path: &Path, max_card: usize) -> Result<Outcome, Failure> {
    let conflicts = parse_conflicts(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let diagnoses = minimal_hitting_sets(&conflicts, max_card);
    Ok(Outcome {
        code: EXIT_OK,
        text: format_diagnoses(&diagnoses),
        result: json!({
            "diagnoses": diagnoses.iter().map(|d| ids_json(d.members())).collect::<Vec<_>>(),
        }),
    })
}
