use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use faultloc::cli::run;

const IV_A: &str = "input a, b;\noutput c;\na := a + 2;\nb := b + a;\nc := a + a;\n";
const IV_B: &str = "input b, c;\noutput a, b, c;\na := b;\nb := c;\nc := a + c;\n";
const IV_B_CORRECT: &str = "input b, c;\noutput a, b, c;\na := b;\nb := c;\nc := a + b;\n";

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    fn new() -> Fixture {
        let f = Fixture {
            dir: tempfile::tempdir().unwrap(),
        };
        f.write("iv_a.mini", IV_A);
        f.write("iv_a.test", "in a = 2\nin b = 2\nexpect c = 10\n");
        f.write("iv_b.mini", IV_B);
        f.write("iv_b_ok.mini", IV_B_CORRECT);
        f.write("iv_b.deps", "a <- b\nb <- c\nc <- a, b\n");
        f
    }

    fn write(&self, name: &str, text: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        fs::write(&p, text).unwrap();
        p
    }

    fn path(&self, name: &str) -> String {
        self.dir.path().join(name).display().to_string()
    }
}

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("faultloc").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn localize_value_model_reports_both_single_faults() {
    let f = Fixture::new();
    let (code, out, err) = call(&["localize", "--model", "value", "--program", &f.path("iv_a.mini"), "--test", &f.path("iv_a.test")]);
    assert_eq!(code, 1, "{err}");
    assert!(out.contains("{I}") && out.contains("{III}"), "{out}");
    assert!(out.contains("line 5: c := a + a;"), "{out}");
}

#[test]
fn localize_dep_model_reports_statement_three() {
    let f = Fixture::new();
    let (code, out, _) = call(&[
        "localize", "--model", "dep", "--granularity", "local", "--program", &f.path("iv_b.mini"), "--spec", &f.path("iv_b.deps"), "--format", "json",
    ]);
    assert_eq!(code, 1);
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["command"], "localize");
    assert_eq!(doc["result"]["diagnoses"], serde_json::json!([{ "statements": [3], "labels": ["III"], "lines": [5] }]));
    assert!(doc["version"].is_string());
}

#[test]
fn deps_output_checks_clean_against_itself() {
    let f = Fixture::new();
    let (code, deps, _) = call(&["deps", "--program", &f.path("iv_b_ok.mini")]);
    assert_eq!(code, 0);
    assert_eq!(deps, "a <- b\nb <- c\nc <- a, b\n");
    let spec = f.write("self.deps", &deps);
    let (code, out, _) = call(&["check", "--program", &f.path("iv_b_ok.mini"), "--spec", spec.to_str().unwrap()]);
    assert_eq!((code, out.as_str()), (0, "consistent\n"));
    let (code, out, _) = call(&["check", "--program", &f.path("iv_b.mini"), "--spec", &f.path("iv_b.deps")]);
    assert_eq!(code, 1);
    assert_eq!(out, "missing (c, b)\nspurious (c, c)\n");
}

#[test]
fn consistent_program_exits_zero() {
    let f = Fixture::new();
    let (code, out, _) = call(&["localize", "--model", "dep", "--program", &f.path("iv_b_ok.mini"), "--spec", &f.path("iv_b.deps")]);
    assert_eq!(code, 0);
    assert!(out.starts_with("consistent"), "{out}");
}

#[test]
fn parse_prints_canonical_source() {
    let f = Fixture::new();
    let messy = f.write("messy.mini", "input a; output x;   x:=a*(1+2) ;");
    let (code, out, _) = call(&["parse", "--program", messy.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(out, "input a;\noutput x;\nx := a * (1 + 2);\n");
}

#[test]
fn inject_reproduces_seeded_mutant() {
    let f = Fixture::new();
    let args = ["inject", "--program", &f.path("iv_b_ok.mini"), "--kind", "rhs-var-replace", "--seed", "7"];
    let (code, out, _) = call(&args);
    assert_eq!(code, 0);
    assert!(out.starts_with("# statement "), "{out}");
    assert_eq!(call(&args).1, out);
    let single = f.write("one.mini", "input; output x; x := 1;");
    let (code, _, err) = call(&["inject", "--program", single.to_str().unwrap(), "--kind", "rhs-var-replace"]);
    assert_eq!(code, 2);
    assert!(err.contains("no site admits"), "{err}");
}

#[test]
fn hs_reads_conflict_file() {
    let f = Fixture::new();
    let c = f.write("x.conflicts", "1 2\n2 3\n");
    let (code, out, _) = call(&["hs", "--conflicts", c.to_str().unwrap()]);
    assert_eq!((code, out.as_str()), (0, "2\n1 3\n"));
    let empty = f.write("empty.conflicts", "# nothing\n");
    assert_eq!(call(&["hs", "--conflicts", empty.to_str().unwrap()]).1, "{}\n");
}

#[test]
fn usage_and_file_errors_exit_two() {
    let f = Fixture::new();
    assert_eq!(call(&["localize", "--model", "value", "--program", &f.path("iv_a.mini")]).0, 2);
    assert_eq!(call(&["parse", "--program", &f.path("iv_a.mini"), "--bogus"]).0, 2);
    assert_eq!(call(&["frobnicate"]).0, 2);
    let (code, _, err) = call(&["parse", "--program", &f.path("missing.mini")]);
    assert_eq!(code, 2);
    assert!(err.contains("missing.mini"), "{err}");
    let bad = f.write("bad.mini", "input a; output a;\na := ;\n");
    let (code, _, err) = call(&["parse", "--program", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("bad.mini") && err.contains('2'), "{err}");
    assert_eq!(call(&["localize", "--model", "value", "--program", &f.path("iv_a.mini"), "--test", &f.path("iv_a.test"), "--loop-limit", "0"]).0, 2);
}

#[test]
fn oracle_failures_exit_three() {
    let f = Fixture::new();
    let p = f.write("spin.mini", "input n; output n; while (n > 0) { n := n + 1; }");
    let t = f.write("spin.test", "in n = 1\nexpect n = 0\n");
    let (code, _, err) = call(&["localize", "--model", "value", "--program", p.to_str().unwrap(), "--test", t.to_str().unwrap(), "--loop-limit", "50"]);
    assert_eq!(code, 3, "{err}");
    assert!(err.contains("exceeded 50"), "{err}");
}

#[test]
fn bench_json_is_byte_identical_across_runs_and_job_counts() {
    let args = ["bench", "--seeds", "0..2", "--format", "json"];
    let (code, first, _) = call(&args);
    assert_eq!(code, 0);
    assert_eq!(call(&args).1, first);
    let (_, parallel, _) = call(&["bench", "--seeds", "0..2", "--format", "json", "--jobs", "3"]);
    let strip = |s: &str| {
        let mut v: serde_json::Value = serde_json::from_str(s).unwrap();
        v["inputs"]["jobs"] = serde_json::Value::Null;
        v["result"]["config"]["jobs"] = serde_json::Value::Null;
        v
    };
    assert_eq!(strip(&first), strip(&parallel));
}

#[test]
fn bench_reads_manifest() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus/manifest.txt");
    let (code, out, err) = call(&["bench", "--manifest", manifest.to_str().unwrap(), "--seeds", "0", "--kind", "const-perturb"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("const-perturb"), "{out}");
    let f = Fixture::new();
    let broken = f.write("m.txt", "iv_b_ok.mini iv_a.test iv_b.deps\n");
    let (code, _, err) = call(&["bench", "--manifest", broken.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("iv_b_ok"), "{err}");
}

#[test]
fn binary_honours_exit_code_contract() {
    let f = Fixture::new();
    let bin = env!("CARGO_BIN_EXE_faultloc");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap();
    let out = status(&["localize", "--model", "value", "--program", &f.path("iv_a.mini"), "--test", &f.path("iv_a.test")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("{III}"));
    assert_eq!(status(&["deps", "--program", &f.path("iv_a.mini")]).status.code(), Some(0));
    assert_eq!(status(&["deps"]).status.code(), Some(2));
    assert_eq!(status(&["--help"]).status.code(), Some(0));
}
