mod common;

use std::collections::BTreeMap;
use std::process::Command;

use overrun_lint::boundcheck::{check_loops, run_bound_check, LoopVerdict};
use overrun_lint::cfg::build_cfgs;
use overrun_lint::detectors::{analyze_unit, find_duplicates, load_ruleset, Finding, RuleSet};
use overrun_lint::frontend::{parse_source, CompilationUnit};
use overrun_lint::reporting::{count_loc, ComplexitySummary, MetricsInput, RowLevel};
use overrun_lint::runtime::{coverage_summary, execute, RunOptions};
use overrun_lint::semantics::build_symbol_table;

use common::*;

fn unit(name: &str) -> CompilationUnit {
    parse_source(&corpus_source(name), name).unwrap()
}

fn findings(name: &str) -> Vec<Finding> {
    analyze_unit(&unit(name), &RuleSet::default())
}

fn rule_lines(f: &[Finding], rule: &str) -> Vec<u32> {
    f.iter().filter(|x| x.rule_id == rule).map(|x| x.span.line).collect()
}

#[test]
fn corpus_parses_without_semantic_errors() {
    for name in corpus_files() {
        let u = unit(&name);
        let t = build_symbol_table(&u);
        assert!(t.diagnostics.is_empty(), "{name}: {:?}", t.diagnostics);
    }
}

#[test]
fn yang_loc_and_pmd_ruleset_total() {
    let src = corpus_source("yang.sl");
    assert_eq!(count_loc(&src), 26);
    let rules = load_ruleset(&std::fs::read_to_string(corpus_dir().join("pmd_code_test.ruleset")).unwrap()).unwrap();
    let f = analyze_unit(&unit("yang.sl"), &rules);
    assert_eq!(f.len(), 17);
    let mut counts = BTreeMap::new();
    for x in &f {
        *counts.entry(x.rule_id.as_str()).or_insert(0) += 1;
    }
    assert_eq!(counts["SystemPrintln"], 4);
    assert_eq!(counts["MethodArgumentCouldBeFinal"], 5);
    assert_eq!(counts["MethodNamingConventions"], 2);
    assert_eq!(counts["ParameterNameConvention"], 4);
}

#[test]
fn readline_dereference_flagged_once() {
    let f = findings("readline_loop.sl");
    assert_eq!(rule_lines(&f, "NP_DEREFERENCE_OF_READLINE_VALUE"), [13]);
}

#[test]
fn testing_class_bugs_on_their_lines() {
    let f = findings("testing.sl");
    assert_eq!(rule_lines(&f, "UnusedLocalVariable"), [11]);
    assert_eq!(rule_lines(&f, "IgnoredReturnValue"), [14]);
    assert_eq!(rule_lines(&f, "StreamNotClosed"), [16]);
    assert_eq!(rule_lines(&f, "StringEqualityOperator"), [20]);
}

#[test]
fn recursion_and_constructor_cycles() {
    assert_eq!(rule_lines(&findings("makeover.sl"), "InfiniteRecursion").len(), 1);
    let building = findings("building.sl");
    assert_eq!(rule_lines(&building, "CircularDependency").len(), 1);
    assert!(rule_lines(&building, "InfiniteRecursion").is_empty());
}

#[test]
fn threading_hazards() {
    let f = findings("monitors.sl");
    assert!(!rule_lines(&f, "DeadlockOrder").is_empty());
    assert_eq!(rule_lines(&f, "UnconditionalWait").len(), 1);
}

#[test]
fn equals_without_hashcode() {
    let f = findings("equals_hashcode.sl");
    assert_eq!(rule_lines(&f, "EqualsHashcodeMismatch").len(), 1);
}

#[test]
fn mutable_static_state() {
    let f = findings("checkers_state.sl");
    assert_eq!(rule_lines(&f, "StaticFieldCouldBeFinal").len(), 1);
}

#[test]
fn redundant_null_checks() {
    assert_eq!(rule_lines(&findings("robustness.sl"), "RedundantNullCheck").len(), 3);
}

#[test]
fn off_by_one_loop_verdict() {
    let u = unit("off_by_one.sl");
    let t = build_symbol_table(&u);
    let checks = check_loops(&u, &t);
    assert!(checks.iter().any(|c| c.verdict == LoopVerdict::OffByOne), "{checks:?}");
    assert!(!run_bound_check(&u).is_empty());
}

#[test]
fn clones_found_in_clone_file_only() {
    let units: Vec<_> = corpus_files().iter().map(|n| unit(n)).collect();
    let pairs = find_duplicates(&units, 30);
    assert!(!pairs.is_empty());
    for p in &pairs {
        assert_eq!(p.span_a.file.as_str(), "clones.sl");
        assert_eq!(p.span_b.file.as_str(), "clones.sl");
    }
}

#[test]
fn write_excel_complexity_rows() {
    let u = unit("write_excel.sl");
    let cfgs = build_cfgs(&u);
    let trace = execute(
        &u,
        &RunOptions {
            coverage_enabled: true,
            ..RunOptions::default()
        },
    )
    .unwrap();
    let cov = coverage_summary(&trace, &u, &cfgs).unwrap();
    let s = ComplexitySummary::build(
        "excel",
        &[MetricsInput {
            unit: &u,
            cfgs: &cfgs,
            coverage: Some(&cov),
        }],
    );
    let pct = |level, name| s.row(level, name).unwrap().coverage_pct.unwrap();
    assert_eq!(pct(RowLevel::Class, "WriteExcel"), 91.7);
    assert_eq!(pct(RowLevel::Method, "main(String[])"), 50.0);
    assert_eq!(pct(RowLevel::File, "write_excel.sl"), 78.6);
    assert_eq!(pct(RowLevel::Class, "ExcelTest"), 0.0);
    let wx = s.row(RowLevel::Class, "WriteExcel").unwrap();
    assert_eq!((wx.covered_complexity, wx.missed_complexity), (11, 1));
}

#[test]
fn coverage_counters_are_conserved() {
    let checked = check_corpus_conservation().unwrap();
    assert!(checked >= 15, "only {checked} runs checked");
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_overrun-lint"))
}

#[test]
fn cli_exit_codes() {
    let dir = corpus_dir();
    let status = |args: &[&str]| cli().args(args).current_dir(&dir).output().unwrap().status.code();
    assert_eq!(status(&["analyze", "yang.sl"]), Some(1));
    assert_eq!(status(&["analyze", "yang.sl", "--min-priority", "1"]), Some(0));
    assert_eq!(status(&["analyze", "no_such.sl"]), Some(2));
    assert_eq!(status(&["cpd", ".", "--min-tokens", "9"]), Some(2));
    assert_eq!(status(&["boundcheck", "off_by_one.sl"]), Some(1));
    assert_eq!(status(&["metrics", "write_excel.sl"]), Some(0));

    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.sl");
    std::fs::write(&bad, "class {").unwrap();
    let out = cli().args(["analyze"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse error"));

    let rules = tmp.path().join("r.ruleset");
    std::fs::write(&rules, "rule NoSuchRule\n").unwrap();
    let out = cli()
        .args(["analyze", "yang.sl", "--ruleset"])
        .arg(&rules)
        .current_dir(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cli_honors_review_annotations() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("yang.sl");
    std::fs::write(&file, corpus_source("yang.sl")).unwrap();
    let count = |honor: bool| {
        let mut c = cli();
        c.args(["analyze", "--format", "csv"]).arg(&file);
        if honor {
            c.arg("--honor-reviews");
        }
        String::from_utf8(c.output().unwrap().stdout).unwrap().lines().count() - 1
    };
    let before = count(true);
    let target = findings("yang.sl")
        .into_iter()
        .find(|f| f.rule_id == "SystemPrintln")
        .unwrap();
    let status = cli()
        .args([
            "annotate",
            "--in-place",
            "--rule",
            "SystemPrintln",
            "--reviewer",
            "MAK GAUR",
            "--time",
            "3/28/12 12.04PM",
        ])
        .arg("--line")
        .arg(target.span.line.to_string())
        .arg(&file)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(count(true), before - 1);
    assert_eq!(count(false), before);
}

#[test]
fn cli_run_reports_faults() {
    let dir = corpus_dir();
    let tmp = tempfile::tempdir().unwrap();
    let script = tmp.path().join("in.txt");
    std::fs::write(&script, "5\n").unwrap();
    let out = cli()
        .args(["run", "assertion.sl", "--ea", "--stdin"])
        .arg(&script)
        .current_dir(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("its false"));
    let out = cli()
        .args(["run", "assertion.sl", "--stdin"])
        .arg(&script)
        .current_dir(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "a = 5");
}
