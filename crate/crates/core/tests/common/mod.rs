//! Shared fixtures for the integration tests and the acceptance suite.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use overrun_lint::cfg::{build_cfgs, complexity_bd};
use overrun_lint::frontend::parse_source;
use overrun_lint::runtime::{coverage_summary, execute, CounterKind, LineStatus, RunError, RunOptions};

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

pub fn corpus_source(name: &str) -> String {
    std::fs::read_to_string(corpus_dir().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Every `.sl` file in the corpus, sorted by name.
pub fn corpus_files() -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".sl"))
        .collect();
    names.sort();
    names
}

/// Stdin scripts each corpus program is run under.
pub fn stdin_scripts(name: &str) -> Vec<Vec<String>> {
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    match name {
        "readline_loop.sl" => vec![
            s(&[]),
            s(&["1"]),
            s(&["1", "2"]),
            s(&["1", "2", "3"]),
            s(&["a", "b", "c", "d"]),
        ],
        "assertion.sl" => vec![s(&["5"]), s(&["20"]), s(&["x"])],
        _ => vec![s(&[])],
    }
}

/// A randomly generated structured method body and the number of binary
/// decisions it contains, counted while generating.
pub struct GeneratedMethod {
    pub body: String,
    pub binary_decisions: usize,
}

pub const MAX_DEPTH: usize = 4;
pub const MAX_DECISIONS: usize = 10;

struct MethodGen {
    rng: ChaCha8Rng,
    decisions: usize,
    loop_vars: usize,
}

impl MethodGen {
    fn simple(&mut self) -> String {
        match self.rng.gen_range(0..4) {
            0 => "x = x + 1;".into(),
            1 => "y = x * 2;".into(),
            2 => "println(x);".into(),
            _ => "y = y - x;".into(),
        }
    }

    fn stmt(&mut self, depth: usize) -> String {
        let room = MAX_DECISIONS - self.decisions;
        if depth >= MAX_DEPTH || room == 0 || self.rng.gen_bool(0.3) {
            return self.simple();
        }
        let k = self.rng.gen_range(0..10);
        match self.rng.gen_range(0..7) {
            0 => {
                self.decisions += 1;
                format!("if (x > {k}) {}", self.stmt(depth + 1))
            }
            1 => {
                self.decisions += 1;
                let a = self.stmt(depth + 1);
                let b = self.stmt(depth + 1);
                format!("if (x < {k} && y != 0) {a} else {b}")
            }
            2 => {
                self.decisions += 1;
                format!("while (y < {k}) {{ y = y + 1; {} }}", self.stmt(depth + 1))
            }
            3 => {
                self.decisions += 1;
                self.loop_vars += 1;
                let v = format!("i{}", self.loop_vars);
                format!("for (int {v} = 0; {v} < {k}; {v}++) {}", self.stmt(depth + 1))
            }
            4 if room >= 2 => {
                // Two cases alone leave three outgoing edges; a default arm
                // replaces the fall-past edge, leaving two.
                let with_default = self.rng.gen_bool(0.5);
                self.decisions += if with_default { 1 } else { 2 };
                let a = self.stmt(depth + 1);
                let b = self.stmt(depth + 1);
                if with_default {
                    format!("switch (x) {{ case 1: {a} default: {b} }}")
                } else {
                    format!("switch (x) {{ case 1: {a} case 2: {b} }}")
                }
            }
            _ => {
                let n = self.rng.gen_range(1..4);
                let inner: Vec<String> = (0..n).map(|_| self.stmt(depth + 1)).collect();
                format!("{{ {} }}", inner.join(" "))
            }
        }
    }
}

pub fn generate_method(seed: u64) -> GeneratedMethod {
    let mut g = MethodGen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        decisions: 0,
        loop_vars: 0,
    };
    let n = g.rng.gen_range(1..5);
    let stmts: Vec<String> = (0..n).map(|_| g.stmt(0)).collect();
    GeneratedMethod {
        body: stmts.join("\n        "),
        binary_decisions: g.decisions,
    }
}

pub fn method_source(body: &str) -> String {
    format!("class G {{\n    static void m(int x, int y) {{\n        {body}\n    }}\n}}\n")
}

pub fn wrapped_in_try(body: &str) -> String {
    format!("try {{ {body} }} catch (Exception e) {{ println(\"caught\"); }}")
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

/// Runs every corpus program under each of its stdin scripts, with and
/// without assertions, and checks each coverage counter and line status
/// against totals recomputed from the CFGs. Returns the number of runs.
pub fn check_corpus_conservation() -> Result<usize, String> {
    let mut runs = 0;
    for name in corpus_files() {
        let u = parse_source(&corpus_source(&name), name.as_str()).map_err(|e| e.to_string())?;
        let cfgs = build_cfgs(&u);
        let instrs: Vec<_> = cfgs.iter().flat_map(|g| g.instructions()).collect();
        let lines: BTreeSet<u32> = instrs.iter().map(|i| i.span.line).collect();
        let branches: usize = cfgs.iter().flat_map(|g| &g.decisions).map(|d| d.kinds.len()).sum();
        let complexity: i64 = cfgs.iter().map(|g| complexity_bd(g).max(1)).sum();
        let expected = [
            (CounterKind::Instruction, instrs.len() as u64),
            (CounterKind::Branch, branches as u64),
            (CounterKind::Line, lines.len() as u64),
            (CounterKind::Method, cfgs.len() as u64),
            (CounterKind::Class, u.classes.len() as u64),
            (CounterKind::Complexity, complexity as u64),
        ];
        for script in stdin_scripts(&name) {
            for ea in [false, true] {
                let opts = RunOptions {
                    coverage_enabled: true,
                    assertions_enabled: ea,
                    stdin_script: script.clone(),
                    ..RunOptions::default()
                };
                let trace = match execute(&u, &opts) {
                    Ok(t) => t,
                    // Library files without an entry point.
                    Err(RunError::EntryNotFound(_)) => continue,
                    Err(e) => return Err(format!("{name}: {e}")),
                };
                runs += 1;
                let cov = coverage_summary(&trace, &u, &cfgs).map_err(|e| e.to_string())?;
                let exec = &trace.executed_instruction_ids;
                for (kind, total) in expected {
                    let c = cov.counter(kind);
                    ensure!(
                        c.covered + c.missed == total,
                        "{name} {script:?}: {kind:?} {} + {} != {total}",
                        c.covered,
                        c.missed
                    );
                }
                let hit = instrs.iter().filter(|i| exec.contains(&i.id)).count() as u64;
                ensure!(
                    cov.counter(CounterKind::Instruction).covered == hit,
                    "{name}: instruction hits disagree with the trace"
                );
                ensure!(
                    cov.lines.keys().copied().collect::<BTreeSet<_>>() == lines,
                    "{name}: line population differs from the CFG lines"
                );
                for (&line, &status) in &cov.lines {
                    let on_line: Vec<_> = instrs.iter().filter(|i| i.span.line == line).collect();
                    let n = on_line.iter().filter(|i| exec.contains(&i.id)).count();
                    let partial_decision = cov
                        .branches
                        .iter()
                        .any(|b| b.span.line == line && b.status == LineStatus::Partial);
                    let ok = match status {
                        LineStatus::NoCoverage => n == 0,
                        LineStatus::Full => n == on_line.len() && !partial_decision,
                        LineStatus::Partial => n > 0 && (n < on_line.len() || partial_decision),
                    };
                    ensure!(
                        ok,
                        "{name}:{line}: status {status:?} with {n}/{} executed",
                        on_line.len()
                    );
                }
            }
        }
    }
    Ok(runs)
}
