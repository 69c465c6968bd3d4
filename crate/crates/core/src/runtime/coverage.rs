//! Coverage counters computed from a run trace and the unit's CFGs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::cfg::{complexity_bd, ControlFlowGraph};
use crate::frontend::{CompilationUnit, NodeId, SourceSpan};

use super::interp::RunTrace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CounterKind {
    Instruction,
    Branch,
    Line,
    Method,
    Class,
    Complexity,
}

impl CounterKind {
    pub const ALL: [CounterKind; 6] = [
        CounterKind::Instruction,
        CounterKind::Branch,
        CounterKind::Line,
        CounterKind::Method,
        CounterKind::Class,
        CounterKind::Complexity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CounterKind::Instruction => "instruction",
            CounterKind::Branch => "branch",
            CounterKind::Line => "line",
            CounterKind::Method => "method",
            CounterKind::Class => "class",
            CounterKind::Complexity => "complexity",
        }
    }
}

impl fmt::Display for CounterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoverageCounter {
    pub kind: CounterKind,
    pub covered: u64,
    pub missed: u64,
}

impl CoverageCounter {
    pub fn total(&self) -> u64 {
        self.covered + self.missed
    }
}

/// Status of a line or of a decision's branches: red, yellow or green.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LineStatus {
    NoCoverage,
    Partial,
    Full,
}

impl LineStatus {
    fn from_counts(hit: usize, total: usize) -> LineStatus {
        if hit == 0 {
            LineStatus::NoCoverage
        } else if hit == total {
            LineStatus::Full
        } else {
            LineStatus::Partial
        }
    }

    pub fn color(self) -> &'static str {
        match self {
            LineStatus::NoCoverage => "red",
            LineStatus::Partial => "yellow",
            LineStatus::Full => "green",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BranchCoverage {
    pub decision: NodeId,
    pub span: SourceSpan,
    pub taken: usize,
    pub total: usize,
    pub status: LineStatus,
}

/// One row of the per-element table: a class or a method.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementCoverage {
    pub element: String,
    pub instructions_covered: u64,
    pub instructions_missed: u64,
    pub covered_complexity: u64,
    pub missed_complexity: u64,
}

impl ElementCoverage {
    pub fn total_complexity(&self) -> u64 {
        self.covered_complexity + self.missed_complexity
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoverageReport {
    pub counters: Vec<CoverageCounter>,
    /// Lines that carry at least one instruction.
    pub lines: BTreeMap<u32, LineStatus>,
    pub branches: Vec<BranchCoverage>,
    /// Classes followed by their methods, in declaration order.
    pub elements: Vec<ElementCoverage>,
}

impl CoverageReport {
    pub fn counter(&self, kind: CounterKind) -> CoverageCounter {
        self.counters
            .iter()
            .copied()
            .find(|c| c.kind == kind)
            .unwrap_or(CoverageCounter {
                kind,
                covered: 0,
                missed: 0,
            })
    }

    pub fn element(&self, name: &str) -> Option<&ElementCoverage> {
        self.elements.iter().find(|e| e.element == name)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoverageError {
    #[error("coverage unavailable: run was not traced")]
    CoverageUnavailable,
}

struct MethodCoverage {
    covered: bool,
    instructions: (u64, u64),
    complexity: (u64, u64),
}

pub fn coverage_summary(
    trace: &RunTrace,
    unit: &CompilationUnit,
    cfgs: &[ControlFlowGraph],
) -> Result<CoverageReport, CoverageError> {
    if !trace.coverage_enabled {
        return Err(CoverageError::CoverageUnavailable);
    }
    let executed = &trace.executed_instruction_ids;
    let taken = |d: NodeId, k| trace.branch_outcomes.get(&(d, k)).is_some_and(|&n| n > 0);

    let mut line_hits: BTreeMap<u32, (usize, usize)> = BTreeMap::new();
    for g in cfgs {
        for i in g.instructions() {
            let e = line_hits.entry(i.span.line).or_default();
            e.1 += 1;
            if executed.contains(&i.id) {
                e.0 += 1;
            }
        }
    }

    let mut branches = Vec::new();
    let mut partial_decision_lines = BTreeSet::new();
    for g in cfgs {
        for d in &g.decisions {
            let hit = d.kinds.iter().filter(|&&k| taken(d.stmt, k)).count();
            let status = LineStatus::from_counts(hit, d.kinds.len());
            if status == LineStatus::Partial {
                partial_decision_lines.insert(d.span.line);
            }
            branches.push(BranchCoverage {
                decision: d.stmt,
                span: d.span.clone(),
                taken: hit,
                total: d.kinds.len(),
                status,
            });
        }
    }

    let lines: BTreeMap<u32, LineStatus> = line_hits
        .iter()
        .map(|(&line, &(hit, total))| {
            let mut status = LineStatus::from_counts(hit, total);
            if status == LineStatus::Full && partial_decision_lines.contains(&line) {
                status = LineStatus::Partial;
            }
            (line, status)
        })
        .collect();

    let mut per_method = BTreeMap::new();
    for g in cfgs {
        let ids: Vec<NodeId> = g.instructions().map(|i| i.id).collect();
        let hit = ids.iter().filter(|id| executed.contains(id)).count() as u64;
        let covered = hit > 0 || trace.entered_methods.contains(&g.method);
        let total = complexity_bd(g).max(1) as u64;
        let cov = if covered {
            let extra: usize = g
                .decisions
                .iter()
                .map(|d| d.kinds.iter().filter(|&&k| taken(d.stmt, k)).count())
                .filter(|&n| n > 0)
                .map(|n| n - 1)
                .sum();
            (1 + extra as u64).min(total)
        } else {
            0
        };
        per_method.insert(
            g.method_decl,
            MethodCoverage {
                covered,
                instructions: (hit, ids.len() as u64 - hit),
                complexity: (cov, total - cov),
            },
        );
    }

    let mut counters: BTreeMap<CounterKind, (u64, u64)> = CounterKind::ALL.iter().map(|&k| (k, (0, 0))).collect();
    let mut add = |k: CounterKind, c: u64, m: u64| {
        let e = counters.get_mut(&k).expect("all kinds present");
        e.0 += c;
        e.1 += m;
    };
    let mut elements = Vec::new();
    for class in &unit.classes {
        let mut rows = Vec::new();
        let mut any = false;
        let mut sums = (0, 0, 0, 0);
        for m in &class.methods {
            let Some(mc) = per_method.get(&m.id) else {
                continue;
            };
            any |= mc.covered;
            add(CounterKind::Method, u64::from(mc.covered), u64::from(!mc.covered));
            add(CounterKind::Instruction, mc.instructions.0, mc.instructions.1);
            add(CounterKind::Complexity, mc.complexity.0, mc.complexity.1);
            sums.0 += mc.instructions.0;
            sums.1 += mc.instructions.1;
            sums.2 += mc.complexity.0;
            sums.3 += mc.complexity.1;
            rows.push(ElementCoverage {
                element: format!("{}.{}/{}", class.name, m.name, m.params.len()),
                instructions_covered: mc.instructions.0,
                instructions_missed: mc.instructions.1,
                covered_complexity: mc.complexity.0,
                missed_complexity: mc.complexity.1,
            });
        }
        add(CounterKind::Class, u64::from(any), u64::from(!any));
        elements.push(ElementCoverage {
            element: class.name.clone(),
            instructions_covered: sums.0,
            instructions_missed: sums.1,
            covered_complexity: sums.2,
            missed_complexity: sums.3,
        });
        elements.extend(rows);
    }
    let branch_hit: usize = branches.iter().map(|b| b.taken).sum();
    let branch_total: usize = branches.iter().map(|b| b.total).sum();
    add(
        CounterKind::Branch,
        branch_hit as u64,
        (branch_total - branch_hit) as u64,
    );
    let lines_hit = line_hits.values().filter(|(h, _)| *h > 0).count() as u64;
    add(CounterKind::Line, lines_hit, line_hits.len() as u64 - lines_hit);

    Ok(CoverageReport {
        counters: counters
            .into_iter()
            .map(|(kind, (covered, missed))| CoverageCounter { kind, covered, missed })
            .collect(),
        lines,
        branches,
        elements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfg::build_cfgs;
    use crate::frontend::parse_source;
    use crate::runtime::{execute, RunOptions};

    fn report(src: &str, files: &[&str]) -> CoverageReport {
        let u = parse_source(src, "t.sl").unwrap();
        let opts = RunOptions {
            coverage_enabled: true,
            file_system_stub: files.iter().map(|f| (f.to_string(), String::new())).collect(),
            ..RunOptions::default()
        };
        let trace = execute(&u, &opts).unwrap();
        coverage_summary(&trace, &u, &build_cfgs(&u)).unwrap()
    }

    #[test]
    fn straight_line_fully_covered() {
        let r = report("class T { static void main() { int a = 1;\n println(a); } }", &[]);
        for c in &r.counters {
            assert_eq!(c.missed, 0, "{c:?}");
        }
        assert!(r.lines.values().all(|s| *s == LineStatus::Full));
    }

    #[test]
    fn missed_branch_is_partial() {
        let src = "class W {\n static void main() {\n String path = \"a.xls\";\n if (!exists(path)) {\n println(\"missing\");\n }\n println(\"done\");\n }\n}";
        let r = report(src, &["a.xls"]);
        assert_eq!(r.lines[&4], LineStatus::Partial);
        assert_eq!(r.lines[&5], LineStatus::NoCoverage);
        assert_eq!(r.branches[0].status, LineStatus::Partial);
        let b = r.counter(CounterKind::Branch);
        assert_eq!((b.covered, b.missed), (1, 1));
        let main = r.element("W.main/0").unwrap();
        assert_eq!((main.covered_complexity, main.missed_complexity), (1, 1));
    }

    #[test]
    fn uncalled_method_keeps_class_covered() {
        let r = report(
            "class T { static void main() { println(1); } void unused() { println(2); } }",
            &[],
        );
        let m = r.counter(CounterKind::Method);
        assert_eq!((m.covered, m.missed), (1, 1));
        let c = r.counter(CounterKind::Class);
        assert_eq!((c.covered, c.missed), (1, 0));
    }

    #[test]
    fn untraced_run_is_rejected() {
        let u = parse_source("class T { static void main() { } }", "t.sl").unwrap();
        let trace = execute(&u, &RunOptions::default()).unwrap();
        assert_eq!(
            coverage_summary(&trace, &u, &build_cfgs(&u)),
            Err(CoverageError::CoverageUnavailable)
        );
    }
}
