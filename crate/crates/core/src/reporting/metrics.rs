use std::collections::BTreeMap;

use crate::cfg::{complexity_bd, ControlFlowGraph};
use crate::frontend::CompilationUnit;
use crate::runtime::CoverageReport;

use super::coverage_percent;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum RowLevel {
    Project,
    Package,
    File,
    Class,
    Method,
}

impl RowLevel {
    pub fn as_str(self) -> &'static str {
        match self {
            RowLevel::Project => "project",
            RowLevel::Package => "package",
            RowLevel::File => "file",
            RowLevel::Class => "class",
            RowLevel::Method => "method",
        }
    }

    fn depth(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexityRow {
    pub level: RowLevel,
    pub element: String,
    /// `None` when the element has no complexity to cover.
    pub coverage_pct: Option<f64>,
    pub covered_complexity: u64,
    pub missed_complexity: u64,
}

impl ComplexityRow {
    pub fn total_complexity(&self) -> u64 {
        self.covered_complexity + self.missed_complexity
    }

    fn new(level: RowLevel, element: String, covered: u64, missed: u64) -> ComplexityRow {
        ComplexityRow {
            level,
            element,
            coverage_pct: coverage_percent(covered, missed).ok(),
            covered_complexity: covered,
            missed_complexity: missed,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MethodComplexity {
    pub file: String,
    pub class: String,
    /// `name(params)`.
    pub signature: String,
    pub v: u64,
}

/// One file's contribution: its unit, CFGs, and coverage if it was run.
pub struct MetricsInput<'a> {
    pub unit: &'a CompilationUnit,
    pub cfgs: &'a [ControlFlowGraph],
    pub coverage: Option<&'a CoverageReport>,
}

/// Per-method cyclomatic complexity and a project / package / file /
/// class / method table of covered and missed complexity.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ComplexitySummary {
    pub methods: Vec<MethodComplexity>,
    pub rows: Vec<ComplexityRow>,
}

impl ComplexitySummary {
    pub fn build(project: &str, inputs: &[MetricsInput<'_>]) -> ComplexitySummary {
        let mut methods = Vec::new();
        let mut packages: BTreeMap<String, Vec<Vec<ComplexityRow>>> = BTreeMap::new();

        for input in inputs {
            let unit = input.unit;
            let file = unit.file.as_str().to_string();
            let mut file_rows = Vec::new();
            let (mut fc, mut fm) = (0, 0);
            for class in &unit.classes {
                let mut class_rows = Vec::new();
                let (mut cc, mut cm) = (0, 0);
                for m in &class.methods {
                    let Some(g) = input.cfgs.iter().find(|g| g.method_decl == m.id) else {
                        continue;
                    };
                    let v = complexity_bd(g).max(1) as u64;
                    let key = format!("{}.{}/{}", class.name, m.name, m.params.len());
                    let (c, miss) = match input.coverage.and_then(|r| r.element(&key)) {
                        Some(e) => (e.covered_complexity, e.missed_complexity),
                        None => (0, v),
                    };
                    methods.push(MethodComplexity {
                        file: file.clone(),
                        class: class.name.clone(),
                        signature: m.signature(),
                        v,
                    });
                    class_rows.push(ComplexityRow::new(RowLevel::Method, m.signature(), c, miss));
                    cc += c;
                    cm += miss;
                }
                file_rows.push(ComplexityRow::new(RowLevel::Class, class.name.clone(), cc, cm));
                file_rows.extend(class_rows);
                fc += cc;
                fm += cm;
            }
            let mut rows = vec![ComplexityRow::new(RowLevel::File, file, fc, fm)];
            rows.extend(file_rows);
            let package = unit.package.clone().unwrap_or_else(|| "(default package)".to_string());
            packages.entry(package).or_default().push(rows);
        }

        let mut rows = Vec::new();
        let (mut pc, mut pm) = (0, 0);
        for (package, files) in packages {
            let (c, m) = files.iter().fold((0, 0), |(c, m), f| {
                (c + f[0].covered_complexity, m + f[0].missed_complexity)
            });
            rows.push(ComplexityRow::new(RowLevel::Package, package, c, m));
            rows.extend(files.into_iter().flatten());
            pc += c;
            pm += m;
        }
        rows.insert(0, ComplexityRow::new(RowLevel::Project, project.to_string(), pc, pm));
        ComplexitySummary { methods, rows }
    }

    pub fn row(&self, level: RowLevel, element: &str) -> Option<&ComplexityRow> {
        self.rows.iter().find(|r| r.level == level && r.element == element)
    }

    /// Indented text table: element, coverage, covered, missed, total.
    pub fn to_table(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|r| r.element.len() + 2 * r.level.depth())
            .max()
            .unwrap_or(7)
            .max(7);
        let mut out = format!(
            "{:<width$}  {:>9}  {:>7}  {:>6}  {:>5}\n",
            "Element", "Coverage", "Covered", "Missed", "Total"
        );
        for r in &self.rows {
            let name = format!("{}{}", "  ".repeat(r.level.depth()), r.element);
            let pct = r
                .coverage_pct
                .map_or_else(|| "n/a".to_string(), |p| format!("{p:.1} %"));
            out.push_str(&format!(
                "{:<width$}  {:>9}  {:>7}  {:>6}  {:>5}\n",
                name,
                pct,
                r.covered_complexity,
                r.missed_complexity,
                r.total_complexity()
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfg::build_cfgs;
    use crate::frontend::parse_source;

    #[test]
    fn unrun_code_is_all_missed() {
        let u = parse_source(
            "package p; class A { void f(int x) { if (x > 0) x = 1; } void g() {} }",
            "a.sl",
        )
        .unwrap();
        let cfgs = build_cfgs(&u);
        let s = ComplexitySummary::build(
            "proj",
            &[MetricsInput {
                unit: &u,
                cfgs: &cfgs,
                coverage: None,
            }],
        );
        let levels: Vec<RowLevel> = s.rows.iter().map(|r| r.level).collect();
        assert_eq!(
            levels,
            [
                RowLevel::Project,
                RowLevel::Package,
                RowLevel::File,
                RowLevel::Class,
                RowLevel::Method,
                RowLevel::Method
            ]
        );
        let project = &s.rows[0];
        assert_eq!((project.covered_complexity, project.missed_complexity), (0, 3));
        assert_eq!(project.coverage_pct, Some(0.0));
        assert_eq!(s.row(RowLevel::Method, "f(int)").unwrap().total_complexity(), 2);
        assert_eq!(s.methods.iter().map(|m| m.v).sum::<u64>(), 3);
    }

    #[test]
    fn rollups_sum_children() {
        let a = parse_source("package p; class A { void f(int x) { while (x > 0) x--; } }", "a.sl").unwrap();
        let b = parse_source("class B { void g() {} }", "b.sl").unwrap();
        let (ca, cb) = (build_cfgs(&a), build_cfgs(&b));
        let s = ComplexitySummary::build(
            "proj",
            &[
                MetricsInput {
                    unit: &a,
                    cfgs: &ca,
                    coverage: None,
                },
                MetricsInput {
                    unit: &b,
                    cfgs: &cb,
                    coverage: None,
                },
            ],
        );
        let pkgs: u64 = s
            .rows
            .iter()
            .filter(|r| r.level == RowLevel::Package)
            .map(|r| r.total_complexity())
            .sum();
        assert_eq!(pkgs, s.rows[0].total_complexity());
        assert!(s.to_table().contains("(default package)"));
    }
}
