//! Report assembly and rendering, review annotations, and the rate and
//! percentage arithmetic shown in the tables.

mod annotate;
mod emit;
mod metrics;

use std::collections::BTreeMap;

use chrono::NaiveDateTime;

use crate::boundcheck::BoundFinding;
use crate::detectors::{Category, Finding};
use crate::frontend::{tokenize, FileName, TokenKind};
use crate::runtime::{CoverageCounter, CoverageReport, LineStatus};

pub use annotate::{
    annotate_source, format_review_time, is_reviewed, parse_review_time, ReviewAnnotation, REVIEW_MARKER,
};
pub use emit::{emit_report, render, Format};
pub use metrics::{ComplexityRow, ComplexitySummary, MethodComplexity, MetricsInput, RowLevel};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("line {line} is outside the source ({lines} lines)")]
    SpanOutOfRange { line: u32, lines: usize },
    #[error("cannot write report: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Per100,
    Per1000,
}

impl Scale {
    fn factor(self) -> u64 {
        match self {
            Scale::Per100 => 100,
            Scale::Per1000 => 1000,
        }
    }
}

/// `num / den` in tenths, rounded half up.
fn tenths(num: u64, den: u64) -> f64 {
    let t = (20 * num + den) / (2 * den);
    t as f64 / 10.0
}

/// `100 * covered / (covered + missed)` to one decimal, rounded half up.
pub fn coverage_percent(covered: u64, missed: u64) -> Result<f64, ReportError> {
    let total = covered + missed;
    if total == 0 {
        return Err(ReportError::Domain("coverage of an empty population".into()));
    }
    Ok(tenths(100 * covered, total))
}

/// Warnings per 100 or per 1000 lines of code, to one decimal.
pub fn efficiency_rate(warnings: u64, loc: u64, scale: Scale) -> Result<f64, ReportError> {
    if loc == 0 {
        return Err(ReportError::Domain("efficiency rate over zero lines of code".into()));
    }
    Ok(tenths(warnings * scale.factor(), loc))
}

/// Lines holding at least one token other than a comment.
pub fn count_loc(source: &str) -> usize {
    let Ok(tokens) = tokenize(source, &FileName::new("loc")) else {
        return source.lines().filter(|l| !l.trim().is_empty()).count();
    };
    let mut lines: Vec<u32> = tokens
        .iter()
        .filter(|t| t.kind != TokenKind::Comment)
        .map(|t| t.span.line)
        .collect();
    lines.dedup();
    lines.len()
}

/// Line statuses of one covered file.
#[derive(Clone, Debug, PartialEq)]
pub struct FileCoverage {
    pub file: String,
    pub lines: BTreeMap<u32, LineStatus>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub tool_version: String,
    pub generated_at: NaiveDateTime,
    pub findings: Vec<Finding>,
    pub bound_findings: Vec<BoundFinding>,
    pub coverage: Vec<CoverageCounter>,
    pub line_coverage: Vec<FileCoverage>,
    pub metrics: ComplexitySummary,
    pub category_summary: BTreeMap<Category, usize>,
}

impl Report {
    pub fn new(findings: Vec<Finding>, generated_at: NaiveDateTime) -> Report {
        let mut category_summary = BTreeMap::new();
        for f in &findings {
            *category_summary.entry(f.category).or_insert(0) += 1;
        }
        Report {
            tool_version: TOOL_VERSION.to_string(),
            generated_at,
            findings,
            bound_findings: Vec::new(),
            coverage: Vec::new(),
            line_coverage: Vec::new(),
            metrics: ComplexitySummary::default(),
            category_summary,
        }
    }

    pub fn with_bound_findings(mut self, bound: Vec<BoundFinding>) -> Report {
        self.bound_findings = bound;
        self
    }

    pub fn with_metrics(mut self, metrics: ComplexitySummary) -> Report {
        self.metrics = metrics;
        self
    }

    /// Adds a file's run coverage; counters accumulate across files.
    pub fn add_coverage(&mut self, file: &str, cov: &CoverageReport) {
        for c in &cov.counters {
            match self.coverage.iter_mut().find(|x| x.kind == c.kind) {
                Some(x) => {
                    x.covered += c.covered;
                    x.missed += c.missed;
                }
                None => self.coverage.push(*c),
            }
        }
        self.line_coverage.push(FileCoverage {
            file: file.to_string(),
            lines: cov.lines.clone(),
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coverage_percent_matches_table_rows() {
        assert_eq!(coverage_percent(11, 1).unwrap(), 91.7);
        assert_eq!(coverage_percent(1, 1).unwrap(), 50.0);
        assert_eq!(coverage_percent(11, 3).unwrap(), 78.6);
        assert_eq!(coverage_percent(0, 2).unwrap(), 0.0);
        assert_eq!(coverage_percent(5, 0).unwrap(), 100.0);
        assert!(coverage_percent(0, 0).is_err());
    }

    #[test]
    fn rounding_is_half_up() {
        // 1/8 = 12.5 %, 1/16 = 6.25 % -> 6.3
        assert_eq!(coverage_percent(1, 7).unwrap(), 12.5);
        assert_eq!(coverage_percent(1, 15).unwrap(), 6.3);
        assert_eq!(coverage_percent(2, 1).unwrap(), 66.7);
    }

    #[test]
    fn efficiency_rates() {
        assert_eq!(efficiency_rate(424, 1000, Scale::Per100).unwrap(), 42.4);
        assert_eq!(efficiency_rate(17, 26, Scale::Per1000).unwrap(), 653.8);
        assert_eq!(efficiency_rate(4, 26, Scale::Per1000).unwrap(), 153.8);
        assert_eq!(efficiency_rate(1, 26, Scale::Per1000).unwrap(), 38.5);
        assert_eq!(efficiency_rate(5, 26, Scale::Per1000).unwrap(), 192.3);
        assert_eq!(efficiency_rate(2, 26, Scale::Per1000).unwrap(), 76.9);
        assert_eq!(efficiency_rate(0, 500, Scale::Per100).unwrap(), 0.0);
        assert!(efficiency_rate(3, 0, Scale::Per100).is_err());
    }

    #[test]
    fn loc_skips_blank_and_comment_lines() {
        let src = "// header\nclass A {\n\n    /* note\n       more */\n    int x;\n}\n";
        assert_eq!(count_loc(src), 3);
        assert_eq!(count_loc(""), 0);
    }

    #[test]
    fn category_summary_counts() {
        use crate::detectors::{analyze_unit, RuleSet};
        let u = crate::frontend::parse_source("class A { void m() { int z; println(1); } }", "a.sl").unwrap();
        let f = analyze_unit(&u, &RuleSet::default());
        let n = f.len();
        let r = Report::new(f, NaiveDateTime::default());
        assert_eq!(r.category_summary.values().sum::<usize>(), n);
    }
}
