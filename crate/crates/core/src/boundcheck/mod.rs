//! Array bound checking.
//!
//! Works in three passes over a resolved unit: arrays and their references,
//! the variables used to index them, and the loops that drive those
//! variables. Each access gets an index interval from loop headers, constant
//! initializers and enclosing `if`/`while` guards; an access whose interval
//! is not provably inside `[0, N-1]` yields a finding.

mod analysis;
pub mod fuzz;
pub mod range;

use std::fmt;

use crate::frontend::{CompilationUnit, NodeId, SourceSpan};
use crate::semantics::{build_symbol_table, SymbolId, SymbolTable};

pub use analysis::{check_loops, find_arrays, track_index_vars};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ArraySize {
    Constant(i64),
    Variable { expr: String, symbol: Option<SymbolId> },
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrayRef {
    pub node: NodeId,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrayDecl {
    pub symbol: SymbolId,
    pub name: String,
    pub size: ArraySize,
    pub decl_span: SourceSpan,
    pub references: Vec<ArrayRef>,
}

impl ArrayDecl {
    pub fn constant_size(&self) -> Option<i64> {
        match self.size {
            ArraySize::Constant(n) => Some(n),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SiteKind {
    Assignment,
    /// Value read from input or received as a parameter.
    Input,
    /// Update computed from the variable's own value.
    Arithmetic,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModifyingSite {
    pub span: SourceSpan,
    pub kind: SiteKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexVarInfo {
    pub symbol: SymbolId,
    pub name: String,
    /// `(0, Some(N - 1))` for constant-size arrays, `(0, None)` otherwise.
    pub legal_range: (i64, Option<i64>),
    pub occurrences: Vec<SourceSpan>,
    pub modifying_sites: Vec<ModifyingSite>,
    /// Some access indexed by this variable is not shown to be in range.
    pub v_marked: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Comparison {
    Lt,
    Le,
    Gt,
    Ge,
}

impl Comparison {
    pub fn symbol(self) -> &'static str {
        match self {
            Comparison::Lt => "<",
            Comparison::Le => "<=",
            Comparison::Gt => ">",
            Comparison::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LoopLimit {
    Constant(i64),
    Variable(String),
    /// The loop condition does not bound the index.
    Missing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoopVerdict {
    Safe,
    OffByOne,
    MayExceed,
    UnvalidatedVariableLimit,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopLimitCheck {
    pub loop_span: SourceSpan,
    pub loop_stmt: NodeId,
    pub index_symbol: SymbolId,
    pub index_name: String,
    pub array: SymbolId,
    pub comparison: Option<Comparison>,
    pub limit: LoopLimit,
    pub verdict: LoopVerdict,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundFindingKind {
    IndexOutOfLegalRange,
    OffByOneLoop,
    UnvalidatedIndexSource,
    VariableLimitUnchecked,
    ZeroLengthPossible,
}

impl BoundFindingKind {
    pub const ALL: [BoundFindingKind; 5] = [
        BoundFindingKind::IndexOutOfLegalRange,
        BoundFindingKind::OffByOneLoop,
        BoundFindingKind::UnvalidatedIndexSource,
        BoundFindingKind::VariableLimitUnchecked,
        BoundFindingKind::ZeroLengthPossible,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundFindingKind::IndexOutOfLegalRange => "index_out_of_legal_range",
            BoundFindingKind::OffByOneLoop => "off_by_one_loop",
            BoundFindingKind::UnvalidatedIndexSource => "unvalidated_index_source",
            BoundFindingKind::VariableLimitUnchecked => "variable_limit_unchecked",
            BoundFindingKind::ZeroLengthPossible => "zero_length_possible",
        }
    }
}

impl fmt::Display for BoundFindingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundFinding {
    pub kind: BoundFindingKind,
    /// Span of the offending array reference.
    pub span: SourceSpan,
    pub array: SymbolId,
    pub array_name: String,
    pub reference: NodeId,
    pub detail: String,
}

pub fn run_bound_check(unit: &CompilationUnit) -> Vec<BoundFinding> {
    let table = build_symbol_table(unit);
    run_bound_check_with(unit, &table)
}

/// Findings sorted by file, line, kind and column.
pub fn run_bound_check_with(unit: &CompilationUnit, table: &SymbolTable) -> Vec<BoundFinding> {
    let mut findings = analysis::Analyzer::new(unit, table).findings();
    findings.sort_by(|a, b| {
        (a.span.file.as_str(), a.span.line, a.kind, a.span.column).cmp(&(
            b.span.file.as_str(),
            b.span.line,
            b.kind,
            b.span.column,
        ))
    });
    findings
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_source;

    fn unit(body: &str) -> CompilationUnit {
        parse_source(&format!("class T {{\n{body}\n}}"), "t.sl").unwrap()
    }

    fn kinds(body: &str) -> Vec<BoundFindingKind> {
        run_bound_check(&unit(body)).into_iter().map(|f| f.kind).collect()
    }

    fn verdicts(body: &str) -> Vec<LoopVerdict> {
        let u = unit(body);
        let t = build_symbol_table(&u);
        check_loops(&u, &t).into_iter().map(|c| c.verdict).collect()
    }

    #[test]
    fn arrays_and_references() {
        let u = unit("byte[] b; int size;\nT() { size = 25; b = new byte[size]; }\nstatic void m() { double[] vals = new double[10]; vals[0] = 1.0; vals[1] = vals[0]; }");
        let t = build_symbol_table(&u);
        let arrays = find_arrays(&u, &t);
        assert_eq!(arrays.len(), 2);
        assert_eq!(arrays[0].name, "b");
        assert!(matches!(&arrays[0].size, ArraySize::Variable { expr, .. } if expr == "size"));
        assert_eq!(arrays[1].size, ArraySize::Constant(10));
        assert_eq!(arrays[1].references.len(), 3);
        let empty = unit("void m() { int x = 1; }");
        assert!(find_arrays(&empty, &build_symbol_table(&empty)).is_empty());
    }

    #[test]
    fn loop_verdicts() {
        assert_eq!(
            verdicts("void m() { int[] a = new int[10]; for (int i = 0; i < 10; i++) { a[i] = i; } }"),
            vec![LoopVerdict::Safe]
        );
        assert_eq!(
            verdicts("void m() { int[] a = new int[10]; for (int i = 0; i <= 10; i++) { a[i] = i; } }"),
            vec![LoopVerdict::OffByOne]
        );
        assert_eq!(
            verdicts("void m() { int[] a = new int[10]; for (int i = 0; i < 12; i++) { a[i] = i; } }"),
            vec![LoopVerdict::MayExceed]
        );
        assert_eq!(
            verdicts("void m(int max) { int[] a = new int[10]; for (int i = 0; i < max; i++) { a[i] = i; } }"),
            vec![LoopVerdict::UnvalidatedVariableLimit]
        );
        assert_eq!(
            verdicts("void m(int max) { int[] a = new int[10]; if (max <= 10) { for (int i = 0; i < max; i++) { a[i] = i; } } }"),
            vec![LoopVerdict::Safe]
        );
        assert_eq!(
            verdicts("void m(int n) { int[] a = new int[n]; for (int i = 0; i < a.length; i++) { a[i] = i; } }"),
            vec![LoopVerdict::Safe]
        );
        assert_eq!(
            verdicts("void m() { int[] a = new int[8]; for (int i = 7; i >= 0; i--) { a[i] = i; } }"),
            vec![LoopVerdict::Safe]
        );
        assert_eq!(
            verdicts("void m() { int[] a = new int[8]; for (int i = a.length; i >= 0; i--) { a[i] = i; } }"),
            vec![LoopVerdict::MayExceed]
        );
    }

    #[test]
    fn field_sized_off_by_one() {
        let body = "byte[] b; int size;\nT() { size = 25; b = new byte[size]; }\nvoid test() {\nfor (int y = 1; y <= size; y++)\nif (toString(50) == toString(b[y])) println(b[y] + \"\");\n}";
        assert_eq!(verdicts(body), vec![LoopVerdict::OffByOne]);
        let found = run_bound_check(&unit(body));
        assert_eq!(found.len(), 2);
        assert!(found
            .iter()
            .all(|f| f.kind == BoundFindingKind::OffByOneLoop && f.array_name == "b"));
    }

    #[test]
    fn unbounded_while_index() {
        let body = "static void main() {\nint newvals = 0;\ndouble[] vals = new double[10];\nwhile (readLine() != null) {\nString str = readLine();\nvals[newvals] = parseDouble(str.trim());\nnewvals++;\n}\n}";
        let found = run_bound_check(&unit(body));
        let k: Vec<_> = found.iter().map(|f| (f.kind, f.span.line)).collect();
        assert_eq!(
            k,
            vec![
                (BoundFindingKind::UnvalidatedIndexSource, 7),
                (BoundFindingKind::VariableLimitUnchecked, 7)
            ]
        );
        let u = unit(body);
        let t = build_symbol_table(&u);
        let vars = track_index_vars(&u, &t);
        assert_eq!(vars.len(), 1);
        assert_eq!(vars[0].name, "newvals");
        assert_eq!(vars[0].legal_range, (0, Some(9)));
        assert!(vars[0].v_marked);
        assert_eq!(vars[0].modifying_sites.len(), 1);
        assert_eq!(vars[0].modifying_sites[0].kind, SiteKind::Arithmetic);
    }

    #[test]
    fn input_index_is_circled_and_marked() {
        let u = unit("static void main() { int[] a = new int[4]; int i = parseInt(readLine()); a[i] = 1; }");
        let t = build_symbol_table(&u);
        let vars = track_index_vars(&u, &t);
        assert_eq!(vars[0].modifying_sites[0].kind, SiteKind::Input);
        assert!(vars[0].v_marked);
        assert_eq!(
            run_bound_check(&u).iter().map(|f| f.kind).collect::<Vec<_>>(),
            vec![BoundFindingKind::UnvalidatedIndexSource]
        );
    }

    #[test]
    fn guard_removes_unvalidated_finding() {
        let bare = "static void main() { int[] a = new int[4]; int i = parseInt(readLine()); a[i] = 1; }";
        let guarded = "static void main() { int[] a = new int[4]; int i = parseInt(readLine()); if (i >= 0 && i < 4) { a[i] = 1; } }";
        let reversed = "static void main() { int[] a = new int[4]; int i = parseInt(readLine()); if (0 <= i && a.length > i) a[i] = 1; }";
        assert_eq!(kinds(bare).len(), 1);
        assert!(kinds(guarded).is_empty());
        assert!(kinds(reversed).is_empty());
    }

    #[test]
    fn constant_indices() {
        assert!(kinds("void m() { int[] a = new int[3]; a[0] = 1; a[2] = 1; }").is_empty());
        assert_eq!(
            kinds("void m() { int[] a = new int[3]; a[3] = 1; a[-1] = 2; }"),
            vec![BoundFindingKind::IndexOutOfLegalRange; 2]
        );
        let u = unit("void m() { int[] a = new int[3]; a[2] = 1; }");
        let t = build_symbol_table(&u);
        assert!(track_index_vars(&u, &t).is_empty());
    }

    #[test]
    fn variable_size_may_be_zero() {
        let found = kinds("void m(int n) { int[] a = new int[n]; a[0] = 1; a[1] = 1; }");
        assert_eq!(
            found
                .iter()
                .filter(|k| **k == BoundFindingKind::ZeroLengthPossible)
                .count(),
            1
        );
        assert!(kinds("void m(int n) { int[] a = new int[n]; if (0 < a.length) a[0] = 1; }").is_empty());
    }

    #[test]
    fn offsets_inside_safe_loops() {
        assert_eq!(
            kinds("void m() { int[] a = new int[5]; for (int i = 0; i < 5; i++) { a[i + 1] = i; } }"),
            vec![BoundFindingKind::IndexOutOfLegalRange]
        );
        assert!(kinds("void m() { int[] a = new int[5]; for (int i = 1; i < 5; i++) { a[i - 1] = i; } }").is_empty());
        assert!(
            kinds("void m() { int[] a = new int[5]; for (int i = 0; i <= 5; i++) { if (i < 5) a[i] = i; } }")
                .is_empty()
        );
    }

    #[test]
    fn while_condition_holds_before_update() {
        assert!(kinds("void m() { int[] a = new int[5]; int i = 0; while (i < 5) { a[i] = 1; i++; } }").is_empty());
        assert_eq!(
            kinds("void m() { int[] a = new int[5]; int i = 0; while (i < 5) { i++; a[i] = 1; } }").len(),
            1
        );
    }

    #[test]
    fn findings_are_deterministic_and_sorted() {
        let body = "void m(int n) { int[] a = new int[4]; a[n] = 1; a[9] = 2; for (int i = 0; i <= 4; i++) a[i] = 0; }";
        let u = unit(body);
        let first = run_bound_check(&u);
        assert_eq!(first, run_bound_check(&u));
        let lines: Vec<_> = first.iter().map(|f| (f.span.line, f.kind)).collect();
        let mut sorted = lines.clone();
        sorted.sort();
        assert_eq!(lines, sorted);
    }
}
