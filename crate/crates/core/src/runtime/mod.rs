//! Interpreter, coverage accounting and the overflow demonstrations.

pub mod coverage;
pub mod interp;
pub mod lab;
pub mod value;

pub use coverage::{
    coverage_summary, BranchCoverage, CounterKind, CoverageCounter, CoverageError, CoverageReport, ElementCoverage,
    LineStatus,
};
pub use interp::{
    execute, execute_with, AssertionOutcome, AssertionRecord, Fault, FaultKind, RunError, RunOptions, RunTrace,
};
pub use lab::{add_wrapped, stack_overwrite_demo, DomainError, StackFrameDemo, StackOutcome};
