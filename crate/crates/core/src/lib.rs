pub mod boundcheck;
pub mod cfg;
pub mod detectors;
pub mod frontend;
pub mod reporting;
pub mod runtime;
pub mod semantics;
