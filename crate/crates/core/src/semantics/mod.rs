//! Symbol tables, typing and the call graph.

pub mod callgraph;
pub mod symbols;
pub mod types;

pub use callgraph::{build_call_graph, CallGraph, CallGraphEdge, CallGraphNode};
pub use symbols::{build_symbol_table, Callee, SemanticError, Symbol, SymbolId, SymbolKind, SymbolTable};
pub use types::Type;
