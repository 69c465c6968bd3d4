//! Control-flow graphs, cyclomatic complexity and reachability.

pub mod build;
pub mod complexity;
pub mod reach;

pub use build::{
    build_cfg, build_cfgs, BasicBlock, CfgEdge, ControlFlowGraph, Decision, EdgeKind, Instruction, ENTRY, EXIT,
};
pub use complexity::{complexity_bd, complexity_en};
pub use reach::{reachability, unreachable_nodes};
