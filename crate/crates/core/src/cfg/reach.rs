//! Reachability closure and dead-block detection.

use super::build::{ControlFlowGraph, ENTRY};

/// `m[i][j]` is true when block `j` can be reached from block `i`; handler
/// edges count. The diagonal is true.
pub fn reachability(cfg: &ControlFlowGraph) -> Vec<Vec<bool>> {
    let n = cfg.n();
    let mut m = vec![vec![false; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = true;
    }
    for e in &cfg.edges {
        m[e.from][e.to] = true;
    }
    for &(from, to) in &cfg.handler_edges {
        m[from][to] = true;
    }
    for k in 0..n {
        let via = m[k].clone();
        for row in m.iter_mut() {
            if row[k] {
                for (cell, &r) in row.iter_mut().zip(&via) {
                    *cell |= r;
                }
            }
        }
    }
    m
}

/// Blocks other than the entry that the entry cannot reach.
pub fn unreachable_nodes(cfg: &ControlFlowGraph, closure: &[Vec<bool>]) -> Vec<usize> {
    (0..cfg.n()).filter(|&b| b != ENTRY && !closure[ENTRY][b]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfg::build_cfg;
    use crate::frontend::parse_source;

    fn cfg(body: &str) -> ControlFlowGraph {
        let u = parse_source(&format!("class T {{ void m(int c) {{ {body} }} }}"), "t.sl").unwrap();
        build_cfg("T", &u.classes[0].methods[0])
    }

    #[test]
    fn chain_is_all_reachable() {
        let g = cfg("c = 1;");
        assert_eq!(g.n(), 3);
        let m = reachability(&g);
        assert!(m[ENTRY].iter().all(|&x| x));
        assert!(unreachable_nodes(&g, &m).is_empty());
    }

    #[test]
    fn code_after_return_is_dead() {
        let g = cfg("return; c = 1;");
        let m = reachability(&g);
        let dead = unreachable_nodes(&g, &m);
        assert_eq!(dead.len(), 1);
        let instrs = &g.blocks[dead[0]].instructions;
        assert_eq!(instrs.len(), 1);
        assert_eq!(instrs[0].span.column, 35);
    }

    #[test]
    fn constant_false_loop_body_is_dead() {
        let g = cfg("while (false) { c = 1; }");
        let m = reachability(&g);
        let dead = unreachable_nodes(&g, &m);
        assert!(dead.iter().any(|&b| !g.blocks[b].instructions.is_empty()));
    }

    #[test]
    fn catch_blocks_reachable_through_handlers() {
        let g = cfg("try { c = 1; } catch (Exception e) { c = 2; }");
        let m = reachability(&g);
        assert!(unreachable_nodes(&g, &m).is_empty());
    }
}
