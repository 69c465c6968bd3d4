//! Cyclomatic complexity by edge/node count and by branch/decision count.

use super::build::ControlFlowGraph;

/// v(G) = E − N + 2.
pub fn complexity_en(cfg: &ControlFlowGraph) -> i64 {
    cfg.e() as i64 - cfg.n() as i64 + 2
}

/// v(G) = B − D + 1.
pub fn complexity_bd(cfg: &ControlFlowGraph) -> i64 {
    cfg.b() as i64 - cfg.d() as i64 + 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfg::build_cfg;
    use crate::frontend::parse_source;

    fn both(body: &str) -> (i64, i64) {
        let u = parse_source(&format!("class T {{ void m(int c) {{ {body} }} }}"), "t.sl").unwrap();
        let g = build_cfg("T", &u.classes[0].methods[0]);
        (complexity_en(&g), complexity_bd(&g))
    }

    #[test]
    fn formulas_agree() {
        assert_eq!(both(""), (1, 1));
        assert_eq!(both("c = 1;"), (1, 1));
        assert_eq!(both("if (c > 0) c = 1;"), (2, 2));
        assert_eq!(both("while (c > 0) { if (c == 3) return; c = c - 1; }"), (3, 3));
        assert_eq!(both("switch (c) { case 1: default: }"), (2, 2));
        assert_eq!(both("if (c > 0) return; else return; c = 1;"), (2, 2));
    }
}
