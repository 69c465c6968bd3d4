//! Per-method control-flow graphs over basic blocks.
//!
//! Blocks 0 and 1 are the empty entry and exit blocks. Each statement
//! contributes one instruction, identified by the statement's node id; the
//! instruction of an `if`/`while`/`for`/`switch` stands for evaluating its
//! condition. A `for` update is an instruction identified by the update
//! expression, and each catch clause starts with an instruction carrying the
//! clause id.
//!
//! Exception flow is kept out of the edge list: the block that enters a `try`
//! reaches its handlers through `handler_edges`, which reachability follows
//! but complexity ignores.

use crate::frontend::*;

pub const ENTRY: usize = 0;
pub const EXIT: usize = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeKind {
    Fallthrough,
    TrueBranch,
    FalseBranch,
    SwitchCase(usize),
    LoopBack,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instruction {
    pub id: NodeId,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct BasicBlock {
    pub instructions: Vec<Instruction>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CfgEdge {
    pub from: usize,
    pub to: usize,
    pub kind: EdgeKind,
}

/// A branching statement whose block has two or more successors.
#[derive(Clone, Debug, PartialEq)]
pub struct Decision {
    pub stmt: NodeId,
    pub block: usize,
    pub span: SourceSpan,
    pub kinds: Vec<EdgeKind>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ControlFlowGraph {
    /// `Class.method/arity`.
    pub method: String,
    pub class: String,
    pub method_decl: NodeId,
    pub blocks: Vec<BasicBlock>,
    pub edges: Vec<CfgEdge>,
    pub handler_edges: Vec<(usize, usize)>,
    pub decisions: Vec<Decision>,
}

impl ControlFlowGraph {
    pub fn e(&self) -> usize {
        self.edges.len()
    }

    pub fn n(&self) -> usize {
        self.blocks.len()
    }

    pub fn out_degree(&self, block: usize) -> usize {
        self.edges.iter().filter(|e| e.from == block).count()
    }

    /// Blocks with two or more outgoing edges.
    pub fn d(&self) -> usize {
        (0..self.n()).filter(|&b| self.out_degree(b) >= 2).count()
    }

    /// Outgoing edges of decision blocks.
    pub fn b(&self) -> usize {
        (0..self.n()).map(|b| self.out_degree(b)).filter(|&d| d >= 2).sum()
    }

    pub fn successors(&self, block: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter(move |e| e.from == block).map(|e| e.to)
    }

    pub fn instructions(&self) -> impl Iterator<Item = &Instruction> {
        self.blocks.iter().flat_map(|b| b.instructions.iter())
    }

    pub fn block_of(&self, instr: NodeId) -> Option<usize> {
        self.blocks
            .iter()
            .position(|b| b.instructions.iter().any(|i| i.id == instr))
    }
}

pub fn build_cfg(class: &str, method: &MethodDecl) -> ControlFlowGraph {
    let mut b = Builder {
        g: ControlFlowGraph {
            method: format!("{class}.{}/{}", method.name, method.params.len()),
            class: class.to_string(),
            method_decl: method.id,
            blocks: vec![BasicBlock::default(), BasicBlock::default()],
            edges: Vec::new(),
            handler_edges: Vec::new(),
            decisions: Vec::new(),
        },
        current: None,
    };
    let first = b.new_block();
    b.edge(ENTRY, first, EdgeKind::Fallthrough);
    b.current = Some(first);
    b.stmts(&method.body.stmts);
    b.goto(EXIT, EdgeKind::Fallthrough);
    b.g
}

/// CFGs for every method and constructor, in declaration order.
pub fn build_cfgs(unit: &CompilationUnit) -> Vec<ControlFlowGraph> {
    unit.methods().map(|(c, m)| build_cfg(&c.name, m)).collect()
}

struct Builder {
    g: ControlFlowGraph,
    /// `None` after a `return`: the next statement starts a dead block.
    current: Option<usize>,
}

fn head_span(stmt: &Stmt, end: Option<&SourceSpan>) -> SourceSpan {
    let s = &stmt.span;
    match end {
        Some(e) => SourceSpan::new(s.file.clone(), s.line, s.column, e.end_line, e.end_column),
        None => SourceSpan::new(s.file.clone(), s.line, s.column, s.line, s.column),
    }
}

fn branch_kind(folded: bool, kind: EdgeKind) -> EdgeKind {
    if folded {
        EdgeKind::Fallthrough
    } else {
        kind
    }
}

impl Builder {
    fn new_block(&mut self) -> usize {
        self.g.blocks.push(BasicBlock::default());
        self.g.blocks.len() - 1
    }

    fn edge(&mut self, from: usize, to: usize, kind: EdgeKind) {
        self.g.edges.push(CfgEdge { from, to, kind });
    }

    fn goto(&mut self, to: usize, kind: EdgeKind) {
        if let Some(c) = self.current {
            self.edge(c, to, kind);
        }
    }

    /// Appends an instruction, opening an unreachable block if needed.
    fn emit(&mut self, id: NodeId, span: SourceSpan) -> usize {
        let block = match self.current {
            Some(b) => b,
            None => {
                let b = self.new_block();
                self.current = Some(b);
                b
            }
        };
        self.g.blocks[block].instructions.push(Instruction { id, span });
        block
    }

    /// Starts a fresh block reached from the current one.
    fn start_block(&mut self) -> usize {
        let b = self.new_block();
        self.goto(b, EdgeKind::Fallthrough);
        self.current = Some(b);
        b
    }

    fn record_decision(&mut self, stmt: &Stmt, block: usize, span: SourceSpan) {
        let kinds: Vec<EdgeKind> = self
            .g
            .edges
            .iter()
            .filter(|e| e.from == block)
            .map(|e| e.kind)
            .collect();
        if kinds.len() >= 2 {
            self.g.decisions.push(Decision {
                stmt: stmt.id,
                block,
                span,
                kinds,
            });
        }
    }

    fn stmts(&mut self, stmts: &[Stmt]) {
        for s in stmts {
            self.stmt(s);
        }
    }

    fn stmt(&mut self, s: &Stmt) {
        match &s.kind {
            StmtKind::Block(b) => {
                self.emit(s.id, head_span(s, None));
                self.stmts(&b.stmts);
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let span = head_span(s, Some(&cond.span));
                let d = self.emit(s.id, span.clone());
                let k = cond.constant_truth();
                let folded = k.is_some();
                let then_b = self.new_block();
                if k != Some(false) {
                    self.edge(d, then_b, branch_kind(folded, EdgeKind::TrueBranch));
                }
                let else_b = else_branch.as_ref().map(|_| self.new_block());
                let join = self.new_block();
                if k != Some(true) {
                    let target = else_b.unwrap_or(join);
                    self.edge(d, target, branch_kind(folded, EdgeKind::FalseBranch));
                }
                self.record_decision(s, d, span);
                self.current = Some(then_b);
                self.stmt(then_branch);
                self.goto(join, EdgeKind::Fallthrough);
                if let (Some(e), Some(else_b)) = (else_branch, else_b) {
                    self.current = Some(else_b);
                    self.stmt(e);
                    self.goto(join, EdgeKind::Fallthrough);
                }
                self.current = Some(join);
            }
            StmtKind::While { cond, body } => {
                self.start_block();
                let span = head_span(s, Some(&cond.span));
                self.loop_tail(s, Some(cond), span, body, None);
            }
            StmtKind::For {
                init,
                cond,
                update,
                body,
            } => {
                if let Some(i) = init {
                    self.stmt(i);
                }
                self.start_block();
                let span = head_span(s, cond.as_ref().map(|c| &c.span));
                self.loop_tail(s, cond.as_ref(), span, body, update.as_ref());
            }
            StmtKind::Switch { scrutinee, arms, .. } => {
                let span = head_span(s, Some(&scrutinee.span));
                let d = self.emit(s.id, span.clone());
                let after = self.new_block();
                let mut arm_blocks = Vec::new();
                for i in 0..arms.len() {
                    let b = self.new_block();
                    self.edge(d, b, EdgeKind::SwitchCase(i));
                    arm_blocks.push(b);
                }
                if !arms.iter().any(|a| a.label.is_none()) {
                    self.edge(d, after, EdgeKind::SwitchCase(arms.len()));
                }
                self.record_decision(s, d, span);
                for (arm, b) in arms.iter().zip(arm_blocks) {
                    self.current = Some(b);
                    self.stmts(&arm.body);
                    self.goto(after, EdgeKind::Fallthrough);
                }
                self.current = Some(after);
            }
            StmtKind::Try { body, catches, finally } => {
                let enter = self.emit(s.id, head_span(s, None));
                self.stmts(&body.stmts);
                let join = self.new_block();
                self.goto(join, EdgeKind::Fallthrough);
                for c in catches {
                    let cb = self.new_block();
                    self.g.handler_edges.push((enter, cb));
                    self.current = Some(cb);
                    let cs = &c.span;
                    self.emit(
                        c.id,
                        SourceSpan::new(cs.file.clone(), cs.line, cs.column, cs.line, cs.column),
                    );
                    self.stmts(&c.body.stmts);
                    self.goto(join, EdgeKind::Fallthrough);
                }
                self.current = Some(join);
                if let Some(f) = finally {
                    self.stmts(&f.stmts);
                }
            }
            StmtKind::Return(_) => {
                self.emit(s.id, s.span.clone());
                self.goto(EXIT, EdgeKind::Fallthrough);
                self.current = None;
            }
            StmtKind::Synchronized { body, .. } => {
                self.emit(s.id, head_span(s, None));
                self.stmts(&body.stmts);
            }
            StmtKind::Expr(_) | StmtKind::LocalDecl { .. } | StmtKind::Assert { .. } | StmtKind::Empty => {
                self.emit(s.id, s.span.clone());
            }
        }
    }

    /// Loop header (already current), body, optional update and back edge.
    fn loop_tail(&mut self, s: &Stmt, cond: Option<&Expr>, span: SourceSpan, body: &Stmt, update: Option<&Expr>) {
        let header = self.emit(s.id, span.clone());
        let k = match cond {
            Some(c) => c.constant_truth(),
            None => Some(true),
        };
        let folded = k.is_some();
        let body_b = self.new_block();
        let after = self.new_block();
        if k != Some(false) {
            self.edge(header, body_b, branch_kind(folded, EdgeKind::TrueBranch));
        }
        if k != Some(true) {
            self.edge(header, after, branch_kind(folded, EdgeKind::FalseBranch));
        }
        self.record_decision(s, header, span);
        self.current = Some(body_b);
        self.stmt(body);
        if let (Some(u), Some(_)) = (update, self.current) {
            self.emit(u.id, u.span.clone());
        }
        self.goto(header, EdgeKind::LoopBack);
        self.current = Some(after);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(body: &str) -> ControlFlowGraph {
        let u = parse_source(&format!("class T {{ void m(int c) {{ {body} }} }}"), "t.sl").unwrap();
        build_cfg("T", &u.classes[0].methods[0])
    }

    #[test]
    fn straight_line_is_a_chain() {
        let g = cfg("int a = 1; a = 2; println(a);");
        assert_eq!(g.e(), g.n() - 1);
        assert_eq!(g.d(), 0);
        assert_eq!(g.instructions().count(), 3);
    }

    #[test]
    fn diamond() {
        let g = cfg("if (c > 1) { c = 1; } else { c = 2; }");
        assert_eq!(g.d(), 1);
        assert_eq!(g.b(), 2);
        assert_eq!(g.decisions.len(), 1);
        assert_eq!(g.decisions[0].kinds, vec![EdgeKind::TrueBranch, EdgeKind::FalseBranch]);
        assert_eq!(g.e() as i64 - g.n() as i64 + 2, 2);
    }

    #[test]
    fn one_loop_one_decision() {
        let g = cfg("for (int i = 1; i < 10; i++) { println(i); } int s = 0; println(s);");
        assert_eq!(g.d(), 1);
        assert!(g.edges.iter().any(|e| e.kind == EdgeKind::LoopBack));
    }

    #[test]
    fn folded_conditions_are_not_decisions() {
        let g = cfg("while (false) { c = 1; } if (1) c = 2;");
        assert_eq!(g.d(), 0);
    }

    #[test]
    fn try_catch_adds_no_decision() {
        let plain = cfg("if (c > 0) c = 1;");
        let wrapped = cfg("try { if (c > 0) c = 1; } catch (Exception e) { c = 3; } finally { c = 4; }");
        let v = |g: &ControlFlowGraph| g.e() as i64 - g.n() as i64 + 2;
        assert_eq!(v(&plain), v(&wrapped));
        assert_eq!(wrapped.handler_edges.len(), 1);
    }

    #[test]
    fn switch_is_one_decision() {
        let g = cfg("switch (c) { case 1: c = 2; case 2: c = 3; }");
        assert_eq!(g.d(), 1);
        assert_eq!(g.b(), 3);
    }

    #[test]
    fn every_statement_has_one_instruction() {
        let g = cfg("int a = 0; { a = 1; } while (a < 3) a = a + 1; return;");
        let mut ids: Vec<_> = g.instructions().map(|i| i.id).collect();
        let n = ids.len();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), n);
        assert_eq!(n, 6);
    }
}
