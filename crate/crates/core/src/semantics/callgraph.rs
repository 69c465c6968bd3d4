//! Method-level call graph with per-site conditionality.

use std::collections::HashMap;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::frontend::*;

use super::symbols::{Callee, SymbolTable};

#[derive(Clone, Debug, PartialEq)]
pub struct CallGraphNode {
    /// `Class.method/arity`; builtins use their qualified name.
    pub name: String,
    pub class: Option<String>,
    pub builtin: bool,
    pub unknown: bool,
    pub is_constructor: bool,
    /// Declaring method; `None` for builtins and synthesized members.
    pub decl: Option<NodeId>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CallGraphEdge {
    pub caller: usize,
    pub callee: usize,
    pub site: NodeId,
    pub span: SourceSpan,
    /// Not nested in any if/loop/switch/try construct or short-circuit operand.
    pub unconditional: bool,
    /// As `unconditional`, but literal-true conditions do not count.
    pub effectively_unconditional: bool,
}

#[derive(Clone, Debug, Default)]
pub struct CallGraph {
    pub nodes: Vec<CallGraphNode>,
    pub edges: Vec<CallGraphEdge>,
    index: HashMap<String, usize>,
}

impl CallGraph {
    pub fn node(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn out_edges(&self, node: usize) -> impl Iterator<Item = &CallGraphEdge> {
        self.edges.iter().filter(move |e| e.caller == node)
    }

    /// Strongly connected components over user methods using only edges
    /// accepted by `keep`. Singletons are kept only with a self-loop. Each
    /// component is sorted; components are sorted by their first node.
    pub fn cycles(&self, keep: impl Fn(&CallGraphEdge) -> bool) -> Vec<Vec<usize>> {
        let mut g = DiGraph::<usize, ()>::new();
        let ix: Vec<_> = (0..self.nodes.len()).map(|i| g.add_node(i)).collect();
        let mut self_loop = vec![false; self.nodes.len()];
        for e in &self.edges {
            let user = |n: usize| !self.nodes[n].builtin && !self.nodes[n].unknown;
            if keep(e) && user(e.caller) && user(e.callee) {
                g.add_edge(ix[e.caller], ix[e.callee], ());
                if e.caller == e.callee {
                    self_loop[e.caller] = true;
                }
            }
        }
        let mut out: Vec<Vec<usize>> = tarjan_scc(&g)
            .into_iter()
            .map(|c| {
                let mut c: Vec<usize> = c.into_iter().map(|n| g[n]).collect();
                c.sort_unstable();
                c
            })
            .filter(|c| c.len() > 1 || self_loop[c[0]])
            .collect();
        out.sort();
        out
    }

    fn intern(&mut self, node: CallGraphNode) -> usize {
        if let Some(&i) = self.index.get(&node.name) {
            return i;
        }
        let i = self.nodes.len();
        self.index.insert(node.name.clone(), i);
        self.nodes.push(node);
        i
    }
}

pub fn method_key(class: &str, method: &str, arity: usize) -> String {
    format!("{class}.{method}/{arity}")
}

pub fn build_call_graph(unit: &CompilationUnit, table: &SymbolTable) -> CallGraph {
    let mut b = Builder {
        g: CallGraph::default(),
        table,
        caller: 0,
    };
    for class in &unit.classes {
        for m in &class.methods {
            b.g.intern(CallGraphNode {
                name: method_key(&class.name, &m.name, m.params.len()),
                class: Some(class.name.clone()),
                builtin: false,
                unknown: false,
                is_constructor: m.is_constructor,
                decl: Some(m.id),
            });
        }
    }
    for class in &unit.classes {
        if class.fields.iter().any(|f| f.init.is_some()) {
            b.caller = b.g.intern(CallGraphNode {
                name: method_key(&class.name, "<fields>", 0),
                class: Some(class.name.clone()),
                builtin: false,
                unknown: false,
                is_constructor: false,
                decl: None,
            });
            for f in &class.fields {
                if let Some(init) = &f.init {
                    b.expr(init, Flags::TOP);
                }
            }
        }
        for m in &class.methods {
            b.caller =
                b.g.node(&method_key(&class.name, &m.name, m.params.len()))
                    .expect("method node interned above");
            b.block(&m.body, Flags::TOP);
        }
    }
    b.g
}

#[derive(Clone, Copy)]
struct Flags {
    cond: bool,
    eff_cond: bool,
}

impl Flags {
    const TOP: Flags = Flags {
        cond: false,
        eff_cond: false,
    };

    /// Nested under a construct that may skip its body; `always` says the
    /// body is nevertheless certain to run.
    fn nested(self, always: bool) -> Flags {
        Flags {
            cond: true,
            eff_cond: self.eff_cond || !always,
        }
    }
}

struct Builder<'t> {
    g: CallGraph,
    table: &'t SymbolTable,
    caller: usize,
}

impl Builder<'_> {
    fn callee_node(&mut self, callee: Option<&Callee>, arity: usize) -> usize {
        let node = match callee {
            Some(Callee::User {
                class,
                method,
                arity,
                decl,
                is_constructor,
            }) => CallGraphNode {
                name: method_key(class, method, *arity),
                class: Some(class.clone()),
                builtin: false,
                unknown: false,
                is_constructor: *is_constructor,
                decl: *decl,
            },
            Some(Callee::Builtin(name)) => CallGraphNode {
                name: format!("{name}/{arity}"),
                class: None,
                builtin: true,
                unknown: false,
                is_constructor: name.ends_with(".<init>"),
                decl: None,
            },
            Some(Callee::Unknown(_)) | None => CallGraphNode {
                name: "<unknown>".into(),
                class: None,
                builtin: false,
                unknown: true,
                is_constructor: false,
                decl: None,
            },
        };
        self.g.intern(node)
    }

    fn block(&mut self, block: &Block, f: Flags) {
        for s in &block.stmts {
            self.stmt(s, f);
        }
    }

    fn stmt(&mut self, s: &Stmt, f: Flags) {
        match &s.kind {
            StmtKind::Block(b) => self.block(b, f),
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                self.expr(cond, f);
                let k = cond.constant_truth();
                self.stmt(then_branch, f.nested(k == Some(true)));
                if let Some(e) = else_branch {
                    self.stmt(e, f.nested(k == Some(false)));
                }
            }
            StmtKind::While { cond, body } => {
                self.expr(cond, f);
                self.stmt(body, f.nested(cond.constant_truth() == Some(true)));
            }
            StmtKind::For {
                init,
                cond,
                update,
                body,
            } => {
                if let Some(i) = init {
                    self.stmt(i, f);
                }
                let always = match cond {
                    Some(c) => {
                        self.expr(c, f);
                        c.constant_truth() == Some(true)
                    }
                    None => true,
                };
                self.stmt(body, f.nested(always));
                if let Some(u) = update {
                    self.expr(u, f.nested(always));
                }
            }
            StmtKind::Switch { scrutinee, arms, .. } => {
                self.expr(scrutinee, f);
                for arm in arms {
                    if let Some(l) = &arm.label {
                        self.expr(l, f);
                    }
                    for st in &arm.body {
                        self.stmt(st, f.nested(false));
                    }
                }
            }
            StmtKind::Try { body, catches, finally } => {
                self.block(body, f.nested(true));
                for c in catches {
                    self.block(&c.body, f.nested(false));
                }
                if let Some(fin) = finally {
                    self.block(fin, f.nested(true));
                }
            }
            StmtKind::Return(Some(e)) | StmtKind::Expr(e) => self.expr(e, f),
            StmtKind::LocalDecl { init: Some(e), .. } => self.expr(e, f),
            StmtKind::Assert { cond, message } => {
                self.expr(cond, f);
                if let Some(m) = message {
                    self.expr(m, f.nested(false));
                }
            }
            StmtKind::Synchronized { monitor, body } => {
                self.expr(monitor, f);
                self.block(body, f);
            }
            StmtKind::Return(None) | StmtKind::LocalDecl { init: None, .. } | StmtKind::Empty => {}
        }
    }

    fn edge(&mut self, e: &Expr, arity: usize, f: Flags) {
        let callee = self.callee_node(self.table.callee(e), arity);
        self.g.edges.push(CallGraphEdge {
            caller: self.caller,
            callee,
            site: e.id,
            span: e.span.clone(),
            unconditional: !f.cond,
            effectively_unconditional: !f.eff_cond,
        });
    }

    fn expr(&mut self, e: &Expr, f: Flags) {
        match &e.kind {
            ExprKind::Call { receiver, args, .. } => {
                if let Some(r) = receiver {
                    self.expr(r, f);
                }
                for a in args {
                    self.expr(a, f);
                }
                self.edge(e, args.len(), f);
            }
            ExprKind::New { args, .. } | ExprKind::SuperCall { args } => {
                for a in args {
                    self.expr(a, f);
                }
                self.edge(e, args.len(), f);
            }
            ExprKind::Binary {
                op: op @ (BinOp::And | BinOp::Or),
                lhs,
                rhs,
            } => {
                self.expr(lhs, f);
                let forced = if *op == BinOp::And { Some(true) } else { Some(false) };
                self.expr(rhs, f.nested(lhs.constant_truth() == forced));
            }
            ExprKind::Binary { lhs, rhs, .. } => {
                self.expr(lhs, f);
                self.expr(rhs, f);
            }
            ExprKind::Assign { target, value } => {
                self.expr(target, f);
                self.expr(value, f);
            }
            ExprKind::Unary { operand, .. } => self.expr(operand, f),
            ExprKind::NewArray { size, .. } => self.expr(size, f),
            ExprKind::Index { array, index } => {
                self.expr(array, f);
                self.expr(index, f);
            }
            ExprKind::FieldAccess { object, .. } => self.expr(object, f),
            ExprKind::Name(_) | ExprKind::Literal(_) | ExprKind::Null | ExprKind::This => {}
        }
    }
}
