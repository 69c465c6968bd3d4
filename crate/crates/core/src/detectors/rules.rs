//! The rule catalog and its detectors.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::cfg::{reachability, unreachable_nodes, ControlFlowGraph, EXIT};
use crate::frontend::pretty::expr_to_string;
use crate::frontend::visit::{for_each_expr, for_each_subexpr};
use crate::frontend::*;
use crate::semantics::types::{self, ParamKind};
use crate::semantics::{Callee, SymbolId, SymbolKind, Type};

use super::{Category, Confidence, Hit, Rule, RuleContext};

macro_rules! rule {
    ($id:expr, $cat:ident, $prio:expr, $conf:ident, $rank:expr, $desc:expr, $f:expr) => {
        Rule {
            id: $id,
            default_category: Category::$cat,
            default_priority: $prio,
            default_confidence: Confidence::$conf,
            rank: $rank,
            description: $desc,
            detector: $f,
        }
    };
}

pub(super) static CATALOG: &[Rule] = &[
    rule!(
        "NP_DEREFERENCE_OF_READLINE_VALUE",
        Dodgy,
        3,
        Normal,
        15,
        "Result of readLine() dereferenced without a null check",
        readline_deref
    ),
    rule!(
        "InfiniteRecursion",
        Correctness,
        1,
        High,
        2,
        "Call cycle with no conditional exit",
        infinite_recursion
    ),
    rule!(
        "EqualsHashcodeMismatch",
        BadPractice,
        2,
        High,
        14,
        "Class defines equals without hashCode or the reverse",
        equals_hashcode
    ),
    rule!(
        "IgnoredReturnValue",
        Correctness,
        2,
        Normal,
        12,
        "Status-carrying return value discarded",
        ignored_return
    ),
    rule!(
        "UnconditionalWait",
        MultithreadedCorrectness,
        2,
        Normal,
        10,
        "wait() in a synchronized block without a guarding condition",
        unconditional_wait
    ),
    rule!(
        "DeadlockOrder",
        MultithreadedCorrectness,
        1,
        Low,
        8,
        "Two monitors acquired in opposite orders",
        deadlock_order
    ),
    rule!(
        "StringEqualityOperator",
        Correctness,
        2,
        High,
        11,
        "Strings compared with == or !=",
        string_equality
    ),
    rule!(
        "UnusedLocalVariable",
        Dodgy,
        4,
        High,
        18,
        "Local variable is never read",
        unused_local
    ),
    rule!(
        "StreamNotClosed",
        Experimental,
        2,
        Normal,
        16,
        "Stream may stay open on some path",
        stream_not_closed
    ),
    rule!(
        "CircularDependency",
        Dodgy,
        3,
        Normal,
        17,
        "Constructors instantiate each other; refactoring optional",
        circular_dependency
    ),
    rule!(
        "RedundantNullCheck",
        Dodgy,
        5,
        Low,
        19,
        "Null check of a value known to be non-null",
        redundant_null_check
    ),
    rule!(
        "StaticFieldCouldBeFinal",
        Correctness,
        1,
        High,
        9,
        "Static field never reassigned but not final",
        static_field_final
    ),
    rule!(
        "EmptyBlock",
        BadPractice,
        4,
        High,
        17,
        "Empty try/catch/finally/switch/if/while body",
        empty_block
    ),
    rule!(
        "MethodNamingConventions",
        BadPractice,
        4,
        High,
        20,
        "Method names should be lowerCamelCase",
        method_naming
    ),
    rule!(
        "ParameterNameConvention",
        BadPractice,
        4,
        High,
        20,
        "Parameter names should be lowerCamelCase without prefixes",
        parameter_naming
    ),
    rule!(
        "ClassNamingConvention",
        BadPractice,
        4,
        High,
        20,
        "Class names should be UpperCamelCase",
        class_naming
    ),
    rule!(
        "NoPackage",
        BadPractice,
        4,
        High,
        20,
        "Compilation unit has no package declaration",
        no_package
    ),
    rule!(
        "SystemPrintln",
        Performance,
        4,
        High,
        20,
        "println used for output",
        system_println
    ),
    rule!(
        "DoNotUseThreads",
        MultithreadedCorrectness,
        3,
        Normal,
        18,
        "Class extends Thread",
        do_not_use_threads
    ),
    rule!(
        "MethodArgumentCouldBeFinal",
        Performance,
        5,
        High,
        20,
        "Parameter is never assigned and could be final",
        argument_could_be_final
    ),
    rule!(
        "UnreachableCode",
        Dodgy,
        2,
        High,
        10,
        "Statements no path from method entry reaches",
        unreachable_code
    ),
];

// Statement helpers.

/// Expressions a statement evaluates itself, excluding nested statements.
fn own_exprs(s: &Stmt) -> Vec<&Expr> {
    match &s.kind {
        StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => vec![cond],
        StmtKind::For { cond, update, .. } => cond.iter().chain(update.iter()).collect(),
        StmtKind::Switch { scrutinee, .. } => vec![scrutinee],
        StmtKind::Return(e) => e.iter().collect(),
        StmtKind::Expr(e) => vec![e],
        StmtKind::LocalDecl { init, .. } => init.iter().collect(),
        StmtKind::Assert { cond, message } => std::iter::once(cond).chain(message.iter()).collect(),
        StmtKind::Synchronized { monitor, .. } => vec![monitor],
        StmtKind::Block(_) | StmtKind::Try { .. } | StmtKind::Empty => Vec::new(),
    }
}

/// Direct child statements in execution order.
fn children(s: &Stmt) -> Vec<&Stmt> {
    match &s.kind {
        StmtKind::Block(b) => b.stmts.iter().collect(),
        StmtKind::If {
            then_branch,
            else_branch,
            ..
        } => std::iter::once(&**then_branch).chain(else_branch.as_deref()).collect(),
        StmtKind::While { body, .. } => vec![body],
        StmtKind::For { init, body, .. } => init.as_deref().into_iter().chain([&**body]).collect(),
        StmtKind::Switch { arms, .. } => arms.iter().flat_map(|a| a.body.iter()).collect(),
        StmtKind::Try { body, catches, finally } => body
            .stmts
            .iter()
            .chain(catches.iter().flat_map(|c| c.body.stmts.iter()))
            .chain(finally.iter().flat_map(|f| f.stmts.iter()))
            .collect(),
        StmtKind::Synchronized { body, .. } => body.stmts.iter().collect(),
        _ => Vec::new(),
    }
}

/// Pre-order walk passing each statement with its ancestors, outermost first.
fn walk<'a>(stmts: &'a [Stmt], f: &mut dyn FnMut(&'a Stmt, &[&'a Stmt])) {
    fn go<'a>(s: &'a Stmt, anc: &mut Vec<&'a Stmt>, f: &mut dyn FnMut(&'a Stmt, &[&'a Stmt])) {
        f(s, anc);
        anc.push(s);
        for c in children(s) {
            go(c, anc, f);
        }
        anc.pop();
    }
    let mut anc = Vec::new();
    for s in stmts {
        go(s, &mut anc, f);
    }
}

fn all_exprs<'a>(unit: &'a CompilationUnit, f: &mut dyn FnMut(&'a Expr)) {
    for class in &unit.classes {
        for field in &class.fields {
            if let Some(init) = &field.init {
                for_each_subexpr(init, f);
            }
        }
        for m in &class.methods {
            for s in &m.body.stmts {
                for_each_expr(s, f);
            }
        }
    }
}

fn is_empty_body(s: &Stmt) -> bool {
    match &s.kind {
        StmtKind::Empty => true,
        StmtKind::Block(b) => b.stmts.is_empty(),
        _ => false,
    }
}

fn builtin_name<'t>(ctx: &'t RuleContext, e: &Expr) -> Option<&'t str> {
    match ctx.table.callee(e) {
        Some(Callee::Builtin(n)) => Some(n),
        _ => None,
    }
}

fn symbol_of(ctx: &RuleContext, e: &Expr) -> Option<SymbolId> {
    match &e.kind {
        ExprKind::Name(_) => ctx.table.resolved(e).map(|s| s.id),
        _ => None,
    }
}

/// The symbol compared against `null` when `e` is `x == null` or `x != null`.
fn null_compared(ctx: &RuleContext, e: &Expr) -> Option<SymbolId> {
    let ExprKind::Binary {
        op: BinOp::Eq | BinOp::Ne,
        lhs,
        rhs,
    } = &e.kind
    else {
        return None;
    };
    match (&lhs.kind, &rhs.kind) {
        (_, ExprKind::Null) => symbol_of(ctx, lhs),
        (ExprKind::Null, _) => symbol_of(ctx, rhs),
        _ => None,
    }
}

fn mentions_null_check(ctx: &RuleContext, e: &Expr, sym: SymbolId) -> bool {
    let mut found = false;
    for_each_subexpr(e, &mut |x| found |= null_compared(ctx, x) == Some(sym));
    found
}

fn cfg_of<'a>(ctx: &'a RuleContext, m: &MethodDecl) -> Option<&'a ControlFlowGraph> {
    ctx.cfgs.iter().find(|c| c.method_decl == m.id)
}

// Detectors.

fn readline_deref(ctx: &RuleContext) -> Vec<Hit> {
    let mut hits = Vec::new();
    for (class, m) in ctx.unit.methods() {
        let mut maybe_null: HashSet<SymbolId> = HashSet::new();
        let nullable = |e: &Expr, maybe_null: &HashSet<SymbolId>| {
            ctx.table.type_of(e) == (Type::Str { nullable: true })
                || symbol_of(ctx, e).is_some_and(|s| maybe_null.contains(&s))
        };
        walk(&m.body.stmts, &mut |s, anc| {
            let guards: Vec<&Expr> = anc
                .iter()
                .filter_map(|a| match &a.kind {
                    StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => Some(cond),
                    StmtKind::For { cond, .. } => cond.as_ref(),
                    _ => None,
                })
                .collect();
            for own in own_exprs(s) {
                let checked = |target: &Expr| {
                    let Some(sym) = symbol_of(ctx, target) else {
                        return false;
                    };
                    guards.iter().chain([&own]).any(|g| mentions_null_check(ctx, g, sym))
                };
                let mut derefs: Vec<&Expr> = Vec::new();
                for_each_subexpr(own, &mut |e| match &e.kind {
                    ExprKind::Call { receiver: Some(r), .. } => derefs.push(r),
                    ExprKind::FieldAccess { object, .. } => derefs.push(object),
                    ExprKind::Call {
                        receiver: None,
                        method,
                        args,
                    } => {
                        if let Some(Callee::Builtin(_)) = ctx.table.callee(e) {
                            if let Some(b) = types::find_global(method, args.len()) {
                                for (a, p) in args.iter().zip(b.params) {
                                    if *p == ParamKind::Str {
                                        derefs.push(a);
                                    }
                                }
                            }
                        }
                    }
                    _ => {}
                });
                for target in derefs {
                    if nullable(target, &maybe_null) && !checked(target) {
                        hits.push(Hit::new(
                            &target.span,
                            format!(
                                "Dereference of the result of readLine() without nullcheck in {}.{}",
                                class.name,
                                m.signature()
                            ),
                        ));
                        if let Some(sym) = symbol_of(ctx, target) {
                            maybe_null.remove(&sym);
                        }
                    }
                }
                for_each_subexpr(own, &mut |e| {
                    if let ExprKind::Assign { target, value } = &e.kind {
                        if let Some(sym) = symbol_of(ctx, target) {
                            if nullable(value, &maybe_null) {
                                maybe_null.insert(sym);
                            } else {
                                maybe_null.remove(&sym);
                            }
                        }
                    }
                });
            }
            if let StmtKind::LocalDecl { init: Some(init), .. } = &s.kind {
                if let Some(sym) = ctx.table.declarations.get(&s.id) {
                    if nullable(init, &maybe_null) {
                        maybe_null.insert(*sym);
                    }
                }
            }
        });
    }
    hits
}

/// First call site on an edge that stays inside `cycle` and satisfies `keep`.
fn cycle_site<'a>(
    ctx: &'a RuleContext,
    cycle: &[usize],
    keep: impl Fn(&crate::semantics::CallGraphEdge) -> bool,
) -> Option<&'a SourceSpan> {
    ctx.call_graph
        .edges
        .iter()
        .filter(|e| e.caller == cycle[0] && cycle.contains(&e.callee) && keep(e))
        .map(|e| &e.span)
        .min_by_key(|s| s.start())
}

fn infinite_recursion(ctx: &RuleContext) -> Vec<Hit> {
    let g = ctx.call_graph;
    let mut hits = Vec::new();
    for cycle in g.cycles(|e| e.effectively_unconditional) {
        if cycle.iter().all(|&n| g.nodes[n].is_constructor) {
            continue;
        }
        let names: Vec<&str> = cycle.iter().map(|&n| g.nodes[n].name.as_str()).collect();
        if let Some(span) = cycle_site(ctx, &cycle, |e| e.effectively_unconditional) {
            hits.push(Hit::new(
                span,
                format!(
                    "Infinite recursion: no call in {{{}}} can stop the cycle",
                    names.join(", ")
                ),
            ));
        }
    }
    hits
}

fn circular_dependency(ctx: &RuleContext) -> Vec<Hit> {
    let g = ctx.call_graph;
    let ctor_edge =
        |e: &crate::semantics::CallGraphEdge| g.nodes[e.caller].is_constructor && g.nodes[e.callee].is_constructor;
    let mut hits = Vec::new();
    for cycle in g.cycles(ctor_edge) {
        let classes: Vec<&str> = cycle.iter().filter_map(|&n| g.nodes[n].class.as_deref()).collect();
        if let Some(span) = cycle_site(ctx, &cycle, ctor_edge) {
            hits.push(Hit::new(
                span,
                format!("Circular dependency between {}", classes.join(" and ")),
            ));
        }
    }
    hits
}

fn equals_hashcode(ctx: &RuleContext) -> Vec<Hit> {
    let mut hits = Vec::new();
    for class in &ctx.unit.classes {
        let has = |name: &str, arity: usize| {
            class
                .methods
                .iter()
                .any(|m| !m.is_constructor && m.name.eq_ignore_ascii_case(name) && m.params.len() == arity)
        };
        let (eq, hash) = (has("equals", 1), has("hashCode", 0));
        if eq != hash {
            let (have, missing) = if eq {
                ("equals", "hashCode")
            } else {
                ("hashCode", "equals")
            };
            hits.push(Hit::new(
                &class.name_span,
                format!("{} defines {have} but not {missing}", class.name),
            ));
        }
    }
    hits
}

fn ignored_return(ctx: &RuleContext) -> Vec<Hit> {
    let mut hits = Vec::new();
    for (_, m) in ctx.unit.methods() {
        walk(&m.body.stmts, &mut |s, _| {
            let StmtKind::Expr(e) = &s.kind else {
                return;
            };
            if let Some(name) = builtin_name(ctx, e) {
                if types::find_builtin(name).is_some_and(|b| b.must_check) {
                    hits.push(Hit::new(&e.span, format!("Return value of {name} ignored")));
                }
            }
        });
    }
    hits
}

fn unconditional_wait(ctx: &RuleContext) -> Vec<Hit> {
    fn scan(stmts: &[Stmt], guarded: bool, hits: &mut Vec<Hit>) {
        for s in stmts {
            if !guarded {
                for e in own_exprs(s) {
                    for_each_subexpr(e, &mut |x| {
                        if x.is_call_to("wait") {
                            hits.push(Hit::new(&x.span, "Unconditional wait() in synchronized block"));
                        }
                    });
                }
            }
            let guard = guarded || matches!(s.kind, StmtKind::If { .. } | StmtKind::While { .. });
            let kids: Vec<Stmt> = children(s).into_iter().cloned().collect();
            scan(&kids, guard, hits);
        }
    }
    let mut hits = Vec::new();
    for (_, m) in ctx.unit.methods() {
        walk(&m.body.stmts, &mut |s, anc| {
            let nested = anc.iter().any(|a| matches!(a.kind, StmtKind::Synchronized { .. }));
            if let (StmtKind::Synchronized { body, .. }, false) = (&s.kind, nested) {
                scan(&body.stmts, false, &mut hits);
            }
        });
    }
    hits
}

fn deadlock_order(ctx: &RuleContext) -> Vec<Hit> {
    struct Nesting {
        outer: String,
        inner: String,
        span: SourceSpan,
        method: String,
    }
    let mut nestings = Vec::new();
    for (class, m) in ctx.unit.methods() {
        walk(&m.body.stmts, &mut |s, anc| {
            let StmtKind::Synchronized { monitor, .. } = &s.kind else {
                return;
            };
            let inner = expr_to_string(monitor);
            for a in anc {
                if let StmtKind::Synchronized { monitor: outer, .. } = &a.kind {
                    let outer = expr_to_string(outer);
                    if outer != inner {
                        nestings.push(Nesting {
                            outer,
                            inner: inner.clone(),
                            span: s.span.clone(),
                            method: format!("{}.{}", class.name, m.name),
                        });
                    }
                }
            }
        });
    }
    let mut reported = HashSet::new();
    let mut hits = Vec::new();
    for (i, a) in nestings.iter().enumerate() {
        for b in &nestings[i + 1..] {
            let key = if a.outer < a.inner {
                (a.outer.clone(), a.inner.clone())
            } else {
                (a.inner.clone(), a.outer.clone())
            };
            if a.outer == b.inner && a.inner == b.outer && reported.insert(key) {
                hits.push(Hit::new(
                    &b.span,
                    format!(
                        "Possible deadlock: {} locks {} then {}, {} locks them in reverse",
                        a.method, a.outer, a.inner, b.method
                    ),
                ));
            }
        }
    }
    hits
}

fn string_equality(ctx: &RuleContext) -> Vec<Hit> {
    let mut hits = Vec::new();
    all_exprs(ctx.unit, &mut |e| {
        if let ExprKind::Binary {
            op: op @ (BinOp::Eq | BinOp::Ne),
            lhs,
            rhs,
        } = &e.kind
        {
            if ctx.table.type_of(lhs).is_string() && ctx.table.type_of(rhs).is_string() {
                hits.push(Hit::new(
                    &e.span,
                    format!("Comparison of String objects using {}", op.symbol()),
                ));
            }
        }
    });
    hits
}

fn unused_local(ctx: &RuleContext) -> Vec<Hit> {
    ctx.table
        .symbols
        .iter()
        .filter(|s| s.kind == SymbolKind::Local && !s.builtin && s.usage_count == 0)
        .map(|s| Hit::new(&s.span, format!("Avoid unused local variables such as '{}'", s.name)))
        .collect()
}

/// Instruction position inside a CFG.
type Pos = (usize, usize);

fn stream_not_closed(ctx: &RuleContext) -> Vec<Hit> {
    let mut hits = Vec::new();
    for (_, m) in ctx.unit.methods() {
        let Some(cfg) = cfg_of(ctx, m) else {
            continue;
        };
        let mut opens: Vec<(&Stmt, SymbolId, String)> = Vec::new();
        let mut closes: HashMap<SymbolId, HashSet<NodeId>> = HashMap::new();
        let mut escaped: HashSet<SymbolId> = HashSet::new();
        let is_open = |e: &Expr| builtin_name(ctx, e) == Some("open");
        walk(&m.body.stmts, &mut |s, _| {
            match &s.kind {
                StmtKind::LocalDecl {
                    name, init: Some(init), ..
                } if is_open(init) => {
                    if let Some(&sym) = ctx.table.declarations.get(&s.id) {
                        opens.push((s, sym, name.clone()));
                    }
                }
                StmtKind::Expr(e) => match &e.kind {
                    ExprKind::Assign { target, value } if is_open(value) => {
                        if let Some(sym) = symbol_of(ctx, target) {
                            let kind = ctx.table.symbol(sym).kind;
                            if matches!(kind, SymbolKind::Local | SymbolKind::Param) {
                                opens.push((s, sym, expr_to_string(target)));
                            }
                        }
                    }
                    ExprKind::Call { receiver: Some(r), .. } if builtin_name(ctx, e) == Some("Stream.close") => {
                        if let Some(sym) = symbol_of(ctx, r) {
                            closes.entry(sym).or_default().insert(s.id);
                        }
                    }
                    _ => {}
                },
                _ => {}
            }
            for e in own_exprs(s) {
                for_each_subexpr(e, &mut |x| match &x.kind {
                    ExprKind::Call { args, .. } | ExprKind::New { args, .. } => {
                        escaped.extend(args.iter().filter_map(|a| symbol_of(ctx, a)));
                    }
                    ExprKind::Assign { target, value } => {
                        let local = symbol_of(ctx, target)
                            .is_some_and(|t| matches!(ctx.table.symbol(t).kind, SymbolKind::Local | SymbolKind::Param));
                        if !local {
                            escaped.extend(symbol_of(ctx, value));
                        }
                    }
                    _ => {}
                });
            }
            if let StmtKind::Return(Some(e)) = &s.kind {
                escaped.extend(symbol_of(ctx, e));
            }
        });
        let handlers = handler_map(&m.body.stmts);
        for (open, sym, name) in opens {
            if escaped.contains(&sym) {
                continue;
            }
            let Some(start) = position(cfg, open.id) else {
                continue;
            };
            let none = HashSet::new();
            let stops = closes.get(&sym).unwrap_or(&none);
            let (leaks, caught) = leak_search(cfg, start, stops, &handlers);
            if !leaks {
                continue;
            }
            let catch_span = caught
                .iter()
                .filter_map(|c| find_catch(&m.body.stmts, *c))
                .min_by_key(|s| s.start());
            match catch_span {
                Some(span) if !stops.is_empty() => hits.push(Hit::new(
                    &span,
                    format!(
                        "Stream `{name}` opened at line {} is not closed when this exception is caught",
                        open.span.line
                    ),
                )),
                _ => hits.push(Hit::new(
                    &open.span,
                    format!("Stream `{name}` may not be closed on every path"),
                )),
            }
        }
    }
    hits
}

fn position(cfg: &ControlFlowGraph, id: NodeId) -> Option<Pos> {
    cfg.blocks
        .iter()
        .enumerate()
        .find_map(|(b, block)| block.instructions.iter().position(|i| i.id == id).map(|k| (b, k)))
}

/// Instruction id to the catch clauses an exception raised there reaches.
fn handler_map(stmts: &[Stmt]) -> HashMap<NodeId, Vec<NodeId>> {
    fn go(stmts: &[Stmt], current: &[NodeId], map: &mut HashMap<NodeId, Vec<NodeId>>) {
        for s in stmts {
            if !current.is_empty() {
                map.insert(s.id, current.to_vec());
                if let StmtKind::For { update: Some(u), .. } = &s.kind {
                    map.insert(u.id, current.to_vec());
                }
            }
            if let StmtKind::Try { body, catches, finally } = &s.kind {
                let inner: Vec<NodeId> = if catches.is_empty() {
                    current.to_vec()
                } else {
                    catches.iter().map(|c| c.id).collect()
                };
                go(&body.stmts, &inner, map);
                for c in catches {
                    go(&c.body.stmts, current, map);
                }
                if let Some(f) = finally {
                    go(&f.stmts, current, map);
                }
            } else {
                let kids: Vec<Stmt> = children(s).into_iter().cloned().collect();
                go(&kids, current, map);
            }
        }
    }
    let mut map = HashMap::new();
    go(stmts, &[], &mut map);
    map
}

fn find_catch(stmts: &[Stmt], id: NodeId) -> Option<SourceSpan> {
    let mut found = None;
    walk(stmts, &mut |s, _| {
        if let StmtKind::Try { catches, .. } = &s.kind {
            for c in catches {
                if c.id == id {
                    found = Some(c.span.clone());
                }
            }
        }
    });
    found
}

/// Searches from just after `start` for a path to the exit that avoids every
/// instruction in `stops`. Exceptions may leave any instruction covered by a
/// handler. Returns whether the exit is reachable and the catch clauses the
/// search entered.
fn leak_search(
    cfg: &ControlFlowGraph,
    start: Pos,
    stops: &HashSet<NodeId>,
    handlers: &HashMap<NodeId, Vec<NodeId>>,
) -> (bool, Vec<NodeId>) {
    let mut seen: HashSet<Pos> = HashSet::new();
    let mut work = vec![(start.0, start.1 + 1)];
    let mut leaks = false;
    let mut caught = Vec::new();
    while let Some((b, i)) = work.pop() {
        if !seen.insert((b, i)) {
            continue;
        }
        let instrs = &cfg.blocks[b].instructions;
        if i < instrs.len() {
            let id = instrs[i].id;
            if stops.contains(&id) {
                continue;
            }
            for c in handlers.get(&id).into_iter().flatten() {
                if let Some(p) = position(cfg, *c) {
                    caught.push(*c);
                    work.push((p.0, p.1 + 1));
                }
            }
            work.push((b, i + 1));
        } else if b == EXIT {
            leaks = true;
        } else {
            work.extend(cfg.successors(b).map(|s| (s, 0)));
        }
    }
    caught.sort();
    caught.dedup();
    (leaks, caught)
}

fn redundant_null_check(ctx: &RuleContext) -> Vec<Hit> {
    let mut always_new: HashSet<NodeId> = HashSet::new();
    for (_, m) in ctx.unit.methods() {
        let mut returns = Vec::new();
        walk(&m.body.stmts, &mut |s, _| {
            if let StmtKind::Return(e) = &s.kind {
                returns.push(e.as_ref());
            }
        });
        let fresh = |e: Option<&Expr>| {
            matches!(
                e,
                Some(Expr {
                    kind: ExprKind::New { .. },
                    ..
                })
            )
        };
        if !m.is_constructor && !returns.is_empty() && returns.into_iter().all(fresh) {
            always_new.insert(m.id);
        }
    }
    let is_fresh = |e: &Expr| match &e.kind {
        ExprKind::New { .. } => true,
        ExprKind::Call { .. } => matches!(
            ctx.table.callee(e),
            Some(Callee::User { decl: Some(d), is_constructor: false, .. }) if always_new.contains(d)
        ),
        _ => false,
    };

    fn block(
        ctx: &RuleContext,
        stmts: &[&Stmt],
        known: &mut HashSet<SymbolId>,
        is_fresh: &dyn Fn(&Expr) -> bool,
        hits: &mut Vec<Hit>,
    ) {
        for s in stmts {
            for own in own_exprs(s) {
                for_each_subexpr(own, &mut |e| {
                    if let Some(sym) = null_compared(ctx, e) {
                        if known.contains(&sym) {
                            let name = &ctx.table.symbol(sym).name;
                            hits.push(Hit::new(
                                &e.span,
                                format!("Redundant nullcheck of {name}, which is known to be non-null"),
                            ));
                        }
                    }
                });
                for_each_subexpr(own, &mut |e| {
                    if let ExprKind::Assign { target, value } = &e.kind {
                        if let Some(sym) = symbol_of(ctx, target) {
                            if is_fresh(value) {
                                known.insert(sym);
                            } else {
                                known.remove(&sym);
                            }
                        }
                    }
                });
            }
            if let StmtKind::LocalDecl { init: Some(init), .. } = &s.kind {
                if let (Some(sym), true) = (ctx.table.declarations.get(&s.id), is_fresh(init)) {
                    known.insert(*sym);
                }
            }
            let kids = children(s);
            if kids.is_empty() {
                continue;
            }
            let mut inner = known.clone();
            block(ctx, &kids, &mut inner, is_fresh, hits);
            let mut written = Vec::new();
            for k in &kids {
                for_each_expr(k, &mut |e| {
                    if let ExprKind::Assign { target, .. } = &e.kind {
                        written.extend(symbol_of(ctx, target));
                    }
                });
            }
            for w in written {
                known.remove(&w);
            }
        }
    }

    let mut hits = Vec::new();
    for (_, m) in ctx.unit.methods() {
        let stmts: Vec<&Stmt> = m.body.stmts.iter().collect();
        block(ctx, &stmts, &mut HashSet::new(), &is_fresh, &mut hits);
    }
    hits
}

fn static_field_final(ctx: &RuleContext) -> Vec<Hit> {
    let mut hits = Vec::new();
    for class in &ctx.unit.classes {
        for f in &class.fields {
            let writes = ctx.table.declared(f.id).map_or(0, |s| s.write_count);
            if f.is_static && !f.is_final && writes == 0 {
                hits.push(Hit::new(
                    &f.name_span,
                    format!("{}.{} isn't final but should be", class.name, f.name),
                ));
            }
        }
    }
    hits
}

fn empty_block(ctx: &RuleContext) -> Vec<Hit> {
    let mut hits = Vec::new();
    for (_, m) in ctx.unit.methods() {
        walk(&m.body.stmts, &mut |s, _| match &s.kind {
            StmtKind::Try { body, catches, finally } => {
                if body.stmts.is_empty() {
                    hits.push(Hit::new(&s.span, "Avoid empty try blocks"));
                }
                for c in catches.iter().filter(|c| c.body.stmts.is_empty()) {
                    hits.push(Hit::new(&c.span, "Avoid empty catch blocks"));
                }
                if let Some(f) = finally.as_ref().filter(|f| f.stmts.is_empty()) {
                    hits.push(Hit::new(&f.span, "Avoid empty finally blocks"));
                }
            }
            StmtKind::Switch { arms, .. } if arms.iter().all(|a| a.body.is_empty()) => {
                hits.push(Hit::new(&s.span, "Avoid empty switch statements"));
            }
            StmtKind::If { then_branch, .. } if is_empty_body(then_branch) => {
                hits.push(Hit::new(&s.span, "Avoid empty if statements"));
            }
            StmtKind::While { body, .. } if is_empty_body(body) => {
                hits.push(Hit::new(&s.span, "Avoid empty while statements"));
            }
            _ => {}
        });
    }
    hits
}

// Naming. Each violated check is its own finding, so one name can produce
// several.

fn starts_upper(name: &str) -> bool {
    name.chars().next().is_some_and(|c| c.is_ascii_uppercase())
}

fn starts_lower(name: &str) -> bool {
    name.chars().next().is_some_and(|c| c.is_ascii_lowercase())
}

/// `pFirst`, `sName`: one lowercase letter followed by an uppercase one.
fn has_letter_prefix(name: &str) -> bool {
    let mut cs = name.chars();
    matches!((cs.next(), cs.next()), (Some(a), Some(b)) if a.is_ascii_lowercase() && b.is_ascii_uppercase())
}

fn method_naming(ctx: &RuleContext) -> Vec<Hit> {
    let mut hits = Vec::new();
    for (_, m) in ctx.unit.methods().filter(|(_, m)| !m.is_constructor) {
        if m.name.contains('_') {
            hits.push(Hit::new(
                &m.name_span,
                format!("Method names should not contain underscores: '{}'", m.name),
            ));
        }
        if !starts_lower(&m.name) {
            hits.push(Hit::new(
                &m.name_span,
                format!("Method name does not begin with a lower case character: '{}'", m.name),
            ));
        }
    }
    hits
}

fn parameter_naming(ctx: &RuleContext) -> Vec<Hit> {
    let mut hits = Vec::new();
    for (_, m) in ctx.unit.methods() {
        for p in &m.params {
            if p.name.contains('_') {
                hits.push(Hit::new(
                    &p.span,
                    format!("Parameter names should not contain underscores: '{}'", p.name),
                ));
            }
            if !starts_lower(&p.name) {
                hits.push(Hit::new(
                    &p.span,
                    format!(
                        "Parameter name does not begin with a lower case character: '{}'",
                        p.name
                    ),
                ));
            }
            if has_letter_prefix(&p.name) {
                hits.push(Hit::new(
                    &p.span,
                    format!("Parameter name uses a one-letter prefix: '{}'", p.name),
                ));
            }
        }
    }
    hits
}

fn class_naming(ctx: &RuleContext) -> Vec<Hit> {
    let mut hits = Vec::new();
    for c in &ctx.unit.classes {
        if !starts_upper(&c.name) {
            hits.push(Hit::new(
                &c.name_span,
                format!("Class names should begin with an uppercase character: '{}'", c.name),
            ));
        }
        if c.name.contains('_') {
            hits.push(Hit::new(
                &c.name_span,
                format!("Class names should not contain underscores: '{}'", c.name),
            ));
        }
    }
    hits
}

fn no_package(ctx: &RuleContext) -> Vec<Hit> {
    if ctx.unit.package.is_some() {
        return Vec::new();
    }
    let span = ctx.unit.classes.first().map_or_else(
        || SourceSpan::new(ctx.unit.file.clone(), 1, 1, 1, 1),
        |c| c.name_span.clone(),
    );
    vec![Hit::new(&span, "All classes should belong to a named package")]
}

fn system_println(ctx: &RuleContext) -> Vec<Hit> {
    let mut hits = Vec::new();
    all_exprs(ctx.unit, &mut |e| {
        if builtin_name(ctx, e) == Some("println") {
            hits.push(Hit::new(&e.span, "System.out.println is used"));
        }
    });
    hits
}

fn do_not_use_threads(ctx: &RuleContext) -> Vec<Hit> {
    ctx.unit
        .classes
        .iter()
        .filter(|c| c.is_builtin_thread_subclass)
        .map(|c| Hit::new(&c.name_span, format!("{} extends Thread; avoid raw threads", c.name)))
        .collect()
}

fn argument_could_be_final(ctx: &RuleContext) -> Vec<Hit> {
    let mut hits = Vec::new();
    for (_, m) in ctx.unit.methods() {
        for p in &m.params {
            let writes = ctx.table.declared(p.id).map_or(0, |s| s.write_count);
            if !p.is_final && writes == 0 {
                hits.push(Hit::new(
                    &p.span,
                    format!("Parameter '{}' is not assigned and could be declared final", p.name),
                ));
            }
        }
    }
    hits
}

fn unreachable_code(ctx: &RuleContext) -> Vec<Hit> {
    let mut by_method: BTreeMap<String, SourceSpan> = BTreeMap::new();
    for cfg in ctx.cfgs {
        let closure = reachability(cfg);
        let first = unreachable_nodes(cfg, &closure)
            .into_iter()
            .flat_map(|b| cfg.blocks[b].instructions.iter())
            .map(|i| &i.span)
            .min_by_key(|s| s.start());
        if let Some(span) = first {
            by_method.insert(cfg.method.clone(), span.clone());
        }
    }
    by_method
        .into_iter()
        .map(|(m, span)| Hit::new(&span, format!("Unreachable code in {m}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::{analyze_unit, Finding, RuleSet};
    use crate::frontend::parse_source;

    fn run(src: &str) -> Vec<Finding> {
        let u = parse_source(src, "t.sl").unwrap();
        analyze_unit(&u, &RuleSet::default())
    }

    fn of<'a>(f: &'a [Finding], rule: &str) -> Vec<&'a Finding> {
        f.iter().filter(|x| x.rule_id == rule).collect()
    }

    fn lines(f: &[Finding], rule: &str) -> Vec<u32> {
        of(f, rule).iter().map(|x| x.span.line).collect()
    }

    #[test]
    fn readline_dereference() {
        let f = run("class A { static void m() {\n String s = readLine();\n println(s.trim());\n } }");
        assert_eq!(lines(&f, "NP_DEREFERENCE_OF_READLINE_VALUE"), [3]);
        let f = run("class A { static void m() {\n String s = readLine();\n if (s != null) println(s.trim());\n } }");
        assert!(lines(&f, "NP_DEREFERENCE_OF_READLINE_VALUE").is_empty());
        let f = run("class A { static void m() {\n String s = readLine();\n if (s != null && s.trim() == \"\") println(1);\n } }");
        assert!(lines(&f, "NP_DEREFERENCE_OF_READLINE_VALUE").is_empty());
        let f = run("class A { static void m() {\n int v = parseInt(readLine());\n } }");
        assert_eq!(lines(&f, "NP_DEREFERENCE_OF_READLINE_VALUE"), [2]);
        let f = run("class A { static void m() {\n String s = readLine();\n s = \"x\";\n println(s.trim());\n } }");
        assert!(lines(&f, "NP_DEREFERENCE_OF_READLINE_VALUE").is_empty());
    }

    #[test]
    fn recursion_and_circular_ctors() {
        let f = run("class A { void f() { g(); } void g() { if (1) f(); } void h() { if (x()) h(); } boolean x() { return true; } }");
        assert_eq!(of(&f, "InfiniteRecursion").len(), 1);
        let f = run("class Building { Lift lift; Building() { lift = new Lift(); } }\n\
             class Lift { Building b; Lift() { b = new Building(); } }");
        assert_eq!(of(&f, "CircularDependency").len(), 1);
        assert!(of(&f, "InfiniteRecursion").is_empty());
    }

    #[test]
    fn equals_without_hashcode() {
        let f = run("class A { boolean equals(Object o) { return true; } }\nclass B { boolean equals(Object o) { return true; } int hashCode() { return 1; } }");
        assert_eq!(lines(&f, "EqualsHashcodeMismatch"), [1]);
    }

    #[test]
    fn ignored_stream_read() {
        let f = run("class A { void m(byte[] b) {\n Stream s = open(\"f\");\n s.read(b, 0, 1);\n int n = s.read(b, 0, 1);\n readLine();\n s.close();\n } }");
        assert_eq!(lines(&f, "IgnoredReturnValue"), [3, 5]);
    }

    #[test]
    fn waits_and_lock_order() {
        let f = run("class A { Object a; Object b;\n void m() { synchronized (a) {\n wait();\n if (1 > 0) wait();\n } }\n void n() { synchronized (a) { synchronized (b) { } } }\n void o() { synchronized (b) {\n synchronized (a) { } } } }");
        assert_eq!(lines(&f, "UnconditionalWait"), [3]);
        assert_eq!(lines(&f, "DeadlockOrder"), [8]);
    }

    #[test]
    fn string_compare_and_unused() {
        let f = run("class A { void m(String s) {\n int z;\n int used = 1;\n if (s == toString(used)) println(s);\n if (s == null) return;\n } }");
        assert_eq!(lines(&f, "StringEqualityOperator"), [4]);
        assert_eq!(lines(&f, "UnusedLocalVariable"), [2]);
    }

    #[test]
    fn stream_closing() {
        let leak_on_catch = "class A { void m(byte[] b) {\n try {\n Stream s = open(\"f\");\n int n = s.read(b, 0, 1);\n s.close();\n } catch (Exception e) {\n println(1);\n }\n } }";
        assert_eq!(lines(&run(leak_on_catch), "StreamNotClosed"), [6]);
        let finally_closes = "class A { void m(byte[] b) {\n Stream s = open(\"f\");\n try {\n int n = s.read(b, 0, 1);\n } catch (Exception e) {\n println(1);\n } finally {\n s.close();\n }\n } }";
        assert!(lines(&run(finally_closes), "StreamNotClosed").is_empty());
        let never = "class A { void m() {\n Stream s = open(\"f\");\n println(1);\n } }";
        assert_eq!(lines(&run(never), "StreamNotClosed"), [2]);
        let straight = "class A { void m() {\n Stream s = open(\"f\");\n s.close();\n } }";
        assert!(lines(&run(straight), "StreamNotClosed").is_empty());
        let branch = "class A { void m(int c) {\n Stream s = open(\"f\");\n if (c > 0) s.close();\n } }";
        assert_eq!(lines(&run(branch), "StreamNotClosed"), [2]);
    }

    #[test]
    fn redundant_null_checks() {
        let f = run("class P { }\nclass F { P make() { return new P(); } }\nclass T { void m(F f) {\n P p = null;\n p = f.make();\n assertTrue(p != null);\n P q = new P();\n if (q == null) return;\n P r = null;\n if (r == null) return;\n } }");
        assert_eq!(lines(&f, "RedundantNullCheck"), [6, 8]);
    }

    #[test]
    fn static_fields_and_empty_blocks() {
        let f = run("class A { static int N = 8; static final int M = 1; static int k = 0;\n void m() { k = 2;\n if (k > 1) { }\n while (k > 3);\n try { } catch (Exception e) { } finally { }\n switch (k) { }\n } }");
        assert_eq!(lines(&f, "StaticFieldCouldBeFinal"), [1]);
        assert_eq!(of(&f, "EmptyBlock").len(), 6);
    }

    #[test]
    fn naming_checks_are_counted_separately() {
        let f = run("class bad_Name { void WRITE_SOMETHING(String INPUT_PARAMETER, int pFirst, int ok) { } void fine(int x) { } }");
        assert_eq!(of(&f, "MethodNamingConventions").len(), 2);
        assert_eq!(of(&f, "ParameterNameConvention").len(), 3);
        assert_eq!(of(&f, "ClassNamingConvention").len(), 2);
    }

    #[test]
    fn threads_package_println_finals() {
        let f = run(
            "class Y extends Thread { Y(String s) { super(s); } void w(final int a, int b) { b = 2; println(a); } }",
        );
        assert_eq!(of(&f, "DoNotUseThreads").len(), 1);
        assert_eq!(of(&f, "NoPackage").len(), 1);
        assert_eq!(of(&f, "SystemPrintln").len(), 1);
        let finals: Vec<_> = of(&f, "MethodArgumentCouldBeFinal")
            .iter()
            .map(|x| x.message.clone())
            .collect();
        assert_eq!(finals.len(), 1);
        assert!(finals[0].contains("'s'"));
    }

    #[test]
    fn dead_code_reported_once_per_method() {
        let f = run("class A { void m(int c) {\n return;\n c = 1;\n c = 2;\n } void n() { } }");
        assert_eq!(lines(&f, "UnreachableCode"), [3]);
    }
}
