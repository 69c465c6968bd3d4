use std::collections::{BTreeMap, HashMap};

use crate::frontend::pretty::expr_to_string;
use crate::frontend::visit::{for_each_expr, for_each_subexpr};
use crate::frontend::*;
use crate::semantics::{SymbolId, SymbolKind, SymbolTable, Type};

use super::range::{lower_from, upper_from, Bound, Interval};
use super::*;

const MAX_DEPTH: usize = 8;

/// Enclosing construct of an array access, outermost first.
#[derive(Clone, Copy)]
enum Ctx<'a> {
    Loop {
        stmt: &'a Stmt,
        /// The access sits in the loop condition or update.
        head: bool,
        /// Index of the top-level body statement holding the access.
        body_pos: Option<usize>,
    },
    Guard {
        cond: &'a Expr,
        positive: bool,
        region: &'a Stmt,
    },
}

struct Access<'a> {
    expr: &'a Expr,
    index: &'a Expr,
    array: SymbolId,
    ctx: Vec<Ctx<'a>>,
}

/// Shape of an index expression.
enum Form {
    Constant(i64),
    Var(SymbolId, i64),
    Other,
}

pub(super) struct Analyzer<'a> {
    t: &'a SymbolTable,
    inits: HashMap<SymbolId, &'a Expr>,
    assigns: Vec<&'a Expr>,
    names: Vec<&'a Expr>,
    accesses: Vec<Access<'a>>,
    arrays: Vec<ArrayDecl>,
    by_symbol: HashMap<SymbolId, usize>,
    params: HashMap<SymbolId, SourceSpan>,
}

pub fn find_arrays(unit: &CompilationUnit, table: &SymbolTable) -> Vec<ArrayDecl> {
    Analyzer::new(unit, table).arrays
}

pub fn track_index_vars(unit: &CompilationUnit, table: &SymbolTable) -> Vec<IndexVarInfo> {
    Analyzer::new(unit, table).index_vars()
}

pub fn check_loops(unit: &CompilationUnit, table: &SymbolTable) -> Vec<LoopLimitCheck> {
    Analyzer::new(unit, table).loop_checks()
}

impl<'a> Analyzer<'a> {
    pub(super) fn new(unit: &'a CompilationUnit, t: &'a SymbolTable) -> Self {
        let mut a = Analyzer {
            t,
            inits: HashMap::new(),
            assigns: Vec::new(),
            names: Vec::new(),
            accesses: Vec::new(),
            arrays: Vec::new(),
            by_symbol: HashMap::new(),
            params: HashMap::new(),
        };
        for class in &unit.classes {
            for f in &class.fields {
                if let (Some(init), Some(&sym)) = (&f.init, t.declarations.get(&f.id)) {
                    a.inits.insert(sym, init);
                    a.exprs(init, &[]);
                }
            }
            for m in &class.methods {
                for p in &m.params {
                    if let Some(&sym) = t.declarations.get(&p.id) {
                        a.params.insert(sym, p.span.clone());
                    }
                }
                let mut ctx = Vec::new();
                for s in &m.body.stmts {
                    a.stmt(s, &mut ctx);
                }
            }
        }
        a.collect_arrays();
        a
    }

    // ---- collection --------------------------------------------------------

    fn sym_of(&self, e: &Expr) -> Option<SymbolId> {
        match e.kind {
            ExprKind::Name(_) | ExprKind::FieldAccess { .. } => self.t.resolutions.get(&e.id).copied(),
            _ => None,
        }
    }

    fn is_array(&self, sym: SymbolId) -> bool {
        let s = self.t.symbol(sym);
        matches!(s.ty, Type::Array(_)) && matches!(s.kind, SymbolKind::Field | SymbolKind::Local | SymbolKind::Param)
    }

    fn exprs(&mut self, e: &'a Expr, ctx: &[Ctx<'a>]) {
        for_each_subexpr(e, &mut |x: &'a Expr| match &x.kind {
            ExprKind::Assign { .. } => self.assigns.push(x),
            ExprKind::Name(_) => self.names.push(x),
            ExprKind::Index { array, index } => {
                if let Some(sym) = self.sym_of(array).filter(|&s| self.is_array(s)) {
                    self.accesses.push(Access {
                        expr: x,
                        index,
                        array: sym,
                        ctx: ctx.to_vec(),
                    });
                }
            }
            _ => {}
        });
    }

    fn stmt(&mut self, s: &'a Stmt, ctx: &mut Vec<Ctx<'a>>) {
        match &s.kind {
            StmtKind::Block(b) => {
                for x in &b.stmts {
                    self.stmt(x, ctx);
                }
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                self.exprs(cond, ctx);
                self.guarded(cond, true, then_branch, ctx);
                if let Some(e) = else_branch {
                    self.guarded(cond, false, e, ctx);
                }
            }
            StmtKind::While { cond, body } => {
                self.loop_parts(s, Some(cond), None, body, ctx);
            }
            StmtKind::For {
                init,
                cond,
                update,
                body,
            } => {
                if let Some(i) = init {
                    self.stmt(i, ctx);
                }
                self.loop_parts(s, cond.as_ref(), update.as_ref(), body, ctx);
            }
            StmtKind::Switch { scrutinee, arms, .. } => {
                self.exprs(scrutinee, ctx);
                for arm in arms {
                    if let Some(l) = &arm.label {
                        self.exprs(l, ctx);
                    }
                    for x in &arm.body {
                        self.stmt(x, ctx);
                    }
                }
            }
            StmtKind::Try { body, catches, finally } => {
                let blocks = std::iter::once(body)
                    .chain(catches.iter().map(|c| &c.body))
                    .chain(finally.iter());
                for b in blocks {
                    for x in &b.stmts {
                        self.stmt(x, ctx);
                    }
                }
            }
            StmtKind::Synchronized { monitor, body } => {
                self.exprs(monitor, ctx);
                for x in &body.stmts {
                    self.stmt(x, ctx);
                }
            }
            StmtKind::Return(Some(e)) | StmtKind::Expr(e) => self.exprs(e, ctx),
            StmtKind::LocalDecl { init, .. } => {
                if let Some(e) = init {
                    if let Some(&sym) = self.t.declarations.get(&s.id) {
                        self.inits.insert(sym, e);
                    }
                    self.exprs(e, ctx);
                }
            }
            StmtKind::Assert { cond, message } => {
                self.exprs(cond, ctx);
                if let Some(m) = message {
                    self.exprs(m, ctx);
                }
            }
            StmtKind::Return(None) | StmtKind::Empty => {}
        }
    }

    fn guarded(&mut self, cond: &'a Expr, positive: bool, region: &'a Stmt, ctx: &mut Vec<Ctx<'a>>) {
        ctx.push(Ctx::Guard { cond, positive, region });
        self.stmt(region, ctx);
        ctx.pop();
    }

    fn loop_parts(
        &mut self,
        s: &'a Stmt,
        cond: Option<&'a Expr>,
        update: Option<&'a Expr>,
        body: &'a Stmt,
        ctx: &mut Vec<Ctx<'a>>,
    ) {
        ctx.push(Ctx::Loop {
            stmt: s,
            head: true,
            body_pos: None,
        });
        if let Some(c) = cond {
            self.exprs(c, ctx);
        }
        if let Some(u) = update {
            self.exprs(u, ctx);
        }
        ctx.pop();
        ctx.push(Ctx::Loop {
            stmt: s,
            head: false,
            body_pos: None,
        });
        if let Some(c) = cond {
            ctx.push(Ctx::Guard {
                cond: c,
                positive: true,
                region: s,
            });
        }
        let loop_at = ctx.len() - 1 - usize::from(cond.is_some());
        match &body.kind {
            StmtKind::Block(b) => {
                for (k, x) in b.stmts.iter().enumerate() {
                    if let Ctx::Loop { body_pos, .. } = &mut ctx[loop_at] {
                        *body_pos = Some(k);
                    }
                    self.stmt(x, ctx);
                }
            }
            _ => {
                if let Ctx::Loop { body_pos, .. } = &mut ctx[loop_at] {
                    *body_pos = Some(0);
                }
                self.stmt(body, ctx);
            }
        }
        if cond.is_some() {
            ctx.pop();
        }
        ctx.pop();
    }

    fn collect_arrays(&mut self) {
        let mut refs: BTreeMap<SymbolId, Vec<ArrayRef>> = BTreeMap::new();
        for a in &self.accesses {
            refs.entry(a.array).or_default().push(ArrayRef {
                node: a.expr.id,
                span: a.expr.span.clone(),
            });
        }
        let mut syms: Vec<SymbolId> = self
            .t
            .symbols
            .iter()
            .filter(|s| !s.builtin && self.is_array(s.id))
            .map(|s| s.id)
            .collect();
        syms.sort_by(|a, b| {
            let (x, y) = (&self.t.symbol(*a).span, &self.t.symbol(*b).span);
            (x.line, x.column).cmp(&(y.line, y.column))
        });
        for sym in syms {
            let s = self.t.symbol(sym);
            let size = self.array_size(sym);
            self.by_symbol.insert(sym, self.arrays.len());
            self.arrays.push(ArrayDecl {
                symbol: sym,
                name: s.name.clone(),
                size,
                decl_span: s.span.clone(),
                references: refs.remove(&sym).unwrap_or_default(),
            });
        }
    }

    fn allocation_sizes(&self, sym: SymbolId) -> Vec<&'a Expr> {
        let from_init = self.inits.get(&sym).copied();
        let from_assign = self.assigns.iter().filter_map(|e| match &e.kind {
            ExprKind::Assign { target, value } if self.sym_of(target) == Some(sym) => Some(&**value),
            _ => None,
        });
        from_init
            .into_iter()
            .chain(from_assign)
            .filter_map(|v| match &v.kind {
                ExprKind::NewArray { size, .. } => Some(&**size),
                _ => None,
            })
            .collect()
    }

    /// Smallest constant allocation, else the first variable one.
    fn array_size(&self, sym: SymbolId) -> ArraySize {
        let sizes = self.allocation_sizes(sym);
        if sizes.is_empty() {
            return ArraySize::Unknown;
        }
        let consts: Vec<Option<i64>> = sizes.iter().map(|e| self.const_expr(e, 0)).collect();
        if consts.iter().all(Option::is_some) {
            return ArraySize::Constant(consts.into_iter().flatten().min().unwrap_or(0));
        }
        let e = sizes
            .iter()
            .zip(&consts)
            .find(|(_, c)| c.is_none())
            .map(|(e, _)| *e)
            .unwrap_or(sizes[0]);
        ArraySize::Variable {
            expr: expr_to_string(e),
            symbol: self.sym_of(e),
        }
    }

    // ---- constants and writes ---------------------------------------------

    /// Value of an integer expression built from literals and never-written
    /// initialized variables.
    fn const_expr(&self, e: &Expr, depth: usize) -> Option<i64> {
        if depth > MAX_DEPTH {
            return None;
        }
        match &e.kind {
            ExprKind::Literal(Literal::Int(v)) => Some(*v),
            ExprKind::Unary { op: UnOp::Neg, operand } => self.const_expr(operand, depth + 1).map(|v| -v),
            ExprKind::Binary { op, lhs, rhs } => {
                let (a, b) = (self.const_expr(lhs, depth + 1)?, self.const_expr(rhs, depth + 1)?);
                match op {
                    BinOp::Add => a.checked_add(b),
                    BinOp::Sub => a.checked_sub(b),
                    BinOp::Mul => a.checked_mul(b),
                    _ => None,
                }
            }
            ExprKind::Name(_) | ExprKind::FieldAccess { .. } => {
                let sym = self.sym_of(e)?;
                self.const_var(sym, depth + 1)
            }
            _ => None,
        }
    }

    fn const_var(&self, sym: SymbolId, depth: usize) -> Option<i64> {
        let s = self.t.symbol(sym);
        if s.write_count > 0 || !matches!(s.kind, SymbolKind::Local | SymbolKind::Field) {
            return None;
        }
        if !matches!(s.ty, Type::Int | Type::Byte) {
            return None;
        }
        self.const_expr(self.inits.get(&sym)?, depth)
    }

    fn writes_in_expr(&self, e: &'a Expr, v: SymbolId) -> Vec<&'a Expr> {
        let mut out = Vec::new();
        for_each_subexpr(e, &mut |x: &'a Expr| {
            if let ExprKind::Assign { target, .. } = &x.kind {
                if self.sym_of(target) == Some(v) {
                    out.push(x);
                }
            }
        });
        out
    }

    fn writes_in_stmt(&self, s: &'a Stmt, v: SymbolId) -> Vec<&'a Expr> {
        let mut out = Vec::new();
        for_each_expr(s, &mut |x: &'a Expr| {
            if let ExprKind::Assign { target, .. } = &x.kind {
                if self.sym_of(target) == Some(v) {
                    out.push(x);
                }
            }
        });
        out
    }

    /// `v = v + c` or `v = v - c` gives `Some(±c)`.
    fn step_of(&self, e: &Expr, v: SymbolId) -> Option<i64> {
        let ExprKind::Assign { target, value } = &e.kind else {
            return None;
        };
        if self.sym_of(target) != Some(v) {
            return None;
        }
        let ExprKind::Binary { op, lhs, rhs } = &value.kind else {
            return None;
        };
        let is_v = |x: &Expr| self.sym_of(x) == Some(v);
        let step = match op {
            BinOp::Add if is_v(lhs) => self.const_expr(rhs, 0)?,
            BinOp::Add if is_v(rhs) => self.const_expr(lhs, 0)?,
            BinOp::Sub if is_v(lhs) => -self.const_expr(rhs, 0)?,
            _ => return None,
        };
        (step != 0).then_some(step)
    }

    // ---- interval evaluation ----------------------------------------------

    fn form(&self, e: &Expr) -> Form {
        match &e.kind {
            ExprKind::Literal(Literal::Int(v)) => Form::Constant(*v),
            ExprKind::Unary { op: UnOp::Neg, operand } => match self.form(operand) {
                Form::Constant(c) => Form::Constant(-c),
                _ => Form::Other,
            },
            ExprKind::Name(_) | ExprKind::FieldAccess { .. } => match self.sym_of(e) {
                Some(sym) => match self.const_var(sym, 0) {
                    Some(c) => Form::Constant(c),
                    None if matches!(self.t.symbol(sym).ty, Type::Int | Type::Byte) => Form::Var(sym, 0),
                    None => Form::Other,
                },
                None => Form::Other,
            },
            ExprKind::Binary { op, lhs, rhs } if matches!(op, BinOp::Add | BinOp::Sub) => {
                let sign = if *op == BinOp::Sub { -1 } else { 1 };
                match (self.form(lhs), self.form(rhs)) {
                    (Form::Constant(a), Form::Constant(b)) => Form::Constant(a + sign * b),
                    (Form::Var(v, k), Form::Constant(c)) => Form::Var(v, k + sign * c),
                    (Form::Constant(c), Form::Var(v, k)) if sign == 1 => Form::Var(v, k + c),
                    _ => Form::Other,
                }
            }
            _ => Form::Other,
        }
    }

    fn eval(&self, e: &'a Expr, ctx: &[Ctx<'a>], arr: &ArrayDecl, depth: usize) -> Interval {
        if depth > MAX_DEPTH {
            return Interval::TOP;
        }
        if let Some(c) = self.const_expr(e, 0) {
            return Interval::point(Bound::Const(c));
        }
        match &e.kind {
            ExprKind::FieldAccess { object, field } if field == "length" => match self.sym_of(object) {
                Some(s) if s == arr.symbol => match arr.size {
                    ArraySize::Constant(n) => Interval::point(Bound::Const(n)),
                    _ => Interval::point(Bound::Size(0)),
                },
                Some(s) => match self.by_symbol.get(&s).map(|&i| &self.arrays[i].size) {
                    Some(ArraySize::Constant(n)) => Interval::point(Bound::Const(*n)),
                    _ => Interval::TOP,
                },
                None => Interval::TOP,
            },
            ExprKind::Name(_) | ExprKind::FieldAccess { .. } => match self.sym_of(e) {
                Some(sym) => self.var_range(sym, ctx, arr, depth + 1),
                None => Interval::TOP,
            },
            ExprKind::Binary { op, lhs, rhs } if matches!(op, BinOp::Add | BinOp::Sub) => {
                let sign = if *op == BinOp::Sub { -1 } else { 1 };
                if let Some(c) = self.const_expr(rhs, 0) {
                    self.eval(lhs, ctx, arr, depth + 1).shift(sign * c)
                } else if let (Some(c), 1) = (self.const_expr(lhs, 0), sign) {
                    self.eval(rhs, ctx, arr, depth + 1).shift(c)
                } else {
                    Interval::TOP
                }
            }
            _ => Interval::TOP,
        }
    }

    fn is_size_symbol(&self, v: SymbolId, arr: &ArrayDecl) -> bool {
        matches!(arr.size, ArraySize::Variable { symbol: Some(s), .. } if s == v)
    }

    /// Range of `v` at the point described by `ctx`.
    fn var_range(&self, v: SymbolId, ctx: &[Ctx<'a>], arr: &ArrayDecl, depth: usize) -> Interval {
        if depth > MAX_DEPTH {
            return Interval::TOP;
        }
        let loop_pos = self.modifying_loop(v, ctx);
        let (mut iv, from) = match loop_pos {
            Some(p) => (self.loop_range(v, ctx, p, arr, depth), p + 1),
            None => {
                let base = if let Some(c) = self.const_var(v, 0) {
                    Interval::point(Bound::Const(c))
                } else if self.is_size_symbol(v, arr) {
                    Interval::point(Bound::Size(0))
                } else {
                    Interval::TOP
                };
                (base, 0)
            }
        };
        for (g, c) in ctx.iter().enumerate().skip(from) {
            if let Ctx::Guard { cond, positive, region } = *c {
                if self.writes_in_stmt(region, v).is_empty() {
                    iv = self.refine(iv, v, cond, positive, &ctx[..g], arr, depth);
                }
            }
        }
        iv
    }

    fn modifying_loop(&self, v: SymbolId, ctx: &[Ctx<'a>]) -> Option<usize> {
        ctx.iter().rposition(|c| match *c {
            Ctx::Loop { stmt, .. } => !self.writes_in_stmt(stmt, v).is_empty(),
            Ctx::Guard { .. } => false,
        })
    }

    /// Conjuncts of a condition.
    fn conjuncts(cond: &'a Expr) -> Vec<&'a Expr> {
        match &cond.kind {
            ExprKind::Binary {
                op: BinOp::And,
                lhs,
                rhs,
            } => {
                let mut out = Self::conjuncts(lhs);
                out.extend(Self::conjuncts(rhs));
                out
            }
            _ => vec![cond],
        }
    }

    /// `v + k op e` rewritten as `(v op e) shifted by -k`, with `v` moved
    /// to the left.
    fn constraint(&self, c: &'a Expr, v: SymbolId) -> Option<(BinOp, &'a Expr, i64)> {
        let ExprKind::Binary { op, lhs, rhs } = &c.kind else {
            return None;
        };
        if !op.is_comparison() && !matches!(op, BinOp::Eq) {
            return None;
        }
        let offset = |e: &Expr| match self.form(e) {
            Form::Var(s, k) if s == v => Some(k),
            _ => None,
        };
        if let Some(k) = offset(lhs) {
            Some((*op, rhs, -k))
        } else if let Some(k) = offset(rhs) {
            let flipped = match op {
                BinOp::Lt => BinOp::Gt,
                BinOp::Le => BinOp::Ge,
                BinOp::Gt => BinOp::Lt,
                BinOp::Ge => BinOp::Le,
                other => *other,
            };
            Some((flipped, lhs, -k))
        } else {
            None
        }
    }

    fn apply(&self, iv: Interval, op: BinOp, e: Interval) -> Interval {
        match op {
            BinOp::Lt => iv.meet_hi(upper_from(e, true)),
            BinOp::Le => iv.meet_hi(upper_from(e, false)),
            BinOp::Gt => iv.meet_lo(lower_from(e, true)),
            BinOp::Ge => iv.meet_lo(lower_from(e, false)),
            BinOp::Eq => iv.meet_hi(e.hi).meet_lo(e.lo),
            _ => iv,
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn refine(
        &self,
        iv: Interval,
        v: SymbolId,
        cond: &'a Expr,
        positive: bool,
        ctx: &[Ctx<'a>],
        arr: &ArrayDecl,
        depth: usize,
    ) -> Interval {
        if let ExprKind::Unary { op: UnOp::Not, operand } = &cond.kind {
            return self.refine(iv, v, operand, !positive, ctx, arr, depth);
        }
        if positive {
            Self::conjuncts(cond)
                .into_iter()
                .fold(iv, |iv, c| match self.constraint(c, v) {
                    Some((op, e, k)) => self.apply(iv, op, self.eval(e, ctx, arr, depth + 1).shift(k)),
                    None => iv,
                })
        } else {
            match self.constraint(cond, v) {
                Some((op, e, k)) => {
                    let negated = match op {
                        BinOp::Lt => BinOp::Ge,
                        BinOp::Le => BinOp::Gt,
                        BinOp::Gt => BinOp::Le,
                        BinOp::Ge => BinOp::Lt,
                        _ => return iv,
                    };
                    self.apply(iv, negated, self.eval(e, ctx, arr, depth + 1).shift(k))
                }
                None => iv,
            }
        }
    }

    /// Value of `v` on entry to the loop at `ctx[p]`, when `v` is a local
    /// with a constant initializer written only inside that loop.
    fn entry_value(&self, v: SymbolId, loop_stmt: &'a Stmt) -> Interval {
        let s = self.t.symbol(v);
        let inside = self.writes_in_stmt(loop_stmt, v).len() as u32;
        let init = self.inits.get(&v).and_then(|e| self.const_expr(e, 0));
        match init {
            Some(c) if s.kind == SymbolKind::Local && inside == s.write_count => Interval::point(Bound::Const(c)),
            _ => Interval::TOP,
        }
    }

    /// Start value, step and the loop-condition constraint on `v`.
    fn loop_shape(
        &self,
        v: SymbolId,
        ctx: &[Ctx<'a>],
        p: usize,
        arr: &ArrayDecl,
        depth: usize,
    ) -> Option<LoopShape<'a>> {
        let Ctx::Loop { stmt, .. } = ctx[p] else {
            return None;
        };
        let outer = &ctx[..p];
        let (cond, step, start) = match &stmt.kind {
            StmtKind::For {
                init,
                cond,
                update,
                body,
            } => {
                let in_body = !self.writes_in_stmt(body, v).is_empty()
                    || cond.as_ref().is_some_and(|c| !self.writes_in_expr(c, v).is_empty());
                let step = match update {
                    Some(u) if !in_body => self.step_of(u, v),
                    _ => None,
                };
                let start = match init.as_deref().map(|s| &s.kind) {
                    Some(StmtKind::LocalDecl { init: Some(e), .. })
                        if self.t.declarations.get(&init.as_ref().unwrap().id) == Some(&v) =>
                    {
                        self.eval(e, outer, arr, depth + 1)
                    }
                    Some(StmtKind::Expr(e)) => match &e.kind {
                        ExprKind::Assign { target, value } if self.sym_of(target) == Some(v) => {
                            self.eval(value, outer, arr, depth + 1)
                        }
                        _ => self.entry_value(v, stmt),
                    },
                    _ => self.entry_value(v, stmt),
                };
                (cond.as_ref(), step, start)
            }
            StmtKind::While { cond, body } => {
                let writes = self.writes_in_stmt(body, v);
                let steps: Vec<Option<i64>> = writes.iter().map(|w| self.step_of(w, v)).collect();
                let step = if steps.iter().all(|s| s.is_some_and(|k| k > 0)) {
                    Some(1)
                } else if steps.iter().all(|s| s.is_some_and(|k| k < 0)) {
                    Some(-1)
                } else {
                    None
                };
                let step = step.filter(|_| self.writes_in_expr(cond, v).is_empty());
                (Some(cond), step, self.entry_value(v, stmt))
            }
            _ => return None,
        };
        let step = step?;
        let limit = cond.and_then(|c| {
            Self::conjuncts(c).into_iter().find_map(|x| {
                let (op, e, k) = self.constraint(x, v)?;
                if k != 0 {
                    return None;
                }
                let fits = if step > 0 {
                    matches!(op, BinOp::Lt | BinOp::Le)
                } else {
                    matches!(op, BinOp::Gt | BinOp::Ge)
                };
                fits.then_some((op, e))
            })
        });
        Some(LoopShape {
            stmt,
            step,
            start,
            limit,
        })
    }

    fn loop_range(&self, v: SymbolId, ctx: &[Ctx<'a>], p: usize, arr: &ArrayDecl, depth: usize) -> Interval {
        let Ctx::Loop { stmt, head, body_pos } = ctx[p] else {
            return Interval::TOP;
        };
        let Some(shape) = self.loop_shape(v, ctx, p, arr, depth) else {
            return Interval::TOP;
        };
        // In a `while`, the condition only holds until the body first writes `v`.
        let cond_holds = !head
            && match &stmt.kind {
                StmtKind::While { body, .. } => {
                    let k = body_pos.unwrap_or(0);
                    match &body.kind {
                        StmtKind::Block(b) => b.stmts[..=k.min(b.stmts.len().saturating_sub(1))]
                            .iter()
                            .all(|s| self.writes_in_stmt(s, v).is_empty()),
                        _ => false,
                    }
                }
                _ => true,
            };
        let mut iv = if shape.step > 0 {
            Interval {
                lo: shape.start.lo,
                hi: Bound::PosInf,
            }
        } else {
            Interval {
                lo: Bound::NegInf,
                hi: shape.start.hi,
            }
        };
        if cond_holds {
            if let Some((op, e)) = shape.limit {
                iv = self.apply(iv, op, self.eval(e, &ctx[..p], arr, depth + 1));
            }
        }
        iv
    }

    // ---- results -----------------------------------------------------------

    fn array(&self, sym: SymbolId) -> &ArrayDecl {
        &self.arrays[self.by_symbol[&sym]]
    }

    fn loop_check(&self, v: SymbolId, ctx: &[Ctx<'a>], p: usize, arr: &ArrayDecl) -> LoopLimitCheck {
        let Ctx::Loop { stmt, .. } = ctx[p] else {
            unreachable!("loop position points at a loop")
        };
        let mut check = LoopLimitCheck {
            loop_span: stmt.span.clone(),
            loop_stmt: stmt.id,
            index_symbol: v,
            index_name: self.t.symbol(v).name.clone(),
            array: arr.symbol,
            comparison: None,
            limit: LoopLimit::Missing,
            verdict: LoopVerdict::UnvalidatedVariableLimit,
        };
        let Some(shape) = self.loop_shape(v, ctx, p, arr, 0) else {
            return check;
        };
        let Some((op, e)) = shape.limit else {
            return check;
        };
        check.comparison = Some(match op {
            BinOp::Lt => Comparison::Lt,
            BinOp::Le => Comparison::Le,
            BinOp::Gt => Comparison::Gt,
            _ => Comparison::Ge,
        });
        let lim = self.eval(e, &ctx[..p], arr, 1);
        check.limit = match self.const_expr(e, 0).or_else(|| lim.constant()) {
            Some(c) => LoopLimit::Constant(c),
            None => LoopLimit::Variable(expr_to_string(e)),
        };
        let n = arr.constant_size();
        let size_bound = match n {
            Some(n) => Bound::Const(n),
            None => Bound::Size(0),
        };
        let exceeds_hi = |b: Bound| match (b, n) {
            (Bound::Const(c), Some(n)) => c > n - 1,
            (Bound::Size(k), _) => k > -1,
            _ => true,
        };
        let below_zero = |b: Bound| match b {
            Bound::Const(c) => c < 0,
            Bound::Size(k) => k < 0,
            _ => true,
        };
        let is_constant = matches!(check.limit, LoopLimit::Constant(_));
        check.verdict = if shape.step > 0 {
            let hi = upper_from(lim, op == BinOp::Lt);
            if op == BinOp::Le && lim.hi == size_bound {
                LoopVerdict::OffByOne
            } else if hi == Bound::PosInf || (n.is_none() && matches!(hi, Bound::Const(_)) && !is_constant) {
                LoopVerdict::UnvalidatedVariableLimit
            } else if exceeds_hi(hi) {
                LoopVerdict::MayExceed
            } else if shape.start.lo == Bound::NegInf {
                LoopVerdict::UnvalidatedVariableLimit
            } else if below_zero(shape.start.lo) {
                LoopVerdict::MayExceed
            } else {
                LoopVerdict::Safe
            }
        } else {
            let lo = lower_from(lim, op == BinOp::Gt);
            if lo == Bound::NegInf || shape.start.hi == Bound::PosInf {
                LoopVerdict::UnvalidatedVariableLimit
            } else if below_zero(lo) || exceeds_hi(shape.start.hi) {
                LoopVerdict::MayExceed
            } else {
                LoopVerdict::Safe
            }
        };
        check
    }

    fn has_input_source(&self, v: SymbolId) -> bool {
        self.sites(v).iter().any(|s| s.kind == SiteKind::Input)
    }

    fn sites(&self, v: SymbolId) -> Vec<ModifyingSite> {
        let mut out = Vec::new();
        if let Some(span) = self.params.get(&v) {
            out.push(ModifyingSite {
                span: span.clone(),
                kind: SiteKind::Input,
            });
        }
        let classify = |value: &Expr| {
            let mut input = false;
            let mut own = false;
            for_each_subexpr(value, &mut |x| {
                if let ExprKind::Call { method, .. } = &x.kind {
                    input |= matches!(method.as_str(), "readLine" | "parseInt" | "parseDouble" | "read");
                }
                own |= self.sym_of(x) == Some(v);
            });
            if input {
                SiteKind::Input
            } else if own {
                SiteKind::Arithmetic
            } else {
                SiteKind::Assignment
            }
        };
        if let Some(init) = self.inits.get(&v) {
            if self.const_expr(init, 0).is_none() {
                out.push(ModifyingSite {
                    span: init.span.clone(),
                    kind: classify(init),
                });
            }
        }
        for a in &self.assigns {
            if let ExprKind::Assign { target, value } = &a.kind {
                if self.sym_of(target) == Some(v) {
                    out.push(ModifyingSite {
                        span: a.span.clone(),
                        kind: classify(value),
                    });
                }
            }
        }
        out.sort_by_key(|s| (s.span.line, s.span.column));
        out
    }

    /// Index interval of an access and whether it is provably in range.
    fn access_range(&self, a: &Access<'a>) -> (Interval, bool) {
        let arr = self.array(a.array);
        let iv = match self.form(a.index) {
            Form::Constant(c) => Interval::point(Bound::Const(c)),
            Form::Var(v, k) => self.var_range(v, &a.ctx, arr, 0).shift(k),
            Form::Other => Interval::TOP,
        };
        let min_len = self.min_length(&a.ctx, arr);
        (iv, iv.within(arr.constant_size(), min_len))
    }

    /// Whether `e` denotes the length of `arr`.
    fn is_length_of(&self, e: &Expr, arr: &ArrayDecl) -> bool {
        match &e.kind {
            ExprKind::FieldAccess { object, field } if field == "length" => self.sym_of(object) == Some(arr.symbol),
            _ => self.sym_of(e).is_some_and(|s| self.is_size_symbol(s, arr)),
        }
    }

    /// Smallest length of `arr` implied by enclosing guards such as
    /// `if (a.length > 3)`.
    fn min_length(&self, ctx: &[Ctx<'a>], arr: &ArrayDecl) -> Option<i64> {
        let mut best: Option<i64> = None;
        for c in ctx {
            let Ctx::Guard { cond, positive, .. } = *c else {
                continue;
            };
            let mut conds = vec![(cond, positive)];
            while let Some((cond, positive)) = conds.pop() {
                let (op, lhs, rhs) = match &cond.kind {
                    ExprKind::Unary { op: UnOp::Not, operand } => {
                        conds.push((operand, !positive));
                        continue;
                    }
                    ExprKind::Binary {
                        op: BinOp::And,
                        lhs,
                        rhs,
                    } if positive => {
                        conds.push((lhs, true));
                        conds.push((rhs, true));
                        continue;
                    }
                    ExprKind::Binary { op, lhs, rhs } => (*op, lhs, rhs),
                    _ => continue,
                };
                let (op, k) = if self.is_length_of(lhs, arr) {
                    (op, self.const_expr(rhs, 0))
                } else if self.is_length_of(rhs, arr) {
                    let flipped = match op {
                        BinOp::Lt => BinOp::Gt,
                        BinOp::Le => BinOp::Ge,
                        BinOp::Gt => BinOp::Lt,
                        BinOp::Ge => BinOp::Le,
                        other => other,
                    };
                    (flipped, self.const_expr(lhs, 0))
                } else {
                    continue;
                };
                let Some(k) = k else { continue };
                let op = if positive {
                    op
                } else {
                    match op {
                        BinOp::Lt => BinOp::Ge,
                        BinOp::Le => BinOp::Gt,
                        BinOp::Gt => BinOp::Le,
                        BinOp::Ge => BinOp::Lt,
                        BinOp::Ne => BinOp::Eq,
                        _ => continue,
                    }
                };
                let min = match op {
                    BinOp::Gt => k + 1,
                    BinOp::Ge | BinOp::Eq => k,
                    _ => continue,
                };
                best = Some(best.map_or(min, |b| b.max(min)));
            }
        }
        best
    }

    pub(super) fn index_vars(&self) -> Vec<IndexVarInfo> {
        let mut vars: BTreeMap<SymbolId, IndexVarInfo> = BTreeMap::new();
        for a in &self.accesses {
            let Form::Var(v, _) = self.form(a.index) else {
                continue;
            };
            let n = self.array(a.array).constant_size();
            let (_, safe) = self.access_range(a);
            let info = vars.entry(v).or_insert_with(|| IndexVarInfo {
                symbol: v,
                name: self.t.symbol(v).name.clone(),
                legal_range: (0, n.map(|n| n - 1)),
                occurrences: Vec::new(),
                modifying_sites: self.sites(v),
                v_marked: false,
            });
            if let (Some(n), Some(hi)) = (n, info.legal_range.1) {
                info.legal_range.1 = Some(hi.min(n - 1));
            } else if info.legal_range.1.is_none() {
                info.legal_range.1 = n.map(|n| n - 1);
            }
            info.v_marked |= !safe && !info.modifying_sites.is_empty();
        }
        for info in vars.values_mut() {
            info.occurrences = self.occurrences(info.symbol);
        }
        vars.into_values().collect()
    }

    fn occurrences(&self, v: SymbolId) -> Vec<SourceSpan> {
        let mut out: Vec<SourceSpan> = self
            .names
            .iter()
            .filter(|x| self.sym_of(x) == Some(v))
            .map(|x| x.span.clone())
            .collect();
        out.sort_by_key(|s| (s.line, s.column));
        out
    }

    pub(super) fn loop_checks(&self) -> Vec<LoopLimitCheck> {
        let mut out: Vec<LoopLimitCheck> = Vec::new();
        for a in &self.accesses {
            let Form::Var(v, _) = self.form(a.index) else {
                continue;
            };
            if let Some(p) = self.modifying_loop(v, &a.ctx) {
                let check = self.loop_check(v, &a.ctx, p, self.array(a.array));
                let dup = out
                    .iter()
                    .any(|c| (c.loop_stmt, c.index_symbol, c.array) == (check.loop_stmt, v, a.array));
                if !dup {
                    out.push(check);
                }
            }
        }
        out.sort_by_key(|c| (c.loop_span.line, c.loop_span.column, c.index_symbol, c.array));
        out
    }

    pub(super) fn findings(&self) -> Vec<BoundFinding> {
        let mut out = Vec::new();
        let mut zero_reported = Vec::new();
        for a in &self.accesses {
            let arr = self.array(a.array);
            let (iv, safe) = self.access_range(a);
            if safe {
                continue;
            }
            let n = arr.constant_size();
            let mut push = |kind: BoundFindingKind, detail: String| {
                out.push(BoundFinding {
                    kind,
                    span: a.expr.span.clone(),
                    array: arr.symbol,
                    array_name: arr.name.clone(),
                    reference: a.expr.id,
                    detail,
                });
            };
            let legal = match n {
                Some(n) => format!("[0, {}]", n - 1),
                None => format!("[0, {}.length - 1]", arr.name),
            };
            let text = expr_to_string(a.expr);
            match self.form(a.index) {
                Form::Constant(c) => {
                    if c < 0 || n.is_some_and(|n| c >= n) {
                        push(
                            BoundFindingKind::IndexOutOfLegalRange,
                            format!("constant index {c} in `{text}` outside legal range {legal}"),
                        );
                    }
                }
                Form::Var(v, _) => {
                    let name = &self.t.symbol(v).name;
                    match self.modifying_loop(v, &a.ctx) {
                        Some(p) => {
                            let check = self.loop_check(v, &a.ctx, p, arr);
                            let limit = match (&check.comparison, &check.limit) {
                                (Some(c), LoopLimit::Constant(k)) => format!("{name} {} {k}", c.symbol()),
                                (Some(c), LoopLimit::Variable(e)) => format!("{name} {} {e}", c.symbol()),
                                _ => format!("no limit on {name}"),
                            };
                            match check.verdict {
                                LoopVerdict::OffByOne => push(
                                    BoundFindingKind::OffByOneLoop,
                                    format!(
                                        "loop runs `{limit}` but the largest valid index of `{}` is {}",
                                        arr.name,
                                        legal.trim_start_matches("[0, ").trim_end_matches(']')
                                    ),
                                ),
                                LoopVerdict::MayExceed | LoopVerdict::Safe => push(
                                    BoundFindingKind::IndexOutOfLegalRange,
                                    format!("`{text}` ranges over {iv}, outside legal range {legal}"),
                                ),
                                LoopVerdict::UnvalidatedVariableLimit => {
                                    push(
                                        BoundFindingKind::VariableLimitUnchecked,
                                        format!(
                                            "loop limit ({limit}) is not checked against the length of `{}`",
                                            arr.name
                                        ),
                                    );
                                    if check.limit == LoopLimit::Missing || self.has_input_source(v) {
                                        push(
                                            BoundFindingKind::UnvalidatedIndexSource,
                                            format!("index `{name}` in `{text}` is modified without validation against {legal}"),
                                        );
                                    }
                                }
                            }
                        }
                        None => push(
                            BoundFindingKind::UnvalidatedIndexSource,
                            format!("index `{name}` in `{text}` ranges over {iv}, not validated against {legal}"),
                        ),
                    }
                }
                Form::Other => push(
                    BoundFindingKind::UnvalidatedIndexSource,
                    format!("index expression in `{text}` is not validated against {legal}"),
                ),
            }
            let size_guarded = matches!(iv.hi, Bound::Size(_));
            if n.is_none() && !size_guarded && !zero_reported.contains(&arr.symbol) {
                zero_reported.push(arr.symbol);
                push(
                    BoundFindingKind::ZeroLengthPossible,
                    format!(
                        "`{}` has length `{}`, which may be zero, and `{text}` is not guarded by it",
                        arr.name,
                        size_text(&arr.size)
                    ),
                );
            }
        }
        out
    }
}

fn size_text(size: &ArraySize) -> String {
    match size {
        ArraySize::Constant(n) => n.to_string(),
        ArraySize::Variable { expr, .. } => expr.clone(),
        ArraySize::Unknown => "unknown".to_string(),
    }
}

struct LoopShape<'a> {
    #[allow(dead_code)]
    stmt: &'a Stmt,
    step: i64,
    start: Interval,
    limit: Option<(BinOp, &'a Expr)>,
}
