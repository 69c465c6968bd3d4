//! Read-only and mutable traversals over the syntax tree.

use super::ast::*;

pub trait Visitor<'a> {
    fn visit_class(&mut self, class: &'a ClassDecl) {
        walk_class(self, class);
    }
    fn visit_method(&mut self, method: &'a MethodDecl) {
        walk_block(self, &method.body);
    }
    fn visit_block(&mut self, block: &'a Block) {
        walk_block(self, block);
    }
    fn visit_stmt(&mut self, stmt: &'a Stmt) {
        walk_stmt(self, stmt);
    }
    fn visit_expr(&mut self, expr: &'a Expr) {
        walk_expr(self, expr);
    }
}

pub fn walk_unit<'a, V: Visitor<'a> + ?Sized>(v: &mut V, unit: &'a CompilationUnit) {
    for class in &unit.classes {
        v.visit_class(class);
    }
}

pub fn walk_class<'a, V: Visitor<'a> + ?Sized>(v: &mut V, class: &'a ClassDecl) {
    for field in &class.fields {
        if let Some(init) = &field.init {
            v.visit_expr(init);
        }
    }
    for method in &class.methods {
        v.visit_method(method);
    }
}

pub fn walk_block<'a, V: Visitor<'a> + ?Sized>(v: &mut V, block: &'a Block) {
    for stmt in &block.stmts {
        v.visit_stmt(stmt);
    }
}

pub fn walk_stmt<'a, V: Visitor<'a> + ?Sized>(v: &mut V, stmt: &'a Stmt) {
    match &stmt.kind {
        StmtKind::Block(b) => v.visit_block(b),
        StmtKind::If {
            cond,
            then_branch,
            else_branch,
        } => {
            v.visit_expr(cond);
            v.visit_stmt(then_branch);
            if let Some(e) = else_branch {
                v.visit_stmt(e);
            }
        }
        StmtKind::While { cond, body } => {
            v.visit_expr(cond);
            v.visit_stmt(body);
        }
        StmtKind::For {
            init,
            cond,
            update,
            body,
        } => {
            if let Some(init) = init {
                v.visit_stmt(init);
            }
            if let Some(cond) = cond {
                v.visit_expr(cond);
            }
            v.visit_stmt(body);
            if let Some(update) = update {
                v.visit_expr(update);
            }
        }
        StmtKind::Switch { scrutinee, arms, .. } => {
            v.visit_expr(scrutinee);
            for arm in arms {
                if let Some(label) = &arm.label {
                    v.visit_expr(label);
                }
                for s in &arm.body {
                    v.visit_stmt(s);
                }
            }
        }
        StmtKind::Try { body, catches, finally } => {
            v.visit_block(body);
            for c in catches {
                v.visit_block(&c.body);
            }
            if let Some(f) = finally {
                v.visit_block(f);
            }
        }
        StmtKind::Return(e) => {
            if let Some(e) = e {
                v.visit_expr(e);
            }
        }
        StmtKind::Expr(e) => v.visit_expr(e),
        StmtKind::LocalDecl { init, .. } => {
            if let Some(e) = init {
                v.visit_expr(e);
            }
        }
        StmtKind::Assert { cond, message } => {
            v.visit_expr(cond);
            if let Some(m) = message {
                v.visit_expr(m);
            }
        }
        StmtKind::Synchronized { monitor, body } => {
            v.visit_expr(monitor);
            v.visit_block(body);
        }
        StmtKind::Empty => {}
    }
}

pub fn walk_expr<'a, V: Visitor<'a> + ?Sized>(v: &mut V, expr: &'a Expr) {
    match &expr.kind {
        ExprKind::Binary { lhs, rhs, .. } => {
            v.visit_expr(lhs);
            v.visit_expr(rhs);
        }
        ExprKind::Unary { operand, .. } => v.visit_expr(operand),
        ExprKind::Assign { target, value } => {
            v.visit_expr(target);
            v.visit_expr(value);
        }
        ExprKind::Call { receiver, args, .. } => {
            if let Some(r) = receiver {
                v.visit_expr(r);
            }
            for a in args {
                v.visit_expr(a);
            }
        }
        ExprKind::SuperCall { args } | ExprKind::New { args, .. } => {
            for a in args {
                v.visit_expr(a);
            }
        }
        ExprKind::NewArray { size, .. } => v.visit_expr(size),
        ExprKind::Index { array, index } => {
            v.visit_expr(array);
            v.visit_expr(index);
        }
        ExprKind::FieldAccess { object, .. } => v.visit_expr(object),
        ExprKind::Name(_) | ExprKind::Literal(_) | ExprKind::Null | ExprKind::This => {}
    }
}

/// Calls `f` on every expression under `stmt`, outermost first.
pub fn for_each_expr<'a>(stmt: &'a Stmt, f: &mut dyn FnMut(&'a Expr)) {
    struct Collect<'f, 'a>(&'f mut dyn FnMut(&'a Expr));
    impl<'a> Visitor<'a> for Collect<'_, 'a> {
        fn visit_expr(&mut self, expr: &'a Expr) {
            (self.0)(expr);
            walk_expr(self, expr);
        }
    }
    Collect(f).visit_stmt(stmt);
}

/// Calls `f` on `expr` and all its sub-expressions, outermost first.
pub fn for_each_subexpr<'a>(expr: &'a Expr, f: &mut dyn FnMut(&'a Expr)) {
    struct Collect<'f, 'a>(&'f mut dyn FnMut(&'a Expr));
    impl<'a> Visitor<'a> for Collect<'_, 'a> {
        fn visit_expr(&mut self, expr: &'a Expr) {
            (self.0)(expr);
            walk_expr(self, expr);
        }
    }
    Collect(f).visit_expr(expr);
}

/// Mutable traversal; used for id/span normalization and rewriting.
pub trait VisitorMut {
    fn visit_stmt_mut(&mut self, stmt: &mut Stmt) {
        walk_stmt_mut(self, stmt);
    }
    fn visit_expr_mut(&mut self, expr: &mut Expr) {
        walk_expr_mut(self, expr);
    }
    fn visit_block_mut(&mut self, block: &mut Block) {
        for s in &mut block.stmts {
            self.visit_stmt_mut(s);
        }
    }
}

pub fn walk_stmt_mut<V: VisitorMut + ?Sized>(v: &mut V, stmt: &mut Stmt) {
    match &mut stmt.kind {
        StmtKind::Block(b) => v.visit_block_mut(b),
        StmtKind::If {
            cond,
            then_branch,
            else_branch,
        } => {
            v.visit_expr_mut(cond);
            v.visit_stmt_mut(then_branch);
            if let Some(e) = else_branch {
                v.visit_stmt_mut(e);
            }
        }
        StmtKind::While { cond, body } => {
            v.visit_expr_mut(cond);
            v.visit_stmt_mut(body);
        }
        StmtKind::For {
            init,
            cond,
            update,
            body,
        } => {
            if let Some(init) = init {
                v.visit_stmt_mut(init);
            }
            if let Some(cond) = cond {
                v.visit_expr_mut(cond);
            }
            v.visit_stmt_mut(body);
            if let Some(update) = update {
                v.visit_expr_mut(update);
            }
        }
        StmtKind::Switch { scrutinee, arms, .. } => {
            v.visit_expr_mut(scrutinee);
            for arm in arms {
                if let Some(label) = &mut arm.label {
                    v.visit_expr_mut(label);
                }
                for s in &mut arm.body {
                    v.visit_stmt_mut(s);
                }
            }
        }
        StmtKind::Try { body, catches, finally } => {
            v.visit_block_mut(body);
            for c in catches {
                v.visit_block_mut(&mut c.body);
            }
            if let Some(f) = finally {
                v.visit_block_mut(f);
            }
        }
        StmtKind::Return(e) => {
            if let Some(e) = e {
                v.visit_expr_mut(e);
            }
        }
        StmtKind::Expr(e) => v.visit_expr_mut(e),
        StmtKind::LocalDecl { init, .. } => {
            if let Some(e) = init {
                v.visit_expr_mut(e);
            }
        }
        StmtKind::Assert { cond, message } => {
            v.visit_expr_mut(cond);
            if let Some(m) = message {
                v.visit_expr_mut(m);
            }
        }
        StmtKind::Synchronized { monitor, body } => {
            v.visit_expr_mut(monitor);
            v.visit_block_mut(body);
        }
        StmtKind::Empty => {}
    }
}

pub fn walk_expr_mut<V: VisitorMut + ?Sized>(v: &mut V, expr: &mut Expr) {
    match &mut expr.kind {
        ExprKind::Binary { lhs, rhs, .. } => {
            v.visit_expr_mut(lhs);
            v.visit_expr_mut(rhs);
        }
        ExprKind::Unary { operand, .. } => v.visit_expr_mut(operand),
        ExprKind::Assign { target, value } => {
            v.visit_expr_mut(target);
            v.visit_expr_mut(value);
        }
        ExprKind::Call { receiver, args, .. } => {
            if let Some(r) = receiver {
                v.visit_expr_mut(r);
            }
            for a in args {
                v.visit_expr_mut(a);
            }
        }
        ExprKind::SuperCall { args } | ExprKind::New { args, .. } => {
            for a in args {
                v.visit_expr_mut(a);
            }
        }
        ExprKind::NewArray { size, .. } => v.visit_expr_mut(size),
        ExprKind::Index { array, index } => {
            v.visit_expr_mut(array);
            v.visit_expr_mut(index);
        }
        ExprKind::FieldAccess { object, .. } => v.visit_expr_mut(object),
        ExprKind::Name(_) | ExprKind::Literal(_) | ExprKind::Null | ExprKind::This => {}
    }
}
