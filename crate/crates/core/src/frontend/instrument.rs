//! Lowers `assert c : m;` into
//! `if (ASSERTIONS_ENABLED && !(c)) fail("Class.method", "assert c", m);`
//! so that the checks can be toggled at run time.

use super::ast::*;
use super::pretty::expr_to_string;
use super::span::SourceSpan;
use super::visit::{walk_stmt_mut, VisitorMut};

pub const ASSERTIONS_FLAG: &str = "ASSERTIONS_ENABLED";
pub const FAIL_FUNCTION: &str = "fail";

pub fn instrument_asserts(unit: &CompilationUnit) -> CompilationUnit {
    let mut out = unit.clone();
    let mut next_id = out.next_id;
    for class in &mut out.classes {
        for method in &mut class.methods {
            let mut lower = Lower {
                unit_name: format!("{}.{}", class.name, method.name),
                next_id: &mut next_id,
            };
            lower.visit_block_mut(&mut method.body);
        }
    }
    out.next_id = next_id;
    out
}

struct Lower<'a> {
    unit_name: String,
    next_id: &'a mut u32,
}

impl Lower<'_> {
    fn mk(&mut self, kind: ExprKind, span: &SourceSpan) -> Expr {
        let id = NodeId(*self.next_id);
        *self.next_id += 1;
        Expr {
            id,
            kind,
            span: span.clone(),
        }
    }

    fn str_lit(&mut self, text: String, span: &SourceSpan) -> Expr {
        self.mk(ExprKind::Literal(Literal::Str(text)), span)
    }
}

impl VisitorMut for Lower<'_> {
    fn visit_stmt_mut(&mut self, stmt: &mut Stmt) {
        walk_stmt_mut(self, stmt);
        let StmtKind::Assert { cond, message } = &stmt.kind else {
            return;
        };
        let span = stmt.span.clone();
        let text = format!("assert {}", expr_to_string(cond));
        let (cond, message) = (cond.clone(), message.clone());

        let flag = self.mk(ExprKind::Name(ASSERTIONS_FLAG.into()), &span);
        let negated = self.mk(
            ExprKind::Unary {
                op: UnOp::Not,
                operand: Box::new(cond),
            },
            &span,
        );
        let guard = self.mk(
            ExprKind::Binary {
                op: BinOp::And,
                lhs: Box::new(flag),
                rhs: Box::new(negated),
            },
            &span,
        );
        let unit_arg = self.str_lit(self.unit_name.clone(), &span);
        let text_arg = self.str_lit(text, &span);
        let msg_arg = match message {
            Some(m) => m,
            None => self.str_lit(String::new(), &span),
        };
        let call = self.mk(
            ExprKind::Call {
                receiver: None,
                method: FAIL_FUNCTION.into(),
                args: vec![unit_arg, text_arg, msg_arg],
            },
            &span,
        );
        let call_stmt = Stmt {
            id: NodeId(*self.next_id),
            kind: StmtKind::Expr(call),
            comments: Vec::new(),
            span: span.clone(),
        };
        *self.next_id += 1;
        stmt.kind = StmtKind::If {
            cond: guard,
            then_branch: Box::new(call_stmt),
            else_branch: None,
        };
    }
}

/// Number of `assert` statements in `unit`.
pub fn count_asserts(unit: &CompilationUnit) -> usize {
    struct Count(usize);
    impl<'a> super::visit::Visitor<'a> for Count {
        fn visit_stmt(&mut self, stmt: &'a Stmt) {
            if matches!(stmt.kind, StmtKind::Assert { .. }) {
                self.0 += 1;
            }
            super::visit::walk_stmt(self, stmt);
        }
    }
    let mut c = Count(0);
    super::visit::walk_unit(&mut c, unit);
    c.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{normalized, parse_source, pretty_print};

    #[test]
    fn assert_free_unit_unchanged() {
        let u = parse_source("class A { void m() { int a = 1; } }", "t.sl").unwrap();
        assert_eq!(normalized(&instrument_asserts(&u)), normalized(&u));
    }

    #[test]
    fn lowered_call_carries_text_and_message() {
        let u = parse_source(
            "class T { static void main() { int a = 5; assert a > 10 : \"its false\"; } }",
            "t.sl",
        )
        .unwrap();
        let out = instrument_asserts(&u);
        assert_eq!(count_asserts(&out), 0);
        let StmtKind::If { cond, then_branch, .. } = &out.classes[0].methods[0].body.stmts[1].kind else {
            panic!("expected if");
        };
        assert_eq!(expr_to_string(cond), "ASSERTIONS_ENABLED && !(a > 10)");
        let StmtKind::Expr(call) = &then_branch.kind else {
            panic!()
        };
        let ExprKind::Call { method, args, .. } = &call.kind else {
            panic!()
        };
        assert_eq!(method, "fail");
        let strs: Vec<_> = args
            .iter()
            .map(|a| match &a.kind {
                ExprKind::Literal(Literal::Str(s)) => s.clone(),
                _ => panic!(),
            })
            .collect();
        assert_eq!(strs, vec!["T.main", "assert a > 10", "its false"]);
        let printed = pretty_print(&out);
        assert!(parse_source(&printed, "t.sl").is_ok());
    }

    #[test]
    fn nested_asserts_are_all_lowered() {
        let u = parse_source(
            "class T { void m() { assert 1 == 1; if (true) { assert 2 == 2; } while (false) assert 3 == 3; } }",
            "t.sl",
        )
        .unwrap();
        assert_eq!(count_asserts(&u), 3);
        let out = instrument_asserts(&u);
        assert_eq!(count_asserts(&out), 0);
        assert_eq!(pretty_print(&out).matches("ASSERTIONS_ENABLED").count(), 3);
    }
}
