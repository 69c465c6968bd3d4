//! Canonical source rendering. Output reparses to the same tree (ignoring
//! spans and ids) and printing is a fixed point after one round.

use super::ast::*;

pub fn pretty_print(unit: &CompilationUnit) -> String {
    let mut p = Printer::default();
    if let Some(pkg) = &unit.package {
        p.line(&format!("package {pkg};"));
        p.blank();
    }
    for (i, class) in unit.classes.iter().enumerate() {
        if i > 0 {
            p.blank();
        }
        p.class(class);
    }
    p.comments(&unit.trailing_comments);
    p.out
}

/// Renders one expression on a single line.
pub fn expr_to_string(e: &Expr) -> String {
    expr(e, 0)
}

#[derive(Default)]
struct Printer {
    out: String,
    indent: usize,
}

impl Printer {
    fn line(&mut self, text: &str) {
        for _ in 0..self.indent {
            self.out.push_str("    ");
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn blank(&mut self) {
        self.out.push('\n');
    }

    fn comments(&mut self, comments: &[Comment]) {
        for c in comments {
            self.line(&c.text);
        }
    }

    fn class(&mut self, class: &ClassDecl) {
        self.comments(&class.comments);
        let header = match &class.extends {
            Some(base) => format!("class {} extends {base} {{", class.name),
            None => format!("class {} {{", class.name),
        };
        self.line(&header);
        self.indent += 1;
        for f in &class.fields {
            self.comments(&f.comments);
            let mut text = String::new();
            if f.is_static {
                text.push_str("static ");
            }
            if f.is_final {
                text.push_str("final ");
            }
            text.push_str(&format!("{} {}", f.ty, f.name));
            if let Some(init) = &f.init {
                text.push_str(&format!(" = {}", expr(init, 0)));
            }
            text.push(';');
            self.line(&text);
        }
        for (i, m) in class.methods.iter().enumerate() {
            if i > 0 || !class.fields.is_empty() {
                self.blank();
            }
            self.method(m);
        }
        self.comments(&class.trailing_comments);
        self.indent -= 1;
        self.line("}");
    }

    fn method(&mut self, m: &MethodDecl) {
        self.comments(&m.comments);
        let params: Vec<String> = m
            .params
            .iter()
            .map(|p| {
                let fin = if p.is_final { "final " } else { "" };
                format!("{fin}{} {}", p.ty, p.name)
            })
            .collect();
        let head = if m.is_constructor {
            format!("{}({})", m.name, params.join(", "))
        } else {
            let stat = if m.is_static { "static " } else { "" };
            format!("{stat}{} {}({})", m.return_type, m.name, params.join(", "))
        };
        self.block_with_head(&head, &m.body);
    }

    /// `head {` ... `}` with `tail` appended after the closing brace.
    fn block_open(&mut self, head: &str, block: &Block) {
        self.line(format!("{head} {{").trim_start());
        self.indent += 1;
        for s in &block.stmts {
            self.stmt(s);
        }
        self.comments(&block.trailing_comments);
        self.indent -= 1;
    }

    fn block_with_head(&mut self, head: &str, block: &Block) {
        self.block_open(head, block);
        self.line("}");
    }

    /// Body of an if/while/for: inline block when possible.
    fn body(&mut self, head: &str, body: &Stmt) {
        match &body.kind {
            StmtKind::Block(b) if body.comments.is_empty() => self.block_with_head(head, b),
            _ => {
                self.line(head);
                self.indent += 1;
                self.stmt(body);
                self.indent -= 1;
            }
        }
    }

    fn stmt(&mut self, s: &Stmt) {
        self.comments(&s.comments);
        match &s.kind {
            StmtKind::Block(b) => self.block_with_head("", b),
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let head = format!("if ({})", expr(cond, 0));
                self.body(&head, then_branch);
                if let Some(e) = else_branch {
                    self.body("else", e);
                }
            }
            StmtKind::While { cond, body } => {
                self.body(&format!("while ({})", expr(cond, 0)), body);
            }
            StmtKind::For {
                init,
                cond,
                update,
                body,
            } => {
                let init = init.as_ref().map(|s| simple_stmt(s)).unwrap_or_default();
                let cond = cond.as_ref().map(|e| expr(e, 0)).unwrap_or_default();
                let update = update.as_ref().map(|e| expr(e, 0)).unwrap_or_default();
                let cond = if cond.is_empty() { cond } else { format!(" {cond}") };
                let update = if update.is_empty() {
                    update
                } else {
                    format!(" {update}")
                };
                self.body(&format!("for ({init};{cond};{update})"), body);
            }
            StmtKind::Switch {
                scrutinee,
                arms,
                trailing_comments,
            } => {
                self.line(&format!("switch ({}) {{", expr(scrutinee, 0)));
                self.indent += 1;
                for arm in arms {
                    match &arm.label {
                        Some(l) => self.line(&format!("case {}:", expr(l, 0))),
                        None => self.line("default:"),
                    }
                    self.indent += 1;
                    for s in &arm.body {
                        self.stmt(s);
                    }
                    self.indent -= 1;
                }
                self.comments(trailing_comments);
                self.indent -= 1;
                self.line("}");
            }
            StmtKind::Try { body, catches, finally } => {
                self.block_open("try", body);
                let mut closer = String::from("}");
                for c in catches {
                    self.block_open(&format!("{closer} catch ({} {})", c.ty, c.name), &c.body);
                    closer = String::from("}");
                }
                if let Some(f) = finally {
                    self.block_open(&format!("{closer} finally"), f);
                }
                self.line("}");
            }
            StmtKind::Synchronized { monitor, body } => {
                self.block_with_head(&format!("synchronized ({})", expr(monitor, 0)), body);
            }
            _ => {
                let text = format!("{};", simple_stmt(s));
                self.line(&text);
            }
        }
    }
}

fn simple_stmt(s: &Stmt) -> String {
    match &s.kind {
        StmtKind::Return(None) => "return".into(),
        StmtKind::Return(Some(e)) => format!("return {}", expr(e, 0)),
        StmtKind::Expr(e) => expr(e, 0),
        StmtKind::LocalDecl {
            name,
            ty,
            is_final,
            init,
            ..
        } => {
            let fin = if *is_final { "final " } else { "" };
            match init {
                Some(e) => format!("{fin}{ty} {name} = {}", expr(e, 0)),
                None => format!("{fin}{ty} {name}"),
            }
        }
        StmtKind::Assert { cond, message } => match message {
            Some(m) => format!("assert {} : {}", expr(cond, 0), expr(m, 0)),
            None => format!("assert {}", expr(cond, 0)),
        },
        StmtKind::Empty => String::new(),
        _ => unreachable!("compound statement rendered as simple"),
    }
}

const PREC_UNARY: u8 = 8;
const PREC_POSTFIX: u8 = 9;

fn prec(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Assign { .. } => 1,
        ExprKind::Binary { op, .. } => op.precedence(),
        ExprKind::Unary { .. } => PREC_UNARY,
        _ => PREC_POSTFIX,
    }
}

fn expr(e: &Expr, min: u8) -> String {
    let text = match &e.kind {
        ExprKind::Assign { target, value } => {
            format!("{} = {}", expr(target, PREC_POSTFIX), expr(value, 1))
        }
        ExprKind::Binary { op, lhs, rhs } => {
            let p = op.precedence();
            format!("{} {} {}", expr(lhs, p), op.symbol(), expr(rhs, p + 1))
        }
        ExprKind::Unary { op, operand } => {
            let inner = expr(operand, PREC_UNARY);
            let sym = match op {
                UnOp::Neg => "-",
                UnOp::Not => "!",
            };
            if inner.starts_with(sym) {
                format!("{sym} {inner}")
            } else {
                format!("{sym}{inner}")
            }
        }
        ExprKind::Call { receiver, method, args } => match receiver {
            Some(r) => format!("{}.{method}({})", expr(r, PREC_POSTFIX), list(args)),
            None => format!("{method}({})", list(args)),
        },
        ExprKind::SuperCall { args } => format!("super({})", list(args)),
        ExprKind::New { class, args } => format!("new {class}({})", list(args)),
        ExprKind::NewArray { elem, size } => format!("new {elem}[{}]", expr(size, 0)),
        ExprKind::Index { array, index } => {
            format!("{}[{}]", expr(array, PREC_POSTFIX), expr(index, 0))
        }
        ExprKind::FieldAccess { object, field } => {
            format!("{}.{field}", expr(object, PREC_POSTFIX))
        }
        ExprKind::Name(n) => n.clone(),
        ExprKind::Literal(lit) => literal(lit),
        ExprKind::Null => "null".into(),
        ExprKind::This => "this".into(),
    };
    if prec(e) < min {
        format!("({text})")
    } else {
        text
    }
}

fn list(args: &[Expr]) -> String {
    args.iter().map(|a| expr(a, 0)).collect::<Vec<_>>().join(", ")
}

fn literal(lit: &Literal) -> String {
    match lit {
        Literal::Int(v) if *v < 0 => format!("(-{})", v.unsigned_abs()),
        Literal::Int(v) => v.to_string(),
        Literal::Double(d) => {
            let mut s = format!("{}", d.abs());
            if !s.contains('.') {
                s.push_str(".0");
            }
            if *d < 0.0 {
                format!("(-{s})")
            } else {
                s
            }
        }
        Literal::Str(s) => {
            let escaped = s.replace('\\', "\\\\").replace('"', "\\\"");
            format!("\"{escaped}\"")
        }
        Literal::Bool(b) => b.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{normalized, parse_source};

    fn round_trip(src: &str) {
        let u = parse_source(src, "t.sl").unwrap();
        let printed = pretty_print(&u);
        let again = parse_source(&printed, "t.sl").unwrap_or_else(|e| panic!("reparse failed: {e}\n{printed}"));
        assert_eq!(normalized(&u), normalized(&again), "\n{printed}");
        assert_eq!(pretty_print(&again), printed);
    }

    #[test]
    fn minimal_class_round_trips() {
        round_trip("class A { }");
    }

    #[test]
    fn statements_round_trip() {
        round_trip(
            r#"package p.q;
            // header
            class A extends Thread {
                static int n = 3;
                A(int x) { super(); }
                void m(final int[] a, String s) {
                    int i = 0; // trailing
                    /* block */
                    for (i = 0; i < a.length; i++) if (a[i] == 1) return; else { a[i] = -a[i]; }
                    for (;;) { }
                    while (!(i < 3) && (i + 1) * 2 > 0) i--;
                    switch (i) { case 1: println("a\\b\"c"); case -2: default: }
                    try { s.trim(); } catch (Exception e) { } finally { println(1.5 - 2.0); }
                    synchronized (this) { wait(); }
                    assert i > 0 : "bad";
                    assert i > 0;
                    x = y = 1 - (2 - 3);
                    ;
                    // end
                }
            }"#,
        );
    }

    #[test]
    fn doubles_keep_decimal_point() {
        let u = parse_source("class A { double d = 100000000000000000000.0; }", "t.sl").unwrap();
        assert!(pretty_print(&u).contains("100000000000000000000.0"));
    }
}
