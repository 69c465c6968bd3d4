//! Recursive-descent parser. The first syntax error aborts the unit.
//!
//! Grammar (informal, `?` optional, `*` repetition):
//!
//! ```text
//! unit      := ("package" qname ";")? class*
//! class     := "class" IDENT ("extends" IDENT)? "{" member* "}"
//! member    := ("static" | "final")* (ctor | method | field)
//! ctor      := IDENT "(" params? ")" block            // IDENT == class name
//! method    := type IDENT "(" params? ")" block
//! field     := type IDENT ("=" expr)? ";"
//! param     := "final"? type IDENT
//! type      := ("int" | "byte" | "double" | "boolean" | "void" | IDENT) ("[" "]")*
//! stmt      := block | if | while | for | switch | try | return | assert
//!            | synchronized | local ";" | expr ";" | ";"
//! for       := "for" "(" (local | expr)? ";" expr? ";" expr? ")" stmt
//! switch    := "switch" "(" expr ")" "{" (("case" expr | "default") ":" stmt*)* "}"
//! try       := "try" block ("catch" "(" type IDENT ")" block)* ("finally" block)?
//! assert    := "assert" expr (":" expr)? ";"
//! expr      := assign;  assign := or ("=" assign)?
//! ```
//!
//! Binary operators follow the usual C precedence. `x++` / `x--` (prefix or
//! postfix) are sugar for `x = x + 1` / `x = x - 1`. Switch arms never fall
//! through.

use super::ast::*;
use super::lexer::{Token, TokenKind};
use super::span::{FileName, SourceSpan};
use super::FrontendError;

pub fn parse(tokens: &[Token], file: &FileName) -> Result<CompilationUnit, FrontendError> {
    let mut p = Parser {
        tokens,
        pos: 0,
        file: file.clone(),
        next_id: 0,
        pending: Vec::new(),
        prev: SourceSpan::new(file.clone(), 1, 1, 1, 1),
    };
    p.unit()
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
    file: FileName,
    next_id: u32,
    pending: Vec<Comment>,
    prev: SourceSpan,
}

type PResult<T> = Result<T, FrontendError>;

const TYPE_KEYWORDS: &[&str] = &["int", "byte", "double", "boolean", "void"];

impl<'t> Parser<'t> {
    fn id(&mut self) -> NodeId {
        let id = NodeId(self.next_id);
        self.next_id += 1;
        id
    }

    fn skip_comments(&mut self) {
        while let Some(tok) = self.tokens.get(self.pos) {
            if tok.kind != TokenKind::Comment {
                break;
            }
            self.pending.push(Comment {
                text: tok.text.clone(),
                span: tok.span.clone(),
            });
            self.pos += 1;
        }
    }

    fn take_comments(&mut self) -> Vec<Comment> {
        self.skip_comments();
        std::mem::take(&mut self.pending)
    }

    fn peek(&mut self) -> Option<&'t Token> {
        self.skip_comments();
        self.tokens.get(self.pos)
    }

    /// The `n`-th significant token after the current one.
    fn peek_nth(&mut self, n: usize) -> Option<&'t Token> {
        self.skip_comments();
        self.tokens[self.pos..]
            .iter()
            .filter(|t| t.kind != TokenKind::Comment)
            .nth(n)
    }

    fn check(&mut self, text: &str) -> bool {
        self.peek().is_some_and(|t| {
            t.text == text
                && matches!(
                    t.kind,
                    TokenKind::Keyword | TokenKind::Operator | TokenKind::Punctuation
                )
        })
    }

    fn check_nth(&mut self, n: usize, text: &str) -> bool {
        self.peek_nth(n).is_some_and(|t| {
            t.text == text
                && matches!(
                    t.kind,
                    TokenKind::Keyword | TokenKind::Operator | TokenKind::Punctuation
                )
        })
    }

    fn advance(&mut self) -> PResult<&'t Token> {
        match self.peek() {
            Some(tok) => {
                self.pos += 1;
                self.prev = tok.span.clone();
                Ok(tok)
            }
            None => Err(self.error("more input")),
        }
    }

    fn eat(&mut self, text: &str) -> bool {
        if self.check(text) {
            self.pos += 1;
            self.prev = self.tokens[self.pos - 1].span.clone();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, text: &str) -> PResult<&'t Token> {
        if self.check(text) {
            self.advance()
        } else {
            Err(self.error(&format!("`{text}`")))
        }
    }

    fn expect_ident(&mut self) -> PResult<(String, SourceSpan)> {
        match self.peek() {
            Some(tok) if tok.kind == TokenKind::Identifier => {
                self.advance()?;
                Ok((tok.text.clone(), tok.span.clone()))
            }
            _ => Err(self.error("identifier")),
        }
    }

    fn error(&mut self, expected: &str) -> FrontendError {
        let (span, found) = match self.peek() {
            Some(tok) => (tok.span.clone(), tok.text.clone()),
            None => (self.prev.clone(), "end of input".to_string()),
        };
        FrontendError::Parse {
            span,
            expected: expected.to_string(),
            found,
        }
    }

    fn start(&mut self) -> SourceSpan {
        match self.peek() {
            Some(tok) => tok.span.clone(),
            None => self.prev.clone(),
        }
    }

    fn finish(&self, start: &SourceSpan) -> SourceSpan {
        start.to(&self.prev)
    }

    // ---- declarations ------------------------------------------------------

    fn unit(&mut self) -> PResult<CompilationUnit> {
        self.skip_comments();
        let mut package = None;
        if self.eat("package") {
            let (mut name, _) = self.expect_ident()?;
            while self.eat(".") {
                let (part, _) = self.expect_ident()?;
                name.push('.');
                name.push_str(&part);
            }
            self.expect(";")?;
            package = Some(name);
        }
        let mut classes = Vec::new();
        while self.peek().is_some() {
            classes.push(self.class()?);
        }
        let trailing_comments = self.take_comments();
        Ok(CompilationUnit {
            file: self.file.clone(),
            package,
            classes,
            trailing_comments,
            source: String::new(),
            next_id: self.next_id,
        })
    }

    fn class(&mut self) -> PResult<ClassDecl> {
        let comments = self.take_comments();
        let start = self.start();
        self.expect("class")?;
        let (name, name_span) = self.expect_ident()?;
        let extends = if self.eat("extends") {
            Some(self.expect_ident()?.0)
        } else {
            None
        };
        self.expect("{")?;
        let mut fields = Vec::new();
        let mut methods = Vec::new();
        loop {
            self.skip_comments();
            if self.check("}") || self.peek().is_none() {
                break;
            }
            match self.member(&name)? {
                Member::Field(f) => fields.push(f),
                Member::Method(m) => methods.push(m),
            }
        }
        let trailing_comments = self.take_comments();
        self.expect("}")?;
        let is_builtin_thread_subclass = extends.as_deref() == Some("Thread");
        Ok(ClassDecl {
            id: self.id(),
            name,
            name_span,
            extends,
            fields,
            methods,
            is_builtin_thread_subclass,
            comments,
            trailing_comments,
            span: self.finish(&start),
        })
    }

    fn member(&mut self, class_name: &str) -> PResult<Member> {
        let comments = self.take_comments();
        let start = self.start();
        let mut is_static = false;
        let mut is_final = false;
        loop {
            if self.eat("static") {
                is_static = true;
            } else if self.eat("final") {
                is_final = true;
            } else {
                break;
            }
        }
        let is_ctor = self
            .peek()
            .is_some_and(|t| t.kind == TokenKind::Identifier && t.text == class_name)
            && self.check_nth(1, "(");
        if is_ctor {
            if is_static || is_final {
                return Err(self.error("constructor without modifiers"));
            }
            let (name, name_span) = self.expect_ident()?;
            let params = self.params()?;
            let body = self.block()?;
            return Ok(Member::Method(MethodDecl {
                id: self.id(),
                name,
                name_span,
                params,
                return_type: TypeRef::Void,
                body,
                is_constructor: true,
                is_static: false,
                comments,
                span: self.finish(&start),
            }));
        }
        let ty = self.type_ref()?;
        let (name, name_span) = self.expect_ident()?;
        if self.check("(") {
            if is_final {
                return Err(self.error("method name without `final`"));
            }
            let params = self.params()?;
            let body = self.block()?;
            return Ok(Member::Method(MethodDecl {
                id: self.id(),
                name,
                name_span,
                params,
                return_type: ty,
                body,
                is_constructor: false,
                is_static,
                comments,
                span: self.finish(&start),
            }));
        }
        let init = if self.eat("=") { Some(self.expr()?) } else { None };
        self.expect(";")?;
        Ok(Member::Field(FieldDecl {
            id: self.id(),
            name,
            name_span,
            ty,
            is_static,
            is_final,
            init,
            comments,
            span: self.finish(&start),
        }))
    }

    fn params(&mut self) -> PResult<Vec<Param>> {
        self.expect("(")?;
        let mut params = Vec::new();
        if !self.check(")") {
            loop {
                let start = self.start();
                let is_final = self.eat("final");
                let ty = self.type_ref()?;
                let (name, _) = self.expect_ident()?;
                params.push(Param {
                    id: self.id(),
                    name,
                    ty,
                    is_final,
                    span: self.finish(&start),
                });
                if !self.eat(",") {
                    break;
                }
            }
        }
        self.expect(")")?;
        Ok(params)
    }

    fn type_ref(&mut self) -> PResult<TypeRef> {
        let tok = match self.peek() {
            Some(t) => t,
            None => return Err(self.error("type")),
        };
        let mut ty = match (tok.kind, tok.text.as_str()) {
            (TokenKind::Keyword, "int") => TypeRef::Int,
            (TokenKind::Keyword, "byte") => TypeRef::Byte,
            (TokenKind::Keyword, "double") => TypeRef::Double,
            (TokenKind::Keyword, "boolean") => TypeRef::Boolean,
            (TokenKind::Keyword, "void") => TypeRef::Void,
            (TokenKind::Identifier, name) => TypeRef::Named(name.to_string()),
            _ => return Err(self.error("type")),
        };
        self.advance()?;
        while self.check("[") && self.check_nth(1, "]") {
            self.advance()?;
            self.advance()?;
            ty = TypeRef::Array(Box::new(ty));
        }
        Ok(ty)
    }

    // ---- statements --------------------------------------------------------

    fn block(&mut self) -> PResult<Block> {
        let start = self.start();
        self.expect("{")?;
        let mut stmts = Vec::new();
        loop {
            self.skip_comments();
            if self.check("}") || self.peek().is_none() {
                break;
            }
            stmts.push(self.stmt()?);
        }
        let trailing_comments = self.take_comments();
        self.expect("}")?;
        Ok(Block {
            id: self.id(),
            stmts,
            trailing_comments,
            span: self.finish(&start),
        })
    }

    fn starts_local_decl(&mut self) -> bool {
        let Some(tok) = self.peek() else {
            return false;
        };
        match tok.kind {
            TokenKind::Keyword => tok.text == "final" || TYPE_KEYWORDS.contains(&tok.text.as_str()),
            TokenKind::Identifier => {
                let next_is_ident = self.peek_nth(1).is_some_and(|t| t.kind == TokenKind::Identifier);
                next_is_ident || (self.check_nth(1, "[") && self.check_nth(2, "]"))
            }
            _ => false,
        }
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let comments = self.take_comments();
        let start = self.start();
        let kind = self.stmt_kind()?;
        Ok(Stmt {
            id: self.id(),
            kind,
            comments,
            span: self.finish(&start),
        })
    }

    fn stmt_kind(&mut self) -> PResult<StmtKind> {
        if self.check("{") {
            return Ok(StmtKind::Block(self.block()?));
        }
        if self.eat(";") {
            return Ok(StmtKind::Empty);
        }
        if self.eat("if") {
            self.expect("(")?;
            let cond = self.expr()?;
            self.expect(")")?;
            let then_branch = Box::new(self.stmt()?);
            let else_branch = if self.eat("else") {
                Some(Box::new(self.stmt()?))
            } else {
                None
            };
            return Ok(StmtKind::If {
                cond,
                then_branch,
                else_branch,
            });
        }
        if self.eat("while") {
            self.expect("(")?;
            let cond = self.expr()?;
            self.expect(")")?;
            let body = Box::new(self.stmt()?);
            return Ok(StmtKind::While { cond, body });
        }
        if self.eat("for") {
            return self.for_stmt();
        }
        if self.eat("switch") {
            return self.switch_stmt();
        }
        if self.eat("try") {
            let body = self.block()?;
            let mut catches = Vec::new();
            while self.check("catch") {
                let start = self.start();
                self.advance()?;
                self.expect("(")?;
                let ty = self.type_ref()?;
                let (name, name_span) = self.expect_ident()?;
                self.expect(")")?;
                let body = self.block()?;
                catches.push(CatchClause {
                    id: self.id(),
                    ty,
                    name,
                    name_span,
                    body,
                    span: self.finish(&start),
                });
            }
            let finally = if self.eat("finally") { Some(self.block()?) } else { None };
            if catches.is_empty() && finally.is_none() {
                return Err(self.error("`catch` or `finally`"));
            }
            return Ok(StmtKind::Try { body, catches, finally });
        }
        if self.eat("return") {
            let value = if self.check(";") { None } else { Some(self.expr()?) };
            self.expect(";")?;
            return Ok(StmtKind::Return(value));
        }
        if self.eat("assert") {
            let cond = self.expr()?;
            let message = if self.eat(":") { Some(self.expr()?) } else { None };
            self.expect(";")?;
            return Ok(StmtKind::Assert { cond, message });
        }
        if self.eat("synchronized") {
            self.expect("(")?;
            let monitor = self.expr()?;
            self.expect(")")?;
            let body = self.block()?;
            return Ok(StmtKind::Synchronized { monitor, body });
        }
        if self.starts_local_decl() {
            let kind = self.local_decl()?;
            self.expect(";")?;
            return Ok(kind);
        }
        let e = self.expr()?;
        self.expect(";")?;
        Ok(StmtKind::Expr(e))
    }

    fn local_decl(&mut self) -> PResult<StmtKind> {
        let is_final = self.eat("final");
        let ty = self.type_ref()?;
        if ty == TypeRef::Void {
            return Err(FrontendError::Parse {
                span: self.prev.clone(),
                expected: "variable type".into(),
                found: "void".into(),
            });
        }
        let (name, name_span) = self.expect_ident()?;
        let init = if self.eat("=") { Some(self.expr()?) } else { None };
        Ok(StmtKind::LocalDecl {
            name,
            name_span,
            ty,
            is_final,
            init,
        })
    }

    fn for_stmt(&mut self) -> PResult<StmtKind> {
        self.expect("(")?;
        let init = if self.check(";") {
            None
        } else {
            let start = self.start();
            let kind = if self.starts_local_decl() {
                self.local_decl()?
            } else {
                StmtKind::Expr(self.expr()?)
            };
            Some(Box::new(Stmt {
                id: self.id(),
                kind,
                comments: Vec::new(),
                span: self.finish(&start),
            }))
        };
        self.expect(";")?;
        let cond = if self.check(";") { None } else { Some(self.expr()?) };
        self.expect(";")?;
        let update = if self.check(")") { None } else { Some(self.expr()?) };
        self.expect(")")?;
        let body = Box::new(self.stmt()?);
        Ok(StmtKind::For {
            init,
            cond,
            update,
            body,
        })
    }

    fn switch_stmt(&mut self) -> PResult<StmtKind> {
        self.expect("(")?;
        let scrutinee = self.expr()?;
        self.expect(")")?;
        self.expect("{")?;
        let mut arms = Vec::new();
        loop {
            self.skip_comments();
            let start = self.start();
            let label = if self.eat("case") {
                Some(self.expr()?)
            } else if self.eat("default") {
                None
            } else {
                break;
            };
            self.expect(":")?;
            let mut body = Vec::new();
            loop {
                self.skip_comments();
                if self.check("case") || self.check("default") || self.check("}") {
                    break;
                }
                if self.peek().is_none() {
                    return Err(self.error("`}`"));
                }
                body.push(self.stmt()?);
            }
            arms.push(SwitchArm {
                id: self.id(),
                label,
                body,
                span: self.finish(&start),
            });
        }
        let trailing_comments = self.take_comments();
        self.expect("}")?;
        Ok(StmtKind::Switch {
            scrutinee,
            arms,
            trailing_comments,
        })
    }

    // ---- expressions -------------------------------------------------------

    fn expr(&mut self) -> PResult<Expr> {
        let start = self.start();
        let lhs = self.binary(2)?;
        if self.eat("=") {
            if !is_lvalue(&lhs) {
                return Err(FrontendError::Parse {
                    span: lhs.span.clone(),
                    expected: "assignable expression".into(),
                    found: "expression".into(),
                });
            }
            let value = self.expr()?;
            return Ok(Expr {
                id: self.id(),
                kind: ExprKind::Assign {
                    target: Box::new(lhs),
                    value: Box::new(value),
                },
                span: self.finish(&start),
            });
        }
        Ok(lhs)
    }

    fn binary_op(&mut self) -> Option<BinOp> {
        let tok = self.peek()?;
        if tok.kind != TokenKind::Operator {
            return None;
        }
        Some(match tok.text.as_str() {
            "||" => BinOp::Or,
            "&&" => BinOp::And,
            "==" => BinOp::Eq,
            "!=" => BinOp::Ne,
            "<" => BinOp::Lt,
            "<=" => BinOp::Le,
            ">" => BinOp::Gt,
            ">=" => BinOp::Ge,
            "+" => BinOp::Add,
            "-" => BinOp::Sub,
            "*" => BinOp::Mul,
            "/" => BinOp::Div,
            "%" => BinOp::Rem,
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let start = self.start();
        let mut lhs = self.unary()?;
        while let Some(op) = self.binary_op() {
            if op.precedence() < min_prec {
                break;
            }
            self.advance()?;
            let rhs = self.binary(op.precedence() + 1)?;
            lhs = Expr {
                id: self.id(),
                kind: ExprKind::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
                span: self.finish(&start),
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let start = self.start();
        let op = if self.eat("!") {
            Some(UnOp::Not)
        } else if self.eat("-") {
            Some(UnOp::Neg)
        } else {
            None
        };
        if let Some(op) = op {
            let operand = self.unary()?;
            return Ok(Expr {
                id: self.id(),
                kind: ExprKind::Unary {
                    op,
                    operand: Box::new(operand),
                },
                span: self.finish(&start),
            });
        }
        if self.check("++") || self.check("--") {
            let op_tok = self.advance()?;
            let target = self.postfix()?;
            return self.step(target, op_tok, &start);
        }
        self.postfix()
    }

    /// Desugars `target++` / `--target` into `target = target +/- 1`.
    fn step(&mut self, target: Expr, op_tok: &Token, start: &SourceSpan) -> PResult<Expr> {
        if !is_lvalue(&target) {
            return Err(FrontendError::Parse {
                span: target.span.clone(),
                expected: "assignable expression".into(),
                found: op_tok.text.clone(),
            });
        }
        let span = self.finish(start);
        let copy = self.reid(&target);
        let one = Expr {
            id: self.id(),
            kind: ExprKind::Literal(Literal::Int(1)),
            span: op_tok.span.clone(),
        };
        let op = if op_tok.text == "++" { BinOp::Add } else { BinOp::Sub };
        let sum = Expr {
            id: self.id(),
            kind: ExprKind::Binary {
                op,
                lhs: Box::new(copy),
                rhs: Box::new(one),
            },
            span: span.clone(),
        };
        Ok(Expr {
            id: self.id(),
            kind: ExprKind::Assign {
                target: Box::new(target),
                value: Box::new(sum),
            },
            span,
        })
    }

    fn reid(&mut self, e: &Expr) -> Expr {
        struct Reid<'p, 't>(&'p mut Parser<'t>);
        impl super::visit::VisitorMut for Reid<'_, '_> {
            fn visit_expr_mut(&mut self, expr: &mut Expr) {
                super::visit::walk_expr_mut(self, expr);
                expr.id = self.0.id();
            }
        }
        let mut copy = e.clone();
        super::visit::VisitorMut::visit_expr_mut(&mut Reid(self), &mut copy);
        copy
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        self.expect("(")?;
        let mut args = Vec::new();
        if !self.check(")") {
            loop {
                args.push(self.expr()?);
                if !self.eat(",") {
                    break;
                }
            }
        }
        self.expect(")")?;
        Ok(args)
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let start = self.start();
        let mut e = self.primary()?;
        loop {
            if self.eat(".") {
                let (name, _) = self.expect_ident()?;
                let kind = if self.check("(") {
                    ExprKind::Call {
                        receiver: Some(Box::new(e)),
                        method: name,
                        args: self.args()?,
                    }
                } else {
                    ExprKind::FieldAccess {
                        object: Box::new(e),
                        field: name,
                    }
                };
                e = Expr {
                    id: self.id(),
                    kind,
                    span: self.finish(&start),
                };
            } else if self.eat("[") {
                let index = self.expr()?;
                self.expect("]")?;
                e = Expr {
                    id: self.id(),
                    kind: ExprKind::Index {
                        array: Box::new(e),
                        index: Box::new(index),
                    },
                    span: self.finish(&start),
                };
            } else if self.check("++") || self.check("--") {
                let op_tok = self.advance()?;
                return self.step(e, op_tok, &start);
            } else {
                return Ok(e);
            }
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        let start = self.start();
        let Some(tok) = self.peek() else {
            return Err(self.error("expression"));
        };
        let kind = match tok.kind {
            TokenKind::IntLiteral => {
                self.advance()?;
                let value = tok.text.parse::<i64>().map_err(|_| FrontendError::Parse {
                    span: tok.span.clone(),
                    expected: "integer literal in range".into(),
                    found: tok.text.clone(),
                })?;
                ExprKind::Literal(Literal::Int(value))
            }
            TokenKind::DoubleLiteral => {
                self.advance()?;
                let value = tok.text.parse::<f64>().map_err(|_| FrontendError::Parse {
                    span: tok.span.clone(),
                    expected: "floating-point literal".into(),
                    found: tok.text.clone(),
                })?;
                ExprKind::Literal(Literal::Double(value))
            }
            TokenKind::StringLiteral => {
                self.advance()?;
                ExprKind::Literal(Literal::Str(unescape(&tok.text)))
            }
            TokenKind::Identifier => {
                self.advance()?;
                if self.check("(") {
                    ExprKind::Call {
                        receiver: None,
                        method: tok.text.clone(),
                        args: self.args()?,
                    }
                } else {
                    ExprKind::Name(tok.text.clone())
                }
            }
            TokenKind::Keyword => match tok.text.as_str() {
                "true" | "false" => {
                    self.advance()?;
                    ExprKind::Literal(Literal::Bool(tok.text == "true"))
                }
                "null" => {
                    self.advance()?;
                    ExprKind::Null
                }
                "this" => {
                    self.advance()?;
                    ExprKind::This
                }
                "super" => {
                    self.advance()?;
                    ExprKind::SuperCall { args: self.args()? }
                }
                "new" => {
                    self.advance()?;
                    self.new_expr()?
                }
                _ => return Err(self.error("expression")),
            },
            TokenKind::Punctuation if tok.text == "(" => {
                self.advance()?;
                let inner = self.expr()?;
                self.expect(")")?;
                return Ok(inner);
            }
            _ => return Err(self.error("expression")),
        };
        Ok(Expr {
            id: self.id(),
            kind,
            span: self.finish(&start),
        })
    }

    fn new_expr(&mut self) -> PResult<ExprKind> {
        let Some(tok) = self.peek() else {
            return Err(self.error("type after `new`"));
        };
        let elem = match (tok.kind, tok.text.as_str()) {
            (TokenKind::Keyword, "int") => TypeRef::Int,
            (TokenKind::Keyword, "byte") => TypeRef::Byte,
            (TokenKind::Keyword, "double") => TypeRef::Double,
            (TokenKind::Keyword, "boolean") => TypeRef::Boolean,
            (TokenKind::Identifier, name) => TypeRef::Named(name.to_string()),
            _ => return Err(self.error("type after `new`")),
        };
        self.advance()?;
        if self.eat("[") {
            let size = self.expr()?;
            self.expect("]")?;
            return Ok(ExprKind::NewArray {
                elem,
                size: Box::new(size),
            });
        }
        match elem {
            TypeRef::Named(class) if self.check("(") => Ok(ExprKind::New {
                class,
                args: self.args()?,
            }),
            _ => Err(self.error("`[`")),
        }
    }
}

enum Member {
    Field(FieldDecl),
    Method(MethodDecl),
}

fn is_lvalue(e: &Expr) -> bool {
    matches!(
        e.kind,
        ExprKind::Name(_) | ExprKind::Index { .. } | ExprKind::FieldAccess { .. }
    )
}

fn unescape(raw: &str) -> String {
    let inner = &raw[1..raw.len() - 1];
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            if let Some(next) = chars.next() {
                out.push(next);
            }
        } else {
            out.push(c);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_source;

    fn unit(src: &str) -> CompilationUnit {
        parse_source(src, "t.sl").unwrap()
    }

    fn body(src: &str) -> Vec<Stmt> {
        let u = unit(&format!("class T {{ void m() {{ {src} }} }}"));
        u.classes[0].methods[0].body.stmts.clone()
    }

    #[test]
    fn minimal_class() {
        let u = unit("class A { }");
        assert_eq!(u.classes.len(), 1);
        assert_eq!(u.classes[0].name, "A");
        assert!(u.classes[0].fields.is_empty());
        assert!(u.classes[0].methods.is_empty());
    }

    #[test]
    fn for_loop_condition() {
        let stmts = body("for (i = 0; i < max; i = i + 1) { }");
        let StmtKind::For {
            cond: Some(cond),
            init,
            update,
            ..
        } = &stmts[0].kind
        else {
            panic!("expected for");
        };
        assert!(init.is_some() && update.is_some());
        match &cond.kind {
            ExprKind::Binary {
                op: BinOp::Lt,
                lhs,
                rhs,
            } => {
                assert_eq!(lhs.as_name(), Some("i"));
                assert_eq!(rhs.as_name(), Some("max"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_class_reports_identifier() {
        let err = parse_source("class {", "t.sl").unwrap_err();
        match err {
            FrontendError::Parse { span, expected, found } => {
                assert_eq!(span.line, 1);
                assert_eq!(expected, "identifier");
                assert_eq!(found, "{");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn increment_is_sugar() {
        let a = body("i++;");
        let b = body("i = i + 1;");
        assert_eq!(
            crate::frontend::normalized_stmts(&a),
            crate::frontend::normalized_stmts(&b)
        );
    }

    #[test]
    fn precedence() {
        let stmts = body("x = 1 + 2 * 3 < 4 && !b || c;");
        let StmtKind::Expr(e) = &stmts[0].kind else { panic!() };
        let ExprKind::Assign { value, .. } = &e.kind else {
            panic!()
        };
        let ExprKind::Binary { op, lhs, .. } = &value.kind else {
            panic!()
        };
        assert_eq!(*op, BinOp::Or);
        let ExprKind::Binary { op, lhs, .. } = &lhs.kind else {
            panic!()
        };
        assert_eq!(*op, BinOp::And);
        let ExprKind::Binary { op, lhs, .. } = &lhs.kind else {
            panic!()
        };
        assert_eq!(*op, BinOp::Lt);
        let ExprKind::Binary { op, rhs, .. } = &lhs.kind else {
            panic!()
        };
        assert_eq!(*op, BinOp::Add);
        assert!(matches!(rhs.kind, ExprKind::Binary { op: BinOp::Mul, .. }));
    }

    #[test]
    fn members_and_modifiers() {
        let u = unit(
            "package a.b;\nclass C extends Thread {\n static final int N = 8;\n byte[] buf;\n C(final String s) { super(s); }\n static void main(String[] args) { }\n}",
        );
        assert_eq!(u.package.as_deref(), Some("a.b"));
        let c = &u.classes[0];
        assert!(c.is_builtin_thread_subclass);
        assert!(c.fields[0].is_static && c.fields[0].is_final);
        assert_eq!(c.fields[1].ty, TypeRef::Array(Box::new(TypeRef::Byte)));
        assert!(c.methods[0].is_constructor);
        assert!(c.methods[0].params[0].is_final);
        assert!(c.methods[1].is_static);
        assert_eq!(c.methods[1].signature(), "main(String[])");
    }

    #[test]
    fn statements_parse() {
        let stmts = body(
            "int[] a = new int[3]; String s = readLine(); a[0] = s.length();\n\
             switch (a[0]) { case 1: println(1); default: }\n\
             try { x.read(a, 0, 3); } catch (Exception e) { } finally { x.close(); }\n\
             synchronized (this) { wait(); }\n\
             assert a[0] > 1 : \"msg\"; return;",
        );
        assert_eq!(stmts.len(), 8);
        assert!(matches!(stmts[3].kind, StmtKind::Switch { ref arms, .. } if arms.len() == 2));
        assert!(matches!(stmts[4].kind, StmtKind::Try { ref catches, finally: Some(_), .. } if catches.len() == 1));
        assert!(matches!(stmts[6].kind, StmtKind::Assert { message: Some(_), .. }));
    }

    #[test]
    fn comments_attach_to_next_statement() {
        let stmts = body("int z; // unused\n x = 1;");
        assert!(stmts[0].comments.is_empty());
        assert_eq!(stmts[1].comments[0].text, "// unused");
    }

    #[test]
    fn try_needs_handler() {
        assert!(parse_source("class T { void m() { try { } } }", "t.sl").is_err());
    }

    #[test]
    fn spans_cover_nodes() {
        let u = unit("class T {\n  void m() {\n    x = a[i];\n  }\n}");
        let m = &u.classes[0].methods[0];
        assert_eq!((m.span.line, m.span.end_line), (2, 4));
        let s = &m.body.stmts[0];
        assert_eq!((s.span.line, s.span.column, s.span.end_column), (3, 5, 13));
    }
}
