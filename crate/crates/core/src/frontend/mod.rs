//! Lexing, parsing, pretty-printing and assert instrumentation.

pub mod ast;
pub mod instrument;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod span;
pub mod visit;

pub use ast::*;
pub use instrument::instrument_asserts;
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::parse;
pub use pretty::pretty_print;
pub use span::{FileName, SourceSpan};

use visit::VisitorMut;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FrontendError {
    #[error("{span}: lex error: {message}")]
    Lex { span: SourceSpan, message: String },
    #[error("{span}: parse error: expected {expected}, found `{found}`")]
    Parse {
        span: SourceSpan,
        expected: String,
        found: String,
    },
}

impl FrontendError {
    pub fn span(&self) -> &SourceSpan {
        match self {
            FrontendError::Lex { span, .. } | FrontendError::Parse { span, .. } => span,
        }
    }
}

/// Tokenizes and parses `source`, keeping the text on the unit.
pub fn parse_source(source: &str, file: impl AsRef<str>) -> Result<CompilationUnit, FrontendError> {
    let file = FileName::new(file);
    let tokens = tokenize(source, &file)?;
    let mut unit = parse(&tokens, &file)?;
    unit.source = source.to_string();
    Ok(unit)
}

/// Copy of `unit` with ids, spans and source text cleared, for comparisons
/// that should ignore layout.
pub fn normalized(unit: &CompilationUnit) -> CompilationUnit {
    let mut u = unit.clone();
    let blank = SourceSpan::default();
    u.file = FileName::default();
    u.source.clear();
    u.next_id = 0;
    clear_comments(&mut u.trailing_comments);
    for class in &mut u.classes {
        class.id = NodeId(0);
        class.span = blank.clone();
        class.name_span = blank.clone();
        clear_comments(&mut class.comments);
        clear_comments(&mut class.trailing_comments);
        for field in &mut class.fields {
            field.id = NodeId(0);
            field.span = blank.clone();
            field.name_span = blank.clone();
            clear_comments(&mut field.comments);
            if let Some(init) = &mut field.init {
                Normalize.visit_expr_mut(init);
            }
        }
        for method in &mut class.methods {
            method.id = NodeId(0);
            method.span = blank.clone();
            method.name_span = blank.clone();
            clear_comments(&mut method.comments);
            for p in &mut method.params {
                p.id = NodeId(0);
                p.span = blank.clone();
            }
            Normalize.visit_block_mut(&mut method.body);
        }
    }
    u
}

/// [`normalized`] for a statement list.
pub fn normalized_stmts(stmts: &[Stmt]) -> Vec<Stmt> {
    let mut out = stmts.to_vec();
    for s in &mut out {
        Normalize.visit_stmt_mut(s);
    }
    out
}

fn clear_comments(comments: &mut [Comment]) {
    for c in comments {
        c.span = SourceSpan::default();
    }
}

struct Normalize;

impl VisitorMut for Normalize {
    fn visit_stmt_mut(&mut self, stmt: &mut Stmt) {
        stmt.id = NodeId(0);
        stmt.span = SourceSpan::default();
        clear_comments(&mut stmt.comments);
        match &mut stmt.kind {
            StmtKind::LocalDecl { name_span, .. } => *name_span = SourceSpan::default(),
            StmtKind::Switch {
                arms,
                trailing_comments,
                ..
            } => {
                clear_comments(trailing_comments);
                for arm in arms {
                    arm.id = NodeId(0);
                    arm.span = SourceSpan::default();
                }
            }
            StmtKind::Try { catches, .. } => {
                for c in catches {
                    c.id = NodeId(0);
                    c.span = SourceSpan::default();
                    c.name_span = SourceSpan::default();
                }
            }
            _ => {}
        }
        visit::walk_stmt_mut(self, stmt);
    }

    fn visit_expr_mut(&mut self, expr: &mut Expr) {
        expr.id = NodeId(0);
        expr.span = SourceSpan::default();
        visit::walk_expr_mut(self, expr);
    }

    fn visit_block_mut(&mut self, block: &mut Block) {
        block.id = NodeId(0);
        block.span = SourceSpan::default();
        clear_comments(&mut block.trailing_comments);
        for s in &mut block.stmts {
            self.visit_stmt_mut(s);
        }
    }
}
