//! Syntax tree for the subject language.
//!
//! Every class, member, statement and expression carries a [`NodeId`] that is
//! unique within its compilation unit. Ids are handed out in parse order, so
//! two parses of the same text agree on them; later passes (symbol tables,
//! CFGs, runtime traces) key their side tables by id.

use super::span::{FileName, SourceSpan};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct NodeId(pub u32);

#[derive(Clone, Debug, PartialEq)]
pub struct Comment {
    pub text: String,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompilationUnit {
    pub file: FileName,
    pub package: Option<String>,
    pub classes: Vec<ClassDecl>,
    /// Comments after the last class.
    pub trailing_comments: Vec<Comment>,
    pub source: String,
    /// One past the largest id in use.
    pub next_id: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassDecl {
    pub id: NodeId,
    pub name: String,
    pub name_span: SourceSpan,
    pub extends: Option<String>,
    pub fields: Vec<FieldDecl>,
    pub methods: Vec<MethodDecl>,
    pub is_builtin_thread_subclass: bool,
    pub comments: Vec<Comment>,
    pub trailing_comments: Vec<Comment>,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldDecl {
    pub id: NodeId,
    pub name: String,
    pub name_span: SourceSpan,
    pub ty: TypeRef,
    pub is_static: bool,
    pub is_final: bool,
    pub init: Option<Expr>,
    pub comments: Vec<Comment>,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MethodDecl {
    pub id: NodeId,
    pub name: String,
    pub name_span: SourceSpan,
    pub params: Vec<Param>,
    /// `Void` for constructors.
    pub return_type: TypeRef,
    pub body: Block,
    pub is_constructor: bool,
    pub is_static: bool,
    pub comments: Vec<Comment>,
    pub span: SourceSpan,
}

impl MethodDecl {
    /// `name(T1, T2)` as shown in coverage tables.
    pub fn signature(&self) -> String {
        let params: Vec<String> = self.params.iter().map(|p| p.ty.to_string()).collect();
        format!("{}({})", self.name, params.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub id: NodeId,
    pub name: String,
    pub ty: TypeRef,
    pub is_final: bool,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TypeRef {
    Int,
    Byte,
    Double,
    Boolean,
    Void,
    Named(String),
    Array(Box<TypeRef>),
}

impl std::fmt::Display for TypeRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TypeRef::Int => f.write_str("int"),
            TypeRef::Byte => f.write_str("byte"),
            TypeRef::Double => f.write_str("double"),
            TypeRef::Boolean => f.write_str("boolean"),
            TypeRef::Void => f.write_str("void"),
            TypeRef::Named(n) => f.write_str(n),
            TypeRef::Array(elem) => write!(f, "{elem}[]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub id: NodeId,
    pub stmts: Vec<Stmt>,
    pub trailing_comments: Vec<Comment>,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stmt {
    pub id: NodeId,
    pub kind: StmtKind,
    /// Comments immediately preceding the statement.
    pub comments: Vec<Comment>,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StmtKind {
    Block(Block),
    If {
        cond: Expr,
        then_branch: Box<Stmt>,
        else_branch: Option<Box<Stmt>>,
    },
    While {
        cond: Expr,
        body: Box<Stmt>,
    },
    For {
        init: Option<Box<Stmt>>,
        cond: Option<Expr>,
        update: Option<Expr>,
        body: Box<Stmt>,
    },
    Switch {
        scrutinee: Expr,
        arms: Vec<SwitchArm>,
        trailing_comments: Vec<Comment>,
    },
    Try {
        body: Block,
        catches: Vec<CatchClause>,
        finally: Option<Block>,
    },
    Return(Option<Expr>),
    Expr(Expr),
    LocalDecl {
        name: String,
        name_span: SourceSpan,
        ty: TypeRef,
        is_final: bool,
        init: Option<Expr>,
    },
    Assert {
        cond: Expr,
        message: Option<Expr>,
    },
    Synchronized {
        monitor: Expr,
        body: Block,
    },
    Empty,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SwitchArm {
    pub id: NodeId,
    /// `None` for `default`.
    pub label: Option<Expr>,
    pub body: Vec<Stmt>,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CatchClause {
    pub id: NodeId,
    pub ty: TypeRef,
    pub name: String,
    pub name_span: SourceSpan,
    pub body: Block,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub id: NodeId,
    pub kind: ExprKind,
    pub span: SourceSpan,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
    Rem,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Or => "||",
            BinOp::And => "&&",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
        }
    }

    /// Binding strength; higher binds tighter. Assignment sits at 1.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 2,
            BinOp::And => 3,
            BinOp::Eq | BinOp::Ne => 4,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 5,
            BinOp::Add | BinOp::Sub => 6,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 7,
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Literal {
    Int(i64),
    Double(f64),
    Str(String),
    Bool(bool),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Unary {
        op: UnOp,
        operand: Box<Expr>,
    },
    Assign {
        target: Box<Expr>,
        value: Box<Expr>,
    },
    Call {
        receiver: Option<Box<Expr>>,
        method: String,
        args: Vec<Expr>,
    },
    /// `super(args)` inside a constructor.
    SuperCall {
        args: Vec<Expr>,
    },
    New {
        class: String,
        args: Vec<Expr>,
    },
    NewArray {
        elem: TypeRef,
        size: Box<Expr>,
    },
    Index {
        array: Box<Expr>,
        index: Box<Expr>,
    },
    FieldAccess {
        object: Box<Expr>,
        field: String,
    },
    Name(String),
    Literal(Literal),
    Null,
    This,
}

impl Expr {
    pub fn int_literal(&self) -> Option<i64> {
        match &self.kind {
            ExprKind::Literal(Literal::Int(v)) => Some(*v),
            ExprKind::Unary { op: UnOp::Neg, operand } => operand.int_literal().map(|v| -v),
            _ => None,
        }
    }

    /// Truth value of a literal boolean or integer condition.
    pub fn constant_truth(&self) -> Option<bool> {
        match &self.kind {
            ExprKind::Literal(Literal::Bool(b)) => Some(*b),
            _ => self.int_literal().map(|v| v != 0),
        }
    }

    pub fn as_name(&self) -> Option<&str> {
        match &self.kind {
            ExprKind::Name(n) => Some(n),
            _ => None,
        }
    }

    pub fn is_call_to(&self, name: &str) -> bool {
        matches!(&self.kind, ExprKind::Call { method, .. } if method == name)
    }
}

impl CompilationUnit {
    pub fn class(&self, name: &str) -> Option<&ClassDecl> {
        self.classes.iter().find(|c| c.name == name)
    }

    /// `(class, method)` pairs in declaration order.
    pub fn methods(&self) -> impl Iterator<Item = (&ClassDecl, &MethodDecl)> {
        self.classes.iter().flat_map(|c| c.methods.iter().map(move |m| (c, m)))
    }
}
