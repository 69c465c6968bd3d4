//! Scopes, declarations, name resolution and expression typing.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap, HashSet};

use crate::frontend::*;

use super::types::{self, Type};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ScopeId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymbolKind {
    Class,
    Field,
    Method,
    Param,
    Local,
    /// The variable bound by a `catch` clause.
    CatchParam,
}

#[derive(Clone, Debug)]
pub struct Symbol {
    pub id: SymbolId,
    pub name: String,
    pub kind: SymbolKind,
    /// Declared type; the return type for methods.
    pub ty: Type,
    pub span: SourceSpan,
    pub is_static: bool,
    pub is_final: bool,
    pub usage_count: u32,
    pub write_count: u32,
    /// Declaring node (class, field, method, param, local statement, catch clause).
    pub decl: NodeId,
    /// Enclosing class; `None` for builtins.
    pub class: Option<String>,
    /// Enclosing method for params and locals.
    pub method: Option<NodeId>,
    pub has_initializer: bool,
    pub is_constructor: bool,
    pub arity: usize,
    pub builtin: bool,
}

#[derive(Clone, Debug)]
pub struct Scope {
    pub parent: Option<ScopeId>,
    pub symbols: BTreeMap<String, SymbolId>,
    pub owner: NodeId,
}

/// What a call, `new` or `super(...)` expression invokes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Callee {
    User {
        class: String,
        method: String,
        arity: usize,
        /// `None` for the implicit no-argument constructor.
        decl: Option<NodeId>,
        is_constructor: bool,
    },
    /// Qualified builtin name such as `println`, `Stream.read` or `Thread.<init>`.
    Builtin(String),
    Unknown(String),
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum SemanticError {
    #[error("{span}: cannot resolve `{name}`")]
    Resolution { span: SourceSpan, name: String },
    #[error("{span}: duplicate declaration of `{name}`")]
    DuplicateDeclaration { span: SourceSpan, name: String },
    #[error("{span}: type error: {message}")]
    Type { span: SourceSpan, message: String },
}

#[derive(Clone, Debug)]
pub struct ClassInfo {
    pub name: String,
    pub symbol: SymbolId,
    pub scope: ScopeId,
    pub extends: Option<String>,
    pub decl: NodeId,
    /// Methods and constructors in declaration order.
    pub methods: Vec<SymbolId>,
}

#[derive(Clone, Debug, Default)]
pub struct SymbolTable {
    pub symbols: Vec<Symbol>,
    pub scopes: Vec<Scope>,
    pub classes: BTreeMap<String, ClassInfo>,
    /// `Name` and `FieldAccess` expressions to the symbol they denote.
    pub resolutions: HashMap<NodeId, SymbolId>,
    /// Expressions in assignment-target position.
    pub writes: HashSet<NodeId>,
    pub types: HashMap<NodeId, Type>,
    pub callees: HashMap<NodeId, Callee>,
    /// Declaring node to symbol.
    pub declarations: HashMap<NodeId, SymbolId>,
    pub diagnostics: Vec<SemanticError>,
}

impl SymbolTable {
    pub fn symbol(&self, id: SymbolId) -> &Symbol {
        &self.symbols[id.0 as usize]
    }

    pub fn lookup(&self, mut scope: ScopeId, name: &str) -> Option<SymbolId> {
        loop {
            let s = &self.scopes[scope.0 as usize];
            if let Some(id) = s.symbols.get(name) {
                return Some(*id);
            }
            scope = s.parent?;
        }
    }

    pub fn type_of(&self, expr: &Expr) -> Type {
        self.types.get(&expr.id).cloned().unwrap_or(Type::Unknown)
    }

    pub fn resolved(&self, expr: &Expr) -> Option<&Symbol> {
        self.resolutions.get(&expr.id).map(|id| self.symbol(*id))
    }

    pub fn declared(&self, node: NodeId) -> Option<&Symbol> {
        self.declarations.get(&node).map(|id| self.symbol(*id))
    }

    pub fn callee(&self, expr: &Expr) -> Option<&Callee> {
        self.callees.get(&expr.id)
    }

    /// `class` followed by its user-defined ancestors.
    pub fn ancestry(&self, class: &str) -> Vec<String> {
        let mut chain = Vec::new();
        let mut cur = Some(class.to_string());
        while let Some(c) = cur {
            if chain.contains(&c) {
                break;
            }
            cur = self.classes.get(&c).and_then(|i| i.extends.clone());
            chain.push(c);
        }
        chain
    }

    pub fn is_subclass(&self, sub: &str, sup: &str) -> bool {
        sup == "Object" || self.ancestry(sub).iter().any(|c| c == sup)
    }

    pub fn extends_thread(&self, class: &str) -> bool {
        self.is_subclass(class, "Thread")
    }

    /// Non-constructor method `name/arity` in `class` or an ancestor.
    pub fn find_method(&self, class: &str, name: &str, arity: usize) -> Option<SymbolId> {
        for c in self.ancestry(class) {
            let Some(info) = self.classes.get(&c) else {
                break;
            };
            for &m in &info.methods {
                let s = self.symbol(m);
                if !s.is_constructor && s.name == name && s.arity == arity {
                    return Some(m);
                }
            }
        }
        None
    }

    pub fn find_ctor(&self, class: &str, arity: usize) -> Option<SymbolId> {
        let info = self.classes.get(class)?;
        info.methods.iter().copied().find(|&m| {
            let s = self.symbol(m);
            s.is_constructor && s.arity == arity
        })
    }

    pub fn has_ctor(&self, class: &str) -> bool {
        self.classes
            .get(class)
            .is_some_and(|i| i.methods.iter().any(|&m| self.symbol(m).is_constructor))
    }

    /// Field `name` visible on instances of `class`.
    pub fn find_field(&self, class: &str, name: &str) -> Option<SymbolId> {
        for c in self.ancestry(class) {
            let info = self.classes.get(&c)?;
            if let Some(&id) = self.scopes[info.scope.0 as usize].symbols.get(name) {
                return Some(id);
            }
        }
        None
    }

    pub fn is_user_class(&self, name: &str) -> bool {
        self.classes.contains_key(name)
    }
}

pub fn build_symbol_table(unit: &CompilationUnit) -> SymbolTable {
    let mut b = Builder {
        t: SymbolTable::default(),
        class: String::new(),
        method: None,
        return_type: Type::Void,
        scope: ScopeId(0),
    };
    b.declare_unit(unit);
    for class in &unit.classes {
        b.class_body(class);
    }
    b.t
}

struct Builder {
    t: SymbolTable,
    class: String,
    method: Option<NodeId>,
    return_type: Type,
    scope: ScopeId,
}

struct NewSymbol<'a> {
    name: &'a str,
    kind: SymbolKind,
    ty: Type,
    span: &'a SourceSpan,
    decl: NodeId,
}

impl Builder {
    fn error(&mut self, e: SemanticError) {
        self.t.diagnostics.push(e);
    }

    fn type_error(&mut self, span: &SourceSpan, message: impl Into<String>) {
        self.error(SemanticError::Type {
            span: span.clone(),
            message: message.into(),
        });
    }

    fn push_scope(&mut self, owner: NodeId) -> ScopeId {
        let id = ScopeId(self.t.scopes.len() as u32);
        self.t.scopes.push(Scope {
            parent: Some(self.scope),
            symbols: BTreeMap::new(),
            owner,
        });
        self.scope = id;
        id
    }

    fn pop_scope(&mut self) {
        self.scope = self.t.scopes[self.scope.0 as usize]
            .parent
            .expect("popped the global scope");
    }

    fn new_symbol(&mut self, s: NewSymbol<'_>) -> SymbolId {
        let id = SymbolId(self.t.symbols.len() as u32);
        self.t.symbols.push(Symbol {
            id,
            name: s.name.to_string(),
            kind: s.kind,
            ty: s.ty,
            span: s.span.clone(),
            is_static: false,
            is_final: false,
            usage_count: 0,
            write_count: 0,
            decl: s.decl,
            class: (!self.class.is_empty()).then(|| self.class.clone()),
            method: self.method,
            has_initializer: false,
            is_constructor: false,
            arity: 0,
            builtin: false,
        });
        self.t.declarations.insert(s.decl, id);
        id
    }

    /// Declares in `scope`, reporting duplicates.
    fn declare(&mut self, scope: ScopeId, s: NewSymbol<'_>) -> SymbolId {
        let name = s.name.to_string();
        let span = s.span.clone();
        let id = self.new_symbol(s);
        let symbols = &mut self.t.scopes[scope.0 as usize].symbols;
        let duplicate = match symbols.entry(name) {
            Entry::Vacant(v) => {
                v.insert(id);
                None
            }
            Entry::Occupied(o) => Some(o.key().clone()),
        };
        if let Some(name) = duplicate {
            self.error(SemanticError::DuplicateDeclaration { span, name });
        }
        id
    }

    fn sym_mut(&mut self, id: SymbolId) -> &mut Symbol {
        &mut self.t.symbols[id.0 as usize]
    }

    fn declare_unit(&mut self, unit: &CompilationUnit) {
        self.t.scopes.push(Scope {
            parent: None,
            symbols: BTreeMap::new(),
            owner: NodeId(u32::MAX),
        });
        let global = ScopeId(0);
        let flag_span = SourceSpan::new(unit.file.clone(), 1, 1, 1, 1);
        let flag = self.declare(
            global,
            NewSymbol {
                name: types::ASSERTIONS_ENABLED,
                kind: SymbolKind::Field,
                ty: Type::Boolean,
                span: &flag_span,
                decl: NodeId(u32::MAX),
            },
        );
        self.t.declarations.remove(&NodeId(u32::MAX));
        let s = self.sym_mut(flag);
        s.is_static = true;
        s.is_final = true;
        s.builtin = true;

        for class in &unit.classes {
            if types::BUILTIN_CLASSES.contains(&class.name.as_str()) || class.name == "String" {
                self.error(SemanticError::DuplicateDeclaration {
                    span: class.name_span.clone(),
                    name: class.name.clone(),
                });
                continue;
            }
            self.class = class.name.clone();
            let symbol = self.declare(
                global,
                NewSymbol {
                    name: &class.name,
                    kind: SymbolKind::Class,
                    ty: Type::Class(class.name.clone()),
                    span: &class.name_span,
                    decl: class.id,
                },
            );
            if self.t.classes.contains_key(&class.name) {
                continue;
            }
            self.scope = global;
            let scope = self.push_scope(class.id);
            let mut methods = Vec::new();
            for f in &class.fields {
                let id = self.declare(
                    scope,
                    NewSymbol {
                        name: &f.name,
                        kind: SymbolKind::Field,
                        ty: Type::from_ref(&f.ty),
                        span: &f.name_span,
                        decl: f.id,
                    },
                );
                let s = self.sym_mut(id);
                s.is_static = f.is_static;
                s.is_final = f.is_final;
                s.has_initializer = f.init.is_some();
            }
            for m in &class.methods {
                let clash = methods.iter().any(|&other: &SymbolId| {
                    let o = self.t.symbol(other);
                    o.name == m.name && o.arity == m.params.len() && o.is_constructor == m.is_constructor
                });
                if clash {
                    self.error(SemanticError::DuplicateDeclaration {
                        span: m.name_span.clone(),
                        name: m.name.clone(),
                    });
                }
                let id = self.new_symbol(NewSymbol {
                    name: &m.name,
                    kind: SymbolKind::Method,
                    ty: Type::from_ref(&m.return_type),
                    span: &m.name_span,
                    decl: m.id,
                });
                let s = self.sym_mut(id);
                s.is_static = m.is_static;
                s.is_constructor = m.is_constructor;
                s.arity = m.params.len();
                methods.push(id);
            }
            self.t.classes.insert(
                class.name.clone(),
                ClassInfo {
                    name: class.name.clone(),
                    symbol,
                    scope,
                    extends: class.extends.clone(),
                    decl: class.id,
                    methods,
                },
            );
        }
        self.class.clear();
        self.scope = global;

        // Class scopes chain to their user-defined superclass.
        for class in &unit.classes {
            let Some(base) = &class.extends else { continue };
            let Some(info) = self.t.classes.get(&class.name) else {
                continue;
            };
            let own_scope = info.scope;
            if let Some(base_info) = self.t.classes.get(base) {
                if self.t.ancestry(base).contains(&class.name) {
                    self.type_error(
                        &class.name_span,
                        format!("cyclic inheritance involving `{}`", class.name),
                    );
                } else {
                    self.t.scopes[own_scope.0 as usize].parent = Some(base_info.scope);
                }
            } else if !types::BUILTIN_CLASSES.contains(&base.as_str()) {
                self.error(SemanticError::Resolution {
                    span: class.name_span.clone(),
                    name: base.clone(),
                });
            }
        }
    }

    fn class_body(&mut self, class: &ClassDecl) {
        let Some(info) = self.t.classes.get(&class.name) else {
            return;
        };
        if info.decl != class.id {
            return;
        }
        let class_scope = info.scope;
        self.class = class.name.clone();
        for f in &class.fields {
            self.scope = class_scope;
            self.method = None;
            if let Some(init) = &f.init {
                let ty = self.expr(init);
                let target = Type::from_ref(&f.ty);
                self.check_assignable(&target, &ty, &init.span);
            }
        }
        for m in &class.methods {
            self.scope = class_scope;
            self.method = Some(m.id);
            self.return_type = Type::from_ref(&m.return_type);
            let scope = self.push_scope(m.id);
            for p in &m.params {
                let ty = Type::from_ref(&p.ty);
                if ty == Type::Void {
                    self.type_error(&p.span, "parameter of type void");
                }
                let id = self.declare(
                    scope,
                    NewSymbol {
                        name: &p.name,
                        kind: SymbolKind::Param,
                        ty,
                        span: &p.span,
                        decl: p.id,
                    },
                );
                self.sym_mut(id).is_final = p.is_final;
            }
            self.block(&m.body);
            self.pop_scope();
        }
        self.method = None;
        self.class.clear();
    }

    fn block(&mut self, block: &Block) {
        self.push_scope(block.id);
        for s in &block.stmts {
            self.stmt(s);
        }
        self.pop_scope();
    }

    fn condition(&mut self, e: &Expr) {
        let ty = self.expr(e);
        if !ty.is_condition() {
            self.type_error(&e.span, format!("condition has type {ty}"));
        }
    }

    fn stmt(&mut self, s: &Stmt) {
        match &s.kind {
            StmtKind::Block(b) => self.block(b),
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                self.condition(cond);
                self.stmt(then_branch);
                if let Some(e) = else_branch {
                    self.stmt(e);
                }
            }
            StmtKind::While { cond, body } => {
                self.condition(cond);
                self.stmt(body);
            }
            StmtKind::For {
                init,
                cond,
                update,
                body,
            } => {
                self.push_scope(s.id);
                if let Some(init) = init {
                    self.stmt(init);
                }
                if let Some(c) = cond {
                    self.condition(c);
                }
                self.stmt(body);
                if let Some(u) = update {
                    self.expr(u);
                }
                self.pop_scope();
            }
            StmtKind::Switch { scrutinee, arms, .. } => {
                let ty = self.expr(scrutinee);
                if !(ty.is_integral() || ty.is_string()) {
                    self.type_error(&scrutinee.span, format!("cannot switch on {ty}"));
                }
                self.push_scope(s.id);
                for arm in arms {
                    if let Some(label) = &arm.label {
                        self.expr(label);
                    }
                    for st in &arm.body {
                        self.stmt(st);
                    }
                }
                self.pop_scope();
            }
            StmtKind::Try { body, catches, finally } => {
                self.block(body);
                for c in catches {
                    let scope = self.push_scope(c.id);
                    self.declare(
                        scope,
                        NewSymbol {
                            name: &c.name,
                            kind: SymbolKind::CatchParam,
                            ty: Type::from_ref(&c.ty),
                            span: &c.name_span,
                            decl: c.id,
                        },
                    );
                    self.block(&c.body);
                    self.pop_scope();
                }
                if let Some(f) = finally {
                    self.block(f);
                }
            }
            StmtKind::Return(value) => {
                let expected = self.return_type.clone();
                match value {
                    Some(v) => {
                        let ty = self.expr(v);
                        if expected == Type::Void {
                            self.type_error(&v.span, "returning a value from a void method");
                        } else {
                            self.check_assignable(&expected, &ty, &v.span);
                        }
                    }
                    None if expected != Type::Void => {
                        self.type_error(&s.span, format!("missing return value of type {expected}"));
                    }
                    None => {}
                }
            }
            StmtKind::Expr(e) => {
                self.expr(e);
            }
            StmtKind::LocalDecl {
                name,
                name_span,
                ty,
                is_final,
                init,
            } => {
                let declared = Type::from_ref(ty);
                if let Some(init) = init {
                    let t = self.expr(init);
                    self.check_assignable(&declared, &t, &init.span);
                }
                let scope = self.scope;
                let id = self.declare(
                    scope,
                    NewSymbol {
                        name,
                        kind: SymbolKind::Local,
                        ty: declared,
                        span: name_span,
                        decl: s.id,
                    },
                );
                let sym = self.sym_mut(id);
                sym.is_final = *is_final;
                sym.has_initializer = init.is_some();
            }
            StmtKind::Assert { cond, message } => {
                self.condition(cond);
                if let Some(m) = message {
                    self.expr(m);
                }
            }
            StmtKind::Synchronized { monitor, body } => {
                let ty = self.expr(monitor);
                if !ty.is_reference() {
                    self.type_error(&monitor.span, format!("cannot synchronize on {ty}"));
                }
                self.block(body);
            }
            StmtKind::Empty => {}
        }
    }

    fn assignable(&self, to: &Type, from: &Type) -> bool {
        match (to, from) {
            (Type::Unknown, _) | (_, Type::Unknown) => true,
            _ if to == from => true,
            (Type::Str { .. }, Type::Str { .. }) => true,
            (t, Type::Null) => t.is_reference(),
            (Type::Double, Type::Int | Type::Byte) => true,
            (Type::Int, Type::Byte) | (Type::Byte, Type::Int) => true,
            (Type::Class(a), Type::Class(b)) => self.t.is_subclass(b, a),
            _ => false,
        }
    }

    fn check_assignable(&mut self, to: &Type, from: &Type, span: &SourceSpan) {
        if !self.assignable(to, from) {
            self.type_error(span, format!("expected {to}, found {from}"));
        }
    }

    fn record(&mut self, e: &Expr, ty: Type) -> Type {
        self.t.types.insert(e.id, ty.clone());
        ty
    }

    fn expr(&mut self, e: &Expr) -> Type {
        let ty = self.expr_inner(e);
        self.record(e, ty)
    }

    fn resolve_name(&mut self, e: &Expr, name: &str, write: bool) -> Type {
        if let Some(id) = self.t.lookup(self.scope, name) {
            self.t.resolutions.insert(e.id, id);
            let sym = self.sym_mut(id);
            if write {
                sym.write_count += 1;
            } else {
                sym.usage_count += 1;
            }
            return sym.ty.clone();
        }
        if types::BUILTIN_CLASSES.contains(&name) {
            return Type::Class(name.to_string());
        }
        self.error(SemanticError::Resolution {
            span: e.span.clone(),
            name: name.to_string(),
        });
        Type::Unknown
    }

    fn field_access(&mut self, e: &Expr, object: &Expr, field: &str, write: bool) -> Type {
        let obj = self.expr(object);
        match &obj {
            Type::Array(_) if field == "length" && !write => Type::Int,
            Type::Class(c) if self.t.is_user_class(c) => match self.t.find_field(c, field) {
                Some(id) => {
                    self.t.resolutions.insert(e.id, id);
                    let sym = self.sym_mut(id);
                    if write {
                        sym.write_count += 1;
                    } else {
                        sym.usage_count += 1;
                    }
                    sym.ty.clone()
                }
                None => {
                    self.error(SemanticError::Resolution {
                        span: e.span.clone(),
                        name: field.to_string(),
                    });
                    Type::Unknown
                }
            },
            Type::Unknown => Type::Unknown,
            other => {
                let other = other.clone();
                self.type_error(&e.span, format!("{other} has no field `{field}`"));
                Type::Unknown
            }
        }
    }

    fn target(&mut self, target: &Expr) -> Type {
        let ty = match &target.kind {
            ExprKind::Name(n) => {
                self.t.writes.insert(target.id);
                self.resolve_name(target, n, true)
            }
            ExprKind::FieldAccess { object, field } => {
                self.t.writes.insert(target.id);
                self.field_access(target, object, field, true)
            }
            ExprKind::Index { .. } => return self.expr(target),
            _ => {
                self.type_error(&target.span, "not assignable");
                Type::Unknown
            }
        };
        self.record(target, ty)
    }

    fn args(&mut self, args: &[Expr]) -> Vec<Type> {
        args.iter().map(|a| self.expr(a)).collect()
    }

    fn check_user_args(&mut self, method: SymbolId, args: &[Expr], arg_types: &[Type]) {
        let decl = self.t.symbol(method).decl;
        let Some(params): Option<Vec<Type>> = self.param_types(decl) else {
            return;
        };
        for ((p, a), t) in params.iter().zip(args).zip(arg_types) {
            self.check_assignable(p, t, &a.span);
        }
    }

    fn param_types(&self, method_decl: NodeId) -> Option<Vec<Type>> {
        let mut params: Vec<(NodeId, Type)> = self
            .t
            .symbols
            .iter()
            .filter(|s| s.kind == SymbolKind::Param && s.method == Some(method_decl))
            .map(|s| (s.decl, s.ty.clone()))
            .collect();
        params.sort_by_key(|(id, _)| *id);
        Some(params.into_iter().map(|(_, t)| t).collect())
    }

    fn check_builtin_args(&mut self, b: &types::Builtin, args: &[Expr], arg_types: &[Type]) {
        for ((p, a), t) in b.params.iter().zip(args).zip(arg_types) {
            if !p.accepts(t) {
                self.type_error(&a.span, format!("`{}` does not accept {t}", b.name));
            }
        }
    }

    fn user_callee(&self, method: SymbolId) -> Callee {
        let s = self.t.symbol(method);
        Callee::User {
            class: s.class.clone().unwrap_or_default(),
            method: s.name.clone(),
            arity: s.arity,
            decl: Some(s.decl),
            is_constructor: s.is_constructor,
        }
    }

    /// Method `name/arity` on an instance of `class` (user or builtin).
    fn method_on(&mut self, class: &str, name: &str, args: &[Expr], arg_types: &[Type]) -> Option<(Callee, Type)> {
        let arity = args.len();
        if self.t.is_user_class(class) {
            if let Some(m) = self.t.find_method(class, name, arity) {
                self.check_user_args(m, args, arg_types);
                return Some((self.user_callee(m), self.t.symbol(m).ty.clone()));
            }
            if !self.t.extends_thread(class) {
                return None;
            }
        }
        let builtin_class = if self.t.is_user_class(class) { "Thread" } else { class };
        let b = types::find_method(builtin_class, name, arity)?;
        self.check_builtin_args(b, args, arg_types);
        Some((Callee::Builtin(b.name.to_string()), (b.ret)()))
    }

    fn expr_inner(&mut self, e: &Expr) -> Type {
        match &e.kind {
            ExprKind::Name(n) => self.resolve_name(e, n, false),
            ExprKind::Literal(Literal::Int(v)) => {
                if *v > i64::from(i32::MAX) + 1 {
                    self.type_error(&e.span, format!("integer literal {v} out of range"));
                }
                Type::Int
            }
            ExprKind::Literal(Literal::Double(_)) => Type::Double,
            ExprKind::Literal(Literal::Str(_)) => Type::string(),
            ExprKind::Literal(Literal::Bool(_)) => Type::Boolean,
            ExprKind::Null => Type::Null,
            ExprKind::This => {
                if self.class.is_empty() {
                    Type::Unknown
                } else {
                    Type::Class(self.class.clone())
                }
            }
            ExprKind::Assign { target, value } => {
                let t = self.target(target);
                let v = self.expr(value);
                self.check_assignable(&t, &v, &value.span);
                t
            }
            ExprKind::Unary { op, operand } => {
                let t = self.expr(operand);
                match op {
                    UnOp::Not => {
                        if !t.is_condition() {
                            self.type_error(&e.span, format!("`!` applied to {t}"));
                        }
                        Type::Boolean
                    }
                    UnOp::Neg => {
                        if !t.is_numeric() {
                            self.type_error(&e.span, format!("`-` applied to {t}"));
                            return Type::Unknown;
                        }
                        t
                    }
                }
            }
            ExprKind::Binary { op, lhs, rhs } => {
                let l = self.expr(lhs);
                let r = self.expr(rhs);
                self.binary(e, *op, &l, &r)
            }
            ExprKind::Call { receiver, method, args } => {
                let recv = receiver.as_ref().map(|r| self.expr(r));
                let arg_types = self.args(args);
                let resolved = match &recv {
                    None => {
                        let own = if self.class.is_empty() {
                            None
                        } else {
                            let class = self.class.clone();
                            self.method_on(&class, method, args, &arg_types)
                        };
                        own.or_else(|| {
                            let b = types::find_global(method, args.len())?;
                            self.check_builtin_args(b, args, &arg_types);
                            Some((Callee::Builtin(b.name.to_string()), (b.ret)()))
                        })
                    }
                    Some(Type::Str { .. }) => self.method_on("String", method, args, &arg_types),
                    Some(Type::Class(c)) => {
                        let c = c.clone();
                        self.method_on(&c, method, args, &arg_types)
                    }
                    Some(Type::Unknown) => {
                        self.t.callees.insert(e.id, Callee::Unknown(method.clone()));
                        return Type::Unknown;
                    }
                    Some(_) => None,
                };
                match resolved {
                    Some((callee, ty)) => {
                        self.t.callees.insert(e.id, callee);
                        ty
                    }
                    None => {
                        self.t.callees.insert(e.id, Callee::Unknown(method.clone()));
                        self.error(SemanticError::Resolution {
                            span: e.span.clone(),
                            name: format!("{method}/{}", args.len()),
                        });
                        Type::Unknown
                    }
                }
            }
            ExprKind::SuperCall { args } => {
                let arg_types = self.args(args);
                let base = self
                    .t
                    .classes
                    .get(&self.class)
                    .and_then(|i| i.extends.clone())
                    .unwrap_or_else(|| "Object".to_string());
                let callee = self.ctor_callee(&base, args, &arg_types, &e.span);
                self.t.callees.insert(e.id, callee);
                Type::Void
            }
            ExprKind::New { class, args } => {
                let arg_types = self.args(args);
                let callee = self.ctor_callee(class, args, &arg_types, &e.span);
                self.t.callees.insert(e.id, callee);
                Type::Class(class.clone())
            }
            ExprKind::NewArray { elem, size } => {
                let t = self.expr(size);
                if !t.is_integral() {
                    self.type_error(&size.span, format!("array size has type {t}"));
                }
                let elem = Type::from_ref(elem);
                if elem == Type::Void {
                    self.type_error(&e.span, "array of void");
                }
                Type::Array(Box::new(elem))
            }
            ExprKind::Index { array, index } => {
                let a = self.expr(array);
                let i = self.expr(index);
                if !i.is_integral() {
                    self.type_error(&index.span, format!("array index has type {i}"));
                }
                match a {
                    Type::Array(elem) => *elem,
                    Type::Unknown => Type::Unknown,
                    other => {
                        self.type_error(&array.span, format!("indexing non-array type {other}"));
                        Type::Unknown
                    }
                }
            }
            ExprKind::FieldAccess { object, field } => self.field_access(e, object, field, false),
        }
    }

    fn ctor_callee(&mut self, class: &str, args: &[Expr], arg_types: &[Type], span: &SourceSpan) -> Callee {
        let arity = args.len();
        if self.t.is_user_class(class) {
            if let Some(c) = self.t.find_ctor(class, arity) {
                self.check_user_args(c, args, arg_types);
                return self.user_callee(c);
            }
            if arity == 0 && !self.t.has_ctor(class) {
                return Callee::User {
                    class: class.to_string(),
                    method: class.to_string(),
                    arity: 0,
                    decl: None,
                    is_constructor: true,
                };
            }
        } else if types::BUILTIN_CTORS.contains(&(class, arity)) {
            return Callee::Builtin(format!("{class}.<init>"));
        }
        self.error(SemanticError::Resolution {
            span: span.clone(),
            name: format!("{class}/{arity}"),
        });
        Callee::Unknown(class.to_string())
    }

    fn binary(&mut self, e: &Expr, op: BinOp, l: &Type, r: &Type) -> Type {
        let mismatch = |b: &mut Builder| {
            b.type_error(&e.span, format!("`{}` applied to {l} and {r}", op.symbol()));
            Type::Unknown
        };
        match op {
            BinOp::Add if l.is_string() || r.is_string() => {
                if *l == Type::Void || *r == Type::Void {
                    return mismatch(self);
                }
                Type::string()
            }
            BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Rem => {
                if l.is_numeric() && r.is_numeric() {
                    Type::widen(l, r)
                } else {
                    mismatch(self)
                }
            }
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                if l.is_numeric() && r.is_numeric() {
                    Type::Boolean
                } else {
                    mismatch(self)
                }
            }
            BinOp::Eq | BinOp::Ne => {
                let ok = (l.is_numeric() && r.is_numeric())
                    || (matches!(l, Type::Boolean | Type::Unknown) && matches!(r, Type::Boolean | Type::Unknown))
                    || (l.is_reference() && r.is_reference());
                if ok {
                    Type::Boolean
                } else {
                    mismatch(self)
                }
            }
            BinOp::And | BinOp::Or => {
                if l.is_condition() && r.is_condition() {
                    Type::Boolean
                } else {
                    mismatch(self)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(src: &str) -> (CompilationUnit, SymbolTable) {
        let u = parse_source(src, "t.sl").unwrap();
        let t = build_symbol_table(&u);
        (u, t)
    }

    fn sym<'t>(t: &'t SymbolTable, name: &str, kind: SymbolKind) -> &'t Symbol {
        t.symbols
            .iter()
            .find(|s| s.name == name && s.kind == kind)
            .unwrap_or_else(|| panic!("no symbol {name}"))
    }

    #[test]
    fn unused_local_has_zero_usages() {
        let (_, t) = table("class T { void test() { int z; } }");
        assert!(t.diagnostics.is_empty(), "{:?}", t.diagnostics);
        assert_eq!(sym(&t, "z", SymbolKind::Local).usage_count, 0);
    }

    #[test]
    fn local_shadows_field() {
        let (u, t) = table("class T { int x; void m() { int x = 1; println(x); } }");
        let StmtKind::Expr(call) = &u.classes[0].methods[0].body.stmts[1].kind else {
            panic!()
        };
        let ExprKind::Call { args, .. } = &call.kind else {
            panic!()
        };
        assert_eq!(t.resolved(&args[0]).unwrap().kind, SymbolKind::Local);
        assert_eq!(sym(&t, "x", SymbolKind::Field).usage_count, 0);
    }

    #[test]
    fn reads_and_writes_counted() {
        let (_, t) = table("class T { void m(int p) { int i = 0; i = i + 1; i++; p = i; } }");
        let i = sym(&t, "i", SymbolKind::Local);
        assert_eq!((i.usage_count, i.write_count), (3, 2));
        assert_eq!(sym(&t, "p", SymbolKind::Param).write_count, 1);
    }

    #[test]
    fn types_of_expressions() {
        let (u, t) = table(
            "class T { void m(Stream br) { String a = \"x\"; boolean b = a == \"y\"; double[] d = new double[10]; double v = d[3]; String s = br.readLine(); } }",
        );
        let stmts = &u.classes[0].methods[0].body.stmts;
        let init = |i: usize| match &stmts[i].kind {
            StmtKind::LocalDecl { init: Some(e), .. } => e.clone(),
            _ => panic!(),
        };
        let eq = init(1);
        assert_eq!(t.type_of(&eq), Type::Boolean);
        let ExprKind::Binary { lhs, rhs, .. } = &eq.kind else {
            panic!()
        };
        assert_eq!(t.type_of(lhs), Type::string());
        assert_eq!(t.type_of(rhs), Type::string());
        assert_eq!(t.type_of(&init(3)), Type::Double);
        assert_eq!(t.type_of(&init(4)), Type::Str { nullable: true });
        assert!(t.diagnostics.is_empty(), "{:?}", t.diagnostics);
    }

    #[test]
    fn errors_reported() {
        let (_, t) = table("class T { void m() { y = 1; int a; int a; boolean b = 1 + true; } }");
        let kinds: Vec<_> = t
            .diagnostics
            .iter()
            .map(|d| match d {
                SemanticError::Resolution { .. } => "res",
                SemanticError::DuplicateDeclaration { .. } => "dup",
                SemanticError::Type { .. } => "type",
            })
            .collect();
        assert_eq!(kinds, vec!["res", "dup", "type"]);
    }

    #[test]
    fn inherited_thread_methods() {
        let (u, t) = table(
            "class Y extends Thread { Y(String s) { super(s); } void run() { println(getName()); sleep(random() * 1000.0); } static void main() { new Y(\"a\").start(); } }",
        );
        assert!(t.diagnostics.is_empty(), "{:?}", t.diagnostics);
        let mut builtins: Vec<String> = t
            .callees
            .values()
            .filter_map(|c| match c {
                Callee::Builtin(n) => Some(n.clone()),
                _ => None,
            })
            .collect();
        builtins.sort();
        assert_eq!(
            builtins,
            vec![
                "Thread.<init>",
                "Thread.getName",
                "Thread.sleep",
                "Thread.start",
                "println",
                "random"
            ]
        );
        assert!(u.classes[0].is_builtin_thread_subclass);
    }
}
