//! Tree-walking interpreter with coverage tracing.
//!
//! Runs are deterministic: `random()` draws from a seeded generator, stdin is
//! a scripted list of lines and `open()` reads from an in-memory file map.
//! Halting faults (bounds, null, step limit ...) end the run and are recorded
//! in the trace rather than returned as errors. Exceptions are never thrown,
//! so catch blocks do not execute.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::rc::Rc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cfg::EdgeKind;
use crate::frontend::pretty::expr_to_string;
use crate::frontend::*;
use crate::semantics::{build_symbol_table, Callee, SymbolId, SymbolKind, SymbolTable, Type};

use super::value::{Object, Stream, Value};

#[derive(Clone, Debug)]
pub struct RunOptions {
    /// `Class.method`; defaults to the first static `main`.
    pub entry: Option<String>,
    pub assertions_enabled: bool,
    pub coverage_enabled: bool,
    pub stdin_script: Vec<String>,
    pub file_system_stub: BTreeMap<String, String>,
    pub max_steps: u64,
    pub seed: u64,
    pub max_call_depth: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            entry: None,
            assertions_enabled: false,
            coverage_enabled: false,
            stdin_script: Vec::new(),
            file_system_stub: BTreeMap::new(),
            max_steps: 1_000_000,
            seed: 0,
            max_call_depth: 1000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FaultKind {
    OutOfBounds,
    NullDereference,
    AssertionFailure,
    StepLimit,
    ArithmeticOverflowWarning,
    StackOverflow,
    DivisionByZero,
    InvalidNumber,
}

impl FaultKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FaultKind::OutOfBounds => "out_of_bounds",
            FaultKind::NullDereference => "null_dereference",
            FaultKind::AssertionFailure => "assertion_failure",
            FaultKind::StepLimit => "step_limit",
            FaultKind::ArithmeticOverflowWarning => "arithmetic_overflow_warning",
            FaultKind::StackOverflow => "stack_overflow",
            FaultKind::DivisionByZero => "division_by_zero",
            FaultKind::InvalidNumber => "invalid_number",
        }
    }

    /// Whether the run stops at this fault.
    pub fn halts(self) -> bool {
        !matches!(self, FaultKind::AssertionFailure | FaultKind::ArithmeticOverflowWarning)
    }
}

impl fmt::Display for FaultKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fault {
    pub kind: FaultKind,
    pub span: SourceSpan,
    pub detail: String,
    /// Expression or statement at fault.
    pub node: NodeId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AssertionOutcome {
    Passed,
    Failed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssertionRecord {
    /// `Class.method`.
    pub unit_name: String,
    pub statement_text: String,
    pub span: SourceSpan,
    pub message: String,
    pub outcome: AssertionOutcome,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunTrace {
    pub executed_instruction_ids: BTreeSet<NodeId>,
    pub branch_outcomes: BTreeMap<(NodeId, EdgeKind), u64>,
    /// `Class.method/arity`, including implicit constructors.
    pub entered_methods: BTreeSet<String>,
    pub stdout: Vec<String>,
    pub faults: Vec<Fault>,
    pub assertions: Vec<AssertionRecord>,
    pub steps: u64,
    pub coverage_enabled: bool,
    pub halted: bool,
}

impl RunTrace {
    pub fn faults_of(&self, kind: FaultKind) -> impl Iterator<Item = &Fault> {
        self.faults.iter().filter(move |f| f.kind == kind)
    }

    /// The fault that stopped the run, if any.
    pub fn halting_fault(&self) -> Option<&Fault> {
        self.faults.iter().find(|f| f.kind.halts())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RunError {
    #[error("entry point `{0}` not found")]
    EntryNotFound(String),
    #[error("entry point `{0}` is not static")]
    EntryNotStatic(String),
}

/// Builds the symbol table and runs `unit`.
pub fn execute(unit: &CompilationUnit, options: &RunOptions) -> Result<RunTrace, RunError> {
    let table = build_symbol_table(unit);
    execute_with(unit, &table, options)
}

const INTERPRETER_STACK: usize = 256 * 1024 * 1024;

pub fn execute_with(unit: &CompilationUnit, table: &SymbolTable, options: &RunOptions) -> Result<RunTrace, RunError> {
    let (class, method) = find_entry(unit, options.entry.as_deref())?;
    Ok(std::thread::scope(|scope| {
        std::thread::Builder::new()
            .name("interpreter".into())
            .stack_size(INTERPRETER_STACK)
            .spawn_scoped(scope, || run(unit, table, options, class, method))
            .expect("spawn interpreter thread")
            .join()
            .expect("interpreter thread panicked")
    }))
}

fn find_entry<'u>(unit: &'u CompilationUnit, entry: Option<&str>) -> Result<(&'u ClassDecl, &'u MethodDecl), RunError> {
    match entry {
        None => unit
            .methods()
            .find(|(_, m)| m.is_static && m.name == "main")
            .ok_or_else(|| RunError::EntryNotFound("main".into())),
        Some(name) => {
            let (c, m) = name
                .split_once('.')
                .ok_or_else(|| RunError::EntryNotFound(name.into()))?;
            let found = unit
                .methods()
                .find(|(cl, me)| cl.name == c && me.name == m)
                .ok_or_else(|| RunError::EntryNotFound(name.into()))?;
            if !found.1.is_static {
                return Err(RunError::EntryNotStatic(name.into()));
            }
            Ok(found)
        }
    }
}

fn run(
    unit: &CompilationUnit,
    table: &SymbolTable,
    options: &RunOptions,
    class: &ClassDecl,
    method: &MethodDecl,
) -> RunTrace {
    let mut it = Interp {
        t: table,
        opts: options,
        trace: RunTrace {
            coverage_enabled: options.coverage_enabled,
            ..RunTrace::default()
        },
        statics: HashMap::new(),
        stdin: options.stdin_script.iter().cloned().collect(),
        rng: ChaCha8Rng::seed_from_u64(options.seed),
        interned: HashMap::new(),
        depth: 0,
        methods: unit.methods().map(|(c, m)| (m.id, (c, m))).collect(),
        classes: unit.classes.iter().map(|c| (c.name.clone(), c)).collect(),
        unit_name: String::new(),
    };
    let _ = it.run_main(unit, class, method);
    it.trace
}

/// Marker for a halting fault, already recorded in the trace.
struct Halt;

type Exec<T> = Result<T, Halt>;

enum Flow {
    Normal,
    Return(Value),
}

type ObjRef = Rc<RefCell<Object>>;

#[derive(Default)]
struct Frame {
    locals: HashMap<SymbolId, Value>,
    this: Option<ObjRef>,
}

struct Interp<'u> {
    t: &'u SymbolTable,
    opts: &'u RunOptions,
    trace: RunTrace,
    statics: HashMap<SymbolId, Value>,
    stdin: VecDeque<String>,
    rng: ChaCha8Rng,
    interned: HashMap<String, Rc<str>>,
    depth: usize,
    methods: HashMap<NodeId, (&'u ClassDecl, &'u MethodDecl)>,
    classes: HashMap<String, &'u ClassDecl>,
    /// `Class.method` of the executing method, for assertion records.
    unit_name: String,
}

impl<'u> Interp<'u> {
    fn run_main(&mut self, unit: &'u CompilationUnit, class: &'u ClassDecl, method: &'u MethodDecl) -> Exec<()> {
        for c in &unit.classes {
            for f in &c.fields {
                if !f.is_static {
                    continue;
                }
                let Some(sym) = self.t.declarations.get(&f.id).copied() else {
                    continue;
                };
                let ty = self.t.symbol(sym).ty.clone();
                let v = match &f.init {
                    Some(e) => {
                        let mut frame = Frame::default();
                        let v = self.eval(e, &mut frame)?;
                        coerce(v, &ty)
                    }
                    None => Value::default_for(&ty),
                };
                self.statics.insert(sym, v);
            }
        }
        let args = method
            .params
            .iter()
            .map(|p| match Type::from_ref(&p.ty) {
                Type::Array(_) => Value::Array(Rc::new(RefCell::new(Vec::new()))),
                t => Value::default_for(&t),
            })
            .collect();
        self.invoke(class, method, None, args)?;
        Ok(())
    }

    fn fault(&mut self, kind: FaultKind, span: &SourceSpan, node: NodeId, detail: impl Into<String>) -> Halt {
        self.trace.faults.push(Fault {
            kind,
            span: span.clone(),
            detail: detail.into(),
            node,
        });
        if kind.halts() {
            self.trace.halted = true;
        }
        Halt
    }

    fn warn_overflow(&mut self, e: &Expr, detail: String) {
        let _ = self.fault(FaultKind::ArithmeticOverflowWarning, &e.span, e.id, detail);
    }

    fn step(&mut self, span: &SourceSpan, node: NodeId) -> Exec<()> {
        self.trace.steps += 1;
        if self.trace.steps > self.opts.max_steps {
            let limit = self.opts.max_steps;
            return Err(self.fault(FaultKind::StepLimit, span, node, format!("exceeded {limit} steps")));
        }
        Ok(())
    }

    fn mark(&mut self, id: NodeId) {
        if self.opts.coverage_enabled {
            self.trace.executed_instruction_ids.insert(id);
        }
    }

    fn branch(&mut self, id: NodeId, kind: EdgeKind) {
        if self.opts.coverage_enabled {
            *self.trace.branch_outcomes.entry((id, kind)).or_insert(0) += 1;
        }
    }

    fn intern(&mut self, s: &str) -> Rc<str> {
        self.interned
            .entry(s.to_string())
            .or_insert_with(|| Rc::from(s))
            .clone()
    }

    fn string(s: String) -> Value {
        Value::Str(Rc::from(s))
    }

    // ---- methods and objects ---------------------------------------------

    fn invoke(
        &mut self,
        class: &'u ClassDecl,
        method: &'u MethodDecl,
        this: Option<ObjRef>,
        args: Vec<Value>,
    ) -> Exec<Value> {
        if self.depth >= self.opts.max_call_depth {
            let depth = self.depth;
            return Err(self.fault(
                FaultKind::StackOverflow,
                &method.name_span,
                method.id,
                format!("call depth {depth} exceeded entering {}.{}", class.name, method.name),
            ));
        }
        self.trace
            .entered_methods
            .insert(format!("{}.{}/{}", class.name, method.name, method.params.len()));
        let mut frame = Frame {
            locals: HashMap::new(),
            this,
        };
        for (p, v) in method.params.iter().zip(args) {
            if let Some(&sym) = self.t.declarations.get(&p.id) {
                let ty = self.t.symbol(sym).ty.clone();
                frame.locals.insert(sym, coerce(v, &ty));
            }
        }
        let saved = std::mem::replace(&mut self.unit_name, format!("{}.{}", class.name, method.name));
        self.depth += 1;
        let result = self.method_body(class, method, &mut frame);
        self.depth -= 1;
        self.unit_name = saved;
        match result? {
            Flow::Return(v) => Ok(v),
            Flow::Normal => Ok(Value::Void),
        }
    }

    fn method_body(&mut self, class: &'u ClassDecl, method: &'u MethodDecl, frame: &mut Frame) -> Exec<Flow> {
        if method.is_constructor {
            let explicit_super =
                method.body.stmts.first().is_some_and(
                    |s| matches!(&s.kind, StmtKind::Expr(e) if matches!(e.kind, ExprKind::SuperCall { .. })),
                );
            if !explicit_super {
                if let (Some(base), Some(this)) = (class.extends.as_ref(), frame.this.clone()) {
                    if self.classes.contains_key(base) {
                        self.construct(base, this, Vec::new(), &method.span, method.id)?;
                    }
                }
            }
        }
        self.stmts(&method.body.stmts, frame)
    }

    fn user_method(&self, decl: NodeId) -> Option<(&'u ClassDecl, &'u MethodDecl)> {
        self.methods.get(&decl).copied()
    }

    /// Allocates an instance of a user class and runs its field initializers.
    fn instantiate(&mut self, class: &str) -> Exec<ObjRef> {
        let chain: Vec<String> = self.t.ancestry(class).into_iter().rev().collect();
        let obj = Rc::new(RefCell::new(Object {
            class: class.to_string(),
            fields: BTreeMap::new(),
            thread_name: None,
        }));
        for c in &chain {
            let Some(&decl) = self.classes.get(c) else {
                continue;
            };
            for f in decl.fields.iter().filter(|f| !f.is_static) {
                let ty = Type::from_ref(&f.ty);
                obj.borrow_mut().fields.insert(f.name.clone(), Value::default_for(&ty));
            }
        }
        for c in &chain {
            let Some(&decl) = self.classes.get(c) else {
                continue;
            };
            for f in decl.fields.iter().filter(|f| !f.is_static) {
                if let Some(init) = &f.init {
                    let mut frame = Frame {
                        locals: HashMap::new(),
                        this: Some(obj.clone()),
                    };
                    let v = self.eval(init, &mut frame)?;
                    let v = coerce(v, &Type::from_ref(&f.ty));
                    obj.borrow_mut().fields.insert(f.name.clone(), v);
                }
            }
        }
        Ok(obj)
    }

    /// Runs the constructor of `class` on an existing object.
    fn construct(&mut self, class: &str, obj: ObjRef, args: Vec<Value>, span: &SourceSpan, node: NodeId) -> Exec<()> {
        match self.t.find_ctor(class, args.len()) {
            Some(sym) => {
                let decl = self.t.symbol(sym).decl;
                let (c, m) = self.user_method(decl).expect("constructor declared in unit");
                self.invoke(c, m, Some(obj), args)?;
            }
            None => {
                if self.depth >= self.opts.max_call_depth {
                    return Err(self.fault(FaultKind::StackOverflow, span, node, "call depth exceeded"));
                }
                self.trace.entered_methods.insert(format!("{class}.{class}/0"));
                let base = self.classes.get(class).and_then(|c| c.extends.clone());
                if let Some(base) = base {
                    if self.classes.contains_key(&base) {
                        self.depth += 1;
                        let r = self.construct(&base, obj, Vec::new(), span, node);
                        self.depth -= 1;
                        r?;
                    }
                }
            }
        }
        Ok(())
    }

    // ---- statements --------------------------------------------------------

    fn stmts(&mut self, stmts: &'u [Stmt], frame: &mut Frame) -> Exec<Flow> {
        for s in stmts {
            if let Flow::Return(v) = self.exec(s, frame)? {
                return Ok(Flow::Return(v));
            }
        }
        Ok(Flow::Normal)
    }

    fn cond(&mut self, s: &Stmt, cond: &'u Expr, frame: &mut Frame) -> Exec<bool> {
        let v = self.eval(cond, frame)?.truth();
        if cond.constant_truth().is_none() {
            self.branch(s.id, if v { EdgeKind::TrueBranch } else { EdgeKind::FalseBranch });
        }
        Ok(v)
    }

    fn exec(&mut self, s: &'u Stmt, frame: &mut Frame) -> Exec<Flow> {
        self.step(&s.span, s.id)?;
        self.mark(s.id);
        match &s.kind {
            StmtKind::Block(b) => self.stmts(&b.stmts, frame),
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                if self.cond(s, cond, frame)? {
                    self.exec(then_branch, frame)
                } else if let Some(e) = else_branch {
                    self.exec(e, frame)
                } else {
                    Ok(Flow::Normal)
                }
            }
            StmtKind::While { cond, body } => {
                let mut first = true;
                loop {
                    if !first {
                        self.step(&s.span, s.id)?;
                        self.mark(s.id);
                    }
                    first = false;
                    if !self.cond(s, cond, frame)? {
                        return Ok(Flow::Normal);
                    }
                    if let Flow::Return(v) = self.exec(body, frame)? {
                        return Ok(Flow::Return(v));
                    }
                }
            }
            StmtKind::For {
                init,
                cond,
                update,
                body,
            } => {
                if let Some(i) = init {
                    self.exec(i, frame)?;
                }
                let mut first = true;
                loop {
                    if !first {
                        self.step(&s.span, s.id)?;
                        self.mark(s.id);
                    }
                    first = false;
                    let go = match cond {
                        Some(c) => self.cond(s, c, frame)?,
                        None => true,
                    };
                    if !go {
                        return Ok(Flow::Normal);
                    }
                    if let Flow::Return(v) = self.exec(body, frame)? {
                        return Ok(Flow::Return(v));
                    }
                    if let Some(u) = update {
                        self.mark(u.id);
                        self.eval(u, frame)?;
                    }
                }
            }
            StmtKind::Switch { scrutinee, arms, .. } => {
                let v = self.eval(scrutinee, frame)?;
                let mut chosen = None;
                for (i, arm) in arms.iter().enumerate() {
                    if let Some(label) = &arm.label {
                        let l = self.eval(label, frame)?;
                        let hit = match (&v, &l) {
                            (Value::Str(a), Value::Str(b)) => a == b,
                            _ => v.same(&l),
                        };
                        if hit {
                            chosen = Some(i);
                            break;
                        }
                    }
                }
                let chosen = chosen.or_else(|| arms.iter().position(|a| a.label.is_none()));
                let has_default = arms.iter().any(|a| a.label.is_none());
                let outgoing = arms.len() + usize::from(!has_default);
                let index = chosen.unwrap_or(arms.len());
                if outgoing >= 2 {
                    self.branch(s.id, EdgeKind::SwitchCase(index));
                }
                match chosen {
                    Some(i) => self.stmts(&arms[i].body, frame),
                    None => Ok(Flow::Normal),
                }
            }
            StmtKind::Try { body, finally, .. } => {
                if let Flow::Return(v) = self.stmts(&body.stmts, frame)? {
                    if let Some(f) = finally {
                        if let Flow::Return(w) = self.stmts(&f.stmts, frame)? {
                            return Ok(Flow::Return(w));
                        }
                    }
                    return Ok(Flow::Return(v));
                }
                match finally {
                    Some(f) => self.stmts(&f.stmts, frame),
                    None => Ok(Flow::Normal),
                }
            }
            StmtKind::Return(value) => {
                let v = match value {
                    Some(e) => self.eval(e, frame)?,
                    None => Value::Void,
                };
                Ok(Flow::Return(v))
            }
            StmtKind::Expr(e) => {
                self.eval(e, frame)?;
                Ok(Flow::Normal)
            }
            StmtKind::LocalDecl { init, .. } => {
                let Some(&sym) = self.t.declarations.get(&s.id) else {
                    return Ok(Flow::Normal);
                };
                let ty = self.t.symbol(sym).ty.clone();
                let v = match init {
                    Some(e) => {
                        let v = self.eval(e, frame)?;
                        coerce(v, &ty)
                    }
                    None => Value::default_for(&ty),
                };
                frame.locals.insert(sym, v);
                Ok(Flow::Normal)
            }
            StmtKind::Assert { cond, message } => {
                if !self.opts.assertions_enabled {
                    return Ok(Flow::Normal);
                }
                let ok = self.eval(cond, frame)?.truth();
                let message = match message {
                    Some(m) => self.eval(m, frame)?.to_string(),
                    None => String::new(),
                };
                let text = format!("assert {}", expr_to_string(cond));
                self.record_assertion(text, message, &s.span, s.id, ok);
                Ok(Flow::Normal)
            }
            StmtKind::Synchronized { monitor, body } => {
                let m = self.eval(monitor, frame)?;
                if m.is_null() {
                    let what = expr_to_string(monitor);
                    return Err(self.fault(
                        FaultKind::NullDereference,
                        &monitor.span,
                        monitor.id,
                        format!("synchronizing on null `{what}`"),
                    ));
                }
                self.stmts(&body.stmts, frame)
            }
            StmtKind::Empty => Ok(Flow::Normal),
        }
    }

    fn record_assertion(&mut self, text: String, message: String, span: &SourceSpan, node: NodeId, ok: bool) {
        self.trace.assertions.push(AssertionRecord {
            unit_name: self.unit_name.clone(),
            statement_text: text.clone(),
            span: span.clone(),
            message: message.clone(),
            outcome: if ok {
                AssertionOutcome::Passed
            } else {
                AssertionOutcome::Failed
            },
        });
        if !ok {
            let _ = self.fault(FaultKind::AssertionFailure, span, node, format!("{text}: {message}"));
        }
    }

    // ---- expressions -------------------------------------------------------

    fn symbol_of(&self, e: &Expr) -> Option<SymbolId> {
        self.t.resolutions.get(&e.id).copied()
    }

    fn null_deref(&mut self, what: &Expr, at: &Expr) -> Halt {
        let text = expr_to_string(what);
        self.fault(
            FaultKind::NullDereference,
            &at.span,
            at.id,
            format!("dereference of null value `{text}`"),
        )
    }

    fn read_symbol(&mut self, e: &Expr, sym: SymbolId, frame: &mut Frame) -> Exec<Value> {
        let s = self.t.symbol(sym);
        match s.kind {
            SymbolKind::Local | SymbolKind::Param | SymbolKind::CatchParam => Ok(frame
                .locals
                .get(&sym)
                .cloned()
                .unwrap_or_else(|| Value::default_for(&s.ty))),
            SymbolKind::Field if s.builtin => Ok(Value::Bool(self.opts.assertions_enabled)),
            SymbolKind::Field if s.is_static => Ok(self
                .statics
                .get(&sym)
                .cloned()
                .unwrap_or_else(|| Value::default_for(&s.ty))),
            SymbolKind::Field => match &frame.this {
                Some(o) => Ok(o.borrow().fields.get(&s.name).cloned().unwrap_or(Value::Null)),
                None => Err(self.null_deref(e, e)),
            },
            SymbolKind::Class | SymbolKind::Method => Ok(Value::Null),
        }
    }

    fn write_symbol(&mut self, e: &Expr, sym: SymbolId, v: Value, frame: &mut Frame) -> Exec<Value> {
        let s = self.t.symbol(sym);
        let v = coerce(v, &s.ty);
        match s.kind {
            SymbolKind::Field if s.is_static => {
                self.statics.insert(sym, v.clone());
            }
            SymbolKind::Field => match &frame.this {
                Some(o) => {
                    o.borrow_mut().fields.insert(s.name.clone(), v.clone());
                }
                None => return Err(self.null_deref(e, e)),
            },
            _ => {
                frame.locals.insert(sym, v.clone());
            }
        }
        Ok(v)
    }

    fn array_slot(
        &mut self,
        index_expr: &Expr,
        array: Value,
        index: Value,
        array_expr: &Expr,
    ) -> Exec<(Rc<RefCell<Vec<Value>>>, usize)> {
        let arr = match array {
            Value::Array(a) => a,
            _ => return Err(self.null_deref(array_expr, index_expr)),
        };
        let i = index.as_i64().unwrap_or(0);
        let len = arr.borrow().len() as i64;
        if i < 0 || i >= len {
            let name = expr_to_string(array_expr);
            return Err(self.fault(
                FaultKind::OutOfBounds,
                &index_expr.span,
                index_expr.id,
                format!("index {i} outside [0, {}] of `{name}`", len - 1),
            ));
        }
        Ok((arr, i as usize))
    }

    fn eval(&mut self, e: &'u Expr, frame: &mut Frame) -> Exec<Value> {
        match &e.kind {
            ExprKind::Literal(Literal::Int(v)) => Ok(self.int_literal(e, *v)),
            ExprKind::Literal(Literal::Double(d)) => Ok(Value::Double(*d)),
            ExprKind::Literal(Literal::Bool(b)) => Ok(Value::Bool(*b)),
            ExprKind::Literal(Literal::Str(s)) => Ok(Value::Str(self.intern(s))),
            ExprKind::Null => Ok(Value::Null),
            ExprKind::This => Ok(frame.this.clone().map(Value::Object).unwrap_or(Value::Null)),
            ExprKind::Name(_) => match self.symbol_of(e) {
                Some(sym) => self.read_symbol(e, sym, frame),
                None => Ok(Value::Null),
            },
            ExprKind::Assign { target, value } => self.assign(target, value, frame),
            ExprKind::Unary { op, operand } => {
                if *op == UnOp::Neg {
                    if let Some(v) = operand.int_literal() {
                        return Ok(self.int_literal(e, -v));
                    }
                }
                let v = self.eval(operand, frame)?;
                Ok(match op {
                    UnOp::Not => Value::Bool(!v.truth()),
                    UnOp::Neg => match v {
                        Value::Int(i) => {
                            if i == i32::MIN {
                                self.warn_overflow(e, format!("-({i}) overflows int"));
                            }
                            Value::Int(i.wrapping_neg())
                        }
                        Value::Byte(b) => {
                            if b != 0 {
                                self.warn_overflow(e, format!("-({b}) wraps in byte"));
                            }
                            Value::Byte(b.wrapping_neg())
                        }
                        Value::Double(d) => Value::Double(-d),
                        other => other,
                    },
                })
            }
            ExprKind::Binary { op, lhs, rhs } => self.binary(e, *op, lhs, rhs, frame),
            ExprKind::Call { receiver, method, args } => self.call(e, receiver.as_deref(), method, args, frame),
            ExprKind::SuperCall { args } => {
                let vals = self.args(args, frame)?;
                match self.t.callee(e).cloned() {
                    Some(Callee::User { class, .. }) => {
                        if let Some(this) = frame.this.clone() {
                            self.construct(&class, this, vals, &e.span, e.id)?;
                        }
                    }
                    Some(Callee::Builtin(name)) if name == "Thread.<init>" => {
                        if let (Some(this), Some(v)) = (&frame.this, vals.first()) {
                            this.borrow_mut().thread_name = Some(v.to_string());
                        }
                    }
                    _ => {}
                }
                Ok(Value::Void)
            }
            ExprKind::New { class, args } => {
                let vals = self.args(args, frame)?;
                if self.classes.contains_key(class) {
                    let obj = self.instantiate(class)?;
                    self.construct(class, obj.clone(), vals, &e.span, e.id)?;
                    Ok(Value::Object(obj))
                } else {
                    let thread_name = if class == "Thread" {
                        vals.first().map(|v| v.to_string())
                    } else {
                        None
                    };
                    Ok(Value::Object(Rc::new(RefCell::new(Object {
                        class: class.clone(),
                        fields: BTreeMap::new(),
                        thread_name,
                    }))))
                }
            }
            ExprKind::NewArray { elem, size } => {
                let n = self.eval(size, frame)?.as_i64().unwrap_or(0);
                if n < 0 {
                    return Err(self.fault(
                        FaultKind::OutOfBounds,
                        &e.span,
                        e.id,
                        format!("negative array size {n}"),
                    ));
                }
                let fill = Value::default_for(&Type::from_ref(elem));
                Ok(Value::Array(Rc::new(RefCell::new(vec![fill; n as usize]))))
            }
            ExprKind::Index { array, index } => {
                let a = self.eval(array, frame)?;
                let i = self.eval(index, frame)?;
                let (arr, i) = self.array_slot(e, a, i, array)?;
                let v = arr.borrow()[i].clone();
                Ok(v)
            }
            ExprKind::FieldAccess { object, field } => {
                if let Some(sym) = self.symbol_of(e) {
                    let s = self.t.symbol(sym);
                    if s.is_static {
                        return self.read_symbol(e, sym, frame);
                    }
                }
                let o = self.eval(object, frame)?;
                match o {
                    Value::Array(a) if field == "length" => Ok(Value::Int(a.borrow().len() as i32)),
                    Value::Object(obj) => Ok(obj.borrow().fields.get(field).cloned().unwrap_or(Value::Null)),
                    _ => Err(self.null_deref(object, e)),
                }
            }
        }
    }

    fn int_literal(&mut self, e: &Expr, v: i64) -> Value {
        match i32::try_from(v) {
            Ok(i) => Value::Int(i),
            Err(_) => {
                self.warn_overflow(e, format!("literal {v} does not fit in int"));
                Value::Int(v as i32)
            }
        }
    }

    fn args(&mut self, args: &'u [Expr], frame: &mut Frame) -> Exec<Vec<Value>> {
        args.iter().map(|a| self.eval(a, frame)).collect()
    }

    fn assign(&mut self, target: &'u Expr, value: &'u Expr, frame: &mut Frame) -> Exec<Value> {
        match &target.kind {
            ExprKind::Index { array, index } => {
                let a = self.eval(array, frame)?;
                let i = self.eval(index, frame)?;
                let v = self.eval(value, frame)?;
                let (arr, i) = self.array_slot(target, a, i, array)?;
                let elem = self.t.type_of(target);
                let v = coerce(v, &elem);
                arr.borrow_mut()[i] = v.clone();
                Ok(v)
            }
            ExprKind::FieldAccess { object, field } => {
                if let Some(sym) = self.symbol_of(target) {
                    if self.t.symbol(sym).is_static {
                        let v = self.eval(value, frame)?;
                        return self.write_symbol(target, sym, v, frame);
                    }
                }
                let o = self.eval(object, frame)?;
                let v = self.eval(value, frame)?;
                let v = coerce(v, &self.t.type_of(target));
                match o {
                    Value::Object(obj) => {
                        obj.borrow_mut().fields.insert(field.clone(), v.clone());
                        Ok(v)
                    }
                    _ => Err(self.null_deref(object, target)),
                }
            }
            _ => {
                let v = self.eval(value, frame)?;
                match self.symbol_of(target) {
                    Some(sym) => self.write_symbol(target, sym, v, frame),
                    None => Ok(v),
                }
            }
        }
    }

    fn binary(&mut self, e: &Expr, op: BinOp, lhs: &'u Expr, rhs: &'u Expr, frame: &mut Frame) -> Exec<Value> {
        match op {
            BinOp::And => {
                let l = self.eval(lhs, frame)?.truth();
                return Ok(Value::Bool(l && self.eval(rhs, frame)?.truth()));
            }
            BinOp::Or => {
                let l = self.eval(lhs, frame)?.truth();
                return Ok(Value::Bool(l || self.eval(rhs, frame)?.truth()));
            }
            _ => {}
        }
        let l = self.eval(lhs, frame)?;
        let r = self.eval(rhs, frame)?;
        match op {
            BinOp::Eq => return Ok(Value::Bool(l.same(&r))),
            BinOp::Ne => return Ok(Value::Bool(!l.same(&r))),
            _ => {}
        }
        if op == BinOp::Add && (matches!(l, Value::Str(_)) || matches!(r, Value::Str(_))) {
            return Ok(Self::string(format!("{l}{r}")));
        }
        if op.is_comparison() {
            let (x, y) = (l.as_f64().unwrap_or(0.0), r.as_f64().unwrap_or(0.0));
            return Ok(Value::Bool(match op {
                BinOp::Lt => x < y,
                BinOp::Le => x <= y,
                BinOp::Gt => x > y,
                _ => x >= y,
            }));
        }
        if matches!(l, Value::Double(_)) || matches!(r, Value::Double(_)) {
            let (x, y) = (l.as_f64().unwrap_or(0.0), r.as_f64().unwrap_or(0.0));
            return Ok(Value::Double(match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => x / y,
                _ => x % y,
            }));
        }
        let (x, y) = (l.as_i64().unwrap_or(0), r.as_i64().unwrap_or(0));
        if matches!(op, BinOp::Div | BinOp::Rem) && y == 0 {
            return Err(self.fault(FaultKind::DivisionByZero, &e.span, e.id, "integer division by zero"));
        }
        let exact = match op {
            BinOp::Add => x + y,
            BinOp::Sub => x - y,
            BinOp::Mul => x * y,
            BinOp::Div => x / y,
            _ => x % y,
        };
        if let (Value::Byte(_), Value::Byte(_)) = (&l, &r) {
            let wrapped = exact.rem_euclid(256);
            if wrapped != exact {
                self.warn_overflow(
                    e,
                    format!("{x} {} {y} = {exact} wraps to {wrapped} in byte", op.symbol()),
                );
            }
            return Ok(Value::Byte(wrapped as u8));
        }
        let wrapped = exact as i32;
        if i64::from(wrapped) != exact {
            self.warn_overflow(
                e,
                format!("{x} {} {y} = {exact} wraps to {wrapped} in int", op.symbol()),
            );
        }
        Ok(Value::Int(wrapped))
    }

    fn call(
        &mut self,
        e: &'u Expr,
        receiver: Option<&'u Expr>,
        method: &str,
        args: &'u [Expr],
        frame: &mut Frame,
    ) -> Exec<Value> {
        let callee = self.t.callee(e).cloned();
        let static_receiver = receiver.is_some_and(|r| {
            self.symbol_of(r)
                .is_some_and(|s| self.t.symbol(s).kind == SymbolKind::Class)
        });
        let recv = match receiver {
            Some(r) if !static_receiver => Some(self.eval(r, frame)?),
            _ => None,
        };
        let vals = self.args(args, frame)?;
        match callee {
            Some(Callee::User {
                decl: Some(decl),
                arity,
                ..
            }) => {
                let Some((mut class, mut m)) = self.user_method(decl) else {
                    return Ok(Value::Void);
                };
                let this = if m.is_static {
                    None
                } else {
                    match (&recv, receiver) {
                        (Some(Value::Object(o)), _) => Some(o.clone()),
                        (Some(_), Some(r)) => return Err(self.null_deref(r, e)),
                        _ => frame.this.clone(),
                    }
                };
                if let Some(o) = &this {
                    let dynamic = o.borrow().class.clone();
                    if let Some(sym) = self.t.find_method(&dynamic, method, arity) {
                        if let Some(found) = self.user_method(self.t.symbol(sym).decl) {
                            (class, m) = found;
                        }
                    }
                }
                self.invoke(class, m, this, vals)
            }
            Some(Callee::Builtin(name)) => self.builtin(e, &name, receiver, recv, vals, frame),
            _ => Ok(Value::Void),
        }
    }

    fn str_arg(&mut self, e: &Expr, args: &'u [Expr], vals: &[Value], i: usize) -> Exec<String> {
        match &vals[i] {
            Value::Str(s) => Ok(s.to_string()),
            Value::Null => Err(self.null_deref(&args[i], e)),
            other => Ok(other.to_string()),
        }
    }

    fn builtin(
        &mut self,
        e: &'u Expr,
        name: &str,
        receiver: Option<&'u Expr>,
        recv: Option<Value>,
        vals: Vec<Value>,
        frame: &mut Frame,
    ) -> Exec<Value> {
        let ExprKind::Call { args, .. } = &e.kind else {
            return Ok(Value::Void);
        };
        // Receiver-based builtins fail on a null receiver.
        if let (Some(Value::Null), Some(r)) = (&recv, receiver) {
            return Err(self.null_deref(r, e));
        }
        Ok(match name {
            "println" => {
                let line = vals.first().map(|v| v.to_string()).unwrap_or_default();
                self.trace.stdout.push(line);
                Value::Void
            }
            "readLine" => self.stdin.pop_front().map(Self::string).unwrap_or(Value::Null),
            "parseInt" => {
                let s = self.str_arg(e, args, &vals, 0)?;
                match s.parse::<i32>() {
                    Ok(v) => Value::Int(v),
                    Err(_) => {
                        return Err(self.fault(FaultKind::InvalidNumber, &e.span, e.id, format!("`{s}` is not an int")))
                    }
                }
            }
            "parseDouble" => {
                let s = self.str_arg(e, args, &vals, 0)?;
                match s.trim().parse::<f64>() {
                    Ok(v) => Value::Double(v),
                    Err(_) => {
                        return Err(self.fault(
                            FaultKind::InvalidNumber,
                            &e.span,
                            e.id,
                            format!("`{s}` is not a number"),
                        ))
                    }
                }
            }
            "open" => {
                let path = self.str_arg(e, args, &vals, 0)?;
                let text = self.opts.file_system_stub.get(&path).cloned().unwrap_or_default();
                Value::Stream(Rc::new(RefCell::new(Stream::from_text(&text))))
            }
            "exists" => {
                let path = self.str_arg(e, args, &vals, 0)?;
                Value::Bool(self.opts.file_system_stub.contains_key(&path))
            }
            "random" => Value::Double(self.rng.gen::<f64>()),
            "length" => {
                let s = self.str_arg(e, args, &vals, 0)?;
                Value::Int(s.chars().count() as i32)
            }
            "toString" => Self::string(vals[0].to_string()),
            "assertTrue" => {
                if !vals[0].truth() {
                    let text = expr_to_string(&args[0]);
                    let _ = self.fault(
                        FaultKind::AssertionFailure,
                        &e.span,
                        e.id,
                        format!("assertTrue({text})"),
                    );
                }
                Value::Void
            }
            "fail" => {
                let unit = vals[0].to_string();
                let text = vals[1].to_string();
                let message = vals[2].to_string();
                let saved = std::mem::replace(&mut self.unit_name, unit);
                self.record_assertion(text, message, &e.span, e.id, false);
                self.unit_name = saved;
                Value::Void
            }
            "wait" | "notify" | "Thread.wait" | "Thread.sleep" | "Thread.run" => Value::Void,
            "Thread.start" => {
                let target = match recv {
                    Some(Value::Object(o)) => Some(o),
                    Some(_) => None,
                    None => frame.this.clone(),
                };
                if let Some(o) = target {
                    let class = o.borrow().class.clone();
                    if let Some(sym) = self.t.find_method(&class, "run", 0) {
                        if let Some((c, m)) = self.user_method(self.t.symbol(sym).decl) {
                            self.invoke(c, m, Some(o), Vec::new())?;
                        }
                    }
                }
                Value::Void
            }
            "Thread.getName" => {
                let target = match recv {
                    Some(Value::Object(o)) => Some(o),
                    _ => frame.this.clone(),
                };
                let name = target
                    .and_then(|o| o.borrow().thread_name.clone())
                    .unwrap_or_else(|| "Thread-0".to_string());
                Self::string(name)
            }
            "String.trim" | "String.length" | "String.equals" => {
                let Some(Value::Str(s)) = recv else {
                    return Ok(Value::Void);
                };
                match name {
                    "String.trim" => Self::string(s.trim().to_string()),
                    "String.length" => Value::Int(s.chars().count() as i32),
                    _ => Value::Bool(matches!(&vals[0], Value::Str(o) if **o == *s)),
                }
            }
            "Stream.readLine" | "Stream.close" | "Stream.read" => {
                let Some(Value::Stream(st)) = recv else {
                    return Ok(Value::Void);
                };
                match name {
                    "Stream.readLine" => {
                        let line = st.borrow_mut().lines.pop_front();
                        line.map(Self::string).unwrap_or(Value::Null)
                    }
                    "Stream.close" => {
                        st.borrow_mut().closed = true;
                        Value::Void
                    }
                    _ => self.stream_read(e, args, &st, &vals)?,
                }
            }
            _ => Value::Void,
        })
    }

    fn stream_read(&mut self, e: &Expr, args: &'u [Expr], st: &Rc<RefCell<Stream>>, vals: &[Value]) -> Exec<Value> {
        let arr = match &vals[0] {
            Value::Array(a) => a.clone(),
            _ => return Err(self.null_deref(&args[0], e)),
        };
        let off = vals[1].as_i64().unwrap_or(0);
        let len = vals[2].as_i64().unwrap_or(0);
        let size = arr.borrow().len() as i64;
        if off < 0 || len < 0 || off + len > size {
            return Err(self.fault(
                FaultKind::OutOfBounds,
                &e.span,
                e.id,
                format!("read of {len} bytes at offset {off} outside [0, {}]", size - 1),
            ));
        }
        let mut s = st.borrow_mut();
        let remaining = s.bytes.len() - s.byte_pos;
        if remaining == 0 && len > 0 {
            return Ok(Value::Int(-1));
        }
        let n = remaining.min(len as usize);
        let mut a = arr.borrow_mut();
        for k in 0..n {
            a[off as usize + k] = Value::Byte(s.bytes[s.byte_pos + k]);
        }
        s.byte_pos += n;
        Ok(Value::Int(n as i32))
    }
}

/// Implicit numeric conversion on assignment.
fn coerce(v: Value, ty: &Type) -> Value {
    match (ty, v) {
        (Type::Double, Value::Int(i)) => Value::Double(f64::from(i)),
        (Type::Double, Value::Byte(b)) => Value::Double(f64::from(b)),
        (Type::Int, Value::Byte(b)) => Value::Int(i32::from(b)),
        (Type::Byte, Value::Int(i)) => Value::Byte(i.rem_euclid(256) as u8),
        (_, v) => v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_src(src: &str, opts: RunOptions) -> RunTrace {
        let u = parse_source(src, "t.sl").unwrap();
        execute(&u, &opts).unwrap()
    }

    fn cov() -> RunOptions {
        RunOptions {
            coverage_enabled: true,
            ..RunOptions::default()
        }
    }

    #[test]
    fn counting_loop() {
        let src = "class T { static void main() { for (int i = 0; i < 10; i++) { println(i); } } }";
        let u = parse_source(src, "t.sl").unwrap();
        let t = execute(&u, &cov()).unwrap();
        assert_eq!(t.stdout, (0..10).map(|i| i.to_string()).collect::<Vec<_>>());
        let for_id = u.classes[0].methods[0].body.stmts[0].id;
        assert_eq!(t.branch_outcomes[&(for_id, EdgeKind::TrueBranch)], 10);
        assert_eq!(t.branch_outcomes[&(for_id, EdgeKind::FalseBranch)], 1);
    }

    #[test]
    fn out_of_bounds_halts() {
        let t = run_src(
            "class T { static void main() { int size = 4; byte[] b = new byte[size]; b[size] = 1; println(1); } }",
            RunOptions::default(),
        );
        let f = t.halting_fault().unwrap();
        assert_eq!(f.kind, FaultKind::OutOfBounds);
        assert!(f.detail.contains("index 4 outside [0, 3]"), "{}", f.detail);
        assert!(t.stdout.is_empty());
    }

    #[test]
    fn assertion_gating() {
        let src = "class T { static void main() { int a = 5; assert a > 10 : \"its false\"; } }";
        assert!(run_src(src, RunOptions::default()).assertions.is_empty());
        let on = run_src(
            src,
            RunOptions {
                assertions_enabled: true,
                ..RunOptions::default()
            },
        );
        assert_eq!(on.assertions.len(), 1);
        assert_eq!(on.assertions[0].outcome, AssertionOutcome::Failed);
        assert_eq!(on.assertions[0].message, "its false");
        assert_eq!(on.assertions[0].statement_text, "assert a > 10");
    }

    #[test]
    fn instrumented_assertion_gating() {
        let u = parse_source(
            "class T { static void main() { int a = 5; assert a > 10 : \"its false\"; } }",
            "t.sl",
        )
        .unwrap();
        let inst = instrument_asserts(&u);
        let off = execute(&inst, &RunOptions::default()).unwrap();
        assert!(off.assertions.is_empty());
        let on = execute(
            &inst,
            &RunOptions {
                assertions_enabled: true,
                ..RunOptions::default()
            },
        )
        .unwrap();
        assert_eq!(on.assertions.len(), 1);
        assert_eq!(on.assertions[0].unit_name, "T.main");
        assert_eq!(on.assertions[0].statement_text, "assert a > 10");
    }

    #[test]
    fn overflow_wraps_with_warning() {
        let t = run_src(
            "class T { static void main() { int x = 2147483647; x = x + 1; println(x); byte b = 208; byte c = 192; println(b + c); } }",
            RunOptions::default(),
        );
        assert_eq!(t.stdout, vec!["-2147483648", "144"]);
        assert_eq!(t.faults_of(FaultKind::ArithmeticOverflowWarning).count(), 2);
        assert!(!t.halted);
    }

    #[test]
    fn readline_null_dereference() {
        let src = "class T { static void main() { String s = readLine(); println(s.trim()); } }";
        let ok = run_src(
            src,
            RunOptions {
                stdin_script: vec!["  hi ".into()],
                ..RunOptions::default()
            },
        );
        assert_eq!(ok.stdout, vec!["hi"]);
        let bad = run_src(src, RunOptions::default());
        assert_eq!(bad.halting_fault().unwrap().kind, FaultKind::NullDereference);
    }

    #[test]
    fn threads_run_synchronously() {
        let t = run_src(
            "class Y extends Thread { Y(String s) { super(s); } void run() { println(getName()); } static void main() { new Y(\"Good\").start(); new Y(\"Bad\").start(); } }",
            RunOptions::default(),
        );
        assert_eq!(t.stdout, vec!["Good", "Bad"]);
    }

    #[test]
    fn infinite_recursion_hits_depth_limit() {
        let t = run_src(
            "class M { static void main() { new M().a(); } void a() { b(); } void b() { if (1) a(); } }",
            RunOptions::default(),
        );
        assert_eq!(t.halting_fault().unwrap().kind, FaultKind::StackOverflow);
    }

    #[test]
    fn step_limit() {
        let t = run_src(
            "class T { static void main() { while (true) { } } }",
            RunOptions {
                max_steps: 50,
                ..RunOptions::default()
            },
        );
        assert_eq!(t.halting_fault().unwrap().kind, FaultKind::StepLimit);
    }

    #[test]
    fn deterministic_random_and_strings() {
        let src = "class T { static void main() { println(random()); String a = \"x\"; println(a == \"x\"); println(toString(5) == toString(5)); } }";
        let opts = RunOptions {
            seed: 7,
            ..RunOptions::default()
        };
        let a = run_src(src, opts.clone());
        assert_eq!(a, run_src(src, opts));
        assert_eq!(a.stdout[1], "true");
        assert_eq!(a.stdout[2], "false");
    }

    #[test]
    fn stream_reads_stub() {
        let mut files = BTreeMap::new();
        files.insert("in.txt".to_string(), "abc".to_string());
        let t = run_src(
            "class T { static void main() { byte[] b = new byte[8]; Stream s = open(\"in.txt\"); println(s.read(b, 0, 8)); println(b[1]); println(s.read(b, 0, 8)); s.close(); } }",
            RunOptions {
                file_system_stub: files,
                ..RunOptions::default()
            },
        );
        assert_eq!(t.stdout, vec!["3", "98", "-1"]);
    }
}
