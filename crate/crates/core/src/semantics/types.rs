//! Static types and the builtin library signatures.

use std::fmt;

use crate::frontend::TypeRef;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Type {
    Int,
    Byte,
    Double,
    Boolean,
    /// `nullable` is only ever set on builtin results such as `readLine()`.
    Str {
        nullable: bool,
    },
    Void,
    /// Type of the `null` literal.
    Null,
    Array(Box<Type>),
    Class(String),
    /// Result of a call that could not be resolved; compatible with anything.
    Unknown,
}

impl Type {
    pub fn string() -> Type {
        Type::Str { nullable: false }
    }

    pub fn from_ref(t: &TypeRef) -> Type {
        match t {
            TypeRef::Int => Type::Int,
            TypeRef::Byte => Type::Byte,
            TypeRef::Double => Type::Double,
            TypeRef::Boolean => Type::Boolean,
            TypeRef::Void => Type::Void,
            TypeRef::Named(n) if n == "String" => Type::string(),
            TypeRef::Named(n) => Type::Class(n.clone()),
            TypeRef::Array(e) => Type::Array(Box::new(Type::from_ref(e))),
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Type::Int | Type::Byte | Type::Double | Type::Unknown)
    }

    pub fn is_integral(&self) -> bool {
        matches!(self, Type::Int | Type::Byte | Type::Unknown)
    }

    pub fn is_string(&self) -> bool {
        matches!(self, Type::Str { .. })
    }

    pub fn is_reference(&self) -> bool {
        matches!(
            self,
            Type::Str { .. } | Type::Array(_) | Type::Class(_) | Type::Null | Type::Unknown
        )
    }

    /// Conditions accept booleans and, C-style, integers.
    pub fn is_condition(&self) -> bool {
        matches!(self, Type::Boolean | Type::Int | Type::Byte | Type::Unknown)
    }

    pub fn elem(&self) -> Option<&Type> {
        match self {
            Type::Array(e) => Some(e),
            _ => None,
        }
    }

    /// Result type of arithmetic on two numeric operands.
    pub fn widen(a: &Type, b: &Type) -> Type {
        match (a, b) {
            (Type::Unknown, _) | (_, Type::Unknown) => Type::Unknown,
            (Type::Double, _) | (_, Type::Double) => Type::Double,
            (Type::Byte, Type::Byte) => Type::Byte,
            _ => Type::Int,
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Int => f.write_str("int"),
            Type::Byte => f.write_str("byte"),
            Type::Double => f.write_str("double"),
            Type::Boolean => f.write_str("boolean"),
            Type::Str { nullable: false } => f.write_str("String"),
            Type::Str { nullable: true } => f.write_str("String?"),
            Type::Void => f.write_str("void"),
            Type::Null => f.write_str("null"),
            Type::Array(e) => write!(f, "{e}[]"),
            Type::Class(c) => f.write_str(c),
            Type::Unknown => f.write_str("?"),
        }
    }
}

/// Parameter constraint of a builtin.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamKind {
    Any,
    Numeric,
    Int,
    Str,
    Boolean,
    ByteArray,
}

impl ParamKind {
    pub fn accepts(self, t: &Type) -> bool {
        match self {
            ParamKind::Any => !matches!(t, Type::Void),
            ParamKind::Numeric => t.is_numeric(),
            ParamKind::Int => t.is_integral(),
            ParamKind::Str => matches!(t, Type::Str { .. } | Type::Null | Type::Unknown),
            ParamKind::Boolean => matches!(t, Type::Boolean | Type::Unknown),
            ParamKind::ByteArray => matches!(t, Type::Null | Type::Unknown) || *t == Type::Array(Box::new(Type::Byte)),
        }
    }
}

#[derive(Debug)]
pub struct Builtin {
    /// `println`, `Stream.read`, `String.trim`, `Thread.start` ...
    pub name: &'static str,
    pub params: &'static [ParamKind],
    pub ret: fn() -> Type,
    /// The result carries status the caller is expected to inspect.
    pub must_check: bool,
}

macro_rules! builtin {
    ($name:expr, [$($p:ident),*], $ret:expr) => {
        Builtin { name: $name, params: &[$(ParamKind::$p),*], ret: $ret, must_check: false }
    };
    ($name:expr, [$($p:ident),*], $ret:expr, must_check) => {
        Builtin { name: $name, params: &[$(ParamKind::$p),*], ret: $ret, must_check: true }
    };
}

fn void() -> Type {
    Type::Void
}
fn int() -> Type {
    Type::Int
}
fn double() -> Type {
    Type::Double
}
fn boolean() -> Type {
    Type::Boolean
}
fn string() -> Type {
    Type::string()
}
fn nullable_string() -> Type {
    Type::Str { nullable: true }
}
fn stream() -> Type {
    Type::Class("Stream".into())
}

pub static GLOBALS: &[Builtin] = &[
    builtin!("println", [Any], void),
    builtin!("println", [], void),
    builtin!("readLine", [], nullable_string, must_check),
    builtin!("parseInt", [Str], int),
    builtin!("parseDouble", [Str], double),
    builtin!("open", [Str], stream),
    builtin!("exists", [Str], boolean),
    builtin!("random", [], double),
    builtin!("length", [Str], int),
    builtin!("toString", [Any], string),
    builtin!("assertTrue", [Boolean], void),
    builtin!("fail", [Str, Str, Any], void),
    builtin!("wait", [], void),
    builtin!("notify", [], void),
];

pub static STREAM_METHODS: &[Builtin] = &[
    builtin!("Stream.read", [ByteArray, Int, Int], int, must_check),
    builtin!("Stream.readLine", [], nullable_string, must_check),
    builtin!("Stream.close", [], void),
];

pub static STRING_METHODS: &[Builtin] = &[
    builtin!("String.trim", [], string),
    builtin!("String.equals", [Any], boolean),
    builtin!("String.length", [], int),
];

pub static THREAD_METHODS: &[Builtin] = &[
    builtin!("Thread.start", [], void),
    builtin!("Thread.run", [], void),
    builtin!("Thread.sleep", [Numeric], void),
    builtin!("Thread.getName", [], string),
    builtin!("Thread.wait", [], void),
];

/// Builtin classes that user code may name or extend.
pub const BUILTIN_CLASSES: &[&str] = &[
    "Object",
    "Thread",
    "Stream",
    "Exception",
    "IOException",
    "InterruptedException",
];

/// Builtin constructors: `(class, arity)`.
pub const BUILTIN_CTORS: &[(&str, usize)] = &[
    ("Object", 0),
    ("Thread", 0),
    ("Thread", 1),
    ("Exception", 0),
    ("Exception", 1),
    ("IOException", 0),
    ("InterruptedException", 0),
];

/// Global names predefined in every unit.
pub const ASSERTIONS_ENABLED: &str = "ASSERTIONS_ENABLED";

pub fn find_global(name: &str, arity: usize) -> Option<&'static Builtin> {
    GLOBALS.iter().find(|b| b.name == name && b.params.len() == arity)
}

fn find_in(table: &'static [Builtin], prefix: &str, method: &str, arity: usize) -> Option<&'static Builtin> {
    table.iter().find(|b| {
        b.params.len() == arity && b.name.strip_prefix(prefix).and_then(|r| r.strip_prefix('.')) == Some(method)
    })
}

/// Method of a builtin receiver type; `class` is `String`, `Stream` or `Thread`.
pub fn find_method(class: &str, method: &str, arity: usize) -> Option<&'static Builtin> {
    match class {
        "String" => find_in(STRING_METHODS, "String", method, arity),
        "Stream" => find_in(STREAM_METHODS, "Stream", method, arity),
        "Thread" => find_in(THREAD_METHODS, "Thread", method, arity),
        _ => None,
    }
}

pub fn find_builtin(qualified: &str) -> Option<&'static Builtin> {
    GLOBALS
        .iter()
        .chain(STREAM_METHODS)
        .chain(STRING_METHODS)
        .chain(THREAD_METHODS)
        .find(|b| b.name == qualified)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookups() {
        assert!(find_global("readLine", 0).unwrap().must_check);
        assert_eq!(
            (find_global("readLine", 0).unwrap().ret)(),
            Type::Str { nullable: true }
        );
        assert!(find_method("Stream", "read", 3).unwrap().must_check);
        assert!(find_method("Stream", "read", 2).is_none());
        assert_eq!((find_method("String", "trim", 0).unwrap().ret)(), Type::string());
        assert!(find_method("Thread", "getName", 0).is_some());
    }

    #[test]
    fn widening() {
        assert_eq!(Type::widen(&Type::Byte, &Type::Byte), Type::Byte);
        assert_eq!(Type::widen(&Type::Byte, &Type::Int), Type::Int);
        assert_eq!(Type::widen(&Type::Int, &Type::Double), Type::Double);
        assert!(ParamKind::ByteArray.accepts(&Type::Array(Box::new(Type::Byte))));
        assert!(!ParamKind::ByteArray.accepts(&Type::Array(Box::new(Type::Int))));
    }
}
