//! Runtime values.

use std::cell::RefCell;
use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::rc::Rc;

use crate::semantics::Type;

#[derive(Clone, Debug)]
pub enum Value {
    Int(i32),
    /// Unsigned 8-bit view; arithmetic wraps modulo 256.
    Byte(u8),
    Double(f64),
    Bool(bool),
    Str(Rc<str>),
    Null,
    Array(Rc<RefCell<Vec<Value>>>),
    Object(Rc<RefCell<Object>>),
    Stream(Rc<RefCell<Stream>>),
    Void,
}

#[derive(Debug)]
pub struct Object {
    pub class: String,
    pub fields: BTreeMap<String, Value>,
    /// Name given to a thread through its constructor.
    pub thread_name: Option<String>,
}

#[derive(Debug, Default)]
pub struct Stream {
    pub lines: VecDeque<String>,
    pub bytes: Vec<u8>,
    pub byte_pos: usize,
    pub closed: bool,
}

impl Stream {
    pub fn from_text(text: &str) -> Stream {
        Stream {
            lines: text.lines().map(str::to_string).collect(),
            bytes: text.as_bytes().to_vec(),
            byte_pos: 0,
            closed: false,
        }
    }
}

impl Value {
    pub fn default_for(ty: &Type) -> Value {
        match ty {
            Type::Int => Value::Int(0),
            Type::Byte => Value::Byte(0),
            Type::Double => Value::Double(0.0),
            Type::Boolean => Value::Bool(false),
            _ => Value::Null,
        }
    }

    /// Truth of a condition; integers are true when non-zero.
    pub fn truth(&self) -> bool {
        match self {
            Value::Bool(b) => *b,
            Value::Int(i) => *i != 0,
            Value::Byte(b) => *b != 0,
            Value::Double(d) => *d != 0.0,
            _ => false,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(i64::from(*i)),
            Value::Byte(b) => Some(i64::from(*b)),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Double(d) => Some(*d),
            other => other.as_i64().map(|v| v as f64),
        }
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    /// Reference or value identity, as `==` sees it.
    pub fn same(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Null, Value::Null) => true,
            (Value::Str(a), Value::Str(b)) => Rc::ptr_eq(a, b),
            (Value::Array(a), Value::Array(b)) => Rc::ptr_eq(a, b),
            (Value::Object(a), Value::Object(b)) => Rc::ptr_eq(a, b),
            (Value::Stream(a), Value::Stream(b)) => Rc::ptr_eq(a, b),
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (a, b) => match (a.as_f64(), b.as_f64()) {
                (Some(x), Some(y)) => x == y,
                _ => false,
            },
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Byte(b) => write!(f, "{b}"),
            Value::Double(d) => {
                if d.is_finite() && d.fract() == 0.0 && d.abs() < 1e16 {
                    write!(f, "{d:.1}")
                } else {
                    write!(f, "{d}")
                }
            }
            Value::Bool(b) => write!(f, "{b}"),
            Value::Str(s) => f.write_str(s),
            Value::Null => f.write_str("null"),
            Value::Array(a) => write!(f, "array[{}]", a.borrow().len()),
            Value::Object(o) => write!(f, "{}@object", o.borrow().class),
            Value::Stream(_) => f.write_str("Stream"),
            Value::Void => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_and_truth() {
        assert_eq!(Value::Double(3.0).to_string(), "3.0");
        assert_eq!(Value::Double(2.5).to_string(), "2.5");
        assert!(Value::Int(1).truth());
        assert!(!Value::Int(0).truth());
        let s: Rc<str> = Rc::from("a");
        assert!(Value::Str(s.clone()).same(&Value::Str(s)));
        assert!(!Value::Str(Rc::from("a")).same(&Value::Str(Rc::from("a"))));
        assert!(Value::Int(3).same(&Value::Double(3.0)));
    }
}
