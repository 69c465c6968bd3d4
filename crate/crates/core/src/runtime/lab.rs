//! Fixed-width addition and a toy stack frame showing how an oversized
//! argument clobbers the saved return address.

use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DomainError {
    #[error("width must be 8, 16 or 32 bits, got {0}")]
    Width(u32),
    #[error("operand {value} does not fit in {width} bits")]
    Operand { value: u64, width: u32 },
    #[error("expected a 4-byte argument slot, got {0} bytes")]
    FrameShape(usize),
    #[error("input `{0}` is not a non-empty hex-digit string")]
    Input(String),
}

/// Adds two unsigned `width`-bit values, returning the wrapped sum and
/// whether it overflowed.
pub fn add_wrapped(a: u64, b: u64, width: u32) -> Result<(u64, bool), DomainError> {
    if !matches!(width, 8 | 16 | 32) {
        return Err(DomainError::Width(width));
    }
    let modulus = 1u64 << width;
    for value in [a, b] {
        if value >= modulus {
            return Err(DomainError::Operand { value, width });
        }
    }
    let sum = a + b;
    Ok((sum % modulus, sum >= modulus))
}

pub const RETURN_SLOT: u32 = 0x0000;
pub const ARGUMENT_SLOT: u32 = 0x0004;
pub const RETURN_ADDRESS: &str = "0049";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StackOutcome {
    NormalReturn,
    HijackedControl,
    Crash,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StackFrameDemo {
    /// Offset to four hex digits.
    pub slots: BTreeMap<u32, String>,
    pub outcome: StackOutcome,
}

impl StackFrameDemo {
    pub fn slot(&self, offset: u32) -> &str {
        &self.slots[&offset]
    }

    /// Where control goes on return.
    pub fn return_target(&self) -> &str {
        self.slot(RETURN_SLOT)
    }
}

/// Copies `input` into the argument slot without a length check. Digits past
/// the slot spill into the saved return address; anything beyond that is lost.
pub fn stack_overwrite_demo(expected_arg_bytes: usize, input: &str) -> Result<StackFrameDemo, DomainError> {
    if expected_arg_bytes != 4 {
        return Err(DomainError::FrameShape(expected_arg_bytes));
    }
    if input.is_empty() || !input.chars().all(|c| c.is_ascii_hexdigit()) {
        return Err(DomainError::Input(input.to_string()));
    }
    let digits = input.to_ascii_uppercase();
    let (arg, spill) = digits.split_at(digits.len().min(4));
    let argument = format!("{arg:0>4}");
    let mut ret = RETURN_ADDRESS.to_string();
    let spill = &spill[..spill.len().min(4)];
    ret.replace_range(..spill.len(), spill);

    let outcome = if ret == RETURN_ADDRESS {
        StackOutcome::NormalReturn
    } else if ret.chars().all(|c| c == '9') || ret == "0000" {
        StackOutcome::Crash
    } else {
        StackOutcome::HijackedControl
    };
    let slots = BTreeMap::from([(RETURN_SLOT, ret), (ARGUMENT_SLOT, argument)]);
    Ok(StackFrameDemo { slots, outcome })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrapped_addition() {
        assert_eq!(add_wrapped(10, 5, 8), Ok((15, false)));
        assert_eq!(add_wrapped(208, 192, 8), Ok((144, true)));
        assert_eq!(add_wrapped(255, 1, 8), Ok((0, true)));
        assert_eq!(add_wrapped(65535, 1, 16), Ok((0, true)));
        assert!(add_wrapped(256, 0, 8).is_err());
        assert!(add_wrapped(1, 1, 12).is_err());
    }

    #[test]
    fn frame_examples() {
        let ok = stack_overwrite_demo(4, "0088").unwrap();
        assert_eq!((ok.slot(0), ok.slot(4)), ("0049", "0088"));
        assert_eq!(ok.outcome, StackOutcome::NormalReturn);

        let hijack = stack_overwrite_demo(4, "12340088").unwrap();
        assert_eq!((hijack.slot(0), hijack.slot(4)), ("0088", "1234"));
        assert_eq!(hijack.outcome, StackOutcome::HijackedControl);

        let crash = stack_overwrite_demo(4, "99999999").unwrap();
        assert_eq!((crash.slot(0), crash.slot(4)), ("9999", "9999"));
        assert_eq!(crash.outcome, StackOutcome::Crash);
    }

    #[test]
    fn short_and_bad_inputs() {
        assert_eq!(stack_overwrite_demo(4, "7").unwrap().slot(4), "0007");
        assert!(stack_overwrite_demo(4, "xyz").is_err());
        assert!(stack_overwrite_demo(4, "").is_err());
        assert!(stack_overwrite_demo(8, "12").is_err());
    }
}
