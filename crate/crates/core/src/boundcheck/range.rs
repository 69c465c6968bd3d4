//! Integer intervals whose bounds may be expressed relative to the length
//! of the array being indexed.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    NegInf,
    PosInf,
    Const(i64),
    /// Array length plus an offset.
    Size(i64),
}

impl Bound {
    pub fn shift(self, k: i64) -> Bound {
        match self {
            Bound::Const(c) => Bound::Const(c.saturating_add(k)),
            Bound::Size(c) => Bound::Size(c.saturating_add(k)),
            b => b,
        }
    }

    fn is_finite(self) -> bool {
        matches!(self, Bound::Const(_) | Bound::Size(_))
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::NegInf => f.write_str("-inf"),
            Bound::PosInf => f.write_str("+inf"),
            Bound::Const(c) => write!(f, "{c}"),
            Bound::Size(0) => f.write_str("N"),
            Bound::Size(k) if *k > 0 => write!(f, "N+{k}"),
            Bound::Size(k) => write!(f, "N{k}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Bound,
    pub hi: Bound,
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Interval {
    pub const TOP: Interval = Interval {
        lo: Bound::NegInf,
        hi: Bound::PosInf,
    };

    pub fn point(b: Bound) -> Interval {
        Interval { lo: b, hi: b }
    }

    pub fn constant(&self) -> Option<i64> {
        match (self.lo, self.hi) {
            (Bound::Const(a), Bound::Const(b)) if a == b => Some(a),
            _ => None,
        }
    }

    pub fn shift(self, k: i64) -> Interval {
        Interval {
            lo: self.lo.shift(k),
            hi: self.hi.shift(k),
        }
    }

    /// Provably contains no value.
    pub fn is_empty(&self) -> bool {
        match (self.lo, self.hi) {
            (Bound::Const(a), Bound::Const(b)) | (Bound::Size(a), Bound::Size(b)) => a > b,
            (Bound::PosInf, _) | (_, Bound::NegInf) => true,
            _ => false,
        }
    }

    pub fn meet_hi(self, b: Bound) -> Interval {
        Interval {
            lo: self.lo,
            hi: tighter_hi(self.hi, b),
        }
    }

    pub fn meet_lo(self, b: Bound) -> Interval {
        Interval {
            lo: tighter_lo(self.lo, b),
            hi: self.hi,
        }
    }

    /// Every value lies in `[0, n - 1]`, where `n` is the array length when
    /// known and at least `min_len` otherwise.
    pub fn within(&self, n: Option<i64>, min_len: Option<i64>) -> bool {
        if self.is_empty() {
            return true;
        }
        let lo_ok = match self.lo {
            Bound::Const(c) => c >= 0,
            Bound::Size(k) => k >= 0,
            _ => false,
        };
        let hi_ok = match (self.hi, n) {
            (Bound::Const(c), Some(n)) => c < n,
            (Bound::Const(c), None) => c < min_len.unwrap_or(0),
            (Bound::Size(k), _) => k <= -1,
            _ => false,
        };
        lo_ok && hi_ok
    }
}

/// Smaller of two upper bounds. Length-relative bounds are preferred when
/// the two kinds cannot be compared.
fn tighter_hi(a: Bound, b: Bound) -> Bound {
    match (a, b) {
        (Bound::Const(x), Bound::Const(y)) => Bound::Const(x.min(y)),
        (Bound::Size(x), Bound::Size(y)) => Bound::Size(x.min(y)),
        (Bound::Size(x), Bound::Const(_)) | (Bound::Const(_), Bound::Size(x)) => Bound::Size(x),
        (Bound::PosInf, other) | (other, Bound::PosInf) => other,
        (Bound::NegInf, _) | (_, Bound::NegInf) => Bound::NegInf,
    }
}

/// Larger of two lower bounds. Constants are preferred when the two kinds
/// cannot be compared.
fn tighter_lo(a: Bound, b: Bound) -> Bound {
    match (a, b) {
        (Bound::Const(x), Bound::Const(y)) => Bound::Const(x.max(y)),
        (Bound::Size(x), Bound::Size(y)) => Bound::Size(x.max(y)),
        (Bound::Size(_), Bound::Const(x)) | (Bound::Const(x), Bound::Size(_)) => Bound::Const(x),
        (Bound::NegInf, other) | (other, Bound::NegInf) => other,
        (Bound::PosInf, _) | (_, Bound::PosInf) => Bound::PosInf,
    }
}

/// Upper bound of `v < e` (strict) or `v <= e`.
pub fn upper_from(e: Interval, strict: bool) -> Bound {
    if strict && e.hi.is_finite() {
        e.hi.shift(-1)
    } else {
        e.hi
    }
}

/// Lower bound of `v > e` (strict) or `v >= e`.
pub fn lower_from(e: Interval, strict: bool) -> Bound {
    if strict && e.lo.is_finite() {
        e.lo.shift(1)
    } else {
        e.lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn containment() {
        let i = Interval {
            lo: Bound::Const(0),
            hi: Bound::Const(9),
        };
        assert!(i.within(Some(10), None));
        assert!(!i.within(Some(9), None));
        assert!(!i.within(None, None));
        assert!(i.within(None, Some(10)));
        assert!(!i.shift(-1).within(Some(10), None));
        let rel = Interval {
            lo: Bound::Const(0),
            hi: Bound::Size(-1),
        };
        assert!(rel.within(None, None));
        assert!(!rel.shift(1).within(None, None));
        assert!(Interval {
            lo: Bound::Const(5),
            hi: Bound::Const(2)
        }
        .within(Some(1), None));
        assert!(!Interval::TOP.within(Some(100), None));
    }

    #[test]
    fn meets() {
        let i = Interval::TOP.meet_hi(Bound::Const(7)).meet_hi(Bound::Const(3));
        assert_eq!(i.hi, Bound::Const(3));
        assert_eq!(i.meet_hi(Bound::Size(-1)).hi, Bound::Size(-1));
        assert_eq!(Interval::TOP.meet_lo(Bound::Const(0)).lo, Bound::Const(0));
        assert_eq!(Interval::point(Bound::Size(0)).to_string(), "[N, N]");
    }
}
