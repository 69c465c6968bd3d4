//! Random single-array programs for checking the bound checker against the
//! interpreter.
//!
//! Each program allocates one array `a` of length at most 16, then runs one
//! or two counting loops (sequential or nested) that write `a[i + k]`, with
//! constant or variable limits and optional guards. Variable sizes and limits
//! are read from stdin; the generated input favours values near the array
//! length, where off-by-one mistakes show up.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FuzzCase {
    pub seed: u64,
    pub source: String,
    pub stdin: Vec<String>,
}

pub const MAX_ARRAY_LEN: i64 = 16;

/// `count` programs derived from `seed`.
pub fn generate_corpus(seed: u64, count: usize) -> Vec<FuzzCase> {
    (0..count as u64)
        .map(|i| generate(seed.wrapping_mul(1_000_003).wrapping_add(i)))
        .collect()
}

pub fn generate(seed: u64) -> FuzzCase {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        lines: Vec::new(),
        stdin: Vec::new(),
        len: 0,
        has_n: false,
        has_m: false,
    };
    g.program(seed)
}

struct Gen {
    rng: ChaCha8Rng,
    lines: Vec<String>,
    stdin: Vec<String>,
    /// Actual array length at run time.
    len: i64,
    has_n: bool,
    has_m: bool,
}

impl Gen {
    fn line(&mut self, depth: usize, text: impl AsRef<str>) {
        self.lines.push(format!("{}{}", "    ".repeat(depth), text.as_ref()));
    }

    /// A stdin value near the array length.
    fn near_len(&mut self) -> i64 {
        let l = self.len;
        let choices = [0, 1, l - 1, l, l, l + 1, l + 2];
        if self.rng.gen_bool(0.8) {
            *choices.choose(&mut self.rng).unwrap()
        } else {
            self.rng.gen_range(0..=MAX_ARRAY_LEN + 4)
        }
        .max(0)
    }

    fn program(&mut self, seed: u64) -> FuzzCase {
        self.len = self.rng.gen_range(1..=MAX_ARRAY_LEN);
        self.line(0, format!("class Fuzz{seed} {{"));
        self.line(1, "static void main() {");
        self.has_n = self.rng.gen_bool(0.25);
        if self.has_n {
            if self.rng.gen_bool(0.1) {
                self.len = 0;
            }
            let len = self.len;
            self.stdin.push(len.to_string());
            self.line(2, "int n = parseInt(readLine());");
            self.line(2, "int[] a = new int[n];");
        } else {
            let len = self.len;
            self.line(2, format!("int[] a = new int[{len}];"));
        }
        self.has_m = self.rng.gen_bool(0.3);
        if self.has_m {
            let m = self.near_len();
            self.stdin.push(m.to_string());
            self.line(2, "int m = parseInt(readLine());");
        }
        let loops = if self.rng.gen_bool(0.4) { 2 } else { 1 };
        let nested = loops == 2 && self.rng.gen_bool(0.5);
        if nested {
            self.loop_stmt(2, "i", Some("j"));
        } else {
            for v in ["i", "j"].into_iter().take(loops) {
                self.loop_stmt(2, v, None);
            }
        }
        if self.rng.gen_bool(0.2) {
            let c = self.rng.gen_range(-1..=self.len + 1);
            let idx = if c < 0 { format!("({c})") } else { c.to_string() };
            self.line(2, format!("a[{idx}] = 1;"));
        }
        self.line(1, "}");
        self.line(0, "}");
        FuzzCase {
            seed,
            source: self.lines.join("\n") + "\n",
            stdin: std::mem::take(&mut self.stdin),
        }
    }

    fn limit(&mut self) -> String {
        let mut options = vec!["lit", "lit", "len"];
        if self.has_m {
            options.extend(["m", "m"]);
        }
        if self.has_n {
            options.push("n");
        }
        match *options.choose(&mut self.rng).unwrap() {
            "lit" => {
                let base = if self.has_n { 4 } else { self.len };
                self.rng.gen_range((base - 2).max(0)..=base + 1).to_string()
            }
            "len" => "a.length".to_string(),
            other => other.to_string(),
        }
    }

    fn loop_stmt(&mut self, depth: usize, v: &str, inner: Option<&str>) {
        if self.rng.gen_bool(0.8) {
            let start = if self.rng.gen_bool(0.8) {
                0
            } else {
                self.rng.gen_range(-1..=2)
            };
            let cmp = if self.rng.gen_bool(0.65) { "<" } else { "<=" };
            let limit = self.limit();
            let start = if start < 0 {
                format!("({start})")
            } else {
                start.to_string()
            };
            self.line(depth, format!("for (int {v} = {start}; {v} {cmp} {limit}; {v}++) {{"));
        } else {
            let start = match self.rng.gen_range(0..3) {
                0 => "a.length - 1".to_string(),
                1 => "a.length".to_string(),
                _ => {
                    let base = if self.has_n { 4 } else { self.len };
                    self.rng.gen_range((base - 2).max(0)..=base).to_string()
                }
            };
            let (cmp, low) = if self.rng.gen_bool(0.7) {
                (">=", "0")
            } else {
                (">", "0")
            };
            let (cmp, low) = if self.rng.gen_bool(0.15) {
                (">=", "(-1)")
            } else {
                (cmp, low)
            };
            self.line(depth, format!("for (int {v} = {start}; {v} {cmp} {low}; {v}--) {{"));
        }
        match inner {
            Some(w) => self.loop_stmt(depth + 1, w, None),
            None => self.body(depth + 1, v),
        }
        self.line(depth, "}");
    }

    fn body(&mut self, depth: usize, v: &str) {
        let off: i64 = *[-1, 0, 0, 0, 0, 1].choose(&mut self.rng).unwrap();
        let index = match off {
            0 => v.to_string(),
            k if k > 0 => format!("{v} + {k}"),
            k => format!("{v} - {}", -k),
        };
        let access = format!("a[{index}] = {v};");
        if self.rng.gen_bool(0.3) {
            let guard = match self.rng.gen_range(0..4) {
                0 => format!("{v} < a.length"),
                1 => format!("{index} < a.length"),
                2 => format!("{index} >= 0 && {index} < a.length"),
                _ => {
                    let base = if self.has_n { 4 } else { self.len };
                    format!("{v} < {}", self.rng.gen_range((base - 1).max(0)..=base + 1))
                }
            };
            self.line(depth, format!("if ({guard}) {{"));
            self.line(depth + 1, access);
            self.line(depth, "}");
        } else {
            self.line(depth, access);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_source;

    #[test]
    fn generated_programs_parse_and_repeat() {
        for case in generate_corpus(3, 50) {
            parse_source(&case.source, "fuzz.sl").unwrap_or_else(|e| panic!("{e}\n{}", case.source));
        }
        assert_eq!(generate(42), generate(42));
    }
}
