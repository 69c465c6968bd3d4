//! Token-based copy/paste detection.
//!
//! Identifiers, numbers and strings are replaced by `ID`, `NUM` and `STR`;
//! keywords and operators stay verbatim. Every pair of positions whose next
//! `min_tokens` normalized tokens agree is extended to its maximal length,
//! and only left-maximal starts are kept, so each clone is reported once.

use std::collections::HashMap;

use crate::frontend::{tokenize, CompilationUnit, SourceSpan, TokenKind};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormToken {
    pub text: String,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClonePair {
    pub span_a: SourceSpan,
    pub span_b: SourceSpan,
    pub token_length: usize,
}

/// The comment-free normalized token stream of `unit`.
pub fn normalized_tokens(unit: &CompilationUnit) -> Vec<NormToken> {
    let Ok(tokens) = tokenize(&unit.source, &unit.file) else {
        return Vec::new();
    };
    tokens
        .into_iter()
        .filter(|t| t.kind != TokenKind::Comment)
        .map(|t| {
            let text = match t.kind {
                TokenKind::Identifier => "ID".to_string(),
                TokenKind::IntLiteral | TokenKind::DoubleLiteral => "NUM".to_string(),
                TokenKind::StringLiteral => "STR".to_string(),
                _ => t.text,
            };
            NormToken { text, span: t.span }
        })
        .collect()
}

fn span_key(s: &SourceSpan) -> (String, u32, u32) {
    (s.file.as_str().to_string(), s.line, s.column)
}

pub fn find_duplicates(units: &[CompilationUnit], min_tokens: usize) -> Vec<ClonePair> {
    let min_tokens = min_tokens.max(1);
    // One stream over all units; `unit_of` keeps windows inside a unit.
    let mut stream: Vec<NormToken> = Vec::new();
    let mut unit_of: Vec<usize> = Vec::new();
    for (u, unit) in units.iter().enumerate() {
        let toks = normalized_tokens(unit);
        unit_of.extend(std::iter::repeat_n(u, toks.len()));
        stream.extend(toks);
    }
    let n = stream.len();
    let eq = |i: usize, j: usize| stream[i].text == stream[j].text;

    // Windows that stay within one unit, bucketed by content.
    let mut buckets: HashMap<Vec<&str>, Vec<usize>> = HashMap::new();
    for i in 0..n.saturating_sub(min_tokens - 1) {
        if unit_of[i] != unit_of[i + min_tokens - 1] {
            continue;
        }
        let key: Vec<&str> = stream[i..i + min_tokens].iter().map(|t| t.text.as_str()).collect();
        buckets.entry(key).or_default().push(i);
    }

    let mut pairs = Vec::new();
    for starts in buckets.values() {
        for (x, &i) in starts.iter().enumerate() {
            for &j in &starts[x + 1..] {
                let left_extends =
                    i > 0 && unit_of[i - 1] == unit_of[i] && unit_of[j - 1] == unit_of[j] && eq(i - 1, j - 1);
                if left_extends {
                    continue;
                }
                let mut len = min_tokens;
                while j + len < n
                    && unit_of[i + len] == unit_of[i]
                    && unit_of[j + len] == unit_of[j]
                    && eq(i + len, j + len)
                {
                    len += 1;
                }
                // Overlapping copies inside one unit are cut where they meet.
                if unit_of[i] == unit_of[j] {
                    len = len.min(j - i);
                }
                if len < min_tokens {
                    continue;
                }
                pairs.push(ClonePair {
                    span_a: stream[i].span.to(&stream[i + len - 1].span),
                    span_b: stream[j].span.to(&stream[j + len - 1].span),
                    token_length: len,
                });
            }
        }
    }
    pairs.sort_by_key(|p| (span_key(&p.span_a), span_key(&p.span_b), p.token_length));
    pairs.dedup();
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_source;

    fn unit(src: &str) -> CompilationUnit {
        parse_source(src, "c.sl").unwrap()
    }

    #[test]
    fn copied_body_is_one_pair() {
        let body = "int s = 0; for (int i = 0; i < 10; i++) { s = s + i * 2; } println(s);";
        let u = unit(&format!(
            "class A {{\n void a() {{ {body} }}\n void b() {{ {body} }}\n}}"
        ));
        let pairs = find_duplicates(&[u], 10);
        assert_eq!(pairs.len(), 1, "{pairs:?}");
        let p = &pairs[0];
        assert_eq!((p.span_a.line, p.span_b.line), (2, 3));
        assert!(p.token_length > 30);
    }

    #[test]
    fn renamed_identifiers_still_match() {
        let a = unit("class A { void a() { int x = 1; x = x + 2; println(x); } }");
        let b = parse_source("class B { void q() { int y = 7; y = y + 9; println(y); } }", "d.sl").unwrap();
        let pairs = find_duplicates(&[a, b], 10);
        assert_eq!(pairs.len(), 1);
        assert_ne!(pairs[0].span_a.file, pairs[0].span_b.file);
    }

    #[test]
    fn distinct_code_has_no_pairs() {
        let u = unit("class A { int f; void m(int a) { if (a > 0) f = a; else while (f < 3) f++; } }");
        assert!(find_duplicates(&[u], 10).is_empty());
    }

    #[test]
    fn threshold_boundary() {
        // `x = x + 1 ;` is six tokens; two copies separated by distinct
        // statements give a clone of exactly that many tokens.
        let u = unit("class A { void m() { x = x + 1; if (x > 0) return; x = x + 1; } int x; }");
        let exact = find_duplicates(std::slice::from_ref(&u), 6);
        assert!(exact.iter().any(|p| p.token_length == 6));
        assert!(find_duplicates(&[u], 7).is_empty());
    }
}
