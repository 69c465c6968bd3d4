//! Tokenizer for `.sl` sources.
//!
//! Whitespace is skipped but comments are kept as tokens, so that review
//! annotations survive a parse / pretty-print cycle.

use std::ops::Range;

use super::span::{FileName, SourceSpan};
use super::FrontendError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Keyword,
    Identifier,
    IntLiteral,
    DoubleLiteral,
    StringLiteral,
    Operator,
    Punctuation,
    Comment,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    /// Raw lexeme, including quotes for strings and delimiters for comments.
    pub text: String,
    pub span: SourceSpan,
    /// Byte range of the lexeme in the original source.
    pub range: Range<usize>,
}

impl Token {
    pub fn is(&self, kind: TokenKind, text: &str) -> bool {
        self.kind == kind && self.text == text
    }
}

pub const KEYWORDS: &[&str] = &[
    "package",
    "class",
    "extends",
    "static",
    "final",
    "void",
    "int",
    "byte",
    "double",
    "boolean",
    "if",
    "else",
    "while",
    "for",
    "switch",
    "case",
    "default",
    "try",
    "catch",
    "finally",
    "return",
    "assert",
    "synchronized",
    "new",
    "null",
    "true",
    "false",
    "this",
    "super",
];

const OPERATORS: &[&str] = &[
    "==", "!=", "<=", ">=", "&&", "||", "++", "--", "=", "<", ">", "+", "-", "*", "/", "%", "!",
];

const PUNCTUATION: &[char] = &['(', ')', '{', '}', '[', ']', ';', ',', ':', '.'];

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    column: u32,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_nth(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }
}

/// Splits `source` into tokens. Fails on unterminated strings or block
/// comments and on characters outside the language's alphabet.
pub fn tokenize(source: &str, file: &FileName) -> Result<Vec<Token>, FrontendError> {
    let mut cur = Cursor {
        src: source,
        pos: 0,
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();

    while let Some(c) = cur.peek() {
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        let start = cur.pos;
        let (line, column) = (cur.line, cur.column);
        let mut last = (cur.line, cur.column);
        let take = |cur: &mut Cursor<'_>, last: &mut (u32, u32)| {
            *last = (cur.line, cur.column);
            cur.bump();
        };
        let error = |message: String, end: (u32, u32)| FrontendError::Lex {
            span: SourceSpan::new(file.clone(), line, column, end.0, end.1),
            message,
        };

        let kind = if cur.rest().starts_with("//") {
            while let Some(c) = cur.peek() {
                if c == '\n' || (c == '\r' && cur.peek_nth(1) == Some('\n')) {
                    break;
                }
                take(&mut cur, &mut last);
            }
            TokenKind::Comment
        } else if cur.rest().starts_with("/*") {
            take(&mut cur, &mut last);
            take(&mut cur, &mut last);
            loop {
                if cur.rest().starts_with("*/") {
                    take(&mut cur, &mut last);
                    take(&mut cur, &mut last);
                    break;
                }
                if cur.peek().is_none() {
                    return Err(error("unterminated block comment".into(), last));
                }
                take(&mut cur, &mut last);
            }
            TokenKind::Comment
        } else if c == '"' {
            take(&mut cur, &mut last);
            loop {
                match cur.peek() {
                    None | Some('\n') => {
                        return Err(error("unterminated string literal".into(), last));
                    }
                    Some('"') => {
                        take(&mut cur, &mut last);
                        break;
                    }
                    Some('\\') => {
                        take(&mut cur, &mut last);
                        match cur.peek() {
                            Some('\\') | Some('"') => take(&mut cur, &mut last),
                            Some(other) => {
                                return Err(error(
                                    format!("unsupported escape sequence `\\{other}`"),
                                    (cur.line, cur.column),
                                ));
                            }
                            None => {
                                return Err(error("unterminated string literal".into(), last));
                            }
                        }
                    }
                    Some(_) => take(&mut cur, &mut last),
                }
            }
            TokenKind::StringLiteral
        } else if c.is_ascii_digit() {
            while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
                take(&mut cur, &mut last);
            }
            if cur.peek() == Some('.') && cur.peek_nth(1).is_some_and(|c| c.is_ascii_digit()) {
                take(&mut cur, &mut last);
                while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
                    take(&mut cur, &mut last);
                }
                TokenKind::DoubleLiteral
            } else {
                TokenKind::IntLiteral
            }
        } else if c.is_ascii_alphabetic() || c == '_' || c == '$' {
            while cur
                .peek()
                .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$')
            {
                take(&mut cur, &mut last);
            }
            if KEYWORDS.contains(&&source[start..cur.pos]) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            }
        } else if let Some(op) = OPERATORS.iter().find(|op| cur.rest().starts_with(**op)) {
            for _ in 0..op.len() {
                take(&mut cur, &mut last);
            }
            TokenKind::Operator
        } else if PUNCTUATION.contains(&c) {
            take(&mut cur, &mut last);
            TokenKind::Punctuation
        } else {
            return Err(error(format!("illegal character `{c}`"), (line, column)));
        };

        tokens.push(Token {
            kind,
            text: source[start..cur.pos].to_string(),
            span: SourceSpan::new(file.clone(), line, column, last.0, last.1),
            range: start..cur.pos,
        });
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lex(src: &str) -> Vec<Token> {
        tokenize(src, &FileName::new("t.sl")).unwrap()
    }

    #[test]
    fn declaration_tokens() {
        let toks = lex("int i = 0;");
        let got: Vec<_> = toks.iter().map(|t| (t.kind, t.text.as_str())).collect();
        assert_eq!(
            got,
            vec![
                (TokenKind::Keyword, "int"),
                (TokenKind::Identifier, "i"),
                (TokenKind::Operator, "="),
                (TokenKind::IntLiteral, "0"),
                (TokenKind::Punctuation, ";"),
            ]
        );
    }

    #[test]
    fn empty_input() {
        assert!(lex("").is_empty());
        assert!(lex(" \n\t\r\n").is_empty());
    }

    #[test]
    fn comments_are_tokens() {
        let toks = lex("a; // note\n/* block\n two */ b");
        assert_eq!(toks[2].kind, TokenKind::Comment);
        assert_eq!(toks[2].text, "// note");
        assert_eq!(toks[3].kind, TokenKind::Comment);
        assert_eq!(toks[3].span.line, 2);
        assert_eq!(toks[3].span.end_line, 3);
        assert_eq!(toks[4].span.line, 3);
    }

    #[test]
    fn string_escapes() {
        let toks = lex(r#""C:\\dir\\f.txt" "say \"hi\"""#);
        assert_eq!(toks.len(), 2);
        assert_eq!(toks[0].kind, TokenKind::StringLiteral);
        let err = tokenize(r#""bad \n""#, &FileName::new("t.sl")).unwrap_err();
        assert!(err.to_string().contains("escape"));
    }

    #[test]
    fn lex_errors() {
        let f = FileName::new("t.sl");
        assert!(matches!(tokenize("\"open", &f), Err(FrontendError::Lex { .. })));
        assert!(matches!(tokenize("/* open", &f), Err(FrontendError::Lex { .. })));
        let err = tokenize("a # b", &f).unwrap_err();
        match err {
            FrontendError::Lex { span, .. } => assert_eq!((span.line, span.column), (1, 3)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn numbers_and_operators() {
        let toks = lex("x<=3.25&&y++!=4.a");
        let kinds: Vec<_> = toks.iter().map(|t| t.text.as_str()).collect();
        assert_eq!(kinds, vec!["x", "<=", "3.25", "&&", "y", "++", "!=", "4", ".", "a"]);
        assert_eq!(toks[2].kind, TokenKind::DoubleLiteral);
        assert_eq!(toks[7].kind, TokenKind::IntLiteral);
    }

    #[test]
    fn crlf_positions() {
        let toks = lex("a\r\nb // c\r\nd");
        assert_eq!(toks[1].span.line, 2);
        assert_eq!(toks[2].text, "// c");
        assert_eq!(toks[3].span.line, 3);
    }
}
