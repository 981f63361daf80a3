use std::fmt;
use std::sync::Arc;

use super::diagnostics::{Diagnostic, DiagnosticKind};
use crate::span::SourceSpan;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Lt,
    Gt,
    Comma,
    Semi,
    Colon,
    ColonColon,
    Dot,
    DotDot,
    Eq,
    Bang,
    AndAnd,
    OrOr,
    FatArrow,
    Tilde,
    Caret,
    Plus,
    Minus,
    Amp,
    Arrow,
    Hash,
    Star,
    Slash,
    Question,
    Bar,
    /// `in` and the subset symbols.
    In,
    /// The projection symbol.
    Pi,
    /// The universal and existential symbols.
    Forall,
    Exists,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "`{s}`"),
            Tok::Int(v) => return write!(f, "`{v}`"),
            Tok::Str(s) => return write!(f, "\"{s}\""),
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::ColonColon => "::",
            Tok::Dot => ".",
            Tok::DotDot => "..",
            Tok::Eq => "=",
            Tok::Bang => "!",
            Tok::AndAnd => "&&",
            Tok::OrOr => "||",
            Tok::FatArrow => "=>",
            Tok::Tilde => "~",
            Tok::Caret => "^",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Amp => "&",
            Tok::Arrow => "->",
            Tok::Hash => "#",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Question => "?",
            Tok::Bar => "|",
            Tok::In => "in",
            Tok::Pi => "project",
            Tok::Forall => "all",
            Tok::Exists => "exists",
            Tok::Eof => return f.write_str("end of file"),
        };
        write!(f, "`{s}`")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

/// Splits `text` into tokens. `--` starts a comment that runs to the end of
/// the line. Unknown characters are reported and skipped.
pub fn lex(text: &str, file: &Arc<str>) -> (Vec<Token>, Vec<Diagnostic>) {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut errors = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let span = |line, col, len: usize| SourceSpan::new(file.clone(), line, col, len as u32);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start_col = col;
        if c.is_alphabetic() || c == '_' || c == '$' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_' || chars[j] == '$') {
                j += 1;
            }
            let word: String = chars[i..j].iter().collect();
            let tok = if word == "in" { Tok::In } else { Tok::Ident(word) };
            tokens.push(Token {
                tok,
                span: span(line, start_col, j - i),
            });
            col += (j - i) as u32;
            i = j;
            continue;
        }
        if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let digits: String = chars[i..j].iter().collect();
            match digits.parse::<i64>() {
                Ok(v) => tokens.push(Token {
                    tok: Tok::Int(v),
                    span: span(line, start_col, j - i),
                }),
                Err(_) => errors.push(Diagnostic::error(
                    DiagnosticKind::SyntaxError,
                    Some(span(line, start_col, j - i)),
                    format!("integer literal `{digits}` is too large"),
                )),
            }
            col += (j - i) as u32;
            i = j;
            continue;
        }
        if c == '"' {
            let mut j = i + 1;
            let mut value = String::new();
            let mut closed = false;
            while j < chars.len() && chars[j] != '\n' {
                match chars[j] {
                    '"' => {
                        closed = true;
                        break;
                    }
                    '\\' if j + 1 < chars.len() && matches!(chars[j + 1], '"' | '\\') => {
                        value.push(chars[j + 1]);
                        j += 2;
                    }
                    ch => {
                        value.push(ch);
                        j += 1;
                    }
                }
            }
            let len = j + usize::from(closed) - i;
            if closed {
                tokens.push(Token {
                    tok: Tok::Str(value),
                    span: span(line, start_col, len),
                });
            } else {
                errors.push(Diagnostic::error(
                    DiagnosticKind::SyntaxError,
                    Some(span(line, start_col, len)),
                    "unterminated string literal",
                ));
            }
            col += len as u32;
            i += len;
            continue;
        }
        let next = chars.get(i + 1).copied();
        let next2 = chars.get(i + 2).copied();
        let (tok, len) = match (c, next, next2) {
            ('=', Some('>'), _) => (Tok::FatArrow, 2),
            ('&', Some('&'), _) => (Tok::AndAnd, 2),
            ('|', Some('|'), _) => (Tok::OrOr, 2),
            ('-', Some('>'), _) => (Tok::Arrow, 2),
            (':', Some(':'), _) => (Tok::ColonColon, 2),
            ('.', Some('.'), _) => (Tok::DotDot, 2),
            ('{', ..) => (Tok::LBrace, 1),
            ('}', ..) => (Tok::RBrace, 1),
            ('(', ..) => (Tok::LParen, 1),
            (')', ..) => (Tok::RParen, 1),
            ('[', ..) => (Tok::LBracket, 1),
            (']', ..) => (Tok::RBracket, 1),
            ('<', ..) => (Tok::Lt, 1),
            ('>', ..) => (Tok::Gt, 1),
            (',', ..) => (Tok::Comma, 1),
            (';', ..) => (Tok::Semi, 1),
            (':', ..) => (Tok::Colon, 1),
            ('.' | '·', ..) => (Tok::Dot, 1),
            ('=', ..) => (Tok::Eq, 1),
            ('!' | '¬', ..) => (Tok::Bang, 1),
            ('∧', ..) => (Tok::AndAnd, 1),
            ('∨', ..) => (Tok::OrOr, 1),
            ('⇒', ..) => (Tok::FatArrow, 1),
            ('~' | '∼', ..) => (Tok::Tilde, 1),
            ('^', ..) => (Tok::Caret, 1),
            ('+' | '∪', ..) => (Tok::Plus, 1),
            ('-' | '∖', ..) => (Tok::Minus, 1),
            ('&' | '∩', ..) => (Tok::Amp, 1),
            ('→', ..) => (Tok::Arrow, 1),
            ('#', ..) => (Tok::Hash, 1),
            ('*' | '×', ..) => (Tok::Star, 1),
            ('/' | '÷', ..) => (Tok::Slash, 1),
            ('?', ..) => (Tok::Question, 1),
            ('|', ..) => (Tok::Bar, 1),
            ('⊆' | '⊂', ..) => (Tok::In, 1),
            ('π', ..) => (Tok::Pi, 1),
            ('∀', ..) => (Tok::Forall, 1),
            ('∃', ..) => (Tok::Exists, 1),
            _ => {
                errors.push(Diagnostic::error(
                    DiagnosticKind::SyntaxError,
                    Some(span(line, start_col, 1)),
                    format!("unexpected character `{c}`"),
                ));
                i += 1;
                col += 1;
                continue;
            }
        };
        tokens.push(Token {
            tok,
            span: span(line, start_col, len),
        });
        i += len;
        col += len as u32;
    }
    tokens.push(Token {
        tok: Tok::Eof,
        span: span(line, col, 0),
    });
    (tokens, errors)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        let (t, e) = lex(s, &Arc::from("t"));
        assert!(e.is_empty(), "{e:?}");
        t.into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn operators_and_aliases() {
        assert_eq!(
            toks("a->b => c ∧ ¬d ⊆ e -- trailing"),
            vec![
                Tok::Ident("a".into()),
                Tok::Arrow,
                Tok::Ident("b".into()),
                Tok::FatArrow,
                Tok::Ident("c".into()),
                Tok::AndAnd,
                Tok::Bang,
                Tok::Ident("d".into()),
                Tok::In,
                Tok::Ident("e".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn ranges_and_strings() {
        assert_eq!(
            toks("[0..2] \"Ford F-150\" x$0"),
            vec![
                Tok::LBracket,
                Tok::Int(0),
                Tok::DotDot,
                Tok::Int(2),
                Tok::RBracket,
                Tok::Str("Ford F-150".into()),
                Tok::Ident("x$0".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn spans_are_one_based() {
        let (t, _) = lex("a\n  bc", &Arc::from("f"));
        assert_eq!(t[1].span, SourceSpan::new("f", 2, 3, 2));
    }

    #[test]
    fn bad_character_reported() {
        let (_, e) = lex("a % b", &Arc::from("f"));
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].span, Some(SourceSpan::new("f", 1, 3, 1)));
    }
}
