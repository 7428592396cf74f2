//! Tokens and comments.

use super::diagnostic::Diagnostic;
use crate::expr::Span;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Num(f64),
    Ident(String),
    Str(String),
    Sym(&'static str),
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number `{v}`"),
            Tok::Ident(n) => format!("`{n}`"),
            Tok::Str(_) => "string".into(),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct Comment {
    pub text: String,
    pub span: Span,
}

const SYMBOLS: &[&str] = &[
    "<<", "<=", ">=", "==", "!=", "&&", "||", "{", "}", "[", "]", "(", ")", ",", ";", ":", "=", "+", "-", "*", "/",
    "^", "<", ">", "|",
];

pub struct Lexed {
    pub tokens: Vec<Token>,
    pub comments: Vec<Comment>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Splits `src` into tokens. `#` and `//` start a comment that runs to the
/// end of the line. The token list always ends with [`Tok::Eof`].
pub fn lex(src: &str) -> Lexed {
    let bytes = src.as_bytes();
    let mut out = Lexed {
        tokens: Vec::new(),
        comments: Vec::new(),
        diagnostics: Vec::new(),
    };
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'#' || src[i..].starts_with("//") {
            let start = i;
            let body = if c == b'#' { i + 1 } else { i + 2 };
            let end = src[i..].find('\n').map_or(src.len(), |n| i + n);
            out.comments.push(Comment {
                text: src[body..end].trim().to_string(),
                span: Span::new(start, end),
            });
            i = end;
            continue;
        }
        if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let span = Span::new(start, i);
            match src[start..i].parse::<f64>() {
                Ok(v) if v.is_finite() => out.tokens.push(Token { tok: Tok::Num(v), span }),
                _ => {
                    out.diagnostics.push(Diagnostic::error(
                        src,
                        span,
                        format!("invalid number `{}`", &src[start..i]),
                    ));
                    out.tokens.push(Token {
                        tok: Tok::Num(0.0),
                        span,
                    });
                }
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.tokens.push(Token {
                tok: Tok::Ident(src[start..i].to_string()),
                span: Span::new(start, i),
            });
            continue;
        }
        if c == b'"' {
            let start = i;
            let mut text = String::new();
            let mut chars = src[i + 1..].char_indices();
            let mut closed = None;
            while let Some((off, ch)) = chars.next() {
                match ch {
                    '"' => {
                        closed = Some(i + 1 + off + 1);
                        break;
                    }
                    '\\' => match chars.next() {
                        Some((_, e @ ('"' | '\\'))) => text.push(e),
                        Some((_, 'n')) => text.push('\n'),
                        Some((_, other)) => {
                            text.push('\\');
                            text.push(other);
                        }
                        None => break,
                    },
                    '\n' => break,
                    other => text.push(other),
                }
            }
            match closed {
                Some(end) => {
                    out.tokens.push(Token {
                        tok: Tok::Str(text),
                        span: Span::new(start, end),
                    });
                    i = end;
                }
                None => {
                    let end = src[start..].find('\n').map_or(src.len(), |n| start + n);
                    out.diagnostics.push(Diagnostic::error(
                        src,
                        Span::new(start, end),
                        "unterminated string".into(),
                    ));
                    out.tokens.push(Token {
                        tok: Tok::Str(text),
                        span: Span::new(start, end),
                    });
                    i = end;
                }
            }
            continue;
        }
        if let Some(sym) = SYMBOLS.iter().find(|s| src[i..].starts_with(**s)) {
            out.tokens.push(Token {
                tok: Tok::Sym(sym),
                span: Span::new(i, i + sym.len()),
            });
            i += sym.len();
            continue;
        }
        let ch = src[i..].chars().next().unwrap_or('?');
        let span = Span::new(i, i + ch.len_utf8());
        out.diagnostics
            .push(Diagnostic::error(src, span, format!("unexpected character `{ch}`")));
        i += ch.len_utf8();
    }
    let end = src.len();
    out.tokens.push(Token {
        tok: Tok::Eof,
        span: Span::new(end, end),
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        lex(src).tokens.into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn numbers_symbols_and_comments() {
        let l = lex("a << b # tail\n// own line\nx = 1.5e-3;");
        assert!(l.diagnostics.is_empty());
        assert_eq!(l.comments.len(), 2);
        assert_eq!(l.comments[0].text, "tail");
        assert_eq!(
            l.tokens.iter().map(|t| t.tok.clone()).collect::<Vec<_>>(),
            vec![
                Tok::Ident("a".into()),
                Tok::Sym("<<"),
                Tok::Ident("b".into()),
                Tok::Ident("x".into()),
                Tok::Sym("="),
                Tok::Num(1.5e-3),
                Tok::Sym(";"),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn strings_and_errors() {
        assert_eq!(toks("\"a\\\"b\"")[0], Tok::Str("a\"b".into()));
        let l = lex("x $ \"open");
        assert_eq!(l.diagnostics.len(), 2);
        assert_eq!(l.diagnostics[0].column, 3);
    }
}
