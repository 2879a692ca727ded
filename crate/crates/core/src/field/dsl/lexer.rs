use alloc::string::String;
use alloc::vec::Vec;

use super::{DslError, DslErrorKind, Pos};

#[derive(Clone, Debug, PartialEq)]
pub(super) enum Tok {
    Ident(String),
    /// Value and source text.
    Num(f64, String),
    Str(String),
    Sym(&'static str),
    Eof,
}

const SYMBOLS: [&str; 16] = ["->", "(", ")", "[", "]", "{", "}", ",", ";", "=", "+", "-", "*", "/", "^", ":"];

struct Cursor {
    chars: Vec<char>,
    i: usize,
    line: usize,
    col: usize,
}

impl Cursor {
    fn peek(&self, k: usize) -> Option<char> {
        self.chars.get(self.i + k).copied()
    }

    fn pos(&self) -> Pos {
        Pos { line: self.line, col: self.col }
    }

    fn next(&mut self) -> Option<char> {
        let c = self.peek(0)?;
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn take_while(&mut self, s: &mut String, f: impl Fn(char) -> bool) {
        while let Some(c) = self.peek(0).filter(|&c| f(c)) {
            s.push(c);
            self.next();
        }
    }
}

pub(super) fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, DslError> {
    let mut out = Vec::new();
    let mut cur = Cursor { chars: src.chars().collect(), i: 0, line: 1, col: 1 };
    while let Some(c) = cur.peek(0) {
        let pos = cur.pos();
        if c.is_whitespace() {
            cur.next();
        } else if c == '#' || (c == '/' && cur.peek(1) == Some('/')) {
            while cur.peek(0).is_some_and(|c| c != '\n') {
                cur.next();
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            cur.take_while(&mut s, |c| c.is_ascii_alphanumeric() || c == '_');
            out.push((Tok::Ident(s), pos));
        } else if c.is_ascii_digit() || (c == '.' && cur.peek(1).is_some_and(|d| d.is_ascii_digit())) {
            let mut s = String::new();
            cur.take_while(&mut s, |c| c.is_ascii_digit() || c == '.');
            if matches!(cur.peek(0), Some('e' | 'E')) {
                let sign = matches!(cur.peek(1), Some('+' | '-'));
                let digit_at = if sign { 2 } else { 1 };
                if cur.peek(digit_at).is_some_and(|d| d.is_ascii_digit()) {
                    for _ in 0..digit_at {
                        s.push(cur.next().expect("peeked"));
                    }
                    cur.take_while(&mut s, |c| c.is_ascii_digit());
                }
            }
            let v: f64 = s
                .parse()
                .map_err(|_| DslError::new(DslErrorKind::Syntax, pos, alloc::format!("malformed number `{s}`")))?;
            out.push((Tok::Num(v, s), pos));
        } else if c == '"' {
            cur.next();
            let mut s = String::new();
            cur.take_while(&mut s, |c| c != '"' && c != '\n');
            if cur.next() != Some('"') {
                return Err(DslError::new(DslErrorKind::Syntax, pos, "unterminated string".into()));
            }
            out.push((Tok::Str(s), pos));
        } else {
            let two: String = [cur.peek(0), cur.peek(1)].iter().flatten().collect();
            let Some(sym) = SYMBOLS.iter().find(|s| two.starts_with(**s)) else {
                return Err(DslError::new(DslErrorKind::Syntax, pos, alloc::format!("unexpected character `{c}`")));
            };
            for _ in 0..sym.len() {
                cur.next();
            }
            out.push((Tok::Sym(sym), pos));
        }
    }
    out.push((Tok::Eof, cur.pos()));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_and_positions() {
        let toks = lex("param k = 1.5e-3; # note\ncells \"a b\" { dx = -self ^ 2; }").unwrap();
        assert_eq!(toks[0], (Tok::Ident("param".into()), Pos { line: 1, col: 1 }));
        assert_eq!(toks[3].0, Tok::Num(1.5e-3, "1.5e-3".into()));
        assert_eq!(toks[5], (Tok::Ident("cells".into()), Pos { line: 2, col: 1 }));
        assert_eq!(toks[6].0, Tok::Str("a b".into()));
        assert!(toks.iter().any(|t| t.0 == Tok::Sym("^")));
        assert_eq!(toks.last().unwrap().0, Tok::Eof);
    }

    #[test]
    fn arrow_symbol_and_errors() {
        let toks = lex("u -> u // tail").unwrap();
        assert_eq!(toks[1].0, Tok::Sym("->"));
        let err = lex("dx = $;").unwrap_err();
        assert_eq!((err.line, err.col), (1, 6));
        assert!(lex("\"open").is_err());
    }
}
