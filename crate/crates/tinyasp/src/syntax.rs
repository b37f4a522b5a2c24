//! Terms, atoms, rules, and the parser for the input language.
//!
//! The accepted language is the normal-program fragment: facts, rules with
//! `not` in the body, and headless constraints. Terms are integers, symbolic
//! constants (lowercase-initial identifiers), quoted strings, and variables
//! (uppercase- or underscore-initial identifiers).

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Int(i64),
    Const(String),
    Str(String),
    Var(String),
}

impl Term {
    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Int(n) => write!(f, "{n}"),
            Term::Const(s) => write!(f, "{s}"),
            Term::Str(s) => write!(f, "\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\"")),
            Term::Var(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: String,
    pub terms: Vec<Term>,
}

impl Atom {
    pub fn is_ground(&self) -> bool {
        self.terms.iter().all(|t| !t.is_var())
    }

    pub fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        for t in &self.terms {
            if let Term::Var(v) = t {
                if !out.contains(&v.as_str()) {
                    out.push(v);
                }
            }
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.predicate)?;
        if !self.terms.is_empty() {
            write!(f, "(")?;
            for (i, t) in self.terms.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{t}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BodyLit {
    pub atom: Atom,
    pub negated: bool,
}

/// One statement. `head = None` is an integrity constraint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub head: Option<Atom>,
    pub body: Vec<BodyLit>,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: syntax error: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Var(String),
    Int(i64),
    Str(String),
    ColonDash,
    Comma,
    LParen,
    RParen,
    Dot,
    Not,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError { line: self.line, col: self.col, message: message.into() }
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.src.get(self.pos).copied()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    /// Next token plus the position where it started.
    fn next_tok(&mut self) -> Result<Option<(Tok, usize, usize)>, ParseError> {
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'%') => {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
        let (line, col) = (self.line, self.col);
        let c = match self.peek() {
            None => return Ok(None),
            Some(c) => c,
        };
        let tok = match c {
            b'.' => {
                self.bump();
                Tok::Dot
            }
            b',' => {
                self.bump();
                Tok::Comma
            }
            b'(' => {
                self.bump();
                Tok::LParen
            }
            b')' => {
                self.bump();
                Tok::RParen
            }
            b':' => {
                self.bump();
                if self.peek() == Some(b'-') {
                    self.bump();
                    Tok::ColonDash
                } else {
                    return Err(self.err("expected '-' after ':'"));
                }
            }
            b'"' => {
                self.bump();
                let mut bytes: Vec<u8> = Vec::new();
                loop {
                    match self.bump() {
                        None => return Err(self.err("unterminated string")),
                        Some(b'"') => break,
                        Some(b'\\') => match self.bump() {
                            Some(b'"') => bytes.push(b'"'),
                            Some(b'\\') => bytes.push(b'\\'),
                            Some(b'n') => bytes.push(b'\n'),
                            _ => return Err(self.err("bad escape in string")),
                        },
                        Some(c) => bytes.push(c),
                    }
                }
                let s = String::from_utf8(bytes)
                    .map_err(|_| self.err("string literal is not valid UTF-8"))?;
                Tok::Str(s)
            }
            b'-' | b'0'..=b'9' => {
                let neg = c == b'-';
                if neg {
                    self.bump();
                    if !matches!(self.peek(), Some(b'0'..=b'9')) {
                        return Err(self.err("expected digit after '-'"));
                    }
                }
                let mut n: i64 = 0;
                while let Some(d @ b'0'..=b'9') = self.peek() {
                    self.bump();
                    n = n
                        .checked_mul(10)
                        .and_then(|n| n.checked_add((d - b'0') as i64))
                        .ok_or_else(|| self.err("integer literal too large"))?;
                }
                Tok::Int(if neg { -n } else { n })
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut s = String::new();
                while let Some(c) = self.peek() {
                    if c.is_ascii_alphanumeric() || c == b'_' || c == b'\'' {
                        s.push(c as char);
                        self.bump();
                    } else {
                        break;
                    }
                }
                if s == "not" {
                    Tok::Not
                } else if s.starts_with(|c: char| c.is_ascii_uppercase() || c == '_') {
                    Tok::Var(s)
                } else {
                    Tok::Ident(s)
                }
            }
            other => {
                return Err(self.err(format!("unexpected character '{}'", other as char)));
            }
        };
        Ok(Some((tok, line, col)))
    }
}

pub struct Parser<'a> {
    lexer: Lexer<'a>,
    lookahead: Option<(Tok, usize, usize)>,
}

impl<'a> Parser<'a> {
    pub fn new(src: &'a str) -> Result<Self, ParseError> {
        let mut lexer = Lexer::new(src);
        let lookahead = lexer.next_tok()?;
        Ok(Parser { lexer, lookahead })
    }

    fn advance(&mut self) -> Result<Option<(Tok, usize, usize)>, ParseError> {
        let next = self.lexer.next_tok()?;
        Ok(std::mem::replace(&mut self.lookahead, next))
    }

    fn err_at(&self, line: usize, col: usize, message: impl Into<String>) -> ParseError {
        ParseError { line, col, message: message.into() }
    }

    fn err_here(&self, message: impl Into<String>) -> ParseError {
        match &self.lookahead {
            Some((tok, line, col)) => {
                ParseError { line: *line, col: *col, message: format!("{} (found {:?})", message.into(), tok) }
            }
            None => ParseError {
                line: self.lexer.line,
                col: self.lexer.col,
                message: format!("{} (found end of input)", message.into()),
            },
        }
    }

    pub fn parse_program(mut self) -> Result<Vec<Rule>, ParseError> {
        let mut rules = Vec::new();
        while self.lookahead.is_some() {
            rules.push(self.parse_rule()?);
        }
        Ok(rules)
    }

    fn parse_rule(&mut self) -> Result<Rule, ParseError> {
        let line = self.lookahead.as_ref().map(|t| t.1).unwrap_or(self.lexer.line);
        let head = match &self.lookahead {
            Some((Tok::ColonDash, ..)) => None,
            _ => Some(self.parse_atom()?),
        };
        let mut body = Vec::new();
        match self.advance()? {
            Some((Tok::Dot, ..)) => {
                return Ok(Rule { head, body, line });
            }
            Some((Tok::ColonDash, ..)) => {}
            Some((_, l, c)) => return Err(self.err_at(l, c, "expected '.' or ':-'")),
            None => return Err(self.err_here("expected '.' or ':-'")),
        }
        loop {
            body.push(self.parse_literal()?);
            match self.advance()? {
                Some((Tok::Comma, ..)) => continue,
                Some((Tok::Dot, ..)) => break,
                Some((_, l, c)) => return Err(self.err_at(l, c, "expected ',' or '.'")),
                None => return Err(self.err_here("expected ',' or '.' before end of input")),
            }
        }
        Ok(Rule { head, body, line })
    }

    fn parse_literal(&mut self) -> Result<BodyLit, ParseError> {
        let negated = matches!(self.lookahead, Some((Tok::Not, ..)));
        if negated {
            self.advance()?;
        }
        let atom = self.parse_atom()?;
        Ok(BodyLit { atom, negated })
    }

    fn parse_atom(&mut self) -> Result<Atom, ParseError> {
        let predicate = match self.advance()? {
            Some((Tok::Ident(name), ..)) => name,
            Some((tok, l, c)) => {
                return Err(self.err_at(l, c, format!("expected predicate name, found {tok:?}")))
            }
            None => return Err(self.err_here("expected predicate name")),
        };
        let mut terms = Vec::new();
        if matches!(self.lookahead, Some((Tok::LParen, ..))) {
            self.advance()?;
            loop {
                terms.push(self.parse_term()?);
                match self.advance()? {
                    Some((Tok::Comma, ..)) => continue,
                    Some((Tok::RParen, ..)) => break,
                    Some((_, l, c)) => return Err(self.err_at(l, c, "expected ',' or ')'")),
                    None => return Err(self.err_here("expected ',' or ')'")),
                }
            }
        }
        Ok(Atom { predicate, terms })
    }

    fn parse_term(&mut self) -> Result<Term, ParseError> {
        match self.advance()? {
            Some((Tok::Ident(s), ..)) => Ok(Term::Const(s)),
            Some((Tok::Var(v), ..)) => Ok(Term::Var(v)),
            Some((Tok::Int(n), ..)) => Ok(Term::Int(n)),
            Some((Tok::Str(s), ..)) => Ok(Term::Str(s)),
            Some((tok, l, c)) => Err(self.err_at(l, c, format!("expected term, found {tok:?}"))),
            None => Err(self.err_here("expected term")),
        }
    }
}

pub fn parse(src: &str) -> Result<Vec<Rule>, ParseError> {
    Parser::new(src)?.parse_program()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fact_rule_constraint() {
        let rules = parse("p(a). q(X) :- p(X), not r(X). :- q(b).").unwrap();
        assert_eq!(rules.len(), 3);
        assert_eq!(rules[0].head.as_ref().unwrap().predicate, "p");
        assert!(rules[0].body.is_empty());
        assert!(rules[1].body[1].negated);
        assert!(rules[2].head.is_none());
    }

    #[test]
    fn comments_and_whitespace() {
        let rules = parse("% intro\n a. % trailing\n\n b :- a.\n").unwrap();
        assert_eq!(rules.len(), 2);
    }

    #[test]
    fn missing_period_is_error() {
        let err = parse("a :- b").unwrap_err();
        assert!(err.message.contains("expected"));
    }

    #[test]
    fn rejects_unknown_syntax() {
        assert!(parse("{a}.").is_err());
        assert!(parse("#show p/1.").is_err());
        assert!(parse("a :- b; c.").is_err());
    }

    #[test]
    fn string_terms_round_trip() {
        let rules = parse(r#"p("hi there")."#).unwrap();
        assert_eq!(rules[0].head.as_ref().unwrap().to_string(), r#"p("hi there")"#);
    }
}
