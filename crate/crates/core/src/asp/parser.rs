//! Statement-level parser.
//!
//! Input is split into period-terminated statements. A statement built only
//! from the normal-rule vocabulary is parsed into head/body literals; a
//! statement that uses recognizable extended syntax (`{ }`, `;`, `#directive`,
//! `:~`, `..`, arithmetic or comparison operators) becomes a passthrough rule
//! carried verbatim. Anything else is a syntax error that quotes the
//! offending fragment.

use super::{AspError, Literal, Program, Rule, Term};

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
    /// Any token that is legal ASP but outside the normal-rule fragment.
    Extended(String),
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
    start: usize,
    end: usize,
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src, bytes: src.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn error(&self, message: impl Into<String>) -> AspError {
        AspError::Syntax {
            line: self.line,
            col: self.col,
            message: message.into(),
            fragment: fragment_at(self.src, self.pos),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.bytes.get(self.pos).copied()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn tokenize(mut self) -> Result<Vec<Spanned>, AspError> {
        let mut toks = Vec::new();
        loop {
            // Skip whitespace and `%` line comments.
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
            let (line, col, start) = (self.line, self.col, self.pos);
            let c = match self.peek() {
                None => return Ok(toks),
                Some(c) => c,
            };
            let tok = match c {
                b'.' => {
                    self.bump();
                    if self.peek() == Some(b'.') {
                        self.bump();
                        Tok::Extended("..".into())
                    } else {
                        Tok::Dot
                    }
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
                    match self.peek() {
                        Some(b'-') => {
                            self.bump();
                            Tok::ColonDash
                        }
                        Some(b'~') => {
                            self.bump();
                            Tok::Extended(":~".into())
                        }
                        // Bare ':' only occurs in aggregate/conditional syntax.
                        _ => Tok::Extended(":".into()),
                    }
                }
                b'"' => {
                    self.bump();
                    let mut bytes: Vec<u8> = Vec::new();
                    loop {
                        match self.bump() {
                            None => return Err(self.error("unterminated string literal")),
                            Some(b'"') => break,
                            Some(b'\\') => match self.bump() {
                                Some(b'"') => bytes.push(b'"'),
                                Some(b'\\') => bytes.push(b'\\'),
                                Some(b'n') => bytes.push(b'\n'),
                                _ => return Err(self.error("unsupported escape in string literal")),
                            },
                            Some(c) => bytes.push(c),
                        }
                    }
                    // The source is valid UTF-8 and escapes only add ASCII.
                    let s = String::from_utf8(bytes)
                        .map_err(|_| self.error("string literal is not valid UTF-8"))?;
                    Tok::Str(s)
                }
                b'0'..=b'9' => {
                    let mut n: i64 = 0;
                    while let Some(d @ b'0'..=b'9') = self.peek() {
                        self.bump();
                        n = n
                            .checked_mul(10)
                            .and_then(|n| n.checked_add((d - b'0') as i64))
                            .ok_or_else(|| self.error("integer literal too large"))?;
                    }
                    Tok::Int(n)
                }
                b'-' => {
                    self.bump();
                    if matches!(self.peek(), Some(b'0'..=b'9')) {
                        let mut n: i64 = 0;
                        while let Some(d @ b'0'..=b'9') = self.peek() {
                            self.bump();
                            n = n
                                .checked_mul(10)
                                .and_then(|n| n.checked_add((d - b'0') as i64))
                                .ok_or_else(|| self.error("integer literal too large"))?;
                        }
                        Tok::Int(-n)
                    } else {
                        Tok::Extended("-".into())
                    }
                }
                b'#' => {
                    self.bump();
                    let mut s = String::from("#");
                    while let Some(c) = self.peek() {
                        if c.is_ascii_alphanumeric() || c == b'_' {
                            s.push(c as char);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    Tok::Extended(s)
                }
                b'{' | b'}' | b';' | b'[' | b']' | b'=' | b'<' | b'>' | b'!' | b'+' | b'*'
                | b'/' | b'@' | b'|' | b'&' | b'?' | b'^' => {
                    self.bump();
                    let mut s = String::from(c as char);
                    // Two-character comparison operators.
                    if matches!(c, b'=' | b'<' | b'>' | b'!') && self.peek() == Some(b'=') {
                        self.bump();
                        s.push('=');
                    }
                    Tok::Extended(s)
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
                    return Err(self.error(format!("unexpected character '{}'", other as char)))
                }
            };
            toks.push(Spanned { tok, line, col, start, end: self.pos });
        }
    }
}

fn fragment_at(src: &str, pos: usize) -> String {
    let mut pos = pos.min(src.len());
    while pos > 0 && !src.is_char_boundary(pos) {
        pos -= 1;
    }
    let start = src[..pos].char_indices().rev().take(20).last().map(|(i, _)| i).unwrap_or(0);
    let mut end = (pos + 20).min(src.len());
    while end < src.len() && !src.is_char_boundary(end) {
        end += 1;
    }
    let frag: String = src[start..end].chars().filter(|c| *c != '\n').take(40).collect();
    frag.trim().to_string()
}

fn err_at(src: &str, sp: &Spanned, message: impl Into<String>) -> AspError {
    AspError::Syntax {
        line: sp.line,
        col: sp.col,
        message: message.into(),
        fragment: fragment_at(src, sp.start),
    }
}

/// Collapse whitespace runs to single spaces, outside string literals.
fn normalize_raw(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut in_str = false;
    let mut escaped = false;
    let mut pending_space = false;
    for c in raw.chars() {
        if in_str {
            out.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_str = false;
            }
            continue;
        }
        if c == '"' {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(c);
            in_str = true;
        } else if c.is_whitespace() {
            pending_space = true;
        } else {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(c);
        }
    }
    out
}

struct StatementParser<'a> {
    src: &'a str,
    toks: &'a [Spanned],
    pos: usize,
}

impl<'a> StatementParser<'a> {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn advance(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect_err(&self, message: &str) -> AspError {
        match self.peek().or_else(|| self.toks.last()) {
            Some(sp) => err_at(self.src, sp, message),
            None => AspError::Syntax {
                line: 1,
                col: 1,
                message: message.to_string(),
                fragment: String::new(),
            },
        }
    }

    fn parse_rule(&mut self) -> Result<Rule, AspError> {
        let head = match self.peek().map(|s| &s.tok) {
            Some(Tok::ColonDash) => None,
            _ => Some(self.parse_atom()?),
        };
        let mut body = Vec::new();
        match self.advance().map(|s| s.tok.clone()) {
            Some(Tok::Dot) => return Ok(Rule::new(head, body)),
            Some(Tok::ColonDash) => {}
            _ => return Err(self.expect_err("expected '.' or ':-'")),
        }
        loop {
            body.push(self.parse_literal()?);
            match self.advance().map(|s| s.tok.clone()) {
                Some(Tok::Comma) => continue,
                Some(Tok::Dot) => break,
                _ => return Err(self.expect_err("expected ',' or '.'")),
            }
        }
        Ok(Rule::new(head, body))
    }

    fn parse_literal(&mut self) -> Result<Literal, AspError> {
        let negated = matches!(self.peek().map(|s| &s.tok), Some(Tok::Not));
        if negated {
            self.advance();
        }
        let mut atom = self.parse_atom()?;
        atom.negated = negated;
        Ok(atom)
    }

    fn parse_atom(&mut self) -> Result<Literal, AspError> {
        let predicate = match self.advance() {
            Some(sp) => match &sp.tok {
                Tok::Ident(name) => name.clone(),
                _ => return Err(err_at(self.src, &sp, "expected predicate name")),
            },
            None => return Err(self.expect_err("expected predicate name")),
        };
        let mut terms = Vec::new();
        if matches!(self.peek().map(|s| &s.tok), Some(Tok::LParen)) {
            self.advance();
            loop {
                terms.push(self.parse_term()?);
                match self.advance().map(|s| s.tok.clone()) {
                    Some(Tok::Comma) => continue,
                    Some(Tok::RParen) => break,
                    _ => return Err(self.expect_err("expected ',' or ')'")),
                }
            }
        }
        Ok(Literal { predicate, terms, negated: false })
    }

    fn parse_term(&mut self) -> Result<Term, AspError> {
        match self.advance() {
            Some(sp) => match &sp.tok {
                Tok::Ident(s) => Ok(Term::Const(s.clone())),
                Tok::Var(v) => Ok(Term::Var(v.clone())),
                Tok::Int(n) => Ok(Term::Int(*n)),
                Tok::Str(s) => Ok(Term::Str(s.clone())),
                _ => Err(err_at(self.src, &sp, "expected term")),
            },
            None => Err(self.expect_err("expected term")),
        }
    }
}

/// Parse `text` into a [`Program`]. Statements are period-terminated;
/// `%` comments run to end of line. A leading `%! label: NAME` line sets
/// the program label (this is what [`Program::to_text`] emits).
pub fn parse_program(text: &str) -> Result<Program, AspError> {
    let label = text.lines().find_map(|l| {
        let l = l.trim();
        l.strip_prefix("%! label:").map(|rest| rest.trim().to_string())
    });

    let toks = Lexer::new(text).tokenize()?;
    let mut rules = Vec::new();
    let mut start = 0usize;
    while start < toks.len() {
        // Find the statement-terminating dot.
        let mut end = start;
        while end < toks.len() && toks[end].tok != Tok::Dot {
            end += 1;
        }
        if end == toks.len() {
            let sp = &toks[toks.len() - 1];
            return Err(err_at(text, sp, "statement is missing its terminating '.'"));
        }
        let stmt = &toks[start..=end];
        let extended = stmt.iter().any(|s| matches!(s.tok, Tok::Extended(_)));
        if extended {
            let raw = &text[stmt[0].start..stmt[stmt.len() - 1].end];
            rules.push(Rule::passthrough(normalize_raw(raw)));
        } else {
            let mut parser = StatementParser { src: text, toks: stmt, pos: 0 };
            let rule = parser.parse_rule()?;
            debug_assert_eq!(parser.pos, stmt.len(), "statement parser must consume the whole span");
            rules.push(rule);
        }
        start = end + 1;
    }
    Ok(Program::new(rules, label))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asp::RuleKind;

    #[test]
    fn parses_paper_rule_form() {
        let p = parse_program("a :- b, not c.").unwrap();
        assert_eq!(p.len(), 1);
        let rule = &p.rules()[0];
        let head = rule.head().unwrap();
        assert_eq!(head.predicate, "a");
        assert_eq!(head.arity(), 0);
        assert_eq!(rule.body().len(), 2);
        assert!(!rule.body()[0].negated);
        assert!(rule.body()[1].negated);
        assert_eq!(rule.source_text(), "a :- b, not c.");
    }

    #[test]
    fn empty_input_is_empty_program() {
        let p = parse_program("").unwrap();
        assert!(p.is_empty());
    }

    #[test]
    fn parses_question_facts() {
        let p = parse_program("end(8). count(8,7).").unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.rules()[0].kind(), RuleKind::Fact);
        assert_eq!(p.rules()[1].source_text(), "count(8,7).");
    }

    #[test]
    fn normalizes_whitespace() {
        let p = parse_program("ans( V )   :-  end( T ),   holds(T , V).").unwrap();
        assert_eq!(p.rules()[0].source_text(), "ans(V) :- end(T), holds(T,V).");
    }

    #[test]
    fn syntax_error_quotes_fragment() {
        let err = parse_program("a :- b").unwrap_err();
        match err {
            AspError::Syntax { message, fragment, .. } => {
                assert!(message.contains("terminating"), "message: {message}");
                assert!(fragment.contains('b'), "fragment: {fragment}");
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
        assert!(parse_program("p(,).").is_err());
        assert!(parse_program("1234.").is_err());
    }

    #[test]
    fn extended_statements_become_passthrough() {
        let p = parse_program("{ a ; b } = 1 :- c. #minimize { 1,X : cost(X) }. ans(V) :- end(T).").unwrap();
        let kinds: Vec<RuleKind> = p.iter().map(|r| r.kind()).collect();
        assert_eq!(kinds, vec![RuleKind::Passthrough, RuleKind::Passthrough, RuleKind::Rule]);
        assert_eq!(p.rules()[0].source_text(), "{ a ; b } = 1 :- c.");
        assert!(p.rules()[0].predicates().is_empty());
    }

    #[test]
    fn weak_constraints_and_ranges_pass_through() {
        let p = parse_program(":~ broken(X). [1@1, X]\u{0020}. n(0..9).").unwrap();
        assert!(p.iter().all(|r| r.kind() == RuleKind::Passthrough));
    }

    #[test]
    fn comments_are_skipped() {
        let p = parse_program("% header\na. % after\n% tail\n").unwrap();
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn round_trip_is_identity() {
        let texts = [
            "a :- b, not c.",
            "p(1,x,\"s t\").",
            ":- q(X), not r(X).",
            "{ choice(X) : dom(X) } = 1.",
        ];
        for t in texts {
            let p = parse_program(t).unwrap();
            let q = parse_program(&p.to_text()).unwrap();
            assert_eq!(p, q, "round trip failed for {t}");
        }
    }
}
