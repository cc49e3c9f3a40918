//! Recursive-descent parser for the ProbLog fragment.
//!
//! ```text
//! program   ::= statement*
//! statement ::= "query" "(" atom ")" "."
//!             | "evidence" "(" atom [ "," ("true" | "false") ] ")" "."
//!             | head { ";" head } [ ":-" literal { "," literal } ] "."
//! head      ::= [ number "::" ] atom
//! literal   ::= [ "not" | "\+" ] atom | "not" "(" atom ")"
//! atom      ::= name [ "(" term { "," term } ")" ]
//! term      ::= name | quoted | number | Variable
//! ```
//!
//! `%` starts a line comment and `/* ... */` a block comment. A head without
//! an explicit probability gets probability 1.

use std::fmt;

use thiserror::Error;

use super::{Atom, Clause, Evidence, Literal, ProbHead, ProblogProgram, Term};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("SyntaxError: line {line}, column {column}: expected {expected}, found {found}")]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub expected: String,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Var(String),
    Quoted(String),
    Number(String),
    LParen,
    RParen,
    Comma,
    Semi,
    Dot,
    Annot,
    Neck,
    NegOp,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Name(s) => write!(f, "`{s}`"),
            Tok::Var(s) => write!(f, "variable `{s}`"),
            Tok::Quoted(s) => write!(f, "'{s}'"),
            Tok::Number(s) => write!(f, "number `{s}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Annot => f.write_str("`::`"),
            Tok::Neck => f.write_str("`:-`"),
            Tok::NegOp => f.write_str("`\\+`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next()
    }

    fn error(&self, expected: &str, found: String) -> SyntaxError {
        SyntaxError {
            line: self.line,
            column: self.column,
            expected: expected.to_string(),
            found,
        }
    }

    fn skip_trivia(&mut self) -> Result<(), SyntaxError> {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('%') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                Some('/') if self.peek2() == Some('*') => {
                    let (line, column) = (self.line, self.column);
                    self.bump();
                    self.bump();
                    let mut closed = false;
                    while let Some(c) = self.bump() {
                        if c == '*' && self.peek() == Some('/') {
                            self.bump();
                            closed = true;
                            break;
                        }
                    }
                    if !closed {
                        return Err(SyntaxError {
                            line,
                            column,
                            expected: "`*/` closing the comment".into(),
                            found: "end of input".into(),
                        });
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn tokens(mut self) -> Result<Vec<Token>, SyntaxError> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia()?;
            let (line, column) = (self.line, self.column);
            let Some(c) = self.peek() else {
                out.push(Token {
                    tok: Tok::Eof,
                    line,
                    column,
                });
                return Ok(out);
            };
            let tok = match c {
                '(' => {
                    self.bump();
                    Tok::LParen
                }
                ')' => {
                    self.bump();
                    Tok::RParen
                }
                ',' => {
                    self.bump();
                    Tok::Comma
                }
                ';' => {
                    self.bump();
                    Tok::Semi
                }
                '.' => {
                    self.bump();
                    Tok::Dot
                }
                ':' => {
                    self.bump();
                    match self.bump() {
                        Some(':') => Tok::Annot,
                        Some('-') => Tok::Neck,
                        other => {
                            return Err(SyntaxError {
                                line,
                                column,
                                expected: "`::` or `:-`".into(),
                                found: other.map_or("`:`".into(), |c| format!("`:{c}`")),
                            })
                        }
                    }
                }
                '\\' => {
                    self.bump();
                    match self.bump() {
                        Some('+') => Tok::NegOp,
                        other => {
                            return Err(SyntaxError {
                                line,
                                column,
                                expected: "`\\+`".into(),
                                found: other.map_or("`\\`".into(), |c| format!("`\\{c}`")),
                            })
                        }
                    }
                }
                '\'' => Tok::Quoted(self.quoted()?),
                c if c.is_ascii_digit() => Tok::Number(self.number()),
                c if c.is_ascii_lowercase() => Tok::Name(self.word()),
                c if c.is_ascii_uppercase() || c == '_' => Tok::Var(self.word()),
                other => {
                    return Err(self.error("a statement", format!("character `{other}`")));
                }
            };
            out.push(Token { tok, line, column });
        }
    }

    fn word(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s
    }

    fn digits(&mut self, s: &mut String) {
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
    }

    fn number(&mut self) -> String {
        let mut s = String::new();
        self.digits(&mut s);
        // A dot is part of the number only when a digit follows; otherwise it
        // ends the statement.
        if self.peek() == Some('.') && self.peek2().is_some_and(|c| c.is_ascii_digit()) {
            s.push('.');
            self.bump();
            self.digits(&mut s);
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let mut it = self.chars.clone();
            it.next();
            let next = it.next();
            let after = it.next();
            let exp_ok = match next {
                Some(c) if c.is_ascii_digit() => true,
                Some('+' | '-') => after.is_some_and(|c| c.is_ascii_digit()),
                _ => false,
            };
            if exp_ok {
                s.push(self.bump().expect("peeked"));
                if matches!(self.peek(), Some('+' | '-')) {
                    s.push(self.bump().expect("peeked"));
                }
                self.digits(&mut s);
            }
        }
        s
    }

    fn quoted(&mut self) -> Result<String, SyntaxError> {
        let (line, column) = (self.line, self.column);
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                None => {
                    return Err(SyntaxError {
                        line,
                        column,
                        expected: "closing `'`".into(),
                        found: "end of input".into(),
                    })
                }
                Some('\'') => {
                    if self.peek() == Some('\'') {
                        self.bump();
                        s.push('\'');
                    } else {
                        return Ok(s);
                    }
                }
                Some('\\') => match self.bump() {
                    Some('n') => s.push('\n'),
                    Some('t') => s.push('\t'),
                    Some(c) => s.push(c),
                    None => return Err(self.error("an escaped character", "end of input".into())),
                },
                Some(c) => s.push(c),
            }
        }
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn advance(&mut self) -> Tok {
        let tok = self.tokens[self.pos].tok.clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        tok
    }

    fn error(&self, expected: &str) -> SyntaxError {
        let t = &self.tokens[self.pos];
        SyntaxError {
            line: t.line,
            column: t.column,
            expected: expected.to_string(),
            found: t.tok.to_string(),
        }
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<(), SyntaxError> {
        if *self.peek() == tok {
            self.advance();
            Ok(())
        } else {
            Err(self.error(expected))
        }
    }

    fn program(&mut self) -> Result<ProblogProgram, SyntaxError> {
        let mut program = ProblogProgram::default();
        while *self.peek() != Tok::Eof {
            match (self.peek(), self.peek_at(1)) {
                (Tok::Name(n), Tok::LParen) if n == "query" => {
                    self.advance();
                    self.advance();
                    let atom = self.atom()?;
                    self.expect(Tok::RParen, "`)` closing query/1")?;
                    self.expect(Tok::Dot, "`.` ending the statement")?;
                    program.queries.push(atom);
                }
                (Tok::Name(n), Tok::LParen) if n == "evidence" => {
                    self.advance();
                    self.advance();
                    let atom = self.atom()?;
                    let value = if *self.peek() == Tok::Comma {
                        self.advance();
                        match self.advance() {
                            Tok::Name(v) if v == "true" => true,
                            Tok::Name(v) if v == "false" => false,
                            _ => {
                                self.pos -= 1;
                                return Err(self.error("`true` or `false`"));
                            }
                        }
                    } else {
                        true
                    };
                    self.expect(Tok::RParen, "`)` closing evidence/2")?;
                    self.expect(Tok::Dot, "`.` ending the statement")?;
                    program.evidence.push(Evidence { atom, value });
                }
                _ => program.clauses.push(self.clause()?),
            }
        }
        Ok(program)
    }

    fn clause(&mut self) -> Result<Clause, SyntaxError> {
        let mut heads = vec![self.head()?];
        while *self.peek() == Tok::Semi {
            self.advance();
            heads.push(self.head()?);
        }
        let mut body = Vec::new();
        match self.peek() {
            Tok::Neck => {
                self.advance();
                body.push(self.literal()?);
                while *self.peek() == Tok::Comma {
                    self.advance();
                    body.push(self.literal()?);
                }
                self.expect(Tok::Dot, "`,` or `.` after a body literal")?;
            }
            Tok::Dot => {
                self.advance();
            }
            _ => return Err(self.error("`;`, `:-` or `.` after a head")),
        }
        Ok(Clause { heads, body })
    }

    fn head(&mut self) -> Result<ProbHead, SyntaxError> {
        let probability = if let Tok::Number(n) = self.peek().clone() {
            self.advance();
            let p: f64 = n.parse().map_err(|_| self.error("a probability"))?;
            self.expect(Tok::Annot, "`::` after the probability")?;
            p
        } else {
            1.0
        };
        Ok(ProbHead {
            probability,
            atom: self.atom()?,
        })
    }

    fn literal(&mut self) -> Result<Literal, SyntaxError> {
        match (self.peek().clone(), self.peek_at(1).clone()) {
            (Tok::NegOp, _) => {
                self.advance();
                Ok(Literal::neg(self.atom()?))
            }
            (Tok::Name(n), Tok::Name(_)) if n == "not" => {
                self.advance();
                Ok(Literal::neg(self.atom()?))
            }
            (Tok::Name(n), Tok::LParen) if n == "not" => {
                self.advance();
                self.advance();
                let atom = self.atom()?;
                self.expect(Tok::RParen, "`)` closing not/1")?;
                Ok(Literal::neg(atom))
            }
            _ => Ok(Literal::pos(self.atom()?)),
        }
    }

    fn atom(&mut self) -> Result<Atom, SyntaxError> {
        let predicate = match self.peek().clone() {
            Tok::Name(n) => {
                self.advance();
                n
            }
            _ => return Err(self.error("a predicate name")),
        };
        let mut args = Vec::new();
        if *self.peek() == Tok::LParen {
            self.advance();
            args.push(self.term()?);
            while *self.peek() == Tok::Comma {
                self.advance();
                args.push(self.term()?);
            }
            self.expect(Tok::RParen, "`,` or `)` in an argument list")?;
        }
        Ok(Atom { predicate, args })
    }

    fn term(&mut self) -> Result<Term, SyntaxError> {
        let term = match self.peek().clone() {
            Tok::Name(n) | Tok::Quoted(n) | Tok::Number(n) => Term::Const(n),
            Tok::Var(v) => Term::Var(v),
            _ => return Err(self.error("a constant or variable")),
        };
        self.advance();
        Ok(term)
    }
}

/// Parses program text. Head probabilities are not range-checked here; see
/// [`ProblogProgram::validate`].
pub fn parse(text: &str) -> Result<ProblogProgram, SyntaxError> {
    let tokens = Lexer::new(text).tokens()?;
    Parser { tokens, pos: 0 }.program()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::GALLSTONE_PROGRAM;

    #[test]
    fn gallstone_program_shape() {
        let p = parse(GALLSTONE_PROGRAM).unwrap();
        assert_eq!(p.clauses.len(), 5);
        assert_eq!(p.evidence.len(), 1);
        assert_eq!(p.queries.len(), 1);
        assert_eq!(p.queries[0], Atom::new("amylase", &["patient", "500-1400"]));
        assert_eq!(p.clauses[3].heads.len(), 3);
        assert_eq!(p.clauses[3].heads[2].probability, 0.0187);
        assert!(p.clauses[2].body[0].negated);
        assert_eq!(
            p.evidence[0],
            Evidence {
                atom: Atom::new("flatulence", &["patient"]),
                value: true
            }
        );
    }

    #[test]
    fn minimal_fact() {
        let p = parse("0.5::a.").unwrap();
        assert_eq!(p.clauses.len(), 1);
        assert_eq!(p.clauses[0].heads, vec![ProbHead::new(0.5, Atom::new("a", &[]))]);
        assert!(p.clauses[0].body.is_empty());
    }

    #[test]
    fn whitespace_and_comments_between_statements() {
        let p = parse("% model\n0.5 :: a .   /* block\n comment */ b :- \\+ a.\nquery(b).").unwrap();
        assert_eq!(p.clauses.len(), 2);
        assert_eq!(p.clauses[1].heads[0].probability, 1.0);
        assert!(p.clauses[1].body[0].negated);
        let p = parse("0.4::a. 0.5::b :- not(a).").unwrap();
        assert!(p.clauses[1].body[0].negated);
    }

    #[test]
    fn numbers_and_variables() {
        let p = parse("1e-3::p(X, 12). 1::q.").unwrap();
        assert_eq!(p.clauses[0].heads[0].probability, 0.001);
        assert_eq!(p.clauses[0].heads[0].atom.args[0], Term::Var("X".into()));
        assert_eq!(p.clauses[0].heads[0].atom.args[1], Term::Const("12".into()));
        assert_eq!(p.clauses[1].heads[0].probability, 1.0);
    }

    #[test]
    fn quoted_escapes() {
        let p = parse(r"query(a('it''s', 'x\'y')).").unwrap();
        assert_eq!(p.queries[0], Atom::new("a", &["it's", "x'y"]));
    }

    #[test]
    fn missing_dot_reports_position_and_hint() {
        let err = parse("0.5::a.\n0.3::b :- a\nquery(b).").unwrap_err();
        assert_eq!((err.line, err.column), (3, 1));
        assert!(err.expected.contains("`.`"), "{err}");
    }

    #[test]
    fn other_syntax_errors() {
        let err = parse("0.5:a.").unwrap_err();
        assert_eq!((err.line, err.column), (1, 4));
        assert_eq!(err.found, "`:a`");
        let err = parse("0.5::a(x.").unwrap_err();
        assert!(err.expected.contains("`)`"), "{err}");
        let err = parse("evidence(a, maybe).").unwrap_err();
        assert_eq!(err.expected, "`true` or `false`");
        assert_eq!(err.column, 13);
        let err = parse("0.5::'unterminated").unwrap_err();
        assert!(err.expected.contains("'"), "{err}");
        assert!(parse("0.2::a; .").is_err());
    }
}
