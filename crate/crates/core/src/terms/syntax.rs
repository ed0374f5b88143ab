//! Concrete syntax.
//!
//! ```text
//! term  ::= abs | app
//! abs   ::= ("\" | "λ") ident "." term
//! app   ::= atom atom* abs?
//! atom  ::= ident | "(" term ")"
//! ident ::= [A-Za-z_][A-Za-z0-9_']*
//! ```
//!
//! Application associates to the left and an abstraction extends as far to the
//! right as possible, so a trailing argument abstraction needs no parentheses.

use std::collections::HashSet;

use thiserror::Error;

use super::{Names, Term, TermKind, VarId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unbound name `{name}` at byte {offset}")]
    Unbound { offset: usize, name: String },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::Unbound { offset, .. } => *offset,
        }
    }
}

/// Parses a term; free names are interned in `names`.
pub fn parse(names: &mut Names, text: &str) -> Result<Term, ParseError> {
    Parser::new(names, text, false).run()
}

/// Like [`parse`], but rejects free names.
pub fn parse_closed(names: &mut Names, text: &str) -> Result<Term, ParseError> {
    Parser::new(names, text, true).run()
}

struct Parser<'a> {
    names: &'a mut Names,
    text: &'a str,
    pos: usize,
    closed: bool,
    scope: Vec<(&'a str, VarId)>,
}

impl<'a> Parser<'a> {
    fn new(names: &'a mut Names, text: &'a str, closed: bool) -> Parser<'a> {
        Parser {
            names,
            text,
            pos: 0,
            closed,
            scope: Vec::new(),
        }
    }

    fn run(mut self) -> Result<Term, ParseError> {
        let t = self.term()?;
        self.skip_ws();
        match self.peek() {
            None => Ok(t),
            Some(c) => Err(self.error(format!("unexpected `{c}`"))),
        }
    }

    fn error(&self, message: String) -> ParseError {
        ParseError::Syntax {
            offset: self.pos,
            message,
        }
    }

    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn bump(&mut self, c: char) {
        self.pos += c.len_utf8();
    }

    fn expect(&mut self, want: char) -> Result<(), ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c == want => {
                self.bump(c);
                Ok(())
            }
            Some(c) => Err(self.error(format!("expected `{want}`, found `{c}`"))),
            None => Err(self.error(format!("expected `{want}`, found end of input"))),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some('\\' | 'λ') => self.abs(),
            _ => self.app(),
        }
    }

    fn abs(&mut self) -> Result<Term, ParseError> {
        let c = self.peek().expect("caller checked");
        self.bump(c);
        self.skip_ws();
        let (name, _) = self.ident()?;
        self.expect('.')?;
        let binder = self.names.binder(name);
        self.scope.push((name, binder.clone()));
        let body = self.term();
        self.scope.pop();
        Ok(Term::abs(binder, body?))
    }

    fn app(&mut self) -> Result<Term, ParseError> {
        let mut t = self.atom()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some('\\' | 'λ') => {
                    let arg = self.abs()?;
                    return Ok(Term::app(t, arg));
                }
                Some(c) if c == '(' || is_ident_start(c) => {
                    let arg = self.atom()?;
                    t = Term::app(t, arg);
                }
                _ => return Ok(t),
            }
        }
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some('(') => {
                self.bump('(');
                let t = self.term()?;
                self.expect(')')?;
                Ok(t)
            }
            Some(c) if is_ident_start(c) => {
                let (name, offset) = self.ident()?;
                if let Some((_, v)) = self.scope.iter().rev().find(|(n, _)| *n == name) {
                    return Ok(Term::var(v.clone()));
                }
                if self.closed {
                    return Err(ParseError::Unbound {
                        offset,
                        name: name.to_string(),
                    });
                }
                Ok(Term::var(self.names.free(name)))
            }
            Some(c) => Err(self.error(format!("unexpected `{c}`"))),
            None => Err(self.error("unexpected end of input".into())),
        }
    }

    fn ident(&mut self) -> Result<(&'a str, usize), ParseError> {
        let start = self.pos;
        let rest = &self.text[start..];
        let mut chars = rest.char_indices();
        match chars.next() {
            Some((_, c)) if is_ident_start(c) => {}
            Some((_, c)) => return Err(self.error(format!("expected a name, found `{c}`"))),
            None => return Err(self.error("expected a name, found end of input".into())),
        }
        let len = chars
            .find(|&(_, c)| !is_ident_continue(c))
            .map_or(rest.len(), |(i, _)| i);
        self.pos += len;
        Ok((&self.text[start..start + len], start))
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lambda {
    Backslash,
    Greek,
}

impl Lambda {
    fn as_str(self) -> &'static str {
        match self {
            Lambda::Backslash => "\\",
            Lambda::Greek => "λ",
        }
    }
}

/// Prints with backslashes and each variable's own display name.
pub fn print(t: &Term) -> String {
    print_with(t, Lambda::Backslash, &|v: &VarId| v.name().to_string())
}

/// Prints with minimal parentheses. Binders whose display name would clash
/// with a free name or an enclosing binder get primes appended, so the output
/// always parses back to an α-equivalent term.
pub fn print_with(t: &Term, lambda: Lambda, namer: &dyn Fn(&VarId) -> String) -> String {
    let free: HashSet<String> = t.free_vars().iter().map(namer).collect();
    let mut p = Printer {
        lambda,
        namer,
        free,
        scope: Vec::new(),
        out: String::new(),
    };
    p.term(t, true);
    p.out
}

struct Printer<'a> {
    lambda: Lambda,
    namer: &'a dyn Fn(&VarId) -> String,
    free: HashSet<String>,
    scope: Vec<(VarId, String)>,
    out: String,
}

impl Printer<'_> {
    /// `tail`: nothing follows this term up to the end of the enclosing
    /// parenthesis, so an abstraction may extend freely.
    fn term(&mut self, t: &Term, tail: bool) {
        match t.kind() {
            TermKind::Var(v) => self.var(v),
            TermKind::Abs(x, body) => {
                if !tail {
                    self.out.push('(');
                }
                let name = self.binder_name(x);
                self.out.push_str(self.lambda.as_str());
                self.out.push_str(&name);
                self.out.push('.');
                self.scope.push((x.clone(), name));
                self.term(body, true);
                self.scope.pop();
                if !tail {
                    self.out.push(')');
                }
            }
            TermKind::App(l, r) => {
                self.term(l, false);
                self.out.push(' ');
                match r.kind() {
                    TermKind::Var(v) => self.var(v),
                    TermKind::Abs(..) => self.term(r, tail),
                    TermKind::App(..) => {
                        self.out.push('(');
                        self.term(r, true);
                        self.out.push(')');
                    }
                }
            }
        }
    }

    fn var(&mut self, v: &VarId) {
        match self.scope.iter().rev().find(|(b, _)| b == v) {
            Some((_, name)) => self.out.push_str(name),
            None => self.out.push_str(&(self.namer)(v)),
        }
    }

    fn binder_name(&self, x: &VarId) -> String {
        let mut name = (self.namer)(x);
        while self.free.contains(&name) || self.scope.iter().any(|(_, n)| *n == name) {
            name.push('\'');
        }
        name
    }
}
