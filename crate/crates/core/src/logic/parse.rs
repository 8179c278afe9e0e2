use std::collections::BTreeSet;

use super::Formula;
use crate::error::ParseError;
use crate::values::Discount;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Mu,
    Nu,
    Ident(String),
    Number(f64),
    Dot,
    Or,
    And,
    Diamond,
    Box,
    Star,
    Tilde,
    Bar,
    Minus,
    LParen,
    RParen,
    Eof,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Mu => "'mu'".into(),
        Tok::Nu => "'nu'".into(),
        Tok::Ident(s) => format!("identifier {s:?}"),
        Tok::Number(n) => format!("number {n}"),
        Tok::Dot => "'.'".into(),
        Tok::Or => "'\\/'".into(),
        Tok::And => "'/\\'".into(),
        Tok::Diamond => "'<>'".into(),
        Tok::Box => "'[]'".into(),
        Tok::Star => "'*'".into(),
        Tok::Tilde => "'~'".into(),
        Tok::Bar => "'|'".into(),
        Tok::Minus => "'-'".into(),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::Eof => "end of input".into(),
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |pos: usize, msg: &str| ParseError::Syntax { pos, msg: msg.to_string() };
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let two = |s: &str| src[i..].starts_with(s);
        let tok = if two("\\/") {
            i += 2;
            Tok::Or
        } else if two("/\\") {
            i += 2;
            Tok::And
        } else if two("<>") {
            i += 2;
            Tok::Diamond
        } else if two("[]") {
            i += 2;
            Tok::Box
        } else {
            match c {
                b'.' if !bytes.get(i + 1).is_some_and(u8::is_ascii_digit) => {
                    i += 1;
                    Tok::Dot
                }
                b'*' => {
                    i += 1;
                    Tok::Star
                }
                b'~' => {
                    i += 1;
                    Tok::Tilde
                }
                b'|' => {
                    i += 1;
                    Tok::Bar
                }
                b'-' => {
                    i += 1;
                    Tok::Minus
                }
                b'(' => {
                    i += 1;
                    Tok::LParen
                }
                b')' => {
                    i += 1;
                    Tok::RParen
                }
                b'0'..=b'9' | b'.' => {
                    while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                        i += 1;
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
                    let text = &src[start..i];
                    let n: f64 = text.parse().map_err(|_| err(start, &format!("malformed number {text:?}")))?;
                    if !n.is_finite() {
                        return Err(err(start, "number out of range"));
                    }
                    Tok::Number(n)
                }
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    while i < bytes.len()
                        && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'')
                    {
                        i += 1;
                    }
                    match &src[start..i] {
                        "mu" => Tok::Mu,
                        "nu" => Tok::Nu,
                        s => Tok::Ident(s.to_string()),
                    }
                }
                _ => {
                    let ch = src[i..].chars().next().unwrap();
                    return Err(err(start, &format!("unexpected character {ch:?}")));
                }
            }
        };
        out.push((tok, start));
    }
    out.push((Tok::Eof, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    bound: BTreeSet<String>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &str) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            pos: self.pos(),
            msg: format!("expected {expected}, found {}", describe(self.peek())),
        })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.fail(what)
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::Mu | Tok::Nu => {
                let is_mu = *self.peek() == Tok::Mu;
                self.bump();
                let pos = self.pos();
                let x = match self.peek().clone() {
                    Tok::Ident(x) => {
                        self.bump();
                        x
                    }
                    _ => return self.fail("a variable name"),
                };
                if !self.bound.insert(x.clone()) {
                    return Err(ParseError::Rebound { var: x, pos });
                }
                self.expect(Tok::Dot, "'.'")?;
                let body = Box::new(self.formula()?);
                Ok(if is_mu { Formula::Mu(x, body) } else { Formula::Nu(x, body) })
            }
            _ => self.disj(),
        }
    }

    fn disj(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.conj()?;
        while *self.peek() == Tok::Or {
            self.bump();
            f = Formula::or(f, self.conj()?);
        }
        Ok(f)
    }

    fn conj(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            f = Formula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Diamond => {
                self.bump();
                Ok(Formula::diamond(self.unary()?))
            }
            Tok::Box => {
                self.bump();
                Ok(Formula::boxed(self.unary()?))
            }
            Tok::Tilde => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Number(d) => {
                let pos = self.pos();
                self.bump();
                let d = Discount::new(d).map_err(|_| ParseError::Syntax {
                    pos,
                    msg: "scaling factor must be strictly positive".into(),
                })?;
                self.expect(Tok::Star, "'*'")?;
                Ok(Formula::Scale(d, Box::new(self.unary()?)))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Bar => {
                self.bump();
                let name = match self.peek().clone() {
                    Tok::Ident(n) => {
                        self.bump();
                        n
                    }
                    _ => return self.fail("a predicate name"),
                };
                self.expect(Tok::Minus, "'-'")?;
                let c = match self.peek().clone() {
                    Tok::Number(c) => {
                        self.bump();
                        c
                    }
                    Tok::Minus => return Err(ParseError::NegativeConstant { pos: self.pos() }),
                    _ => return self.fail("a constant"),
                };
                self.expect(Tok::Bar, "'|'")?;
                Ok(Formula::Pred { name, c })
            }
            Tok::Ident(x) => {
                self.bump();
                Ok(Formula::Var(x))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(f)
            }
            _ => self.fail("a formula"),
        }
    }
}

/// Parses the ASCII concrete syntax:
///
/// ```text
/// formula := "mu" VAR "." formula | "nu" VAR "." formula | disj
/// disj    := conj ("\/" conj)*
/// conj    := unary ("/\" unary)*
/// unary   := "<>" unary | "[]" unary | NUMBER "*" unary | "~" unary | atom
/// atom    := "|" IDENT "-" NUMBER "|" | VAR | "(" formula ")"
/// ```
///
/// Free variables are allowed; binding a variable twice, or using a name both
/// free and bound, is rejected.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0, bound: BTreeSet::new() };
    let f = p.formula()?;
    if *p.peek() != Tok::Eof {
        return p.fail("end of input");
    }
    if let Some(x) = f.free_vars().into_iter().find(|x| p.bound.contains(x)) {
        return Err(ParseError::FreeAndBound { var: x });
    }
    Ok(f)
}
