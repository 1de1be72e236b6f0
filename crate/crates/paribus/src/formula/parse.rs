//! Recursive-descent parsers for the four formula languages.
//!
//! Shared grammar skeleton (whitespace-insensitive):
//!
//! ```text
//! formula := iff
//! iff     := imp ("<->" imp)*            (right-associative)
//! imp     := or ("->" imp)?              (right-associative)
//! or      := and ("|" and)*              (right-associative)
//! and     := unary ("&" unary)*          (right-associative)
//! unary   := atom | "T" | "F" | "~" unary | "(" formula ")" | MODAL unary
//! atom    := [a-z][a-zA-Z0-9_]*
//! ```
//!
//! Per-language modalities:
//!
//! ```text
//! PECP:  "<" atomset ">"  |  "[" atomset "]"        atomset  := "{" (atom ("," atom)*)? "}"
//! STIT:  "[" agentset ":stit]"  |  "<" agentset ":stit>"
//! CLPC:  "dia" agentset  |  "box" agentset          agentset := "{" (int ("," int)*)? "}"
//! S5:    "[]"  |  "<>"
//! ```
//!
//! `|`, `->`, `<->`, `F`, and all dual modalities are desugared during
//! parsing, so the result is always a `{T, atom, ~, &, modal}` core tree.
//! Duplicate atoms or agents inside a set literal are reported as errors.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::atom::{AgentId, Atom};

use super::{ClpcFormula, Formula, Modality, PecpFormula, S5Formula, StitFormula};

/// Syntax error with 1-based source position.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at {}:{}: {}", self.line, self.col, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(u64),
    True,
    False,
    Tilde,
    Amp,
    Pipe,
    Arrow,
    DArrow,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Less,
    Greater,
    Comma,
    Colon,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Int(n) => format!("integer '{n}'"),
            Tok::True => "'T'".into(),
            Tok::False => "'F'".into(),
            Tok::Tilde => "'~'".into(),
            Tok::Amp => "'&'".into(),
            Tok::Pipe => "'|'".into(),
            Tok::Arrow => "'->'".into(),
            Tok::DArrow => "'<->'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::LBrace => "'{'".into(),
            Tok::RBrace => "'}'".into(),
            Tok::LBracket => "'['".into(),
            Tok::RBracket => "']'".into(),
            Tok::Less => "'<'".into(),
            Tok::Greater => "'>'".into(),
            Tok::Comma => "','".into(),
            Tok::Colon => "':'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    i: usize,
    line: u32,
    col: u32,
}

type Spanned = (Tok, u32, u32);

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), i: 0, line: 1, col: 1 }
    }

    fn bump(&mut self) -> u8 {
        let c = self.src[self.i];
        self.i += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        c
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.i).copied()
    }

    fn peek2(&self) -> Option<u8> {
        self.src.get(self.i + 1).copied()
    }

    fn error(&self, line: u32, col: u32, message: impl Into<String>) -> ParseError {
        ParseError { line, col, message: message.into() }
    }

    fn tokens(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        loop {
            while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
                self.bump();
            }
            let (line, col) = (self.line, self.col);
            let Some(c) = self.peek() else {
                out.push((Tok::Eof, line, col));
                return Ok(out);
            };
            let tok = match c {
                b'~' => { self.bump(); Tok::Tilde }
                b'&' => { self.bump(); Tok::Amp }
                b'|' => { self.bump(); Tok::Pipe }
                b'(' => { self.bump(); Tok::LParen }
                b')' => { self.bump(); Tok::RParen }
                b'{' => { self.bump(); Tok::LBrace }
                b'}' => { self.bump(); Tok::RBrace }
                b'[' => { self.bump(); Tok::LBracket }
                b']' => { self.bump(); Tok::RBracket }
                b'>' => { self.bump(); Tok::Greater }
                b',' => { self.bump(); Tok::Comma }
                b':' => { self.bump(); Tok::Colon }
                b'<' => {
                    if self.peek2() == Some(b'-') && self.src.get(self.i + 2) == Some(&b'>') {
                        self.bump();
                        self.bump();
                        self.bump();
                        Tok::DArrow
                    } else {
                        self.bump();
                        Tok::Less
                    }
                }
                b'-' => {
                    self.bump();
                    if self.peek() == Some(b'>') {
                        self.bump();
                        Tok::Arrow
                    } else {
                        return Err(self.error(line, col, "expected '->'"));
                    }
                }
                b'T' => { self.bump(); Tok::True }
                b'F' => { self.bump(); Tok::False }
                b'0'..=b'9' => {
                    let start = self.i;
                    while matches!(self.peek(), Some(d) if d.is_ascii_digit()) {
                        self.bump();
                    }
                    let text = std::str::from_utf8(&self.src[start..self.i]).unwrap();
                    let n: u64 = text.parse().map_err(|_| {
                        self.error(line, col, format!("integer '{text}' out of range"))
                    })?;
                    Tok::Int(n)
                }
                b'a'..=b'z' => {
                    let start = self.i;
                    while matches!(self.peek(), Some(d) if d.is_ascii_alphanumeric() || d == b'_')
                    {
                        self.bump();
                    }
                    let text = std::str::from_utf8(&self.src[start..self.i]).unwrap();
                    Tok::Ident(text.to_string())
                }
                other => {
                    return Err(self.error(
                        line,
                        col,
                        format!("unexpected character '{}'", other as char),
                    ));
                }
            };
            out.push((tok, line, col));
        }
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_ahead(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn here(&self) -> (u32, u32) {
        let (_, l, c) = self.toks[self.pos];
        (l, c)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError { line, col, message: message.into() }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error_here(format!("expected {what}, found {}", self.peek().describe())))
        }
    }

    /// Parses `"{" (atom ("," atom)*)? "}"`, rejecting duplicates.
    fn atom_set(&mut self) -> Result<BTreeSet<Atom>, ParseError> {
        self.expect(Tok::LBrace, "'{'")?;
        let mut set = BTreeSet::new();
        if *self.peek() == Tok::RBrace {
            self.bump();
            return Ok(set);
        }
        loop {
            let (line, col) = self.here();
            match self.bump() {
                Tok::Ident(name) => {
                    let atom = Atom::new(&name)
                        .map_err(|e| ParseError { line, col, message: e.to_string() })?;
                    if !set.insert(atom) {
                        return Err(ParseError {
                            line,
                            col,
                            message: format!("duplicate atom '{name}' in set"),
                        });
                    }
                }
                other => {
                    return Err(ParseError {
                        line,
                        col,
                        message: format!("expected atom, found {}", other.describe()),
                    });
                }
            }
            match self.bump() {
                Tok::Comma => continue,
                Tok::RBrace => return Ok(set),
                other => {
                    return Err(self.error_here(format!(
                        "expected ',' or '}}', found {}",
                        other.describe()
                    )));
                }
            }
        }
    }

    /// Parses `"{" (int ("," int)*)? "}"`, rejecting duplicates and ids < 1.
    fn agent_set(&mut self) -> Result<BTreeSet<AgentId>, ParseError> {
        self.expect(Tok::LBrace, "'{'")?;
        let mut set = BTreeSet::new();
        if *self.peek() == Tok::RBrace {
            self.bump();
            return Ok(set);
        }
        loop {
            let (line, col) = self.here();
            match self.bump() {
                Tok::Int(n) => {
                    if n == 0 || n > u64::from(u32::MAX) {
                        return Err(ParseError {
                            line,
                            col,
                            message: format!("agent id '{n}' out of range (ids start at 1)"),
                        });
                    }
                    if !set.insert(AgentId(n as u32)) {
                        return Err(ParseError {
                            line,
                            col,
                            message: format!("duplicate agent '{n}' in set"),
                        });
                    }
                }
                other => {
                    return Err(ParseError {
                        line,
                        col,
                        message: format!("expected agent id, found {}", other.describe()),
                    });
                }
            }
            match self.bump() {
                Tok::Comma => continue,
                Tok::RBrace => return Ok(set),
                other => {
                    return Err(self.error_here(format!(
                        "expected ',' or '}}', found {}",
                        other.describe()
                    )));
                }
            }
        }
    }

    fn expect_stit_keyword(&mut self) -> Result<(), ParseError> {
        self.expect(Tok::Colon, "':'")?;
        match self.peek() {
            Tok::Ident(s) if s == "stit" => {
                self.bump();
                Ok(())
            }
            other => Err(self.error_here(format!("expected 'stit', found {}", other.describe()))),
        }
    }
}

/// One full parse: binary-operator layers shared, `unary` supplied per language.
fn parse_with<M, F>(src: &str, unary: &F) -> Result<Formula<M>, ParseError>
where
    M: Modality,
    F: Fn(&mut Parser) -> Result<Formula<M>, ParseError>,
{
    let toks = Lexer::new(src).tokens()?;
    let mut p = Parser { toks, pos: 0 };
    let f = parse_iff(&mut p, unary)?;
    if *p.peek() != Tok::Eof {
        return Err(p.error_here(format!("unexpected {}", p.peek().describe())));
    }
    Ok(f)
}

fn parse_iff<M, F>(p: &mut Parser, unary: &F) -> Result<Formula<M>, ParseError>
where
    M: Modality,
    F: Fn(&mut Parser) -> Result<Formula<M>, ParseError>,
{
    let mut items = vec![parse_imp(p, unary)?];
    while *p.peek() == Tok::DArrow {
        p.bump();
        items.push(parse_imp(p, unary)?);
    }
    let mut iter = items.into_iter().rev();
    let last = iter.next().unwrap();
    Ok(iter.fold(last, |acc, f| Formula::iff(f, acc)))
}

fn parse_imp<M, F>(p: &mut Parser, unary: &F) -> Result<Formula<M>, ParseError>
where
    M: Modality,
    F: Fn(&mut Parser) -> Result<Formula<M>, ParseError>,
{
    let lhs = parse_or(p, unary)?;
    if *p.peek() == Tok::Arrow {
        p.bump();
        let rhs = parse_imp(p, unary)?;
        Ok(Formula::imp(lhs, rhs))
    } else {
        Ok(lhs)
    }
}

fn parse_or<M, F>(p: &mut Parser, unary: &F) -> Result<Formula<M>, ParseError>
where
    M: Modality,
    F: Fn(&mut Parser) -> Result<Formula<M>, ParseError>,
{
    let mut items = vec![parse_and(p, unary)?];
    while *p.peek() == Tok::Pipe {
        p.bump();
        items.push(parse_and(p, unary)?);
    }
    if items.len() == 1 {
        Ok(items.pop().unwrap())
    } else {
        Ok(Formula::or_all(items))
    }
}

fn parse_and<M, F>(p: &mut Parser, unary: &F) -> Result<Formula<M>, ParseError>
where
    M: Modality,
    F: Fn(&mut Parser) -> Result<Formula<M>, ParseError>,
{
    let mut items = vec![unary(p)?];
    while *p.peek() == Tok::Amp {
        p.bump();
        items.push(unary(p)?);
    }
    if items.len() == 1 {
        Ok(items.pop().unwrap())
    } else {
        Ok(Formula::and_all(items))
    }
}

/// Shared prefix cases of `unary`; returns `None` when the token must be a
/// language-specific modality or atom.
fn shared_unary<M, F>(
    p: &mut Parser,
    unary: &F,
) -> Option<Result<Formula<M>, ParseError>>
where
    M: Modality,
    F: Fn(&mut Parser) -> Result<Formula<M>, ParseError>,
{
    match p.peek() {
        Tok::Tilde => {
            p.bump();
            Some(unary(p).map(Formula::not))
        }
        Tok::LParen => {
            p.bump();
            let f = match parse_iff(p, unary) {
                Ok(f) => f,
                Err(e) => return Some(Err(e)),
            };
            Some(p.expect(Tok::RParen, "')'").map(|()| f))
        }
        Tok::True => {
            p.bump();
            Some(Ok(Formula::top()))
        }
        Tok::False => {
            p.bump();
            Some(Ok(Formula::bot()))
        }
        _ => None,
    }
}

fn plain_atom<M: Modality>(p: &mut Parser) -> Result<Formula<M>, ParseError> {
    let (line, col) = p.here();
    match p.bump() {
        Tok::Ident(name) => {
            let atom =
                Atom::new(&name).map_err(|e| ParseError { line, col, message: e.to_string() })?;
            Ok(Formula::atom(atom))
        }
        other => Err(ParseError {
            line,
            col,
            message: format!("expected a formula, found {}", other.describe()),
        }),
    }
}

fn pecp_unary(p: &mut Parser) -> Result<PecpFormula, ParseError> {
    if let Some(r) = shared_unary(p, &pecp_unary) {
        return r;
    }
    match p.peek() {
        Tok::Less => {
            p.bump();
            let sig = p.atom_set()?;
            p.expect(Tok::Greater, "'>'")?;
            Ok(PecpFormula::dia(sig, pecp_unary(p)?))
        }
        Tok::LBracket => {
            p.bump();
            let sig = p.atom_set()?;
            p.expect(Tok::RBracket, "']'")?;
            Ok(PecpFormula::boxed(sig, pecp_unary(p)?))
        }
        _ => plain_atom(p),
    }
}

fn stit_unary(p: &mut Parser) -> Result<StitFormula, ParseError> {
    if let Some(r) = shared_unary(p, &stit_unary) {
        return r;
    }
    match p.peek() {
        Tok::LBracket => {
            p.bump();
            let coalition = p.agent_set()?;
            p.expect_stit_keyword()?;
            p.expect(Tok::RBracket, "']'")?;
            Ok(StitFormula::stit_box(coalition, stit_unary(p)?))
        }
        Tok::Less => {
            p.bump();
            let coalition = p.agent_set()?;
            p.expect_stit_keyword()?;
            p.expect(Tok::Greater, "'>'")?;
            Ok(StitFormula::stit_dia(coalition, stit_unary(p)?))
        }
        _ => plain_atom(p),
    }
}

fn clpc_unary(p: &mut Parser) -> Result<ClpcFormula, ParseError> {
    if let Some(r) = shared_unary(p, &clpc_unary) {
        return r;
    }
    match (p.peek(), p.peek_ahead(1)) {
        (Tok::Ident(kw), Tok::LBrace) if kw == "dia" => {
            p.bump();
            let coalition = p.agent_set()?;
            Ok(ClpcFormula::dia(coalition, clpc_unary(p)?))
        }
        (Tok::Ident(kw), Tok::LBrace) if kw == "box" => {
            p.bump();
            let coalition = p.agent_set()?;
            Ok(ClpcFormula::boxed(coalition, clpc_unary(p)?))
        }
        _ => plain_atom(p),
    }
}

fn s5_unary(p: &mut Parser) -> Result<S5Formula, ParseError> {
    if let Some(r) = shared_unary(p, &s5_unary) {
        return r;
    }
    match p.peek() {
        Tok::LBracket => {
            p.bump();
            p.expect(Tok::RBracket, "']'")?;
            Ok(S5Formula::s5_box(s5_unary(p)?))
        }
        Tok::Less => {
            p.bump();
            p.expect(Tok::Greater, "'>'")?;
            Ok(S5Formula::s5_dia(s5_unary(p)?))
        }
        _ => plain_atom(p),
    }
}

/// Parses a PECP formula such as `[{p,q}] (p -> <{}> q)`.
pub fn parse_pecp(src: &str) -> Result<PecpFormula, ParseError> {
    parse_with(src, &pecp_unary)
}

/// Parses a STIT formula such as `[{1,2}:stit] p & <{}:stit> q`.
pub fn parse_stit(src: &str) -> Result<StitFormula, ParseError> {
    parse_with(src, &stit_unary)
}

/// Parses a CL-PC formula such as `dia{1,2} (p & q)`.
pub fn parse_clpc(src: &str) -> Result<ClpcFormula, ParseError> {
    parse_with(src, &clpc_unary)
}

/// Parses an S5 formula such as `[] (p -> <> q)`.
pub fn parse_s5(src: &str) -> Result<S5Formula, ParseError> {
    parse_with(src, &s5_unary)
}
