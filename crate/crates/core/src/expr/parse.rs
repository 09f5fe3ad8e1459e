//! Lexer and precedence-climbing parser for the expression language.
//!
//! ```text
//! expr    := expr ('+' | '-') expr        left, weakest
//!          | expr ('*' | '/') expr        left
//!          | expr '^' expr                right
//!          | '-' expr                     prefix, binds tighter than '^'
//!          | number | identifier | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! There is no implicit multiplication: `2r` is a syntax error.

use super::{BinOp, Node, ParseError};
use crate::jets::Univariate;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let t = lx.next()?;
            let done = t.0 == Tok::End;
            out.push(t);
            if done {
                return Ok(out);
            }
        }
    }

    fn peek_byte(&self, at: usize) -> Option<u8> {
        self.src.as_bytes().get(at).copied()
    }

    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        while let Some(b) = self.peek_byte(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
        let start = self.pos;
        let Some(b) = self.peek_byte(start) else {
            return Ok((Tok::End, start));
        };
        match b {
            b'0'..=b'9' | b'.' => self.number(start),
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let mut end = start;
                while let Some(c) = self.peek_byte(end) {
                    if c.is_ascii_alphanumeric() || c == b'_' {
                        end += 1;
                    } else {
                        break;
                    }
                }
                self.pos = end;
                Ok((Tok::Ident(self.src[start..end].to_string()), start))
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                self.pos += 1;
                Ok((Tok::Op(b as char), start))
            }
            b'(' => {
                self.pos += 1;
                Ok((Tok::LParen, start))
            }
            b')' => {
                self.pos += 1;
                Ok((Tok::RParen, start))
            }
            _ => {
                let ch = self.src[start..].chars().next().unwrap_or('?');
                Err(ParseError::Syntax { offset: start, message: format!("unexpected character `{ch}`") })
            }
        }
    }

    fn number(&mut self, start: usize) -> Result<(Tok, usize), ParseError> {
        let mut end = start;
        let digits = |lx: &Self, mut at: usize| {
            while matches!(lx.peek_byte(at), Some(b'0'..=b'9')) {
                at += 1;
            }
            at
        };
        end = digits(self, end);
        if self.peek_byte(end) == Some(b'.') {
            end = digits(self, end + 1);
        }
        if matches!(self.peek_byte(end), Some(b'e' | b'E')) {
            let mut exp = end + 1;
            if matches!(self.peek_byte(exp), Some(b'+' | b'-')) {
                exp += 1;
            }
            if matches!(self.peek_byte(exp), Some(b'0'..=b'9')) {
                end = digits(self, exp);
            }
        }
        let text = &self.src[start..end];
        let value: f64 = text
            .parse()
            .map_err(|_| ParseError::Syntax { offset: start, message: format!("malformed number `{text}`") })?;
        self.pos = end;
        Ok((Tok::Num(value), start))
    }
}

const ADD_BP: (u8, u8) = (10, 11);
const MUL_BP: (u8, u8) = (20, 21);
const POW_BP: (u8, u8) = (31, 30);
const NEG_BP: u8 = 40;

pub(super) struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    coords: &'a [String],
    consts: &'a [String],
}

impl<'a> Parser<'a> {
    pub(super) fn parse(text: &str, coords: &'a [String], consts: &'a [String]) -> Result<Node, ParseError> {
        let toks = Lexer::tokens(text)?;
        if toks[0].0 == Tok::End {
            return Err(ParseError::Syntax { offset: 0, message: "empty expression".into() });
        }
        let mut p = Parser { toks, at: 0, coords, consts };
        let node = p.expr(0)?;
        match p.peek() {
            (Tok::End, _) => Ok(node),
            (Tok::RParen, off) => Err(ParseError::Syntax { offset: off, message: "unbalanced `)`".into() }),
            (_, off) => Err(ParseError::Syntax { offset: off, message: "expected an operator".into() }),
        }
    }

    fn peek(&self) -> (Tok, usize) {
        self.toks[self.at].clone()
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.at].clone();
        if t.0 != Tok::End {
            self.at += 1;
        }
        t
    }

    fn expr(&mut self, min_bp: u8) -> Result<Node, ParseError> {
        let mut lhs = self.prefix()?;
        loop {
            let (op, (lbp, rbp)) = match self.peek().0 {
                Tok::Op('+') => (BinOp::Add, ADD_BP),
                Tok::Op('-') => (BinOp::Sub, ADD_BP),
                Tok::Op('*') => (BinOp::Mul, MUL_BP),
                Tok::Op('/') => (BinOp::Div, MUL_BP),
                Tok::Op('^') => (BinOp::Pow, POW_BP),
                _ => return Ok(lhs),
            };
            if lbp < min_bp {
                return Ok(lhs);
            }
            self.bump();
            let rhs = self.expr(rbp)?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn prefix(&mut self) -> Result<Node, ParseError> {
        let (tok, off) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Node::Num(v)),
            Tok::Op('-') => Ok(Node::Neg(Box::new(self.expr(NEG_BP)?))),
            Tok::LParen => {
                let inner = self.expr(0)?;
                match self.bump() {
                    (Tok::RParen, _) => Ok(inner),
                    (_, at) => Err(ParseError::Syntax { offset: at, message: "expected `)`".into() }),
                }
            }
            Tok::Ident(name) => self.identifier(name, off),
            Tok::End => Err(ParseError::Syntax { offset: off, message: "unexpected end of input".into() }),
            Tok::RParen => Err(ParseError::Syntax { offset: off, message: "unexpected `)`".into() }),
            Tok::Op(c) => Err(ParseError::Syntax { offset: off, message: format!("unexpected operator `{c}`") }),
        }
    }

    fn identifier(&mut self, name: String, off: usize) -> Result<Node, ParseError> {
        let coord = self.coords.iter().position(|c| *c == name);
        let constant = self.consts.iter().position(|c| *c == name);
        match (coord, constant) {
            (Some(_), Some(_)) => return Err(ParseError::Ambiguous { name }),
            (Some(i), None) => return Ok(Node::Coord(i)),
            (None, Some(i)) => return Ok(Node::Const(i)),
            (None, None) => {}
        }
        if let Some(func) = Univariate::from_name(&name) {
            return match self.bump() {
                (Tok::LParen, _) => {
                    let arg = self.expr(0)?;
                    match self.bump() {
                        (Tok::RParen, _) => Ok(Node::Call(func, Box::new(arg))),
                        (_, at) => Err(ParseError::Syntax { offset: at, message: "expected `)`".into() }),
                    }
                }
                (_, at) => Err(ParseError::Syntax {
                    offset: at,
                    message: format!("function `{name}` must be followed by `(`"),
                }),
            };
        }
        if name == "pi" {
            return Ok(Node::Num(std::f64::consts::PI));
        }
        Err(ParseError::UnknownIdentifier { name, offset: off })
    }
}
