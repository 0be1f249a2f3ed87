//! Recursive-descent parser.
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := unary (("*" | "/") unary)*
//! unary  := "-" unary | factor
//! factor := base ("^" exponent)?
//! base   := number | ident | ident "(" expr ")" | "(" expr ")"
//! exponent := ["+"|"-"] number | "(" ["+"|"-"] number ")"
//! ```
//!
//! Unary minus binds looser than `^`, so `-x^2` is `-(x^2)`.

use std::sync::Arc;

use thiserror::Error;

use super::{BinOp, Expr, Func, Scope};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown identifier `{name}` at byte {pos}")]
    UnknownIdentifier { name: String, pos: usize },
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
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
            let (t, p) = lx.next()?;
            let end = t == Tok::End;
            out.push((t, p));
            if end {
                return Ok(out);
            }
        }
    }

    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && (bytes[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = bytes.get(self.pos) else {
            return Ok((Tok::End, start));
        };
        let c = c as char;
        if c.is_ascii_digit() || c == '.' {
            let mut end = self.pos;
            while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
                end += 1;
            }
            if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
                let mut e = end + 1;
                if e < bytes.len() && (bytes[e] == b'+' || bytes[e] == b'-') {
                    e += 1;
                }
                if e < bytes.len() && bytes[e].is_ascii_digit() {
                    while e < bytes.len() && bytes[e].is_ascii_digit() {
                        e += 1;
                    }
                    end = e;
                }
            }
            let text = &self.src[start..end];
            let v: f64 = text.parse().map_err(|_| ParseError::Syntax {
                pos: start,
                message: format!("malformed number `{text}`"),
            })?;
            self.pos = end;
            return Ok((Tok::Num(v), start));
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut end = self.pos;
            while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
                end += 1;
            }
            self.pos = end;
            return Ok((Tok::Ident(self.src[start..end].to_string()), start));
        }
        if "+-*/^()".contains(c) {
            self.pos += 1;
            return Ok((Tok::Sym(c), start));
        }
        Err(ParseError::Syntax {
            pos: start,
            message: format!("unexpected character `{c}`"),
        })
    }
}

struct Parser<'s> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    scope: &'s Scope,
}

/// Parses `text` against `scope`.
pub fn parse_expr(text: &str, scope: &Scope) -> Result<Expr, ParseError> {
    let toks = Lexer::tokens(text)?;
    let mut p = Parser { toks, at: 0, scope };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        t => Err(p.syntax(format!("unexpected trailing {}", describe(t)))),
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Sym(c) => format!("`{c}`"),
        Tok::End => "end of input".to_string(),
    }
}

impl<'s> Parser<'s> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if t != Tok::End {
            self.at += 1;
        }
        t
    }

    fn syntax(&self, message: String) -> ParseError {
        ParseError::Syntax {
            pos: self.pos(),
            message,
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.syntax(format!("expected `{c}`, found {}", describe(self.peek()))))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if self.eat('^') {
            let exponent = self.exponent()?;
            return Ok(Expr::Pow {
                base: Box::new(base),
                exponent,
            });
        }
        Ok(base)
    }

    fn signed_number(&mut self) -> Result<f64, ParseError> {
        let sign = if self.eat('-') {
            -1.0
        } else {
            self.eat('+');
            1.0
        };
        match self.bump() {
            Tok::Num(v) => Ok(sign * v),
            t => {
                self.at -= usize::from(t != Tok::End);
                Err(self.syntax(format!("exponent must be a number, found {}", describe(&t))))
            }
        }
    }

    fn exponent(&mut self) -> Result<f64, ParseError> {
        if self.eat('(') {
            let v = self.signed_number()?;
            self.expect(')')?;
            Ok(v)
        } else {
            self.signed_number()
        }
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => self.identifier(name, pos),
            t => {
                self.at -= usize::from(t != Tok::End);
                Err(self.syntax(format!("expected an operand, found {}", describe(&t))))
            }
        }
    }

    fn identifier(&mut self, name: String, pos: usize) -> Result<Expr, ParseError> {
        let scope = self.scope;
        let unknown = || ParseError::UnknownIdentifier {
            name: name.clone(),
            pos,
        };
        if *self.peek() == Tok::Sym('(') {
            self.bump();
            let arg = self.expr()?;
            self.expect(')')?;
            if let Some(func) = Func::from_name(&name) {
                return Ok(Expr::Func {
                    func,
                    arg: Box::new(arg),
                });
            }
            if let Some(body) = scope.functions.get(&name) {
                return Ok(Expr::Call {
                    name: Arc::from(name.as_str()),
                    body: body.clone(),
                    arg: Box::new(arg),
                });
            }
            return Err(unknown());
        }
        if let Some(index) = scope.variable_index(&name) {
            return Ok(Expr::Var {
                index,
                name: Arc::from(name.as_str()),
            });
        }
        if let Some(&value) = scope.parameters.get(&name) {
            return Ok(Expr::Param {
                name: Arc::from(name.as_str()),
                value,
            });
        }
        if let Some(body) = scope.functions.get(&name) {
            // bare time function: implicit application to the time variable
            let t = scope.time_variable.as_deref().ok_or_else(unknown)?;
            let index = scope.variable_index(t).ok_or_else(unknown)?;
            return Ok(Expr::Call {
                name: Arc::from(name.as_str()),
                body: body.clone(),
                arg: Box::new(Expr::var(index, t)),
            });
        }
        Err(unknown())
    }
}
