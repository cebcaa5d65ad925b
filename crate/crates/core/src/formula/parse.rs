//! Recursive-descent parser for the formula syntax.
//!
//! ```text
//! or    := xor ( '|' xor )*
//! xor   := and ( '^' and )*        left-associative, binary
//! and   := unary ( '&' unary )*
//! unary := '!' unary | atom
//! atom  := 'x' <positive integer> | '0' | '1' | '(' or ')'
//! ```

use super::Expr;
use crate::error::{Error, Result};

pub fn parse(text: &str) -> Result<Expr> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let e = p.or()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error(format!("unexpected {:?}", p.src[p.pos] as char)));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::Syntax {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn or(&mut self) -> Result<Expr> {
        let mut ops = vec![self.xor()?];
        while self.eat(b'|') {
            ops.push(self.xor()?);
        }
        Ok(Expr::or(ops))
    }

    fn xor(&mut self) -> Result<Expr> {
        let mut acc = self.and()?;
        while self.eat(b'^') {
            acc = Expr::xor(acc, self.and()?);
        }
        Ok(acc)
    }

    fn and(&mut self) -> Result<Expr> {
        let mut ops = vec![self.unary()?];
        while self.eat(b'&') {
            ops.push(self.unary()?);
        }
        Ok(Expr::and(ops))
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'!') {
            Ok(Expr::not(self.unary()?))
        } else {
            self.atom()
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.or()?;
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(e)
            }
            Some(c @ (b'0' | b'1')) => {
                self.pos += 1;
                if self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
                    return Err(self.error("constants are the single digits 0 and 1"));
                }
                Ok(Expr::Const(c == b'1'))
            }
            Some(b'x') => {
                let start = self.pos;
                self.pos += 1;
                let digits_start = self.pos;
                while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
                    self.pos += 1;
                }
                if digits_start == self.pos {
                    self.pos = digits_start;
                    return Err(self.error("expected a variable index after 'x'"));
                }
                let digits = std::str::from_utf8(&self.src[digits_start..self.pos]).unwrap();
                let index: u32 = digits.parse().map_err(|_| Error::Syntax {
                    offset: start,
                    message: format!("variable index {digits} is too large"),
                })?;
                if index == 0 {
                    return Err(Error::Syntax {
                        offset: start,
                        message: "variable indices start at 1".into(),
                    });
                }
                Ok(Expr::Var(index))
            }
            Some(c) => Err(self.error(format!("unexpected {:?}", c as char))),
        }
    }
}
