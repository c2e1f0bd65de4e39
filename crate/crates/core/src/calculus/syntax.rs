//! Plain-text syntax for differential polynomials.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary ('*' unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' integer)?
//! atom    := rational | 'u_' integer | '(' expr ')'
//! rational:= integer ('/' integer)?
//! ```
//!
//! `u_k` is the k-th x-derivative of `u`. The printer ([`DiffPoly`]'s
//! `Display`) emits canonical text that parses back to the same value.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};

use super::poly::DiffPoly;

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            position: self.pos,
            message: message.into(),
        })
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

    fn digits(&mut self) -> Result<&'a str> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.error("expected digits");
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits"))
    }

    fn small_int(&mut self, what: &str) -> Result<u32> {
        let d = self.digits()?;
        match d.parse() {
            Ok(v) => Ok(v),
            Err(_) => self.error(format!("{what} {d} out of range")),
        }
    }

    fn expr(&mut self) -> Result<DiffPoly> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = &acc + &self.term()?;
            } else if self.eat(b'-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<DiffPoly> {
        let mut acc = self.unary()?;
        while self.eat(b'*') {
            acc = &acc * &self.unary()?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<DiffPoly> {
        if self.eat(b'-') {
            Ok(-&self.unary()?)
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<DiffPoly> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let e = self.small_int("exponent")?;
            Ok(base.pow(e))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<DiffPoly> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return self.error("expected ')'");
                }
                Ok(inner)
            }
            Some(b'u') => {
                self.pos += 1;
                if self.src.get(self.pos) != Some(&b'_') {
                    return self.error("expected '_' after 'u'");
                }
                self.pos += 1;
                if !self.src.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
                    return self.error("expected derivative order after 'u_'");
                }
                let k = self.small_int("derivative order")?;
                Ok(DiffPoly::var(k))
            }
            Some(c) if c.is_ascii_digit() => {
                let num: BigInt = self.digits()?.parse().expect("digits");
                let den: BigInt = if self.eat(b'/') {
                    self.digits()?.parse().expect("digits")
                } else {
                    BigInt::from(1)
                };
                if den.is_zero() {
                    return self.error("zero denominator");
                }
                Ok(DiffPoly::constant(BigRational::new(num, den)))
            }
            Some(c) => self.error(format!("unexpected character {:?}", c as char)),
            None => self.error("unexpected end of input"),
        }
    }
}

pub fn parse(text: &str) -> Result<DiffPoly> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let out = p.expr()?;
    if p.peek().is_some() {
        return p.error("trailing input");
    }
    Ok(out)
}
