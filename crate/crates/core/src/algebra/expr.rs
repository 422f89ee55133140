//! Tokenizer and parser for textual field elements such as `2 * (t)^1 * (t+4)^-1` or
//! `(t+1) + 2*y`. Backends evaluate the resulting tree in their own arithmetic.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Int(i64),
    Var(char),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(i64),
    Var(char),
    Op(char),
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let cs: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let mut n: i64 = 0;
            while i < cs.len() && cs[i].is_ascii_digit() {
                n = n
                    .checked_mul(10)
                    .and_then(|n| n.checked_add(cs[i] as i64 - '0' as i64))
                    .ok_or_else(|| Error::Parse(format!("integer too large in {s:?}")))?;
                i += 1;
            }
            out.push(Tok::Int(n));
        } else if matches!(c, 't' | 'y' | 'a' | 'x') {
            out.push(Tok::Var(if c == 'x' { 't' } else { c }));
            i += 1;
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character {c:?} in {s:?}")));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }
    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }
    fn err(&self, what: &str) -> Error {
        Error::Parse(format!("{what} at token {}", self.pos))
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut e = if self.eat('-') { Expr::Neg(Box::new(self.product()?)) } else { self.product()? };
        loop {
            if self.eat('+') {
                e = Expr::Add(Box::new(e), Box::new(self.product()?));
            } else if self.eat('-') {
                e = Expr::Sub(Box::new(e), Box::new(self.product()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn product(&mut self) -> Result<Expr> {
        let mut e = self.power()?;
        loop {
            if self.eat('*') {
                e = Expr::Mul(Box::new(e), Box::new(self.power()?));
            } else if self.eat('/') {
                e = Expr::Div(Box::new(e), Box::new(self.power()?));
            } else if matches!(self.peek(), Some(Tok::Var(_)) | Some(Tok::Op('('))) {
                // implicit multiplication, e.g. `2t` or `3(t+1)`
                e = Expr::Mul(Box::new(e), Box::new(self.power()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn exponent(&mut self) -> Result<i64> {
        let paren = self.eat('(');
        let neg = self.eat('-');
        let n = match self.peek() {
            Some(Tok::Int(n)) => *n,
            _ => return Err(self.err("expected integer exponent")),
        };
        self.pos += 1;
        if paren && !self.eat(')') {
            return Err(self.err("expected ')'"));
        }
        Ok(if neg { -n } else { n })
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat('^') {
            let e = self.exponent()?;
            Ok(Expr::Pow(Box::new(base), e))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(Expr::Int(n))
            }
            Some(Tok::Var(v)) => {
                self.pos += 1;
                Ok(Expr::Var(v))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.sum()?;
                if !self.eat(')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(e)
            }
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.power()?)))
            }
            _ => Err(self.err("expected operand")),
        }
    }
}

pub fn parse(s: &str) -> Result<Expr> {
    let toks = tokenize(s)?;
    if toks.is_empty() {
        return Err(Error::Parse("empty expression".into()));
    }
    let mut p = Parser { toks, pos: 0 };
    let e = p.sum()?;
    if p.pos != p.toks.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

/// Arithmetic needed to evaluate an [`Expr`].
pub trait Eval {
    type Val: Clone;
    fn int(&self, n: i64) -> Result<Self::Val>;
    fn var(&self, v: char) -> Result<Self::Val>;
    fn add(&self, a: Self::Val, b: Self::Val) -> Result<Self::Val>;
    fn neg(&self, a: Self::Val) -> Result<Self::Val>;
    fn mul(&self, a: Self::Val, b: Self::Val) -> Result<Self::Val>;
    fn inv(&self, a: Self::Val) -> Result<Self::Val>;
}

pub fn eval<C: Eval>(e: &Expr, ctx: &C) -> Result<C::Val> {
    Ok(match e {
        Expr::Int(n) => ctx.int(*n)?,
        Expr::Var(v) => ctx.var(*v)?,
        Expr::Add(a, b) => ctx.add(eval(a, ctx)?, eval(b, ctx)?)?,
        Expr::Sub(a, b) => {
            let nb = ctx.neg(eval(b, ctx)?)?;
            ctx.add(eval(a, ctx)?, nb)?
        }
        Expr::Neg(a) => ctx.neg(eval(a, ctx)?)?,
        Expr::Mul(a, b) => ctx.mul(eval(a, ctx)?, eval(b, ctx)?)?,
        Expr::Div(a, b) => {
            let ib = ctx.inv(eval(b, ctx)?)?;
            ctx.mul(eval(a, ctx)?, ib)?
        }
        Expr::Pow(a, n) => {
            let mut base = eval(a, ctx)?;
            if *n < 0 {
                base = ctx.inv(base)?;
            }
            let mut acc = ctx.int(1)?;
            let mut k = n.unsigned_abs();
            while k > 0 {
                if k & 1 == 1 {
                    acc = ctx.mul(acc, base.clone())?;
                }
                k >>= 1;
                if k > 0 {
                    base = ctx.mul(base.clone(), base)?;
                }
            }
            acc
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_factored_form() {
        let e = parse("2 * (t)^1 * (t+4)^-1").unwrap();
        assert!(matches!(e, Expr::Mul(_, _)));
        assert!(parse("t^(-2) + 3y").is_ok());
        assert!(parse("(a+1)*t").is_ok());
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse("").is_err());
        assert!(parse("t +").is_err());
        assert!(parse("t ^ y").is_err());
        assert!(parse("z").is_err());
        assert!(parse("(t").is_err());
    }
}
