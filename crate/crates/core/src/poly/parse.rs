//! Recursive-descent parser for polynomial expressions such as
//! `s^3*x - 3*s^2*x + 3*x + 9` or `9/(x^3 - 3*x^2 + 3)`.

use num_bigint::BigInt;
use num_traits::Zero;

use super::{MultiPoly, PolyError, RatFunc, UniPoly};
use crate::arith::Rat;

#[derive(Debug, Clone)]
enum Expr {
    Num(BigInt),
    Var(String, usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>, usize),
    Pow(Box<Expr>, u32),
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

fn err(pos: usize, msg: impl Into<String>) -> PolyError {
    PolyError::Parse {
        pos,
        msg: msg.into(),
    }
}

impl<'a> Parser<'a> {
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

    fn expr(&mut self) -> Result<Expr, PolyError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, PolyError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.peek() == Some(b'/') {
                let at = self.pos;
                self.pos += 1;
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?), at);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, PolyError> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, PolyError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(err(start, "expected non-negative integer exponent"));
            }
            let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            let e: u32 = text.parse().map_err(|_| err(start, "exponent too large"))?;
            return Ok(Expr::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, PolyError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(err(self.pos, "expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                Ok(Expr::Num(text.parse().unwrap()))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                Ok(Expr::Var(name.to_string(), start))
            }
            Some(c) => Err(err(self.pos, format!("unexpected `{}`", c as char))),
            None => Err(err(self.pos, "unexpected end of input")),
        }
    }
}

fn parse_expr(s: &str) -> Result<Expr, PolyError> {
    let mut p = Parser {
        src: s.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    if p.peek().is_some() {
        return Err(err(p.pos, "trailing input"));
    }
    Ok(e)
}

fn collect_vars(e: &Expr, out: &mut Vec<String>) {
    match e {
        Expr::Num(_) => {}
        Expr::Var(v, _) => {
            if !out.contains(v) {
                out.push(v.clone());
            }
        }
        Expr::Neg(a) | Expr::Pow(a, _) => collect_vars(a, out),
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b, _) => {
            collect_vars(a, out);
            collect_vars(b, out);
        }
    }
}

fn to_multi(e: &Expr, vars: &[String]) -> Result<MultiPoly, PolyError> {
    Ok(match e {
        Expr::Num(n) => MultiPoly::constant(vars, Rat::from_integer(n.clone())),
        Expr::Var(v, pos) => {
            if !vars.contains(v) {
                return Err(err(*pos, format!("unknown variable `{v}`")));
            }
            MultiPoly::var(vars, v)
        }
        Expr::Neg(a) => -&to_multi(a, vars)?,
        Expr::Add(a, b) => &to_multi(a, vars)? + &to_multi(b, vars)?,
        Expr::Sub(a, b) => &to_multi(a, vars)? - &to_multi(b, vars)?,
        Expr::Mul(a, b) => &to_multi(a, vars)? * &to_multi(b, vars)?,
        Expr::Pow(a, k) => to_multi(a, vars)?.pow(*k),
        Expr::Div(a, b, pos) => {
            let d = to_multi(b, vars)?;
            if !d.is_constant() {
                return Err(err(*pos, "division by a non-constant polynomial"));
            }
            let c = d.constant_term();
            if c.is_zero() {
                return Err(err(*pos, "division by zero"));
            }
            to_multi(a, vars)?.scale(&(Rat::from_integer(1.into()) / c))
        }
    })
}

fn to_ratfunc(e: &Expr, var: &str) -> Result<RatFunc, PolyError> {
    Ok(match e {
        Expr::Num(n) => RatFunc::constant(var, Rat::from_integer(n.clone())),
        Expr::Var(v, pos) => {
            if v != var {
                return Err(err(*pos, format!("unknown variable `{v}`")));
            }
            RatFunc::var_of(var)
        }
        Expr::Neg(a) => -&to_ratfunc(a, var)?,
        Expr::Add(a, b) => &to_ratfunc(a, var)? + &to_ratfunc(b, var)?,
        Expr::Sub(a, b) => &to_ratfunc(a, var)? - &to_ratfunc(b, var)?,
        Expr::Mul(a, b) => &to_ratfunc(a, var)? * &to_ratfunc(b, var)?,
        Expr::Pow(a, k) => to_ratfunc(a, var)?.pow(*k as i32)?,
        Expr::Div(a, b, pos) => to_ratfunc(a, var)?
            .div(&to_ratfunc(b, var)?)
            .map_err(|_| err(*pos, "division by zero"))?,
    })
}

/// Parses a polynomial over the declared variables; other identifiers are errors.
pub fn parse_multi(s: &str, vars: &[impl AsRef<str>]) -> Result<MultiPoly, PolyError> {
    let vars: Vec<String> = vars.iter().map(|v| v.as_ref().to_string()).collect();
    to_multi(&parse_expr(s)?, &vars)
}

/// Parses a polynomial, declaring variables in order of first appearance.
pub fn parse_multi_infer(s: &str) -> Result<MultiPoly, PolyError> {
    let e = parse_expr(s)?;
    let mut vars = Vec::new();
    collect_vars(&e, &mut vars);
    to_multi(&e, &vars)
}

pub fn parse_ratfunc(s: &str, var: &str) -> Result<RatFunc, PolyError> {
    to_ratfunc(&parse_expr(s)?, var)
}

pub fn parse_uni(s: &str, var: &str) -> Result<UniPoly, PolyError> {
    let f = parse_ratfunc(s, var)?;
    if !f.is_polynomial() {
        return Err(err(0, "not a polynomial"));
    }
    Ok(f.num().scale(&(Rat::from_integer(1.into()) / f.den().lead())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for s in [
            "s^3*x - 3*s^2*x + 3*x + 9",
            "x^3 - 3*x^2 + 3",
            "-1/3*x*y + 2",
            "0",
        ] {
            let f = parse_multi_infer(s).unwrap();
            assert_eq!(f.to_string(), s);
            assert_eq!(parse_multi(&f.to_string(), f.vars()).unwrap(), f);
        }
        let phi = parse_uni("x^3-3*x^2+3", "x").unwrap();
        assert_eq!(phi.to_string(), "x^3 - 3*x^2 + 3");
    }

    #[test]
    fn ratfunc_parse() {
        let f = parse_ratfunc("9*x/(x^3 - 3*x^2 + 3)", "x").unwrap();
        assert_eq!(f.to_string(), "(9*x)/(x^3 - 3*x^2 + 3)");
        assert!(parse_ratfunc("1/(x-x)", "x").is_err());
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(
            parse_multi("x + * y", &["x", "y"]),
            Err(PolyError::Parse {
                pos: 4,
                msg: "unexpected `*`".into()
            })
        );
        assert!(matches!(parse_multi("x + z", &["x"]), Err(PolyError::Parse { pos: 4, .. })));
        assert!(matches!(parse_multi("(x", &["x"]), Err(PolyError::Parse { pos: 2, .. })));
        assert!(matches!(parse_multi("x^", &["x"]), Err(PolyError::Parse { pos: 2, .. })));
        assert!(matches!(parse_multi("x/y", &["x", "y"]), Err(PolyError::Parse { pos: 1, .. })));
        assert!(parse_uni("1/x", "x").is_err());
    }
}
