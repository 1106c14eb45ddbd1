//! Expression grammar shared by linear combinations, polynomials and elements.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary ('*' unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' INT)?
//! atom   := NUMBER | NAME | '(' expr ')'
//! NUMBER := DIGITS ('/' DIGITS)?
//! NAME   := [A-Za-z_][A-Za-z0-9_]*
//! ```
//!
//! There is no implicit multiplication and no division operator; `p/q` is a
//! single rational literal.

use std::fmt;

use equivar_core::Rat;
use num::{BigInt, One, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExprError {
    /// Zero-based character offset into the expression text.
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Num(Rat),
    Name(String, usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>, usize),
    Pow(Box<Expr>, u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Num(Rat),
    Name(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |offset, message: String| ExprError { offset, message };
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        match c {
            ' ' | '\t' => {
                i += 1;
                continue;
            }
            '+' => out.push((Tok::Plus, start)),
            '-' => out.push((Tok::Minus, start)),
            '*' => out.push((Tok::Star, start)),
            '^' => out.push((Tok::Caret, start)),
            '(' => out.push((Tok::LParen, start)),
            ')' => out.push((Tok::RParen, start)),
            '0'..='9' => {
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let numer: String = chars[start..i].iter().collect();
                let mut value = Rat::from_integer(numer.parse::<BigInt>().expect("digits"));
                if i < chars.len() && chars[i] == '/' {
                    let ds = i + 1;
                    let mut j = ds;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    if j == ds {
                        return Err(err(i, "expected digits after '/' in a rational literal".into()));
                    }
                    let denom: BigInt = chars[ds..j].iter().collect::<String>().parse().expect("digits");
                    if denom.is_zero() {
                        return Err(err(start, format!("zero denominator in `{}`", chars[start..j].iter().collect::<String>())));
                    }
                    value = Rat::new(value.to_integer(), denom);
                    i = j;
                }
                if i < chars.len() && (chars[i].is_ascii_alphabetic() || chars[i] == '_' || chars[i] == '.') {
                    return Err(err(i, format!("unexpected `{}` after a number", chars[i])));
                }
                out.push((Tok::Num(value), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((Tok::Name(chars[start..i].iter().collect()), start));
                continue;
            }
            other => return Err(err(start, format!("unexpected character `{other}`"))),
        }
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |&(_, o)| o)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError { offset: self.offset(), message: message.into() })
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Star) = self.peek() {
            let at = self.offset();
            self.pos += 1;
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?), at);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            let Some(Tok::Num(n)) = self.peek().cloned() else {
                return self.error("expected a nonnegative integer exponent");
            };
            let e = n
                .is_integer()
                .then(|| u32::try_from(n.to_integer()).ok())
                .flatten()
                .filter(|&e| e <= 64);
            let Some(e) = e else {
                return self.error("exponent must be an integer between 0 and 64");
            };
            self.pos += 1;
            return Ok(Expr::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let at = self.offset();
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Expr::Num(n))
            }
            Some(Tok::Name(s)) => {
                self.pos += 1;
                if let Some(Tok::Name(_) | Tok::Num(_) | Tok::LParen) = self.peek() {
                    return self.error("expected an operator (multiplication must be written with `*`)");
                }
                Ok(Expr::Name(s, at))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.error("expected `)`");
                }
                self.pos += 1;
                Ok(e)
            }
            Some(_) => self.error("expected a number, a name or `(`"),
            None => self.error("unexpected end of expression"),
        }
    }
}

pub fn parse_expr(text: &str) -> Result<Expr, ExprError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, end: text.chars().count() };
    if p.peek().is_none() {
        return p.error("empty expression");
    }
    let e = p.expr()?;
    if p.peek().is_some() {
        return p.error("unexpected token");
    }
    Ok(e)
}

/// Semantics for [`eval`]; errors are plain messages positioned by the caller.
pub trait Interp {
    type V: Clone;
    fn number(&self, c: &Rat) -> Result<Self::V, String>;
    fn name(&self, name: &str) -> Result<Self::V, String>;
    fn add(&self, a: &Self::V, b: &Self::V) -> Result<Self::V, String>;
    fn neg(&self, a: &Self::V) -> Self::V;
    fn mul(&self, a: &Self::V, b: &Self::V) -> Result<Self::V, String>;
}

pub fn eval<I: Interp>(e: &Expr, it: &I) -> Result<I::V, ExprError> {
    let at0 = |message: String| ExprError { offset: 0, message };
    match e {
        Expr::Num(c) => it.number(c).map_err(at0),
        Expr::Name(n, at) => it.name(n).map_err(|message| ExprError { offset: *at, message }),
        Expr::Neg(a) => Ok(it.neg(&eval(a, it)?)),
        Expr::Add(a, b) => it.add(&eval(a, it)?, &eval(b, it)?).map_err(at0),
        Expr::Sub(a, b) => it.add(&eval(a, it)?, &it.neg(&eval(b, it)?)).map_err(at0),
        Expr::Mul(a, b, at) => it
            .mul(&eval(a, it)?, &eval(b, it)?)
            .map_err(|message| ExprError { offset: *at, message }),
        Expr::Pow(a, n) => {
            let base = eval(a, it)?;
            let mut acc = it.number(&Rat::one()).map_err(at0)?;
            for _ in 0..*n {
                acc = it.mul(&acc, &base).map_err(at0)?;
            }
            Ok(acc)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Q;
    impl Interp for Q {
        type V = Rat;
        fn number(&self, c: &Rat) -> Result<Rat, String> {
            Ok(c.clone())
        }
        fn name(&self, n: &str) -> Result<Rat, String> {
            match n {
                "x" => Ok(Rat::from_integer(3.into())),
                _ => Err(format!("unknown `{n}`")),
            }
        }
        fn add(&self, a: &Rat, b: &Rat) -> Result<Rat, String> {
            Ok(a + b)
        }
        fn neg(&self, a: &Rat) -> Rat {
            -a
        }
        fn mul(&self, a: &Rat, b: &Rat) -> Result<Rat, String> {
            Ok(a * b)
        }
    }

    fn val(s: &str) -> Result<String, ExprError> {
        Ok(eval(&parse_expr(s)?, &Q)?.to_string())
    }

    #[test]
    fn precedence_and_literals() {
        assert_eq!(val("1 + 2*3").unwrap(), "7");
        assert_eq!(val("-x^2").unwrap(), "-9");
        assert_eq!(val("(1 - 1/2)*x").unwrap(), "3/2");
        assert_eq!(val("2^0").unwrap(), "1");
        assert_eq!(val("4/6").unwrap(), "2/3");
    }

    #[test]
    fn errors_are_positioned() {
        assert_eq!(val("1/0").unwrap_err().offset, 0);
        assert!(val("1/0").unwrap_err().message.contains("zero denominator"));
        assert_eq!(val("2 x").unwrap_err().offset, 2);
        assert_eq!(val("x y").unwrap_err().offset, 2);
        assert_eq!(val("1 + y").unwrap_err().offset, 4);
        assert!(val("x/2").is_err());
        assert!(val("1.5").is_err());
        assert!(val("(1").is_err());
        assert!(val("").is_err());
        assert!(val("x^-1").is_err());
    }
}
