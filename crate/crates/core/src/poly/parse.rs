//! Text grammar for polynomials.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := ('+' | '-') unary | power
//! power := atom ('^' integer)?
//! atom  := number | variable | 'i' | '(' expr ')'
//! ```
//!
//! Numbers are integers or decimals and are read exactly; `/` only accepts a
//! nonzero constant divisor, which covers rational coefficients such as
//! `3/2*x0`. `i` is the imaginary unit.

use num_traits::One;

use super::coeff::{parse_decimal, Coefficient, QComplex};
use super::homogeneous::HomogeneousPoly;
use super::sparse::Poly;
use crate::error::PolyError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Op(char),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, PolyError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            out.push((start, Tok::Num(chars[start..i].iter().collect())));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((start, Tok::Ident(chars[start..i].iter().collect())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(PolyError::Syntax { position: i, message: format!("unexpected character '{c}'") });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    nvars: usize,
    resolve: &'a dyn Fn(&str) -> Option<usize>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, PolyError> {
        Err(PolyError::Syntax { position: self.here(), message: message.into() })
    }

    fn expr(&mut self) -> Result<Poly<QComplex>, PolyError> {
        let mut acc = self.term()?;
        while let Some(Tok::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if op == '+' { &acc + &rhs } else { &acc - &rhs };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Poly<QComplex>, PolyError> {
        let mut acc = self.unary()?;
        while let Some(Tok::Op(op @ ('*' | '/'))) = self.peek().cloned() {
            let at = self.here();
            self.pos += 1;
            let rhs = self.unary()?;
            if op == '*' {
                acc = &acc * &rhs;
            } else {
                if !rhs.is_constant() || rhs.is_zero() {
                    return Err(PolyError::Syntax {
                        position: at,
                        message: "division is only allowed by a nonzero constant".into(),
                    });
                }
                let c = rhs.coeff(&super::sparse::Monomial::one(self.nvars));
                acc = acc.scale(&(<QComplex as One>::one() / c));
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Poly<QComplex>, PolyError> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(-&self.unary()?)
            }
            Some(Tok::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Poly<QComplex>, PolyError> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            match self.peek().cloned() {
                Some(Tok::Num(s)) if s.chars().all(|c| c.is_ascii_digit()) => {
                    let e: u32 = match s.parse() {
                        Ok(e) if e <= 4096 => e,
                        _ => return self.err("exponent too large"),
                    };
                    self.pos += 1;
                    Ok(base.pow(e))
                }
                _ => self.err("expected a nonnegative integer exponent"),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Poly<QComplex>, PolyError> {
        match self.peek().cloned() {
            Some(Tok::Num(s)) => match parse_decimal(&s) {
                Some(q) => {
                    self.pos += 1;
                    Ok(Poly::constant(self.nvars, QComplex::from_rational(&q)))
                }
                None => self.err(format!("malformed number '{s}'")),
            },
            Some(Tok::Ident(name)) => {
                if name == "i" {
                    self.pos += 1;
                    return Ok(Poly::constant(self.nvars, QComplex::imaginary_unit()));
                }
                match (self.resolve)(&name) {
                    Some(v) if v < self.nvars => {
                        self.pos += 1;
                        Ok(Poly::var(self.nvars, v))
                    }
                    _ => self.err(format!("unknown variable '{name}'")),
                }
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let inner = self.expr()?;
                match self.peek() {
                    Some(Tok::Op(')')) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => self.err("expected ')'"),
                }
            }
            Some(t) => self.err(format!("unexpected token {t:?}")),
            None => self.err("unexpected end of input"),
        }
    }
}

/// Parse with a custom variable resolver.
pub fn parse_with(
    text: &str,
    nvars: usize,
    resolve: &dyn Fn(&str) -> Option<usize>,
) -> Result<Poly<QComplex>, PolyError> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Err(PolyError::Syntax { position: 0, message: "empty expression".into() });
    }
    let mut p = Parser { toks, pos: 0, end: text.chars().count(), nvars, resolve };
    let out = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(out)
}

fn standard_var(name: &str) -> Option<usize> {
    name.strip_prefix('x')?.parse().ok()
}

/// Parse an arbitrary (not necessarily homogeneous) polynomial in x0..x{n-1}.
pub fn parse_affine(text: &str, nvars: usize) -> Result<Poly<QComplex>, PolyError> {
    parse_with(text, nvars, &standard_var)
}

/// Parse a homogeneous polynomial in x0..x{n-1}.
pub fn parse_poly(text: &str, nvars: usize) -> Result<HomogeneousPoly<QComplex>, PolyError> {
    if nvars < 2 {
        return Err(PolyError::Invalid("homogeneous polynomials need at least two variables".into()));
    }
    let p = parse_affine(text, nvars)?;
    match p.homogeneity() {
        Ok(Some(d)) => HomogeneousPoly::new(p, d),
        Ok(None) => Err(PolyError::ZeroPolynomial),
        Err((first, second)) => Err(PolyError::Inhomogeneous { first, second }),
    }
}

/// Parse a univariate polynomial written in any single variable name
/// (`x`, `y`, `z`, `t` or `x0`).
pub fn parse_univariate(text: &str) -> Result<Poly<QComplex>, PolyError> {
    parse_with(text, 1, &|name| match name {
        "x" | "y" | "z" | "t" | "x0" => Some(0),
        _ => None,
    })
}
