//! Text form of polynomials.
//!
//! ```text
//! expr   := ['+'|'-'] term (('+'|'-') term)*
//! term   := factor ('*' factor)*
//! factor := base ('^' uint)?
//! base   := ident | number | '(' expr ')' | 'i'
//! number := decimal [exponent] ['i']
//! ```
//!
//! Implicit multiplication is not accepted. A leading sign is allowed at the
//! start of any `expr` so printed polynomials can be read back.

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use super::{ExponentVector, Polynomial, ZERO_COEFFICIENT_TOL};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownVariable(String),
    NegativeExponent,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Syntax(msg) => write!(f, "syntax error: {msg}"),
            Self::UnknownVariable(v) => write!(f, "unknown variable {v:?}"),
            Self::NegativeExponent => write!(f, "negative exponent"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at position {position}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Byte offset into the input.
    pub position: usize,
}

impl ParseError {
    pub fn new(kind: ParseErrorKind, position: usize) -> Self {
        Self { kind, position }
    }
}

/// A parsed polynomial together with the terms that cancelled to (near) zero.
#[derive(Debug, Clone)]
pub struct ParseReport {
    pub polynomial: Polynomial,
    pub dropped: Vec<(ExponentVector, Complex64)>,
}

pub fn parse_polynomial(text: &str, variable_names: &[String]) -> Result<Polynomial, ParseError> {
    parse_polynomial_report(text, variable_names).map(|r| r.polynomial)
}

pub fn parse_polynomial_report(text: &str, variable_names: &[String]) -> Result<ParseReport, ParseError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens, pos: 0, names: variable_names, end: text.len() };
    let mut poly = parser.expr()?;
    if let Some(tok) = parser.peek() {
        return Err(ParseError::new(ParseErrorKind::Syntax(format!("unexpected {}", tok.kind)), tok.position));
    }
    let dropped = poly.prune(ZERO_COEFFICIENT_TOL);
    Ok(ParseReport { polynomial: poly, dropped })
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Ident(String),
    Number(Complex64),
    Int(u32),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Ident(s) => write!(f, "identifier {s:?}"),
            Self::Number(_) | Self::Int(_) => f.write_str("number"),
            Self::Plus => f.write_str("'+'"),
            Self::Minus => f.write_str("'-'"),
            Self::Star => f.write_str("'*'"),
            Self::Caret => f.write_str("'^'"),
            Self::LParen => f.write_str("'('"),
            Self::RParen => f.write_str("')'"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    position: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i];
        let start = i;
        let kind = match ch {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => TokenKind::Plus,
            b'-' => TokenKind::Minus,
            b'*' => TokenKind::Star,
            b'^' => TokenKind::Caret,
            b'(' => TokenKind::LParen,
            b')' => TokenKind::RParen,
            b'0'..=b'9' | b'.' => {
                let (kind, next) = lex_number(text, i)?;
                out.push(Token { kind, position: start });
                i = next;
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Token { kind: TokenKind::Ident(text[start..i].to_string()), position: start });
                continue;
            }
            _ => {
                let c = text[i..].chars().next().unwrap_or('?');
                return Err(ParseError::new(ParseErrorKind::Syntax(format!("unexpected character {c:?}")), i));
            }
        };
        out.push(Token { kind, position: start });
        i += 1;
    }
    Ok(out)
}

fn lex_number(text: &str, start: usize) -> Result<(TokenKind, usize), ParseError> {
    let bytes = text.as_bytes();
    let mut i = start;
    let digits = |i: &mut usize| {
        let s = *i;
        while *i < bytes.len() && bytes[*i].is_ascii_digit() {
            *i += 1;
        }
        *i > s
    };
    let int_part = digits(&mut i);
    let mut is_int = true;
    if i < bytes.len() && bytes[i] == b'.' {
        is_int = false;
        i += 1;
        let frac = digits(&mut i);
        if !int_part && !frac {
            return Err(ParseError::new(ParseErrorKind::Syntax("malformed number".into()), start));
        }
    }
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        if j < bytes.len() && bytes[j].is_ascii_digit() {
            is_int = false;
            i = j;
            digits(&mut i);
        }
    }
    let literal = &text[start..i];
    let imaginary = i < bytes.len()
        && bytes[i] == b'i'
        && !(i + 1 < bytes.len() && (bytes[i + 1].is_ascii_alphanumeric() || bytes[i + 1] == b'_'));
    if imaginary {
        i += 1;
    } else if i < bytes.len() && (bytes[i].is_ascii_alphabetic() || bytes[i] == b'_') {
        return Err(ParseError::new(ParseErrorKind::Syntax("implicit multiplication is not supported".into()), i));
    }
    let value: f64 =
        literal.parse().map_err(|_| ParseError::new(ParseErrorKind::Syntax("malformed number".into()), start))?;
    let kind = if imaginary {
        TokenKind::Number(Complex64::new(0.0, value))
    } else if is_int && value <= u32::MAX as f64 {
        TokenKind::Int(value as u32)
    } else {
        TokenKind::Number(Complex64::new(value, 0.0))
    };
    Ok((kind, i))
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    names: &'a [String],
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn here(&self) -> usize {
        self.peek().map(|t| t.position).unwrap_or(self.end)
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek().map(|t| &t.kind) == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn n(&self) -> usize {
        self.names.len()
    }

    fn expr(&mut self) -> Result<Polynomial, ParseError> {
        let negate = if self.eat(&TokenKind::Minus) {
            true
        } else {
            self.eat(&TokenKind::Plus);
            false
        };
        let mut acc = self.term()?;
        if negate {
            acc = -&acc;
        }
        loop {
            if self.eat(&TokenKind::Plus) {
                acc = &acc + &self.term()?;
            } else if self.eat(&TokenKind::Minus) {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = self.factor()?;
        while self.eat(&TokenKind::Star) {
            acc = &acc * &self.factor()?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Polynomial, ParseError> {
        let base = self.base()?;
        if !self.eat(&TokenKind::Caret) {
            return Ok(base);
        }
        let position = self.here();
        match self.peek().map(|t| t.kind.clone()) {
            Some(TokenKind::Int(k)) => {
                self.pos += 1;
                Ok(base.pow(k))
            }
            Some(TokenKind::Minus) => Err(ParseError::new(ParseErrorKind::NegativeExponent, position)),
            _ => {
                Err(ParseError::new(ParseErrorKind::Syntax("exponent must be a nonnegative integer".into()), position))
            }
        }
    }

    fn base(&mut self) -> Result<Polynomial, ParseError> {
        let position = self.here();
        let Some(tok) = self.peek().cloned() else {
            return Err(ParseError::new(ParseErrorKind::Syntax("unexpected end of input".into()), position));
        };
        self.pos += 1;
        let n = self.n();
        match tok.kind {
            TokenKind::Int(k) => Ok(Polynomial::constant(n, Complex64::new(k as f64, 0.0))),
            TokenKind::Number(c) => Ok(Polynomial::constant(n, c)),
            TokenKind::Ident(name) => match self.names.iter().position(|v| *v == name) {
                Some(i) => Ok(Polynomial::variable(n, i)),
                None if name == "i" => Ok(Polynomial::constant(n, Complex64::new(0.0, 1.0))),
                None => Err(ParseError::new(ParseErrorKind::UnknownVariable(name), position)),
            },
            TokenKind::LParen => {
                let inner = self.expr()?;
                if !self.eat(&TokenKind::RParen) {
                    return Err(ParseError::new(ParseErrorKind::Syntax("expected ')'".into()), self.here()));
                }
                Ok(inner)
            }
            other => Err(ParseError::new(ParseErrorKind::Syntax(format!("unexpected {other}")), position)),
        }
    }
}

fn format_coefficient(c: Complex64) -> String {
    match (c.re == 0.0, c.im == 0.0) {
        (_, true) => format!("{:?}", c.re),
        (true, false) => format!("{:?}i", c.im),
        (false, false) => {
            let sign = if c.im.is_sign_negative() { '-' } else { '+' };
            format!("({:?}{}{:?}i)", c.re, sign, c.im.abs())
        }
    }
}

/// Prints in the grammar accepted by [`parse_polynomial`]; reading the output
/// back reproduces every coefficient bit for bit.
pub fn format_polynomial(f: &Polynomial, variable_names: &[String]) -> String {
    if f.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (k, (e, c)) in f.terms().rev().enumerate() {
        let mono: Vec<String> = e
            .as_slice()
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0)
            .map(|(i, &p)| if p == 1 { variable_names[i].clone() } else { format!("{}^{}", variable_names[i], p) })
            .collect();
        let coeff = format_coefficient(*c);
        let term = if mono.is_empty() {
            coeff
        } else if *c == Complex64::new(1.0, 0.0) {
            mono.join("*")
        } else if *c == Complex64::new(-1.0, 0.0) {
            format!("-{}", mono.join("*"))
        } else {
            format!("{}*{}", coeff, mono.join("*"))
        };
        if k == 0 {
            out.push_str(&term);
        } else if let Some(rest) = term.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(rest);
        } else {
            out.push_str(" + ");
            out.push_str(&term);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn zero_terms_are_dropped() {
        let f = parse_polynomial("0*x + 1", &names(&["x", "y"])).unwrap();
        assert_eq!(f.num_terms(), 1);
        assert_eq!(f.coefficient(&ExponentVector::zeros(2)), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn cancellation_is_reported() {
        let r = parse_polynomial_report("0.1*x + 0.2*x - 0.30000000000000004*x + y", &names(&["x", "y"])).unwrap();
        assert_eq!(r.polynomial.num_terms(), 1);
        assert_eq!(r.dropped.len(), 0, "exact cancellation leaves nothing to report");
        let r = parse_polynomial_report("0.1*x + 0.2*x - 0.3*x + y", &names(&["x", "y"])).unwrap();
        assert_eq!(r.polynomial.num_terms(), 1);
        assert_eq!(r.dropped.len(), 1);
    }

    #[test]
    fn literals() {
        let n = names(&["x"]);
        let f = parse_polynomial("(1.5-2i)*x + 2.5e-3 + i", &n).unwrap();
        assert_eq!(f.coefficient(&ExponentVector::unit(1, 0)), Complex64::new(1.5, -2.0));
        assert_eq!(f.coefficient(&ExponentVector::zeros(1)), Complex64::new(2.5e-3, 1.0));
        let g = parse_polynomial("-x^2 + 3", &n).unwrap();
        assert_eq!(g.coefficient(&ExponentVector::new(vec![2])), Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn errors_carry_positions() {
        let n = names(&["x", "y"]);
        let e = parse_polynomial("x + z", &n).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownVariable("z".into()));
        assert_eq!(e.position, 4);

        let e = parse_polynomial("x^-2", &n).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::NegativeExponent);
        assert_eq!(e.position, 2);

        let e = parse_polynomial("x + * y", &n).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Syntax(_)));
        assert_eq!(e.position, 4);

        assert!(parse_polynomial("2x", &n).is_err());
        assert!(parse_polynomial("(x+y", &n).is_err());
        assert!(parse_polynomial("x^2.5", &n).is_err());
        assert!(parse_polynomial("", &n).is_err());
    }

    #[test]
    fn print_examples() {
        let n = names(&["x", "y"]);
        let f = parse_polynomial("x^2 - y + 1", &n).unwrap();
        let s = format_polynomial(&f, &n);
        assert_eq!(parse_polynomial(&s, &n).unwrap(), f);
        assert_eq!(format_polynomial(&Polynomial::zero(2), &n), "0");
    }
}
