//! Text grammar shared by operators and c-number polynomials:
//!
//! ```text
//! expr   := ['+'|'-'] term (('+'|'-') term)*
//! term   := power (['*'] power | '/' number)*
//! power  := atom ['^' int]
//! atom   := number | 'i' | 'hbar' | 'q' | 'p' | '(' expr ')'
//! ```
//!
//! Juxtaposition multiplies, whitespace is ignored and factor order is kept,
//! so `"p q"` parses as `p̂ q̂ = q̂ p̂ − iħ`.

use num_complex::Complex64 as C64;

use super::{OperatorExpr, PhaseSpaceSymbol};
use crate::{Error, Result};

pub(crate) trait Algebra: Sized {
    fn scalar(c: C64, hbar_power: u32, hbar: f64) -> Self;
    fn variable_q(hbar: f64) -> Self;
    fn variable_p(hbar: f64) -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn scaled(&self, c: C64) -> Self;
}

impl Algebra for OperatorExpr {
    fn scalar(c: C64, hbar_power: u32, hbar: f64) -> Self {
        OperatorExpr::monomial(C64::new(1.0, 0.0), 0, 0, hbar)
            .expect("hbar validated by parser")
            .scale_symbolic(c, hbar_power)
    }
    fn variable_q(hbar: f64) -> Self {
        OperatorExpr::position(hbar).expect("hbar validated by parser")
    }
    fn variable_p(hbar: f64) -> Self {
        OperatorExpr::momentum(hbar).expect("hbar validated by parser")
    }
    fn plus(&self, other: &Self) -> Self {
        self.add(other).expect("shared hbar")
    }
    fn times(&self, other: &Self) -> Self {
        self.multiply(other).expect("shared hbar")
    }
    fn scaled(&self, c: C64) -> Self {
        self.scale(c)
    }
}

impl Algebra for PhaseSpaceSymbol {
    fn scalar(c: C64, hbar_power: u32, hbar: f64) -> Self {
        PhaseSpaceSymbol::constant(C64::new(1.0, 0.0), hbar)
            .expect("hbar validated by parser")
            .scale_symbolic(c, hbar_power)
    }
    fn variable_q(hbar: f64) -> Self {
        PhaseSpaceSymbol::monomial(C64::new(1.0, 0.0), 1, 0, hbar).expect("hbar validated by parser")
    }
    fn variable_p(hbar: f64) -> Self {
        PhaseSpaceSymbol::monomial(C64::new(1.0, 0.0), 0, 1, hbar).expect("hbar validated by parser")
    }
    fn plus(&self, other: &Self) -> Self {
        self.add(other).expect("shared hbar")
    }
    fn times(&self, other: &Self) -> Self {
        self.multiply(other).expect("shared hbar")
    }
    fn scaled(&self, c: C64) -> Self {
        self.scale(c)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Number(f64),
    Imaginary,
    Hbar,
    Q,
    P,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Open,
    Close,
}

fn syntax(position: usize, message: impl Into<String>) -> Error {
    Error::Syntax { position, message: message.into() }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let token = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // exponent only when followed by a digit, so "2e" is not eaten
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let literal = &text[start..i];
                let value = literal
                    .parse::<f64>()
                    .map_err(|_| syntax(start, format!("malformed number '{literal}'")))?;
                out.push((start, Token::Number(value)));
                continue;
            }
            b'h' => {
                if text[i..].starts_with("hbar") {
                    i += 4;
                    out.push((start, Token::Hbar));
                    continue;
                }
                return Err(syntax(start, "unknown identifier (expected 'hbar')"));
            }
            b'i' => Token::Imaginary,
            b'q' => Token::Q,
            b'p' => Token::P,
            b'+' => Token::Plus,
            b'-' => Token::Minus,
            b'*' => Token::Star,
            b'/' => Token::Slash,
            b'^' => Token::Caret,
            b'(' => Token::Open,
            b')' => Token::Close,
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(syntax(start, format!("unexpected character '{ch}'")));
            }
        };
        i += 1;
        out.push((start, token));
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(usize, Token)>,
    index: usize,
    hbar: f64,
    text: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.index).map(|(_, t)| t)
    }

    fn position(&self) -> usize {
        self.tokens.get(self.index).map_or(self.text.len(), |(pos, _)| *pos)
    }

    fn next(&mut self) -> Option<(usize, Token)> {
        let t = self.tokens.get(self.index).cloned();
        self.index += 1;
        t
    }

    fn expr<A: Algebra>(&mut self) -> Result<A> {
        let mut sign = C64::new(1.0, 0.0);
        match self.peek() {
            Some(Token::Plus) => {
                self.index += 1;
            }
            Some(Token::Minus) => {
                self.index += 1;
                sign = -sign;
            }
            _ => {}
        }
        let mut acc = self.term::<A>()?.scaled(sign);
        loop {
            let sign = match self.peek() {
                Some(Token::Plus) => 1.0,
                Some(Token::Minus) => -1.0,
                _ => break,
            };
            self.index += 1;
            let rhs = self.term::<A>()?;
            acc = acc.plus(&rhs.scaled(C64::new(sign, 0.0)));
        }
        Ok(acc)
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Some(Token::Number(_) | Token::Imaginary | Token::Hbar | Token::Q | Token::P | Token::Open)
        )
    }

    fn term<A: Algebra>(&mut self) -> Result<A> {
        let mut acc = self.power::<A>()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.index += 1;
                    let rhs = self.power::<A>()?;
                    acc = acc.times(&rhs);
                }
                Some(Token::Slash) => {
                    self.index += 1;
                    let pos = self.position();
                    match self.next() {
                        Some((_, Token::Number(d))) if d != 0.0 => {
                            acc = acc.scaled(C64::new(1.0 / d, 0.0));
                        }
                        Some((_, Token::Number(_))) => return Err(syntax(pos, "division by zero")),
                        _ => return Err(syntax(pos, "expected a number after '/'")),
                    }
                }
                _ if self.starts_atom() => {
                    let rhs = self.power::<A>()?;
                    acc = acc.times(&rhs);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn power<A: Algebra>(&mut self) -> Result<A> {
        let base = self.atom::<A>()?;
        if self.peek() != Some(&Token::Caret) {
            return Ok(base);
        }
        self.index += 1;
        let pos = self.position();
        match self.next() {
            Some((p, Token::Minus)) => Err(Error::NegativeExponent { position: p }),
            Some((p, Token::Number(k))) => {
                if k.fract() != 0.0 || k > u32::MAX as f64 {
                    return Err(syntax(p, "exponent must be a non-negative integer"));
                }
                let mut acc = A::scalar(C64::new(1.0, 0.0), 0, self.hbar);
                for _ in 0..k as u32 {
                    acc = acc.times(&base);
                }
                Ok(acc)
            }
            _ => Err(syntax(pos, "expected an integer exponent after '^'")),
        }
    }

    fn atom<A: Algebra>(&mut self) -> Result<A> {
        let pos = self.position();
        let hbar = self.hbar;
        match self.next() {
            Some((_, Token::Number(v))) => Ok(A::scalar(C64::new(v, 0.0), 0, hbar)),
            Some((_, Token::Imaginary)) => Ok(A::scalar(C64::new(0.0, 1.0), 0, hbar)),
            Some((_, Token::Hbar)) => Ok(A::scalar(C64::new(1.0, 0.0), 1, hbar)),
            Some((_, Token::Q)) => Ok(A::variable_q(hbar)),
            Some((_, Token::P)) => Ok(A::variable_p(hbar)),
            Some((_, Token::Open)) => {
                let inner = self.expr::<A>()?;
                match self.next() {
                    Some((_, Token::Close)) => Ok(inner),
                    _ => Err(syntax(self.position_of_previous(), "expected ')'")),
                }
            }
            Some((_, t)) => Err(syntax(pos, format!("unexpected {t:?}"))),
            None => Err(syntax(pos, "unexpected end of input")),
        }
    }

    fn position_of_previous(&self) -> usize {
        self.tokens
            .get(self.index.saturating_sub(1))
            .map_or(self.text.len(), |(p, _)| *p)
    }
}

pub(crate) fn parse_with<A: Algebra>(text: &str, hbar: f64) -> Result<A> {
    if !(hbar.is_finite() && hbar > 0.0) {
        return Err(Error::InvalidInput(format!("hbar must be positive and finite, got {hbar}")));
    }
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(syntax(0, "empty expression"));
    }
    let mut parser = Parser { tokens, index: 0, hbar, text };
    let value = parser.expr::<A>()?;
    if parser.index < parser.tokens.len() {
        return Err(syntax(parser.position(), "unexpected trailing input"));
    }
    Ok(value)
}

/// Parses operator text into canonical standard order.
pub fn parse_operator(text: &str, hbar: f64) -> Result<OperatorExpr> {
    parse_with(text, hbar)
}

/// Parses the same grammar as a commuting c-number polynomial.
pub fn parse_symbol(text: &str, hbar: f64) -> Result<PhaseSpaceSymbol> {
    parse_with(text, hbar)
}
