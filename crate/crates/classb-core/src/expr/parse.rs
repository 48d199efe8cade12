//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr   := term (("+"|"-") term)* ;
//! term   := unary (("*"|"/") unary)* ;
//! unary  := "-" unary | factor ;
//! factor := base ("^" unary)? ;
//! base   := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")" ;
//! ```
//!
//! Functions are `exp`, `log`, `sqrt`. Power is right-associative and unary
//! minus binds looser than `^`. Numeric literals are parsed as exact
//! rationals. A syntactically constant exponent becomes a numeric power
//! node; a non-constant exponent `u^v` is lowered to `exp(v*log(u))`.

use super::number::Number;
use super::Expr;
use num::bigint::BigInt;
use num::rational::BigRational;
use std::fmt;

/// Parse failure, reported with the byte offset into the source text.
#[derive(Debug, Clone, PartialEq)]
pub enum ParseError {
    Syntax {
        offset: usize,
        expected: Vec<&'static str>,
        found: String,
    },
    UnknownFunction {
        offset: usize,
        name: String,
    },
    MalformedNumber {
        offset: usize,
    },
    InvalidCharacter {
        offset: usize,
        ch: char,
    },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownFunction { offset, .. }
            | ParseError::MalformedNumber { offset }
            | ParseError::InvalidCharacter { offset, .. } => *offset,
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Syntax {
                offset,
                expected,
                found,
            } => write!(
                f,
                "syntax error at byte {}: expected {}, found {}",
                offset,
                expected.join(" | "),
                found
            ),
            ParseError::UnknownFunction { offset, name } => {
                write!(f, "unknown function `{}` at byte {}", name, offset)
            }
            ParseError::MalformedNumber { offset } => {
                write!(f, "malformed number at byte {}", offset)
            }
            ParseError::InvalidCharacter { offset, ch } => {
                write!(f, "invalid character `{}` at byte {}", ch, offset)
            }
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Number(BigRational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Number(_) => "number".into(),
            Tok::Ident(name) => format!("identifier `{}`", name),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(mut self) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut out = Vec::new();
        loop {
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            let start = self.pos;
            if self.pos >= self.src.len() {
                out.push((Tok::Eof, start));
                return Ok(out);
            }
            let c = self.src[self.pos];
            let tok = match c {
                b'+' => {
                    self.pos += 1;
                    Tok::Plus
                }
                b'-' => {
                    self.pos += 1;
                    Tok::Minus
                }
                b'*' => {
                    self.pos += 1;
                    Tok::Star
                }
                b'/' => {
                    self.pos += 1;
                    Tok::Slash
                }
                b'^' => {
                    self.pos += 1;
                    Tok::Caret
                }
                b'(' => {
                    self.pos += 1;
                    Tok::LParen
                }
                b')' => {
                    self.pos += 1;
                    Tok::RParen
                }
                b'0'..=b'9' => self.number(start)?,
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    while self.pos < self.src.len()
                        && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                    {
                        self.pos += 1;
                    }
                    Tok::Ident(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
                }
                other => {
                    return Err(ParseError::InvalidCharacter {
                        offset: start,
                        ch: other as char,
                    })
                }
            };
            out.push((tok, start));
        }
    }

    /// NUMBER := digits ("." digits)? (("e"|"E") ("+"|"-")? digits)?
    /// Parsed exactly: `1.5e-3` becomes the rational 3/2000.
    fn number(&mut self, start: usize) -> Result<Tok, ParseError> {
        let mut digits = String::new();
        let mut frac_len: i64 = 0;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            digits.push(self.src[self.pos] as char);
            self.pos += 1;
        }
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            let frac_start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                digits.push(self.src[self.pos] as char);
                self.pos += 1;
            }
            frac_len = (self.pos - frac_start) as i64;
            if frac_len == 0 {
                return Err(ParseError::MalformedNumber { offset: start });
            }
        }
        let mut exp10: i64 = 0;
        if self.pos < self.src.len() && (self.src[self.pos] == b'e' || self.src[self.pos] == b'E') {
            self.pos += 1;
            let mut sign = 1i64;
            if self.pos < self.src.len() && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-')
            {
                if self.src[self.pos] == b'-' {
                    sign = -1;
                }
                self.pos += 1;
            }
            let digs_start = self.pos;
            let mut e: i64 = 0;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                e = e.saturating_mul(10).saturating_add((self.src[self.pos] - b'0') as i64);
                self.pos += 1;
            }
            if self.pos == digs_start {
                return Err(ParseError::MalformedNumber { offset: start });
            }
            exp10 = sign * e;
        }
        let mantissa: BigInt = digits.parse().expect("digits are a valid integer");
        let shift = exp10 - frac_len;
        let ten = BigInt::from(10);
        let value = if shift >= 0 {
            BigRational::from_integer(mantissa * ten.pow(shift as u32))
        } else {
            BigRational::new(mantissa, ten.pow((-shift) as u32))
        };
        Ok(Tok::Number(value))
    }
}

struct Parser {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].0
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].1
    }

    fn advance(&mut self) -> Tok {
        let t = self.tokens[self.pos].0.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: Vec<&'static str>) -> ParseError {
        ParseError::Syntax {
            offset: self.offset(),
            expected,
            found: self.peek().describe(),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.advance();
                    acc = Expr::add(acc, self.term()?);
                }
                Tok::Minus => {
                    self.advance();
                    acc = Expr::sub(acc, self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.advance();
                    acc = Expr::mul(acc, self.unary()?);
                }
                Tok::Slash => {
                    self.advance();
                    acc = Expr::div(acc, self.unary()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if matches!(self.peek(), Tok::Minus) {
            self.advance();
            return Ok(Expr::neg(self.unary()?));
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if matches!(self.peek(), Tok::Caret) {
            self.advance();
            let exponent = self.unary()?;
            return Ok(apply_power(base, exponent));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Number(v) => {
                self.advance();
                Ok(Expr::constant(Number::Rational(v)))
            }
            Tok::Ident(name) => {
                let ident_offset = self.offset();
                self.advance();
                if matches!(self.peek(), Tok::LParen) {
                    self.advance();
                    let arg = self.expr()?;
                    if !matches!(self.peek(), Tok::RParen) {
                        return Err(self.unexpected(vec![
                            "`)`", "`+`", "`-`", "`*`", "`/`", "`^`",
                        ]));
                    }
                    self.advance();
                    match name.as_str() {
                        "exp" => Ok(Expr::exp(arg)),
                        "log" => Ok(Expr::log(arg)),
                        "sqrt" => Ok(Expr::sqrt(arg)),
                        _ => Err(ParseError::UnknownFunction {
                            offset: ident_offset,
                            name,
                        }),
                    }
                } else {
                    Ok(Expr::var(name))
                }
            }
            Tok::LParen => {
                self.advance();
                let inner = self.expr()?;
                if !matches!(self.peek(), Tok::RParen) {
                    return Err(self.unexpected(vec!["`)`", "`+`", "`-`", "`*`", "`/`", "`^`"]));
                }
                self.advance();
                Ok(inner)
            }
            _ => Err(self.unexpected(vec!["number", "identifier", "`(`", "`-`"])),
        }
    }
}

fn apply_power(base: Expr, exponent: Expr) -> Expr {
    match exponent.as_constant() {
        Some(n) => Expr::pow(base, n.clone()),
        // Symbolic exponent: u^v = exp(v*log(u)).
        None => Expr::exp(Expr::mul(exponent, Expr::log(base))),
    }
}

/// Parses `text` into an expression tree.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let tokens = Lexer {
        src: text.as_bytes(),
        pos: 0,
    }
    .tokens()?;
    let mut parser = Parser { tokens, pos: 0 };
    let expr = parser.expr()?;
    if !matches!(parser.peek(), Tok::Eof) {
        return Err(parser.unexpected(vec!["`+`", "`-`", "`*`", "`/`", "end of input"]));
    }
    Ok(expr)
}
