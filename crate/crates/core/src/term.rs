//! Text syntax for diagrams.
//!
//! ```text
//! term  := id(nat) | swap(nat,nat) | ph(angle) | H | Z(angle) | CNOT
//!        | C(term) | dag(term) | seq(term, term, ...) | par(term, term, ...)
//! angle := decimal | ["-"] [nat "*"] "pi" ["/" nat]
//! ```
//!
//! `dag(...)` is accepted on input and eliminated immediately by the
//! syntactic adjoint. Printing favours exact multiples of π (`pi/2`,
//! `3*pi/4`) whenever that form re-parses to the identical float, and
//! falls back to a 17-digit decimal otherwise, so `parse ∘ print` is the
//! identity.

use crate::angle::Angle;
use crate::diagram::Diagram;
use crate::error::{Error, Result};
use crate::num::Real;
use std::fmt;

const MAX_PI_DENOMINATOR: u32 = 48;

/// Render an angle: a multiple of π when exact, decimal otherwise.
pub fn format_angle<S: Real>(a: Angle<S>) -> String {
    let x = a.value().to_f64().unwrap();
    if x == 0.0 {
        return "0".to_string();
    }
    for den in 1..=MAX_PI_DENOMINATOR {
        let k = (x * den as f64 / std::f64::consts::PI).round();
        if k == 0.0 || (x - k * std::f64::consts::PI / den as f64).abs() > 1e-12 {
            continue;
        }
        let k = k as i64;
        // only keep the form if re-parsing reproduces the exact value
        let reparsed = Angle::<S>::new(S::from_f64(eval_pi_multiple(k, den)).unwrap());
        if reparsed.value() == a.value() {
            return match (k, den) {
                (1, 1) => "pi".to_string(),
                (1, d) => format!("pi/{d}"),
                (k, 1) => format!("{k}*pi"),
                (k, d) => format!("{k}*pi/{d}"),
            };
        }
    }
    format!("{x:.17e}")
}

/// The exact arithmetic the parser uses for `k*pi/den`.
fn eval_pi_multiple(k: i64, den: u32) -> f64 {
    (k as f64 * std::f64::consts::PI) / den as f64
}

impl<S: Real> fmt::Display for Diagram<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagram::Phase(a) => write!(f, "ph({})", format_angle(*a)),
            Diagram::H => write!(f, "H"),
            Diagram::Z(a) => write!(f, "Z({})", format_angle(*a)),
            Diagram::Cnot => write!(f, "CNOT"),
            Diagram::Id(n) => write!(f, "id({n})"),
            Diagram::Swap(n, m) => write!(f, "swap({n},{m})"),
            Diagram::Ctrl(body) => write!(f, "C({body})"),
            Diagram::Seq(cs) | Diagram::Par(cs) => {
                let head = if matches!(self, Diagram::Seq(_)) { "seq" } else { "par" };
                match cs.len() {
                    0 => write!(f, "id(0)"),
                    1 => write!(f, "{}", cs[0]),
                    _ => {
                        write!(f, "{head}(")?;
                        for (i, c) in cs.iter().enumerate() {
                            if i > 0 {
                                write!(f, ", ")?;
                            }
                            write!(f, "{c}")?;
                        }
                        write!(f, ")")
                    }
                }
            }
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src: src.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn error(&self, msg: impl Into<String>) -> Error {
        Error::ParseError { line: self.line, col: self.col, msg: msg.into() }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.bump();
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        self.skip_ws();
        match self.peek() {
            Some(got) if got == c => {
                self.bump();
                Ok(())
            }
            Some(got) => Err(self.error(format!("expected '{}', found '{}'", c as char, got as char))),
            None => Err(self.error(format!("expected '{}', found end of input", c as char))),
        }
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphabetic()) {
            self.bump();
        }
        if self.pos == start {
            let found = self.peek().map(|c| (c as char).to_string()).unwrap_or_else(|| "end of input".into());
            return Err(self.error(format!("expected a term, found {found}")));
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn nat(&mut self) -> Result<usize> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.bump();
        }
        if self.pos == start {
            return Err(self.error("expected a number"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.error("number out of range"))
    }

    fn decimal_text(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.bump();
        }
        if self.peek() == Some(b'.') {
            self.bump();
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.bump();
            }
        }
        if matches!(self.peek(), Some(b'e') | Some(b'E')) {
            self.bump();
            if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                self.bump();
            }
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.bump();
            }
        }
        if self.pos == start {
            return Err(self.error("expected a number"));
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn angle<S: Real>(&mut self) -> Result<Angle<S>> {
        self.skip_ws();
        let negative = if self.peek() == Some(b'-') {
            self.bump();
            true
        } else {
            false
        };
        self.skip_ws();
        let value: f64 = match self.peek() {
            Some(b'p') => {
                let word = self.ident()?;
                if word != "pi" {
                    return Err(self.error(format!("expected 'pi', found '{word}'")));
                }
                let den = self.pi_denominator()?;
                eval_pi_multiple(1, den)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let text = self.decimal_text()?;
                self.skip_ws();
                if self.peek() == Some(b'*') {
                    self.bump();
                    let word = self.ident()?;
                    if word != "pi" {
                        return Err(self.error(format!("expected 'pi', found '{word}'")));
                    }
                    let k: i64 = text.parse().map_err(|_| self.error("the π multiplier must be a natural number"))?;
                    let den = self.pi_denominator()?;
                    eval_pi_multiple(k, den)
                } else {
                    text.parse().map_err(|_| self.error("malformed decimal"))?
                }
            }
            _ => return Err(self.error("expected an angle")),
        };
        let signed = if negative { -value } else { value };
        Ok(Angle::new(S::from_f64(signed).unwrap()))
    }

    fn pi_denominator(&mut self) -> Result<u32> {
        self.skip_ws();
        if self.peek() == Some(b'/') {
            self.bump();
            let d = self.nat()?;
            if d == 0 {
                return Err(self.error("zero denominator"));
            }
            Ok(d as u32)
        } else {
            Ok(1)
        }
    }

    fn term<S: Real>(&mut self) -> Result<Diagram<S>> {
        let head = self.ident()?;
        match head.as_str() {
            "H" => Ok(Diagram::H),
            "CNOT" => Ok(Diagram::Cnot),
            "id" => {
                self.expect(b'(')?;
                let n = self.nat()?;
                self.expect(b')')?;
                Ok(Diagram::Id(n))
            }
            "swap" => {
                self.expect(b'(')?;
                let n = self.nat()?;
                self.expect(b',')?;
                let m = self.nat()?;
                self.expect(b')')?;
                Ok(Diagram::Swap(n, m))
            }
            "ph" => {
                self.expect(b'(')?;
                let a = self.angle()?;
                self.expect(b')')?;
                Ok(Diagram::Phase(a))
            }
            "Z" => {
                self.expect(b'(')?;
                let a = self.angle()?;
                self.expect(b')')?;
                Ok(Diagram::Z(a))
            }
            "C" => {
                self.expect(b'(')?;
                let body = self.term()?;
                self.expect(b')')?;
                Ok(Diagram::ctrl(body))
            }
            "dag" => {
                self.expect(b'(')?;
                let body: Diagram<S> = self.term()?;
                self.expect(b')')?;
                Ok(body.dagger())
            }
            "seq" | "par" => {
                self.expect(b'(')?;
                let mut children = vec![self.term()?];
                loop {
                    self.skip_ws();
                    match self.peek() {
                        Some(b',') => {
                            self.bump();
                            children.push(self.term()?);
                        }
                        Some(b')') => {
                            self.bump();
                            break;
                        }
                        _ => return Err(self.error("expected ',' or ')'")),
                    }
                }
                if children.len() < 2 {
                    return Err(self.error(format!("{head} needs at least two children")));
                }
                Ok(if head == "seq" { Diagram::Seq(children) } else { Diagram::Par(children) })
            }
            other => Err(self.error(format!("unknown term head '{other}'"))),
        }
    }
}

/// Parse a bare angle (`pi/2`, `3*pi/4`, `-pi`, `0.25`).
pub fn parse_angle<S: Real>(src: &str) -> Result<Angle<S>> {
    let mut p = Parser::new(src);
    let a = p.angle()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("trailing input after angle"));
    }
    Ok(a)
}

/// Parse a diagram from its text form.
pub fn parse_term<S: Real>(src: &str) -> Result<Diagram<S>> {
    let mut p = Parser::new(src);
    let term = p.term()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("trailing input after term"));
    }
    Ok(term)
}

impl<S: Real> std::str::FromStr for Diagram<S> {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_term(s)
    }
}
