//! The function mini-language.
//!
//! ```text
//! spec   := "const" lit
//!         | "poly" lit+
//!         | "taylor" path
//!         | "mobius" lit ["rot" lit]
//!         | "scale" lit "(" spec ")"
//! lit    := real | real ("+"|"-") real "i"      (no interior spaces)
//! ```

use std::path::Path;

use num_complex::Complex64;

use super::{AnalyticFunction, DEFAULT_MAX_DEGREE};
use crate::error::{Error, Result};

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while let Some(b) = self.src.as_bytes().get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.as_bytes().get(self.pos).copied()
    }

    /// Next run of characters up to whitespace or a parenthesis.
    fn word(&mut self) -> Option<(usize, &'a str)> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && !bytes[self.pos].is_ascii_whitespace() && !matches!(bytes[self.pos], b'(' | b')') {
            self.pos += 1;
        }
        (self.pos > start).then(|| (start, &self.src[start..self.pos]))
    }

    fn expect(&mut self, ch: u8) -> Result<()> {
        match self.peek() {
            Some(b) if b == ch => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(syntax(self.pos, format!("expected '{}'", ch as char))),
        }
    }

    fn literal(&mut self, what: &str) -> Result<Complex64> {
        let pos = self.pos;
        let (at, w) = self.word().ok_or_else(|| syntax(pos, format!("expected {what}")))?;
        parse_complex(w).map_err(|e| shift(e, at))
    }
}

fn syntax(offset: usize, message: impl Into<String>) -> Error {
    Error::Syntax { offset, message: message.into() }
}

fn shift(e: Error, by: usize) -> Error {
    match e {
        Error::Syntax { offset, message } => Error::Syntax { offset: offset + by, message },
        Error::NonFiniteLiteral { offset } => Error::NonFiniteLiteral { offset: offset + by },
        other => other,
    }
}

fn parse_real(s: &str, offset: usize) -> Result<f64> {
    let v: f64 = s.parse().map_err(|_| syntax(offset, format!("invalid number '{s}'")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteLiteral { offset })
    }
}

/// Parses `re`, `re+imi` or `re-imi`. Offsets in errors are relative to `s`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let Some(body) = s.strip_suffix('i') else {
        return Ok(Complex64::new(parse_real(s, 0)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'))
        .ok_or_else(|| syntax(0, format!("complex literal '{s}' must have the form re+imi")))?;
    let re = parse_real(&body[..split], 0)?;
    let im = parse_real(&body[split..], split)?;
    Ok(Complex64::new(re, im))
}

/// Inverse of [`parse_complex`]; round-trips every finite value exactly.
pub fn format_complex(c: Complex64) -> String {
    if c.im == 0.0 && !c.im.is_sign_negative() {
        format!("{}", c.re)
    } else if c.im.is_sign_negative() {
        format!("{}-{}i", c.re, -c.im)
    } else {
        format!("{}+{}i", c.re, c.im)
    }
}

pub fn parse_spec(text: &str) -> Result<AnalyticFunction> {
    if text.trim().is_empty() {
        return Err(syntax(0, "empty function spec"));
    }
    let mut cur = Cursor { src: text, pos: 0 };
    let f = parse_expr(&mut cur)?;
    cur.skip_ws();
    if cur.pos < text.len() {
        return Err(syntax(cur.pos, "unexpected trailing input"));
    }
    Ok(f)
}

fn parse_expr(cur: &mut Cursor<'_>) -> Result<AnalyticFunction> {
    let pos = cur.pos;
    let (at, kw) = cur.word().ok_or_else(|| syntax(pos, "expected one of const, poly, taylor, mobius, scale"))?;
    match kw {
        "const" => Ok(AnalyticFunction::Constant(cur.literal("a complex literal")?)),
        "poly" => {
            let mut coeffs = vec![cur.literal("a coefficient")?];
            while matches!(cur.peek(), Some(b) if b != b')') {
                coeffs.push(cur.literal("a coefficient")?);
            }
            AnalyticFunction::polynomial(coeffs)
        }
        "taylor" => {
            let pos = cur.pos;
            let (_, path) = cur.word().ok_or_else(|| syntax(pos, "expected a csv path"))?;
            read_taylor_csv(Path::new(path))
        }
        "mobius" => {
            let a = cur.literal("the mobius parameter")?;
            let save = cur.pos;
            let rotation = match cur.word() {
                Some((_, "rot")) => cur.literal("a rotation")?,
                Some((off, other)) => return Err(syntax(off, format!("expected 'rot', found '{other}'"))),
                None => {
                    cur.pos = save;
                    Complex64::new(1.0, 0.0)
                }
            };
            AnalyticFunction::mobius(a, rotation)
        }
        "scale" => {
            let k = cur.literal("a scale factor")?;
            cur.expect(b'(')?;
            let inner = parse_expr(cur)?;
            cur.expect(b')')?;
            Ok(inner.scale(k, DEFAULT_MAX_DEGREE))
        }
        other => Err(syntax(at, format!("unknown function kind '{other}'"))),
    }
}

/// Reads rows `k,re,im` with ascending `k`; a header row is optional.
/// Missing indices are zero-filled. The tail of the series is unknown.
pub fn read_taylor_csv(path: &Path) -> Result<AnalyticFunction> {
    let err = |message: String| Error::TaylorFile { path: path.display().to_string(), message };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| err(e.to_string()))?;
    let mut coeffs: Vec<Complex64> = Vec::new();
    let mut last: Option<usize> = None;
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| err(e.to_string()))?;
        if record.len() != 3 {
            return Err(err(format!("row {} has {} fields, expected 3", line + 1, record.len())));
        }
        let Ok(k) = record[0].parse::<usize>() else {
            if line == 0 {
                continue;
            }
            return Err(err(format!("row {}: invalid index '{}'", line + 1, &record[0])));
        };
        let num = |s: &str| -> Result<f64> {
            match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(err(format!("row {}: invalid coefficient '{s}'", line + 1))),
            }
        };
        let (re, im) = (num(&record[1])?, num(&record[2])?);
        if last.is_some_and(|prev| k <= prev) {
            return Err(err(format!("row {}: indices must be strictly ascending", line + 1)));
        }
        last = Some(k);
        coeffs.resize(k + 1, Complex64::new(0.0, 0.0));
        coeffs[k] = Complex64::new(re, im);
    }
    if coeffs.is_empty() {
        return Err(err("no coefficients".into()));
    }
    AnalyticFunction::taylor(coeffs, None)
}
