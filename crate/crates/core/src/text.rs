//! Line-oriented key=value documents and polynomial expressions.
//!
//! Grammar of a document:
//!
//! ```text
//! # comment (also after values)
//! key = value
//! [section]
//! key = value
//! raw line without '='     (matrix rows)
//! ```
//!
//! Expressions: `+ - * / ^`, parentheses, decimal numbers, imaginary literals
//! (`2i`, `0.5i`, bare `i`), declared variables and named constants. Division
//! is only allowed by constant subexpressions; exponents are non-negative
//! integers. Complex numbers are written `re+im i`, e.g. `0+2i` or `1-0.5i`.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::Poly;

#[derive(Clone, Debug, PartialEq)]
pub enum LineKind {
    KeyValue {
        key: String,
        value: String,
        /// 1-based column where `value` starts.
        value_col: usize,
    },
    Raw {
        text: String,
        col: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DocLine {
    pub line: usize,
    pub section: Option<String>,
    pub kind: LineKind,
}

#[derive(Clone, Debug, Default)]
pub struct Document {
    pub lines: Vec<DocLine>,
}

impl Document {
    pub fn parse(src: &str) -> Result<Self> {
        let mut lines = Vec::new();
        let mut section: Option<String> = None;
        for (idx, raw) in src.lines().enumerate() {
            let lineno = idx + 1;
            let content = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            };
            let trimmed = content.trim();
            if trimmed.is_empty() {
                continue;
            }
            let lead = content.len() - content.trim_start().len();
            if trimmed.starts_with('[') {
                if !trimmed.ends_with(']') || trimmed.len() < 3 {
                    return Err(Error::parse(lineno, lead + 1, "malformed section header"));
                }
                section = Some(trimmed[1..trimmed.len() - 1].trim().to_string());
                continue;
            }
            let kind = match content.find('=') {
                Some(eq) => {
                    let key = content[..eq].trim();
                    if key.is_empty() {
                        return Err(Error::parse(lineno, lead + 1, "missing key before '='"));
                    }
                    let after = &content[eq + 1..];
                    let vlead = after.len() - after.trim_start().len();
                    LineKind::KeyValue {
                        key: key.to_string(),
                        value: after.trim().to_string(),
                        value_col: eq + 2 + vlead,
                    }
                }
                None => LineKind::Raw {
                    text: trimmed.to_string(),
                    col: lead + 1,
                },
            };
            lines.push(DocLine {
                line: lineno,
                section: section.clone(),
                kind,
            });
        }
        Ok(Document { lines })
    }

    /// Key-value lines in `section` (`None` = before any header), in order.
    pub fn pairs<'a>(&'a self, section: Option<&'a str>) -> impl Iterator<Item = (&'a DocLine, &'a str, &'a str)> + 'a {
        self.lines.iter().filter_map(move |l| {
            if l.section.as_deref() != section {
                return None;
            }
            match &l.kind {
                LineKind::KeyValue { key, value, .. } => Some((l, key.as_str(), value.as_str())),
                LineKind::Raw { .. } => None,
            }
        })
    }

    pub fn get(&self, section: Option<&str>, key: &str) -> Option<&DocLine> {
        self.lines
            .iter()
            .rev()
            .filter(|l| l.section.as_deref() == section)
            .find(|l| matches!(&l.kind, LineKind::KeyValue { key: k, .. } if k == key))
    }

    pub fn sections(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for l in &self.lines {
            if let Some(s) = &l.section {
                if !out.contains(s) {
                    out.push(s.clone());
                }
            }
        }
        out
    }

    pub fn raw_lines<'a>(&'a self, section: &'a str) -> impl Iterator<Item = &'a DocLine> + 'a {
        self.lines
            .iter()
            .filter(move |l| l.section.as_deref() == Some(section) && matches!(l.kind, LineKind::Raw { .. }))
    }
}

impl DocLine {
    pub fn value(&self) -> (&str, usize) {
        match &self.kind {
            LineKind::KeyValue { value, value_col, .. } => (value.as_str(), *value_col),
            LineKind::Raw { text, col } => (text.as_str(), *col),
        }
    }

    pub fn err(&self, col: usize, msg: impl Into<String>) -> Error {
        Error::parse(self.line, col, msg)
    }

    pub fn parse_usize(&self) -> Result<usize> {
        let (v, col) = self.value();
        v.parse::<usize>()
            .map_err(|_| self.err(col, format!("expected a non-negative integer, found '{v}'")))
    }

    pub fn parse_f64(&self) -> Result<f64> {
        let (v, col) = self.value();
        v.parse::<f64>()
            .map_err(|_| self.err(col, format!("expected a real number, found '{v}'")))
    }

    pub fn parse_complex(&self, constants: &HashMap<String, Complex64>) -> Result<Complex64> {
        let (v, col) = self.value();
        parse_constant(v, constants).map_err(|e| shift(e, self.line, col))
    }
}

/// Re-anchor an error produced on a single-line snippet.
pub(crate) fn shift(e: Error, line: usize, col: usize) -> Error {
    match e {
        Error::Parse { col: c, msg, .. } => Error::Parse {
            line,
            col: col + c - 1,
            msg,
        },
        other => other,
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Imag(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i] as char;
        let col = i + 1;
        if ch.is_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() || ch == '.' {
            let start = i;
            while i < bytes.len() && ((bytes[i] as char).is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            // exponent part
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let v: f64 = text
                .parse()
                .map_err(|_| Error::parse(1, col, format!("malformed number '{text}'")))?;
            let imag =
                i < bytes.len() && bytes[i] == b'i' && !(i + 1 < bytes.len() && is_ident_char(bytes[i + 1] as char));
            if imag {
                i += 1;
                out.push((Tok::Imag(v), col));
            } else {
                out.push((Tok::Num(v), col));
            }
        } else if ch.is_ascii_alphabetic() || ch == '_' {
            let start = i;
            while i < bytes.len() && is_ident_char(bytes[i] as char) {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), col));
        } else if "+-*/^".contains(ch) {
            out.push((Tok::Op(ch), col));
            i += 1;
        } else if ch == '(' {
            out.push((Tok::LParen, col));
            i += 1;
        } else if ch == ')' {
            out.push((Tok::RParen, col));
            i += 1;
        } else {
            return Err(Error::parse(1, col, format!("unexpected character '{ch}'")));
        }
    }
    Ok(out)
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

struct ExprParser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_col: usize,
    vars: &'a [String],
    constants: &'a HashMap<String, Complex64>,
}

impl ExprParser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|(_, c)| *c).unwrap_or(self.end_col)
    }

    fn nvars(&self) -> usize {
        self.vars.len()
    }

    fn expr(&mut self) -> Result<Poly> {
        let mut acc = self.term()?;
        while let Some(Tok::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if op == '+' { &acc + &rhs } else { &acc - &rhs };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.unary()?;
        while let Some(Tok::Op(op @ ('*' | '/'))) = self.peek().cloned() {
            let col = self.col();
            self.pos += 1;
            let rhs = self.unary()?;
            if op == '*' {
                acc = &acc * &rhs;
            } else {
                let c = constant_value(&rhs)
                    .ok_or_else(|| Error::parse(1, col, "division by a non-constant expression"))?;
                if c.norm() == 0.0 {
                    return Err(Error::parse(1, col, "division by zero"));
                }
                acc = acc.scale(c.inv());
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Poly> {
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

    fn power(&mut self) -> Result<Poly> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let col = self.col();
            match self.peek().cloned() {
                Some(Tok::Num(k)) if k >= 0.0 && k.fract() == 0.0 && k <= 64.0 => {
                    self.pos += 1;
                    Ok(base.pow(k as u32))
                }
                _ => Err(Error::parse(1, col, "exponent must be a non-negative integer")),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Poly> {
        let col = self.col();
        let n = self.nvars();
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Poly::constant(n, Complex64::new(v, 0.0)))
            }
            Some(Tok::Imag(v)) => {
                self.pos += 1;
                Ok(Poly::constant(n, Complex64::new(0.0, v)))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if let Some(k) = self.vars.iter().position(|v| *v == name) {
                    Ok(Poly::var(n, k))
                } else if let Some(c) = self.constants.get(&name) {
                    Ok(Poly::constant(n, *c))
                } else if name == "i" {
                    Ok(Poly::constant(n, Complex64::new(0.0, 1.0)))
                } else {
                    Err(Error::parse(1, col, format!("unknown identifier '{name}'")))
                }
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                match self.peek() {
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => Err(Error::parse(1, self.col(), "expected ')'")),
                }
            }
            Some(t) => Err(Error::parse(1, col, format!("unexpected token {t:?}"))),
            None => Err(Error::parse(1, col, "unexpected end of expression")),
        }
    }
}

fn constant_value(p: &Poly) -> Option<Complex64> {
    if p.is_zero() {
        return Some(Complex64::new(0.0, 0.0));
    }
    if p.degree() == Some(0) {
        Some(p.coefficient(&vec![0; p.nvars()]))
    } else {
        None
    }
}

/// Parse a polynomial in the named variables. Errors report columns
/// relative to `src` (line 1).
pub fn parse_expr(src: &str, vars: &[String], constants: &HashMap<String, Complex64>) -> Result<Poly> {
    let toks = tokenize(src)?;
    let mut p = ExprParser {
        toks,
        pos: 0,
        end_col: src.len() + 1,
        vars,
        constants,
    };
    if p.toks.is_empty() {
        return Err(Error::parse(1, 1, "empty expression"));
    }
    let out = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::parse(1, p.col(), "trailing input after expression"));
    }
    Ok(out)
}

/// Parse a constant complex expression such as `0+2i`, `-1.5`, `1-0.5i`.
pub fn parse_constant(src: &str, constants: &HashMap<String, Complex64>) -> Result<Complex64> {
    let p = parse_expr(src, &[], constants)?;
    constant_value(&p).ok_or_else(|| Error::parse(1, 1, "expected a constant"))
}

pub fn parse_complex(src: &str) -> Result<Complex64> {
    parse_constant(src, &HashMap::new())
}

/// Split a comma- or whitespace-separated list, keeping 1-based columns.
pub fn split_list(src: &str) -> Vec<(&str, usize)> {
    let sep = if src.contains(',') { ',' } else { ' ' };
    let mut out = Vec::new();
    let mut start = 0;
    for (i, ch) in src.char_indices().chain(std::iter::once((src.len(), sep))) {
        if ch == sep {
            let piece = &src[start..i];
            let lead = piece.len() - piece.trim_start().len();
            if !piece.trim().is_empty() {
                out.push((piece.trim(), start + lead + 1));
            }
            start = i + ch.len_utf8();
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
    fn complex_literals() {
        assert_eq!(parse_complex("0+2i").unwrap(), Complex64::new(0.0, 2.0));
        assert_eq!(parse_complex("1-0.5i").unwrap(), Complex64::new(1.0, -0.5));
        assert_eq!(parse_complex("-3").unwrap(), Complex64::new(-3.0, 0.0));
        assert_eq!(
            parse_complex("2 i").unwrap_err().to_string(),
            "1:3: trailing input after expression"
        );
        assert_eq!(parse_complex("1e-3i").unwrap(), Complex64::new(0.0, 1e-3));
        assert_eq!(parse_complex("i").unwrap(), Complex64::new(0.0, 1.0));
    }

    #[test]
    fn polynomial_expression_with_constant() {
        let vars = names(&["t", "x", "y"]);
        let mut consts = HashMap::new();
        consts.insert("a".to_string(), Complex64::new(0.0, 2.0));
        let p = parse_expr("(1+a^2)*x", &vars, &consts).unwrap();
        assert_eq!(p.coefficient(&[0, 1, 0]), Complex64::new(-3.0, 0.0));
        let q = parse_expr("-a*x/2 + t^2", &vars, &consts).unwrap();
        assert_eq!(q.coefficient(&[0, 1, 0]), Complex64::new(0.0, -1.0));
        assert_eq!(q.coefficient(&[2, 0, 0]), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn errors_carry_columns() {
        let vars = names(&["x"]);
        let e = parse_expr("x + zz", &vars, &HashMap::new()).unwrap_err();
        assert_eq!(e.to_string(), "1:5: unknown identifier 'zz'");
        let e = parse_expr("1/x", &vars, &HashMap::new()).unwrap_err();
        assert!(e.to_string().contains("non-constant"));
        let e = parse_expr("x^-1", &vars, &HashMap::new()).unwrap_err();
        assert!(e.to_string().contains("exponent"));
    }

    #[test]
    fn document_sections_and_rows() {
        let src = "dimension = 2\n# note\n[A1]\n0, 1\n1, 0  # trailing\n[params]\nkappa = 16, 64\n";
        let doc = Document::parse(src).unwrap();
        assert_eq!(doc.get(None, "dimension").unwrap().parse_usize().unwrap(), 2);
        let rows: Vec<_> = doc.raw_lines("A1").collect();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].line, 5);
        assert_eq!(doc.sections(), vec!["A1".to_string(), "params".to_string()]);
        let (v, col) = doc.get(Some("params"), "kappa").unwrap().value();
        assert_eq!(v, "16, 64");
        assert_eq!(col, 9);
    }

    #[test]
    fn list_splitting() {
        let items = split_list("16, 64,256");
        assert_eq!(items, vec![("16", 1), ("64", 5), ("256", 8)]);
        let items = split_list("0 0  1");
        assert_eq!(items, vec![("0", 1), ("0", 3), ("1", 6)]);
    }
}
