//! Model files: a line-oriented text format and an equivalent JSON form.
//!
//! ```text
//! # the 2-sphere
//! model s2
//! [generators]
//! x : 2
//! y : 3
//! [differential]
//! d y = x^2
//! [expect]
//! chi = 2
//! m = 2
//! dims = 1 0 1
//! ```
//!
//! Differentials not listed are zero. The full grammar is in
//! `docs/model-format.md`.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algebra::{Generator, GeneratorTable, Poly, Rational};
use crate::cdga::Cdga;
use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expectations {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
}

impl Expectations {
    fn is_empty(&self) -> bool {
        self.chi.is_none() && self.m.is_none() && self.dims.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub name: String,
    pub degree: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DifferentialSpec {
    pub generator: String,
    pub value: String,
}

/// A parsed and validated model description.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    pub generators: Vec<GeneratorSpec>,
    #[serde(default)]
    pub differential: Vec<DifferentialSpec>,
    #[serde(default, skip_serializing_if = "Expectations::is_empty")]
    pub expect: Expectations,
}

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(is_ident_start) && chars.all(is_ident_char)
}

#[derive(PartialEq)]
enum Section {
    Header,
    Generators,
    Differential,
    Expect,
}

impl ModelSpec {
    /// Parses either format; JSON is recognized by a leading `{`.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            let spec = serde_json::from_str::<ModelSpec>(text).map_err(|e| {
                parse_error(e.line(), e.column(), format!("invalid JSON model: {e}"))
            })?;
            spec.check(&[])?;
            Ok(spec)
        } else {
            Self::parse_text(text)
        }
    }

    fn parse_text(text: &str) -> Result<Self> {
        let mut name = None;
        let mut generators = Vec::new();
        let mut differential = Vec::new();
        let mut expect = Expectations::default();
        let mut section = Section::Header;
        let mut diff_lines = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line_no = ln + 1;
            let line = raw.split('#').next().unwrap_or("");
            let indent = line.len() - line.trim_start().len();
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let col = indent + 1;
            if line.starts_with('[') {
                section = match line {
                    "[generators]" => Section::Generators,
                    "[differential]" => Section::Differential,
                    "[expect]" => Section::Expect,
                    _ => return Err(parse_error(line_no, col, format!("unknown section {line}"))),
                };
                continue;
            }
            match section {
                Section::Header => {
                    let rest = line
                        .strip_prefix("model")
                        .filter(|r| r.starts_with(char::is_whitespace))
                        .ok_or_else(|| parse_error(line_no, col, "expected `model <name>`"))?;
                    let n = rest.trim();
                    if n.is_empty() || n.contains(char::is_whitespace) {
                        return Err(parse_error(line_no, col, "model name must be one word"));
                    }
                    if name.is_some() {
                        return Err(parse_error(line_no, col, "duplicate model line"));
                    }
                    name = Some(n.to_string());
                }
                Section::Generators => {
                    let (g, d) = line
                        .split_once(':')
                        .ok_or_else(|| parse_error(line_no, col, "expected `name : degree`"))?;
                    let g = g.trim();
                    if !is_identifier(g) {
                        return Err(parse_error(line_no, col, format!("invalid generator name `{g}`")));
                    }
                    let d_col = col + line.find(':').unwrap_or(0) + 1;
                    let degree: u32 = d.trim().parse().map_err(|_| {
                        parse_error(line_no, d_col, format!("invalid degree `{}`", d.trim()))
                    })?;
                    generators.push(GeneratorSpec {
                        name: g.to_string(),
                        degree,
                    });
                }
                Section::Differential => {
                    let rest = line
                        .strip_prefix('d')
                        .filter(|r| r.starts_with(char::is_whitespace))
                        .ok_or_else(|| parse_error(line_no, col, "expected `d <generator> = <expression>`"))?;
                    let (g, expr) = rest
                        .split_once('=')
                        .ok_or_else(|| parse_error(line_no, col, "expected `=`"))?;
                    let g = g.trim();
                    if !is_identifier(g) {
                        return Err(parse_error(line_no, col + 2, format!("invalid generator name `{g}`")));
                    }
                    let expr_col = col + line.find('=').unwrap_or(0) + 1;
                    let lead = expr.len() - expr.trim_start().len();
                    diff_lines.push((line_no, expr_col + lead));
                    differential.push(DifferentialSpec {
                        generator: g.to_string(),
                        value: expr.trim().to_string(),
                    });
                }
                Section::Expect => {
                    let (key, value) = line
                        .split_once('=')
                        .ok_or_else(|| parse_error(line_no, col, "expected `key = value`"))?;
                    let value = value.trim();
                    let bad = |what: &str| parse_error(line_no, col, format!("invalid {what} `{value}`"));
                    match key.trim() {
                        "chi" => expect.chi = Some(value.parse().map_err(|_| bad("chi"))?),
                        "m" => expect.m = Some(value.parse().map_err(|_| bad("m"))?),
                        "dims" => {
                            expect.dims = Some(
                                value
                                    .split_whitespace()
                                    .map(|v| v.parse().map_err(|_| bad("dims")))
                                    .collect::<Result<_>>()?,
                            )
                        }
                        other => {
                            return Err(parse_error(line_no, col, format!("unknown expectation `{other}`")))
                        }
                    }
                }
            }
        }
        let name = name.ok_or_else(|| parse_error(1, 1, "missing `model <name>` line"))?;
        let spec = ModelSpec {
            name,
            generators,
            differential,
            expect,
        };
        spec.check(&diff_lines)?;
        Ok(spec)
    }

    /// Programmatic construction; `d` lists the differential of each
    /// generator in order.
    pub fn from_parts(name: &str, gens: &[(&str, u32)], d: &[&str]) -> Result<Self> {
        let spec = ModelSpec {
            name: name.into(),
            generators: gens
                .iter()
                .map(|(n, k)| GeneratorSpec {
                    name: n.to_string(),
                    degree: *k,
                })
                .collect(),
            differential: gens
                .iter()
                .zip(d)
                .filter(|(_, v)| v.trim() != "0")
                .map(|((n, _), v)| DifferentialSpec {
                    generator: n.to_string(),
                    value: v.to_string(),
                })
                .collect(),
            expect: Expectations::default(),
        };
        spec.check(&[])?;
        Ok(spec)
    }

    fn table_unchecked(&self) -> Result<GeneratorTable> {
        GeneratorTable::new(
            self.generators
                .iter()
                .map(|g| Generator::base(g.name.clone(), g.degree))
                .collect(),
        )
    }

    /// Validates names, degrees and differentials. `positions` gives the
    /// source line and expression column of each differential, when known.
    fn check(&self, positions: &[(usize, usize)]) -> Result<()> {
        let at = |i: usize, offset: usize| positions.get(i).map_or((0, 0), |&(l, c)| (l, c + offset));
        for g in &self.generators {
            if !is_identifier(&g.name) {
                return Err(parse_error(0, 0, format!("invalid generator name `{}`", g.name)));
            }
        }
        let table = self
            .table_unchecked()
            .map_err(|e| parse_error(0, 0, e.to_string()))?;
        let mut seen = vec![false; table.len()];
        for (n, ds) in self.differential.iter().enumerate() {
            let (line, col) = at(n, 0);
            let i = table
                .index_of(&ds.generator)
                .ok_or_else(|| parse_error(line, col, format!("unknown generator {}", ds.generator)))?;
            if std::mem::replace(&mut seen[i], true) {
                return Err(parse_error(line, col, format!("differential of {} given twice", ds.generator)));
            }
            let p = parse_expression(&ds.value, &table).map_err(|(c, msg)| {
                let (line, col) = at(n, c);
                parse_error(line, col, msg)
            })?;
            let want = table.degree(i) + 1;
            if !p.is_homogeneous_of(want) {
                return Err(parse_error(
                    line,
                    col,
                    format!(
                        "inhomogeneous differential: d {} = {} is not of degree {want}",
                        ds.generator, ds.value
                    ),
                ));
            }
        }
        Ok(())
    }

    pub fn to_cdga(&self) -> Result<Cdga> {
        let table = self.table_unchecked()?;
        let mut d = vec![Poly::zero(); table.len()];
        for ds in &self.differential {
            let i = table
                .index_of(&ds.generator)
                .ok_or_else(|| Error::ModelConstruction(format!("unknown generator {}", ds.generator)))?;
            d[i] = parse_expression(&ds.value, &table)
                .map_err(|(c, msg)| parse_error(0, c, msg))?;
        }
        Cdga::new(self.name.clone(), table, d)
    }

    /// Canonical text form; parsing it returns an equal spec.
    pub fn to_text(&self) -> String {
        let mut s = format!("model {}\n[generators]\n", self.name);
        for g in &self.generators {
            s.push_str(&format!("{} : {}\n", g.name, g.degree));
        }
        if !self.differential.is_empty() {
            s.push_str("[differential]\n");
            for d in &self.differential {
                s.push_str(&format!("d {} = {}\n", d.generator, d.value));
            }
        }
        if !self.expect.is_empty() {
            s.push_str("[expect]\n");
            if let Some(c) = self.expect.chi {
                s.push_str(&format!("chi = {c}\n"));
            }
            if let Some(m) = self.expect.m {
                s.push_str(&format!("m = {m}\n"));
            }
            if let Some(d) = &self.expect.dims {
                let parts: Vec<String> = d.iter().map(|x| x.to_string()).collect();
                s.push_str(&format!("dims = {}\n", parts.join(" ")));
            }
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable spec")
    }

    /// SHA-256 of the canonical text form, hex encoded.
    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(u64),
    Ident(String),
    Sym(char),
}

type ExprResult<T> = std::result::Result<T, (usize, String)>;

fn tokenize(src: &str) -> ExprResult<Vec<(usize, Token)>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let n = s
                .parse()
                .map_err(|_| (start, format!("number `{s}` is too large")))?;
            out.push((start, Token::Num(n)));
        } else if is_ident_start(c) {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            out.push((start, Token::Ident(chars[start..i].iter().collect())));
        } else if "+-*^()/".contains(c) {
            out.push((i, Token::Sym(c)));
            i += 1;
        } else {
            return Err((i, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct ExprParser<'a> {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
    table: &'a GeneratorTable,
}

impl ExprParser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn column(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(c, _)| *c)
    }

    fn expr(&mut self) -> ExprResult<Poly> {
        let mut acc = Poly::zero();
        let mut negative = false;
        if let Some(Token::Sym(c @ ('+' | '-'))) = self.peek() {
            negative = *c == '-';
            self.pos += 1;
        }
        loop {
            let t = self.term()?;
            acc = if negative { acc - t } else { acc + t };
            match self.peek() {
                Some(Token::Sym(c @ ('+' | '-'))) => {
                    negative = *c == '-';
                    self.pos += 1;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn starts_factor(&self) -> bool {
        matches!(
            self.peek(),
            Some(Token::Num(_)) | Some(Token::Ident(_)) | Some(Token::Sym('('))
        )
    }

    fn term(&mut self) -> ExprResult<Poly> {
        let mut acc = self.factor()?;
        loop {
            if let Some(Token::Sym('*')) = self.peek() {
                self.pos += 1;
            } else if !self.starts_factor() {
                return Ok(acc);
            }
            let f = self.factor()?;
            acc = self.table.mul(&acc, &f);
        }
    }

    fn factor(&mut self) -> ExprResult<Poly> {
        let col = self.column();
        let (atom, odd_gen) = self.atom()?;
        if let Some(Token::Sym('^')) = self.peek() {
            self.pos += 1;
            let e_col = self.column();
            let e = match self.peek() {
                Some(Token::Num(n)) => *n,
                _ => return Err((e_col, "expected a nonnegative integer exponent".into())),
            };
            self.pos += 1;
            if let Some(name) = odd_gen {
                if e > 1 {
                    return Err((col, format!("odd generator {name} raised to power {e}")));
                }
            }
            let e = u32::try_from(e).map_err(|_| (e_col, "exponent too large".to_string()))?;
            return Ok(self.table.pow(&atom, e));
        }
        Ok(atom)
    }

    fn atom(&mut self) -> ExprResult<(Poly, Option<String>)> {
        let col = self.column();
        match self.peek().cloned() {
            Some(Token::Num(n)) => {
                self.pos += 1;
                let mut q = Rational::from_integer(n.into());
                if let Some(Token::Sym('/')) = self.peek() {
                    self.pos += 1;
                    match self.peek() {
                        Some(Token::Num(0)) => return Err((self.column(), "division by zero".into())),
                        Some(Token::Num(d)) => {
                            q /= Rational::from_integer((*d).into());
                            self.pos += 1;
                        }
                        _ => return Err((self.column(), "expected a denominator".into())),
                    }
                }
                Ok((self.table.constant(q), None))
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                let i = self
                    .table
                    .index_of(&name)
                    .ok_or_else(|| (col, format!("unknown generator {name}")))?;
                let odd = self.table.is_odd(i).then_some(name);
                Ok((self.table.gen(i), odd))
            }
            Some(Token::Sym('(')) => {
                self.pos += 1;
                let inner = self.expr()?;
                match self.peek() {
                    Some(Token::Sym(')')) => {
                        self.pos += 1;
                        Ok((inner, None))
                    }
                    _ => Err((self.column(), "expected `)`".into())),
                }
            }
            Some(Token::Sym(c)) => Err((col, format!("unexpected `{c}`"))),
            None => Err((col, "unexpected end of expression".into())),
        }
    }
}

/// Parses an expression over `table`. Errors carry a 0-based character
/// offset into `src`.
pub fn parse_expression(src: &str, table: &GeneratorTable) -> ExprResult<Poly> {
    let tokens = tokenize(src)?;
    let mut p = ExprParser {
        tokens,
        pos: 0,
        end: src.chars().count(),
        table,
    };
    let out = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err((p.column(), "unexpected trailing input".into()));
    }
    Ok(out)
}

/// Parses an expression that is known to be well formed.
pub fn poly(table: &GeneratorTable, src: &str) -> Poly {
    parse_expression(src, table).unwrap_or_else(|(c, m)| panic!("bad expression `{src}` at {c}: {m}"))
}
