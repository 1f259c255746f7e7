//! Arithmetic expressions evaluated through ensemble circuits.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! sum      := product (('+' | '-') product)*
//! product  := unary (('*' | '/') unary)*
//! unary    := '-' unary | power
//! power    := primary ('^' exponent)?
//! exponent := INTEGER ('^' exponent)?
//! primary  := NUMBER | '(' sum ')'
//! ```
//!
//! `^` binds tighter than unary minus (`-2^2` is `-(2^2)`) and is right
//! associative. Exponents are nonnegative integer literals; a chain such as
//! `2^3^2` folds to `2^9`.

use std::fmt;

use serde::Serialize;

use crate::arith::{self, Real4};
use crate::error::{Error, Result};
use crate::estimate::{self, EstimateReport, DEFAULT_LEVEL};
use crate::qcm::{EnsembleStore, EventFilter, EventKind};
use crate::scalar::Scalar;

/// Smallest divisor magnitude accepted by [`evaluate`], checked on exact values.
pub const DIVISOR_GUARD: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Literal(f64),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u64),
}

impl Expr {
    /// The expression with every literal replaced by `x`: two expressions
    /// with the same shape compile to the same circuit.
    pub fn shape(&self) -> String {
        match self {
            Expr::Literal(_) => "x".into(),
            Expr::Neg(e) => format!("(-{})", e.shape()),
            Expr::Add(a, b) => format!("({} + {})", a.shape(), b.shape()),
            Expr::Sub(a, b) => format!("({} - {})", a.shape(), b.shape()),
            Expr::Mul(a, b) => format!("({} * {})", a.shape(), b.shape()),
            Expr::Div(a, b) => format!("({} / {})", a.shape(), b.shape()),
            Expr::Pow(a, n) => format!("({} ^ {n})", a.shape()),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Literal(_) => 0,
            Expr::Neg(e) | Expr::Pow(e, _) => 1 + e.depth(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }
}

/// Canonical, fully parenthesised form. Parsing it gives back the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Literal(v) if *v < 0.0 => write!(f, "(-{})", -v),
            Expr::Literal(v) => write!(f, "{v}"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, n) => write!(f, "({a} ^ {n})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at offset {offset}: expected {}, found {found}", expected.join(" or "))]
pub struct ParseError {
    /// Byte offset of the offending token.
    pub offset: usize,
    pub expected: Vec<String>,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64, bool),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v, _) => write!(f, "number {v}"),
            Tok::Plus => f.write_str("'+'"),
            Tok::Minus => f.write_str("'-'"),
            Tok::Star => f.write_str("'*'"),
            Tok::Slash => f.write_str("'/'"),
            Tok::Caret => f.write_str("'^'"),
            Tok::LParen => f.write_str("'('"),
            Tok::RParen => f.write_str("')'"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

fn err(offset: usize, expected: &[&str], found: impl fmt::Display) -> ParseError {
    ParseError {
        offset,
        expected: expected.iter().map(|s| s.to_string()).collect(),
        found: found.to_string(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let single = match b {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = single {
            toks.push((t, i));
            i += 1;
            continue;
        }
        if b.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if b.is_ascii_digit() || b == b'.' {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let mut integer = true;
            if i < bytes.len() && bytes[i] == b'.' {
                integer = false;
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                integer = false;
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                } else {
                    return Err(err(j, &["exponent digits"], describe_at(text, j)));
                }
            }
            let lexeme = &text[start..i];
            let value = lexeme
                .parse::<f64>()
                .map_err(|_| err(start, &["number"], format!("'{lexeme}'")))?;
            toks.push((Tok::Num(value, integer), start));
            continue;
        }
        return Err(err(i, &["number", "'('", "operator"], describe_at(text, i)));
    }
    toks.push((Tok::End, text.len()));
    Ok(toks)
}

fn describe_at(text: &str, offset: usize) -> String {
    match text[offset..].chars().next() {
        Some(c) => format!("'{c}'"),
        None => "end of input".into(),
    }
}

struct Parser<'a> {
    text: &'a str,
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        loop {
            let ctor = match self.peek() {
                Tok::Plus => Expr::Add,
                Tok::Minus => Expr::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = ctor(Box::new(lhs), Box::new(self.product()?));
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let ctor = match self.peek() {
                Tok::Star => Expr::Mul,
                Tok::Slash => Expr::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = ctor(Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let n = self.exponent()?;
        Ok(Expr::Pow(Box::new(base), n))
    }

    fn exponent(&mut self) -> Result<u64, ParseError> {
        let offset = self.offset();
        let n = match self.bump() {
            (Tok::Num(v, true), _) if v <= u64::MAX as f64 => {
                let lexeme = self.text[offset..]
                    .split(|c: char| !c.is_ascii_digit())
                    .next()
                    .unwrap_or("");
                lexeme.parse::<u64>().map_err(|_| {
                    err(
                        offset,
                        &["integer exponent below 2^64"],
                        format!("'{lexeme}'"),
                    )
                })?
            }
            (t, _) => return Err(err(offset, &["nonnegative integer exponent"], t)),
        };
        if *self.peek() != Tok::Caret {
            return Ok(n);
        }
        self.bump();
        let rhs_offset = self.offset();
        let rhs = self.exponent()?;
        u32::try_from(rhs)
            .ok()
            .and_then(|r| n.checked_pow(r))
            .ok_or_else(|| {
                err(
                    rhs_offset,
                    &["exponent chain below 2^64"],
                    format!("{n}^{rhs}"),
                )
            })
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.bump() {
            (Tok::Num(v, _), _) => Ok(Expr::Literal(v)),
            (Tok::LParen, _) => {
                let inner = self.sum()?;
                let close = self.offset();
                match self.bump() {
                    (Tok::RParen, _) => Ok(inner),
                    (t, _) => Err(err(close, &["')'", "operator"], t)),
                }
            }
            (t, _) => Err(err(offset, &["number", "'('", "'-'"], t)),
        }
    }
}

pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        text,
        toks: lex(text)?,
        pos: 0,
    };
    let e = p.sum()?;
    match p.peek() {
        Tok::End => Ok(e),
        t => Err(err(p.offset(), &["operator", "end of input"], t.clone())),
    }
}

/// Floating-point value of the expression, rejecting divisors whose magnitude
/// is below [`DIVISOR_GUARD`].
pub fn exact_value(e: &Expr) -> Result<f64> {
    let v = match e {
        Expr::Literal(v) => *v,
        Expr::Neg(a) => -exact_value(a)?,
        Expr::Add(a, b) => exact_value(a)? + exact_value(b)?,
        Expr::Sub(a, b) => exact_value(a)? - exact_value(b)?,
        Expr::Mul(a, b) => exact_value(a)? * exact_value(b)?,
        Expr::Div(a, b) => {
            let num = exact_value(a)?;
            let d = exact_value(b)?;
            if d.abs() < DIVISOR_GUARD {
                return Err(Error::DivisorNearZero {
                    value: d,
                    floor: DIVISOR_GUARD,
                });
            }
            num / d
        }
        Expr::Pow(a, n) => {
            let base = exact_value(a)?;
            match i32::try_from(*n) {
                Ok(k) => base.powi(k),
                Err(_) => base.powf(*n as f64),
            }
        }
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Sampled { shots: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub mode: Mode,
    /// Re-encode every intermediate result (non-physical).
    pub renorm: bool,
    /// Confidence level for the sampled estimate.
    pub level: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            mode: Mode::Exact,
            renorm: true,
            level: DEFAULT_LEVEL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    /// Canonical form of the evaluated expression.
    pub expr: String,
    /// Floating-point oracle.
    pub exact: f64,
    /// Decoded value of the circuit's result.
    pub circuit: f64,
    pub abs_err: f64,
    /// `abs_err / |exact|`, or `abs_err` when the exact value is zero.
    pub rel_err: f64,
    pub physical_gates: usize,
    pub clones: usize,
    pub renorms: usize,
    /// `|r2(num)|` of the result.
    pub num_magnitude: f64,
    /// `|r2(den)|` of the result.
    pub den_magnitude: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<EstimateReport>,
}

impl EvalReport {
    /// Single-line JSON object; field order is fixed.
    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string(self)
    }
}

fn compile<T: Scalar>(store: &mut EnsembleStore<T>, e: &Expr, renorm: bool) -> Result<Real4> {
    let finish = |store: &mut EnsembleStore<T>, x: Real4| {
        if renorm {
            arith::renormalize(store, x)
        } else {
            Ok(x)
        }
    };
    match e {
        Expr::Literal(v) => arith::encode_real4(store, *v),
        Expr::Neg(a) => Ok(arith::neg_r4(compile(store, a, renorm)?)),
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
            let x = compile(store, a, renorm)?;
            let y = compile(store, b, renorm)?;
            let out = match e {
                Expr::Add(..) => arith::add_r4(store, x, y)?,
                Expr::Sub(..) => arith::sub_r4(store, x, y)?,
                Expr::Mul(..) => arith::mul_r4(store, x, y)?,
                _ => arith::div_r4(store, x, y)?,
            };
            finish(store, out)
        }
        Expr::Pow(a, n) => {
            let x = compile(store, a, renorm)?;
            arith::pow_r4(store, x, *n, renorm)
        }
    }
}

/// Evaluates `e` through the arithmetic circuits on `store` and compares the
/// decoded result with the floating-point oracle. Counters cover only the
/// events this evaluation adds to the store.
pub fn evaluate<T: Scalar>(
    e: &Expr,
    store: &mut EnsembleStore<T>,
    opts: &EvalOptions,
) -> Result<EvalReport> {
    let exact = exact_value(e)?;
    let physical_before = store.gate_count(&EventFilter::physical());
    let clones_before = store.gate_count(&EventFilter::kind(EventKind::Clone));
    let renorms_before = store.gate_count(&EventFilter::kind(EventKind::Renormalize));

    let result = compile(store, e, opts.renorm)?;
    let circuit = arith::r4(store, result)?;
    let (num_magnitude, den_magnitude) = arith::component_magnitudes(store, result)?;
    let estimate = match opts.mode {
        Mode::Exact => None,
        Mode::Sampled { shots, seed } => Some(estimate::estimate_real4(
            store, result, shots, seed, opts.level,
        )?),
    };
    let abs_err = (circuit - exact).abs();
    Ok(EvalReport {
        expr: e.to_string(),
        exact,
        circuit,
        abs_err,
        rel_err: if exact == 0.0 {
            abs_err
        } else {
            abs_err / exact.abs()
        },
        physical_gates: store.gate_count(&EventFilter::physical()) - physical_before,
        clones: store.gate_count(&EventFilter::kind(EventKind::Clone)) - clones_before,
        renorms: store.gate_count(&EventFilter::kind(EventKind::Renormalize)) - renorms_before,
        num_magnitude,
        den_magnitude,
        estimate,
    })
}

/// Parses and evaluates on a fresh `f64` store.
pub fn evaluate_str(text: &str, opts: &EvalOptions) -> Result<EvalReport> {
    let e = parse(text)?;
    evaluate(&e, &mut EnsembleStore::<f64>::new(), opts)
}
