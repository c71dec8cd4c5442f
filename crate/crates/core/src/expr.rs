//! Closed-form rules over `ε`, a point `x` and test-function tags.
//!
//! Expressions are the declarative vocabulary for nets, formulas,
//! generalized numbers and generalized points. `eps` reads the scale tag,
//! `gen_is("id")` reads the generator tag and `table(...)` case-matches
//! tags against recorded evidence. The text format printed by `Display`
//! parses back to an expression with the same printed form.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::jet::{univariate, Jet, JetSpace};
use crate::multiindex::{self, MultiIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
    Abs,
    /// `1/a` for `a ≠ 0`, `0` at `a = 0`.
    Recip,
    /// `1` at `a = 0`, `0` elsewhere.
    ZeroInd,
    /// `1` for `a > 0`, `0` elsewhere.
    Step,
    /// `1` when `a` is an integral power of two, `0` elsewhere.
    Dyadic,
    /// `exp(-1/(1-u²))` for `|u| < 1`, `0` elsewhere.
    Bump,
    /// `exp(-1/(1-s))` for `s < 1`, `0` elsewhere.
    BumpSq,
}

impl Func {
    pub const ALL: [Func; 12] = [
        Func::Sin,
        Func::Cos,
        Func::Exp,
        Func::Ln,
        Func::Sqrt,
        Func::Abs,
        Func::Recip,
        Func::ZeroInd,
        Func::Step,
        Func::Dyadic,
        Func::Bump,
        Func::BumpSq,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Recip => "recip",
            Func::ZeroInd => "zero_ind",
            Func::Step => "step",
            Func::Dyadic => "dyadic",
            Func::Bump => "bump",
            Func::BumpSq => "bumpsq",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == name)
    }

    pub fn apply(self, a: f64) -> f64 {
        match self {
            Func::Sin => a.sin(),
            Func::Cos => a.cos(),
            Func::Exp => a.exp(),
            Func::Ln => a.ln(),
            Func::Sqrt => a.sqrt(),
            Func::Abs => a.abs(),
            Func::Recip => {
                if a == 0.0 {
                    0.0
                } else {
                    1.0 / a
                }
            }
            Func::ZeroInd => indicator(a == 0.0),
            Func::Step => indicator(a > 0.0),
            Func::Dyadic => indicator(is_dyadic(a)),
            Func::Bump => univariate::bump_sq(a * a, 0)[0],
            Func::BumpSq => univariate::bump_sq(a, 0)[0],
        }
    }

    fn derivatives(self, a: f64, order: u32) -> Vec<f64> {
        let flat = |v: f64| {
            let mut d = vec![0.0; order as usize + 1];
            d[0] = v;
            d
        };
        match self {
            Func::Sin => univariate::sin(a, order),
            Func::Cos => univariate::cos(a, order),
            Func::Exp => univariate::exp(a, order),
            Func::Ln => univariate::ln(a, order),
            Func::Sqrt => univariate::power(a, 0.5, order),
            Func::Abs => {
                let mut d = flat(a.abs());
                if order >= 1 {
                    d[1] = a.signum();
                }
                d
            }
            Func::Recip => {
                if a == 0.0 {
                    vec![0.0; order as usize + 1]
                } else {
                    univariate::reciprocal(a, order)
                }
            }
            Func::ZeroInd | Func::Step | Func::Dyadic => flat(self.apply(a)),
            Func::BumpSq => univariate::bump_sq(a, order),
            Func::Bump => unreachable!("bump is composed through bumpsq"),
        }
    }
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// True when `a` is exactly `2^k` for an integer `k`.
pub fn is_dyadic(a: f64) -> bool {
    a > 0.0 && a.is_normal() && a.to_bits() & ((1u64 << 52) - 1) == 0
}

/// Relative tolerance for matching recorded scale tags.
pub const EPS_MATCH_TOL: f64 = 1e-12;

pub fn eps_matches(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= EPS_MATCH_TOL * b.abs()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub generator: Option<String>,
    pub eps: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub default: f64,
    pub entries: Vec<TableEntry>,
}

impl Table {
    pub fn lookup(&self, ctx: &EvalCtx) -> f64 {
        for entry in &self.entries {
            let gen_ok = match &entry.generator {
                None => true,
                Some(id) => !ctx.translated && ctx.generator == Some(id.as_str()),
            };
            if gen_ok && eps_matches(ctx.eps, entry.eps) {
                return entry.value;
            }
        }
        self.default
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Eps,
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Powi(Box<Expr>, i32),
    Call(Func, Box<Expr>),
    GenIs(String),
    Table(Arc<Table>),
}

/// What an expression may read.
#[derive(Debug, Clone, Copy)]
pub struct EvalCtx<'a> {
    pub eps: f64,
    pub x: &'a [f64],
    pub generator: Option<&'a str>,
    pub translated: bool,
}

impl<'a> EvalCtx<'a> {
    pub fn eps(eps: f64) -> Self {
        EvalCtx {
            eps,
            x: &[],
            generator: None,
            translated: false,
        }
    }

    pub fn at(eps: f64, x: &'a [f64]) -> Self {
        EvalCtx {
            eps,
            x,
            generator: None,
            translated: false,
        }
    }
}

impl Expr {
    pub fn c(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::Call(f, Box::new(a))
    }

    pub fn powi(self, k: i32) -> Expr {
        Expr::Powi(Box::new(self), k)
    }

    pub fn table(default: f64, entries: Vec<TableEntry>) -> Expr {
        Expr::Table(Arc::new(Table { default, entries }))
    }

    pub fn parse(text: &str) -> Result<Expr> {
        Parser::new(text)?.parse_all()
    }

    pub fn eval(&self, ctx: &EvalCtx) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Eps => ctx.eps,
            Expr::Var(i) => ctx.x.get(*i).copied().unwrap_or(f64::NAN),
            Expr::Neg(a) => -a.eval(ctx),
            Expr::Add(a, b) => a.eval(ctx) + b.eval(ctx),
            Expr::Sub(a, b) => a.eval(ctx) - b.eval(ctx),
            Expr::Mul(a, b) => a.eval(ctx) * b.eval(ctx),
            Expr::Div(a, b) => a.eval(ctx) / b.eval(ctx),
            Expr::Powi(a, k) => a.eval(ctx).powi(*k),
            Expr::Call(f, a) => f.apply(a.eval(ctx)),
            Expr::GenIs(id) => indicator(ctx.generator == Some(id.as_str())),
            Expr::Table(t) => t.lookup(ctx),
        }
    }

    /// Taylor jet in the point variables, expanded at `ctx.x`.
    pub fn eval_jet(&self, ctx: &EvalCtx, space: &Arc<JetSpace>) -> Jet<f64> {
        match self {
            Expr::Var(i) => match ctx.x.get(*i) {
                Some(&v) if *i < space.n => Jet::variable(space, *i, v),
                _ => Jet::constant(space, f64::NAN),
            },
            Expr::Const(_) | Expr::Eps | Expr::GenIs(_) | Expr::Table(_) => {
                Jet::constant(space, self.eval(ctx))
            }
            Expr::Neg(a) => a.eval_jet(ctx, space).neg(),
            Expr::Add(a, b) => a.eval_jet(ctx, space).add(&b.eval_jet(ctx, space)),
            Expr::Sub(a, b) => a.eval_jet(ctx, space).sub(&b.eval_jet(ctx, space)),
            Expr::Mul(a, b) => a.eval_jet(ctx, space).mul(&b.eval_jet(ctx, space)),
            Expr::Div(a, b) => {
                let denominator = b.eval_jet(ctx, space);
                let inv =
                    denominator.compose(&univariate::reciprocal(denominator.value(), space.order));
                a.eval_jet(ctx, space).mul(&inv)
            }
            Expr::Powi(a, k) => {
                let base = a.eval_jet(ctx, space);
                let positive = base.powi(k.unsigned_abs());
                if *k >= 0 {
                    positive
                } else {
                    positive.compose(&univariate::reciprocal(positive.value(), space.order))
                }
            }
            Expr::Call(Func::Bump, a) => {
                let u = a.eval_jet(ctx, space);
                let s = u.mul(&u);
                s.compose(&univariate::bump_sq(s.value(), space.order))
            }
            Expr::Call(f, a) => {
                let inner = a.eval_jet(ctx, space);
                inner.compose(&f.derivatives(inner.value(), space.order))
            }
        }
    }

    /// `∂^α` of the expression in the point variables.
    pub fn derivative_at(&self, ctx: &EvalCtx, alpha: &[u32]) -> f64 {
        if alpha.iter().all(|&a| a == 0) {
            return self.eval(ctx);
        }
        let space = JetSpace::get(alpha.len(), multiindex::degree(alpha));
        self.eval_jet(ctx, &space).derivative(alpha)
    }

    pub fn uses_eps(&self) -> bool {
        self.any(&|e| matches!(e, Expr::Eps | Expr::Table(_)))
    }

    pub fn uses_vars(&self) -> bool {
        self.any(&|e| matches!(e, Expr::Var(_)))
    }

    pub fn uses_tags(&self) -> bool {
        self.any(&|e| matches!(e, Expr::Eps | Expr::Table(_) | Expr::GenIs(_)))
    }

    /// One past the largest variable index read, or 0.
    pub fn var_bound(&self) -> usize {
        let mut bound = 0;
        self.visit(&mut |e| {
            if let Expr::Var(i) = e {
                bound = bound.max(i + 1);
            }
        });
        bound
    }

    fn any(&self, pred: &dyn Fn(&Expr) -> bool) -> bool {
        let mut found = false;
        self.visit(&mut |e| found |= pred(e));
        found
    }

    fn visit(&self, f: &mut dyn FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Neg(a) | Expr::Powi(a, _) | Expr::Call(_, a) => a.visit(f),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }

    /// Replace `Var(i)` by `replacements[i]`.
    pub fn substitute_vars(&self, replacements: &[Expr]) -> Expr {
        let sub = |e: &Expr| Box::new(e.substitute_vars(replacements));
        match self {
            Expr::Var(i) => replacements
                .get(*i)
                .cloned()
                .unwrap_or(Expr::Const(f64::NAN)),
            Expr::Neg(a) => Expr::Neg(sub(a)),
            Expr::Add(a, b) => Expr::Add(sub(a), sub(b)),
            Expr::Sub(a, b) => Expr::Sub(sub(a), sub(b)),
            Expr::Mul(a, b) => Expr::Mul(sub(a), sub(b)),
            Expr::Div(a, b) => Expr::Div(sub(a), sub(b)),
            Expr::Powi(a, k) => Expr::Powi(sub(a), *k),
            Expr::Call(f, a) => Expr::Call(*f, sub(a)),
            other => other.clone(),
        }
    }

    /// Exact polynomial form in `n` variables, when the expression is one.
    pub fn to_polynomial(&self, n: usize) -> Option<Polynomial> {
        match self {
            Expr::Const(c) => Some(Polynomial::constant(n, *c)),
            Expr::Var(i) if *i < n => Some(Polynomial::variable(n, *i)),
            Expr::Neg(a) => Some(a.to_polynomial(n)?.scale(-1.0)),
            Expr::Add(a, b) => Some(a.to_polynomial(n)?.add(&b.to_polynomial(n)?)),
            Expr::Sub(a, b) => Some(a.to_polynomial(n)?.add(&b.to_polynomial(n)?.scale(-1.0))),
            Expr::Mul(a, b) => Some(a.to_polynomial(n)?.mul(&b.to_polynomial(n)?)),
            Expr::Div(a, b) => match **b {
                Expr::Const(c) if c != 0.0 => Some(a.to_polynomial(n)?.scale(1.0 / c)),
                _ => None,
            },
            Expr::Powi(a, k) if *k >= 0 => {
                let base = a.to_polynomial(n)?;
                let mut out = Polynomial::constant(n, 1.0);
                for _ in 0..*k {
                    out = out.mul(&base);
                }
                Some(out)
            }
            _ => None,
        }
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Add(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::Div(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

/// Sparse real polynomial in `n` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub n: usize,
    pub terms: BTreeMap<MultiIndex, f64>,
}

impl Polynomial {
    pub fn constant(n: usize, c: f64) -> Self {
        let mut terms = BTreeMap::new();
        if c != 0.0 {
            terms.insert(vec![0; n], c);
        }
        Polynomial { n, terms }
    }

    pub fn variable(n: usize, i: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(multiindex::unit(n, i), 1.0);
        Polynomial { n, terms }
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|a| multiindex::degree(a))
            .max()
            .unwrap_or(0)
    }

    pub fn scale(&self, c: f64) -> Self {
        Polynomial {
            n: self.n,
            terms: self.terms.iter().map(|(a, v)| (a.clone(), v * c)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (a, v) in &other.terms {
            *terms.entry(a.clone()).or_insert(0.0) += v;
        }
        terms.retain(|_, v| *v != 0.0);
        Polynomial { n: self.n, terms }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms: BTreeMap<MultiIndex, f64> = BTreeMap::new();
        for (a, u) in &self.terms {
            for (b, v) in &other.terms {
                *terms.entry(multiindex::add(a, b)).or_insert(0.0) += u * v;
            }
        }
        terms.retain(|_, v| *v != 0.0);
        Polynomial { n: self.n, terms }
    }

    pub fn derivative(&self, alpha: &[u32]) -> Self {
        let mut terms = BTreeMap::new();
        for (gamma, &c) in &self.terms {
            if gamma.iter().zip(alpha).any(|(g, a)| g < a) {
                continue;
            }
            let mut factor = c;
            let mut reduced = gamma.clone();
            for (i, &a) in alpha.iter().enumerate() {
                for k in 0..a {
                    factor *= (gamma[i] - k) as f64;
                }
                reduced[i] -= a;
            }
            *terms.entry(reduced).or_insert(0.0) += factor;
        }
        Polynomial { n: self.n, terms }
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(a, c)| c * multiindex::monomial(y, a))
            .sum()
    }
}

// ---------------------------------------------------------------- printing

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write_number(f, *c),
            Expr::Eps => write!(f, "eps"),
            Expr::Var(i) => write!(f, "x{i}"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Powi(a, k) => write!(f, "({a} ^ {k})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
            Expr::GenIs(id) => write!(f, "gen_is(\"{id}\")"),
            Expr::Table(t) => {
                write!(f, "table(")?;
                write_number(f, t.default)?;
                write!(f, ", [")?;
                for (k, e) in t.entries.iter().enumerate() {
                    if k > 0 {
                        write!(f, ", ")?;
                    }
                    if let Some(id) = &e.generator {
                        write!(f, "\"{id}\" ")?;
                    }
                    write!(f, "@ ")?;
                    write_number(f, e.eps)?;
                    write!(f, " : ")?;
                    write_number(f, e.value)?;
                }
                write!(f, "])")
            }
        }
    }
}

fn write_number(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    if c.is_sign_negative() && !c.is_nan() {
        write!(f, "(-{:?})", -c)
    } else {
        write!(f, "{c:?}")
    }
}

// ----------------------------------------------------------------- parsing

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Str(String),
    Sym(char),
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

fn err(pos: usize, msg: impl fmt::Display) -> CoreError {
    CoreError::Expr(format!("at offset {pos}: {msg}"))
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit()
            || (c == '.' && i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit())
        {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s = &text[start..i];
            let v: f64 = s
                .parse()
                .map_err(|_| err(start, format!("bad number '{s}'")))?;
            out.push((start, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
        } else if c == '"' {
            let start = i;
            i += 1;
            while i < bytes.len() && bytes[i] != b'"' {
                i += 1;
            }
            if i >= bytes.len() {
                return Err(err(start, "unterminated string"));
            }
            out.push((start, Tok::Str(text[start + 1..i].to_string())));
            i += 1;
        } else if "+-*/^(),[]@:".contains(c) {
            out.push((i, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(err(i, format!("unexpected character '{c}'")));
        }
    }
    Ok(out)
}

impl Parser {
    fn new(text: &str) -> Result<Self> {
        Ok(Parser {
            toks: tokenize(text)?,
            pos: 0,
        })
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.0).unwrap_or(usize::MAX)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.1.clone());
        self.pos += 1;
        t
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        let at = self.offset();
        if self.eat(c) {
            Ok(())
        } else {
            Err(err(at, format!("expected '{c}'")))
        }
    }

    fn parse_all(mut self) -> Result<Expr> {
        let e = self.expr()?;
        if self.pos < self.toks.len() {
            return Err(err(self.offset(), "trailing input"));
        }
        Ok(e)
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = lhs + self.term()?;
            } else if self.eat('-') {
                lhs = lhs - self.term()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = lhs * self.unary()?;
            } else if self.eat('/') {
                lhs = lhs / self.unary()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            // a literal directly after the sign is a negative constant
            let literal = matches!(self.peek(), Some(Tok::Num(_)));
            let inner = self.unary()?;
            return Ok(match inner {
                Expr::Const(c) if literal => Expr::Const(-c),
                other => -other,
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat('^') {
            let at = self.offset();
            let negative = self.eat('-');
            match self.next() {
                Some(Tok::Num(v)) if v.fract() == 0.0 && v.abs() <= i32::MAX as f64 => {
                    let k = if negative { -(v as i32) } else { v as i32 };
                    return Ok(base.powi(k));
                }
                _ => return Err(err(at, "exponent must be an integer")),
            }
        }
        Ok(base)
    }

    fn signed_number(&mut self) -> Result<f64> {
        let at = self.offset();
        match self.unary()? {
            Expr::Const(c) => Ok(c),
            Expr::Neg(inner) => match *inner {
                Expr::Const(c) => Ok(-c),
                _ => Err(err(at, "expected a number")),
            },
            _ => Err(err(at, "expected a number")),
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        let at = self.offset();
        match self.next() {
            Some(Tok::Num(v)) => Ok(Expr::Const(v)),
            Some(Tok::Sym('(')) => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => self.ident(&name, at),
            Some(t) => Err(err(at, format!("unexpected token {t:?}"))),
            None => Err(err(at, "unexpected end of input")),
        }
    }

    fn ident(&mut self, name: &str, at: usize) -> Result<Expr> {
        match name {
            "eps" => return Ok(Expr::Eps),
            "pi" => return Ok(Expr::Const(std::f64::consts::PI)),
            "inf" => return Ok(Expr::Const(f64::INFINITY)),
            "NaN" | "nan" => return Ok(Expr::Const(f64::NAN)),
            "x" => return Ok(Expr::Var(0)),
            "y" => return Ok(Expr::Var(1)),
            "z" => return Ok(Expr::Var(2)),
            _ => {}
        }
        if let Some(rest) = name.strip_prefix('x') {
            if let Ok(i) = rest.parse::<usize>() {
                return Ok(Expr::Var(i));
            }
        }
        if name == "gen_is" {
            self.expect('(')?;
            let at = self.offset();
            let id = match self.next() {
                Some(Tok::Str(s)) => s,
                _ => return Err(err(at, "gen_is expects a quoted generator id")),
            };
            self.expect(')')?;
            return Ok(Expr::GenIs(id));
        }
        if name == "table" {
            self.expect('(')?;
            let default = self.signed_number()?;
            self.expect(',')?;
            self.expect('[')?;
            let mut entries = Vec::new();
            if !self.eat(']') {
                loop {
                    let generator = match self.peek() {
                        Some(Tok::Str(s)) => {
                            let s = s.clone();
                            self.pos += 1;
                            Some(s)
                        }
                        _ => None,
                    };
                    self.expect('@')?;
                    let eps = self.signed_number()?;
                    self.expect(':')?;
                    let value = self.signed_number()?;
                    entries.push(TableEntry {
                        generator,
                        eps,
                        value,
                    });
                    if self.eat(']') {
                        break;
                    }
                    self.expect(',')?;
                }
            }
            self.expect(')')?;
            return Ok(Expr::table(default, entries));
        }
        if let Some(func) = Func::from_name(name) {
            self.expect('(')?;
            let a = self.expr()?;
            self.expect(')')?;
            return Ok(Expr::call(func, a));
        }
        Err(err(at, format!("unknown identifier '{name}'")))
    }
}

impl Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Expr::parse(&text).map_err(serde::de::Error::custom)
    }
}
