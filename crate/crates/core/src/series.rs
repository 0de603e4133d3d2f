//! Truncated power series in `(z, ζ)` over the rationals, a small expression
//! language, polynomial maps, and verification of factorization chains.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::Rational;
use crate::germ::{Germ, GermError};

/// Default truncation degree for verification.
pub const DEFAULT_ORDER: u32 = 10;

/// Exponents `(a, b)` of `z^a ζ^b`.
pub type Monomial = (u32, u32);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("series has zero constant term and cannot be inverted")]
    NonUnit,
    #[error("precision {got} is below the required order {needed}")]
    OrderMismatch { needed: u32, got: u32 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown symbol {0:?}")]
    UnknownSymbol(String),
    #[error("not a polynomial: {0}")]
    NotPolynomial(String),
    #[error("relation for {name} fails: coefficient of z^{}ζ^{} is {coefficient}, expected 0", .monomial.0, .monomial.1)]
    RelationViolation {
        name: String,
        monomial: Monomial,
        coefficient: Rational,
    },
    #[error("order must be at least {min}, got {got}")]
    InvalidOrder { min: u32, got: u32 },
    #[error(transparent)]
    Germ(#[from] GermError),
}

/// A series known up to total degree `order`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    order: u32,
    coeffs: BTreeMap<Monomial, Rational>,
}

impl TruncatedSeries {
    pub fn zero(order: u32) -> Self {
        TruncatedSeries {
            order,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn monomial(c: Rational, a: u32, b: u32, order: u32) -> Self {
        let mut s = Self::zero(order);
        s.insert((a, b), c);
        s
    }

    pub fn constant(c: Rational, order: u32) -> Self {
        Self::monomial(c, 0, 0, order)
    }

    pub fn one(order: u32) -> Self {
        Self::constant(Rational::one(), order)
    }

    pub fn z(order: u32) -> Self {
        Self::monomial(Rational::one(), 1, 0, order)
    }

    pub fn zeta(order: u32) -> Self {
        Self::monomial(Rational::one(), 0, 1, order)
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rational)>>(terms: I, order: u32) -> Self {
        let mut s = Self::zero(order);
        for (m, c) in terms {
            let v = s.coeff(m) + c;
            s.insert(m, v);
        }
        s
    }

    fn insert(&mut self, m: Monomial, c: Rational) {
        if m.0 + m.1 > self.order || c.is_zero() {
            self.coeffs.remove(&m);
        } else {
            self.coeffs.insert(m, c);
        }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coeff(&self, m: Monomial) -> Rational {
        self.coeffs.get(&m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Lowest total degree present, or `order + 1` when the series is zero.
    pub fn valuation(&self) -> u32 {
        self.coeffs
            .keys()
            .map(|(a, b)| a + b)
            .min()
            .unwrap_or(self.order + 1)
    }

    pub fn truncate(&self, order: u32) -> Self {
        let order = order.min(self.order);
        TruncatedSeries {
            order,
            coeffs: self
                .coeffs
                .iter()
                .filter(|((a, b), _)| a + b <= order)
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.order.min(other.order);
        let mut out = self.truncate(order);
        for (m, c) in &other.coeffs {
            let v = out.coeff(*m) + c;
            out.insert(*m, v);
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&Rational::from(-1))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero(self.order);
        for (m, v) in &self.coeffs {
            out.insert(*m, v * c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let order = (self.order + other.valuation())
            .min(other.order + self.valuation())
            .min(self.order.max(other.order));
        let mut out: BTreeMap<Monomial, Rational> = BTreeMap::new();
        for (&(a1, b1), c1) in &self.coeffs {
            for (&(a2, b2), c2) in &other.coeffs {
                if a1 + a2 + b1 + b2 > order {
                    continue;
                }
                let e = out.entry((a1 + a2, b1 + b2)).or_insert_with(Rational::zero);
                *e = &*e + &(c1 * c2);
            }
        }
        out.retain(|_, c| !c.is_zero());
        TruncatedSeries { order, coeffs: out }
    }

    pub fn invert_unit(&self) -> Result<Self, SeriesError> {
        let c0 = self.coeff((0, 0));
        let inv0 = c0.recip().map_err(|_| SeriesError::NonUnit)?;
        let n = self.order;
        let mut t = Self::constant(inv0.clone(), n);
        for d in 1..=n {
            for a in 0..=d {
                let b = d - a;
                let mut acc = Rational::zero();
                for (&(i, j), s) in &self.coeffs {
                    if (i, j) == (0, 0) || i > a || j > b {
                        continue;
                    }
                    acc = acc + s * &t.coeff((a - i, b - j));
                }
                t.insert((a, b), -(acc * &inv0));
            }
        }
        Ok(t)
    }

    /// Integer power; negative exponents invert a unit.
    pub fn pow(&self, e: i64) -> Result<Self, SeriesError> {
        let base = if e < 0 { self.invert_unit()? } else { self.clone() };
        let mut n = e.unsigned_abs();
        let mut acc = Self::one(base.order);
        let mut sq = base;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&sq);
            }
            n >>= 1;
            if n > 0 {
                sq = sq.mul(&sq);
            }
        }
        Ok(acc)
    }

    /// Divides by `ζ^k`, requiring every coefficient with `ζ`-degree below `k` to vanish.
    pub fn div_zeta_power(&self, k: u32, name: &str) -> Result<Self, SeriesError> {
        if let Some((m, c)) = self.coeffs.iter().find(|((_, b), _)| *b < k) {
            return Err(SeriesError::RelationViolation {
                name: name.to_string(),
                monomial: *m,
                coefficient: c.clone(),
            });
        }
        if k > self.order {
            return Err(SeriesError::OrderMismatch {
                needed: k,
                got: self.order,
            });
        }
        Ok(TruncatedSeries {
            order: self.order - k,
            coeffs: self.coeffs.iter().map(|(&(a, b), c)| ((a, b - k), c.clone())).collect(),
        })
    }

    /// Terms sorted by total degree, then by `z`-degree.
    pub fn graded_terms(&self) -> Vec<(Monomial, Rational)> {
        let mut v: Vec<_> = self.coeffs.iter().map(|(m, c)| (*m, c.clone())).collect();
        v.sort_by_key(|((a, b), _)| (a + b, *a));
        v
    }
}

fn monomial_string(a: u32, b: u32) -> String {
    let part = |v: &str, e: u32| match e {
        0 => String::new(),
        1 => v.to_string(),
        e => format!("{v}^{e}"),
    };
    let zs = part("z", a);
    let ws = part("ζ", b);
    match (zs.is_empty(), ws.is_empty()) {
        (true, true) => "1".into(),
        (false, false) => format!("{zs}*{ws}"),
        _ => format!("{zs}{ws}"),
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for ((a, b), c) in self.graded_terms() {
            let mono = monomial_string(a, b);
            let neg = c.is_negative();
            let mag = c.abs();
            let body = if mono == "1" {
                mag.to_string()
            } else if mag.is_one() {
                mono
            } else {
                format!("{mag}*{mono}")
            };
            match (first, neg) {
                (true, true) => write!(f, "-{body}")?,
                (true, false) => write!(f, "{body}")?,
                (false, true) => write!(f, " - {body}")?,
                (false, false) => write!(f, " + {body}")?,
            }
            first = false;
        }
        if first {
            f.write_str("0")?;
        }
        write!(f, " + O({})", self.order + 1)
    }
}

/// Parsed expression tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Num(Rational),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(num_bigint::BigInt),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<Token>, SeriesError> {
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
            out.push(Token::Num(s.parse().map_err(|_| SeriesError::Parse(s.clone()))?));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()·×−".contains(c) {
            let op = match c {
                '·' | '×' => '*',
                '−' => '-',
                c => c,
            };
            out.push(Token::Op(op));
            i += 1;
        } else {
            return Err(SeriesError::Parse(format!("unexpected character {c:?} in {src:?}")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn peek_op(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some(Token::Op(c)) => Some(*c),
            _ => None,
        }
    }

    fn err(&self, msg: &str) -> SeriesError {
        SeriesError::Parse(format!("{msg} at token {} in {:?}", self.pos, self.src))
    }

    fn expr(&mut self) -> Result<Expr, SeriesError> {
        let mut lhs = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, SeriesError> {
        let mut lhs = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' {
                Expr::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, SeriesError> {
        if self.peek_op() == Some('-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.peek_op() == Some('+') {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, SeriesError> {
        let base = self.atom()?;
        if self.peek_op() != Some('^') {
            return Ok(base);
        }
        self.pos += 1;
        let mut sign = 1i64;
        while let Some(op @ ('-' | '+')) = self.peek_op() {
            if op == '-' {
                sign = -sign;
            }
            self.pos += 1;
        }
        let paren = self.peek_op() == Some('(');
        if paren {
            self.pos += 1;
            if self.peek_op() == Some('-') {
                sign = -sign;
                self.pos += 1;
            }
        }
        let e = match self.tokens.get(self.pos) {
            Some(Token::Num(n)) => i64::try_from(n.clone()).map_err(|_| self.err("exponent too large"))?,
            _ => return Err(self.err("expected an integer exponent")),
        };
        self.pos += 1;
        if paren {
            if self.peek_op() != Some(')') {
                return Err(self.err("expected ')'"));
            }
            self.pos += 1;
        }
        Ok(Expr::Pow(Box::new(base), sign * e))
    }

    fn atom(&mut self) -> Result<Expr, SeriesError> {
        match self.tokens.get(self.pos).cloned() {
            Some(Token::Num(n)) => {
                self.pos += 1;
                Ok(Expr::Num(Rational::from(n)))
            }
            Some(Token::Ident(s)) => {
                self.pos += 1;
                Ok(Expr::Var(s))
            }
            Some(Token::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek_op() != Some(')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            _ => Err(self.err("expected a number, name or '('")),
        }
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, SeriesError> {
        let mut p = Parser {
            tokens: tokenize(src)?,
            pos: 0,
            src,
        };
        let e = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(p.err("trailing input"));
        }
        Ok(e)
    }

    /// Evaluates with `z`, `zeta`/`ζ` as series variables.
    pub fn eval_series(&self, env: &SeriesEnv) -> Result<TruncatedSeries, SeriesError> {
        let n = env.order;
        Ok(match self {
            Expr::Num(r) => TruncatedSeries::constant(r.clone(), n),
            Expr::Var(v) => match v.as_str() {
                "z" => TruncatedSeries::z(n),
                "zeta" | "ζ" => TruncatedSeries::zeta(n),
                _ => {
                    if let Some(s) = env.series.get(v) {
                        s.clone()
                    } else if let Some(r) = env.assignment.get(v) {
                        TruncatedSeries::constant(r.clone(), n)
                    } else {
                        return Err(SeriesError::UnknownSymbol(v.clone()));
                    }
                }
            },
            Expr::Neg(e) => e.eval_series(env)?.neg(),
            Expr::Add(a, b) => a.eval_series(env)?.add(&b.eval_series(env)?),
            Expr::Sub(a, b) => a.eval_series(env)?.sub(&b.eval_series(env)?),
            Expr::Mul(a, b) => a.eval_series(env)?.mul(&b.eval_series(env)?),
            Expr::Div(a, b) => a.eval_series(env)?.mul(&b.eval_series(env)?.invert_unit()?),
            Expr::Pow(b, e) => b.eval_series(env)?.pow(*e)?,
        })
    }

    /// Evaluates as a polynomial in `u`, `v`.
    pub fn eval_poly(&self, assignment: &HashMap<String, Rational>) -> Result<Poly2, SeriesError> {
        Ok(match self {
            Expr::Num(r) => Poly2::constant(r.clone()),
            Expr::Var(v) => match v.as_str() {
                "u" => Poly2::var(0),
                "v" => Poly2::var(1),
                _ => Poly2::constant(
                    assignment
                        .get(v)
                        .cloned()
                        .ok_or_else(|| SeriesError::UnknownSymbol(v.clone()))?,
                ),
            },
            Expr::Neg(e) => e.eval_poly(assignment)?.scale(&Rational::from(-1)),
            Expr::Add(a, b) => a.eval_poly(assignment)?.add(&b.eval_poly(assignment)?),
            Expr::Sub(a, b) => a
                .eval_poly(assignment)?
                .add(&b.eval_poly(assignment)?.scale(&Rational::from(-1))),
            Expr::Mul(a, b) => a.eval_poly(assignment)?.mul(&b.eval_poly(assignment)?),
            Expr::Div(a, b) => {
                let d = b.eval_poly(assignment)?;
                let c = d
                    .as_constant()
                    .and_then(|c| c.recip().ok())
                    .ok_or_else(|| SeriesError::NotPolynomial("division by a non-constant".into()))?;
                a.eval_poly(assignment)?.scale(&c)
            }
            Expr::Pow(b, e) => {
                if *e < 0 {
                    return Err(SeriesError::NotPolynomial("negative exponent".into()));
                }
                let base = b.eval_poly(assignment)?;
                let mut acc = Poly2::constant(Rational::one());
                for _ in 0..*e {
                    acc = acc.mul(&base);
                }
                acc
            }
        })
    }
}

/// Bindings for [`Expr::eval_series`].
#[derive(Debug, Clone, Default)]
pub struct SeriesEnv {
    pub order: u32,
    pub assignment: HashMap<String, Rational>,
    pub series: HashMap<String, TruncatedSeries>,
}

/// Polynomial in `(u, v)` with finite support.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly2 {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly2 {
    pub fn constant(c: Rational) -> Self {
        let mut p = Poly2::default();
        if !c.is_zero() {
            p.terms.insert((0, 0), c);
        }
        p
    }

    /// `u` for 0, `v` for 1.
    pub fn var(i: usize) -> Self {
        let mut p = Poly2::default();
        p.terms.insert(if i == 0 { (1, 0) } else { (0, 1) }, Rational::one());
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&(0, 0)).cloned(),
            _ => None,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            let v = out.terms.get(m).cloned().unwrap_or_else(Rational::zero) + c;
            if v.is_zero() {
                out.terms.remove(m);
            } else {
                out.terms.insert(*m, v);
            }
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Poly2 {
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (*m, v * c))
                .filter(|(_, v)| !v.is_zero())
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Poly2::default();
        for (&(a1, b1), c1) in &self.terms {
            for (&(a2, b2), c2) in &other.terms {
                out = out.add(&Poly2 {
                    terms: [((a1 + a2, b1 + b2), c1 * c2)].into_iter().collect(),
                });
            }
        }
        out
    }

    /// `p(U, V)` truncated at `order`.
    pub fn eval(&self, u: &TruncatedSeries, v: &TruncatedSeries, order: u32) -> TruncatedSeries {
        let mut upow = vec![TruncatedSeries::one(order)];
        let mut vpow = vec![TruncatedSeries::one(order)];
        let mut acc = TruncatedSeries::zero(order.min(u.order()).min(v.order()));
        for (&(a, b), c) in &self.terms {
            while upow.len() <= a as usize {
                let next = upow.last().unwrap().mul(u).truncate(order);
                upow.push(next);
            }
            while vpow.len() <= b as usize {
                let next = vpow.last().unwrap().mul(v).truncate(order);
                vpow.push(next);
            }
            let term = upow[a as usize].mul(&vpow[b as usize]).scale(c).truncate(order);
            acc = acc.add(&term);
        }
        acc
    }
}

/// A polynomial map `(u, v) ↦ (p₀(u,v), p₁(u,v))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMap {
    pub components: [Poly2; 2],
}

impl PolyMap {
    pub fn parse(exprs: &[String; 2], assignment: &HashMap<String, Rational>) -> Result<PolyMap, SeriesError> {
        Ok(PolyMap {
            components: [
                Expr::parse(&exprs[0])?.eval_poly(assignment)?,
                Expr::parse(&exprs[1])?.eval_poly(assignment)?,
            ],
        })
    }

    pub fn apply(&self, inner: &[TruncatedSeries; 2], order: u32) -> [TruncatedSeries; 2] {
        [
            self.components[0].eval(&inner[0], &inner[1], order),
            self.components[1].eval(&inner[0], &inner[1], order),
        ]
    }
}

/// `maps[0] ∘ maps[1] ∘ … ∘ maps[n] (inner)`: the last map is applied first.
pub fn compose_chain(
    maps: &[PolyMap],
    inner: &[TruncatedSeries; 2],
    order: u32,
) -> Result<[TruncatedSeries; 2], SeriesError> {
    for s in inner {
        if s.order() < order {
            return Err(SeriesError::OrderMismatch {
                needed: order,
                got: s.order(),
            });
        }
    }
    let mut cur = [inner[0].truncate(order), inner[1].truncate(order)];
    for m in maps.iter().rev() {
        cur = m.apply(&cur, order);
    }
    Ok(cur)
}

/// A named series defined by `expr = ζ^{zeta_shift} · name`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Intermediate {
    pub name: String,
    pub expr: String,
    #[serde(default)]
    pub zeta_shift: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainVariant {
    pub label: String,
    /// Maps in written order, outermost first.
    pub maps: Vec<[String; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Germ(Germ),
    Expressions([String; 2]),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorizationFixture {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub target: Target,
    #[serde(default)]
    pub assignment: BTreeMap<String, Rational>,
    #[serde(default)]
    pub intermediates: Vec<Intermediate>,
    pub sigma: [String; 2],
    pub chains: Vec<ChainVariant>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Equal {
        order: u32,
    },
    Mismatch {
        component: usize,
        monomial: Monomial,
        display: String,
        expected: Rational,
        actual: Rational,
    },
}

impl Verdict {
    pub fn is_equal(&self) -> bool {
        matches!(self, Verdict::Equal { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VariantReport {
    pub label: String,
    #[serde(flatten)]
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FactorizationReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub order: u32,
    pub working_order: u32,
    pub target: [String; 2],
    pub variants: Vec<VariantReport>,
    /// True when at least one chain variant matches.
    pub passed: bool,
}

/// Compares two series pairs up to total degree `order`.
pub fn compare_pairs(expected: &[TruncatedSeries; 2], actual: &[TruncatedSeries; 2], order: u32) -> Verdict {
    let mut best: Option<(u32, usize, Monomial)> = None;
    for comp in 0..2 {
        let keys = expected[comp].terms().map(|(m, _)| *m).chain(actual[comp].terms().map(|(m, _)| *m));
        for m in keys {
            if m.0 + m.1 > order || expected[comp].coeff(m) == actual[comp].coeff(m) {
                continue;
            }
            let key = (m.0 + m.1, comp, m);
            if best.is_none_or(|b| key < b) {
                best = Some(key);
            }
        }
    }
    match best {
        None => Verdict::Equal { order },
        Some((_, component, monomial)) => Verdict::Mismatch {
            component,
            monomial,
            display: monomial_string(monomial.0, monomial.1),
            expected: expected[component].coeff(monomial),
            actual: actual[component].coeff(monomial),
        },
    }
}

/// `(λzζˢ + P(ζ) + cζ^{sk/(k−1)}, ζᵏ)` with symbols instantiated.
pub fn germ_series(
    germ: &Germ,
    assignment: &HashMap<String, Rational>,
    order: u32,
) -> Result<[TruncatedSeries; 2], SeriesError> {
    germ.validate()?;
    let mut terms = vec![((1, germ.s), germ.lambda.instantiate(assignment)?)];
    for (&p, c) in &germ.coeffs {
        terms.push(((0, p), c.instantiate(assignment)?));
    }
    let c = germ.c_extra.instantiate(assignment)?;
    if !c.is_zero() {
        if let Some(e) = germ.extra_exponent() {
            terms.push(((0, e), c));
        }
    }
    Ok([
        TruncatedSeries::from_terms(terms, order),
        TruncatedSeries::monomial(Rational::one(), 0, germ.k, order),
    ])
}

impl FactorizationFixture {
    fn assignment_map(&self) -> HashMap<String, Rational> {
        self.assignment.iter().map(|(k, v)| (k.clone(), v.clone())).collect()
    }

    fn target_pair(&self, order: u32) -> Result<[TruncatedSeries; 2], SeriesError> {
        let assignment = self.assignment_map();
        match &self.target {
            Target::Germ(g) => germ_series(g, &assignment, order),
            Target::Expressions(e) => {
                let env = SeriesEnv {
                    order,
                    assignment,
                    series: HashMap::new(),
                };
                Ok([Expr::parse(&e[0])?.eval_series(&env)?, Expr::parse(&e[1])?.eval_series(&env)?])
            }
        }
    }

    /// `σ` evaluated at working order `w`, with the intermediates defined first.
    pub fn sigma_pair(&self, w: u32) -> Result<[TruncatedSeries; 2], SeriesError> {
        let mut env = SeriesEnv {
            order: w,
            assignment: self.assignment_map(),
            series: HashMap::new(),
        };
        for im in &self.intermediates {
            let raw = Expr::parse(&im.expr)?.eval_series(&env)?;
            let value = raw.div_zeta_power(im.zeta_shift, &im.name)?;
            env.series.insert(im.name.clone(), value);
        }
        Ok([
            Expr::parse(&self.sigma[0])?.eval_series(&env)?,
            Expr::parse(&self.sigma[1])?.eval_series(&env)?,
        ])
    }
}

/// Composes each chain variant on `σ` and compares with the target up to `order`.
pub fn verify_factorization(fixture: &FactorizationFixture, order: u32) -> Result<FactorizationReport, SeriesError> {
    if order < 3 {
        return Err(SeriesError::InvalidOrder { min: 3, got: order });
    }
    let shift: u32 = fixture.intermediates.iter().map(|i| i.zeta_shift).sum();
    let mut w = order + shift;
    let sigma = loop {
        let s = fixture.sigma_pair(w)?;
        let got = s[0].order().min(s[1].order());
        if got >= order {
            break s;
        }
        if w > 2 * (order + shift) + 8 {
            return Err(SeriesError::OrderMismatch { needed: order, got });
        }
        w += order - got;
    };
    let target = fixture.target_pair(order)?;
    let assignment = fixture.assignment_map();
    let mut variants = Vec::new();
    for chain in &fixture.chains {
        let maps = chain
            .maps
            .iter()
            .map(|m| PolyMap::parse(m, &assignment))
            .collect::<Result<Vec<_>, _>>()?;
        let composed = compose_chain(&maps, &sigma, order)?;
        variants.push(VariantReport {
            label: chain.label.clone(),
            verdict: compare_pairs(&target, &composed, order),
        });
    }
    Ok(FactorizationReport {
        name: fixture.name.clone(),
        order,
        working_order: w,
        target: [target[0].to_string(), target[1].to_string()],
        passed: variants.iter().any(|v| v.verdict.is_equal()),
        variants,
    })
}

fn small_rational<R: Rng>(rng: &mut R) -> Rational {
    Rational::frac(rng.gen_range(-5..=5), rng.gen_range(1..=4))
}

/// A random series with the given constant term.
pub fn random_series<R: Rng>(rng: &mut R, order: u32, constant: Rational, density: f64) -> TruncatedSeries {
    let mut terms = vec![((0, 0), constant)];
    for d in 1..=order {
        for a in 0..=d {
            if rng.gen_bool(density) {
                terms.push(((a, d - a), small_rational(rng)));
            }
        }
    }
    TruncatedSeries::from_terms(terms, order)
}

fn random_poly_string<R: Rng>(rng: &mut R) -> String {
    let choices = ["u*v", "v", "u", "(u+1)*v", "u*v+1", "u+v", "u*v-2", "u^2+v", "v+u*v"];
    choices[rng.gen_range(0..choices.len())].to_string()
}

/// A fixture whose target is the literal composition of its own chain.
pub fn synthetic_fixture<R: Rng>(rng: &mut R, maps: usize) -> FactorizationFixture {
    let c = |rng: &mut R| {
        let r = small_rational(rng);
        if r.is_negative() {
            format!("({r})")
        } else {
            r.to_string()
        }
    };
    let sigma = [
        format!("{}*z + {}*zeta^2 + {}*z*zeta", c(rng), c(rng), c(rng)),
        format!("zeta*(1 + {}*z)", c(rng)),
    ];
    let chain: Vec<[String; 2]> = (0..maps)
        .map(|_| [random_poly_string(rng), random_poly_string(rng)])
        .collect();
    let mut target = sigma.clone();
    for m in chain.iter().rev() {
        let sub = |e: &str| e.replace('u', &format!("({})", target[0])).replace('v', &format!("({})", target[1]));
        target = [sub(&m[0]), sub(&m[1])];
    }
    FactorizationFixture {
        name: Some("synthetic".into()),
        target: Target::Expressions(target),
        assignment: BTreeMap::new(),
        intermediates: Vec::new(),
        sigma,
        chains: vec![ChainVariant {
            label: "chain".into(),
            maps: chain,
        }],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn r(n: i64) -> Rational {
        Rational::from(n)
    }

    fn env(order: u32) -> SeriesEnv {
        SeriesEnv {
            order,
            ..Default::default()
        }
    }

    fn parse(src: &str, order: u32) -> TruncatedSeries {
        Expr::parse(src).unwrap().eval_series(&env(order)).unwrap()
    }

    #[test]
    fn geometric_inverse() {
        let s = parse("1 + zeta", 3);
        assert_eq!(s.invert_unit().unwrap(), parse("1 - zeta + zeta^2 - zeta^3", 3));
        assert_eq!(parse("z + zeta", 3).invert_unit(), Err(SeriesError::NonUnit));
    }

    #[test]
    fn inverse_of_a() {
        let mut e = env(4);
        e.assignment.insert("lambda".into(), r(2));
        e.assignment.insert("c3".into(), r(5));
        let a = Expr::parse("1 + c3*zeta^2 + lambda*z*zeta^3").unwrap().eval_series(&e).unwrap();
        let inv = a.invert_unit().unwrap();
        assert_eq!(inv, parse("1 - 5*zeta^2 - 2*z*zeta^3 + 25*zeta^4", 4));
        assert_eq!(a.mul(&inv), TruncatedSeries::one(4));
    }

    #[test]
    fn parser_handles_precedence_and_errors() {
        assert_eq!(parse("2*z^2 - -z", 4), TruncatedSeries::from_terms([((2, 0), r(2)), ((1, 0), r(1))], 4));
        assert_eq!(parse("ζ·(1+z)^-1", 3), parse("zeta - z*zeta + z^2*zeta", 3));
        assert_eq!(parse("1/2 + z^(2)", 2), parse("z*z + 1/2", 2));
    }

    #[test]
    fn parse_failures() {
        assert!(Expr::parse("(z + 1").is_err());
        assert!(Expr::parse("z +").is_err());
        assert!(Expr::parse("z $ 1").is_err());
        assert!(matches!(
            Expr::parse("q + 1").unwrap().eval_series(&env(3)),
            Err(SeriesError::UnknownSymbol(_))
        ));
        assert!(matches!(Expr::parse("z^-1").unwrap().eval_series(&env(3)), Err(SeriesError::NonUnit)));
        assert!(matches!(
            Expr::parse("u^-1").unwrap().eval_poly(&HashMap::new()),
            Err(SeriesError::NotPolynomial(_))
        ));
    }

    #[test]
    fn chain_basics() {
        let inner = [TruncatedSeries::z(5), TruncatedSeries::zeta(5)];
        assert_eq!(compose_chain(&[], &inner, 5).unwrap(), inner);
        let m = PolyMap::parse(&["u*v".into(), "v".into()], &HashMap::new()).unwrap();
        let out = compose_chain(std::slice::from_ref(&m), &inner, 5).unwrap();
        assert_eq!(out[0], parse("z*zeta", 5));
        assert_eq!(out[1], inner[1]);
        assert!(matches!(compose_chain(&[m], &inner, 6), Err(SeriesError::OrderMismatch { .. })));
    }

    #[test]
    fn zeta_division_checks_relation() {
        let s = parse("zeta^2 + z*zeta^3", 5);
        assert_eq!(s.div_zeta_power(2, "B").unwrap(), parse("1 + z*zeta", 3));
        assert!(matches!(
            parse("z + zeta^2", 5).div_zeta_power(2, "B"),
            Err(SeriesError::RelationViolation { monomial: (1, 0), .. })
        ));
    }

    #[test]
    fn precision_tracks_valuation() {
        let a = parse("zeta^2", 4);
        let b = parse("1 + z", 3);
        assert_eq!(a.mul(&b).order(), 4);
        assert_eq!(b.mul(&b).order(), 3);
    }

    #[test]
    fn display_is_graded() {
        assert_eq!(parse("3*zeta^2 - z + 1/2", 2).to_string(), "1/2 - z + 3*ζ^2 + O(3)");
    }

    #[test]
    fn synthetic_self_verifies() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [3, 6, 9] {
            let f = synthetic_fixture(&mut rng, 3);
            let rep = verify_factorization(&f, n).unwrap();
            assert!(rep.passed, "{f:?}");
        }
    }
}
