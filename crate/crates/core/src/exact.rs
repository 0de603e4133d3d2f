//! Exact scalars: big rationals and elements of real quadratic fields `Q(√d)`.
//!
//! Every value here is kept in canonical form. Rationals are reduced with a
//! positive denominator; quadratic numbers fold to pure rationals whenever the
//! irrational part vanishes or the radicand is a perfect square.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("mixed radicands √{0} and √{1}")]
    MixedRadicand(Rational, Rational),
    #[error("negative radicand {0}")]
    NegativeRadicand(Rational),
    #[error("leading coefficient is zero")]
    ZeroLeadingCoefficient,
    #[error("complex roots (discriminant {0})")]
    ComplexRoots(Rational),
    #[error("cannot parse rational from {0:?}")]
    Parse(String),
}

/// Arbitrary-precision rational number in lowest terms.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Result<Self, ExactError> {
        let denom = denom.into();
        if denom.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        Ok(Rational(BigRational::new(numer.into(), denom)))
    }

    /// Panicking constructor for literals.
    pub fn frac(numer: i64, denom: i64) -> Self {
        Self::new(numer, denom).expect("nonzero denominator")
    }

    pub fn integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn signum(&self) -> Ordering {
        self.0.cmp(&BigRational::zero())
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Result<Self, ExactError> {
        if self.is_zero() {
            Err(ExactError::DivisionByZero)
        } else {
            Ok(Rational(self.0.recip()))
        }
    }

    pub fn checked_div(&self, rhs: &Rational) -> Result<Self, ExactError> {
        if rhs.is_zero() {
            Err(ExactError::DivisionByZero)
        } else {
            Ok(Rational(&self.0 / &rhs.0))
        }
    }

    pub fn pow(&self, exp: i32) -> Result<Self, ExactError> {
        if exp < 0 && self.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        Ok(Rational(num_traits::Pow::pow(&self.0, exp)))
    }

    pub fn square(&self) -> Self {
        self * self
    }

    /// Exact square root when `self` is the square of a rational.
    pub fn sqrt_exact(&self) -> Option<Rational> {
        if self.is_negative() {
            return None;
        }
        let n = is_perfect_square(self.numer())?;
        let d = is_perfect_square(self.denom())?;
        Some(Rational(BigRational::new(n, d)))
    }

    pub fn to_f64(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self.0).unwrap_or(f64::NAN)
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::integer(n)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational::integer(n)
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = ExactError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ExactError::Parse(s.to_string());
        let t = s.trim();
        match t.split_once('/') {
            Some((n, d)) => {
                let n: BigInt = n.trim().parse().map_err(|_| err())?;
                let d: BigInt = d.trim().parse().map_err(|_| err())?;
                Rational::new(n, d).map_err(|_| err())
            }
            None => Ok(Rational::integer(t.parse::<BigInt>().map_err(|_| err())?)),
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Str(String),
            Int(i64),
        }
        match Repr::deserialize(d)? {
            Repr::Str(s) => s.parse().map_err(serde::de::Error::custom),
            Repr::Int(n) => Ok(Rational::from(n)),
        }
    }
}

macro_rules! rational_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
    };
}

rational_binop!(Add, add);
rational_binop!(Sub, sub);
rational_binop!(Mul, mul);

// Panics on a zero divisor, like integer division. Use `checked_div` otherwise.
rational_binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl std::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |a, b| a + b)
    }
}

impl std::iter::Product for Rational {
    fn product<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::one(), |a, b| a * b)
    }
}

/// Integer square root of a perfect square, `None` otherwise (or for negatives).
///
/// `BigInt::sqrt` is an exact integer Newton iteration.
pub fn is_perfect_square(n: &BigInt) -> Option<BigInt> {
    if n.sign() == Sign::Minus {
        return None;
    }
    let r = n.sqrt();
    if &r * &r == *n {
        Some(r)
    } else {
        None
    }
}

/// `a + b·√d` with rational `a`, `b` and a non-negative rational radicand `d`.
///
/// Pure rationals are stored with `b = 0` and `d = 0`, and combine freely with
/// any radicand. Two genuinely irrational values must share the same `d`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadraticNumber {
    a: Rational,
    b: Rational,
    d: Rational,
}

impl QuadraticNumber {
    pub fn new(a: Rational, b: Rational, d: Rational) -> Result<Self, ExactError> {
        if d.is_negative() {
            return Err(ExactError::NegativeRadicand(d));
        }
        Ok(Self::canonical(a, b, d))
    }

    fn canonical(a: Rational, b: Rational, d: Rational) -> Self {
        if b.is_zero() || d.is_zero() {
            return Self::rational(a);
        }
        match d.sqrt_exact() {
            Some(root) => Self::rational(a + b * root),
            None => QuadraticNumber { a, b, d },
        }
    }

    pub fn rational(a: Rational) -> Self {
        QuadraticNumber {
            a,
            b: Rational::zero(),
            d: Rational::zero(),
        }
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn d(&self) -> &Rational {
        &self.d
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        self.is_rational().then_some(&self.a)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    fn common_radicand(&self, rhs: &Self) -> Result<Rational, ExactError> {
        match (self.is_rational(), rhs.is_rational()) {
            (true, true) => Ok(Rational::zero()),
            (false, true) => Ok(self.d.clone()),
            (true, false) => Ok(rhs.d.clone()),
            (false, false) if self.d == rhs.d => Ok(self.d.clone()),
            _ => Err(ExactError::MixedRadicand(self.d.clone(), rhs.d.clone())),
        }
    }

    pub fn checked_add(&self, rhs: &Self) -> Result<Self, ExactError> {
        let d = self.common_radicand(rhs)?;
        Ok(Self::canonical(&self.a + &rhs.a, &self.b + &rhs.b, d))
    }

    pub fn checked_sub(&self, rhs: &Self) -> Result<Self, ExactError> {
        let d = self.common_radicand(rhs)?;
        Ok(Self::canonical(&self.a - &rhs.a, &self.b - &rhs.b, d))
    }

    pub fn checked_mul(&self, rhs: &Self) -> Result<Self, ExactError> {
        let d = self.common_radicand(rhs)?;
        let a = &self.a * &rhs.a + &self.b * &rhs.b * &d;
        let b = &self.a * &rhs.b + &self.b * &rhs.a;
        Ok(Self::canonical(a, b, d))
    }

    /// Conjugate `a − b·√d`.
    pub fn conjugate(&self) -> Self {
        QuadraticNumber {
            a: self.a.clone(),
            b: -&self.b,
            d: self.d.clone(),
        }
    }

    /// Field norm `a² − b²d`; nonzero for nonzero values since `d` is not a square.
    pub fn norm(&self) -> Rational {
        self.a.square() - self.b.square() * &self.d
    }

    pub fn recip(&self) -> Result<Self, ExactError> {
        let n = self.norm();
        if n.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        Ok(Self::canonical(
            &self.a / &n,
            -(&self.b / &n),
            self.d.clone(),
        ))
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, ExactError> {
        self.checked_mul(&rhs.recip()?)
    }

    pub fn add_rational(&self, r: &Rational) -> Self {
        Self::canonical(&self.a + r, self.b.clone(), self.d.clone())
    }

    pub fn mul_rational(&self, r: &Rational) -> Self {
        Self::canonical(&self.a * r, &self.b * r, self.d.clone())
    }

    /// Sign under the real embedding with `√d ≥ 0`, decided exactly.
    pub fn signum(&self) -> Ordering {
        let sa = self.a.signum();
        let sb = self.b.signum();
        if sb == Ordering::Equal {
            return sa;
        }
        if sa == Ordering::Equal || sa == sb {
            return sb;
        }
        // Opposite signs: compare a² with b²d.
        let lhs = self.a.square();
        let rhs = self.b.square() * &self.d;
        match lhs.cmp(&rhs) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => Ordering::Equal,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() == Ordering::Greater
    }

    pub fn cmp_value(&self, rhs: &Self) -> Result<Ordering, ExactError> {
        Ok(self.checked_sub(rhs)?.signum())
    }

    pub fn to_f64(&self) -> f64 {
        self.a.to_f64() + self.b.to_f64() * self.d.to_f64().sqrt()
    }
}

impl From<Rational> for QuadraticNumber {
    fn from(r: Rational) -> Self {
        QuadraticNumber::rational(r)
    }
}

impl From<i64> for QuadraticNumber {
    fn from(n: i64) -> Self {
        QuadraticNumber::rational(n.into())
    }
}

impl fmt::Display for QuadraticNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            return write!(f, "{}", self.a);
        }
        if !self.a.is_zero() {
            write!(f, "{}", self.a)?;
            if self.b.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
        } else if self.b.is_negative() {
            write!(f, "-")?;
        }
        let b = self.b.abs();
        if !b.is_one() {
            write!(f, "{}·", b)?;
        }
        write!(f, "√({})", self.d)
    }
}

impl fmt::Debug for QuadraticNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// The two real roots of a quadratic, larger root first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RootPair {
    pub larger: QuadraticNumber,
    pub smaller: QuadraticNumber,
    pub discriminant: Rational,
}

/// Solves `aX² + bX + c = 0` over `Q(√(b² − 4ac))`.
pub fn quad_solve(a: &Rational, b: &Rational, c: &Rational) -> Result<RootPair, ExactError> {
    if a.is_zero() {
        return Err(ExactError::ZeroLeadingCoefficient);
    }
    let disc = b.square() - Rational::from(4) * a * c;
    if disc.is_negative() {
        return Err(ExactError::ComplexRoots(disc));
    }
    let two_a = Rational::from(2) * a;
    let center = -b / &two_a;
    let half_width = Rational::one() / &two_a;
    let r1 = QuadraticNumber::canonical(center.clone(), half_width.clone(), disc.clone());
    let r2 = QuadraticNumber::canonical(center, -half_width, disc.clone());
    let (larger, smaller) = if r1.cmp_value(&r2)? == Ordering::Less {
        (r2, r1)
    } else {
        (r1, r2)
    };

    // Vieta, exactly.
    let sum = larger.checked_add(&smaller)?;
    let prod = larger.checked_mul(&smaller)?;
    debug_assert_eq!(sum, QuadraticNumber::rational(-b / a));
    debug_assert_eq!(prod, QuadraticNumber::rational(c / a));

    Ok(RootPair {
        larger,
        smaller,
        discriminant: disc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::frac(n, d)
    }

    #[test]
    fn rational_canonical_and_display() {
        let r = Rational::frac(6, -4);
        assert_eq!(r.to_string(), "-3/2");
        assert_eq!(*r.denom(), BigInt::from(2));
        assert_eq!(Rational::frac(4, 2).to_string(), "2");
        assert_eq!("  -10/4 ".parse::<Rational>().unwrap(), q(-5, 2));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("x".parse::<Rational>().is_err());
    }

    #[test]
    fn serde_uses_strings() {
        let json = serde_json::to_string(&q(3, 2)).unwrap();
        assert_eq!(json, "\"3/2\"");
        let back: Rational = serde_json::from_str("\"-7\"").unwrap();
        assert_eq!(back, Rational::from(-7));
        let from_int: Rational = serde_json::from_str("4").unwrap();
        assert_eq!(from_int, Rational::from(4));
        let x = QuadraticNumber::new(q(1, 2), q(1, 3), q(5, 1)).unwrap();
        let json = serde_json::to_string(&x).unwrap();
        assert_eq!(json, r#"{"a":"1/2","b":"1/3","d":"5"}"#);
    }

    #[test]
    fn quad_solve_four_curve_quadratic() {
        let roots = quad_solve(&6.into(), &(-13).into(), &6.into()).unwrap();
        assert_eq!(roots.discriminant, Rational::from(25));
        assert_eq!(roots.larger, QuadraticNumber::rational(q(3, 2)));
        assert_eq!(roots.smaller, QuadraticNumber::rational(q(2, 3)));
    }

    #[test]
    fn quad_solve_double_root() {
        let roots = quad_solve(&1.into(), &(-2).into(), &1.into()).unwrap();
        assert_eq!(roots.larger, QuadraticNumber::from(1));
        assert_eq!(roots.smaller, QuadraticNumber::from(1));
    }

    #[test]
    fn quad_solve_errors() {
        assert_eq!(
            quad_solve(&1.into(), &0.into(), &1.into()),
            Err(ExactError::ComplexRoots((-4).into()))
        );
        assert_eq!(
            quad_solve(&0.into(), &1.into(), &1.into()),
            Err(ExactError::ZeroLeadingCoefficient)
        );
    }

    #[test]
    fn quad_solve_negative_leading_orders_roots() {
        // -X² + 2 = 0: roots ±√2, larger first.
        let roots = quad_solve(&(-1).into(), &0.into(), &2.into()).unwrap();
        assert!(roots.larger.is_positive());
        assert_eq!(roots.smaller.signum(), Ordering::Less);
        assert_eq!(roots.larger.d(), &Rational::from(8));
    }

    #[test]
    fn perfect_squares() {
        assert_eq!(is_perfect_square(&BigInt::from(9)), Some(BigInt::from(3)));
        assert_eq!(is_perfect_square(&BigInt::from(4)), Some(BigInt::from(2)));
        assert_eq!(is_perfect_square(&BigInt::from(5)), None);
        assert_eq!(is_perfect_square(&BigInt::from(0)), Some(BigInt::from(0)));
        assert_eq!(is_perfect_square(&BigInt::from(-4)), None);
        let big = BigInt::from(10).pow(40) + 7;
        assert_eq!(is_perfect_square(&(&big * &big)), Some(big));
    }

    #[test]
    fn mixed_radicand_is_an_error() {
        let x = QuadraticNumber::new(0.into(), 1.into(), 2.into()).unwrap();
        let y = QuadraticNumber::new(0.into(), 1.into(), 3.into()).unwrap();
        assert!(matches!(x.checked_add(&y), Err(ExactError::MixedRadicand(..))));
        // rationals combine with anything
        assert!(x.checked_add(&QuadraticNumber::from(5)).is_ok());
    }

    #[test]
    fn sign_of_surds() {
        let s = |a: i64, b: i64, d: i64| QuadraticNumber::new(a.into(), b.into(), d.into()).unwrap();
        assert_eq!(s(3, -2, 2).signum(), Ordering::Greater); // 3 - 2.83
        assert_eq!(s(2, -2, 2).signum(), Ordering::Less);
        assert_eq!(s(-3, 2, 2).signum(), Ordering::Less);
        assert_eq!(s(-2, 2, 2).signum(), Ordering::Greater);
        assert_eq!(s(0, -1, 7).signum(), Ordering::Less);
    }

    #[test]
    fn reciprocal_and_folding() {
        let x = QuadraticNumber::new(1.into(), 1.into(), 2.into()).unwrap();
        let inv = x.recip().unwrap();
        assert_eq!(x.checked_mul(&inv).unwrap(), QuadraticNumber::from(1));
        let folded = QuadraticNumber::new(1.into(), 2.into(), q(9, 4)).unwrap();
        assert_eq!(folded, QuadraticNumber::from(4));
        assert!(folded.d().is_zero());
    }
}
