//! Exact scalars: arbitrary-precision rationals and elements of a real
//! quadratic field Q(√d).
//!
//! Every comparison made by the equilibrium and certificate code goes through
//! these types, so there are no floating-point ties anywhere. Decimal output
//! (`Rational::to_decimal`, [`qeval`]) exists only for reports.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericsError {
    #[error("invalid rational literal `{0}`")]
    Parse(String),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("division by zero")]
    DivisionByZero,
    #[error("radicand {0} is not a square-free integer >= 1")]
    BadRadicand(u64),
    #[error("incompatible radicals: sqrt({0}) and sqrt({1}) in one expression")]
    MixedRadicals(u64, u64),
}

/// An exact rational number in lowest terms with a positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Self {
        Self::try_new(numer, denom).expect("rational with zero denominator")
    }

    pub fn try_new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Result<Self, NumericsError> {
        let denom = denom.into();
        if denom.is_zero() {
            return Err(NumericsError::ZeroDenominator);
        }
        Ok(Self(BigRational::new(numer.into(), denom)))
    }

    pub fn from_int(value: impl Into<BigInt>) -> Self {
        Self(BigRational::from_integer(value.into()))
    }

    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn one() -> Self {
        Self(BigRational::one())
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

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// -1, 0 or +1.
    pub fn signum(&self) -> i8 {
        match self.numer().sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn abs(&self) -> Self {
        Self(self.0.abs())
    }

    pub fn recip(&self) -> Result<Self, NumericsError> {
        if self.is_zero() {
            return Err(NumericsError::DivisionByZero);
        }
        Ok(Self(self.0.recip()))
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, NumericsError> {
        if rhs.is_zero() {
            return Err(NumericsError::DivisionByZero);
        }
        Ok(Self(&self.0 / &rhs.0))
    }

    pub fn pow(&self, exp: u32) -> Self {
        Self(num_traits::pow(self.0.clone(), exp as usize))
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    /// Decimal rendering rounded (half away from zero) to `frac_digits`
    /// fractional digits, with trailing zeros trimmed.
    pub fn to_decimal(&self, frac_digits: usize) -> String {
        let scale = BigInt::from(10u32).pow(frac_digits as u32);
        let scaled: BigInt = self.numer().abs() * &scale * BigInt::from(2) + self.denom();
        let rounded = scaled.div_floor(&(self.denom() * BigInt::from(2)));
        let (int_part, frac_part) = rounded.div_rem(&scale);
        let sign = if self.is_negative() && !rounded.is_zero() { "-" } else { "" };
        if frac_digits == 0 {
            return format!("{sign}{int_part}");
        }
        let mut frac = format!("{:0>width$}", frac_part.to_string(), width = frac_digits);
        while frac.ends_with('0') {
            frac.pop();
        }
        if frac.is_empty() {
            format!("{sign}{int_part}")
        } else {
            format!("{sign}{int_part}.{frac}")
        }
    }
}

impl Default for Rational {
    fn default() -> Self {
        Self::zero()
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom().is_one() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = NumericsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || NumericsError::Parse(s.to_string());
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n, d),
            None => (s, "1"),
        };
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(NumericsError::ZeroDenominator);
        }
        if den.is_negative() {
            return Err(bad());
        }
        Ok(Self(BigRational::new(num, den)))
    }
}

impl From<i64> for Rational {
    fn from(v: i64) -> Self {
        Self::from_int(v)
    }
}

impl From<BigInt> for Rational {
    fn from(v: BigInt) -> Self {
        Self::from_int(v)
    }
}

impl From<BigRational> for Rational {
    fn from(v: BigRational) -> Self {
        Self(v)
    }
}

macro_rules! rational_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0 $op rhs.0)
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational(self.0 $op &rhs.0)
            }
        }
        impl<'a> $trait<Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(&self.0 $op rhs.0)
            }
        }
        impl<'a, 'b> $trait<&'b Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'b Rational) -> Rational {
                Rational(&self.0 $op &rhs.0)
            }
        }
    };
}

rational_binop!(Add, add, +);
rational_binop!(Sub, sub, -);
rational_binop!(Mul, mul, *);
// Panics on a zero divisor, like integer division; use `checked_div` when the
// divisor comes from input.
rational_binop!(Div, div, /);

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

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl AddAssign<Rational> for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        self.0 += rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl SubAssign<Rational> for Rational {
    fn sub_assign(&mut self, rhs: Rational) {
        self.0 -= rhs.0;
    }
}

impl MulAssign<&Rational> for Rational {
    fn mul_assign(&mut self, rhs: &Rational) {
        self.0 *= &rhs.0;
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

/// Shorthand for `Rational::new(n, d)` with machine integers.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn is_square_free(d: u64) -> bool {
    if d == 0 {
        return false;
    }
    let mut k = 2u64;
    while k * k <= d {
        if d.is_multiple_of(k * k) {
            return false;
        }
        k += 1;
    }
    true
}

/// `a + b·√d` with rational `a`, `b` and square-free `d`.
///
/// A value with `b = 0` is a plain rational and combines with any radicand;
/// two values with `b ≠ 0` must share `d`. The std operators panic on mixed
/// radicands; the `try_*` methods report [`NumericsError::MixedRadicals`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadExt {
    a: Rational,
    b: Rational,
    // 0 exactly when b == 0.
    d: u64,
}

impl QuadExt {
    pub fn new(a: Rational, b: Rational, d: u64) -> Result<Self, NumericsError> {
        if !is_square_free(d) {
            return Err(NumericsError::BadRadicand(d));
        }
        if d == 1 {
            return Ok(Self::from_rational(a + b));
        }
        Ok(Self::canonical(a, b, d))
    }

    fn canonical(a: Rational, b: Rational, d: u64) -> Self {
        if b.is_zero() {
            Self { a, b, d: 0 }
        } else {
            Self { a, b, d }
        }
    }

    pub fn from_rational(a: Rational) -> Self {
        Self { a, b: Rational::zero(), d: 0 }
    }

    /// The value `√d`.
    pub fn sqrt(d: u64) -> Result<Self, NumericsError> {
        Self::new(Rational::zero(), Rational::one(), d)
    }

    pub fn zero() -> Self {
        Self::from_rational(Rational::zero())
    }

    pub fn one() -> Self {
        Self::from_rational(Rational::one())
    }

    pub fn rational_part(&self) -> &Rational {
        &self.a
    }

    pub fn irrational_part(&self) -> &Rational {
        &self.b
    }

    /// The radicand, or `None` for a rational value.
    pub fn radicand(&self) -> Option<u64> {
        (self.d != 0).then_some(self.d)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    fn common_radicand(&self, other: &Self) -> Result<u64, NumericsError> {
        match (self.d, other.d) {
            (0, d) | (d, 0) => Ok(d),
            (d, e) if d == e => Ok(d),
            (d, e) => Err(NumericsError::MixedRadicals(d, e)),
        }
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self, NumericsError> {
        let d = self.common_radicand(rhs)?;
        Ok(Self::canonical(&self.a + &rhs.a, &self.b + &rhs.b, d))
    }

    pub fn try_sub(&self, rhs: &Self) -> Result<Self, NumericsError> {
        let d = self.common_radicand(rhs)?;
        Ok(Self::canonical(&self.a - &rhs.a, &self.b - &rhs.b, d))
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self, NumericsError> {
        let d = self.common_radicand(rhs)?;
        let dr = Rational::from_int(d);
        let a = &self.a * &rhs.a + &self.b * &rhs.b * &dr;
        let b = &self.a * &rhs.b + &self.b * &rhs.a;
        Ok(Self::canonical(a, b, d))
    }

    pub fn try_recip(&self) -> Result<Self, NumericsError> {
        if self.is_zero() {
            return Err(NumericsError::DivisionByZero);
        }
        if self.d == 0 {
            return Ok(Self::from_rational(self.a.recip()?));
        }
        // (a - b√d) / (a² - b²d); the norm is non-zero because d is not a square.
        let norm = &self.a * &self.a - &self.b * &self.b * Rational::from_int(self.d);
        let a = &self.a / &norm;
        let b = -(&self.b / &norm);
        Ok(Self::canonical(a, b, self.d))
    }

    pub fn try_div(&self, rhs: &Self) -> Result<Self, NumericsError> {
        self.common_radicand(rhs)?;
        self.try_mul(&rhs.try_recip()?)
    }

    pub fn scale(&self, k: &Rational) -> Self {
        Self::canonical(&self.a * k, &self.b * k, self.d)
    }

    /// Exact sign of the real number `a + b√d`.
    pub fn signum(&self) -> i8 {
        let sa = self.a.signum();
        let sb = self.b.signum();
        if sb == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return sb;
        }
        let a2 = &self.a * &self.a;
        let b2d = &self.b * &self.b * Rational::from_int(self.d);
        match a2.cmp(&b2d) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => 0,
        }
    }

    pub fn try_cmp(&self, other: &Self) -> Result<Ordering, NumericsError> {
        Ok(self.try_sub(other)?.signum().cmp(&0))
    }

    /// `floor(|x| · scale)` for a positive integer `scale`, computed exactly.
    fn floor_abs_scaled(&self, scale: &BigInt) -> BigInt {
        let x = if self.signum() < 0 { -self.clone() } else { self.clone() };
        let l = x.a.denom().lcm(x.b.denom());
        let p = x.a.numer() * (&l / x.a.denom());
        let q = x.b.numer() * (&l / x.b.denom());
        let m = p * scale;
        if q.is_zero() {
            return m.div_floor(&l);
        }
        let r: BigInt = &q * &q * BigInt::from(x.d.max(1)) * scale * scale;
        let root = r.sqrt();
        if q.is_positive() {
            let t0 = (&m + &root).div_floor(&l);
            let gap = (&t0 + 1u32) * &l - &m;
            if !gap.is_positive() || &gap * &gap <= r {
                t0 + 1u32
            } else {
                t0
            }
        } else {
            let t0 = (&m - &root - 1u32).div_floor(&l);
            let gap = &m - (&t0 + 1u32) * &l;
            if !gap.is_negative() && &gap * &gap >= r {
                t0 + 1u32
            } else {
                t0
            }
        }
    }

    /// Approximate `f64`, for plotting and logs only.
    pub fn to_f64(&self) -> f64 {
        let v = self.floor_abs_scaled(&(BigInt::one() << 60u32)).to_f64().unwrap_or(f64::NAN) / 2f64.powi(60);
        if self.signum() < 0 {
            -v
        } else {
            v
        }
    }
}

impl From<Rational> for QuadExt {
    fn from(a: Rational) -> Self {
        Self::from_rational(a)
    }
}

impl fmt::Display for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.d == 0 {
            return write!(f, "{}", self.a);
        }
        if self.b.is_negative() {
            write!(f, "{}-{}√{}", self.a, -&self.b, self.d)
        } else {
            write!(f, "{}+{}√{}", self.a, self.b, self.d)
        }
    }
}

impl fmt::Debug for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

macro_rules! quad_binop {
    ($trait:ident, $method:ident, $try:ident) => {
        impl $trait<QuadExt> for QuadExt {
            type Output = QuadExt;
            fn $method(self, rhs: QuadExt) -> QuadExt {
                self.$try(&rhs).expect("quadratic-field arithmetic")
            }
        }
        impl<'a> $trait<&'a QuadExt> for QuadExt {
            type Output = QuadExt;
            fn $method(self, rhs: &'a QuadExt) -> QuadExt {
                self.$try(rhs).expect("quadratic-field arithmetic")
            }
        }
        impl<'a> $trait<QuadExt> for &'a QuadExt {
            type Output = QuadExt;
            fn $method(self, rhs: QuadExt) -> QuadExt {
                self.$try(&rhs).expect("quadratic-field arithmetic")
            }
        }
        impl<'a, 'b> $trait<&'b QuadExt> for &'a QuadExt {
            type Output = QuadExt;
            fn $method(self, rhs: &'b QuadExt) -> QuadExt {
                self.$try(rhs).expect("quadratic-field arithmetic")
            }
        }
    };
}

quad_binop!(Add, add, try_add);
quad_binop!(Sub, sub, try_sub);
quad_binop!(Mul, mul, try_mul);
quad_binop!(Div, div, try_div);

impl Neg for QuadExt {
    type Output = QuadExt;
    fn neg(self) -> QuadExt {
        QuadExt { a: -self.a, b: -self.b, d: self.d }
    }
}

impl Neg for &QuadExt {
    type Output = QuadExt;
    fn neg(self) -> QuadExt {
        -self.clone()
    }
}

/// Exact sign of `x`: -1, 0 or +1.
pub fn qsign(x: &QuadExt) -> i8 {
    x.signum()
}

/// Decimal rendering of `x` with `floor(bits·log10 2)` fractional digits
/// (`bits` clamped to at least 8), truncated toward zero. Every shown digit
/// is exact.
pub fn qeval(x: &QuadExt, bits: u32) -> String {
    let bits = bits.max(8);
    let digits = (bits as u64 * 30103 / 100_000).max(1) as u32;
    let scale = BigInt::from(10u32).pow(digits);
    let scaled = x.floor_abs_scaled(&scale).to_string();
    let padded = format!("{:0>width$}", scaled, width = digits as usize + 1);
    let (int_part, frac) = padded.split_at(padded.len() - digits as usize);
    let sign = if x.signum() < 0 { "-" } else { "" };
    format!("{sign}{int_part}.{frac}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: Rational, b: Rational, d: u64) -> QuadExt {
        QuadExt::new(a, b, d).unwrap()
    }

    #[test]
    fn rational_parse_and_display() {
        assert_eq!("2/4".parse::<Rational>().unwrap(), rat(1, 2));
        assert_eq!("-6/4".parse::<Rational>().unwrap().to_string(), "-3/2");
        assert_eq!("7".parse::<Rational>().unwrap().to_string(), "7");
        assert!("1/0".parse::<Rational>().is_err());
        assert!("x".parse::<Rational>().is_err());
        assert!("1/-2".parse::<Rational>().is_err());
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(rat(17, 3).to_decimal(4), "5.6667");
        assert_eq!(rat(1, 2).to_decimal(6), "0.5");
        assert_eq!(rat(-1, 8).to_decimal(2), "-0.13");
        assert_eq!(rat(5, 1).to_decimal(3), "5");
    }

    #[test]
    fn qsign_examples() {
        assert_eq!(qsign(&QuadExt::zero()), 0);
        assert_eq!(qsign(&q(rat(3, 1), rat(-2, 1), 3)), -1);
        let s = q(rat(1, 1), rat(1, 1), 3);
        let sq = &s * &s;
        assert_eq!(sq, q(rat(4, 1), rat(2, 1), 3));
        assert_eq!(qsign(&sq), 1);
        assert_eq!(qsign(&q(rat(-2, 1), rat(1, 1), 3)), -1);
        assert_eq!(qsign(&q(rat(2, 1), rat(-1, 1), 3)), 1);
    }

    #[test]
    fn qeval_examples() {
        let v = q(rat(1, 1), rat(1, 1), 2);
        assert!(qeval(&v, 30).starts_with("2.41421356"), "{}", qeval(&v, 30));
        let v = q(rat(1, 1), rat(1, 3), 3);
        assert!(qeval(&v, 30).starts_with("1.57735026"), "{}", qeval(&v, 30));
        let v = QuadExt::from_rational(rat(17, 3));
        assert!(qeval(&v, 30).starts_with("5.66666666"));
        let v = q(rat(3, 1), rat(-2, 1), 3);
        assert!(qeval(&v, 40).starts_with("-0.46410161"), "{}", qeval(&v, 40));
        assert_eq!(qeval(&QuadExt::from_rational(rat(1697, 300)), 40), "5.656666666666");
        assert_eq!(qeval(&QuadExt::from_rational(rat(-1, 8)), 10), "-0.125");
        assert_eq!(qeval(&QuadExt::zero(), 10), "0.000");
    }

    #[test]
    fn mixed_radicals_rejected() {
        let a = QuadExt::sqrt(2).unwrap();
        let b = QuadExt::sqrt(3).unwrap();
        assert_eq!(a.try_add(&b), Err(NumericsError::MixedRadicals(2, 3)));
        // A rational combines with either.
        let r = QuadExt::from_rational(rat(1, 2));
        assert!(a.try_mul(&r).is_ok() && b.try_mul(&r).is_ok());
    }

    #[test]
    fn radicand_validation() {
        assert!(QuadExt::sqrt(12).is_err());
        assert!(QuadExt::sqrt(0).is_err());
        assert_eq!(QuadExt::new(rat(1, 1), rat(2, 1), 1).unwrap(), QuadExt::from_rational(rat(3, 1)));
    }

    #[test]
    fn reciprocal() {
        let x = q(rat(1, 1), rat(1, 1), 3);
        let inv = x.try_recip().unwrap();
        assert_eq!(&x * &inv, QuadExt::one());
        assert_eq!(inv, q(rat(-1, 2), rat(1, 2), 3));
        assert!(QuadExt::zero().try_recip().is_err());
    }

    #[test]
    fn display_forms() {
        assert_eq!(q(rat(1, 1), rat(-1, 3), 3).to_string(), "1-1/3√3");
        assert_eq!(q(rat(0, 1), rat(2, 1), 2).to_string(), "0+2√2");
        assert_eq!(QuadExt::from_rational(rat(5, 2)).to_string(), "5/2");
    }
}
