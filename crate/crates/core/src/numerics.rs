//! Exact rational numbers.
//!
//! Every size, volume, weight and bound in this crate is a [`Rational`]. The
//! type is a thin newtype over [`num_rational::BigRational`], which keeps the
//! value reduced after every operation. Floating point is only produced by
//! [`Rational::to_f64`] and the decimal annotation of [`Rational::to_decimal`].

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericError {
    #[error("malformed rational `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("division by zero")]
    DivisionByZero,
}

/// Arbitrary-precision exact fraction in canonical form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Result<Self, NumericError> {
        let denom = denom.into();
        if denom.is_zero() {
            return Err(NumericError::DivisionByZero);
        }
        Ok(Rational(BigRational::new(numer.into(), denom)))
    }

    /// Panicking constructor for literals known to be valid.
    pub fn frac(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Rational(BigRational::new(numer.into(), denom.into()))
    }

    pub fn integer(n: i64) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn from_big(numer: BigInt, denom: BigInt) -> Result<Self, NumericError> {
        Self::new(numer, denom)
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn half() -> Self {
        Self::frac(1, 2)
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

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn checked_div(&self, rhs: &Rational) -> Result<Rational, NumericError> {
        if rhs.is_zero() {
            return Err(NumericError::DivisionByZero);
        }
        Ok(Rational(&self.0 / &rhs.0))
    }

    /// Largest integer not above the value.
    pub fn floor(&self) -> BigInt {
        self.0.numer().div_floor(self.0.denom())
    }

    pub fn floor_i64(&self) -> i64 {
        self.floor().to_i64().expect("floor out of i64 range")
    }

    pub fn abs(&self) -> Rational {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Result<Rational, NumericError> {
        Rational::one().checked_div(self)
    }

    pub fn min(self, other: Rational) -> Rational {
        std::cmp::min(self, other)
    }

    pub fn max(self, other: Rational) -> Rational {
        std::cmp::max(self, other)
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Decimal expansion with `digits` significant digits, truncated toward
    /// zero. Computed from the exact value, so it does not inherit `f64`
    /// rounding.
    pub fn to_decimal(&self, digits: usize) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let negative = self.is_negative();
        let numer = self.0.numer().abs();
        let denom = self.0.denom().clone();
        let (int_part, mut rem) = numer.div_rem(&denom);
        let mut out = String::new();
        if negative {
            out.push('-');
        }
        let int_str = int_part.to_string();
        out.push_str(&int_str);
        let mut significant = if int_part.is_zero() { 0 } else { int_str.len() };
        if significant >= digits {
            return out;
        }
        out.push('.');
        let ten = BigInt::from(10);
        let mut frac_digits = 0;
        while significant < digits && frac_digits < 4 * digits + 64 {
            rem *= &ten;
            let (d, r) = rem.div_rem(&denom);
            rem = r;
            let d = d.to_u8().unwrap_or(0);
            out.push(char::from(b'0' + d));
            frac_digits += 1;
            if significant > 0 || d != 0 {
                significant += 1;
            }
            if rem.is_zero() {
                break;
            }
        }
        out
    }

    /// `num/den` text, optionally followed by ` (~decimal)` with 16
    /// significant digits.
    pub fn format(&self, with_decimal: bool) -> String {
        if with_decimal {
            format!("{} (~{})", self, self.to_decimal(16))
        } else {
            self.to_string()
        }
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }
}

/// Parses `[-]digits` or `[-]digits/digits` with no interior whitespace,
/// optionally followed by the ` (~decimal)` note that [`Rational::format`] adds.
pub fn parse_rational(text: &str) -> Result<Rational, NumericError> {
    let text = text.trim();
    let text = match text.split_once(" (~") {
        Some((head, note)) if note.ends_with(')') => head,
        _ => text,
    };
    let malformed = || NumericError::Malformed(text.to_string());
    let (numer_txt, denom_txt) = match text.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (text, None),
    };
    let numer = parse_signed_digits(numer_txt).ok_or_else(malformed)?;
    let denom = match denom_txt {
        Some(d) => {
            if d.is_empty() || !d.bytes().all(|b| b.is_ascii_digit()) {
                return Err(malformed());
            }
            BigInt::from_str(d).map_err(|_| malformed())?
        }
        None => BigInt::one(),
    };
    if denom.is_zero() {
        return Err(NumericError::ZeroDenominator(text.to_string()));
    }
    Ok(Rational(BigRational::new(numer, denom)))
}

fn parse_signed_digits(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let value = BigInt::from_str(digits).ok()?;
    Some(if s.starts_with('-') { -value } else { value })
}

impl FromStr for Rational {
    type Err = NumericError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_rational(s)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::integer(n)
    }
}

impl From<u64> for Rational {
    fn from(n: u64) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }
}

impl From<usize> for Rational {
    fn from(n: usize) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational(BigRational::from_integer(n))
    }
}

macro_rules! forward_binop {
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

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
// Panics on a zero divisor; use `checked_div` where the divisor is data.
forward_binop!(Div, div);

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

impl Mul<i64> for &Rational {
    type Output = Rational;
    fn mul(self, rhs: i64) -> Rational {
        Rational(&self.0 * BigRational::from_integer(rhs.into()))
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

/// Three-way comparison; exists mostly so callers can name the operation.
pub fn compare(lhs: &Rational, rhs: &Rational) -> Ordering {
    lhs.cmp(rhs)
}

/// Least common multiple of the denominators of `values`.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn parses_published_value() {
        let v = r("40165/4194304");
        assert_eq!(v.numer(), &BigInt::from(40165));
        assert_eq!(v.denom(), &BigInt::from(4194304));
    }

    #[test]
    fn parses_zero_and_canonicalizes() {
        assert_eq!(r("0").to_string(), "0/1");
        assert_eq!(r("6/4").to_string(), "3/2");
        assert_eq!(r("-6/4").to_string(), "-3/2");
    }

    #[test]
    fn rejects_bad_text() {
        for bad in ["", "1/", "/2", "1 /2", "1.5", "a/b", "--1", "1/-2", "+3"] {
            assert!(
                matches!(parse_rational(bad), Err(NumericError::Malformed(_))),
                "{bad} should be malformed"
            );
        }
        assert_eq!(
            parse_rational("3/0"),
            Err(NumericError::ZeroDenominator("3/0".into()))
        );
    }

    #[test]
    fn arithmetic_examples() {
        assert_eq!(r("1/3") + r("1/6"), r("1/2"));
        assert_eq!(compare(&r("271/960"), &r("17/60")), Ordering::Less);
        assert_eq!(r("653/1920") - r("17/50"), r("1/9600"));
        assert_eq!(r("1/3").min(r("1/6")), r("1/6"));
        assert_eq!(r("1/3").max(r("1/6")), r("1/3"));
        assert_eq!(r("1/2").checked_div(&Rational::zero()), Err(NumericError::DivisionByZero));
    }

    #[test]
    fn formats_global_bound() {
        let g = r("10060574276093395247/6374352691333693440");
        assert_eq!(g.to_string(), "10060574276093395247/6374352691333693440");
        assert_eq!(g.to_decimal(16), "1.578289555545198");
        assert!((g.to_f64() - 1.57828956).abs() < 5e-9);
        assert_eq!(Rational::zero().to_string(), "0/1");
        assert_eq!(r("1/2").to_string(), "1/2");
        assert_eq!(r("1/2").format(true), "1/2 (~0.5)");
    }

    #[test]
    fn floor_handles_negatives() {
        assert_eq!(r("7/2").floor(), BigInt::from(3));
        assert_eq!(r("-7/2").floor(), BigInt::from(-4));
        assert_eq!(r("4").floor(), BigInt::from(4));
    }

    #[test]
    fn decimal_truncates() {
        assert_eq!(r("1/3").to_decimal(5), "0.33333");
        assert_eq!(r("2/3").to_decimal(3), "0.666");
        assert_eq!(r("1/8").to_decimal(16), "0.125");
        assert_eq!(r("-5/4").to_decimal(3), "-1.25");
        assert_eq!(r("12345/1").to_decimal(3), "12345");
    }
}
