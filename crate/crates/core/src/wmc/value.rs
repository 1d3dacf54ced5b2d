//! Exact and floating numeric values for weights and probabilities.

use std::fmt;
use std::ops::{Add, Div, Mul, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Absolute tolerance for comparing values when either side is a float.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

/// A nonnegative weight or probability value.
///
/// The default representation is an exact rational, so probability
/// equalities are decided without tolerance games; a floating
/// representation is available for speed. Arithmetic between the two
/// promotes to floating point.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Rational(BigRational),
    Float(f64),
}

impl Value {
    pub fn zero() -> Self {
        Value::Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Value::Rational(BigRational::one())
    }

    /// Exact rational from an integer numerator and denominator.
    /// Panics if `denom` is zero.
    pub fn ratio(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Value::Rational(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn integer(n: i64) -> Self {
        Value::Rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// Parses an exact rational from `"3"`, `"0.25"`, or `"1/4"` forms.
    /// Decimal literals convert exactly: `"0.25"` is 1/4, not a float.
    pub fn parse(s: &str) -> Result<Value, ParseValueError> {
        parse_rational(s).map(Value::Rational)
    }

    /// The same value in the floating representation.
    pub fn to_float(&self) -> Value {
        Value::Float(self.to_f64())
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            Value::Float(f) => *f,
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Value::Rational(_))
    }

    /// Exact zero test. Float sums of nonnegative terms are exactly 0.0
    /// only when every term is, so no tolerance is needed here.
    pub fn is_zero(&self) -> bool {
        match self {
            Value::Rational(r) => r.is_zero(),
            Value::Float(f) => *f == 0.0,
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Value::Rational(r) => r.is_positive(),
            Value::Float(f) => *f > 0.0,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Value::Rational(r) => r.is_negative(),
            Value::Float(f) => *f < 0.0,
        }
    }

    /// Equality up to representation: exact when both sides are rational,
    /// within [`FLOAT_TOLERANCE`] otherwise.
    pub fn approx_eq(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Rational(a), Value::Rational(b)) => a == b,
            _ => (self.to_f64() - other.to_f64()).abs() <= FLOAT_TOLERANCE,
        }
    }

    /// `self ≤ other`, exact for rationals, plain comparison for floats.
    pub fn le(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Rational(a), Value::Rational(b)) => a <= b,
            _ => self.to_f64() <= other.to_f64(),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Rational(r) => write!(f, "{r}"),
            Value::Float(x) => write!(f, "{x}"),
        }
    }
}

macro_rules! value_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for &Value {
            type Output = Value;
            fn $method(self, rhs: &Value) -> Value {
                match (self, rhs) {
                    (Value::Rational(a), Value::Rational(b)) => Value::Rational(a $op b),
                    _ => Value::Float(self.to_f64() $op rhs.to_f64()),
                }
            }
        }

        impl $trait for Value {
            type Output = Value;
            fn $method(self, rhs: Value) -> Value {
                (&self).$method(&rhs)
            }
        }
    };
}

value_binop!(Add, add, +);
value_binop!(Sub, sub, -);
value_binop!(Mul, mul, *);
value_binop!(Div, div, /);

/// A probability: a [`Value`] in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Probability(Value);

impl Probability {
    /// Wraps a value, clamping floating rounding residue into [0, 1].
    /// Rational values must already be in range.
    pub fn new(value: Value) -> Self {
        match value {
            Value::Rational(r) => {
                debug_assert!(
                    !r.is_negative() && r <= BigRational::one(),
                    "probability out of range: {r}"
                );
                Probability(Value::Rational(r))
            }
            Value::Float(f) => Probability(Value::Float(f.clamp(0.0, 1.0))),
        }
    }

    pub fn value(&self) -> &Value {
        &self.0
    }

    pub fn into_value(self) -> Value {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_one(&self) -> bool {
        self.0.approx_eq(&Value::one())
    }

    pub fn approx_eq(&self, other: &Probability) -> bool {
        self.0.approx_eq(&other.0)
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Error from [`Value::parse`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse `{input}` as a number (expected e.g. 3, 0.25, or 1/4)")]
pub struct ParseValueError {
    pub input: String,
}

fn parse_rational(s: &str) -> Result<BigRational, ParseValueError> {
    let err = || ParseValueError { input: s.to_string() };
    let s = s.trim();
    if let Some((numer, denom)) = s.split_once('/') {
        let numer: BigInt = numer.trim().parse().map_err(|_| err())?;
        let denom: BigInt = denom.trim().parse().map_err(|_| err())?;
        if denom.is_zero() {
            return Err(err());
        }
        return Ok(BigRational::new(numer, denom));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        // Exact decimal: digits over a power of ten.
        let negative = int_part.starts_with('-');
        let int_digits = int_part.strip_prefix(['-', '+']).unwrap_or(int_part);
        if int_digits.is_empty()
            || !int_digits.chars().all(|c| c.is_ascii_digit())
            || frac_part.is_empty()
            || !frac_part.chars().all(|c| c.is_ascii_digit())
        {
            return Err(err());
        }
        let mut digits = String::with_capacity(int_digits.len() + frac_part.len());
        digits.push_str(int_digits);
        digits.push_str(frac_part);
        let numer: BigInt = digits.parse().map_err(|_| err())?;
        let denom = BigInt::from(10u32).pow(frac_part.len() as u32);
        let magnitude = BigRational::new(numer, denom);
        return Ok(if negative { -magnitude } else { magnitude });
    }
    let numer: BigInt = s.parse().map_err(|_| err())?;
    Ok(BigRational::from_integer(numer))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_literals_parse_to_exact_rationals() {
        assert_eq!(Value::parse("0.25").unwrap(), Value::ratio(1, 4));
        assert_eq!(Value::parse("0.7").unwrap(), Value::ratio(7, 10));
        assert_eq!(Value::parse("1.3").unwrap(), Value::ratio(13, 10));
        assert_eq!(Value::parse("3").unwrap(), Value::integer(3));
        assert_eq!(Value::parse("1/4").unwrap(), Value::ratio(1, 4));
        assert_eq!(Value::parse("-0.5").unwrap(), Value::ratio(-1, 2));
        assert_eq!(Value::parse("0.25").unwrap().to_string(), "1/4");
    }

    #[test]
    fn malformed_numbers_are_rejected() {
        for bad in ["", "x", "1.2.3", "1/0", "1.", ".5", "0.2x"] {
            assert!(Value::parse(bad).is_err(), "accepted {bad:?}");
        }
    }

    #[test]
    fn arithmetic_is_exact_for_rationals() {
        let a = Value::ratio(1, 3);
        let b = Value::ratio(1, 6);
        assert_eq!(&a + &b, Value::ratio(1, 2));
        assert_eq!(&a * &b, Value::ratio(1, 18));
        assert_eq!(&a - &b, Value::ratio(1, 6));
        assert_eq!(&a / &b, Value::integer(2));
        // The classic float counterexample stays exact here.
        let tenth = Value::parse("0.1").unwrap();
        let sum = &(&tenth + &tenth) + &tenth;
        assert_eq!(sum, Value::ratio(3, 10));
    }

    #[test]
    fn mixed_arithmetic_promotes_to_float() {
        let a = Value::ratio(1, 2);
        let b = Value::Float(0.25);
        match &a * &b {
            Value::Float(f) => assert!((f - 0.125).abs() < 1e-12),
            other => panic!("expected float, got {other:?}"),
        }
    }

    #[test]
    fn approx_eq_is_exact_for_rationals_and_tolerant_for_floats() {
        assert!(Value::ratio(1, 3).approx_eq(&Value::ratio(2, 6)));
        assert!(!Value::ratio(1, 3).approx_eq(&Value::ratio(1, 4)));
        assert!(Value::Float(0.3).approx_eq(&Value::ratio(3, 10)));
        assert!(Value::Float(0.5).approx_eq(&Value::Float(0.5 + 1e-10)));
        assert!(!Value::Float(0.5).approx_eq(&Value::Float(0.5 + 1e-6)));
    }

    #[test]
    fn probability_clamps_float_rounding_residue() {
        let p = Probability::new(Value::Float(1.0 + 1e-12));
        assert_eq!(p.value().to_f64(), 1.0);
        assert!(p.is_one());
        assert!(Probability::new(Value::zero()).is_zero());
    }
}
