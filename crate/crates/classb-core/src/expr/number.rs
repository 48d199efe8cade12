//! Constant values of expression trees: exact rationals where possible,
//! IEEE doubles otherwise.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use std::fmt;

/// A numeric constant. Rational arithmetic is kept exact; any operation that
/// leaves the rationals (exp, log, fractional powers, ...) degrades to `f64`.
#[derive(Debug, Clone, PartialEq)]
pub enum Number {
    Rational(BigRational),
    Real(f64),
}

impl Number {
    pub fn zero() -> Self {
        Number::Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Number::Rational(BigRational::one())
    }

    pub fn from_int(v: i64) -> Self {
        Number::Rational(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Number::Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// Exact conversion: every finite double is a rational number.
    pub fn from_f64_exact(v: f64) -> Option<Self> {
        BigRational::from_float(v).map(Number::Rational)
    }

    pub fn real(v: f64) -> Self {
        Number::Real(v)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Number::Rational(r) => r.is_zero(),
            Number::Real(v) => *v == 0.0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Number::Rational(r) => r.is_one(),
            Number::Real(v) => *v == 1.0,
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Number::Rational(_))
    }

    /// Integer value when the number is an exact integer.
    pub fn as_integer(&self) -> Option<&BigInt> {
        match self {
            Number::Rational(r) if r.is_integer() => Some(r.numer()),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Rational(r) => rational_to_f64(r),
            Number::Real(v) => *v,
        }
    }

    pub fn neg(&self) -> Number {
        match self {
            Number::Rational(r) => Number::Rational(-r),
            Number::Real(v) => Number::Real(-v),
        }
    }

    pub fn add(&self, other: &Number) -> Option<Number> {
        binop(self, other, |a, b| Some(a + b), |a, b| a + b)
    }

    pub fn sub(&self, other: &Number) -> Option<Number> {
        binop(self, other, |a, b| Some(a - b), |a, b| a - b)
    }

    pub fn mul(&self, other: &Number) -> Option<Number> {
        binop(self, other, |a, b| Some(a * b), |a, b| a * b)
    }

    /// Division; `None` when the divisor is zero.
    pub fn div(&self, other: &Number) -> Option<Number> {
        if other.is_zero() {
            return None;
        }
        binop(self, other, |a, b| Some(a / b), |a, b| a / b)
    }

    /// Self raised to `exp`. Integer powers of rationals stay rational;
    /// perfect rational roots of `sqrt` are handled by [`Number::sqrt`].
    /// Returns `None` when the result is undefined or non-finite
    /// (`0^-k`, negative base with fractional exponent, overflow).
    pub fn pow(&self, exp: &Number) -> Option<Number> {
        if let (Number::Rational(base), Some(e)) = (self, exp.as_integer()) {
            if let Some(e32) = e.to_i32() {
                if base.is_zero() && e32 <= 0 {
                    return None;
                }
                if e32.unsigned_abs() <= 4096 {
                    let p = base.pow(e32);
                    return Some(Number::Rational(p));
                }
            }
        }
        let b = self.to_f64();
        let e = exp.to_f64();
        if b == 0.0 && e <= 0.0 {
            return None;
        }
        if b < 0.0 && e.fract() != 0.0 {
            return None;
        }
        finite(b.powf(e))
    }

    pub fn exp(&self) -> Option<Number> {
        if self.is_zero() {
            return Some(Number::one());
        }
        finite(self.to_f64().exp())
    }

    /// Natural logarithm; `None` for arguments <= 0. `log(1)` stays exact.
    pub fn log(&self) -> Option<Number> {
        if self.is_one() {
            return Some(Number::zero());
        }
        let v = self.to_f64();
        if v <= 0.0 {
            return None;
        }
        finite(v.ln())
    }

    /// Square root; exact when the operand is a perfect rational square.
    pub fn sqrt(&self) -> Option<Number> {
        match self {
            Number::Rational(r) => {
                if r.is_negative() {
                    return None;
                }
                let n = r.numer().sqrt();
                let d = r.denom().sqrt();
                if &n * &n == *r.numer() && &d * &d == *r.denom() {
                    return Some(Number::Rational(BigRational::new(n, d)));
                }
                finite(rational_to_f64(r).sqrt())
            }
            Number::Real(v) => {
                if *v < 0.0 {
                    None
                } else {
                    finite(v.sqrt())
                }
            }
        }
    }
}

fn binop(
    a: &Number,
    b: &Number,
    exact: impl Fn(&BigRational, &BigRational) -> Option<BigRational>,
    approx: impl Fn(f64, f64) -> f64,
) -> Option<Number> {
    match (a, b) {
        (Number::Rational(x), Number::Rational(y)) => exact(x, y).map(Number::Rational),
        _ => finite(approx(a.to_f64(), b.to_f64())),
    }
}

fn finite(v: f64) -> Option<Number> {
    if v.is_finite() {
        Some(Number::Real(v))
    } else {
        None
    }
}

/// Correctly scaled rational -> f64 conversion. Falls back to a scaled
/// division when numerator or denominator overflow f64 on their own.
fn rational_to_f64(r: &BigRational) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Shift both parts into range and divide.
    let bits_n = r.numer().bits() as i64;
    let bits_d = r.denom().bits() as i64;
    let shift = (bits_n.max(bits_d) - 900).max(0) as u64;
    let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Rational(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Number::Real(v) => write!(f, "{:?}", v),
        }
    }
}
