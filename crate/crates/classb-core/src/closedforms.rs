//! Exact combinatorial closed forms: Stirling numbers of the second kind,
//! the quadratic-variance cumulant formula and its Binomial / Negative
//! Binomial / Poisson / Gamma specializations, and the first-passage
//! random-walk cumulant formula.

use crate::expr::{Expr, Number};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, ToPrimitive, Zero};
use std::fmt;
use std::sync::Mutex;

pub const STIRLING_MAX: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub enum ClosedFormError {
    OutOfRange { what: String },
}

impl fmt::Display for ClosedFormError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClosedFormError::OutOfRange { what } => write!(f, "out of range: {}", what),
        }
    }
}

impl std::error::Error for ClosedFormError {}

fn binomial_big(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= BigInt::from(n - i);
        den *= BigInt::from(i + 1);
    }
    num / den
}

fn factorial_big(n: usize) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= BigInt::from(i);
    }
    acc
}

/// Stirling number of the second kind via the explicit alternating sum
/// `S(k, m) = (1/m!) sum_j C(m, j) (-1)^j (m-j)^k`, exact in big integers.
///
/// The triangle recurrence `S(k+1, m) = m S(k, m) + S(k, m-1)` is kept as
/// an independent route in [`stirling2_triangle`]; tests hold the two equal.
pub fn stirling2(k: usize, m: usize) -> Result<BigInt, ClosedFormError> {
    if m > k || k > STIRLING_MAX {
        return Err(ClosedFormError::OutOfRange {
            what: format!("stirling2 needs 0 <= m <= k <= {}, got ({}, {})", STIRLING_MAX, k, m),
        });
    }
    Ok(stirling2_sum(k, m))
}

fn stirling2_sum(k: usize, m: usize) -> BigInt {
    if m == 0 {
        return if k == 0 { BigInt::one() } else { BigInt::zero() };
    }
    let mut acc = BigInt::zero();
    for j in 0..=m {
        let term = binomial_big(m, j) * BigInt::from(m - j).pow(k as u32);
        if j % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc / factorial_big(m)
}

/// Triangle-recurrence route, cached; the cross-check oracle for
/// [`stirling2`].
pub fn stirling2_triangle(k: usize, m: usize) -> BigInt {
    static TRIANGLE: Mutex<Vec<Vec<BigInt>>> = Mutex::new(Vec::new());
    if m > k {
        return BigInt::zero();
    }
    let mut rows = TRIANGLE.lock().unwrap();
    if rows.is_empty() {
        rows.push(vec![BigInt::one()]); // S(0,0) = 1
    }
    while rows.len() <= k {
        let prev = rows.last().unwrap().clone();
        let n = rows.len();
        let mut row = vec![BigInt::zero(); n + 1];
        for j in 1..=n {
            let carry = if j < prev.len() {
                BigInt::from(j) * &prev[j]
            } else {
                BigInt::zero()
            };
            row[j] = carry + &prev[j - 1];
        }
        rows.push(row);
    }
    rows[k][m].clone()
}

/// Odd double factorial `(2r+1)!! = (2r+1)! / (2^r r!)`, exact.
pub fn double_factorial_odd(r: usize) -> BigInt {
    let mut acc = BigInt::one();
    let mut v = 1usize;
    while v <= 2 * r + 1 {
        acc *= BigInt::from(v);
        v += 2;
    }
    acc
}

fn big_to_f64(v: &BigInt) -> f64 {
    v.to_f64().unwrap_or(f64::INFINITY)
}

/// Cumulant `s_{k+1}` of the quadratic-variance family `V(x) = x(ax + b)`:
///
/// ```text
/// s_{k+1}(x) = x(ax + b) sum_{m=1..k} m! b^{k-m} S(k, m) (ax)^{m-1}
/// ```
///
/// `a = 0, b = 1` gives the flat Poisson cumulants; `a = -1, b = 1, x = np`
/// the binomial ones; `a = 1/shape, b = 0` the Gamma ones.
pub fn cumulant_quadratic(a: f64, b: f64, x: f64, k: usize) -> Result<f64, ClosedFormError> {
    if k < 1 || k > STIRLING_MAX {
        return Err(ClosedFormError::OutOfRange {
            what: format!("quadratic closed form needs 1 <= k <= {}, got {}", STIRLING_MAX, k),
        });
    }
    let mut sum = 0.0;
    for m in 1..=k {
        let coeff = big_to_f64(&factorial_big(m)) * big_to_f64(&stirling2_sum(k, m));
        sum += coeff * b.powi((k - m) as i32) * (a * x).powi((m - 1) as i32);
    }
    Ok(x * (a * x + b) * sum)
}

/// Symbolic form of [`cumulant_quadratic`]: `s_{k+1}` as an expression in
/// `x` with exact rational coefficients.
pub fn cumulant_quadratic_expr(a: &Number, b: &Number, x: &Expr, k: usize) -> Result<Expr, ClosedFormError> {
    if k < 1 || k > STIRLING_MAX {
        return Err(ClosedFormError::OutOfRange {
            what: format!("quadratic closed form needs 1 <= k <= {}, got {}", STIRLING_MAX, k),
        });
    }
    let a_expr = Expr::constant(a.clone());
    let b_expr = Expr::constant(b.clone());
    let ax = Expr::mul(a_expr.clone(), x.clone());
    let mut sum = Expr::int(0);
    for m in 1..=k {
        let coeff = Expr::constant(Number::Rational(BigRational::from_integer(
            factorial_big(m) * stirling2_sum(k, m),
        )));
        let term = Expr::mul(
            coeff,
            Expr::mul(
                Expr::pow(b_expr.clone(), Number::from_int((k - m) as i64)),
                Expr::pow(ax.clone(), Number::from_int((m - 1) as i64)),
            ),
        );
        sum = Expr::add(sum, term);
    }
    let v = Expr::mul(x.clone(), Expr::add(Expr::mul(a_expr, x.clone()), b_expr));
    Ok(Expr::mul(v, sum))
}

/// `c_{k,r} = sum_{m=r..k} C(k, m) 2^{m-r} S(m, r)`, exact.
fn randomwalk_c(k: usize, r: usize) -> BigInt {
    let mut acc = BigInt::zero();
    for m in r..=k {
        acc += binomial_big(k, m) * BigInt::from(2).pow((m - r) as u32) * stirling2_sum(m, r);
    }
    acc
}

/// Cumulant `s_{k+2}` of the first-passage random-walk family at
/// `x = n/(2p-1)`:
///
/// ```text
/// s_{k+2} = (x^3/n^2 - x) sum_{r=0..k} (-1)^{k+r} (2r+1)!! c_{k,r} (x/n)^{2r}
/// ```
///
/// The sum's printed upper limit is ambiguous; `c_{k,r}` vanishes for
/// `r > k`, so summing to `k` is the inclusive choice, certified against
/// the recursion route by tests. `k = 0` gives `s_2 = x^3/n^2 - x`.
pub fn randomwalk_cumulant(n: u32, p: f64, k: usize) -> Result<f64, ClosedFormError> {
    if n < 1 {
        return Err(ClosedFormError::OutOfRange {
            what: "need n >= 1".into(),
        });
    }
    if !(p > 0.5 && p < 1.0) {
        return Err(ClosedFormError::OutOfRange {
            what: format!("need 0.5 < p < 1, got {}", p),
        });
    }
    if k > STIRLING_MAX {
        return Err(ClosedFormError::OutOfRange {
            what: format!("need k <= {}, got {}", STIRLING_MAX, k),
        });
    }
    let nf = n as f64;
    let x = nf / (2.0 * p - 1.0);
    let v = x.powi(3) / (nf * nf) - x;
    let ratio2 = (x / nf).powi(2);
    let mut sum = 0.0;
    for r in 0..=k {
        let sign = if (k + r) % 2 == 0 { 1.0 } else { -1.0 };
        let coeff = big_to_f64(&double_factorial_odd(r)) * big_to_f64(&randomwalk_c(k, r));
        sum += sign * coeff * ratio2.powi(r as i32);
    }
    Ok(v * sum)
}
