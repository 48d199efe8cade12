//! Immutable expression trees over named variables: parsing, printing,
//! symbolic differentiation, IEEE evaluation and probabilistic equivalence
//! checking.
//!
//! Construction applies constant folding (an operation on all-constant
//! children collapses to a constant whenever the result is defined and
//! finite) and the identity eliminations `x+0 -> x`, `x*1 -> x`, `x*0 -> 0`,
//! `x^1 -> x`, `x^0 -> 1` (for `x` not literally the zero constant) and
//! `x/1 -> x`. No further simplification is performed; equality of
//! expressions is decided numerically by [`equiv_numeric`].

mod number;
mod parse;
mod print;

pub use number::Number;
pub use parse::{parse, ParseError};

use crate::rng::Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

/// An immutable expression. Cloning is cheap (shared subtrees).
#[derive(Clone, PartialEq)]
pub struct Expr {
    node: Arc<Node>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Node {
    Const(Number),
    Var(String),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    /// Base raised to a numeric (integer or real) exponent.
    Pow(Expr, Number),
    Exp(Expr),
    Log(Expr),
    Sqrt(Expr),
    Neg(Expr),
}

impl Expr {
    fn new(node: Node) -> Self {
        Expr {
            node: Arc::new(node),
        }
    }

    pub(crate) fn node(&self) -> &Node {
        &self.node
    }

    pub fn constant(n: Number) -> Self {
        Expr::new(Node::Const(n))
    }

    pub fn int(v: i64) -> Self {
        Expr::constant(Number::from_int(v))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Expr::constant(Number::from_ratio(num, den))
    }

    /// Constant from a double, kept exact as a rational.
    pub fn from_f64(v: f64) -> Self {
        match Number::from_f64_exact(v) {
            Some(n) => Expr::constant(n),
            None => Expr::constant(Number::real(v)),
        }
    }

    pub fn var(name: impl Into<String>) -> Self {
        Expr::new(Node::Var(name.into()))
    }

    pub fn as_constant(&self) -> Option<&Number> {
        match self.node() {
            Node::Const(n) => Some(n),
            _ => None,
        }
    }

    fn is_const_zero(&self) -> bool {
        self.as_constant().is_some_and(|n| n.is_zero())
    }

    fn is_const_one(&self) -> bool {
        self.as_constant().is_some_and(|n| n.is_one())
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        if let (Some(x), Some(y)) = (a.as_constant(), b.as_constant()) {
            if let Some(r) = x.add(y) {
                return Expr::constant(r);
            }
        }
        if a.is_const_zero() {
            return b;
        }
        if b.is_const_zero() {
            return a;
        }
        Expr::new(Node::Add(a, b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        if let (Some(x), Some(y)) = (a.as_constant(), b.as_constant()) {
            if let Some(r) = x.sub(y) {
                return Expr::constant(r);
            }
        }
        if b.is_const_zero() {
            return a;
        }
        Expr::new(Node::Sub(a, b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        if let (Some(x), Some(y)) = (a.as_constant(), b.as_constant()) {
            if let Some(r) = x.mul(y) {
                return Expr::constant(r);
            }
        }
        if a.is_const_zero() || b.is_const_zero() {
            return Expr::int(0);
        }
        if a.is_const_one() {
            return b;
        }
        if b.is_const_one() {
            return a;
        }
        Expr::new(Node::Mul(a, b))
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        if let (Some(x), Some(y)) = (a.as_constant(), b.as_constant()) {
            if let Some(r) = x.div(y) {
                return Expr::constant(r);
            }
        }
        if b.is_const_one() {
            return a;
        }
        Expr::new(Node::Div(a, b))
    }

    pub fn pow(base: Expr, exponent: Number) -> Expr {
        if let Some(x) = base.as_constant() {
            if let Some(r) = x.pow(&exponent) {
                return Expr::constant(r);
            }
        }
        if exponent.is_one() {
            return base;
        }
        if exponent.is_zero() && !base.is_const_zero() {
            return Expr::int(1);
        }
        Expr::new(Node::Pow(base, exponent))
    }

    pub fn powi(base: Expr, exponent: i64) -> Expr {
        Expr::pow(base, Number::from_int(exponent))
    }

    pub fn exp(a: Expr) -> Expr {
        if let Some(x) = a.as_constant() {
            if let Some(r) = x.exp() {
                return Expr::constant(r);
            }
        }
        Expr::new(Node::Exp(a))
    }

    pub fn log(a: Expr) -> Expr {
        if let Some(x) = a.as_constant() {
            if let Some(r) = x.log() {
                return Expr::constant(r);
            }
        }
        Expr::new(Node::Log(a))
    }

    pub fn sqrt(a: Expr) -> Expr {
        if let Some(x) = a.as_constant() {
            if let Some(r) = x.sqrt() {
                return Expr::constant(r);
            }
        }
        Expr::new(Node::Sqrt(a))
    }

    pub fn neg(a: Expr) -> Expr {
        if let Some(x) = a.as_constant() {
            return Expr::constant(x.neg());
        }
        Expr::new(Node::Neg(a))
    }

    fn contains_var(&self, var: &str) -> bool {
        match self.node() {
            Node::Const(_) => false,
            Node::Var(name) => name == var,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.contains_var(var) || b.contains_var(var)
            }
            Node::Pow(a, _) | Node::Exp(a) | Node::Log(a) | Node::Sqrt(a) | Node::Neg(a) => {
                a.contains_var(var)
            }
        }
    }

    /// Exact partial derivative with respect to `var`; every other variable
    /// is treated as a constant.
    pub fn diff(&self, var: &str) -> Expr {
        if !self.contains_var(var) {
            return Expr::int(0);
        }
        match self.node() {
            Node::Const(_) => Expr::int(0),
            Node::Var(name) => {
                if name == var {
                    Expr::int(1)
                } else {
                    Expr::int(0)
                }
            }
            Node::Add(a, b) => Expr::add(a.diff(var), b.diff(var)),
            Node::Sub(a, b) => Expr::sub(a.diff(var), b.diff(var)),
            Node::Mul(a, b) => Expr::add(
                Expr::mul(a.diff(var), b.clone()),
                Expr::mul(a.clone(), b.diff(var)),
            ),
            Node::Div(a, b) => Expr::div(
                Expr::sub(
                    Expr::mul(a.diff(var), b.clone()),
                    Expr::mul(a.clone(), b.diff(var)),
                ),
                Expr::powi(b.clone(), 2),
            ),
            Node::Pow(base, exponent) => {
                // d(u^c) = c * u^(c-1) * u'
                let decremented = exponent
                    .sub(&Number::one())
                    .expect("exponent arithmetic cannot fail");
                Expr::mul(
                    Expr::mul(
                        Expr::constant(exponent.clone()),
                        Expr::pow(base.clone(), decremented),
                    ),
                    base.diff(var),
                )
            }
            Node::Exp(a) => Expr::mul(Expr::exp(a.clone()), a.diff(var)),
            Node::Log(a) => Expr::div(a.diff(var), a.clone()),
            Node::Sqrt(a) => Expr::div(
                a.diff(var),
                Expr::mul(Expr::int(2), Expr::sqrt(a.clone())),
            ),
            Node::Neg(a) => Expr::neg(a.diff(var)),
        }
    }

    /// IEEE double evaluation. Every free variable must be bound and every
    /// log/sqrt/division must be applied in-domain at the bound point.
    pub fn eval(&self, bindings: &BTreeMap<String, f64>) -> Result<f64, EvalError> {
        let v = match self.node() {
            Node::Const(n) => n.to_f64(),
            Node::Var(name) => *bindings
                .get(name)
                .ok_or_else(|| EvalError::UnboundVariable { name: name.clone() })?,
            Node::Add(a, b) => a.eval(bindings)? + b.eval(bindings)?,
            Node::Sub(a, b) => a.eval(bindings)? - b.eval(bindings)?,
            Node::Mul(a, b) => a.eval(bindings)? * b.eval(bindings)?,
            Node::Div(a, b) => {
                let den = b.eval(bindings)?;
                if den == 0.0 {
                    return Err(self.domain_error("division by zero"));
                }
                a.eval(bindings)? / den
            }
            Node::Pow(base, exponent) => {
                let b = base.eval(bindings)?;
                let e = exponent.to_f64();
                if b == 0.0 && e < 0.0 {
                    return Err(self.domain_error("zero base with negative exponent"));
                }
                if b < 0.0 && e.fract() != 0.0 {
                    return Err(self.domain_error("negative base with fractional exponent"));
                }
                b.powf(e)
            }
            Node::Exp(a) => a.eval(bindings)?.exp(),
            Node::Log(a) => {
                let v = a.eval(bindings)?;
                if v <= 0.0 {
                    return Err(self.domain_error("log of non-positive value"));
                }
                v.ln()
            }
            Node::Sqrt(a) => {
                let v = a.eval(bindings)?;
                if v < 0.0 {
                    return Err(self.domain_error("sqrt of negative value"));
                }
                v.sqrt()
            }
            Node::Neg(a) => -a.eval(bindings)?,
        };
        Ok(v)
    }

    fn domain_error(&self, what: &str) -> EvalError {
        EvalError::Domain {
            what: what.to_string(),
            subtree: self.to_string(),
        }
    }

    /// Simultaneous one-pass substitution of variables by expressions.
    /// Variables introduced by the replacement expressions are not themselves
    /// substituted again, so `x -> x/2` behaves as expected.
    pub fn subst(&self, map: &BTreeMap<String, Expr>) -> Expr {
        match self.node() {
            Node::Const(_) => self.clone(),
            Node::Var(name) => match map.get(name) {
                Some(replacement) => replacement.clone(),
                None => self.clone(),
            },
            Node::Add(a, b) => Expr::add(a.subst(map), b.subst(map)),
            Node::Sub(a, b) => Expr::sub(a.subst(map), b.subst(map)),
            Node::Mul(a, b) => Expr::mul(a.subst(map), b.subst(map)),
            Node::Div(a, b) => Expr::div(a.subst(map), b.subst(map)),
            Node::Pow(base, exponent) => Expr::pow(base.subst(map), exponent.clone()),
            Node::Exp(a) => Expr::exp(a.subst(map)),
            Node::Log(a) => Expr::log(a.subst(map)),
            Node::Sqrt(a) => Expr::sqrt(a.subst(map)),
            Node::Neg(a) => Expr::neg(a.subst(map)),
        }
    }

    /// Free variables of the expression.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut BTreeSet<String>) {
        match self.node() {
            Node::Const(_) => {}
            Node::Var(name) => {
                out.insert(name.clone());
            }
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.collect_variables(out);
                b.collect_variables(out);
            }
            Node::Pow(a, _) | Node::Exp(a) | Node::Log(a) | Node::Sqrt(a) | Node::Neg(a) => {
                a.collect_variables(out);
            }
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({})", self)
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::add(self, rhs)
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sub(self, rhs)
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::mul(self, rhs)
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::div(self, rhs)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

/// Evaluation failure.
#[derive(Debug, Clone, PartialEq)]
pub enum EvalError {
    UnboundVariable { name: String },
    Domain { what: String, subtree: String },
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::UnboundVariable { name } => write!(f, "unbound variable `{}`", name),
            EvalError::Domain { what, subtree } => {
                write!(f, "domain error: {} in `{}`", what, subtree)
            }
        }
    }
}

impl std::error::Error for EvalError {}

/// A box of per-variable ranges used for sampled checks.
#[derive(Debug, Clone, Default, serde::Serialize, serde::Deserialize)]
pub struct DomainBox {
    pub ranges: BTreeMap<String, (f64, f64)>,
}

impl DomainBox {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, var: impl Into<String>, lo: f64, hi: f64) -> Self {
        self.ranges.insert(var.into(), (lo, hi));
        self
    }

    pub fn sample(&self, rng: &mut Rng) -> BTreeMap<String, f64> {
        self.ranges
            .iter()
            .map(|(name, &(lo, hi))| (name.clone(), rng.uniform(lo, hi)))
            .collect()
    }

    pub fn is_degenerate(&self) -> bool {
        self.ranges.is_empty() || self.ranges.values().all(|&(lo, hi)| hi <= lo)
    }
}

/// Equivalence-check failure: no sampled point was in-domain for both sides.
#[derive(Debug, Clone)]
pub struct AllPointsOutOfDomain {
    pub trials: usize,
    pub last_error: EvalError,
}

impl fmt::Display for AllPointsOutOfDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "all {} sampled points were out of domain (last error: {})",
            self.trials, self.last_error
        )
    }
}

impl std::error::Error for AllPointsOutOfDomain {}

pub const EQUIV_DEFAULT_SEED: u64 = 0x00C1_A55B;

/// Probabilistic equivalence: `|e1 - e2| <= tol * (1 + |e1|)` at `trials`
/// points sampled deterministically from `domain`, skipping points where
/// either side is out of domain. This is a sampled check, not a canonical
/// equality decision.
pub fn equiv_numeric(
    e1: &Expr,
    e2: &Expr,
    domain: &DomainBox,
    trials: usize,
    tol: f64,
) -> Result<bool, AllPointsOutOfDomain> {
    equiv_numeric_seeded(e1, e2, domain, trials, tol, EQUIV_DEFAULT_SEED)
}

pub fn equiv_numeric_seeded(
    e1: &Expr,
    e2: &Expr,
    domain: &DomainBox,
    trials: usize,
    tol: f64,
    seed: u64,
) -> Result<bool, AllPointsOutOfDomain> {
    assert!(trials >= 1, "at least one trial required");
    assert!(!domain.is_degenerate(), "degenerate sampling domain");
    let mut rng = Rng::seed_from(seed);
    let mut evaluated = 0usize;
    let mut last_error = None;
    for _ in 0..trials {
        let point = domain.sample(&mut rng);
        let v1 = match e1.eval(&point) {
            Ok(v) => v,
            Err(e) => {
                last_error = Some(e);
                continue;
            }
        };
        let v2 = match e2.eval(&point) {
            Ok(v) => v,
            Err(e) => {
                last_error = Some(e);
                continue;
            }
        };
        evaluated += 1;
        if (v1 - v2).abs() > tol * (1.0 + v1.abs()) {
            return Ok(false);
        }
    }
    if evaluated == 0 {
        return Err(AllPointsOutOfDomain {
            trials,
            last_error: last_error.unwrap_or(EvalError::UnboundVariable {
                name: "<empty domain>".into(),
            }),
        });
    }
    Ok(true)
}

#[cfg(test)]
mod tests;
