//! Precedence-aware printing. The printed form reparses to a structurally
//! stable tree: `parse(print(e))` is a fixed point of `parse . print`.

use super::{Expr, Node, Number};
use std::fmt;

// Precedence levels mirror the grammar: additive 1, multiplicative 2,
// unary minus 3, power 4, atoms 5.
fn precedence(e: &Expr) -> u8 {
    match e.node() {
        Node::Add(..) | Node::Sub(..) => 1,
        Node::Mul(..) | Node::Div(..) => 2,
        Node::Neg(..) => 3,
        Node::Pow(..) => 4,
        Node::Exp(..) | Node::Log(..) | Node::Sqrt(..) | Node::Var(..) => 5,
        Node::Const(n) => const_precedence(n),
    }
}

// Constants print as "p/q" (a quotient), "-3" (a negation) or a bare
// number; parenthesization must treat them accordingly. A negative
// non-integer rational prints as "-p/q", which reparses at quotient level.
fn const_precedence(n: &Number) -> u8 {
    match n {
        Number::Rational(r) => {
            if !num::rational::BigRational::is_integer(r) {
                2
            } else if num::Signed::is_negative(r) {
                3
            } else {
                5
            }
        }
        Number::Real(v) => {
            if *v < 0.0 {
                3
            } else {
                5
            }
        }
    }
}

fn write_at(e: &Expr, min_prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let prec = precedence(e);
    let need_parens = prec < min_prec;
    if need_parens {
        write!(f, "(")?;
    }
    match e.node() {
        Node::Const(n) => write!(f, "{}", n)?,
        Node::Var(name) => write!(f, "{}", name)?,
        Node::Add(a, b) => {
            write_at(a, 1, f)?;
            write!(f, "+")?;
            write_at(b, 2, f)?;
        }
        Node::Sub(a, b) => {
            write_at(a, 1, f)?;
            write!(f, "-")?;
            write_at(b, 2, f)?;
        }
        Node::Mul(a, b) => {
            write_at(a, 2, f)?;
            write!(f, "*")?;
            write_at(b, 3, f)?;
        }
        Node::Div(a, b) => {
            write_at(a, 2, f)?;
            write!(f, "/")?;
            write_at(b, 3, f)?;
        }
        Node::Neg(a) => {
            write!(f, "-")?;
            write_at(a, 3, f)?;
        }
        Node::Pow(base, exponent) => {
            write_at(base, 5, f)?;
            write!(f, "^")?;
            write_exponent(exponent, f)?;
        }
        Node::Exp(a) => {
            write!(f, "exp(")?;
            write_at(a, 1, f)?;
            write!(f, ")")?;
        }
        Node::Log(a) => {
            write!(f, "log(")?;
            write_at(a, 1, f)?;
            write!(f, ")")?;
        }
        Node::Sqrt(a) => {
            write!(f, "sqrt(")?;
            write_at(a, 1, f)?;
            write!(f, ")")?;
        }
    }
    if need_parens {
        write!(f, ")")?;
    }
    Ok(())
}

// The exponent slot accepts a unary, so integers (possibly negated) may be
// bare; anything else needs parentheses ("x^1/2" would parse as (x^1)/2).
fn write_exponent(n: &Number, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let bare = match n {
        Number::Rational(r) => num::rational::BigRational::is_integer(r),
        Number::Real(v) => v.fract() == 0.0 && v.abs() < 1e15,
    };
    if bare {
        write!(f, "{}", n)
    } else {
        write!(f, "({})", n)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_at(self, 0, f)
    }
}
