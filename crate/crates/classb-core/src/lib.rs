//! Class-B exponential statistical structures.
//!
//! A family `{Q(x)}` indexed by its mean vector `x` belongs to class B when
//! its Laplace transform `phi(z, x) = E exp(-z . xi)` satisfies
//!
//! ```text
//! d(phi)/dz_i + sum_j v_ij(x) d(phi)/dx_j + x_i phi = 0,   phi(0, x) = 1,
//! ```
//!
//! where `V(x) = (v_ij(x))` is the covariance written as a function of the
//! mean (the variance function). Everything in this crate hangs off that
//! single equation: the built-in family registry, the moment/cumulant
//! recursions it induces, closure under affine maps and iid sums, Fisher
//! information `V^{-1}(x)`, and the exponential tail bound with exponent
//! `A(y) = (y-x) [ integral_0^1 (1-t) V^{-1}(x + t(y-x)) dt ] (y-x)'`.
//!
//! Analytic results are checked against independent brute-force oracles
//! (exact pmf/pdf summation or quadrature, and seeded Monte Carlo) in the
//! [`oracle`] module; [`selftest`] bundles those checks into the acceptance
//! suite exposed as `classb selftest`.

pub mod closedforms;
pub mod expr;
pub mod families;
pub mod inference;
pub mod moments;
pub mod oracle;
pub mod quadrature;
pub mod rng;
pub mod selftest;
pub mod tails;
pub mod transforms;

pub use expr::{equiv_numeric, parse, DomainBox, EvalError, Expr, Number, ParseError};
pub use families::{builtin, from_variance, FamilySpec, ResidualReport};
pub use moments::{MomentTable, MultiIndex, TableKind};
pub use tails::TailReport;

