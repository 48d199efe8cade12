//! Closure of class B under affine maps, iid sums and sample means.
//!
//! For `xi ~ B(x; V(x))`:
//!
//! ```text
//! A xi + b            ~ B(Ax + b; A V(x) A')        (A non-singular)
//! xi_1 + ... + xi_n   ~ B(nx; n V(x))
//! (xi_1+...+xi_n)/n   ~ B(x; V(x)/n)
//! ```
//!
//! Each operation produces a new [`FamilySpec`] whose variance entries are
//! built by simultaneous symbolic substitution; the new family keeps the
//! same mean-variable names (they now denote the transformed mean).

use crate::expr::{Expr, Number};
use crate::families::{Chart, Domain, FamilyError, FamilySpec};
use nalgebra::DMatrix;
use num::rational::BigRational;
use num::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone)]
pub enum TransformError {
    SingularMatrix { det: f64 },
    BadShape { message: String },
    CountZero,
    Family(FamilyError),
}

impl fmt::Display for TransformError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransformError::SingularMatrix { det } => {
                write!(f, "matrix is numerically singular (det = {})", det)
            }
            TransformError::BadShape { message } => write!(f, "{}", message),
            TransformError::CountZero => write!(f, "need n >= 1"),
            TransformError::Family(e) => write!(f, "{}", e),
        }
    }
}

impl std::error::Error for TransformError {}

impl From<FamilyError> for TransformError {
    fn from(e: FamilyError) -> Self {
        TransformError::Family(e)
    }
}

fn to_rational(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite matrix entry")
}

/// Exact rational inverse via the adjugate, for m <= 4; every finite f64
/// entry is an exact rational so rational A gives a rational inverse.
fn rational_inverse(a: &[Vec<f64>]) -> Option<(Vec<Vec<BigRational>>, BigRational)> {
    let m = a.len();
    let q: Vec<Vec<BigRational>> = a
        .iter()
        .map(|row| row.iter().map(|&v| to_rational(v)).collect())
        .collect();
    let det = rational_det(&q);
    if det.is_zero() {
        return None;
    }
    let mut inv = vec![vec![BigRational::zero(); m]; m];
    for i in 0..m {
        for j in 0..m {
            let minor = rational_minor(&q, j, i);
            let sign = if (i + j) % 2 == 0 {
                BigRational::one()
            } else {
                -BigRational::one()
            };
            inv[i][j] = sign * minor / det.clone();
        }
    }
    Some((inv, det))
}

fn rational_minor(a: &[Vec<BigRational>], row: usize, col: usize) -> BigRational {
    let m = a.len();
    let sub: Vec<Vec<BigRational>> = (0..m)
        .filter(|&r| r != row)
        .map(|r| {
            (0..m)
                .filter(|&c| c != col)
                .map(|c| a[r][c].clone())
                .collect()
        })
        .collect();
    rational_det(&sub)
}

fn rational_det(a: &[Vec<BigRational>]) -> BigRational {
    match a.len() {
        0 => BigRational::one(),
        1 => a[0][0].clone(),
        2 => a[0][0].clone() * a[1][1].clone() - a[0][1].clone() * a[1][0].clone(),
        m => {
            let mut acc = BigRational::zero();
            for c in 0..m {
                if a[0][c].is_zero() {
                    continue;
                }
                let minor = rational_minor(a, 0, c);
                let term = a[0][c].clone() * minor;
                if c % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            acc
        }
    }
}

fn const_rational(q: &BigRational) -> Expr {
    Expr::constant(Number::Rational(q.clone()))
}

fn check_square(a: &[Vec<f64>], m: usize) -> Result<(), TransformError> {
    if a.len() != m || a.iter().any(|row| row.len() != m) {
        return Err(TransformError::BadShape {
            message: format!("A must be {m} x {m}"),
        });
    }
    Ok(())
}

/// Interval image of the domain box under `y = Ax + b`, entrywise interval
/// arithmetic. The result over-approximates the true image.
fn image_bounds(
    a: &[Vec<f64>],
    b: &[f64],
    bounds: &[(f64, f64)],
) -> Vec<(f64, f64)> {
    let m = b.len();
    (0..m)
        .map(|i| {
            let mut lo = b[i];
            let mut hi = b[i];
            for j in 0..m {
                let c = a[i][j];
                if c == 0.0 {
                    continue;
                }
                let (bl, bh) = bounds[j];
                let (tl, th) = if c > 0.0 { (c * bl, c * bh) } else { (c * bh, c * bl) };
                lo += tl;
                hi += th;
            }
            (lo, hi)
        })
        .collect()
}

/// Affine image `eta = A xi + b` of a class-B family.
pub fn affine(f: &FamilySpec, a: &[Vec<f64>], b: &[f64]) -> Result<FamilySpec, TransformError> {
    let m = f.dim;
    check_square(a, m)?;
    if b.len() != m {
        return Err(TransformError::BadShape {
            message: format!("b must have length {m}"),
        });
    }

    // Chart families: the affine map composes with the chart directly.
    if let Some(chart) = &f.chart {
        if m != 1 {
            return Err(TransformError::Family(FamilyError::ChartUnsupported {
                dim: chart.vars.len(),
            }));
        }
        let c = a[0][0];
        if c.abs() <= 1e-12 {
            return Err(TransformError::SingularMatrix { det: c });
        }
        let c_expr = Expr::from_f64(c);
        let mut out = f.clone();
        out.name = format!("{}_affine", f.name);
        out.v = vec![vec![Expr::mul(
            Expr::mul(c_expr.clone(), c_expr.clone()),
            f.v[0][0].clone(),
        )]];
        out.chart = Some(Chart {
            vars: chart.vars.clone(),
            mean: vec![Expr::add(
                Expr::mul(c_expr, chart.mean[0].clone()),
                Expr::from_f64(b[0]),
            )],
            bounds: chart.bounds.clone(),
        });
        out.laplace = None;
        out.s_char = None;
        out.param_map = None;
        out.domain = Domain {
            mean_bounds: image_bounds(a, b, &f.domain.mean_bounds),
            sample: f.domain.sample.clone(),
            constraint: f.domain.constraint.clone(),
        };
        out.domain_approx = true;
        return Ok(out);
    }

    let scale = a
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0f64, |acc, &v| acc.max(v.abs()))
        .max(1.0);
    let Some((inv, det)) = rational_inverse(a) else {
        return Err(TransformError::SingularMatrix { det: 0.0 });
    };
    let det_f = Number::Rational(det).to_f64();
    if det_f.abs() <= 1e-12 * scale.powi(m as i32) {
        return Err(TransformError::SingularMatrix { det: det_f });
    }

    // x_r = sum_j inv[r][j] (y_j - b_j), with the transformed mean reusing
    // the original variable names.
    let mut subst_map = BTreeMap::new();
    let mut z_subst = BTreeMap::new();
    let z_vars = f.z_vars();
    for r in 0..m {
        let mut x_expr = Expr::int(0);
        for j in 0..m {
            if inv[r][j].is_zero() {
                continue;
            }
            let shifted = Expr::sub(
                Expr::var(f.mean_vars[j].clone()),
                Expr::from_f64(b[j]),
            );
            x_expr = Expr::add(x_expr, Expr::mul(const_rational(&inv[r][j]), shifted));
        }
        subst_map.insert(f.mean_vars[r].clone(), x_expr);

        // w_r = (A' z)_r = sum_i a[i][r] z_i
        let mut w_expr = Expr::int(0);
        for i in 0..m {
            if a[i][r] == 0.0 {
                continue;
            }
            w_expr = Expr::add(
                w_expr,
                Expr::mul(Expr::from_f64(a[i][r]), Expr::var(z_vars[i].clone())),
            );
        }
        z_subst.insert(z_vars[r].clone(), w_expr);
    }

    // V_eta = A V(x(y)) A'
    let substituted: Vec<Vec<Expr>> = f
        .v
        .iter()
        .map(|row| row.iter().map(|e| e.subst(&subst_map)).collect())
        .collect();
    let mut v_new = vec![vec![Expr::int(0); m]; m];
    for i in 0..m {
        for j in 0..m {
            let mut acc = Expr::int(0);
            for r in 0..m {
                for k in 0..m {
                    if a[i][r] == 0.0 || a[j][k] == 0.0 {
                        continue;
                    }
                    let coeff = to_rational(a[i][r]) * to_rational(a[j][k]);
                    acc = Expr::add(
                        acc,
                        Expr::mul(const_rational(&coeff), substituted[r][k].clone()),
                    );
                }
            }
            v_new[i][j] = acc;
        }
    }

    // phi_eta(z, y) = exp(-z.b) phi(A'z, x(y))
    let laplace = f.laplace.as_ref().map(|phi| {
        let mut full_map = subst_map.clone();
        for (k, v) in &z_subst {
            full_map.insert(k.clone(), v.clone());
        }
        let mut shift = Expr::int(0);
        for i in 0..m {
            if b[i] == 0.0 {
                continue;
            }
            shift = Expr::add(
                shift,
                Expr::mul(Expr::from_f64(b[i]), Expr::var(z_vars[i].clone())),
            );
        }
        Expr::mul(Expr::exp(Expr::neg(shift)), phi.subst(&full_map))
    });

    // s_eta(y) = A^{-T} s(x(y))
    let s_char = f.s_char.as_ref().map(|s| {
        let substituted: Vec<Expr> = s.iter().map(|e| e.subst(&subst_map)).collect();
        (0..m)
            .map(|i| {
                let mut acc = Expr::int(0);
                for j in 0..m {
                    if inv[j][i].is_zero() {
                        continue;
                    }
                    acc = Expr::add(
                        acc,
                        Expr::mul(const_rational(&inv[j][i]), substituted[j].clone()),
                    );
                }
                acc
            })
            .collect()
    });

    let mean_bounds = image_bounds(a, b, &f.domain.mean_bounds);
    let sample_ranges: Vec<(f64, f64)> = {
        let base: Vec<(f64, f64)> = f
            .mean_vars
            .iter()
            .map(|v| f.domain.sample.ranges.get(v).copied().unwrap_or((0.0, 1.0)))
            .collect();
        image_bounds(a, b, &base)
    };
    let mut sample = f.domain.sample.clone();
    for (i, v) in f.mean_vars.iter().enumerate() {
        sample.ranges.insert(v.clone(), sample_ranges[i]);
    }

    Ok(FamilySpec {
        name: format!("{}_affine", f.name),
        dim: m,
        mean_vars: f.mean_vars.clone(),
        v: v_new,
        domain: Domain {
            mean_bounds,
            sample,
            constraint: None,
        },
        laplace,
        s_char,
        param_map: None,
        aux: f.aux.clone(),
        chart: None,
        unverified: f.unverified,
        domain_approx: true,
    })
}

/// Sum of `n` iid copies: `B(nx; nV(x))`, Laplace transform `phi^n`
/// re-expressed in the sum's mean `y = nx`.
pub fn convolve_iid(f: &FamilySpec, n: u32) -> Result<FamilySpec, TransformError> {
    if n == 0 {
        return Err(TransformError::CountZero);
    }
    let m = f.dim;
    let n_expr = Expr::int(n as i64);

    if let Some(chart) = &f.chart {
        let mut out = f.clone();
        out.name = format!("{}_sum{}", f.name, n);
        out.v = f
            .v
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| Expr::mul(n_expr.clone(), e.clone()))
                    .collect()
            })
            .collect();
        out.chart = Some(Chart {
            vars: chart.vars.clone(),
            mean: chart
                .mean
                .iter()
                .map(|e| Expr::mul(n_expr.clone(), e.clone()))
                .collect(),
            bounds: chart.bounds.clone(),
        });
        out.laplace = None;
        out.s_char = None;
        out.param_map = None;
        out.domain = Domain {
            mean_bounds: f
                .domain
                .mean_bounds
                .iter()
                .map(|&(lo, hi)| (n as f64 * lo, n as f64 * hi))
                .collect(),
            sample: f.domain.sample.clone(),
            constraint: f.domain.constraint.clone(),
        };
        out.domain_approx = f.domain_approx;
        return Ok(out);
    }

    // x -> x/n in every stored expression
    let mut subst_map = BTreeMap::new();
    for v in &f.mean_vars {
        subst_map.insert(
            v.clone(),
            Expr::div(Expr::var(v.clone()), n_expr.clone()),
        );
    }

    let v_new: Vec<Vec<Expr>> = f
        .v
        .iter()
        .map(|row| {
            row.iter()
                .map(|e| Expr::mul(n_expr.clone(), e.subst(&subst_map)))
                .collect()
        })
        .collect();
    let laplace = f
        .laplace
        .as_ref()
        .map(|phi| Expr::pow(phi.subst(&subst_map), Number::from_int(n as i64)));
    let s_char = f
        .s_char
        .as_ref()
        .map(|s| s.iter().map(|e| e.subst(&subst_map)).collect());

    let scale_bounds = |bounds: &[(f64, f64)]| -> Vec<(f64, f64)> {
        bounds
            .iter()
            .map(|&(lo, hi)| (n as f64 * lo, n as f64 * hi))
            .collect()
    };
    let mut sample = f.domain.sample.clone();
    for v in &f.mean_vars {
        if let Some(&(lo, hi)) = f.domain.sample.ranges.get(v) {
            sample
                .ranges
                .insert(v.clone(), (n as f64 * lo, n as f64 * hi));
        }
    }
    let constraint = f.domain.constraint.as_ref().map(|c| crate::families::SumBelow {
        vars: c.vars.clone(),
        limit: n as f64 * c.limit,
    });

    Ok(FamilySpec {
        name: format!("{}_sum{}", f.name, n),
        dim: m,
        mean_vars: f.mean_vars.clone(),
        v: v_new,
        domain: Domain {
            mean_bounds: scale_bounds(&f.domain.mean_bounds),
            sample,
            constraint,
        },
        laplace,
        s_char,
        param_map: None,
        aux: f.aux.clone(),
        chart: None,
        unverified: f.unverified,
        domain_approx: f.domain_approx,
    })
}

/// Sample mean of `n` iid copies: `B(x; V(x)/n)`; same mean variables.
pub fn sample_mean(f: &FamilySpec, n: u32) -> Result<FamilySpec, TransformError> {
    if n == 0 {
        return Err(TransformError::CountZero);
    }
    let n_expr = Expr::int(n as i64);
    let v_new: Vec<Vec<Expr>> = f
        .v
        .iter()
        .map(|row| {
            row.iter()
                .map(|e| Expr::div(e.clone(), n_expr.clone()))
                .collect()
        })
        .collect();
    // phi_mean(z, x) = phi(z/n, x)^n
    let laplace = f.laplace.as_ref().map(|phi| {
        let mut z_map = BTreeMap::new();
        for z in f.z_vars() {
            z_map.insert(z.clone(), Expr::div(Expr::var(z), n_expr.clone()));
        }
        Expr::pow(phi.subst(&z_map), Number::from_int(n as i64))
    });
    let s_char = f.s_char.as_ref().map(|s| {
        s.iter()
            .map(|e| Expr::mul(n_expr.clone(), e.clone()))
            .collect()
    });
    Ok(FamilySpec {
        name: format!("{}_mean{}", f.name, n),
        dim: f.dim,
        mean_vars: f.mean_vars.clone(),
        v: v_new,
        domain: f.domain.clone(),
        laplace,
        s_char,
        param_map: f.param_map.clone(),
        aux: f.aux.clone(),
        chart: f.chart.clone(),
        unverified: f.unverified,
        domain_approx: f.domain_approx,
    })
}

/// Numeric variance matrix of the transformed family straight from the
/// source family: `A V(x) A'` at a mean point `x` of the source. Used by
/// covariance cross-checks.
pub fn conjugate_variance(
    f: &FamilySpec,
    a: &[Vec<f64>],
    x: &[f64],
) -> Result<DMatrix<f64>, TransformError> {
    let m = f.dim;
    check_square(a, m)?;
    let v = f.v_at(x)?;
    let a_mat = DMatrix::from_fn(m, m, |i, j| a[i][j]);
    Ok(&a_mat * v * a_mat.transpose())
}

#[cfg(test)]
mod tests;
