//! Fisher information of a class-B family in its mean parametrization:
//! `I(x) = V^{-1}(x)`.

use crate::expr::Expr;
use crate::families::{FamilyError, FamilySpec};
use nalgebra::DMatrix;
use std::fmt;

/// Condition numbers beyond this are reported instead of silently inverted.
pub const CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Clone)]
pub enum InferenceError {
    IllConditioned { condition: f64 },
    Singular,
    DimensionTooLarge { dim: usize },
    Family(FamilyError),
}

impl fmt::Display for InferenceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InferenceError::IllConditioned { condition } => {
                write!(f, "V(x) is ill-conditioned (condition number {:.3e})", condition)
            }
            InferenceError::Singular => write!(f, "V(x) is singular"),
            InferenceError::DimensionTooLarge { dim } => {
                write!(f, "symbolic inversion is limited to dim <= 3, got {}", dim)
            }
            InferenceError::Family(e) => write!(f, "{}", e),
        }
    }
}

impl std::error::Error for InferenceError {}

impl From<FamilyError> for InferenceError {
    fn from(e: FamilyError) -> Self {
        InferenceError::Family(e)
    }
}

/// `I(x) = V^{-1}(x)` numerically: LU solve with partial pivoting, with the
/// condition number (from the singular values) reported when it exceeds
/// [`CONDITION_LIMIT`]. The result is symmetrized.
pub fn fisher_info(f: &FamilySpec, x: &[f64]) -> Result<Vec<Vec<f64>>, InferenceError> {
    let v = f.v_at(x)?;
    let m = f.dim;
    let svd = v.clone().svd(false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let smin = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(smin > 0.0) {
        return Err(InferenceError::Singular);
    }
    let condition = smax / smin;
    if condition > CONDITION_LIMIT {
        return Err(InferenceError::IllConditioned { condition });
    }
    let inv = v.lu().try_inverse().ok_or(InferenceError::Singular)?;
    let sym = (&inv + inv.transpose()) * 0.5;
    Ok((0..m)
        .map(|i| (0..m).map(|j| sym[(i, j)]).collect())
        .collect())
}

fn det2(v: &[Vec<Expr>]) -> Expr {
    Expr::sub(
        Expr::mul(v[0][0].clone(), v[1][1].clone()),
        Expr::mul(v[0][1].clone(), v[1][0].clone()),
    )
}

/// Symbolic `V^{-1}(x)` via the adjugate, for dim <= 3. Entries are
/// expressions in the family's coordinates (mean variables, or the chart
/// variable for chart families).
pub fn fisher_info_symbolic(f: &FamilySpec) -> Result<Vec<Vec<Expr>>, InferenceError> {
    let v = &f.v;
    match f.dim {
        1 => Ok(vec![vec![Expr::div(Expr::int(1), v[0][0].clone())]]),
        2 => {
            let det = det2(v);
            let entry = |e: Expr, negate: bool| {
                let q = Expr::div(e, det.clone());
                if negate {
                    Expr::neg(q)
                } else {
                    q
                }
            };
            Ok(vec![
                vec![
                    entry(v[1][1].clone(), false),
                    entry(v[0][1].clone(), true),
                ],
                vec![
                    entry(v[1][0].clone(), true),
                    entry(v[0][0].clone(), false),
                ],
            ])
        }
        3 => {
            let minor = |r: usize, c: usize| -> Expr {
                let rows: Vec<usize> = (0..3).filter(|&i| i != r).collect();
                let cols: Vec<usize> = (0..3).filter(|&j| j != c).collect();
                Expr::sub(
                    Expr::mul(
                        v[rows[0]][cols[0]].clone(),
                        v[rows[1]][cols[1]].clone(),
                    ),
                    Expr::mul(
                        v[rows[0]][cols[1]].clone(),
                        v[rows[1]][cols[0]].clone(),
                    ),
                )
            };
            let mut det = Expr::int(0);
            for c in 0..3 {
                let term = Expr::mul(v[0][c].clone(), minor(0, c));
                det = if c % 2 == 0 {
                    Expr::add(det, term)
                } else {
                    Expr::sub(det, term)
                };
            }
            let mut out = vec![vec![Expr::int(0); 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    // adjugate: cofactor of (j, i)
                    let cof = minor(j, i);
                    let signed = if (i + j) % 2 == 0 {
                        cof
                    } else {
                        Expr::neg(cof)
                    };
                    out[i][j] = Expr::div(signed, det.clone());
                }
            }
            Ok(out)
        }
        dim => Err(InferenceError::DimensionTooLarge { dim }),
    }
}
