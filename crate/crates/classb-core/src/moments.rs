//! Moment recursions induced by the defining equation.
//!
//! With `V(x) = (v_ij(x))` the variance function of a class-B family, the
//! raw moments `a_k`, central moments `b_k` and cumulants `s_k` (as
//! functions of the mean `x`, multi-index `k`) satisfy
//!
//! ```text
//! a_{k+e_i} = sum_j v_ij da_k/dx_j + x_i a_k,          a_{e_i} = x_i
//! b_{k+e_i} = sum_j v_ij (db_k/dx_j + k_j b_{k-e_j}),  b_0 = 1, b_{e_i} = 0
//! s_{k+e_i} = sum_j v_ij ds_k/dx_j,                    s_{e_i} = x_i
//! ```
//!
//! Tables are built along a fixed generation order (lowest-indexed nonzero
//! coordinate first); path-independence is asserted by tests rather than
//! assumed. Auxiliary symbols in `V` (n, sigma2, ...) are constants under
//! `d/dx`. For families carried in a univariate parametric chart
//! `x = m(t)`, derivatives use the chain rule `d/dx = (d/dt) / m'(t)`.

use crate::expr::{EvalError, Expr, Number};
use crate::families::FamilySpec;
use num::bigint::BigInt;
use num::rational::BigRational;
use num::One;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

/// Multi-index `k = (k_1, ..., k_m)`; keys of moment tables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn unit(dim: usize, i: usize) -> Self {
        let mut k = vec![0; dim];
        k[i] = 1;
        MultiIndex(k)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Total order `|k|`.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn incremented(&self, i: usize) -> Self {
        let mut k = self.0.clone();
        k[i] += 1;
        MultiIndex(k)
    }

    /// `k - e_i` when `k_i > 0`.
    pub fn decremented(&self, i: usize) -> Option<Self> {
        if self.0[i] == 0 {
            return None;
        }
        let mut k = self.0.clone();
        k[i] -= 1;
        Some(MultiIndex(k))
    }

    fn first_nonzero(&self) -> Option<usize> {
        self.0.iter().position(|&v| v > 0)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dim() == 1 {
            write!(f, "{}", self.0[0])
        } else {
            let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
            write!(f, "({})", parts.join(","))
        }
    }
}

/// Which moment family a table holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TableKind {
    Raw,
    Central,
    Cumulant,
}

impl fmt::Display for TableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableKind::Raw => write!(f, "raw"),
            TableKind::Central => write!(f, "central"),
            TableKind::Cumulant => write!(f, "cumulant"),
        }
    }
}

/// Symbolic moment table of one kind, complete for all `|k| <= max_order`.
#[derive(Debug, Clone)]
pub struct MomentTable {
    pub kind: TableKind,
    pub family: FamilySpec,
    pub max_order: u32,
    pub entries: BTreeMap<MultiIndex, Expr>,
}

#[derive(Debug, Clone)]
pub enum MomentError {
    OrderTooSmall { kind: TableKind, min: u32, got: u32 },
    ChartUnsupported { dim: usize },
    IncompleteTable { missing: MultiIndex },
    Eval(EvalError),
}

impl fmt::Display for MomentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MomentError::OrderTooSmall { kind, min, got } => {
                write!(f, "{} table needs order >= {}, got {}", kind, min, got)
            }
            MomentError::ChartUnsupported { dim } => write!(
                f,
                "moment recursion requires V in the mean variables or a univariate chart \
                 (chart dimension {})",
                dim
            ),
            MomentError::IncompleteTable { missing } => {
                write!(f, "input table is missing entry {}", missing)
            }
            MomentError::Eval(e) => write!(f, "{}", e),
        }
    }
}

impl std::error::Error for MomentError {}

impl From<EvalError> for MomentError {
    fn from(e: EvalError) -> Self {
        MomentError::Eval(e)
    }
}

/// Differentiation in the mean coordinates, chart-aware.
struct MeanCalculus<'a> {
    family: &'a FamilySpec,
    /// 1 / m'(t) for a univariate chart, None for identity charts.
    chart_slope_inv: Option<Expr>,
}

impl<'a> MeanCalculus<'a> {
    fn new(family: &'a FamilySpec) -> Result<Self, MomentError> {
        let chart_slope_inv = match &family.chart {
            None => None,
            Some(chart) => {
                if chart.vars.len() != 1 {
                    return Err(MomentError::ChartUnsupported {
                        dim: chart.vars.len(),
                    });
                }
                let slope = chart.mean[0].diff(&chart.vars[0]);
                Some(Expr::div(Expr::int(1), slope))
            }
        };
        Ok(MeanCalculus {
            family,
            chart_slope_inv,
        })
    }

    /// d(e)/dx_j in the family's coordinates.
    fn d_dx(&self, e: &Expr, j: usize) -> Expr {
        match (&self.family.chart, &self.chart_slope_inv) {
            (Some(chart), Some(inv)) => {
                Expr::mul(e.diff(&chart.vars[0]), inv.clone())
            }
            _ => e.diff(&self.family.mean_vars[j]),
        }
    }

    /// The i-th mean coordinate as an expression.
    fn mean_expr(&self, i: usize) -> Expr {
        match &self.family.chart {
            Some(chart) => chart.mean[i.min(chart.mean.len() - 1)].clone(),
            None => Expr::var(self.family.mean_vars[i].clone()),
        }
    }
}

/// All multi-indices of dimension `dim` with total order exactly `total`.
fn indices_of_order(dim: usize, total: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut current = vec![0u32; dim];
    fn rec(current: &mut Vec<u32>, pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
        if pos + 1 == current.len() {
            current[pos] = remaining;
            out.push(MultiIndex(current.clone()));
            return;
        }
        for v in 0..=remaining {
            current[pos] = v;
            rec(current, pos + 1, remaining - v, out);
        }
    }
    rec(&mut current, 0, total, &mut out);
    out
}

/// Raw moments `a_k` for `|k| <= max_order`, symbolic in the mean.
pub fn raw_moments(f: &FamilySpec, max_order: u32) -> Result<MomentTable, MomentError> {
    if max_order < 1 {
        return Err(MomentError::OrderTooSmall {
            kind: TableKind::Raw,
            min: 1,
            got: max_order,
        });
    }
    let calc = MeanCalculus::new(f)?;
    let m = f.dim;
    let mut entries = BTreeMap::new();
    entries.insert(MultiIndex::zero(m), Expr::int(1));
    for i in 0..m {
        entries.insert(MultiIndex::unit(m, i), calc.mean_expr(i));
    }
    for total in 2..=max_order {
        for k in indices_of_order(m, total) {
            let i = k.first_nonzero().expect("total order >= 2");
            let prev = k.decremented(i).expect("first_nonzero coordinate");
            let a_prev = entries[&prev].clone();
            let mut acc = Expr::mul(calc.mean_expr(i), a_prev.clone());
            for j in 0..m {
                acc = Expr::add(
                    acc,
                    Expr::mul(f.v[i][j].clone(), calc.d_dx(&a_prev, j)),
                );
            }
            entries.insert(k, acc);
        }
    }
    Ok(MomentTable {
        kind: TableKind::Raw,
        family: f.clone(),
        max_order,
        entries,
    })
}

/// Central moments `b_k` for `|k| <= max_order`.
pub fn central_moments(f: &FamilySpec, max_order: u32) -> Result<MomentTable, MomentError> {
    if max_order < 2 {
        return Err(MomentError::OrderTooSmall {
            kind: TableKind::Central,
            min: 2,
            got: max_order,
        });
    }
    let calc = MeanCalculus::new(f)?;
    let m = f.dim;
    let mut entries = BTreeMap::new();
    entries.insert(MultiIndex::zero(m), Expr::int(1));
    for i in 0..m {
        entries.insert(MultiIndex::unit(m, i), Expr::int(0));
    }
    for total in 2..=max_order {
        for k in indices_of_order(m, total) {
            let i = k.first_nonzero().expect("total order >= 2");
            let prev = k.decremented(i).expect("first_nonzero coordinate");
            let b_prev = entries[&prev].clone();
            let mut acc = Expr::int(0);
            for j in 0..m {
                let mut term = calc.d_dx(&b_prev, j);
                if let Some(down) = prev.decremented(j) {
                    term = Expr::add(
                        term,
                        Expr::mul(Expr::int(prev.0[j] as i64), entries[&down].clone()),
                    );
                }
                acc = Expr::add(acc, Expr::mul(f.v[i][j].clone(), term));
            }
            entries.insert(k, acc);
        }
    }
    Ok(MomentTable {
        kind: TableKind::Central,
        family: f.clone(),
        max_order,
        entries,
    })
}

/// Cumulants `s_k` for `|k| <= max_order` (the paper's semivariances; in
/// the univariate case `s_{k+1} = V(x) ds_k/dx`, `s_1 = x`).
pub fn cumulants(f: &FamilySpec, max_order: u32) -> Result<MomentTable, MomentError> {
    if max_order < 1 {
        return Err(MomentError::OrderTooSmall {
            kind: TableKind::Cumulant,
            min: 1,
            got: max_order,
        });
    }
    let calc = MeanCalculus::new(f)?;
    let m = f.dim;
    let mut entries = BTreeMap::new();
    // order-0 entry is 1 by table convention
    entries.insert(MultiIndex::zero(m), Expr::int(1));
    for i in 0..m {
        entries.insert(MultiIndex::unit(m, i), calc.mean_expr(i));
    }
    for total in 2..=max_order {
        for k in indices_of_order(m, total) {
            let i = k.first_nonzero().expect("total order >= 2");
            let prev = k.decremented(i).expect("first_nonzero coordinate");
            let s_prev = entries[&prev].clone();
            let mut acc = Expr::int(0);
            for j in 0..m {
                acc = Expr::add(
                    acc,
                    Expr::mul(f.v[i][j].clone(), calc.d_dx(&s_prev, j)),
                );
            }
            entries.insert(k, acc);
        }
    }
    Ok(MomentTable {
        kind: TableKind::Cumulant,
        family: f.clone(),
        max_order,
        entries,
    })
}

/// Raw moment `a_k` rebuilt along an explicit coordinate path (a sequence
/// of increments summing to `k`); used to assert path-independence of the
/// multivariate recursion.
pub fn raw_moment_along_path(f: &FamilySpec, path: &[usize]) -> Result<Expr, MomentError> {
    let calc = MeanCalculus::new(f)?;
    let m = f.dim;
    assert!(!path.is_empty(), "path must contain at least one increment");
    let mut acc = calc.mean_expr(path[0]);
    for &i in &path[1..] {
        let mut next = Expr::mul(calc.mean_expr(i), acc.clone());
        for j in 0..m {
            next = Expr::add(next, Expr::mul(f.v[i][j].clone(), calc.d_dx(&acc, j)));
        }
        acc = next;
    }
    Ok(acc)
}

fn big_binomial(n: u32, k: u32) -> BigInt {
    let k = k.min(n - k);
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= BigInt::from(n - i);
        den *= BigInt::from(i + 1);
    }
    num / den
}

/// Central moments from a raw table via the binomial-type conversion
/// `b_k = sum_{p <= k} (-1)^{|k-p|} C(k,p) a_p x^{k-p}` (componentwise
/// binomials and powers of the mean).
pub fn central_from_raw(raw: &MomentTable) -> Result<MomentTable, MomentError> {
    assert_eq!(raw.kind, TableKind::Raw, "input must be a raw table");
    let f = &raw.family;
    let calc = MeanCalculus::new(f)?;
    let m = f.dim;
    let mut entries = BTreeMap::new();
    for total in 0..=raw.max_order {
        for k in indices_of_order(m, total) {
            let mut acc = Expr::int(0);
            for p in sub_indices(&k) {
                let a_p = raw
                    .entries
                    .get(&p)
                    .ok_or_else(|| MomentError::IncompleteTable { missing: p.clone() })?
                    .clone();
                let parity = (k.order() - p.order()) % 2 == 1;
                let mut coeff = BigInt::one();
                for i in 0..m {
                    coeff *= big_binomial(k.0[i], p.0[i]);
                }
                let mut term = Expr::mul(
                    Expr::constant(Number::Rational(BigRational::from_integer(coeff))),
                    a_p,
                );
                for i in 0..m {
                    let power = (k.0[i] - p.0[i]) as i64;
                    if power > 0 {
                        term = Expr::mul(term, Expr::powi(calc.mean_expr(i), power));
                    }
                }
                acc = if parity {
                    Expr::sub(acc, term)
                } else {
                    Expr::add(acc, term)
                };
            }
            entries.insert(k, acc);
        }
    }
    Ok(MomentTable {
        kind: TableKind::Central,
        family: f.clone(),
        max_order: raw.max_order,
        entries,
    })
}

/// All `p` with `0 <= p <= k` componentwise.
fn sub_indices(k: &MultiIndex) -> Vec<MultiIndex> {
    let mut out = vec![MultiIndex(vec![])];
    for &ki in &k.0 {
        let mut next = Vec::with_capacity(out.len() * (ki as usize + 1));
        for prefix in &out {
            for v in 0..=ki {
                let mut p = prefix.0.clone();
                p.push(v);
                next.push(MultiIndex(p));
            }
        }
        out = next;
    }
    out
}

/// Numeric table: every entry evaluated at `bindings` (which must cover
/// the mean variables -- or the chart variable -- and any auxiliary
/// symbols not fixed by the family).
pub fn evaluate_table(
    table: &MomentTable,
    bindings: &BTreeMap<String, f64>,
) -> Result<BTreeMap<MultiIndex, f64>, MomentError> {
    let mut merged = table.family.aux.clone();
    for (k, v) in bindings {
        merged.insert(k.clone(), *v);
    }
    let mut out = BTreeMap::new();
    for (k, e) in &table.entries {
        out.insert(k.clone(), e.eval(&merged)?);
    }
    Ok(out)
}

/// Serializable table export: `{kind, family, order, entries: [{k, expr, value?}]}`.
#[derive(Debug, Clone, Serialize)]
pub struct TableExport {
    pub kind: TableKind,
    pub family: String,
    pub order: u32,
    pub entries: Vec<TableEntryExport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TableEntryExport {
    pub k: Vec<u32>,
    pub expr: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

impl MomentTable {
    pub fn export(&self, values: Option<&BTreeMap<MultiIndex, f64>>) -> TableExport {
        TableExport {
            kind: self.kind,
            family: self.family.name.clone(),
            order: self.max_order,
            entries: self
                .entries
                .iter()
                .map(|(k, e)| TableEntryExport {
                    k: k.0.clone(),
                    expr: e.to_string(),
                    value: values.and_then(|v| v.get(k).copied()),
                })
                .collect(),
        }
    }

    /// CSV rows `k,value` (numeric mode) or `k,expr`.
    pub fn to_csv(&self, values: Option<&BTreeMap<MultiIndex, f64>>) -> String {
        let mut out = String::new();
        match values {
            Some(v) => {
                out.push_str("k,value\n");
                for (k, _) in &self.entries {
                    let ks: Vec<String> = k.0.iter().map(|x| x.to_string()).collect();
                    if let Some(val) = v.get(k) {
                        out.push_str(&format!("{},{}\n", ks.join(" "), val));
                    }
                }
            }
            None => {
                out.push_str("k,expr\n");
                for (k, e) in &self.entries {
                    let ks: Vec<String> = k.0.iter().map(|x| x.to_string()).collect();
                    out.push_str(&format!("{},\"{}\"\n", ks.join(" "), e));
                }
            }
        }
        out
    }
}
