//! Class-B family descriptors: the built-in registry, user-defined families
//! from a variance-function matrix, membership verification through the
//! defining equation, and numeric reconstruction of the s-characteristic.

mod builtin;

pub use builtin::{builtin, builtin_names, describe_builtins};

use crate::expr::{equiv_numeric, parse, DomainBox, EvalError, Expr, ParseError};
use crate::quadrature;
use crate::rng::Rng;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Linear constraint `sum of vars < limit` attached to a domain
/// (the multinomial simplex, |theta| < 1, ...).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SumBelow {
    pub vars: Vec<String>,
    pub limit: f64,
}

/// Where a family lives: conceptual per-coordinate bounds of the mean (may
/// be infinite), a finite box used by sampled checks, and an optional
/// simplex-type constraint.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Domain {
    /// Open bounds of each mean coordinate; infinite ends allowed.
    pub mean_bounds: Vec<(f64, f64)>,
    /// Finite box over every symbol sampled checks must bind
    /// (mean variables, or chart variables for chart families).
    pub sample: DomainBox,
    pub constraint: Option<SumBelow>,
}

impl Domain {
    pub fn contains_mean(&self, x: &[f64]) -> bool {
        if x.len() != self.mean_bounds.len() {
            return false;
        }
        for (v, &(lo, hi)) in x.iter().zip(&self.mean_bounds) {
            if !(*v > lo && *v < hi) {
                return false;
            }
        }
        true
    }

    /// Samples the finite box, honoring the constraint by rejection.
    pub fn sample_point(&self, rng: &mut Rng) -> Option<BTreeMap<String, f64>> {
        for _ in 0..1000 {
            let point = self.sample.sample(rng);
            match &self.constraint {
                None => return Some(point),
                Some(c) => {
                    let total: f64 = c.vars.iter().filter_map(|v| point.get(v)).sum();
                    if total < c.limit {
                        return Some(point);
                    }
                }
            }
        }
        None
    }
}

/// Parametric chart: families (the logarithmic one) whose variance function
/// has no closed form in the mean are carried in an underlying parameter
/// `t` with `x = mean(t)`; `V` is then an expression in `t` as well.
#[derive(Debug, Clone)]
pub struct Chart {
    pub vars: Vec<String>,
    pub mean: Vec<Expr>,
    /// Open bounds of the chart variables, used for numeric inversion.
    pub bounds: Vec<(f64, f64)>,
}

/// Underlying-parameter record: the classical parameters a family was built
/// from and the mean point they induce. Oracles key off this.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamMap {
    pub family: String,
    pub params: BTreeMap<String, f64>,
    pub mean: Vec<f64>,
}

/// A class-B family `B(x; V(x))` in its mean parametrization.
#[derive(Debug, Clone)]
pub struct FamilySpec {
    pub name: String,
    pub dim: usize,
    pub mean_vars: Vec<String>,
    /// Symmetric variance-function matrix, entries in the mean variables
    /// (or in the chart variables when `chart` is present).
    pub v: Vec<Vec<Expr>>,
    pub domain: Domain,
    /// Laplace transform `phi(z, x) = E exp(-z . xi)` in variables
    /// `z`/`z1..zm`, the mean variables and the auxiliary symbols.
    pub laplace: Option<Expr>,
    /// Closed-form s-characteristic (determined up to a constant).
    pub s_char: Option<Vec<Expr>>,
    pub param_map: Option<ParamMap>,
    /// Fixed values of auxiliary symbols appearing in `v`/`laplace` (n,
    /// sigma2, the Gamma shape, ...).
    pub aux: BTreeMap<String, f64>,
    pub chart: Option<Chart>,
    /// Descriptor transcribed from a source with no independent
    /// cross-check; excluded from symmetry/definiteness validation.
    pub unverified: bool,
    /// Domain is an interval-arithmetic over-approximation (affine images).
    pub domain_approx: bool,
}

impl FamilySpec {
    /// Names of the Laplace-transform argument variables.
    pub fn z_vars(&self) -> Vec<String> {
        if self.dim == 1 {
            vec!["z".to_string()]
        } else {
            (1..=self.dim).map(|i| format!("z{}", i)).collect()
        }
    }

    /// The mean point the family was constructed at, when known.
    pub fn mean_point(&self) -> Option<Vec<f64>> {
        self.param_map.as_ref().map(|p| p.mean.clone())
    }

    /// Bindings for evaluating `v` (and `s_char`) at mean point `x`:
    /// either the mean variables directly or the inverted chart variable,
    /// plus the auxiliary symbols.
    pub fn bindings_at(&self, x: &[f64]) -> Result<BTreeMap<String, f64>, FamilyError> {
        if x.len() != self.dim {
            return Err(FamilyError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let mut bindings = self.aux.clone();
        match &self.chart {
            None => {
                for (name, value) in self.mean_vars.iter().zip(x) {
                    bindings.insert(name.clone(), *value);
                }
            }
            Some(chart) => {
                if chart.vars.len() != 1 {
                    return Err(FamilyError::ChartUnsupported {
                        dim: chart.vars.len(),
                    });
                }
                let t = invert_univariate_chart(chart, &self.aux, x[0])?;
                bindings.insert(chart.vars[0].clone(), t);
            }
        }
        Ok(bindings)
    }

    /// Numeric variance matrix at mean point `x`.
    pub fn v_at(&self, x: &[f64]) -> Result<DMatrix<f64>, FamilyError> {
        let bindings = self.bindings_at(x)?;
        Ok(self.v_from_bindings(&bindings)?)
    }

    /// Variance matrix evaluated directly from a binding map (sampled
    /// checks bind chart/auxiliary symbols themselves).
    fn v_from_bindings(&self, bindings: &BTreeMap<String, f64>) -> Result<DMatrix<f64>, EvalError> {
        let m = self.dim;
        let mut out = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                out[(i, j)] = self.v[i][j].eval(bindings)?;
            }
        }
        Ok(out)
    }
}

fn invert_univariate_chart(
    chart: &Chart,
    aux: &BTreeMap<String, f64>,
    target: f64,
) -> Result<f64, FamilyError> {
    let (lo0, hi0) = chart.bounds[0];
    let margin = 1e-12;
    let mut lo = lo0 + margin * (1.0 + lo0.abs());
    let mut hi = if hi0.is_finite() {
        hi0 - margin * (1.0 + hi0.abs())
    } else {
        lo + 1.0
    };
    let eval_at = |t: f64| -> Result<f64, FamilyError> {
        let mut b = aux.clone();
        b.insert(chart.vars[0].clone(), t);
        Ok(chart.mean[0].eval(&b)?)
    };
    let f_lo = eval_at(lo)? - target;
    let mut f_hi = eval_at(hi)? - target;
    let mut expansions = 0;
    while f_lo * f_hi > 0.0 {
        if hi0.is_finite() || expansions > 200 {
            return Err(FamilyError::ChartInversion { target });
        }
        hi = lo + (hi - lo) * 2.0;
        f_hi = eval_at(hi)? - target;
        expansions += 1;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = eval_at(mid)? - target;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_lo * f_mid < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if (hi - lo).abs() <= 1e-15 * (1.0 + lo.abs()) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Per-point residuals of the defining equation at a grid of `(z, x)`
/// points, one value per coordinate equation.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub family: String,
    pub grid: Vec<ResidualPoint>,
    pub max_abs: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualPoint {
    pub z: Vec<f64>,
    pub x: Vec<f64>,
    pub residual: Vec<f64>,
}

/// Grid specification for [`verify_eq1`]. The default is the canonical
/// 5 x 5 grid with `z` in `[-0.5, 0.5]` and `x` spanning the family's
/// sampling box.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub z_half_width: f64,
    pub z_steps: usize,
    pub x_steps: usize,
    /// Optional explicit box for the x sweep (variable name -> range).
    pub x_box: Option<DomainBox>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            z_half_width: 0.5,
            z_steps: 5,
            x_steps: 5,
            x_box: None,
        }
    }
}

/// Family construction or evaluation failure.
#[derive(Debug, Clone)]
pub enum FamilyError {
    UnknownFamily {
        name: String,
    },
    ParamOutOfRange {
        family: String,
        message: String,
    },
    Parse {
        entry: String,
        error: ParseError,
    },
    Asymmetric {
        i: usize,
        j: usize,
        detail: String,
    },
    NotPositiveDefinite {
        point: BTreeMap<String, f64>,
        min_eigenvalue: f64,
    },
    LaplaceAbsent {
        family: String,
    },
    Eval(EvalError),
    NotUnivariate {
        dim: usize,
    },
    OutsideDomain {
        what: String,
    },
    VNotPositiveOnPath {
        x: f64,
    },
    DimensionMismatch {
        expected: usize,
        got: usize,
    },
    ChartUnsupported {
        dim: usize,
    },
    ChartInversion {
        target: f64,
    },
    EmptyGrid,
    BadDefinition {
        message: String,
    },
}

impl fmt::Display for FamilyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyError::UnknownFamily { name } => write!(f, "unknown family `{}`", name),
            FamilyError::ParamOutOfRange { family, message } => {
                write!(f, "parameter out of range for `{}`: {}", family, message)
            }
            FamilyError::Parse { entry, error } => {
                write!(f, "cannot parse V entry {}: {}", entry, error)
            }
            FamilyError::Asymmetric { i, j, detail } => {
                write!(f, "V is not symmetric at entry ({}, {}): {}", i, j, detail)
            }
            FamilyError::NotPositiveDefinite {
                point,
                min_eigenvalue,
            } => write!(
                f,
                "V is not positive definite at {:?} (min eigenvalue {})",
                point, min_eigenvalue
            ),
            FamilyError::LaplaceAbsent { family } => {
                write!(f, "family `{}` carries no Laplace transform", family)
            }
            FamilyError::Eval(e) => write!(f, "{}", e),
            FamilyError::NotUnivariate { dim } => {
                write!(f, "operation requires a univariate family, got dim {}", dim)
            }
            FamilyError::OutsideDomain { what } => write!(f, "outside domain: {}", what),
            FamilyError::VNotPositiveOnPath { x } => {
                write!(f, "V is not positive along the path at x = {}", x)
            }
            FamilyError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {}, got {}", expected, got)
            }
            FamilyError::ChartUnsupported { dim } => write!(
                f,
                "parametric chart of dimension {} is not invertible here",
                dim
            ),
            FamilyError::ChartInversion { target } => {
                write!(f, "cannot invert mean chart at target {}", target)
            }
            FamilyError::EmptyGrid => write!(f, "no grid point lies inside the domain"),
            FamilyError::BadDefinition { message } => {
                write!(f, "bad family definition: {}", message)
            }
        }
    }
}

impl std::error::Error for FamilyError {}

impl From<EvalError> for FamilyError {
    fn from(e: EvalError) -> Self {
        FamilyError::Eval(e)
    }
}

const VALIDATION_SEED: u64 = 0x5EED_FA31;
const SYMMETRY_TOL: f64 = 1e-9;

/// Sampled symmetry and positive-definiteness validation of `v` over the
/// family's domain (64 seeded points).
pub fn validate_variance(f: &FamilySpec) -> Result<(), FamilyError> {
    let m = f.dim;
    let mut box_with_aux = f.domain.sample.clone();
    for (name, value) in &f.aux {
        box_with_aux
            .ranges
            .entry(name.clone())
            .or_insert((*value, *value));
    }
    for i in 0..m {
        for j in (i + 1)..m {
            let same = equiv_numeric(&f.v[i][j], &f.v[j][i], &box_with_aux, 64, SYMMETRY_TOL)
                .map_err(|e| FamilyError::Asymmetric {
                    i,
                    j,
                    detail: e.to_string(),
                })?;
            if !same {
                return Err(FamilyError::Asymmetric {
                    i,
                    j,
                    detail: format!("`{}` vs `{}`", f.v[i][j], f.v[j][i]),
                });
            }
        }
    }
    let mut rng = Rng::seed_from(VALIDATION_SEED);
    let mut checked = 0;
    for _ in 0..64 {
        let Some(mut point) = f.domain.sample_point(&mut rng) else {
            break;
        };
        for (k, v) in &f.aux {
            point.entry(k.clone()).or_insert(*v);
        }
        let matrix = match f.v_from_bindings(&point) {
            Ok(m) => m,
            Err(_) => continue, // sampled outside an entry's domain
        };
        let sym = (&matrix + matrix.transpose()) * 0.5;
        let eigen = sym.symmetric_eigenvalues();
        let min_eig = eigen.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(min_eig > 0.0) {
            return Err(FamilyError::NotPositiveDefinite {
                point,
                min_eigenvalue: min_eig,
            });
        }
        checked += 1;
    }
    if checked == 0 {
        return Err(FamilyError::BadDefinition {
            message: "no sampled point of the domain admits evaluating V".into(),
        });
    }
    Ok(())
}

/// Builds a user-defined family from a matrix of variance-function strings.
/// The Laplace transform and s-characteristic are left absent.
pub fn from_variance(
    v_text: &[Vec<String>],
    mean_vars: &[String],
    domain: Domain,
) -> Result<FamilySpec, FamilyError> {
    let m = mean_vars.len();
    if m == 0 || v_text.len() != m || v_text.iter().any(|row| row.len() != m) {
        return Err(FamilyError::BadDefinition {
            message: format!("V must be a {m} x {m} matrix matching mean_vars"),
        });
    }
    if domain.mean_bounds.len() != m {
        return Err(FamilyError::BadDefinition {
            message: "domain bounds must cover every mean variable".into(),
        });
    }
    let mut v = Vec::with_capacity(m);
    for row in v_text {
        let mut parsed = Vec::with_capacity(m);
        for entry in row {
            parsed.push(parse(entry).map_err(|error| FamilyError::Parse {
                entry: format!("`{}`", entry),
                error,
            })?);
        }
        v.push(parsed);
    }
    let spec = FamilySpec {
        name: "user".into(),
        dim: m,
        mean_vars: mean_vars.to_vec(),
        v,
        domain,
        laplace: None,
        s_char: None,
        param_map: None,
        aux: BTreeMap::new(),
        chart: None,
        unverified: false,
        domain_approx: false,
    };
    validate_variance(&spec)?;
    Ok(spec)
}

/// JSON family definition file: `{name, dim, mean_vars, V, domain}`.
#[derive(Debug, Deserialize)]
pub struct FamilyDefinition {
    pub name: String,
    pub dim: usize,
    pub mean_vars: Vec<String>,
    #[serde(rename = "V")]
    pub v: Vec<Vec<String>>,
    /// Variable -> [lo, hi]. Must cover the mean variables; additional
    /// entries pin or range auxiliary symbols (a degenerate [c, c] range
    /// fixes a constant).
    pub domain: BTreeMap<String, (f64, f64)>,
}

pub fn from_definition_json(text: &str) -> Result<FamilySpec, FamilyError> {
    let def: FamilyDefinition =
        serde_json::from_str(text).map_err(|e| FamilyError::BadDefinition {
            message: e.to_string(),
        })?;
    if def.mean_vars.len() != def.dim {
        return Err(FamilyError::BadDefinition {
            message: "dim does not match mean_vars".into(),
        });
    }
    let mut sample = DomainBox::new();
    let mut mean_bounds = Vec::new();
    for var in &def.mean_vars {
        let &(lo, hi) = def
            .domain
            .get(var)
            .ok_or_else(|| FamilyError::BadDefinition {
                message: format!("domain missing mean variable `{}`", var),
            })?;
        mean_bounds.push((lo, hi));
    }
    for (var, &(lo, hi)) in &def.domain {
        sample.ranges.insert(var.clone(), (lo, hi));
    }
    let domain = Domain {
        mean_bounds,
        sample,
        constraint: None,
    };
    let mut spec = from_variance(&def.v, &def.mean_vars, domain)?;
    spec.name = def.name;
    Ok(spec)
}

/// Residuals of the defining equation over a `(z, x)` grid, computed with
/// symbolic derivatives of the stored Laplace transform.
pub fn verify_eq1(f: &FamilySpec, grid: &GridSpec, tol: f64) -> Result<ResidualReport, FamilyError> {
    let laplace = f.laplace.as_ref().ok_or(FamilyError::LaplaceAbsent {
        family: f.name.clone(),
    })?;
    let m = f.dim;
    let z_vars = f.z_vars();
    let dphi_dz: Vec<Expr> = z_vars.iter().map(|z| laplace.diff(z)).collect();
    let dphi_dx: Vec<Expr> = f.mean_vars.iter().map(|x| laplace.diff(x)).collect();

    // x sweep: per-axis linspace over the requested box (or the family box),
    // staggered per axis so multivariate grids leave the diagonal.
    let x_ranges: Vec<(f64, f64)> = match &grid.x_box {
        Some(b) => f
            .mean_vars
            .iter()
            .map(|v| {
                b.ranges
                    .get(v)
                    .copied()
                    .ok_or_else(|| FamilyError::BadDefinition {
                        message: format!("grid box missing variable `{}`", v),
                    })
            })
            .collect::<Result<_, _>>()?,
        None => f
            .mean_vars
            .iter()
            .map(|v| {
                f.domain.sample.ranges.get(v).copied().ok_or_else(|| {
                    FamilyError::BadDefinition {
                        message: format!("family box missing variable `{}`", v),
                    }
                })
            })
            .collect::<Result<_, _>>()?,
    };

    let frac = |k: usize, n: usize| -> f64 {
        if n <= 1 {
            0.5
        } else {
            (k as f64 + 0.5) / n as f64
        }
    };

    let mut points = Vec::new();
    let mut max_abs: f64 = 0.0;
    for zi in 0..grid.z_steps {
        let z_frac = frac(zi, grid.z_steps);
        let z: Vec<f64> = (0..m)
            .map(|axis| {
                let w = grid.z_half_width;
                let stagger = 1.0 - 0.15 * (axis as f64) / m.max(1) as f64;
                (-w + 2.0 * w * z_frac) * stagger
            })
            .collect();
        for xi in 0..grid.x_steps {
            let x: Vec<f64> = (0..m)
                .map(|axis| {
                    let (lo, hi) = x_ranges[axis];
                    let f = frac((xi + axis) % grid.x_steps.max(1), grid.x_steps);
                    lo + (hi - lo) * f
                })
                .collect();
            if !f.domain.contains_mean(&x) {
                continue;
            }
            if let Some(c) = &f.domain.constraint {
                let total: f64 = f
                    .mean_vars
                    .iter()
                    .zip(&x)
                    .filter(|(name, _)| c.vars.contains(name))
                    .map(|(_, v)| *v)
                    .sum();
                if total >= c.limit {
                    continue;
                }
            }

            let mut bindings = f.aux.clone();
            for (name, value) in f.mean_vars.iter().zip(&x) {
                bindings.insert(name.clone(), *value);
            }
            for (name, value) in z_vars.iter().zip(&z) {
                bindings.insert(name.clone(), *value);
            }

            let phi = laplace.eval(&bindings)?;
            let mut residual = Vec::with_capacity(m);
            for i in 0..m {
                let mut r = dphi_dz[i].eval(&bindings)? + x[i] * phi;
                for j in 0..m {
                    r += f.v[i][j].eval(&bindings)? * dphi_dx[j].eval(&bindings)?;
                }
                max_abs = max_abs.max(r.abs());
                residual.push(r);
            }
            points.push(ResidualPoint {
                z: z.clone(),
                x,
                residual,
            });
        }
    }
    if points.is_empty() {
        return Err(FamilyError::EmptyGrid);
    }
    Ok(ResidualReport {
        family: f.name.clone(),
        grid: points,
        max_abs,
        tol,
        pass: max_abs <= tol,
    })
}

/// `s(x_query)` normalized by `s(x_ref) = 0`, from `ds/dx = -1/V(x)` by
/// adaptive quadrature (absolute tolerance 1e-10). Strictly decreasing in
/// `x_query`.
pub fn s_characteristic_numeric(
    f: &FamilySpec,
    x_ref: f64,
    x_query: f64,
) -> Result<f64, FamilyError> {
    if f.dim != 1 {
        return Err(FamilyError::NotUnivariate { dim: f.dim });
    }
    let lo = x_ref.min(x_query);
    let hi = x_ref.max(x_query);
    if !(f.domain.contains_mean(&[lo]) && f.domain.contains_mean(&[hi])) {
        return Err(FamilyError::OutsideDomain {
            what: format!("integration interval [{}, {}]", lo, hi),
        });
    }
    if x_ref == x_query {
        return Ok(0.0);
    }
    let mut integrand = |x: f64| -> Result<f64, FamilyError> {
        let v = f.v_at(&[x])?[(0, 0)];
        if !(v > 0.0) {
            return Err(FamilyError::VNotPositiveOnPath { x });
        }
        Ok(1.0 / v)
    };
    let (integral, _err) = quadrature::integrate_adaptive(&mut integrand, x_ref, x_query, 1e-10)?;
    Ok(-integral)
}

/// Evaluates the stored Laplace transform at `(z, x)`.
pub fn laplace_eval(f: &FamilySpec, z: &[f64], x: &[f64]) -> Result<f64, FamilyError> {
    let laplace = f.laplace.as_ref().ok_or(FamilyError::LaplaceAbsent {
        family: f.name.clone(),
    })?;
    if z.len() != f.dim || x.len() != f.dim {
        return Err(FamilyError::DimensionMismatch {
            expected: f.dim,
            got: z.len().max(x.len()),
        });
    }
    let mut bindings = f.aux.clone();
    for (name, value) in f.mean_vars.iter().zip(x) {
        bindings.insert(name.clone(), *value);
    }
    for (name, value) in f.z_vars().iter().zip(z) {
        bindings.insert(name.clone(), *value);
    }
    Ok(laplace.eval(&bindings)?)
}

/// Serializable descriptor of a family (V entries and the Laplace
/// transform print as expression strings).
#[derive(Debug, Clone, Serialize)]
pub struct FamilyDescriptor {
    pub name: String,
    pub dim: usize,
    pub mean_vars: Vec<String>,
    pub v: Vec<Vec<String>>,
    pub laplace: Option<String>,
    pub s_char: Option<Vec<String>>,
    pub aux: BTreeMap<String, f64>,
    pub mean: Option<Vec<f64>>,
    pub chart: Option<BTreeMap<String, String>>,
    pub unverified: bool,
    pub domain_approx: bool,
}

impl FamilySpec {
    pub fn descriptor(&self) -> FamilyDescriptor {
        FamilyDescriptor {
            name: self.name.clone(),
            dim: self.dim,
            mean_vars: self.mean_vars.clone(),
            v: self
                .v
                .iter()
                .map(|row| row.iter().map(|e| e.to_string()).collect())
                .collect(),
            laplace: self.laplace.as_ref().map(|e| e.to_string()),
            s_char: self
                .s_char
                .as_ref()
                .map(|s| s.iter().map(|e| e.to_string()).collect()),
            aux: self.aux.clone(),
            mean: self.mean_point(),
            chart: self.chart.as_ref().map(|c| {
                c.vars
                    .iter()
                    .zip(&c.mean)
                    .map(|(v, e)| (v.clone(), e.to_string()))
                    .collect()
            }),
            unverified: self.unverified,
            domain_approx: self.domain_approx,
        }
    }
}

#[cfg(test)]
mod tests;
