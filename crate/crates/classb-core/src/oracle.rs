//! Independent ground truth for the analytic machinery: exact pmf/pdf
//! moments (enumeration or quadrature), exact tail probabilities, and
//! seeded Monte Carlo samplers.
//!
//! Everything here is keyed by family name and classical parameters and
//! shares no code with the symbolic recursion path it is used to check.

use crate::moments::MultiIndex;
use crate::quadrature;
use crate::rng::Rng;
use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;
use std::collections::BTreeMap;
use std::fmt;

pub const DEFAULT_TAIL_TOL: f64 = 1e-13;
pub const DEFAULT_SEED: u64 = 0x0C1A_55B0;
/// Step cap for the random-walk simulator; hits are reported, not hidden.
pub const WALK_STEP_CAP: u64 = 10_000_000;

pub type Params = BTreeMap<String, f64>;

#[derive(Debug, Clone)]
pub enum OracleError {
    Unsupported { family: String, what: String },
    BadParams { message: String },
    StepCapExceeded { cap: u64 },
    NonConvergent { what: String },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::Unsupported { family, what } => {
                write!(f, "oracle does not support {} for family `{}`", what, family)
            }
            OracleError::BadParams { message } => write!(f, "bad oracle parameters: {}", message),
            OracleError::StepCapExceeded { cap } => {
                write!(f, "random-walk simulation exceeded the {} step cap", cap)
            }
            OracleError::NonConvergent { what } => write!(f, "did not converge: {}", what),
        }
    }
}

impl std::error::Error for OracleError {}

fn req(params: &Params, key: &str) -> Result<f64, OracleError> {
    params.get(key).copied().ok_or_else(|| OracleError::BadParams {
        message: format!("missing parameter `{}`", key),
    })
}

fn indexed(params: &Params, prefix: &str) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 1.. {
        match params.get(&format!("{prefix}{i}")) {
            Some(v) => out.push(*v),
            None => break,
        }
    }
    out
}

// ---------------------------------------------------------------------------
// pmf iterators
// ---------------------------------------------------------------------------

/// Support walker for a univariate discrete family: yields `(k, pmf(k))`
/// in increasing `k`.
struct SupportIter {
    k: f64,
    step: f64,
    pmf: Box<dyn FnMut(f64) -> f64>,
    remaining: u64,
}

impl Iterator for SupportIter {
    type Item = (f64, f64);
    fn next(&mut self) -> Option<(f64, f64)> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let k = self.k;
        let p = (self.pmf)(k);
        self.k += self.step;
        Some((k, p))
    }
}

fn ln_choose(n: f64, k: f64) -> f64 {
    ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)
}

/// Univariate pmf walker for the supported discrete families. The second
/// element of the return value is the exact finite support size when the
/// family has one (binomial).
fn univariate_support(
    family: &str,
    params: &Params,
) -> Result<(SupportIter, Option<u64>), OracleError> {
    match family {
        "binomial" => {
            let n = req(params, "n")?;
            let p = req(params, "p")?;
            let pmf = move |k: f64| (ln_choose(n, k) + k * p.ln() + (n - k) * (1.0 - p).ln()).exp();
            Ok((
                SupportIter {
                    k: 0.0,
                    step: 1.0,
                    pmf: Box::new(pmf),
                    remaining: n as u64 + 1,
                },
                Some(n as u64 + 1),
            ))
        }
        "poisson" => {
            let lambda = req(params, "lambda")?;
            let pmf = move |k: f64| (-lambda + k * lambda.ln() - ln_gamma(k + 1.0)).exp();
            Ok((
                SupportIter {
                    k: 0.0,
                    step: 1.0,
                    pmf: Box::new(pmf),
                    remaining: u64::MAX,
                },
                None,
            ))
        }
        "negative_binomial" => {
            let n = req(params, "n")?;
            let p = req(params, "p")?;
            // failures before the n-th success
            let pmf = move |k: f64| {
                (ln_gamma(n + k) - ln_gamma(n) - ln_gamma(k + 1.0)
                    + n * p.ln()
                    + k * (1.0 - p).ln())
                .exp()
            };
            Ok((
                SupportIter {
                    k: 0.0,
                    step: 1.0,
                    pmf: Box::new(pmf),
                    remaining: u64::MAX,
                },
                None,
            ))
        }
        "logarithmic" => {
            let theta = req(params, "theta")?;
            let norm = -(1.0 - theta).ln();
            let pmf = move |k: f64| theta.powf(k) / (k * norm);
            Ok((
                SupportIter {
                    k: 1.0,
                    step: 1.0,
                    pmf: Box::new(pmf),
                    remaining: u64::MAX,
                },
                None,
            ))
        }
        "random_walk" => {
            if params.contains_key("p1") {
                return Err(OracleError::Unsupported {
                    family: family.into(),
                    what: "multivariate pmf".into(),
                });
            }
            let n = req(params, "n")?;
            let p = req(params, "p")?;
            let q = 1.0 - p;
            // omega_{nk} = (n/k) C(k, (k+n)/2) p^{(k+n)/2} q^{(k-n)/2},
            // support k = n, n+2, ...; log-gamma arithmetic avoids overflow
            let pmf = move |k: f64| {
                let up = (k + n) / 2.0;
                let down = (k - n) / 2.0;
                ((n.ln() - k.ln()) + ln_choose(k, up) + up * p.ln() + down * q.ln()).exp()
            };
            Ok((
                SupportIter {
                    k: n,
                    step: 2.0,
                    pmf: Box::new(pmf),
                    remaining: u64::MAX,
                },
                None,
            ))
        }
        "borel_tanner" => {
            if params.contains_key("alpha1") {
                return Err(OracleError::Unsupported {
                    family: family.into(),
                    what: "multivariate pmf".into(),
                });
            }
            let n = req(params, "n")?;
            let alpha = req(params, "alpha")?;
            // classical Borel-Tanner: P(k) = (n/k) e^{-alpha k}
            // (alpha k)^{k-n} / (k-n)!, k = n, n+1, ...
            let pmf = move |k: f64| {
                (n.ln() - k.ln() - alpha * k + (k - n) * (alpha * k).ln() - ln_gamma(k - n + 1.0))
                    .exp()
            };
            Ok((
                SupportIter {
                    k: n,
                    step: 1.0,
                    pmf: Box::new(pmf),
                    remaining: u64::MAX,
                },
                None,
            ))
        }
        other => Err(OracleError::Unsupported {
            family: other.into(),
            what: "pmf enumeration".into(),
        }),
    }
}

// ---------------------------------------------------------------------------
// moments by enumeration / quadrature
// ---------------------------------------------------------------------------

/// Raw moments of a discrete family by direct pmf summation. Support is
/// truncated once the omitted mass drops below `tail_tol`; binomial and
/// multinomial are exact finite sums.
pub fn enumerate_moments(
    family: &str,
    params: &Params,
    max_order: u32,
    tail_tol: f64,
) -> Result<BTreeMap<MultiIndex, f64>, OracleError> {
    if tail_tol <= 0.0 {
        return Err(OracleError::BadParams {
            message: "tail_tol must be positive".into(),
        });
    }
    match family {
        "multinomial" => return multinomial_moments(params, max_order),
        "negative_multinomial" => return negative_multinomial_moments(params, max_order, tail_tol),
        _ => {}
    }
    let (support, finite) = univariate_support(family, params)?;
    let mut moments = vec![0.0; max_order as usize + 1];
    let mut cum = 0.0;
    let mut count = 0u64;
    let mut converged = false;
    for (k, p) in support.take(50_000_000) {
        let mut power = 1.0;
        for m in moments.iter_mut() {
            *m += power * p;
            power *= k;
        }
        cum += p;
        count += 1;
        if let Some(total) = finite {
            if count >= total {
                converged = true;
                break;
            }
        } else if 1.0 - cum < tail_tol {
            // the omitted mass must be negligible for the heaviest moment
            // weight too, not just for the total probability
            let top_weight = p * k.powi(max_order as i32);
            if top_weight < tail_tol * (1.0 + moments[max_order as usize].abs()) {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(OracleError::NonConvergent {
            what: format!("pmf mass {} after {} terms", cum, count),
        });
    }
    Ok(moments
        .into_iter()
        .enumerate()
        .map(|(r, v)| (MultiIndex(vec![r as u32]), v))
        .collect())
}

fn multinomial_moments(
    params: &Params,
    max_order: u32,
) -> Result<BTreeMap<MultiIndex, f64>, OracleError> {
    let n = req(params, "n")? as u32;
    let p = indexed(params, "p");
    let m = p.len();
    if m == 0 {
        return Err(OracleError::BadParams {
            message: "need p1..pm".into(),
        });
    }
    let p0 = 1.0 - p.iter().sum::<f64>();
    let mut out: BTreeMap<MultiIndex, f64> = BTreeMap::new();
    let mut counts = vec![0u32; m];
    // exact finite sum over the full support
    fn rec(
        pos: usize,
        left: u32,
        counts: &mut Vec<u32>,
        n: u32,
        p: &[f64],
        p0: f64,
        max_order: u32,
        out: &mut BTreeMap<MultiIndex, f64>,
    ) {
        if pos == counts.len() {
            let rest = left;
            let mut ln_pmf = ln_gamma(n as f64 + 1.0) - ln_gamma(rest as f64 + 1.0)
                + rest as f64 * p0.ln();
            for (i, &c) in counts.iter().enumerate() {
                ln_pmf += c as f64 * p[i].ln() - ln_gamma(c as f64 + 1.0);
            }
            let pmf = ln_pmf.exp();
            for k in all_indices(counts.len(), max_order) {
                let mut val = pmf;
                for (i, &ki) in k.0.iter().enumerate() {
                    val *= (counts[i] as f64).powi(ki as i32);
                }
                *out.entry(k).or_insert(0.0) += val;
            }
            return;
        }
        for c in 0..=left {
            counts[pos] = c;
            rec(pos + 1, left - c, counts, n, p, p0, max_order, out);
        }
        counts[pos] = 0;
    }
    rec(0, n, &mut counts, n, &p, p0, max_order, &mut out);
    Ok(out)
}

fn negative_multinomial_moments(
    params: &Params,
    max_order: u32,
    tail_tol: f64,
) -> Result<BTreeMap<MultiIndex, f64>, OracleError> {
    let n = req(params, "n")?;
    let p = indexed(params, "p");
    let m = p.len();
    if m == 0 {
        return Err(OracleError::BadParams {
            message: "need p1..pm".into(),
        });
    }
    // mean-parametrized descriptor corresponds to the classical pmf with
    // q_i = p_i/(1+|p|), q_0 = 1/(1+|p|)
    let total_p: f64 = p.iter().sum();
    let q0 = 1.0 / (1.0 + total_p);
    let q: Vec<f64> = p.iter().map(|&pi| pi * q0).collect();
    let mut out: BTreeMap<MultiIndex, f64> = BTreeMap::new();
    for k in all_indices(m, max_order) {
        out.insert(k, 0.0);
    }
    let mut cum = 0.0;
    // shells of constant |k|
    for total in 0..100_000u32 {
        let mut shell_mass = 0.0;
        for counts in indices_with_order(m, total) {
            let mut ln_pmf = ln_gamma(n + total as f64) - ln_gamma(n) + n * q0.ln();
            for (i, &c) in counts.0.iter().enumerate() {
                ln_pmf += c as f64 * q[i].ln() - ln_gamma(c as f64 + 1.0);
            }
            let pmf = ln_pmf.exp();
            shell_mass += pmf;
            for (k, acc) in out.iter_mut() {
                let mut val = pmf;
                for (i, &ki) in k.0.iter().enumerate() {
                    val *= (counts.0[i] as f64).powi(ki as i32);
                }
                *acc += val;
            }
        }
        cum += shell_mass;
        if 1.0 - cum < tail_tol {
            return Ok(out);
        }
    }
    Err(OracleError::NonConvergent {
        what: format!("negative multinomial mass {}", cum),
    })
}

fn all_indices(dim: usize, max_order: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for total in 0..=max_order {
        out.extend(indices_with_order(dim, total));
    }
    out
}

fn indices_with_order(dim: usize, total: u32) -> Vec<MultiIndex> {
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

/// Raw moments of a continuous univariate family by adaptive quadrature of
/// `t^k density(t)` (relative tolerance 1e-10).
pub fn quadrature_moments(
    family: &str,
    params: &Params,
    max_order: u32,
) -> Result<BTreeMap<MultiIndex, f64>, OracleError> {
    let (lo, hi, density): (f64, f64, Box<dyn Fn(f64) -> f64>) = match family {
        "normal" => {
            let alpha = req(params, "alpha")?;
            let sigma2 = req(params, "sigma2")?;
            let sd = sigma2.sqrt();
            let pdf = move |t: f64| {
                (-((t - alpha) * (t - alpha)) / (2.0 * sigma2)).exp()
                    / (sd * (2.0 * std::f64::consts::PI).sqrt())
            };
            (alpha - 14.0 * sd, alpha + 14.0 * sd, Box::new(pdf))
        }
        "gamma" => {
            let rate = req(params, "alpha")?;
            let shape = req(params, "lambda")?;
            let pdf = move |t: f64| {
                if t <= 0.0 {
                    0.0
                } else {
                    (shape * rate.ln() + (shape - 1.0) * t.ln() - rate * t - ln_gamma(shape)).exp()
                }
            };
            let mean = shape / rate;
            let sd = shape.sqrt() / rate;
            let hi = mean + 14.0 * max_order as f64 * sd + 60.0 / rate + 20.0 * max_order as f64 / rate;
            (0.0, hi, Box::new(pdf))
        }
        other => {
            return Err(OracleError::Unsupported {
                family: other.into(),
                what: "quadrature moments".into(),
            })
        }
    };
    let mut out = BTreeMap::new();
    for r in 0..=max_order {
        let mut integrand =
            |t: f64| -> Result<f64, OracleError> { Ok(t.powi(r as i32) * density(t)) };
        let (value, _err) = quadrature::integrate_adaptive(&mut integrand, lo, hi, 1e-12)
            .map_err(|e| e)?;
        out.insert(MultiIndex(vec![r]), value);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// tails
// ---------------------------------------------------------------------------

/// `P(xi >= y)` to 1e-12 absolute, by summation (discrete) or
/// erfc/quadrature (normal, gamma).
pub fn exact_tail(family: &str, params: &Params, y: f64) -> Result<f64, OracleError> {
    match family {
        "normal" => {
            let alpha = req(params, "alpha")?;
            let sigma2 = req(params, "sigma2")?;
            Ok(0.5 * erfc((y - alpha) / (2.0 * sigma2).sqrt()))
        }
        "gamma" => {
            let rate = req(params, "alpha")?;
            let shape = req(params, "lambda")?;
            if y <= 0.0 {
                return Ok(1.0);
            }
            let pdf = move |t: f64| -> Result<f64, OracleError> {
                Ok((shape * rate.ln() + (shape - 1.0) * t.ln() - rate * t - ln_gamma(shape)).exp())
            };
            let mean = shape / rate;
            let sd = shape.sqrt() / rate;
            let hi = (y + mean + 14.0 * sd + 80.0 / rate).max(y * 2.0 + 10.0);
            let mut f = pdf;
            let (value, _) = quadrature::integrate_adaptive(&mut f, y, hi, 1e-13)?;
            Ok(value.min(1.0))
        }
        _ => {
            let (support, finite) = univariate_support(family, params)?;
            let mut tail = 0.0;
            let mut cum = 0.0;
            for (count, (k, p)) in support.take(50_000_000).enumerate() {
                cum += p;
                if k >= y {
                    tail += p;
                }
                if let Some(total) = finite {
                    if count as u64 + 1 >= total {
                        return Ok(tail);
                    }
                } else if 1.0 - cum < 1e-14 && k >= y {
                    return Ok(tail);
                }
            }
            Err(OracleError::NonConvergent {
                what: "tail summation".into(),
            })
        }
    }
}

// ---------------------------------------------------------------------------
// samplers
// ---------------------------------------------------------------------------

fn poisson_draw(rng: &mut Rng, lambda: f64) -> f64 {
    // inversion by sequential search; fine for the desk-scale lambdas here
    let mut k = 0.0;
    let mut p = (-lambda).exp();
    let mut cdf = p;
    let u = rng.next_f64();
    while u > cdf && k < 10_000.0 {
        k += 1.0;
        p *= lambda / k;
        cdf += p;
    }
    k
}

fn gamma_draw(rng: &mut Rng, shape: f64, rate: f64) -> f64 {
    // Marsaglia-Tsang; boost for shape < 1
    if shape < 1.0 {
        let boost = rng.next_f64().powf(1.0 / shape);
        return gamma_draw(rng, shape + 1.0, rate) * boost;
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let z = rng.next_normal();
        let v = (1.0 + c * z).powi(3);
        if v <= 0.0 {
            continue;
        }
        let u = rng.next_f64();
        if u < 1.0 - 0.0331 * z.powi(4) || u.ln() < 0.5 * z * z + d * (1.0 - v + v.ln()) {
            return d * v / rate;
        }
    }
}

fn categorical_draw(rng: &mut Rng, probs: &[f64]) -> usize {
    let u = rng.next_f64();
    let mut cum = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        cum += p;
        if u < cum {
            return i;
        }
    }
    probs.len() - 1
}

/// Seeded Monte Carlo draws, `count` rows of dimension m.
pub fn mc_sample(
    family: &str,
    params: &Params,
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>, OracleError> {
    if count < 1 {
        return Err(OracleError::BadParams {
            message: "count must be >= 1".into(),
        });
    }
    let mut rng = Rng::seed_from(seed);
    let mut out = Vec::with_capacity(count);
    match family {
        "poisson" => {
            let lambda = req(params, "lambda")?;
            for _ in 0..count {
                out.push(vec![poisson_draw(&mut rng, lambda)]);
            }
        }
        "binomial" => {
            let n = req(params, "n")? as u64;
            let p = req(params, "p")?;
            for _ in 0..count {
                let mut k = 0.0;
                for _ in 0..n {
                    if rng.next_f64() < p {
                        k += 1.0;
                    }
                }
                out.push(vec![k]);
            }
        }
        "negative_binomial" => {
            let n = req(params, "n")? as u64;
            let p = req(params, "p")?;
            let lnq = (1.0 - p).ln();
            for _ in 0..count {
                let mut k = 0.0;
                for _ in 0..n {
                    // geometric count of failures before a success
                    let u = rng.next_f64().max(f64::MIN_POSITIVE);
                    k += (u.ln() / lnq).floor();
                }
                out.push(vec![k]);
            }
        }
        "normal" => {
            let alpha = req(params, "alpha")?;
            let sd = req(params, "sigma2")?.sqrt();
            for _ in 0..count {
                out.push(vec![alpha + sd * rng.next_normal()]);
            }
        }
        "gamma" => {
            let rate = req(params, "alpha")?;
            let shape = req(params, "lambda")?;
            for _ in 0..count {
                out.push(vec![gamma_draw(&mut rng, shape, rate)]);
            }
        }
        "mvnormal" => {
            let alpha = indexed(params, "alpha");
            let m = alpha.len();
            let mut sigma = nalgebra::DMatrix::zeros(m, m);
            for i in 0..m {
                for j in i..m {
                    let v = req(params, &format!("sigma{}{}", i + 1, j + 1))?;
                    sigma[(i, j)] = v;
                    sigma[(j, i)] = v;
                }
            }
            let chol = sigma.cholesky().ok_or_else(|| OracleError::BadParams {
                message: "sigma must be positive definite".into(),
            })?;
            let l = chol.l();
            for _ in 0..count {
                let z: Vec<f64> = (0..m).map(|_| rng.next_normal()).collect();
                let row: Vec<f64> = (0..m)
                    .map(|i| alpha[i] + (0..=i).map(|j| l[(i, j)] * z[j]).sum::<f64>())
                    .collect();
                out.push(row);
            }
        }
        "multinomial" => {
            let n = req(params, "n")? as u64;
            let p = indexed(params, "p");
            let m = p.len();
            for _ in 0..count {
                let mut counts = vec![0.0; m];
                for _ in 0..n {
                    let u = rng.next_f64();
                    let mut cum = 0.0;
                    let mut hit = None;
                    for (i, &pi) in p.iter().enumerate() {
                        cum += pi;
                        if u < cum {
                            hit = Some(i);
                            break;
                        }
                    }
                    if let Some(i) = hit {
                        counts[i] += 1.0;
                    }
                }
                out.push(counts);
            }
        }
        "negative_multinomial" => {
            let n = req(params, "n")? as u64;
            let p = indexed(params, "p");
            let m = p.len();
            let total_p: f64 = p.iter().sum();
            let q0 = 1.0 / (1.0 + total_p);
            let mut probs: Vec<f64> = p.iter().map(|&pi| pi * q0).collect();
            probs.push(q0); // stop category
            for _ in 0..count {
                let mut counts = vec![0.0; m];
                let mut stops = 0u64;
                while stops < n {
                    let i = categorical_draw(&mut rng, &probs);
                    if i == m {
                        stops += 1;
                    } else {
                        counts[i] += 1.0;
                    }
                }
                out.push(counts);
            }
        }
        "logarithmic" => {
            let theta = req(params, "theta")?;
            let norm = -(1.0 - theta).ln();
            for _ in 0..count {
                // inverse CDF on the pmf recurrence p_{k+1} = p_k theta k/(k+1)
                let u = rng.next_f64();
                let mut k = 1.0;
                let mut p = theta / norm;
                let mut cdf = p;
                while u > cdf && k < 100_000.0 {
                    p *= theta * k / (k + 1.0);
                    k += 1.0;
                    cdf += p;
                }
                out.push(vec![k]);
            }
        }
        "random_walk" => {
            if params.contains_key("p1") {
                return Err(OracleError::Unsupported {
                    family: family.into(),
                    what: "multivariate sampling".into(),
                });
            }
            let n = req(params, "n")? as i64;
            let p = req(params, "p")?;
            for _ in 0..count {
                let mut pos = n;
                let mut steps: u64 = 0;
                while pos > 0 {
                    if rng.next_f64() < p {
                        pos -= 1;
                    } else {
                        pos += 1;
                    }
                    steps += 1;
                    if steps >= WALK_STEP_CAP {
                        return Err(OracleError::StepCapExceeded { cap: WALK_STEP_CAP });
                    }
                }
                out.push(vec![steps as f64]);
            }
        }
        "borel_tanner" => {
            if params.contains_key("alpha1") {
                return Err(OracleError::Unsupported {
                    family: family.into(),
                    what: "multivariate sampling".into(),
                });
            }
            let n = req(params, "n")? as u64;
            let alpha = req(params, "alpha")?;
            for _ in 0..count {
                // total progeny of a branching process with Poisson(alpha)
                // offspring and n ancestors
                let mut total = n as f64;
                let mut frontier = n as f64;
                let mut guard: u64 = 0;
                while frontier > 0.0 {
                    let mut offspring = 0.0;
                    for _ in 0..frontier as u64 {
                        offspring += poisson_draw(&mut rng, alpha);
                    }
                    total += offspring;
                    frontier = offspring;
                    guard += 1;
                    if guard >= WALK_STEP_CAP || total >= WALK_STEP_CAP as f64 {
                        return Err(OracleError::StepCapExceeded { cap: WALK_STEP_CAP });
                    }
                }
                out.push(vec![total]);
            }
        }
        other => {
            return Err(OracleError::Unsupported {
                family: other.into(),
                what: "sampling".into(),
            })
        }
    }
    Ok(out)
}

/// Score `d/dx_i ln p(t; x)` in the mean parametrization, for the families
/// used by the Monte Carlo Fisher-information cross-checks.
pub fn score_mean(family: &str, params: &Params, t: &[f64]) -> Result<Vec<f64>, OracleError> {
    match family {
        "poisson" => {
            let lambda = req(params, "lambda")?;
            Ok(vec![t[0] / lambda - 1.0])
        }
        "binomial" => {
            let n = req(params, "n")?;
            let p = req(params, "p")?;
            Ok(vec![(t[0] / p - (n - t[0]) / (1.0 - p)) / n])
        }
        "normal" => {
            let alpha = req(params, "alpha")?;
            let sigma2 = req(params, "sigma2")?;
            Ok(vec![(t[0] - alpha) / sigma2])
        }
        "gamma" => {
            let rate = req(params, "alpha")?;
            let shape = req(params, "lambda")?;
            let x = shape / rate;
            Ok(vec![shape * (t[0] - x) / (x * x)])
        }
        "multinomial" => {
            let n = req(params, "n")?;
            let p = indexed(params, "p");
            let m = p.len();
            let total: f64 = t.iter().sum();
            let p0 = 1.0 - p.iter().sum::<f64>();
            Ok((0..m)
                .map(|i| (t[i] / p[i] - (n - total) / p0) / n)
                .collect())
        }
        other => Err(OracleError::Unsupported {
            family: other.into(),
            what: "score".into(),
        }),
    }
}

/// CSV export of a sample matrix, one row per draw.
pub fn sample_to_csv(sample: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for row in sample {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests;
