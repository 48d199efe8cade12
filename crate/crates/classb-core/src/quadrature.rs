//! Gauss-Legendre quadrature: node/weight generation plus fixed-node and
//! adaptive integration of fallible integrands.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// Nodes and weights of the n-point Gauss-Legendre rule on `[-1, 1]`.
///
/// Nodes are the roots of the Legendre polynomial P_n, found by Newton
/// iteration from the Chebyshev initial guess; weights are
/// 2 / ((1 - x^2) P_n'(x)^2). Results are cached per n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature rule needs at least one node");
    static CACHE: OnceLock<Mutex<HashMap<usize, (Vec<f64>, Vec<f64>)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().unwrap().get(&n) {
        return rule.clone();
    }

    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // Roots come in +/- pairs; compute the upper half.
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        weights[i] = w;
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, d) = legendre_with_derivative(n, 0.0);
        weights[n / 2] = 2.0 / (d * d);
    }

    cache
        .lock()
        .unwrap()
        .insert(n, (nodes.clone(), weights.clone()));
    (nodes, weights)
}

/// Evaluates (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Fixed n-node Gauss-Legendre integral of `f` over `[a, b]`.
///
/// The integrand may fail (domain errors propagate unchanged).
pub fn integrate_fixed<E>(
    f: &mut dyn FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    n: usize,
) -> Result<f64, E> {
    let (nodes, weights) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights.iter()) {
        acc += w * f(mid + half * x)?;
    }
    Ok(acc * half)
}

/// Adaptive Gauss-Legendre integration to absolute tolerance `abs_tol`.
///
/// Each interval is accepted when the 15-node estimate agrees with the sum of
/// the two half-interval estimates within its share of the tolerance;
/// otherwise the interval is bisected. Returns the integral together with the
/// accumulated error estimate.
pub fn integrate_adaptive<E>(
    f: &mut dyn FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    abs_tol: f64,
) -> Result<(f64, f64), E> {
    const NODES: usize = 15;
    const MAX_DEPTH: usize = 40;

    fn recurse<E>(
        f: &mut dyn FnMut(f64) -> Result<f64, E>,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> Result<(f64, f64), E> {
        let mid = 0.5 * (a + b);
        let left = integrate_fixed(f, a, mid, NODES)?;
        let right = integrate_fixed(f, mid, b, NODES)?;
        let delta = (left + right - whole).abs();
        // roundoff floor: once the halves agree to machine precision,
        // further bisection cannot improve the estimate
        let floor = 8e-15 * (left.abs() + right.abs());
        if delta <= tol.max(floor) || depth >= MAX_DEPTH {
            return Ok((left + right, delta));
        }
        let (lv, le) = recurse(f, a, mid, left, 0.5 * tol, depth + 1)?;
        let (rv, re) = recurse(f, mid, b, right, 0.5 * tol, depth + 1)?;
        Ok((lv + rv, le + re))
    }

    if a == b {
        return Ok((0.0, 0.0));
    }
    let whole = integrate_fixed(f, a, b, NODES)?;
    recurse(f, a, b, whole, abs_tol, 0)
}
