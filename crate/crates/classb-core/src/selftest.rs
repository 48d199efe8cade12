//! The acceptance suite: one function per criterion, each checking a
//! closed-form or property statement at a pinned tolerance against the
//! independent oracles. `classb selftest` and the `acceptance` test target
//! both run [`run_all`].

use crate::closedforms;
use crate::expr::{equiv_numeric, parse, DomainBox};
use crate::families::{builtin, verify_eq1, FamilySpec, GridSpec};
use crate::inference;
use crate::moments::{
    central_moments, cumulants, evaluate_table, raw_moment_along_path, raw_moments, MultiIndex,
};
use crate::oracle;
use crate::rng::Rng;
use crate::tails;
use crate::transforms;
use serde::Serialize;
use std::collections::BTreeMap;
use std::time::Instant;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: String,
    pub passed: bool,
    pub details: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub results: Vec<CriterionResult>,
    pub all_passed: bool,
}

pub const CRITERIA: [(usize, &str); 13] = [
    (1, "poisson cumulant flatness"),
    (2, "gamma cumulants vs closed form"),
    (3, "quadratic variance closed form vs recursion"),
    (4, "raw moments vs oracle enumeration/quadrature"),
    (5, "defining-equation residuals"),
    (6, "cumulant additivity under iid sums"),
    (7, "affine round trip and covariance conjugation"),
    (8, "Fisher information: inverse variance and MC score covariance"),
    (9, "poisson tail bound, dual route and oracle domination"),
    (10, "gaussian tail exponent"),
    (11, "first-passage random walk stack"),
    (12, "Borel-Tanner descriptor vs pmf"),
    (13, "multivariate recursion vs enumeration and path independence"),
];

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / (1.0 + want.abs())
}

fn check_rel(what: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    let err = rel_err(got, want);
    if err <= tol {
        Ok(())
    } else {
        Err(format!("{what}: got {got}, want {want} (rel err {err:.3e} > {tol:.0e})"))
    }
}

fn family(name: &str, ps: &[(&str, f64)]) -> Result<FamilySpec, String> {
    builtin(name, &params(ps)).map_err(|e| e.to_string())
}

// --- criterion 1 -----------------------------------------------------------

fn poisson_flatness() -> Result<String, String> {
    let f = family("poisson", &[("lambda", 1.0)])?;
    let table = cumulants(&f, 12).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for lambda in [0.5, 2.0, 7.0] {
        let values = evaluate_table(&table, &params(&[("x", lambda)])).map_err(|e| e.to_string())?;
        for k in 1..=12u32 {
            check_rel(
                &format!("sigma_{k} at lambda={lambda}"),
                values[&MultiIndex(vec![k])],
                lambda,
                1e-10,
            )?;
            checked += 1;
        }
    }
    Ok(format!("{checked} cumulants flat at their lambda"))
}

// --- criterion 2 -----------------------------------------------------------

fn gamma_closed_form() -> Result<String, String> {
    let mut checked = 0;
    for shape in [1.0, 3.0] {
        for rate in [0.5, 2.0] {
            let f = family("gamma", &[("alpha", rate), ("lambda", shape)])?;
            let table = cumulants(&f, 10).map_err(|e| e.to_string())?;
            let x = shape / rate;
            let values = evaluate_table(&table, &params(&[("x", x)])).map_err(|e| e.to_string())?;
            let mut factorial = 1.0;
            for k in 1..=10u32 {
                if k > 1 {
                    factorial *= (k - 1) as f64;
                }
                let want = factorial * shape / rate.powi(k as i32);
                check_rel(
                    &format!("sigma_{k} (shape {shape}, rate {rate})"),
                    values[&MultiIndex(vec![k])],
                    want,
                    1e-9,
                )?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} gamma cumulants match (k-1)! shape rate^-k"))
}

// --- criterion 3 -----------------------------------------------------------

fn quadratic_closed_form() -> Result<String, String> {
    let domain = crate::families::Domain {
        mean_bounds: vec![(0.0, f64::INFINITY)],
        sample: DomainBox::new()
            .with("x", 0.1, 2.0)
            .with("a", 0.1, 2.0)
            .with("b", 0.1, 2.0),
        constraint: None,
    };
    let f = crate::families::from_variance(
        &[vec!["x*(a*x+b)".to_string()]],
        &["x".to_string()],
        domain,
    )
    .map_err(|e| e.to_string())?;
    let table = cumulants(&f, 11).map_err(|e| e.to_string())?;

    let mut rng = Rng::seed_from(0x0C1A_55B3);
    let mut checked = 0;
    for _ in 0..16 {
        let a = rng.uniform(0.1, 2.0);
        let b = rng.uniform(0.1, 2.0);
        let x = rng.uniform(0.1, 2.0);
        let values = evaluate_table(&table, &params(&[("a", a), ("b", b), ("x", x)]))
            .map_err(|e| e.to_string())?;
        for k in 1..=10usize {
            let closed = closedforms::cumulant_quadratic(a, b, x, k).map_err(|e| e.to_string())?;
            let recursion = values[&MultiIndex(vec![k as u32 + 1])];
            if rel_err(recursion, closed) > 1e-9 {
                return Err(format!(
                    "sigma_{} at (a,b,x)=({a:.4},{b:.4},{x:.4}): recursion {recursion} vs closed {closed}",
                    k + 1
                ));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} quadratic-variance cumulants agree across 16 seeded points"))
}

// --- criterion 4 -----------------------------------------------------------

fn oracle_moment_equivalence() -> Result<String, String> {
    let cases: Vec<(&str, Vec<(&str, f64)>, bool, f64)> = vec![
        ("binomial", vec![("n", 5.0), ("p", 0.3)], true, 1.5),
        ("poisson", vec![("lambda", 2.0)], true, 2.0),
        ("negative_binomial", vec![("n", 3.0), ("p", 0.4)], true, 4.5),
        ("normal", vec![("alpha", 0.0), ("sigma2", 1.0)], false, 0.0),
        ("gamma", vec![("alpha", 2.0), ("lambda", 3.0)], false, 1.5),
    ];
    let mut checked = 0;
    for (name, ps, discrete, mean) in cases {
        let f = family(name, &ps)?;
        let table = raw_moments(&f, 6).map_err(|e| e.to_string())?;
        let values =
            evaluate_table(&table, &params(&[("x", mean)])).map_err(|e| e.to_string())?;
        let p = params(&ps);
        let reference = if discrete {
            oracle::enumerate_moments(name, &p, 6, 1e-13)
        } else {
            oracle::quadrature_moments(name, &p, 6)
        }
        .map_err(|e| e.to_string())?;
        for k in 1..=6u32 {
            let idx = MultiIndex(vec![k]);
            check_rel(
                &format!("{name} raw moment a_{k}"),
                values[&idx],
                reference[&idx],
                1e-8,
            )?;
            checked += 1;
        }
    }
    Ok(format!("{checked} raw moments match the oracle route"))
}

// --- criterion 5 -----------------------------------------------------------

fn residuals() -> Result<String, String> {
    let cases: Vec<(&str, Vec<(&str, f64)>)> = vec![
        ("poisson", vec![("lambda", 2.0)]),
        ("binomial", vec![("n", 5.0), ("p", 0.3)]),
        ("negative_binomial", vec![("n", 3.0), ("p", 0.4)]),
        ("normal", vec![("alpha", 0.0), ("sigma2", 1.0)]),
        ("gamma", vec![("alpha", 2.0), ("lambda", 3.0)]),
        ("multinomial", vec![("n", 6.0), ("p1", 0.2), ("p2", 0.3)]),
    ];
    let mut details = Vec::new();
    for (name, ps) in cases {
        let f = family(name, &ps)?;
        let report = verify_eq1(&f, &GridSpec::default(), 1e-8).map_err(|e| e.to_string())?;
        if !report.pass {
            return Err(format!("{name}: max residual {:.3e} > 1e-8", report.max_abs));
        }
        details.push(format!("{name} {:.1e}", report.max_abs));
    }
    Ok(format!("max residuals: {}", details.join(", ")))
}

// --- criterion 6 -----------------------------------------------------------

fn convolution_additivity() -> Result<String, String> {
    let mut checked = 0;
    for (name, ps, x0) in [
        ("poisson", vec![("lambda", 2.0)], 2.0),
        ("binomial", vec![("n", 5.0), ("p", 0.3)], 1.5),
    ] {
        let f = family(name, &ps)?;
        let base = cumulants(&f, 6).map_err(|e| e.to_string())?;
        let base_values =
            evaluate_table(&base, &params(&[("x", x0)])).map_err(|e| e.to_string())?;
        for n in [2u32, 5] {
            let g = transforms::convolve_iid(&f, n).map_err(|e| e.to_string())?;
            let table = cumulants(&g, 6).map_err(|e| e.to_string())?;
            let values = evaluate_table(&table, &params(&[("x", n as f64 * x0)]))
                .map_err(|e| e.to_string())?;
            for k in 1..=6u32 {
                let idx = MultiIndex(vec![k]);
                check_rel(
                    &format!("{name} sum of {n}, sigma_{k}"),
                    values[&idx],
                    n as f64 * base_values[&idx],
                    1e-9,
                )?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} cumulants additive under iid summation"))
}

// --- criterion 7 -----------------------------------------------------------

fn affine_round_trip() -> Result<String, String> {
    // seeded non-singular 2x2 map
    let mut rng = Rng::seed_from(0x0C1A_55B7);
    let a = vec![
        vec![1.0 + rng.uniform(0.0, 0.5), rng.uniform(-0.4, 0.4)],
        vec![rng.uniform(-0.4, 0.4), 1.0 + rng.uniform(0.0, 0.5)],
    ];
    let b = vec![rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let inv = vec![
        vec![a[1][1] / det, -a[0][1] / det],
        vec![-a[1][0] / det, a[0][0] / det],
    ];
    let b_inv = vec![
        -(inv[0][0] * b[0] + inv[0][1] * b[1]),
        -(inv[1][0] * b[0] + inv[1][1] * b[1]),
    ];

    let cases: Vec<(&str, Vec<(&str, f64)>, [f64; 2])> = vec![
        (
            "mvnormal",
            vec![
                ("alpha1", 0.5),
                ("alpha2", -0.3),
                ("sigma11", 1.0),
                ("sigma12", 0.4),
                ("sigma22", 2.0),
            ],
            [0.5, -0.3],
        ),
        (
            "multinomial",
            vec![("n", 6.0), ("p1", 0.2), ("p2", 0.3)],
            [1.2, 1.8],
        ),
    ];
    for (name, ps, x0) in cases {
        let f = family(name, &ps)?;
        let g = transforms::affine(&f, &a, &b).map_err(|e| e.to_string())?;
        let back = transforms::affine(&g, &inv, &b_inv).map_err(|e| e.to_string())?;

        let mut domain = f.domain.sample.clone();
        for (k, v) in &f.aux {
            domain.ranges.entry(k.clone()).or_insert((*v, *v));
        }
        for i in 0..2 {
            for j in 0..2 {
                let same = equiv_numeric(&back.v[i][j], &f.v[i][j], &domain, 32, 1e-9)
                    .map_err(|e| e.to_string())?;
                if !same {
                    return Err(format!("{name}: V[{i}][{j}] not restored by the round trip"));
                }
            }
        }

        // beta_2 covariance of the image at y = A x0 + b equals A V(x0) A'
        let y0 = [
            a[0][0] * x0[0] + a[0][1] * x0[1] + b[0],
            a[1][0] * x0[0] + a[1][1] * x0[1] + b[1],
        ];
        let table = central_moments(&g, 2).map_err(|e| e.to_string())?;
        let values = evaluate_table(
            &table,
            &params(&[("x1", y0[0]), ("x2", y0[1])]),
        )
        .map_err(|e| e.to_string())?;
        let expected = transforms::conjugate_variance(&f, &a, &x0).map_err(|e| e.to_string())?;
        for (idx, ii, jj) in [
            (MultiIndex(vec![2, 0]), 0, 0),
            (MultiIndex(vec![1, 1]), 0, 1),
            (MultiIndex(vec![0, 2]), 1, 1),
        ] {
            check_rel(
                &format!("{name} covariance entry ({ii},{jj})"),
                values[&idx],
                expected[(ii, jj)],
                1e-9,
            )?;
        }
    }
    Ok("round trips restore V; image covariance is A V A'".to_string())
}

// --- criterion 8 -----------------------------------------------------------

fn fisher_information(seed: u64) -> Result<String, String> {
    // identity check at three domain points for every usable builtin
    let cases: Vec<(&str, Vec<(&str, f64)>, Vec<Vec<f64>>)> = vec![
        ("binomial", vec![("n", 5.0), ("p", 0.3)], vec![vec![0.8], vec![1.5], vec![3.9]]),
        ("poisson", vec![("lambda", 2.0)], vec![vec![0.6], vec![2.0], vec![5.5]]),
        (
            "negative_binomial",
            vec![("n", 3.0), ("p", 0.4)],
            vec![vec![0.7], vec![2.0], vec![3.5]],
        ),
        (
            "normal",
            vec![("alpha", 0.0), ("sigma2", 1.5)],
            vec![vec![-2.0], vec![0.0], vec![2.0]],
        ),
        (
            "gamma",
            vec![("alpha", 2.0), ("lambda", 3.0)],
            vec![vec![0.5], vec![1.5], vec![4.0]],
        ),
        (
            "mvnormal",
            vec![
                ("alpha1", 0.0),
                ("alpha2", 1.0),
                ("sigma11", 1.0),
                ("sigma12", 0.3),
                ("sigma22", 2.0),
            ],
            vec![vec![0.0, 1.0], vec![-1.0, 0.5], vec![2.0, 2.0]],
        ),
        (
            "multinomial",
            vec![("n", 6.0), ("p1", 0.2), ("p2", 0.3)],
            vec![vec![1.2, 1.8], vec![0.5, 0.5], vec![2.0, 3.0]],
        ),
        (
            "negative_multinomial",
            vec![("n", 3.0), ("p1", 0.2), ("p2", 0.3)],
            vec![vec![0.6, 0.9], vec![0.4, 0.4], vec![1.5, 2.0]],
        ),
        (
            "logarithmic",
            vec![("theta", 0.4)],
            vec![vec![1.2], vec![1.5], vec![2.5]],
        ),
        (
            "random_walk",
            vec![("n", 1.0), ("p", 0.75)],
            vec![vec![1.3], vec![2.0], vec![4.0]],
        ),
        (
            "borel_tanner",
            vec![("n", 1.0), ("alpha", 0.3)],
            vec![vec![1.2], vec![1.43], vec![3.0]],
        ),
    ];
    let mut identity_checks = 0;
    for (name, ps, points) in &cases {
        let f = family(name, ps)?;
        for x in points {
            let info = inference::fisher_info(&f, x).map_err(|e| e.to_string())?;
            let v = f.v_at(x).map_err(|e| e.to_string())?;
            let m = f.dim;
            for i in 0..m {
                for j in 0..m {
                    let mut acc = 0.0;
                    for k in 0..m {
                        acc += info[i][k] * v[(k, j)];
                    }
                    let expected = if i == j { 1.0 } else { 0.0 };
                    if (acc - expected).abs() > 1e-9 {
                        return Err(format!(
                            "{name} at {x:?}: (I V)[{i}][{j}] = {acc} != {expected}"
                        ));
                    }
                    identity_checks += 1;
                }
            }
        }
    }

    // Monte Carlo score covariance at 10^6 samples
    let count = 1_000_000usize;
    for (name, ps) in [
        ("poisson", vec![("lambda", 2.0)]),
        ("binomial", vec![("n", 5.0), ("p", 0.3)]),
    ] {
        let p = params(&ps);
        let f = family(name, &ps)?;
        let mean = f.mean_point().ok_or("builtin has a mean")?;
        let info = inference::fisher_info(&f, &mean).map_err(|e| e.to_string())?[0][0];
        let sample = oracle::mc_sample(name, &p, count, seed).map_err(|e| e.to_string())?;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for row in &sample {
            let s = oracle::score_mean(name, &p, row).map_err(|e| e.to_string())?[0];
            let s2 = s * s;
            sum += s2;
            sum_sq += s2 * s2;
        }
        let n = count as f64;
        let estimate = sum / n;
        let variance_of_s2 = (sum_sq / n - estimate * estimate).max(0.0);
        let se = (variance_of_s2 / n).sqrt();
        if (estimate - info).abs() > 3.0 * se {
            return Err(format!(
                "{name}: score covariance {estimate} vs V^-1 {info} exceeds 3 s.e. ({se:.3e})"
            ));
        }
    }
    Ok(format!(
        "{identity_checks} identity entries verified; MC score covariance within 3 s.e. at 10^6 draws"
    ))
}

// --- criterion 9 -----------------------------------------------------------

fn poisson_tail_stack() -> Result<String, String> {
    let f = family("poisson", &[("lambda", 1.0)])?;
    let (a, _) = tails::exponent_a(&f, &[1.0], &[2.0]).map_err(|e| e.to_string())?;
    let want = 2.0 * 2.0f64.ln() - 1.0;
    if (a - want).abs() > 1e-8 {
        return Err(format!("A(1 -> 2) = {a}, want {want}"));
    }
    let dual = tails::dual_exponent(&f, &[1.0], &[2.0]).map_err(|e| e.to_string())?;
    if (dual - a).abs() > 1e-7 {
        return Err(format!("dual exponent {dual} vs integral {a}"));
    }
    let exact = oracle::exact_tail("poisson", &params(&[("lambda", 1.0)]), 2.0)
        .map_err(|e| e.to_string())?;
    let bound = (-a).exp();
    if exact > bound {
        return Err(format!("exact tail {exact} exceeds bound {bound}"));
    }
    check_rel("exact tail", exact, 1.0 - 2.0 * (-1.0f64).exp(), 1e-12)?;

    for y in [1.5, 2.0, 3.0, 5.0] {
        let report = tails::tail_bound(&f, &[1.0], &[y]).map_err(|e| e.to_string())?;
        let oracle_tail = report.oracle_tail.ok_or("oracle tail must be present")?;
        if oracle_tail > report.bound + 1e-12 {
            return Err(format!(
                "y = {y}: oracle tail {} exceeds bound {}",
                oracle_tail, report.bound
            ));
        }
    }
    Ok(format!("A = {a:.9} (= 2 ln 2 - 1), dual and oracle dominate across the grid"))
}

// --- criterion 10 ----------------------------------------------------------

fn gaussian_exponent() -> Result<String, String> {
    for sigma2 in [1.0, 2.0] {
        let f = family("normal", &[("alpha", 0.0), ("sigma2", sigma2)])?;
        for y in [0.5, 1.0, 2.0, 3.0, 4.0] {
            let (a, _) = tails::exponent_a(&f, &[0.0], &[y]).map_err(|e| e.to_string())?;
            let want = y * y / (2.0 * sigma2);
            if (a - want).abs() > 1e-8 {
                return Err(format!("sigma2={sigma2}, y={y}: A = {a}, want {want}"));
            }
        }
    }
    Ok("A(y) = (y-x)^2/(2 sigma^2) across the grid".to_string())
}

// --- criterion 11 ----------------------------------------------------------

fn random_walk_stack(seed: u64) -> Result<String, String> {
    // descriptor consistency: the two printed univariate forms coincide
    let f = family("random_walk", &[("n", 2.0), ("p", 0.8)])?;
    let example10 = parse("x*((x/n)^2-1)").map_err(|e| e.to_string())?;
    let domain = DomainBox::new().with("x", 2.2, 9.0).with("n", 2.0, 2.0);
    if !equiv_numeric(&f.v[0][0], &example10, &domain, 32, 1e-10).map_err(|e| e.to_string())? {
        return Err("univariate variance forms disagree".into());
    }

    // seed variance
    let s2 = closedforms::randomwalk_cumulant(1, 0.75, 0).map_err(|e| e.to_string())?;
    check_rel("sigma_2 at n=1, p=0.75", s2, 6.0, 1e-12)?;

    // closed form vs recursion for k+2 <= 8
    let table = cumulants(&f, 8).map_err(|e| e.to_string())?;
    let x = 2.0 / 0.6;
    let values = evaluate_table(&table, &params(&[("x", x)])).map_err(|e| e.to_string())?;
    for k in 0..=6usize {
        let closed = closedforms::randomwalk_cumulant(2, 0.8, k).map_err(|e| e.to_string())?;
        let recursion = values[&MultiIndex(vec![k as u32 + 2])];
        if rel_err(recursion, closed) > 1e-9 {
            return Err(format!("sigma_{}: closed {closed} vs recursion {recursion}", k + 2));
        }
    }

    // Monte Carlo against the descriptor at 10^6 draws
    let count = 1_000_000usize;
    let sample = oracle::mc_sample("random_walk", &params(&[("n", 1.0), ("p", 0.75)]), count, seed)
        .map_err(|e| e.to_string())?;
    let n = count as f64;
    let mean: f64 = sample.iter().map(|r| r[0]).sum::<f64>() / n;
    let var: f64 = sample.iter().map(|r| (r[0] - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let m4: f64 = sample.iter().map(|r| (r[0] - mean).powi(4)).sum::<f64>() / n;
    let se_mean = (var / n).sqrt();
    let se_var = ((m4 - var * var).max(0.0) / n).sqrt();
    if (mean - 2.0).abs() > 4.0 * se_mean {
        return Err(format!("MC mean {mean} vs 2 exceeds 4 s.e. ({se_mean:.2e})"));
    }
    if (var - 6.0).abs() > 4.0 * se_var {
        return Err(format!("MC variance {var} vs 6 exceeds 4 s.e. ({se_var:.2e})"));
    }
    Ok(format!(
        "descriptors consistent; closed form = recursion to order 8; MC mean {mean:.4}, var {var:.3}"
    ))
}

// --- criterion 12 ----------------------------------------------------------

fn borel_tanner_descriptor() -> Result<String, String> {
    for (n, alpha) in [(1.0, 0.3), (2.0, 0.5)] {
        let m = oracle::enumerate_moments(
            "borel_tanner",
            &params(&[("n", n), ("alpha", alpha)]),
            2,
            1e-13,
        )
        .map_err(|e| e.to_string())?;
        let mean = m[&MultiIndex(vec![1])];
        let var = m[&MultiIndex(vec![2])] - mean * mean;
        check_rel(
            &format!("mean (n={n}, alpha={alpha})"),
            mean,
            n / (1.0 - alpha),
            1e-8,
        )?;
        check_rel(
            &format!("variance (n={n}, alpha={alpha})"),
            var,
            n * alpha / (1.0 - alpha).powi(3),
            1e-8,
        )?;
    }
    Ok("pmf reproduces n/(1-alpha) and n alpha/(1-alpha)^3".to_string())
}

// --- criterion 13 ----------------------------------------------------------

fn multivariate_recursion() -> Result<String, String> {
    let ps = [("n", 4.0), ("p1", 0.2), ("p2", 0.3)];
    let f = family("multinomial", &ps)?;
    let table = raw_moments(&f, 4).map_err(|e| e.to_string())?;
    let values = evaluate_table(&table, &params(&[("x1", 0.8), ("x2", 1.2)]))
        .map_err(|e| e.to_string())?;
    let reference = oracle::enumerate_moments("multinomial", &params(&ps), 4, 1e-13)
        .map_err(|e| e.to_string())?;
    let mut checked = 0;
    for (k, want) in &reference {
        let got = values[k];
        if rel_err(got, *want) > 1e-10 {
            return Err(format!("a_{k}: recursion {got} vs enumeration {want}"));
        }
        checked += 1;
    }

    let mut domain = DomainBox::new().with("x1", 0.2, 1.5).with("x2", 0.2, 1.5);
    domain.ranges.insert("n".into(), (4.0, 4.0));
    let pairs: [(&[usize], &[usize]); 2] = [(&[0, 1], &[1, 0]), (&[0, 0, 1], &[1, 0, 0])];
    for (p1, p2) in pairs {
        let e1 = raw_moment_along_path(&f, p1).map_err(|e| e.to_string())?;
        let e2 = raw_moment_along_path(&f, p2).map_err(|e| e.to_string())?;
        if !equiv_numeric(&e1, &e2, &domain, 32, 1e-9).map_err(|e| e.to_string())? {
            return Err(format!("generation paths {p1:?} and {p2:?} disagree"));
        }
    }
    Ok(format!("{checked} moments match enumeration; generation order is immaterial"))
}

// ---------------------------------------------------------------------------

pub fn run_one(id: usize, seed: u64) -> CriterionResult {
    let name = CRITERIA
        .iter()
        .find(|(i, _)| *i == id)
        .map(|(_, n)| n.to_string())
        .unwrap_or_else(|| format!("criterion {id}"));
    let start = Instant::now();
    let outcome = match id {
        1 => poisson_flatness(),
        2 => gamma_closed_form(),
        3 => quadratic_closed_form(),
        4 => oracle_moment_equivalence(),
        5 => residuals(),
        6 => convolution_additivity(),
        7 => affine_round_trip(),
        8 => fisher_information(seed),
        9 => poisson_tail_stack(),
        10 => gaussian_exponent(),
        11 => random_walk_stack(seed.wrapping_add(1)),
        12 => borel_tanner_descriptor(),
        13 => multivariate_recursion(),
        _ => Err(format!("unknown criterion {id}")),
    };
    let seconds = start.elapsed().as_secs_f64();
    match outcome {
        Ok(details) => CriterionResult {
            id,
            name,
            passed: true,
            details,
            seconds,
        },
        Err(details) => CriterionResult {
            id,
            name,
            passed: false,
            details,
            seconds,
        },
    }
}

/// Runs the whole acceptance suite. `seed` drives the Monte Carlo parts.
pub fn run_all(seed: u64) -> SelftestReport {
    let results: Vec<CriterionResult> = CRITERIA.iter().map(|(id, _)| run_one(*id, seed)).collect();
    let all_passed = results.iter().all(|r| r.passed);
    SelftestReport {
        seed,
        results,
        all_passed,
    }
}
