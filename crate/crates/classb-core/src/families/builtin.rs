//! Registry of built-in class-B families, keyed by their mean
//! parametrization. Underlying parameters (n, p, lambda, ...) are kept in
//! the `param_map` for oracle use; auxiliary symbols appearing in `V`
//! (n, sigma2, the Gamma shape) carry their fixed values in `aux`.

use super::{Chart, Domain, FamilySpec, FamilyError, ParamMap, SumBelow};
use crate::expr::{parse, DomainBox, Expr};
use nalgebra::DMatrix;
use std::collections::BTreeMap;

pub(crate) type Params = BTreeMap<String, f64>;

fn expr(text: &str) -> Expr {
    parse(text).expect("builtin expression text is well-formed")
}

fn req(family: &str, params: &Params, key: &str) -> Result<f64, FamilyError> {
    params
        .get(key)
        .copied()
        .ok_or_else(|| FamilyError::ParamOutOfRange {
            family: family.to_string(),
            message: format!("missing parameter `{}`", key),
        })
}

fn req_positive_int(family: &str, params: &Params, key: &str) -> Result<f64, FamilyError> {
    let v = req(family, params, key)?;
    if v < 1.0 || v.fract() != 0.0 {
        return Err(FamilyError::ParamOutOfRange {
            family: family.to_string(),
            message: format!("`{}` must be a positive integer, got {}", key, v),
        });
    }
    Ok(v)
}

fn check(family: &str, condition: bool, message: &str) -> Result<(), FamilyError> {
    if condition {
        Ok(())
    } else {
        Err(FamilyError::ParamOutOfRange {
            family: family.to_string(),
            message: message.to_string(),
        })
    }
}

/// Collects `prefix1, prefix2, ...` until the first missing index.
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

fn param_map(family: &str, params: &Params, mean: Vec<f64>) -> Option<ParamMap> {
    Some(ParamMap {
        family: family.to_string(),
        params: params.clone(),
        mean,
    })
}

fn univariate_domain(lo: f64, hi: f64, sample_lo: f64, sample_hi: f64) -> Domain {
    Domain {
        mean_bounds: vec![(lo, hi)],
        sample: DomainBox::new().with("x", sample_lo, sample_hi),
        constraint: None,
    }
}

pub fn builtin_names() -> &'static [&'static str] {
    &[
        "binomial",
        "poisson",
        "negative_binomial",
        "normal",
        "gamma",
        "mvnormal",
        "multinomial",
        "negative_multinomial",
        "logarithmic",
        "mv_logarithmic",
        "random_walk",
        "borel_tanner",
    ]
}

/// One line per builtin: parameter names as used by `--params`.
pub fn describe_builtins() -> Vec<(&'static str, &'static str)> {
    vec![
        ("binomial", "n (positive int), p in (0,1); mean x = n*p, V = x*(1-x/n)"),
        ("poisson", "lambda > 0; mean x = lambda, V = x"),
        (
            "negative_binomial",
            "n (positive int), p in (0,1); mean x = n*(1-p)/p, V = x*(1+x/n)",
        ),
        ("normal", "alpha, sigma2 > 0; mean x = alpha, V = sigma2"),
        (
            "gamma",
            "alpha (rate) > 0, lambda (shape) > 0; mean x = lambda/alpha, V = x^2/lambda",
        ),
        (
            "mvnormal",
            "alpha1..alpham, sigma11, sigma12, ... (symmetric PD); mean x = alpha, V = sigma",
        ),
        (
            "multinomial",
            "n (positive int), p1..pm > 0 with p1+...+pm < 1; mean x_i = n*p_i",
        ),
        (
            "negative_multinomial",
            "n (positive int), p1..pm > 0; mean x_i = n*p_i, V_ij = x_i*(delta_ij + x_j/n)",
        ),
        (
            "logarithmic",
            "theta in (0,1); mean x = -theta/((1-theta)*log(1-theta)) (parametric chart)",
        ),
        (
            "mv_logarithmic",
            "theta1..thetam > 0 with |theta| < 1 (descriptor only, unverified)",
        ),
        (
            "random_walk",
            "n (positive int), p in (0.5,1) scalar, or p1..pm for the multivariate descriptor \
             (multivariate form unverified); mean x = n/(2p-1), V = x^3/n^2 - x",
        ),
        (
            "borel_tanner",
            "n (positive int), alpha in (0,1) scalar, or alpha1..alpham for the multivariate \
             descriptor (multivariate form unverified); mean x = n/(1-alpha)",
        ),
    ]
}

/// Constructs a built-in family from its classical parameters.
pub fn builtin(name: &str, params: &Params) -> Result<FamilySpec, FamilyError> {
    match name {
        "binomial" => binomial(params),
        "poisson" => poisson(params),
        "negative_binomial" => negative_binomial(params),
        "normal" => normal(params),
        "gamma" => gamma(params),
        "mvnormal" => mvnormal(params),
        "multinomial" => multinomial(params),
        "negative_multinomial" => negative_multinomial(params),
        "logarithmic" => logarithmic(params),
        "mv_logarithmic" => mv_logarithmic(params),
        "random_walk" => random_walk(params),
        "borel_tanner" => borel_tanner(params),
        _ => Err(FamilyError::UnknownFamily {
            name: name.to_string(),
        }),
    }
}

fn binomial(params: &Params) -> Result<FamilySpec, FamilyError> {
    let n = req_positive_int("binomial", params, "n")?;
    let p = req("binomial", params, "p")?;
    check("binomial", p > 0.0 && p < 1.0, "need 0 < p < 1")?;
    let mean = n * p;
    Ok(FamilySpec {
        name: "binomial".into(),
        dim: 1,
        mean_vars: vec!["x".into()],
        v: vec![vec![expr("x*(1-x/n)")]],
        domain: univariate_domain(0.0, n, 0.05 * n, 0.95 * n),
        // probability generating function at exp(-z)
        laplace: Some(expr("exp(n*log(1-x/n+(x/n)*exp(-z)))")),
        s_char: Some(vec![expr("-log(x/(n-x))")]),
        param_map: param_map("binomial", params, vec![mean]),
        aux: BTreeMap::from([("n".to_string(), n)]),
        chart: None,
        unverified: false,
        domain_approx: false,
    })
}

fn poisson(params: &Params) -> Result<FamilySpec, FamilyError> {
    let lambda = req("poisson", params, "lambda")?;
    check("poisson", lambda > 0.0, "need lambda > 0")?;
    Ok(FamilySpec {
        name: "poisson".into(),
        dim: 1,
        mean_vars: vec!["x".into()],
        v: vec![vec![expr("x")]],
        domain: univariate_domain(0.0, f64::INFINITY, 0.25, (4.0 * lambda).max(8.0)),
        laplace: Some(expr("exp(x*(exp(-z)-1))")),
        s_char: Some(vec![expr("-log(x)")]),
        param_map: param_map("poisson", params, vec![lambda]),
        aux: BTreeMap::new(),
        chart: None,
        unverified: false,
        domain_approx: false,
    })
}

fn negative_binomial(params: &Params) -> Result<FamilySpec, FamilyError> {
    let n = req_positive_int("negative_binomial", params, "n")?;
    let p = req("negative_binomial", params, "p")?;
    check("negative_binomial", p > 0.0 && p < 1.0, "need 0 < p < 1")?;
    let mean = n * (1.0 - p) / p;
    Ok(FamilySpec {
        name: "negative_binomial".into(),
        dim: 1,
        mean_vars: vec!["x".into()],
        v: vec![vec![expr("x*(1+x/n)")]],
        // the sampling box keeps the canonical verify grid (|z| <= 1/2)
        // inside the transform's convergence region x/n < 1/(e^{1/2}-1)
        domain: univariate_domain(0.0, f64::INFINITY, 0.1 * n, 1.3 * n),
        laplace: Some(expr("exp(-n*log(1+(x/n)*(1-exp(-z))))")),
        s_char: Some(vec![expr("-log(x/(x+n))")]),
        param_map: param_map("negative_binomial", params, vec![mean]),
        aux: BTreeMap::from([("n".to_string(), n)]),
        chart: None,
        unverified: false,
        domain_approx: false,
    })
}

fn normal(params: &Params) -> Result<FamilySpec, FamilyError> {
    let alpha = req("normal", params, "alpha")?;
    let sigma2 = req("normal", params, "sigma2")?;
    check("normal", sigma2 > 0.0, "need sigma2 > 0")?;
    let sd = sigma2.sqrt();
    Ok(FamilySpec {
        name: "normal".into(),
        dim: 1,
        mean_vars: vec!["x".into()],
        v: vec![vec![expr("sigma2")]],
        domain: univariate_domain(
            f64::NEG_INFINITY,
            f64::INFINITY,
            alpha - 3.0 * sd,
            alpha + 3.0 * sd,
        ),
        laplace: Some(expr("exp(-z*x+z^2*sigma2/2)")),
        s_char: Some(vec![expr("-x/sigma2")]),
        param_map: param_map("normal", params, vec![alpha]),
        aux: BTreeMap::from([("sigma2".to_string(), sigma2)]),
        chart: None,
        unverified: false,
        domain_approx: false,
    })
}

fn gamma(params: &Params) -> Result<FamilySpec, FamilyError> {
    let alpha = req("gamma", params, "alpha")?; // rate
    let lambda = req("gamma", params, "lambda")?; // shape, fixed
    check("gamma", alpha > 0.0 && lambda > 0.0, "need alpha > 0 and lambda > 0")?;
    let mean = lambda / alpha;
    Ok(FamilySpec {
        name: "gamma".into(),
        dim: 1,
        mean_vars: vec!["x".into()],
        v: vec![vec![expr("x^2/lambda")]],
        // x < 2*lambda keeps 1 + z*x/lambda positive over |z| <= 1/2
        domain: univariate_domain(
            0.0,
            f64::INFINITY,
            0.1 * mean.min(lambda),
            1.6 * lambda,
        ),
        laplace: Some(expr("exp(-lambda*log(1+z*x/lambda))")),
        s_char: Some(vec![expr("lambda/x")]),
        param_map: param_map("gamma", params, vec![mean]),
        aux: BTreeMap::from([("lambda".to_string(), lambda)]),
        chart: None,
        unverified: false,
        domain_approx: false,
    })
}

fn mvnormal(params: &Params) -> Result<FamilySpec, FamilyError> {
    let alpha = indexed(params, "alpha");
    let m = alpha.len();
    check("mvnormal", m >= 1, "need alpha1..alpham")?;
    let mut sigma = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = req("mvnormal", params, &format!("sigma{}{}", i + 1, j + 1))?;
            sigma[(i, j)] = v;
            sigma[(j, i)] = v;
        }
    }
    check(
        "mvnormal",
        sigma.clone().cholesky().is_some(),
        "sigma must be positive definite",
    )?;

    let xvar = |i: usize| Expr::var(format!("x{}", i + 1));
    let zvar = |i: usize| Expr::var(format!("z{}", i + 1));

    let v: Vec<Vec<Expr>> = (0..m)
        .map(|i| (0..m).map(|j| Expr::from_f64(sigma[(i, j)])).collect())
        .collect();

    // phi = exp(-z.x + z' sigma z / 2)
    let mut arg = Expr::int(0);
    for i in 0..m {
        arg = arg - zvar(i) * xvar(i);
    }
    let mut quad = Expr::int(0);
    for i in 0..m {
        for j in 0..m {
            quad = quad + Expr::from_f64(sigma[(i, j)]) * zvar(i) * zvar(j);
        }
    }
    let laplace = Expr::exp(arg + quad / Expr::int(2));

    // s(x) = -sigma^{-1} x
    let w = sigma.clone().try_inverse().ok_or_else(|| FamilyError::ParamOutOfRange {
        family: "mvnormal".into(),
        message: "sigma is singular".into(),
    })?;
    let s_char: Vec<Expr> = (0..m)
        .map(|i| {
            let mut s = Expr::int(0);
            for j in 0..m {
                s = s - Expr::from_f64(w[(i, j)]) * xvar(j);
            }
            s
        })
        .collect();

    let mut sample = DomainBox::new();
    for i in 0..m {
        let sd = sigma[(i, i)].sqrt();
        sample = sample.with(format!("x{}", i + 1), alpha[i] - 3.0 * sd, alpha[i] + 3.0 * sd);
    }
    Ok(FamilySpec {
        name: "mvnormal".into(),
        dim: m,
        mean_vars: (1..=m).map(|i| format!("x{}", i)).collect(),
        v,
        domain: Domain {
            mean_bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); m],
            sample,
            constraint: None,
        },
        laplace: Some(laplace),
        s_char: Some(s_char),
        param_map: param_map("mvnormal", params, alpha),
        aux: BTreeMap::new(),
        chart: None,
        unverified: false,
        domain_approx: false,
    })
}

fn multinomial(params: &Params) -> Result<FamilySpec, FamilyError> {
    let n = req_positive_int("multinomial", params, "n")?;
    let p = indexed(params, "p");
    let m = p.len();
    check("multinomial", m >= 1, "need p1..pm")?;
    check(
        "multinomial",
        p.iter().all(|&v| v > 0.0) && p.iter().sum::<f64>() < 1.0,
        "need p_i > 0 and p1+...+pm < 1",
    )?;
    let mean: Vec<f64> = p.iter().map(|&pi| n * pi).collect();
    let xs = |i: usize| format!("x{}", i + 1);

    let mut v = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = Vec::with_capacity(m);
        for j in 0..m {
            if i == j {
                row.push(expr(&format!("{0}*(1-{0}/n)", xs(i))));
            } else {
                row.push(expr(&format!("-{}*{}/n", xs(i), xs(j))));
            }
        }
        v.push(row);
    }

    // phi = (1 - |x|/n + sum (x_j/n) e^{-z_j})^n
    let mut arg = Expr::int(1);
    for j in 0..m {
        arg = arg - Expr::var(xs(j)) / Expr::var("n");
        arg = arg + Expr::var(xs(j)) / Expr::var("n") * Expr::exp(-Expr::var(format!("z{}", j + 1)));
    }
    let laplace = Expr::exp(Expr::var("n") * Expr::log(arg));

    let total = (0..m).map(xs).collect::<Vec<_>>().join("+");
    let s_char: Vec<Expr> = (0..m)
        .map(|i| expr(&format!("-log({}/(n-({})))", xs(i), total)))
        .collect();

    let mut sample = DomainBox::new();
    for i in 0..m {
        sample = sample.with(xs(i), 0.02 * n, 0.9 * n);
    }
    Ok(FamilySpec {
        name: "multinomial".into(),
        dim: m,
        mean_vars: (0..m).map(xs).collect(),
        v,
        domain: Domain {
            mean_bounds: vec![(0.0, n); m],
            sample,
            constraint: Some(SumBelow {
                vars: (0..m).map(xs).collect(),
                limit: n,
            }),
        },
        laplace: Some(laplace),
        s_char: Some(s_char),
        param_map: param_map("multinomial", params, mean),
        aux: BTreeMap::from([("n".to_string(), n)]),
        chart: None,
        unverified: false,
        domain_approx: false,
    })
}

fn negative_multinomial(params: &Params) -> Result<FamilySpec, FamilyError> {
    let n = req_positive_int("negative_multinomial", params, "n")?;
    let p = indexed(params, "p");
    let m = p.len();
    check("negative_multinomial", m >= 1, "need p1..pm")?;
    check(
        "negative_multinomial",
        p.iter().all(|&v| v > 0.0),
        "need p_i > 0",
    )?;
    let mean: Vec<f64> = p.iter().map(|&pi| n * pi).collect();
    let xs = |i: usize| format!("x{}", i + 1);

    let mut v = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = Vec::with_capacity(m);
        for j in 0..m {
            if i == j {
                row.push(expr(&format!("{0}*(1+{0}/n)", xs(i))));
            } else {
                row.push(expr(&format!("{}*{}/n", xs(i), xs(j))));
            }
        }
        v.push(row);
    }

    // phi = (1 + sum (x_j/n)(1 - e^{-z_j}))^{-n}
    let mut arg = Expr::int(1);
    for j in 0..m {
        arg = arg
            + Expr::var(xs(j)) / Expr::var("n")
                * (Expr::int(1) - Expr::exp(-Expr::var(format!("z{}", j + 1))));
    }
    let laplace = Expr::exp(-(Expr::var("n") * Expr::log(arg)));

    let total = (0..m).map(xs).collect::<Vec<_>>().join("+");
    let s_char: Vec<Expr> = (0..m)
        .map(|i| expr(&format!("-log({}/(n+{}))", xs(i), total)))
        .collect();

    let mut sample = DomainBox::new();
    for i in 0..m {
        sample = sample.with(xs(i), 0.05 * n, 1.5 * n / m as f64);
    }
    Ok(FamilySpec {
        name: "negative_multinomial".into(),
        dim: m,
        mean_vars: (0..m).map(xs).collect(),
        v,
        domain: Domain {
            mean_bounds: vec![(0.0, f64::INFINITY); m],
            sample,
            constraint: None,
        },
        laplace: Some(laplace),
        s_char: Some(s_char),
        param_map: param_map("negative_multinomial", params, mean),
        aux: BTreeMap::from([("n".to_string(), n)]),
        chart: None,
        unverified: false,
        domain_approx: false,
    })
}

fn logarithmic(params: &Params) -> Result<FamilySpec, FamilyError> {
    let theta = req("logarithmic", params, "theta")?;
    check("logarithmic", theta > 0.0 && theta < 1.0, "need 0 < theta < 1")?;
    let mean_expr = expr("-theta/((1-theta)*log(1-theta))");
    let v_expr = expr("-theta/((1-theta)^2*log(1-theta))*(1+theta/log(1-theta))");
    let mean = mean_expr
        .eval(&BTreeMap::from([("theta".to_string(), theta)]))
        .expect("mean chart evaluates on (0,1)");
    Ok(FamilySpec {
        name: "logarithmic".into(),
        dim: 1,
        mean_vars: vec!["x".into()],
        v: vec![vec![v_expr]],
        domain: Domain {
            mean_bounds: vec![(1.0, f64::INFINITY)],
            sample: DomainBox::new().with("theta", 0.05, 0.85),
            constraint: None,
        },
        laplace: None,
        s_char: None,
        param_map: param_map("logarithmic", params, vec![mean]),
        aux: BTreeMap::new(),
        chart: Some(Chart {
            vars: vec!["theta".into()],
            mean: vec![mean_expr],
            bounds: vec![(0.0, 1.0)],
        }),
        unverified: false,
        domain_approx: false,
    })
}

fn mv_logarithmic(params: &Params) -> Result<FamilySpec, FamilyError> {
    let theta = indexed(params, "theta");
    let m = theta.len();
    check("mv_logarithmic", m >= 2, "need theta1..thetam (use `logarithmic` for m = 1)")?;
    check(
        "mv_logarithmic",
        theta.iter().all(|&t| t > 0.0) && theta.iter().sum::<f64>() < 1.0,
        "need theta_i > 0 and |theta| < 1",
    )?;
    let ts = |i: usize| format!("theta{}", i + 1);
    let total = (0..m).map(ts).collect::<Vec<_>>().join("+");
    // x_i = -theta_i / ((1-|theta|) log(1-|theta|))
    let mean_exprs: Vec<Expr> = (0..m)
        .map(|i| expr(&format!("-{}/((1-({1}))*log(1-({1})))", ts(i), total)))
        .collect();
    // V as printed: v_ij = x_i (delta_ij + theta_j (1+L) / ((1-|theta|) L)),
    // L = log(1-|theta|). No independent cross-check exists; descriptor only.
    let h = format!("(1+log(1-({0})))/((1-({0}))*log(1-({0})))", total);
    let mut v = Vec::with_capacity(m);
    for i in 0..m {
        let xi = format!("(-{}/((1-({1}))*log(1-({1}))))", ts(i), total);
        let mut row = Vec::with_capacity(m);
        for j in 0..m {
            if i == j {
                row.push(expr(&format!("{}*(1+{}*{})", xi, ts(j), h)));
            } else {
                row.push(expr(&format!("{}*{}*{}", xi, ts(j), h)));
            }
        }
        v.push(row);
    }
    let bindings: BTreeMap<String, f64> = (0..m).map(|i| (ts(i), theta[i])).collect();
    let mean: Vec<f64> = mean_exprs
        .iter()
        .map(|e| e.eval(&bindings).expect("mean chart evaluates on the simplex"))
        .collect();

    let mut sample = DomainBox::new();
    for i in 0..m {
        sample = sample.with(ts(i), 0.02, 0.45);
    }
    Ok(FamilySpec {
        name: "mv_logarithmic".into(),
        dim: m,
        mean_vars: (1..=m).map(|i| format!("x{}", i)).collect(),
        v,
        domain: Domain {
            mean_bounds: vec![(0.0, f64::INFINITY); m],
            sample,
            constraint: Some(SumBelow {
                vars: (0..m).map(ts).collect(),
                limit: 1.0,
            }),
        },
        laplace: None,
        s_char: None,
        param_map: param_map("mv_logarithmic", params, mean),
        aux: BTreeMap::new(),
        chart: Some(Chart {
            vars: (0..m).map(ts).collect(),
            mean: mean_exprs,
            bounds: vec![(0.0, 1.0); m],
        }),
        unverified: true,
        domain_approx: false,
    })
}

fn random_walk(params: &Params) -> Result<FamilySpec, FamilyError> {
    let n = req_positive_int("random_walk", params, "n")?;
    if let Some(&p) = params.get("p") {
        check("random_walk", p > 0.5 && p < 1.0, "need 0.5 < p < 1")?;
        let mean = n / (2.0 * p - 1.0);
        return Ok(FamilySpec {
            name: "random_walk".into(),
            dim: 1,
            mean_vars: vec!["x".into()],
            v: vec![vec![expr("x^3/n^2-x")]],
            domain: univariate_domain(n, f64::INFINITY, 1.05 * n, 6.0 * n),
            laplace: None,
            s_char: None,
            param_map: param_map("random_walk", params, vec![mean]),
            aux: BTreeMap::from([("n".to_string(), n)]),
            chart: None,
            unverified: false,
            domain_approx: false,
        });
    }
    // Multivariate descriptor, as printed (there is no independent
    // cross-check; the printed pmf is corrupted).
    let p = indexed(params, "p");
    let m = p.len();
    check("random_walk", m >= 2, "need p or p1..pm")?;
    check(
        "random_walk",
        p.iter().all(|&v| v > 0.5 && v < 1.0),
        "need 0.5 < p_i < 1",
    )?;
    let mean: Vec<f64> = p.iter().map(|&pi| n / (2.0 * pi - 1.0)).collect();
    let xs = |i: usize| format!("x{}", i + 1);
    let total = (0..m).map(xs).collect::<Vec<_>>().join("+");
    let scale = format!("(2*n/({0})-({0})/n)", total);
    let mut v = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = Vec::with_capacity(m);
        for j in 0..m {
            if i == j {
                row.push(expr(&format!("{0}*(1-{0}/n)*{1}", xs(i), scale)));
            } else {
                row.push(expr(&format!("-{}*{}/n*{}", xs(i), xs(j), scale)));
            }
        }
        v.push(row);
    }
    let mut sample = DomainBox::new();
    for i in 0..m {
        sample = sample.with(xs(i), 1.05 * n, 4.0 * n);
    }
    Ok(FamilySpec {
        name: "random_walk".into(),
        dim: m,
        mean_vars: (0..m).map(xs).collect(),
        v,
        domain: Domain {
            mean_bounds: vec![(n, f64::INFINITY); m],
            sample,
            constraint: None,
        },
        laplace: None,
        s_char: None,
        param_map: param_map("random_walk", params, mean),
        aux: BTreeMap::from([("n".to_string(), n)]),
        chart: None,
        unverified: true,
        domain_approx: false,
    })
}

fn borel_tanner(params: &Params) -> Result<FamilySpec, FamilyError> {
    let n = req_positive_int("borel_tanner", params, "n")?;
    if let Some(&alpha) = params.get("alpha") {
        check("borel_tanner", alpha > 0.0 && alpha < 1.0, "need 0 < alpha < 1")?;
        let mean = n / (1.0 - alpha);
        return Ok(FamilySpec {
            name: "borel_tanner".into(),
            dim: 1,
            mean_vars: vec!["x".into()],
            // n*alpha/(1-alpha)^3 rewritten in the mean
            v: vec![vec![expr("x^2*(x-n)/n^2")]],
            domain: univariate_domain(n, f64::INFINITY, 1.05 * n, 8.0 * n),
            laplace: None,
            s_char: None,
            param_map: param_map("borel_tanner", params, vec![mean]),
            aux: BTreeMap::from([("n".to_string(), n)]),
            chart: None,
            unverified: false,
            domain_approx: false,
        });
    }
    // Multivariate descriptor, as printed up to reading the dangling first
    // index as i (the symmetric reading); the scalar factor is not
    // reproducible from any independent source.
    let alpha = indexed(params, "alpha");
    let m = alpha.len();
    check("borel_tanner", m >= 2, "need alpha or alpha1..alpham")?;
    check(
        "borel_tanner",
        alpha.iter().all(|&a| a > 0.0 && a < 1.0),
        "need 0 < alpha_i < 1",
    )?;
    let mean: Vec<f64> = alpha.iter().map(|&a| n / (1.0 - a)).collect();
    let xs = |i: usize| format!("x{}", i + 1);
    let total = (0..m).map(xs).collect::<Vec<_>>().join("+");
    let scale = format!("(2-(({0})/n-1+n/({0})))", total);
    let mut v = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = Vec::with_capacity(m);
        for j in 0..m {
            if i == j {
                row.push(expr(&format!("{0}*(1-{0}/n*{1})", xs(i), scale)));
            } else {
                row.push(expr(&format!("-{}*{}/n*{}", xs(i), xs(j), scale)));
            }
        }
        v.push(row);
    }
    let mut sample = DomainBox::new();
    for i in 0..m {
        sample = sample.with(xs(i), 1.05 * n, 6.0 * n);
    }
    Ok(FamilySpec {
        name: "borel_tanner".into(),
        dim: m,
        mean_vars: (0..m).map(xs).collect(),
        v,
        domain: Domain {
            mean_bounds: vec![(n, f64::INFINITY); m],
            sample,
            constraint: None,
        },
        laplace: None,
        s_char: None,
        param_map: param_map("borel_tanner", params, mean),
        aux: BTreeMap::from([("n".to_string(), n)]),
        chart: None,
        unverified: true,
        domain_approx: false,
    })
}
