use super::*;
use approx::assert_abs_diff_eq;

fn params(pairs: &[(&str, f64)]) -> Params {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn uni(r: u32) -> MultiIndex {
    MultiIndex(vec![r])
}

#[test]
fn poisson_moments_and_factorial_identity() {
    let m = enumerate_moments("poisson", &params(&[("lambda", 2.0)]), 3, 1e-13).unwrap();
    // E xi(xi-1)(xi-2) = lambda^3 certifies the summation
    let factorial3 = m[&uni(3)] - 3.0 * m[&uni(2)] + 2.0 * m[&uni(1)];
    assert_abs_diff_eq!(factorial3, 8.0, epsilon = 1e-9);
    assert_abs_diff_eq!(m[&uni(1)], 2.0, epsilon = 1e-11);
    assert_abs_diff_eq!(m[&uni(2)], 6.0, epsilon = 1e-11);
    assert_abs_diff_eq!(m[&uni(3)], 22.0, epsilon = 1e-10);
}

#[test]
fn binomial_mean_is_np() {
    let m = enumerate_moments("binomial", &params(&[("n", 5.0), ("p", 0.3)]), 1, 1e-13).unwrap();
    assert_abs_diff_eq!(m[&uni(1)], 1.5, epsilon = 1e-13);
}

#[test]
fn negative_binomial_descriptor_moments() {
    let (n, p) = (3.0, 0.4);
    let m =
        enumerate_moments("negative_binomial", &params(&[("n", n), ("p", p)]), 2, 1e-13).unwrap();
    let mean = n * (1.0 - p) / p;
    let var = n * (1.0 - p) / (p * p);
    assert_abs_diff_eq!(m[&uni(1)], mean, epsilon = 1e-9);
    assert_abs_diff_eq!(m[&uni(2)] - m[&uni(1)].powi(2), var, epsilon = 1e-8);
}

#[test]
fn every_discrete_pmf_sums_to_one() {
    let cases: Vec<(&str, Params)> = vec![
        ("binomial", params(&[("n", 5.0), ("p", 0.3)])),
        ("poisson", params(&[("lambda", 2.0)])),
        ("negative_binomial", params(&[("n", 3.0), ("p", 0.4)])),
        ("logarithmic", params(&[("theta", 0.5)])),
        ("random_walk", params(&[("n", 2.0), ("p", 0.75)])),
        ("borel_tanner", params(&[("n", 2.0), ("alpha", 0.5)])),
        ("multinomial", params(&[("n", 4.0), ("p1", 0.2), ("p2", 0.3)])),
        (
            "negative_multinomial",
            params(&[("n", 3.0), ("p1", 0.2), ("p2", 0.3)]),
        ),
    ];
    for (family, ps) in cases {
        let m = enumerate_moments(family, &ps, 0, 1e-13).unwrap();
        let total = m[&MultiIndex(vec![0; m.keys().next().unwrap().dim()])];
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
    }
}

#[test]
fn borel_tanner_reproduces_descriptor_mean_and_variance() {
    for (n, alpha) in [(1.0, 0.3), (2.0, 0.5)] {
        let m =
            enumerate_moments("borel_tanner", &params(&[("n", n), ("alpha", alpha)]), 2, 1e-13)
                .unwrap();
        let mean = n / (1.0 - alpha);
        let var = n * alpha / (1.0 - alpha).powi(3);
        assert_abs_diff_eq!(m[&uni(1)], mean, epsilon = 1e-8 * (1.0 + mean));
        assert_abs_diff_eq!(
            m[&uni(2)] - m[&uni(1)].powi(2),
            var,
            epsilon = 1e-8 * (1.0 + var)
        );
    }
}

#[test]
fn random_walk_reproduces_descriptor_mean_and_variance() {
    let (n, p) = (1.0, 0.75);
    let m = enumerate_moments("random_walk", &params(&[("n", n), ("p", p)]), 2, 1e-13).unwrap();
    let x = n / (2.0 * p - 1.0);
    assert_abs_diff_eq!(m[&uni(1)], x, epsilon = 1e-9);
    assert_abs_diff_eq!(
        m[&uni(2)] - m[&uni(1)].powi(2),
        x.powi(3) / (n * n) - x,
        epsilon = 1e-8
    );
}

#[test]
fn logarithmic_mean_matches_closed_form() {
    let theta: f64 = 0.5;
    let m = enumerate_moments("logarithmic", &params(&[("theta", theta)]), 1, 1e-14).unwrap();
    let mean = -theta / ((1.0 - theta) * (1.0 - theta).ln());
    assert_abs_diff_eq!(m[&uni(1)], mean, epsilon = 1e-11);
}

#[test]
fn multinomial_mixed_moment() {
    let (n, p1, p2) = (4.0, 0.2, 0.3);
    let m = enumerate_moments("multinomial", &params(&[("n", n), ("p1", p1), ("p2", p2)]), 2, 1e-13)
        .unwrap();
    assert_abs_diff_eq!(m[&MultiIndex(vec![1, 0])], n * p1, epsilon = 1e-12);
    assert_abs_diff_eq!(
        m[&MultiIndex(vec![1, 1])],
        n * (n - 1.0) * p1 * p2,
        epsilon = 1e-12
    );
}

#[test]
fn negative_multinomial_descriptor_covariance() {
    let (n, p1, p2) = (3.0, 0.2, 0.3);
    let m = enumerate_moments(
        "negative_multinomial",
        &params(&[("n", n), ("p1", p1), ("p2", p2)]),
        2,
        1e-13,
    )
    .unwrap();
    // mean_i = n p_i, cov_12 = n p1 p2, var_i = n p_i (1 + p_i)
    assert_abs_diff_eq!(m[&MultiIndex(vec![1, 0])], n * p1, epsilon = 1e-9);
    assert_abs_diff_eq!(m[&MultiIndex(vec![0, 1])], n * p2, epsilon = 1e-9);
    let cov = m[&MultiIndex(vec![1, 1])] - n * p1 * n * p2;
    assert_abs_diff_eq!(cov, n * p1 * p2, epsilon = 1e-8);
    let var1 = m[&MultiIndex(vec![2, 0])] - (n * p1).powi(2);
    assert_abs_diff_eq!(var1, n * p1 * (1.0 + p1), epsilon = 1e-8);
}

#[test]
fn standard_normal_quadrature_moments() {
    let m = quadrature_moments("normal", &params(&[("alpha", 0.0), ("sigma2", 1.0)]), 4).unwrap();
    assert_abs_diff_eq!(m[&uni(1)], 0.0, epsilon = 1e-11);
    assert_abs_diff_eq!(m[&uni(2)], 1.0, epsilon = 1e-10);
    assert_abs_diff_eq!(m[&uni(3)], 0.0, epsilon = 1e-10);
    assert_abs_diff_eq!(m[&uni(4)], 3.0, epsilon = 1e-9);
}

#[test]
fn gamma_quadrature_moments() {
    let m = quadrature_moments("gamma", &params(&[("alpha", 2.0), ("lambda", 3.0)]), 2).unwrap();
    assert_abs_diff_eq!(m[&uni(1)], 1.5, epsilon = 1e-10);
    // exponential with rate 2: second raw moment 2/rate^2 = 0.5
    let e = quadrature_moments("gamma", &params(&[("alpha", 2.0), ("lambda", 1.0)]), 2).unwrap();
    assert_abs_diff_eq!(e[&uni(2)], 0.5, epsilon = 1e-10);
}

#[test]
fn poisson_tail_closed_form() {
    let t = exact_tail("poisson", &params(&[("lambda", 1.0)]), 2.0).unwrap();
    assert_abs_diff_eq!(t, 1.0 - 2.0 * (-1.0f64).exp(), epsilon = 1e-12);
}

#[test]
fn tail_below_support_is_one() {
    let t = exact_tail("poisson", &params(&[("lambda", 2.0)]), 0.0).unwrap();
    assert_abs_diff_eq!(t, 1.0, epsilon = 1e-12);
    let rw = exact_tail("random_walk", &params(&[("n", 2.0), ("p", 0.75)]), 2.0).unwrap();
    assert_abs_diff_eq!(rw, 1.0, epsilon = 1e-12);
}

#[test]
fn binomial_tail_finite_sum() {
    let t = exact_tail("binomial", &params(&[("n", 10.0), ("p", 0.3)]), 6.0).unwrap();
    let mut expected = 0.0;
    for k in 6..=10u32 {
        expected += (ln_choose(10.0, k as f64)
            + k as f64 * 0.3f64.ln()
            + (10 - k) as f64 * 0.7f64.ln())
        .exp();
    }
    assert_abs_diff_eq!(t, expected, epsilon = 1e-13);
}

#[test]
fn gamma_tail_matches_statrs() {
    let (rate, shape, y) = (2.0, 3.0, 2.5);
    let t = exact_tail("gamma", &params(&[("alpha", rate), ("lambda", shape)]), y).unwrap();
    let reference = statrs::function::gamma::gamma_ur(shape, rate * y);
    assert_abs_diff_eq!(t, reference, epsilon = 1e-10);
}

#[test]
fn normal_tail_is_symmetric() {
    let ps = params(&[("alpha", 1.0), ("sigma2", 4.0)]);
    let up = exact_tail("normal", &ps, 2.5).unwrap();
    let down = exact_tail("normal", &ps, -0.5).unwrap();
    assert_abs_diff_eq!(up + down, 1.0, epsilon = 1e-13);
}

#[test]
fn samples_are_deterministic_given_seed() {
    let ps = params(&[("n", 1.0), ("p", 0.75)]);
    let a = mc_sample("random_walk", &ps, 1000, 42).unwrap();
    let b = mc_sample("random_walk", &ps, 1000, 42).unwrap();
    assert_eq!(a, b);
    let c = mc_sample("random_walk", &ps, 1000, 43).unwrap();
    assert_ne!(a, c);
}

fn mean_and_se(sample: &[Vec<f64>]) -> (f64, f64) {
    let n = sample.len() as f64;
    let mean = sample.iter().map(|r| r[0]).sum::<f64>() / n;
    let var = sample.iter().map(|r| (r[0] - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn sampler_means_agree_with_exact_moments() {
    let n = 200_000;
    let cases: Vec<(&str, Params, f64)> = vec![
        ("poisson", params(&[("lambda", 2.0)]), 2.0),
        ("binomial", params(&[("n", 5.0), ("p", 0.3)]), 1.5),
        ("negative_binomial", params(&[("n", 3.0), ("p", 0.4)]), 4.5),
        ("gamma", params(&[("alpha", 2.0), ("lambda", 3.0)]), 1.5),
        ("normal", params(&[("alpha", 0.7), ("sigma2", 2.0)]), 0.7),
        ("random_walk", params(&[("n", 1.0), ("p", 0.75)]), 2.0),
        ("borel_tanner", params(&[("n", 1.0), ("alpha", 0.5)]), 2.0),
        (
            "logarithmic",
            params(&[("theta", 0.5)]),
            -0.5 / (0.5 * 0.5f64.ln()),
        ),
    ];
    for (family, ps, expected) in cases {
        let sample = mc_sample(family, &ps, n, DEFAULT_SEED).unwrap();
        let (mean, se) = mean_and_se(&sample);
        assert!(
            (mean - expected).abs() <= 4.0 * se,
            "{family}: mean {mean} vs expected {expected} (se {se})"
        );
    }
}

#[test]
fn multivariate_sampler_means() {
    let sample = mc_sample(
        "multinomial",
        &params(&[("n", 6.0), ("p1", 0.2), ("p2", 0.3)]),
        100_000,
        7,
    )
    .unwrap();
    let n = sample.len() as f64;
    let mean1 = sample.iter().map(|r| r[0]).sum::<f64>() / n;
    let mean2 = sample.iter().map(|r| r[1]).sum::<f64>() / n;
    assert!((mean1 - 1.2).abs() < 0.02);
    assert!((mean2 - 1.8).abs() < 0.02);

    let nm = mc_sample(
        "negative_multinomial",
        &params(&[("n", 3.0), ("p1", 0.2), ("p2", 0.3)]),
        100_000,
        7,
    )
    .unwrap();
    let m1 = nm.iter().map(|r| r[0]).sum::<f64>() / nm.len() as f64;
    assert!((m1 - 0.6).abs() < 0.03, "negative multinomial mean {m1}");
}

#[test]
fn scores_have_zero_mean_under_exact_enumeration() {
    // sum_k pmf(k) score(k) = 0 certifies the score formulas
    for (family, ps) in [
        ("poisson", params(&[("lambda", 2.0)])),
        ("binomial", params(&[("n", 5.0), ("p", 0.3)])),
    ] {
        let moments = enumerate_moments(family, &ps, 1, 1e-14).unwrap();
        let mean = moments[&uni(1)];
        let _ = mean;
        let (support, finite) = univariate_support(family, &ps).unwrap();
        let mut acc = 0.0;
        let mut cum = 0.0;
        for (count, (k, p)) in support.take(1_000_000).enumerate() {
            acc += p * score_mean(family, &ps, &[k]).unwrap()[0];
            cum += p;
            if let Some(total) = finite {
                if count as u64 + 1 >= total {
                    break;
                }
            } else if 1.0 - cum < 1e-14 {
                break;
            }
        }
        assert_abs_diff_eq!(acc, 0.0, epsilon = 1e-10);
    }
}

#[test]
fn unsupported_families_are_reported() {
    assert!(matches!(
        enumerate_moments("mvnormal", &params(&[("alpha1", 0.0)]), 2, 1e-13),
        Err(OracleError::Unsupported { .. })
    ));
    assert!(matches!(
        mc_sample("random_walk", &params(&[("n", 1.0), ("p1", 0.8), ("p2", 0.7)]), 10, 1),
        Err(OracleError::Unsupported { .. })
    ));
    assert!(matches!(
        quadrature_moments("poisson", &params(&[("lambda", 1.0)]), 2),
        Err(OracleError::Unsupported { .. })
    ));
}

#[test]
fn csv_export_shape() {
    let sample = mc_sample(
        "multinomial",
        &params(&[("n", 4.0), ("p1", 0.2), ("p2", 0.3)]),
        3,
        1,
    )
    .unwrap();
    let csv = sample_to_csv(&sample);
    assert_eq!(csv.lines().count(), 3);
    assert_eq!(csv.lines().next().unwrap().split(',').count(), 2);
}
