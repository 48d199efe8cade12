use super::*;
use crate::expr::{equiv_numeric, parse, DomainBox};
use crate::families::{builtin, verify_eq1, GridSpec};
use crate::moments::{cumulants, evaluate_table, MultiIndex};
use approx::assert_abs_diff_eq;

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn box_with_aux(f: &FamilySpec, ranges: &[(&str, f64, f64)]) -> DomainBox {
    let mut b = DomainBox::new();
    for (name, lo, hi) in ranges {
        b = b.with(*name, *lo, *hi);
    }
    for (k, v) in &f.aux {
        b.ranges.entry(k.clone()).or_insert((*v, *v));
    }
    b
}

#[test]
fn identity_transform_preserves_variance() {
    let f = builtin("multinomial", &params(&[("n", 6.0), ("p1", 0.2), ("p2", 0.3)])).unwrap();
    let id = affine(&f, &[vec![1.0, 0.0], vec![0.0, 1.0]], &[0.0, 0.0]).unwrap();
    let domain = box_with_aux(&f, &[("x1", 0.2, 2.0), ("x2", 0.2, 2.0)]);
    for i in 0..2 {
        for j in 0..2 {
            assert!(equiv_numeric(&id.v[i][j], &f.v[i][j], &domain, 32, 1e-9).unwrap());
        }
    }
}

#[test]
fn univariate_normal_affine_image() {
    // c*xi + d ~ B(c*alpha + d; c^2 sigma2)
    let f = builtin("normal", &params(&[("alpha", 1.0), ("sigma2", 2.0)])).unwrap();
    let (c, d) = (3.0, -1.0);
    let g = affine(&f, &[vec![c]], &[d]).unwrap();
    let v = g.v_at(&[c * 1.0 + d]).unwrap()[(0, 0)];
    assert_abs_diff_eq!(v, c * c * 2.0, epsilon = 1e-12);
}

#[test]
fn binomial_affine_image_satisfies_eq1() {
    // 2*xi + 1: mean 2np + 1, V_eta(y) = 4 V((y-1)/2); the transformed
    // Laplace transform must still satisfy the defining equation.
    let f = builtin("binomial", &params(&[("n", 5.0), ("p", 0.3)])).unwrap();
    let g = affine(&f, &[vec![2.0]], &[1.0]).unwrap();

    let expected = parse("4*((y-1)/2*(1-(y-1)/2/n))")
        .unwrap()
        .subst(&BTreeMap::from([("y".to_string(), crate::expr::Expr::var("x"))]));
    let domain = box_with_aux(&g, &[("x", 1.5, 10.0)]);
    assert!(equiv_numeric(&g.v[0][0], &expected, &domain, 32, 1e-9).unwrap());

    let report = verify_eq1(&g, &GridSpec::default(), 1e-8).unwrap();
    assert!(report.pass, "max_abs = {}", report.max_abs);
}

#[test]
fn affine_rejects_singular_matrix() {
    let f = builtin("mvnormal", &params(&[
        ("alpha1", 0.0),
        ("alpha2", 0.0),
        ("sigma11", 1.0),
        ("sigma12", 0.0),
        ("sigma22", 1.0),
    ]))
    .unwrap();
    let err = affine(&f, &[vec![1.0, 2.0], vec![2.0, 4.0]], &[0.0, 0.0]).unwrap_err();
    assert!(matches!(err, TransformError::SingularMatrix { .. }));
}

#[test]
fn poisson_convolution_is_poisson() {
    let f = builtin("poisson", &params(&[("lambda", 2.0)])).unwrap();
    let g = convolve_iid(&f, 3).unwrap();
    // n V(y/n) = 3 (y/3) = y
    let domain = DomainBox::new().with("x", 0.5, 10.0);
    assert!(equiv_numeric(&g.v[0][0], &parse("x").unwrap(), &domain, 32, 1e-12).unwrap());
    let report = verify_eq1(&g, &GridSpec::default(), 1e-8).unwrap();
    assert!(report.pass);
}

#[test]
fn bernoulli_convolution_gives_binomial_variance() {
    let one = builtin("binomial", &params(&[("n", 1.0), ("p", 0.3)])).unwrap();
    let summed = convolve_iid(&one, 5).unwrap();
    let five = builtin("binomial", &params(&[("n", 5.0), ("p", 0.3)])).unwrap();
    // summed still carries aux n = 1 (the inner Bernoulli), so pin both
    let mut domain = DomainBox::new().with("x", 0.3, 4.7);
    domain.ranges.insert("n".into(), (1.0, 1.0));
    let five_v = five.v[0][0]
        .subst(&BTreeMap::from([(
            "n".to_string(),
            crate::expr::Expr::int(5),
        )]));
    assert!(equiv_numeric(&summed.v[0][0], &five_v, &domain, 32, 1e-9).unwrap());
}

#[test]
fn convolve_one_is_identity() {
    let f = builtin("gamma", &params(&[("alpha", 2.0), ("lambda", 3.0)])).unwrap();
    let g = convolve_iid(&f, 1).unwrap();
    let domain = box_with_aux(&f, &[("x", 0.3, 4.0)]);
    assert!(equiv_numeric(&g.v[0][0], &f.v[0][0], &domain, 32, 1e-12).unwrap());
    assert!(convolve_iid(&f, 0).is_err());
}

#[test]
fn cumulant_additivity_under_convolution() {
    // cumulants of the n-fold sum at y = n x0 equal n * cumulants at x0
    for (name, ps, x0) in [
        ("poisson", params(&[("lambda", 2.0)]), 2.0),
        ("binomial", params(&[("n", 5.0), ("p", 0.3)]), 1.5),
    ] {
        let f = builtin(name, &ps).unwrap();
        let base = cumulants(&f, 6).unwrap();
        let base_vals = evaluate_table(&base, &BTreeMap::from([("x".to_string(), x0)])).unwrap();
        for n in [2u32, 5] {
            let g = convolve_iid(&f, n).unwrap();
            let sum = cumulants(&g, 6).unwrap();
            let sum_vals =
                evaluate_table(&sum, &BTreeMap::from([("x".to_string(), n as f64 * x0)]))
                    .unwrap();
            for k in 1..=6u32 {
                let idx = MultiIndex(vec![k]);
                let expected = n as f64 * base_vals[&idx];
                assert_abs_diff_eq!(
                    sum_vals[&idx],
                    expected,
                    epsilon = 1e-9 * (1.0 + expected.abs())
                );
            }
        }
    }
}

#[test]
fn sample_mean_scales_variance_and_cumulants() {
    let f = builtin("poisson", &params(&[("lambda", 2.0)])).unwrap();
    let g = sample_mean(&f, 4).unwrap();
    let domain = DomainBox::new().with("x", 0.5, 8.0);
    assert!(equiv_numeric(&g.v[0][0], &parse("x/4").unwrap(), &domain, 32, 1e-12).unwrap());

    // cumulants of the mean: s_k = lambda * n^{1-k}
    let table = cumulants(&g, 5).unwrap();
    let values = evaluate_table(&table, &BTreeMap::from([("x".to_string(), 2.0)])).unwrap();
    for k in 1..=5u32 {
        let expected = 2.0 * 4.0f64.powi(1 - k as i32);
        assert_abs_diff_eq!(
            values[&MultiIndex(vec![k])],
            expected,
            epsilon = 1e-12 * (1.0 + expected)
        );
    }
}

#[test]
fn sample_mean_equals_scaled_convolution() {
    let f = builtin("gamma", &params(&[("alpha", 2.0), ("lambda", 3.0)])).unwrap();
    let n = 4u32;
    let direct = sample_mean(&f, n).unwrap();
    let composed = affine(&convolve_iid(&f, n).unwrap(), &[vec![1.0 / n as f64]], &[0.0]).unwrap();
    let domain = box_with_aux(&f, &[("x", 0.3, 4.0)]);
    assert!(equiv_numeric(&direct.v[0][0], &composed.v[0][0], &domain, 32, 1e-9).unwrap());
}

#[test]
fn affine_round_trip_restores_variance() {
    let f = builtin("multinomial", &params(&[("n", 6.0), ("p1", 0.2), ("p2", 0.3)])).unwrap();
    let a = vec![vec![1.0, 0.3], vec![-0.2, 1.1]];
    let b = vec![0.5, -0.25];
    let g = affine(&f, &a, &b).unwrap();
    // inverse map: A^{-1}, -A^{-1} b
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let inv = vec![
        vec![a[1][1] / det, -a[0][1] / det],
        vec![-a[1][0] / det, a[0][0] / det],
    ];
    let b_inv = vec![
        -(inv[0][0] * b[0] + inv[0][1] * b[1]),
        -(inv[1][0] * b[0] + inv[1][1] * b[1]),
    ];
    let back = affine(&g, &inv, &b_inv).unwrap();
    let domain = box_with_aux(&f, &[("x1", 0.3, 2.0), ("x2", 0.3, 2.0)]);
    for i in 0..2 {
        for j in 0..2 {
            assert!(
                equiv_numeric(&back.v[i][j], &f.v[i][j], &domain, 32, 1e-9).unwrap(),
                "entry ({i},{j}) did not survive the round trip"
            );
        }
    }
}

#[test]
fn affine_covariance_matches_conjugation() {
    // central-moment table of the image at y = Ax + b vs A V(x) A'
    let f = builtin("mvnormal", &params(&[
        ("alpha1", 0.5),
        ("alpha2", -0.3),
        ("sigma11", 1.0),
        ("sigma12", 0.4),
        ("sigma22", 2.0),
    ]))
    .unwrap();
    let a = vec![vec![1.2, -0.5], vec![0.3, 0.9]];
    let b = vec![1.0, 0.0];
    let g = affine(&f, &a, &b).unwrap();
    let x0 = [0.5, -0.3];
    let y0 = [
        a[0][0] * x0[0] + a[0][1] * x0[1] + b[0],
        a[1][0] * x0[0] + a[1][1] * x0[1] + b[1],
    ];
    let table = crate::moments::central_moments(&g, 2).unwrap();
    let values = evaluate_table(
        &table,
        &BTreeMap::from([("x1".to_string(), y0[0]), ("x2".to_string(), y0[1])]),
    )
    .unwrap();
    let expected = conjugate_variance(&f, &a, &x0).unwrap();
    assert_abs_diff_eq!(values[&MultiIndex(vec![2, 0])], expected[(0, 0)], epsilon = 1e-10);
    assert_abs_diff_eq!(values[&MultiIndex(vec![1, 1])], expected[(0, 1)], epsilon = 1e-10);
    assert_abs_diff_eq!(values[&MultiIndex(vec![0, 2])], expected[(1, 1)], epsilon = 1e-10);
}

#[test]
fn transformed_mean_seed_is_exact() {
    // a_{e_i} of the transformed family is the mean variable itself
    let f = builtin("poisson", &params(&[("lambda", 2.0)])).unwrap();
    let g = convolve_iid(&f, 3).unwrap();
    let raw = crate::moments::raw_moments(&g, 1).unwrap();
    assert_eq!(
        raw.entries[&MultiIndex(vec![1])],
        crate::expr::Expr::var("x")
    );
}

#[test]
fn chart_family_transforms() {
    let f = builtin("logarithmic", &params(&[("theta", 0.5)])).unwrap();
    let mean = f.mean_point().unwrap()[0];

    let g = convolve_iid(&f, 3).unwrap();
    let v3 = g.v_at(&[3.0 * mean]).unwrap()[(0, 0)];
    let v1 = f.v_at(&[mean]).unwrap()[(0, 0)];
    assert_abs_diff_eq!(v3, 3.0 * v1, epsilon = 1e-9);

    let h = affine(&f, &[vec![2.0]], &[1.0]).unwrap();
    let vh = h.v_at(&[2.0 * mean + 1.0]).unwrap()[(0, 0)];
    assert_abs_diff_eq!(vh, 4.0 * v1, epsilon = 1e-9);
}
