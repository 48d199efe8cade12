use super::*;
use crate::expr::Expr;
use approx::assert_abs_diff_eq;

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

#[test]
fn poisson_descriptor() {
    let f = builtin("poisson", &params(&[("lambda", 2.0)])).unwrap();
    assert_eq!(f.mean_point().unwrap(), vec![2.0]);
    assert_eq!(f.v[0][0], Expr::var("x"));
    assert_abs_diff_eq!(f.v_at(&[3.5]).unwrap()[(0, 0)], 3.5);
}

#[test]
fn gamma_descriptor_matches_example() {
    // Gamma(rate alpha=2, shape lambda=3): mean lambda/alpha, V = lambda/alpha^2 = x^2/lambda
    let f = builtin("gamma", &params(&[("alpha", 2.0), ("lambda", 3.0)])).unwrap();
    assert_abs_diff_eq!(f.mean_point().unwrap()[0], 1.5);
    assert_abs_diff_eq!(f.v_at(&[1.5]).unwrap()[(0, 0)], 3.0 / 4.0, epsilon = 1e-15);
}

#[test]
fn random_walk_descriptor_matches_example() {
    let f = builtin("random_walk", &params(&[("n", 3.0), ("p", 0.8)])).unwrap();
    let x = 3.0 / 0.6;
    assert_abs_diff_eq!(f.mean_point().unwrap()[0], x, epsilon = 1e-12);
    // univariate printed form n(2p-1)^{-1}((2p-1)^{-2} - 1)
    let expected = 3.0 / 0.6 * (1.0 / 0.36 - 1.0);
    assert_abs_diff_eq!(f.v_at(&[x]).unwrap()[(0, 0)], expected, epsilon = 1e-12);
}

#[test]
fn borel_tanner_descriptor_matches_example() {
    let f = builtin("borel_tanner", &params(&[("n", 2.0), ("alpha", 0.5)])).unwrap();
    assert_abs_diff_eq!(f.mean_point().unwrap()[0], 4.0);
    // n*alpha/(1-alpha)^3 = 8
    assert_abs_diff_eq!(f.v_at(&[4.0]).unwrap()[(0, 0)], 8.0, epsilon = 1e-12);
}

#[test]
fn binomial_rejects_out_of_range_params() {
    assert!(matches!(
        builtin("binomial", &params(&[("n", 5.0), ("p", 1.2)])),
        Err(FamilyError::ParamOutOfRange { .. })
    ));
    assert!(matches!(
        builtin("binomial", &params(&[("n", 2.5), ("p", 0.3)])),
        Err(FamilyError::ParamOutOfRange { .. })
    ));
    assert!(matches!(
        builtin("nosuch", &params(&[])),
        Err(FamilyError::UnknownFamily { .. })
    ));
}

#[test]
fn verified_builtins_have_symmetric_pd_variance() {
    let cases: Vec<FamilySpec> = vec![
        builtin("binomial", &params(&[("n", 5.0), ("p", 0.3)])).unwrap(),
        builtin("poisson", &params(&[("lambda", 2.0)])).unwrap(),
        builtin("negative_binomial", &params(&[("n", 3.0), ("p", 0.4)])).unwrap(),
        builtin("normal", &params(&[("alpha", 0.0), ("sigma2", 1.0)])).unwrap(),
        builtin("gamma", &params(&[("alpha", 2.0), ("lambda", 3.0)])).unwrap(),
        builtin(
            "mvnormal",
            &params(&[
                ("alpha1", 0.0),
                ("alpha2", 1.0),
                ("sigma11", 1.0),
                ("sigma12", 0.3),
                ("sigma22", 2.0),
            ]),
        )
        .unwrap(),
        builtin("multinomial", &params(&[("n", 6.0), ("p1", 0.2), ("p2", 0.3)])).unwrap(),
        builtin(
            "negative_multinomial",
            &params(&[("n", 3.0), ("p1", 0.2), ("p2", 0.3)]),
        )
        .unwrap(),
        builtin("logarithmic", &params(&[("theta", 0.4)])).unwrap(),
        builtin("random_walk", &params(&[("n", 1.0), ("p", 0.75)])).unwrap(),
        builtin("borel_tanner", &params(&[("n", 1.0), ("alpha", 0.3)])).unwrap(),
    ];
    for f in cases {
        validate_variance(&f).unwrap_or_else(|e| panic!("{}: {}", f.name, e));
    }
}

#[test]
fn every_builtin_with_laplace_passes_eq1() {
    let cases: Vec<FamilySpec> = vec![
        builtin("binomial", &params(&[("n", 5.0), ("p", 0.3)])).unwrap(),
        builtin("poisson", &params(&[("lambda", 2.0)])).unwrap(),
        builtin("negative_binomial", &params(&[("n", 3.0), ("p", 0.4)])).unwrap(),
        builtin("normal", &params(&[("alpha", 1.0), ("sigma2", 2.0)])).unwrap(),
        builtin("gamma", &params(&[("alpha", 2.0), ("lambda", 3.0)])).unwrap(),
        builtin(
            "mvnormal",
            &params(&[
                ("alpha1", 0.0),
                ("alpha2", 1.0),
                ("sigma11", 1.0),
                ("sigma12", 0.3),
                ("sigma22", 2.0),
            ]),
        )
        .unwrap(),
        builtin("multinomial", &params(&[("n", 6.0), ("p1", 0.2), ("p2", 0.3)])).unwrap(),
        builtin(
            "negative_multinomial",
            &params(&[("n", 3.0), ("p1", 0.2), ("p2", 0.3)]),
        )
        .unwrap(),
    ];
    for f in cases {
        let report = verify_eq1(&f, &GridSpec::default(), 1e-8)
            .unwrap_or_else(|e| panic!("{}: {}", f.name, e));
        assert!(
            report.pass,
            "{}: max residual {} exceeds 1e-8",
            f.name, report.max_abs
        );
    }
}

#[test]
fn poisson_eq1_residual_is_tiny_on_canonical_grid() {
    let f = builtin("poisson", &params(&[("lambda", 2.0)])).unwrap();
    let grid = GridSpec {
        x_box: Some(DomainBox::new().with("x", 0.5, 4.0)),
        ..GridSpec::default()
    };
    let report = verify_eq1(&f, &grid, 1e-10).unwrap();
    assert_eq!(report.grid.len(), 25);
    assert!(report.pass, "max_abs = {}", report.max_abs);
}

#[test]
fn normal_eq1_residual_is_tiny() {
    let f = builtin("normal", &params(&[("alpha", 1.0), ("sigma2", 1.0)])).unwrap();
    let grid = GridSpec {
        x_box: Some(DomainBox::new().with("x", 0.5, 4.0)),
        ..GridSpec::default()
    };
    let report = verify_eq1(&f, &grid, 1e-10).unwrap();
    assert!(report.pass, "max_abs = {}", report.max_abs);
}

#[test]
fn corrupted_variance_fails_eq1() {
    // Poisson transform with V deliberately shifted to x + 0.1:
    // the residual is 0.1 * d(phi)/dx != 0.
    let mut f = builtin("poisson", &params(&[("lambda", 2.0)])).unwrap();
    f.v = vec![vec![crate::expr::parse("x+0.1").unwrap()]];
    let grid = GridSpec {
        x_box: Some(DomainBox::new().with("x", 0.5, 4.0)),
        ..GridSpec::default()
    };
    let report = verify_eq1(&f, &grid, 1e-8).unwrap();
    assert!(!report.pass);
    assert!(report.max_abs > 0.01, "max_abs = {}", report.max_abs);
}

#[test]
fn verify_requires_laplace() {
    let f = builtin("random_walk", &params(&[("n", 1.0), ("p", 0.75)])).unwrap();
    assert!(matches!(
        verify_eq1(&f, &GridSpec::default(), 1e-8),
        Err(FamilyError::LaplaceAbsent { .. })
    ));
}

#[test]
fn from_variance_accepts_binomial_shape() {
    let domain = Domain {
        mean_bounds: vec![(0.0, 5.0)],
        sample: DomainBox::new().with("x", 0.25, 4.75).with("n", 5.0, 5.0),
        constraint: None,
    };
    let f = from_variance(
        &[vec!["x*(1-x/n)".to_string()]],
        &["x".to_string()],
        domain,
    )
    .unwrap();
    assert_eq!(f.dim, 1);
    assert!(f.laplace.is_none() && f.s_char.is_none());
}

#[test]
fn from_variance_two_dim_diagonal_poissons_satisfy_eq1() {
    // V = diag(x1, x2) is the product-of-Poissons variance; attach the
    // product transform phi = exp(sum x_i (e^{-z_i} - 1)) and verify.
    let domain = Domain {
        mean_bounds: vec![(0.0, f64::INFINITY), (0.0, f64::INFINITY)],
        sample: DomainBox::new().with("x1", 0.5, 4.0).with("x2", 0.5, 4.0),
        constraint: None,
    };
    let mut f = from_variance(
        &[
            vec!["x1".to_string(), "0".to_string()],
            vec!["0".to_string(), "x2".to_string()],
        ],
        &["x1".to_string(), "x2".to_string()],
        domain,
    )
    .unwrap();
    f.laplace = Some(crate::expr::parse("exp(x1*(exp(-z1)-1)+x2*(exp(-z2)-1))").unwrap());
    let report = verify_eq1(&f, &GridSpec::default(), 1e-8).unwrap();
    assert!(report.pass, "max_abs = {}", report.max_abs);
}

#[test]
fn from_variance_rejects_negative_definite() {
    let domain = Domain {
        mean_bounds: vec![(0.0, 10.0)],
        sample: DomainBox::new().with("x", 0.5, 9.5),
        constraint: None,
    };
    let err = from_variance(&[vec!["-x".to_string()]], &["x".to_string()], domain).unwrap_err();
    assert!(matches!(err, FamilyError::NotPositiveDefinite { .. }));
}

#[test]
fn from_variance_rejects_asymmetry() {
    let domain = Domain {
        mean_bounds: vec![(0.0, 10.0), (0.0, 10.0)],
        sample: DomainBox::new().with("x1", 0.5, 9.5).with("x2", 0.5, 9.5),
        constraint: None,
    };
    let err = from_variance(
        &[
            vec!["x1".to_string(), "x1*x2".to_string()],
            vec!["x2*x1+0.1".to_string(), "x2".to_string()],
        ],
        &["x1".to_string(), "x2".to_string()],
        domain,
    )
    .unwrap_err();
    assert!(matches!(err, FamilyError::Asymmetric { .. }));
}

#[test]
fn definition_json_round_trip() {
    let json = r#"{
        "name": "binomial_shape",
        "dim": 1,
        "mean_vars": ["x"],
        "V": [["x*(1-x/n)"]],
        "domain": {"x": [0.25, 4.75], "n": [5.0, 5.0]}
    }"#;
    let f = from_definition_json(json).unwrap();
    assert_eq!(f.name, "binomial_shape");
    assert_eq!(f.dim, 1);
}

#[test]
fn s_characteristic_poisson_log_integral() {
    let f = builtin("poisson", &params(&[("lambda", 1.0)])).unwrap();
    let s = s_characteristic_numeric(&f, 1.0, std::f64::consts::E).unwrap();
    assert_abs_diff_eq!(s, -1.0, epsilon = 1e-10);
}

#[test]
fn s_characteristic_at_reference_is_zero() {
    let f = builtin("gamma", &params(&[("alpha", 2.0), ("lambda", 3.0)])).unwrap();
    assert_eq!(s_characteristic_numeric(&f, 1.5, 1.5).unwrap(), 0.0);
}

#[test]
fn s_characteristic_normal_constant_variance() {
    let f = builtin("normal", &params(&[("alpha", 0.0), ("sigma2", 2.0)])).unwrap();
    let s = s_characteristic_numeric(&f, 0.0, 1.0).unwrap();
    assert_abs_diff_eq!(s, -0.5, epsilon = 1e-10);
}

#[test]
fn s_characteristic_is_antitone() {
    let f = builtin("binomial", &params(&[("n", 5.0), ("p", 0.3)])).unwrap();
    let xs = [0.5, 1.0, 2.0, 3.0, 4.0];
    let values: Vec<f64> = xs
        .iter()
        .map(|&x| s_characteristic_numeric(&f, 1.5, x).unwrap())
        .collect();
    for w in values.windows(2) {
        assert!(w[0] > w[1], "s must decrease: {:?}", values);
    }
}

#[test]
fn s_characteristic_rejects_out_of_domain_interval() {
    let f = builtin("random_walk", &params(&[("n", 2.0), ("p", 0.75)])).unwrap();
    // domain is x > n = 2
    assert!(matches!(
        s_characteristic_numeric(&f, 1.0, 3.0),
        Err(FamilyError::OutsideDomain { .. })
    ));
}

#[test]
fn laplace_eval_examples() {
    let poisson = builtin("poisson", &params(&[("lambda", 3.0)])).unwrap();
    assert_abs_diff_eq!(laplace_eval(&poisson, &[0.0], &[3.0]).unwrap(), 1.0);

    let normal = builtin("normal", &params(&[("alpha", 0.0), ("sigma2", 1.0)])).unwrap();
    assert_abs_diff_eq!(
        laplace_eval(&normal, &[1.0], &[0.0]).unwrap(),
        0.5f64.exp(),
        epsilon = 1e-15
    );

    // exponential = Gamma(rate 1, shape 1): phi(1) = 1/2
    let exponential = builtin("gamma", &params(&[("alpha", 1.0), ("lambda", 1.0)])).unwrap();
    assert_abs_diff_eq!(
        laplace_eval(&exponential, &[1.0], &[1.0]).unwrap(),
        0.5,
        epsilon = 1e-15
    );

    let rw = builtin("random_walk", &params(&[("n", 1.0), ("p", 0.75)])).unwrap();
    assert!(matches!(
        laplace_eval(&rw, &[0.0], &[2.0]),
        Err(FamilyError::LaplaceAbsent { .. })
    ));
}

#[test]
fn multinomial_row_sums() {
    // sum_j v_ij = n p_i (1 - |p|) at the constructed mean
    let n = 6.0;
    let (p1, p2) = (0.2, 0.3);
    let f = builtin("multinomial", &params(&[("n", n), ("p1", p1), ("p2", p2)])).unwrap();
    let v = f.v_at(&[n * p1, n * p2]).unwrap();
    let tail = 1.0 - p1 - p2;
    assert_abs_diff_eq!(v[(0, 0)] + v[(0, 1)], n * p1 * tail, epsilon = 1e-12);
    assert_abs_diff_eq!(v[(1, 0)] + v[(1, 1)], n * p2 * tail, epsilon = 1e-12);
}

#[test]
fn logarithmic_chart_inverts_and_matches_variance() {
    let theta: f64 = 0.5;
    let f = builtin("logarithmic", &params(&[("theta", theta)])).unwrap();
    let mean = f.mean_point().unwrap()[0];
    let l = (1.0 - theta).ln();
    assert_abs_diff_eq!(mean, -theta / ((1.0 - theta) * l), epsilon = 1e-12);
    // v_at inverts the chart back to theta and evaluates V(theta)
    let v = f.v_at(&[mean]).unwrap()[(0, 0)];
    let expected = -theta / ((1.0 - theta).powi(2) * l) * (1.0 + theta / l);
    assert_abs_diff_eq!(v, expected, epsilon = 1e-9);
}

#[test]
fn multivariate_descriptors_are_flagged_unverified() {
    let rw = builtin("random_walk", &params(&[("n", 2.0), ("p1", 0.8), ("p2", 0.7)])).unwrap();
    assert!(rw.unverified);
    assert_eq!(rw.dim, 2);
    let bt = builtin(
        "borel_tanner",
        &params(&[("n", 2.0), ("alpha1", 0.3), ("alpha2", 0.5)]),
    )
    .unwrap();
    assert!(bt.unverified);
    let ml = builtin("mv_logarithmic", &params(&[("theta1", 0.2), ("theta2", 0.3)])).unwrap();
    assert!(ml.unverified);
    // descriptors still evaluate
    assert!(ml.v[0][1].eval(&params(&[("theta1", 0.2), ("theta2", 0.3)])).is_ok());
}

#[test]
fn descriptor_serializes() {
    let f = builtin("poisson", &params(&[("lambda", 2.0)])).unwrap();
    let json = serde_json::to_value(f.descriptor()).unwrap();
    assert_eq!(json["name"], "poisson");
    assert_eq!(json["v"][0][0], "x");
    assert_eq!(json["laplace"], "exp(x*(exp(-z)-1))");
}
