use proptest::prelude::*;

use qso::dissipativity::{necessary_conditions, COEF_TOL};
use qso::dynamics::{
    cesaro, classify_fixed_point, iterate, lyapunov_phi, CesaroOptions, SPECTRAL_TOL,
};
use qso::operators::{
    from_volterra_matrix, gallery, roster, validate, volterra_form, CsoTensor, OperatorSpec,
    Params, QsoTensor,
};
use qso::simplex::{compare_majorization, decreasing_rearrangement, SimplexPoint, EPS_CMP};

fn point(m: usize) -> impl Strategy<Value = SimplexPoint> {
    prop::collection::vec(0.0f64..1.0, m).prop_filter_map("zero mass", |w| {
        let s: f64 = w.iter().sum();
        (s > 1e-9).then(|| SimplexPoint::new(w.iter().map(|v| v / s).collect()).unwrap())
    })
}

fn sized_point() -> impl Strategy<Value = SimplexPoint> {
    (2usize..=6).prop_flat_map(point)
}

fn permutation(m: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..m).collect::<Vec<_>>()).prop_shuffle()
}

fn rows(m: usize, n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(point(m).prop_map(SimplexPoint::into_coords), n)
}

/// Random stochastic operator of degree 2 or 3 with `m ≤ 5` species.
fn random_operator() -> impl Strategy<Value = OperatorSpec> {
    (2usize..=5, any::<bool>()).prop_flat_map(|(m, cubic)| {
        let reps = if cubic { m * (m + 1) * (m + 2) / 6 } else { m * (m + 1) / 2 };
        rows(m, reps).prop_map(move |rs| {
            let mut next = 0;
            let mut take = |k: usize| {
                let v = rs[next][k];
                if k + 1 == rs[next].len() {
                    next += 1;
                }
                v
            };
            if cubic {
                OperatorSpec::cubic("random", CsoTensor::from_fn(m, |_, k| take(k)))
            } else {
                OperatorSpec::quadratic("random", QsoTensor::from_fn(m, |_, k| take(k)))
            }
        })
    })
}

fn gallery_operator() -> impl Strategy<Value = OperatorSpec> {
    prop::sample::select(roster().iter().map(|g| g.name).collect::<Vec<_>>())
        .prop_map(|name| gallery(name, &Params::new()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn rearrangement_is_sorted_permutation(x in sized_point()) {
        let r = decreasing_rearrangement(&x);
        prop_assert!(r.windows(2).all(|w| w[0] >= w[1]));
        let mut a = x.coords().to_vec();
        a.sort_by(|p, q| q.total_cmp(p));
        prop_assert_eq!(a, r);
    }

    #[test]
    fn barycenter_below_and_vertex_above(x in sized_point()) {
        let m = x.dim();
        let lo = compare_majorization(&x, &SimplexPoint::barycenter(m).unwrap(), EPS_CMP).unwrap();
        let hi = compare_majorization(&SimplexPoint::vertex(m, 0).unwrap(), &x, EPS_CMP).unwrap();
        prop_assert!(lo.majorizes() && lo.min_slack_forward >= -1e-12);
        prop_assert!(hi.majorizes() && hi.min_slack_forward >= -1e-12);
    }

    #[test]
    fn comparison_is_antisymmetric((x, y) in (2usize..=6).prop_flat_map(|m| (point(m), point(m)))) {
        let a = compare_majorization(&x, &y, EPS_CMP).unwrap();
        let b = compare_majorization(&y, &x, EPS_CMP).unwrap();
        prop_assert_eq!(a.majorizes(), b.majorized_by());
        prop_assert_eq!(a.min_slack_forward, b.min_slack_backward);
    }

    #[test]
    fn majorization_is_transitive(
        (x, y, z) in (2usize..=5).prop_flat_map(|m| (point(m), point(m), point(m)))
    ) {
        let xy = compare_majorization(&x, &y, 0.0).unwrap();
        let yz = compare_majorization(&y, &z, 0.0).unwrap();
        if xy.majorizes() && yz.majorizes() {
            prop_assert!(compare_majorization(&x, &z, 1e-15).unwrap().majorizes());
        }
    }

    #[test]
    fn comparison_ignores_order_of_coordinates(
        (x, y, p) in (2usize..=6).prop_flat_map(|m| (point(m), point(m), permutation(m)))
    ) {
        let a = compare_majorization(&x, &y, EPS_CMP).unwrap();
        let b = compare_majorization(&x.permuted(&p), &y, EPS_CMP).unwrap();
        prop_assert_eq!(a.relation, b.relation);
    }

    #[test]
    fn apply_stays_on_simplex((op, seed) in (random_operator(), any::<u64>())) {
        use rand::SeedableRng;
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let x = qso::simplex::sample_uniform(op.dim(), &mut r).unwrap();
        let (y, defect) = op.apply_with_defect(&x).unwrap();
        prop_assert!(defect <= 1e-13);
        prop_assert!(y.coords().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn relabeling_commutes_with_apply(
        (op, perm, x) in random_operator().prop_flat_map(|op| {
            let m = op.dim();
            (Just(op), permutation(m), point(m))
        })
    ) {
        let lhs = op.permuted(&perm).apply(&x.permuted(&perm)).unwrap();
        let rhs = op.apply(&x).unwrap().permuted(&perm);
        prop_assert!(lhs.dist_inf(&rhs) <= 1e-14);
    }

    #[test]
    fn jacobian_matches_central_differences(
        (op, x) in random_operator().prop_flat_map(|op| { let m = op.dim(); (Just(op), point(m)) })
    ) {
        let m = op.dim();
        let j = op.jacobian(&x).unwrap();
        let h = 1e-6;
        let (mut fp, mut fm) = (vec![0.0; m], vec![0.0; m]);
        for i in 0..m {
            let mut xp = x.coords().to_vec();
            let mut xm = x.coords().to_vec();
            xp[i] += h;
            xm[i] -= h;
            op.apply_raw(&xp, &mut fp);
            op.apply_raw(&xm, &mut fm);
            for k in 0..m {
                prop_assert!((j[(k, i)] - (fp[k] - fm[k]) / (2.0 * h)).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn export_then_validate_is_lossless(op in random_operator()) {
        let back = validate(&op.to_raw()).unwrap();
        prop_assert_eq!(back.tensor, op.tensor);
    }

    #[test]
    fn volterra_matrix_round_trips(
        upper in (2usize..=5).prop_flat_map(|m| prop::collection::vec(-1.0f64..=1.0, m * (m - 1) / 2).prop_map(move |v| (m, v)))
    ) {
        let (m, v) = upper;
        let mut a = vec![vec![0.0; m]; m];
        let mut it = v.into_iter();
        for i in 0..m {
            for j in i + 1..m {
                let x = it.next().unwrap();
                a[i][j] = x;
                a[j][i] = -x;
            }
        }
        let f = volterra_form(&from_volterra_matrix(&a).unwrap(), COEF_TOL);
        prop_assert!(f.is_volterra && f.skew_symmetric);
        for i in 0..m {
            for j in 0..m {
                prop_assert!((f.a[i][j] - a[i][j]).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn dissipative_volterra_is_identity(
        upper in (2usize..=5).prop_flat_map(|m| {
            let cell = prop_oneof![3 => Just(0.0f64), 2 => -1.0f64..=1.0];
            prop::collection::vec(cell, m * (m - 1) / 2).prop_map(move |v| (m, v))
        })
    ) {
        let (m, v) = upper;
        let mut a = vec![vec![0.0; m]; m];
        let mut it = v.into_iter();
        for i in 0..m {
            for j in i + 1..m {
                let x = it.next().unwrap();
                a[i][j] = x;
                a[j][i] = -x;
            }
        }
        let op = OperatorSpec::quadratic("volterra", from_volterra_matrix(&a).unwrap());
        if necessary_conditions(&op, COEF_TOL).overall {
            let f = volterra_form(op.as_quadratic().unwrap(), COEF_TOL);
            prop_assert!(f.a.iter().flatten().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn spectrum_is_invariant_under_relabeling(
        (lam, perm) in (0.0f64..=1.0, permutation(4))
    ) {
        let op = gallery("form8-instance", &Params::new()).unwrap();
        let x = SimplexPoint::mix(&SimplexPoint::vertex(4, 0).unwrap(), &SimplexPoint::vertex(4, 1).unwrap(), lam).unwrap();
        let a = classify_fixed_point(&op, &x, SPECTRAL_TOL).unwrap();
        let b = classify_fixed_point(&op.permuted(&perm), &x.permuted(&perm), SPECTRAL_TOL).unwrap();
        prop_assert_eq!(a.classification, b.classification);
        for (p, q) in a.restricted_eigenvalues.iter().zip(&b.restricted_eigenvalues) {
            prop_assert!((p - q).abs() <= 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn cesaro_means_stay_on_simplex((op, x) in gallery_operator().prop_flat_map(|op| { let m = op.dim(); (Just(op), point(m)) })) {
        let r = cesaro(&op, &x, &CesaroOptions::new(2000)).unwrap();
        for (_, mean) in &r.partial_means {
            let s: f64 = mean.coords().iter().sum();
            prop_assert!((s - 1.0).abs() <= 1e-12);
            prop_assert!(mean.coords().iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn form8_orbits_feed_the_first_two_species(x in point(4)) {
        let op = gallery("form8-instance", &Params::new()).unwrap();
        let t = iterate(&op, &x, 200).unwrap();
        for w in t.points.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            prop_assert!(lyapunov_phi(b, &[0, 1]) <= lyapunov_phi(a, &[0, 1]) + EPS_CMP);
            let s = |p: &SimplexPoint| p.coords()[0] + p.coords()[1];
            prop_assert!(s(b) >= s(a) - EPS_CMP);
        }
    }
}
