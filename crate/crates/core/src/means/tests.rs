use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::precision::Real;

fn rv(values: &[f64], prec: u32) -> Vec<Real> {
    values.iter().map(|&v| Real::from_f64(v, prec)).collect()
}

fn assert_close(a: &Real, b: &Real, tol_log2: i64) {
    let diff = (a - b).abs();
    let scale = {
        let m = a.abs();
        if m > 1.0 {
            m
        } else {
            Real::one(a.prec())
        }
    };
    let bound = scale * Real::exp2i(tol_log2, 64);
    assert!(
        diff <= bound,
        "difference {} exceeds 2^{} between {} and {}",
        diff.to_decimal(Some(8)),
        tol_log2,
        a.to_decimal(Some(30)),
        b.to_decimal(Some(30))
    );
}

fn random_positive_vectors(n: usize, p: usize, prec: u32, seed: u64) -> Vec<Vec<Real>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            (0..p)
                .map(|_| Real::from_f64(rng.gen_range(0.1..10.0), prec))
                .collect()
        })
        .collect()
}

mod interval {
    use super::*;

    #[test]
    fn construction_and_membership() {
        let i = Interval::new(0.0, 2.0).unwrap();
        assert!(i.contains(&Real::from_f64(1.0, 64)));
        assert!(!i.contains(&Real::from_f64(0.0, 64))); // open
        assert!(!i.contains(&Real::from_f64(2.5, 64)));
        assert!(Interval::new(1.0, 1.0).is_err());
        assert!(Interval::new(f64::NAN, 1.0).is_err());
        assert!(Interval::whole().contains(&Real::from_f64(-1e300, 64)));
    }

    #[test]
    fn intersection() {
        let a = Interval::new(0.0, 5.0).unwrap();
        let b = Interval::new(2.0, 10.0).unwrap();
        let c = a.intersect(&b).unwrap();
        assert_eq!((c.lo(), c.hi()), (2.0, 5.0));
        assert!(a.intersect(&Interval::new(7.0, 8.0).unwrap()).is_err());
    }

    #[test]
    fn probe_grids_stay_interior() {
        for iv in [
            Interval::new(-1.0, 1.0).unwrap(),
            Interval::positive(),
            Interval::whole(),
            Interval::new(f64::NEG_INFINITY, 3.0).unwrap(),
        ] {
            let grid = iv.probe_grid(64, 128);
            assert_eq!(grid.len(), 64);
            for p in &grid {
                assert!(iv.contains(p), "{} escaped {iv}", p.to_decimal(Some(6)));
            }
        }
    }

    #[test]
    fn boundary_distance() {
        let i = Interval::new(0.0, 4.0).unwrap();
        let d = i.distance_to_boundary(&Real::from_f64(1.0, 64)).unwrap();
        assert_eq!(d, 1.0);
        assert!(Interval::whole()
            .distance_to_boundary(&Real::from_f64(1.0, 64))
            .is_none());
    }
}

mod evaluation {
    use super::*;

    #[test]
    fn gini_2_1_closed_form() {
        // (1 + 4 + 9) / (1 + 2 + 3)
        let m = eval_mean(&MeanSpec::gini(2.0, 1.0).unwrap(), &rv(&[1.0, 2.0, 3.0], 256)).unwrap();
        let expected = Real::from_f64(14.0, 256) / Real::from_f64(6.0, 256);
        assert_close(&m, &expected, -250);
    }

    #[test]
    fn gini_0_0_is_cube_root_of_product() {
        let m = eval_mean(&MeanSpec::gini(0.0, 0.0).unwrap(), &rv(&[1.0, 2.0, 3.0], 256)).unwrap();
        let expected = Real::from_f64(6.0, 256)
            .pow(&(Real::one(256) / Real::from_f64(3.0, 256)))
            .unwrap();
        assert_close(&m, &expected, -250);
    }

    #[test]
    fn reflexivity_is_exact() {
        let c = Real::from_f64(2.75, 256);
        let specs = all_test_specs();
        for spec in &specs {
            let m = eval_mean(spec, &[c.clone(), c.clone(), c.clone()]).unwrap();
            assert_eq!(m, c, "reflexivity failed for {}", spec.name());
        }
    }

    #[test]
    fn arithmetic_is_exact_on_integers() {
        let m = eval_mean(&MeanSpec::arithmetic(), &rv(&[1.0, 2.0, 3.0], 128)).unwrap();
        assert_eq!(m, 2.0);
    }

    #[test]
    fn power_zero_matches_geometric() {
        let x = rv(&[1.0, 4.0], 256);
        let p0 = eval_mean(&MeanSpec::power(0.0).unwrap(), &x).unwrap();
        let ge = eval_mean(&MeanSpec::geometric(), &x).unwrap();
        assert_eq!(p0, ge);
        assert_close(&p0, &Real::from_f64(2.0, 256), -250);
    }

    #[test]
    fn qa_log_is_geometric() {
        let x = rv(&[0.5, 3.0, 7.0], 256);
        let qa = MeanSpec::quasi_arithmetic(GeneratorFunction::log()).unwrap();
        let a = eval_mean(&qa, &x).unwrap();
        let b = eval_mean(&MeanSpec::geometric(), &x).unwrap();
        assert_close(&a, &b, -220);
    }

    #[test]
    fn qa_exp_matches_log_sum_exp() {
        let x = rv(&[0.25, 1.5, 2.0], 256);
        let qa = MeanSpec::quasi_arithmetic(GeneratorFunction::exp()).unwrap();
        let got = eval_mean(&qa, &x).unwrap();
        // direct formula: ln((e^x1 + e^x2 + e^x3)/3)
        let sum = x[0].exp() + x[1].exp() + x[2].exp();
        let expected = (sum / Real::from_f64(3.0, 256)).ln().unwrap();
        assert_close(&got, &expected, -220);
    }

    #[test]
    fn gini_parameter_symmetry() {
        for x in random_positive_vectors(10, 3, 256, 7) {
            let ab = eval_mean(&MeanSpec::gini(2.0, -1.0).unwrap(), &x).unwrap();
            let ba = eval_mean(&MeanSpec::gini(-1.0, 2.0).unwrap(), &x).unwrap();
            assert_close(&ab, &ba, -240);
        }
    }

    #[test]
    fn gini_alpha_zero_matches_qa_power() {
        for alpha in [-1.0, 0.5, 2.0] {
            let qa =
                MeanSpec::quasi_arithmetic(GeneratorFunction::power(alpha).unwrap()).unwrap();
            for x in random_positive_vectors(5, 4, 256, 11) {
                let g = eval_mean(&MeanSpec::gini(alpha, 0.0).unwrap(), &x).unwrap();
                let q = eval_mean(&qa, &x).unwrap();
                assert_close(&g, &q, -200);
            }
        }
    }

    #[test]
    fn strictness_on_nonconstant_input() {
        let x = rv(&[1.0, 2.0, 4.0], 256);
        let lo = Real::from_f64(1.0, 256);
        let hi = Real::from_f64(4.0, 256);
        for spec in all_test_specs() {
            let m = eval_mean(&spec, &x).unwrap();
            assert!(m > lo && m < hi, "{} not strict: {}", spec.name(), m);
        }
    }

    #[test]
    fn bajraktarevic_x2_x_is_gini_2_1() {
        let spec = MeanSpec::bajraktarevic(
            GeneratorFunction::power(2.0).unwrap(),
            GeneratorFunction::identity(),
        )
        .unwrap();
        for x in random_positive_vectors(10, 3, 256, 13) {
            let b = eval_mean(&spec, &x).unwrap();
            let g = eval_mean(&MeanSpec::gini(2.0, 1.0).unwrap(), &x).unwrap();
            assert_close(&b, &g, -200);
        }
    }

    #[test]
    fn quasideviation_difference_log_is_geometric() {
        let dev = DeviationFunction::difference(&GeneratorFunction::log()).unwrap();
        let spec = MeanSpec::quasideviation(dev);
        let x = rv(&[1.0, 4.0], 256);
        let m = eval_mean(&spec, &x).unwrap();
        assert_close(&m, &Real::from_f64(2.0, 256), -200);
    }

    #[test]
    fn domain_and_arity_errors() {
        assert!(matches!(
            eval_mean(&MeanSpec::geometric(), &rv(&[-1.0, 2.0], 128)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            eval_mean(&MeanSpec::arithmetic(), &[]),
            Err(Error::InvalidArity(0))
        ));
    }

    #[test]
    fn mixed_precision_uses_maximum() {
        let x = vec![Real::from_f64(1.0, 128), Real::from_f64(2.0, 1024)];
        let m = eval_mean(&MeanSpec::arithmetic(), &x).unwrap();
        assert_eq!(m.prec(), 1024);
    }

    /// One representative instance of each family.
    fn all_test_specs() -> Vec<MeanSpec> {
        vec![
            MeanSpec::arithmetic(),
            MeanSpec::geometric(),
            MeanSpec::power(3.0).unwrap(),
            MeanSpec::gini(2.0, 1.0).unwrap(),
            MeanSpec::gini(1.0, -1.0).unwrap(),
            MeanSpec::quasi_arithmetic(GeneratorFunction::log()).unwrap(),
            MeanSpec::bajraktarevic(
                GeneratorFunction::power(2.0).unwrap(),
                GeneratorFunction::identity(),
            )
            .unwrap(),
            MeanSpec::quasideviation(
                DeviationFunction::difference(&GeneratorFunction::log()).unwrap(),
            ),
        ]
    }
}

mod solving {
    use super::*;

    #[test]
    fn invert_log_at_zero() {
        let one = qa_invert(
            &GeneratorFunction::log(),
            &Real::zero(256),
            &Real::from_f64(0.5, 256),
            &Real::from_f64(2.0, 256),
        )
        .unwrap();
        assert_close(&one, &Real::one(256), -220);
    }

    #[test]
    fn invert_square_at_four() {
        let two = qa_invert(
            &GeneratorFunction::power(2.0).unwrap(),
            &Real::from_f64(4.0, 256),
            &Real::from_f64(1.0, 256),
            &Real::from_f64(3.0, 256),
        )
        .unwrap();
        assert_close(&two, &Real::from_f64(2.0, 256), -220);
    }

    #[test]
    fn invert_exp_matches_bisection_oracle() {
        let gen = GeneratorFunction::exp();
        let y = Real::one(256).exp(); // e
        let lo = Real::from_f64(0.5, 256);
        let hi = Real::from_f64(2.0, 256);
        let fast = qa_invert(&gen, &y, &lo, &hi).unwrap();

        // Plain bisection using only gen.eval, no derivative, no shortcuts.
        let (mut a, mut b) = (lo, hi);
        let floor = Real::exp2i(-200, 256);
        while (&b - &a) > floor {
            let mid = (&a + &b) / 2u32;
            if gen.eval(&mid).unwrap() < y {
                a = mid;
            } else {
                b = mid;
            }
        }
        let oracle = (&a + &b) / 2u32;
        assert_close(&fast, &oracle, -190);
        assert_close(&fast, &Real::one(256), -190);
    }

    #[test]
    fn invert_rejects_bad_bracket() {
        let e = qa_invert(
            &GeneratorFunction::log(),
            &Real::from_f64(5.0, 128),
            &Real::from_f64(0.5, 128),
            &Real::from_f64(2.0, 128),
        );
        assert!(matches!(e, Err(Error::NonBracketing(_))));
    }

    #[test]
    fn qd_constant_vector() {
        let dev = DeviationFunction::linear();
        let c = Real::from_f64(3.25, 128);
        let u = qd_solve(&dev, &[c.clone(), c.clone()]).unwrap();
        assert_eq!(u, c);
    }

    #[test]
    fn qd_linear_is_arithmetic() {
        let u = qd_solve(&DeviationFunction::linear(), &rv(&[1.0, 2.0, 3.0], 256)).unwrap();
        assert_close(&u, &Real::from_f64(2.0, 256), -220);
    }

    #[test]
    fn qd_log_difference_is_geometric() {
        let dev = DeviationFunction::difference(&GeneratorFunction::log()).unwrap();
        let u = qd_solve(&dev, &rv(&[1.0, 4.0], 256)).unwrap();
        assert_close(&u, &Real::from_f64(2.0, 256), -220);
    }

    #[test]
    fn qd_result_is_strictly_inside() {
        let dev = DeviationFunction::bajraktarevic(
            &GeneratorFunction::power(2.0).unwrap(),
            &GeneratorFunction::identity(),
        )
        .unwrap();
        let x = rv(&[0.5, 0.5, 9.0], 256);
        let u = qd_solve(&dev, &x).unwrap();
        assert!(u > Real::from_f64(0.5, 64) && u < Real::from_f64(9.0, 64));
    }

    #[test]
    fn qd_flags_sign_violation() {
        // E(x,u) = u - x has the wrong orientation; constructing it as a
        // DeviationFunction already fails the (D1) grid check, so feed the
        // solver a handcrafted one through the linear deviation reversed
        // via negative inputs is not possible — instead check the
        // constructor rejection itself.
        let bad = DeviationFunction::new(
            "reversed",
            Interval::whole(),
            |x, u| Ok(u - x),
            |x, u| Ok(-Real::one(x.prec().max(u.prec()))),
            |x, u| Ok(Real::zero(x.prec().max(u.prec()))),
        );
        assert!(matches!(bad, Err(Error::DeviationAxiom { .. })));
    }
}

mod construction {
    use super::*;

    #[test]
    fn non_monotone_claim_is_rejected() {
        let bad = GeneratorFunction::new(
            "x^2 on R",
            Interval::whole(),
            |x| Ok(x * x),
            |x| Ok(x * 2u32),
            |x| Ok(Real::from_f64(2.0, x.prec())),
            true,
        );
        assert!(matches!(bad, Err(Error::GeneratorAxiom { .. })));
    }

    #[test]
    fn power_zero_is_rejected() {
        assert!(GeneratorFunction::power(0.0).is_err());
    }

    #[test]
    fn qa_requires_monotone_generator() {
        assert!(matches!(
            MeanSpec::quasi_arithmetic(GeneratorFunction::xlogx()),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn bajraktarevic_requires_increasing_ratio() {
        // f/g = 1/x is strictly decreasing on (0, ∞).
        let e = MeanSpec::bajraktarevic(
            GeneratorFunction::identity(),
            GeneratorFunction::power(2.0).unwrap(),
        );
        assert!(matches!(e, Err(Error::GeneratorAxiom { .. })));
    }

    #[test]
    fn bajraktarevic_requires_positive_weight() {
        // g = x on the whole line takes negative values; restrict f's
        // domain to force the shared grid across zero.
        let f = GeneratorFunction::exp();
        let g = GeneratorFunction::identity();
        let e = MeanSpec::bajraktarevic(f, g);
        assert!(matches!(e, Err(Error::GeneratorAxiom { .. })));
    }

    #[test]
    fn xlogx_is_gini_1_1_as_bajraktarevic_numerator() {
        // f = x log x, g = x gives f/g = log x, so B_{f,g} = G_{1,1}.
        let spec =
            MeanSpec::bajraktarevic(GeneratorFunction::xlogx(), GeneratorFunction::identity())
                .unwrap();
        for x in random_positive_vectors(5, 3, 256, 17) {
            let b = eval_mean(&spec, &x).unwrap();
            let g = eval_mean(&MeanSpec::gini(1.0, 1.0).unwrap(), &x).unwrap();
            assert_close(&b, &g, -200);
        }
    }
}

mod axioms {
    use super::*;

    #[test]
    fn gini_is_clean_on_random_vectors() {
        let spec = MeanSpec::gini(2.0, 1.0).unwrap();
        let samples = random_positive_vectors(100, 3, 256, 23);
        let report = probe_mean_axioms(&spec, &samples).unwrap();
        assert!(report.is_clean(), "violations: {:?}", report.violations);
        assert!(report.checks_run >= 100 * 9);
    }

    #[test]
    fn qa_and_quasideviation_are_clean() {
        let samples = random_positive_vectors(20, 4, 256, 29);
        for spec in [
            MeanSpec::quasi_arithmetic(GeneratorFunction::log()).unwrap(),
            MeanSpec::quasideviation(
                DeviationFunction::difference(&GeneratorFunction::power(3.0).unwrap()).unwrap(),
            ),
        ] {
            let report = probe_mean_axioms(&spec, &samples).unwrap();
            assert!(
                report.is_clean(),
                "{}: {:?}",
                spec.name(),
                report.violations
            );
        }
    }

    #[test]
    fn broken_mean_is_flagged() {
        struct MaxPlusOne;
        impl Mean for MaxPlusOne {
            fn eval(&self, x: &[Real]) -> crate::error::Result<Real> {
                Ok(Real::max_of(x) + &Real::one(64))
            }
            fn domain(&self) -> Interval {
                Interval::whole()
            }
        }
        let report =
            probe_mean_axioms(&MaxPlusOne, &[rv(&[1.0, 2.0, 3.0], 128)]).unwrap();
        assert!(report
            .violations
            .iter()
            .any(|v| v.axiom == "mean-property"));
    }

    #[test]
    fn asymmetric_mean_is_flagged() {
        struct FirstCoordinate;
        impl Mean for FirstCoordinate {
            fn eval(&self, x: &[Real]) -> crate::error::Result<Real> {
                Ok(x[0].clone())
            }
            fn domain(&self) -> Interval {
                Interval::whole()
            }
        }
        let report =
            probe_mean_axioms(&FirstCoordinate, &[rv(&[1.0, 2.0, 3.0], 128)]).unwrap();
        assert!(report.violations.iter().any(|v| v.axiom == "symmetry"));
    }

    #[test]
    fn gini_repetition_invariance_directly() {
        let spec = MeanSpec::gini(1.0, -1.0).unwrap();
        let short = rv(&[1.5, 4.0], 256);
        let long = rv(&[1.5, 1.5, 4.0, 4.0], 256);
        let a = eval_mean(&spec, &short).unwrap();
        let b = eval_mean(&spec, &long).unwrap();
        assert_close(&a, &b, -240);
    }
}
