use super::*;
use crate::means::{DeviationFunction, GeneratorFunction, Interval, MeanSpec};

fn r(v: f64, prec: u32) -> Real {
    Real::from_f64(v, prec)
}

/// |a − expected| ≤ tol · max(|expected|, 1).
fn assert_rel(a: &Real, expected: &Real, tol: f64) {
    let diff = (a - expected).abs();
    let scale = {
        let m = expected.abs();
        if m > 1.0 {
            m
        } else {
            Real::one(expected.prec())
        }
    };
    let bound = scale * Real::from_f64(tol, 64);
    assert!(
        diff <= bound,
        "got {}, expected {} (diff {}, tol {tol})",
        a.to_decimal(Some(30)),
        expected.to_decimal(Some(30)),
        diff.to_decimal(Some(6))
    );
}

fn log_spaced_radii(hi_exp10: f64, lo_exp10: f64, n: usize, prec: u32) -> Vec<Real> {
    (0..n)
        .map(|k| {
            let e = hi_exp10 + (lo_exp10 - hi_exp10) * k as f64 / (n - 1) as f64;
            r(10f64.powf(e), prec)
        })
        .collect()
}

/// Representative instances of every built-in family.
fn representative_specs() -> Vec<MeanSpec> {
    vec![
        MeanSpec::arithmetic(),
        MeanSpec::geometric(),
        MeanSpec::power(3.0).unwrap(),
        MeanSpec::gini(2.0, 1.0).unwrap(),
        MeanSpec::gini(1.0, -1.0).unwrap(),
        MeanSpec::quasi_arithmetic(GeneratorFunction::log()).unwrap(),
        MeanSpec::quasi_arithmetic(GeneratorFunction::exp()).unwrap(),
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

mod analytic {
    use super::*;

    #[test]
    fn gini_family_formula() {
        for x in [0.5, 1.0, 3.0] {
            let xr = r(x, 256);
            let got = residuum_analytic(&MeanSpec::gini(2.0, 1.0).unwrap(), &xr).unwrap();
            assert_rel(&got.value, &(&r(2.0, 256) / &xr), 1e-60);
            let geo = residuum_analytic(&MeanSpec::gini(0.0, 0.0).unwrap(), &xr).unwrap();
            assert_rel(&geo.value, &(&r(-1.0, 256) / &xr), 1e-60);
        }
        assert_eq!(
            residuum_analytic(&MeanSpec::arithmetic(), &r(7.0, 128))
                .unwrap()
                .value,
            0.0
        );
    }

    #[test]
    fn geometric_and_power_match_their_gini_parameters() {
        let x = r(2.0, 256);
        let geo = residuum_analytic(&MeanSpec::geometric(), &x).unwrap();
        assert_rel(&geo.value, &r(-0.5, 256), 1e-60);
        let p3 = residuum_analytic(&MeanSpec::power(3.0).unwrap(), &x).unwrap();
        assert_rel(&p3.value, &r(1.0, 256), 1e-60); // (3 − 1)/2
    }

    #[test]
    fn quasiarithmetic_is_f2_over_f1() {
        let qa_log = MeanSpec::quasi_arithmetic(GeneratorFunction::log()).unwrap();
        let got = residuum_analytic(&qa_log, &r(2.0, 256)).unwrap();
        assert_rel(&got.value, &r(-0.5, 256), 1e-60);

        let qa_exp = MeanSpec::quasi_arithmetic(GeneratorFunction::exp()).unwrap();
        let one = residuum_analytic(&qa_exp, &r(0.7, 256)).unwrap();
        assert_rel(&one.value, &r(1.0, 256), 1e-60);
    }

    #[test]
    fn bajraktarevic_residuum_is_phi() {
        let spec = MeanSpec::bajraktarevic(
            GeneratorFunction::power(2.0).unwrap(),
            GeneratorFunction::identity(),
        )
        .unwrap();
        for x in [0.5, 1.0, 3.0] {
            let xr = r(x, 256);
            let got = residuum_analytic(&spec, &xr).unwrap();
            assert_rel(&got.value, &(&r(2.0, 256) / &xr), 1e-60);
        }
    }

    #[test]
    fn quasideviation_difference_log() {
        let spec = MeanSpec::quasideviation(
            DeviationFunction::difference(&GeneratorFunction::log()).unwrap(),
        );
        let got = residuum_analytic(&spec, &r(2.0, 512)).unwrap();
        assert_rel(&got.value, &r(-0.5, 512), 1e-50);
    }

    #[test]
    fn estimate_reports_analytic_method() {
        let e = residuum_analytic(&MeanSpec::gini(2.0, 1.0).unwrap(), &r(1.0, 256)).unwrap();
        assert_eq!(e.method, Method::Analytic);
        assert_eq!(e.p_used, 2);
        assert!(!e.uncertainty.is_negative());
    }

    #[test]
    fn outside_domain_is_rejected() {
        let e = residuum_analytic(&MeanSpec::geometric(), &r(-1.0, 128));
        assert!(matches!(e, Err(Error::Domain(_))));
    }
}

mod invariants {
    use super::*;

    #[test]
    fn trivial_pair_for_arithmetic_generators() {
        // f = x, g = 1: all second derivatives vanish.
        let (phi, psi) = bajraktarevic_invariants(
            &GeneratorFunction::identity(),
            &GeneratorFunction::constant(1.0),
            &r(1.7, 256),
        )
        .unwrap();
        assert!(phi.is_zero());
        assert!(psi.is_zero());
    }

    #[test]
    fn gini_2_1_pair_at_one() {
        let (phi, psi) = bajraktarevic_invariants(
            &GeneratorFunction::power(2.0).unwrap(),
            &GeneratorFunction::identity(),
            &r(1.0, 256),
        )
        .unwrap();
        // (g·f″ − f·g″)/(g·f′ − f·g′) = 2x/x² and (g′f″ − f′g″)/(x²) = 2/x².
        assert_rel(&phi, &r(2.0, 256), 1e-60);
        assert_rel(&psi, &r(2.0, 256), 1e-60);
    }

    #[test]
    fn vanishing_denominator_is_flagged() {
        // f = g makes gf′ − fg′ ≡ 0.
        let sq = GeneratorFunction::power(2.0).unwrap();
        let e = bajraktarevic_invariants(&sq, &sq, &r(1.5, 256));
        assert!(matches!(e, Err(Error::ZeroDenominator { .. })));
    }
}

mod limit {
    use super::*;

    #[test]
    fn arithmetic_limit_is_zero() {
        for p in [2usize, 3] {
            let e = residuum_limit(&MeanSpec::arithmetic(), p, &r(1.3, 1024)).unwrap();
            assert!(
                e.value.abs() <= e.uncertainty,
                "nonzero arithmetic residuum {}",
                e.value.to_decimal(Some(8))
            );
            assert_eq!(e.p_used, p);
            assert_eq!(e.method, Method::LimitExtrapolation);
        }
    }

    #[test]
    fn gini_2_1_at_one() {
        let e = residuum_limit(&MeanSpec::gini(2.0, 1.0).unwrap(), 3, &r(1.0, 1024)).unwrap();
        assert_rel(&e.value, &r(2.0, 1024), 1e-8);
    }

    #[test]
    fn qa_log_at_two() {
        let qa = MeanSpec::quasi_arithmetic(GeneratorFunction::log()).unwrap();
        let e = residuum_limit(&qa, 2, &r(2.0, 1024)).unwrap();
        assert_rel(&e.value, &r(-0.5, 1024), 1e-8);
    }

    #[test]
    fn arity_below_two_is_rejected() {
        let e = residuum_limit(&MeanSpec::arithmetic(), 1, &r(1.0, 256));
        assert!(matches!(e, Err(Error::InvalidArity(1))));
    }

    #[test]
    fn non_smooth_mean_diverges() {
        // E(x,u) = s + s²·[s > 0] with s = x−u is C¹ but not C². The
        // one-sided quadratic shifts the induced mean by t²/8 − t³/16 on
        // both sides of the diagonal, so the symmetrized series picks up
        // an odd O(t) term that the t²-based extrapolation cannot remove.
        let dev = DeviationFunction::new(
            "kinked",
            Interval::whole(),
            |x, u| {
                let s = x - u;
                if s.is_positive() {
                    Ok(&s + &(&s * &s))
                } else {
                    Ok(s)
                }
            },
            |x, u| {
                let s = x - u;
                if s.is_positive() {
                    Ok(Real::one(s.prec()) + (&s * 2u32))
                } else {
                    Ok(Real::one(s.prec()))
                }
            },
            |x, u| {
                let s = x - u;
                let v = if s.is_positive() { 2 } else { 0 };
                Ok(Real::from_i64(v, s.prec()))
            },
        )
        .unwrap();
        let spec = MeanSpec::quasideviation(dev);
        let e = residuum_limit(&spec, 2, &r(1.0, 512));
        assert!(
            matches!(e, Err(Error::ExtrapolationDiverged { .. })),
            "expected divergence, got {e:?}"
        );
    }
}

mod hessian {
    use super::*;

    #[test]
    fn arithmetic_hessian_is_zero() {
        let (mixed, pure) = residuum_hessian(&MeanSpec::arithmetic(), 2, &r(1.5, 512)).unwrap();
        assert!(mixed.value.abs() <= &mixed.uncertainty * 10u32);
        assert!(pure.value.abs() <= &pure.uncertainty * 10u32);
    }

    #[test]
    fn gini_1_m1_at_one() {
        let spec = MeanSpec::gini(1.0, -1.0).unwrap();
        let (mixed, pure) = residuum_hessian(&spec, 2, &r(1.0, 1024)).unwrap();
        assert_rel(&mixed.value, &r(-1.0, 1024), 1e-8);
        assert_rel(&pure.value, &r(-1.0, 1024), 1e-8);
    }

    #[test]
    fn forms_agree_for_gini_2_1_across_arities() {
        let spec = MeanSpec::gini(2.0, 1.0).unwrap();
        let x = r(3.0, 1024);
        for p in [2usize, 3, 4] {
            let (mixed, pure) = residuum_hessian(&spec, p, &x).unwrap();
            let diff = (&mixed.value - &pure.value).abs();
            let scale = {
                let m = pure.value.abs();
                if m > 1.0 {
                    m
                } else {
                    Real::one(1024)
                }
            };
            assert!(
                diff <= scale * Real::from_f64(1e-6, 64),
                "p={p}: forms differ by {}",
                diff.to_decimal(Some(8))
            );
        }
    }
}

mod agreement {
    use super::*;

    #[test]
    fn all_estimators_agree_on_every_family() {
        for spec in representative_specs() {
            for xv in [0.5, 3.0] {
                let x = r(xv, 512);
                let analytic = residuum_analytic(&spec, &x).unwrap();
                for p in [2usize, 3] {
                    let lim = residuum_limit(&spec, p, &x).unwrap();
                    let budget = (&analytic.uncertainty + &lim.uncertainty) * 10u32;
                    let diff = (&analytic.value - &lim.value).abs();
                    assert!(
                        diff <= budget,
                        "{} at x={xv}, p={p}: analytic/limit differ by {} (budget {})",
                        spec.name(),
                        diff.to_decimal(Some(8)),
                        budget.to_decimal(Some(8))
                    );
                    let (mixed, pure) = residuum_hessian(&spec, p, &x).unwrap();
                    for h in [&mixed, &pure] {
                        let budget = (&analytic.uncertainty + &h.uncertainty) * 10u32;
                        let diff = (&analytic.value - &h.value).abs();
                        assert!(
                            diff <= budget,
                            "{} at x={xv}, p={p}: analytic/hessian differ by {}",
                            spec.name(),
                            diff.to_decimal(Some(8))
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn gini_scale_covariance() {
        // ξ(x)·x is constant in x: α + β − 1.
        let spec = MeanSpec::gini(2.0, 1.0).unwrap();
        for xv in [0.5, 1.0, 3.0] {
            let x = r(xv, 1024);
            let e = residuum_limit(&spec, 2, &x).unwrap();
            assert_rel(&(&e.value * &x), &r(2.0, 1024), 1e-8);
        }
    }

    #[test]
    fn lemma_expansion_reproduces_xi_var() {
        // (M(x·1 + t·s) − x − t·𝔼s)/(t²/2) → ξ_M(x)·Var(s), checked by
        // symmetrized extrapolation in t.
        let w = 512;
        let spec = MeanSpec::gini(2.0, 1.0).unwrap();
        let x = r(1.7, w);
        let s = [r(0.3, w), r(-0.8, w), r(0.5, w)];
        let p = Real::from_usize(3, w);
        let mean_s = Real::sum(&s) / &p;
        let mut var = Real::zero(w);
        for si in &s {
            let c = si - &mean_s;
            var = var + &c * &c;
        }
        var = var / &p;

        let t0 = r(0.01, w);
        let mut series = Vec::new();
        for k in 0..9 {
            let t = &t0 * &Real::exp2i(-k, w);
            let plus: Vec<Real> = s.iter().map(|si| &x + &(si * &t)).collect();
            let minus: Vec<Real> = s.iter().map(|si| &x - &(si * &t)).collect();
            let m_plus = crate::means::eval_mean(&spec, &plus).unwrap();
            let m_minus = crate::means::eval_mean(&spec, &minus).unwrap();
            series.push((m_plus + m_minus - &x * 2u32) / (&t * &t));
        }
        let (value, _err) = richardson_h2(&series);
        let xi = residuum_analytic(&spec, &x).unwrap().value;
        assert_rel(&value, &(&xi * &var), 1e-6);
    }
}

mod probe {
    use super::*;

    #[test]
    fn arithmetic_expansion_is_exact() {
        let radii = log_spaced_radii(-1.0, -4.0, 7, 512);
        let report =
            residuality_probe(&MeanSpec::arithmetic(), 3, &r(1.0, 512), &radii).unwrap();
        assert!(report.exact);
        assert!(!report.fitted_exponent.is_finite());
        assert_eq!(report.directions_used, 18);
    }

    #[test]
    fn gini_2_1_shows_cubic_defect() {
        let radii = log_spaced_radii(-1.0, -4.0, 7, 512);
        let report =
            residuality_probe(&MeanSpec::gini(2.0, 1.0).unwrap(), 3, &r(1.0, 512), &radii)
                .unwrap();
        assert!(!report.exact);
        let alpha = report.fitted_exponent.to_f64();
        assert!((2.8..=3.2).contains(&alpha), "fitted exponent {alpha}");
        assert!(report.fitted_scale.is_positive());
    }

    #[test]
    fn qa_exp_at_p2_decays_faster_than_cubic() {
        // With two entries every perturbation has zero third central
        // moment, so the cubic term vanishes and the defect is O(r⁴).
        let radii = log_spaced_radii(-1.0, -4.0, 7, 512);
        let qa = MeanSpec::quasi_arithmetic(GeneratorFunction::exp()).unwrap();
        let report = residuality_probe(&qa, 2, &r(0.0, 512), &radii).unwrap();
        let alpha = report.fitted_exponent.to_f64();
        assert!(alpha >= 3.5, "expected the p=2 probe to see the quartic defect, got {alpha}");
    }

    #[test]
    fn qa_exp_at_p3_is_cubic() {
        let radii = log_spaced_radii(-1.0, -4.0, 7, 512);
        let qa = MeanSpec::quasi_arithmetic(GeneratorFunction::exp()).unwrap();
        let report = residuality_probe(&qa, 3, &r(0.0, 512), &radii).unwrap();
        let alpha = report.fitted_exponent.to_f64();
        assert!((2.5..=3.5).contains(&alpha), "fitted exponent {alpha}");
    }

    #[test]
    fn schedule_validation() {
        let x = r(1.0, 256);
        let spec = MeanSpec::gini(2.0, 1.0).unwrap();
        let too_few = log_spaced_radii(-1.0, -4.0, 5, 256);
        assert!(matches!(
            residuality_probe(&spec, 2, &x, &too_few),
            Err(Error::InvalidConfig(_))
        ));
        let mut increasing = log_spaced_radii(-1.0, -4.0, 7, 256);
        increasing.reverse();
        assert!(matches!(
            residuality_probe(&spec, 2, &x, &increasing),
            Err(Error::InvalidConfig(_))
        ));
        let narrow = log_spaced_radii(-1.0, -2.0, 7, 256);
        assert!(matches!(
            residuality_probe(&spec, 2, &x, &narrow),
            Err(Error::InvalidConfig(_))
        ));
        // Radius 0.5 touches the boundary of (0, ∞) around x = 0.5.
        let wide = log_spaced_radii(-0.2, -4.0, 8, 256);
        assert!(matches!(
            residuality_probe(&spec, 2, &r(0.5, 256), &wide),
            Err(Error::Domain(_))
        ));
    }
}

mod p_independence {
    use super::*;

    #[test]
    fn gini_2_1_across_arities() {
        let report = p_independence_check(
            &MeanSpec::gini(2.0, 1.0).unwrap(),
            &r(1.0, 1024),
            &[2, 3, 5],
        )
        .unwrap();
        assert!(report.all_within_uncertainty);
        assert!(report.max_pairwise_difference < Real::from_f64(1e-8, 64));
        for e in &report.estimates {
            assert_rel(&e.value, &r(2.0, 1024), 1e-8);
        }
    }

    #[test]
    fn qa_log_across_arities() {
        let qa = MeanSpec::quasi_arithmetic(GeneratorFunction::log()).unwrap();
        let report = p_independence_check(&qa, &r(2.0, 1024), &[2, 4]).unwrap();
        assert!(report.all_within_uncertainty);
        assert!(report.max_pairwise_difference < Real::from_f64(1e-8, 64));
    }

    #[test]
    fn arithmetic_differences_vanish() {
        let report =
            p_independence_check(&MeanSpec::arithmetic(), &r(5.0, 512), &[2, 3]).unwrap();
        assert!(report.max_pairwise_difference < Real::from_f64(1e-30, 64));
    }

    #[test]
    fn needs_two_arities() {
        let e = p_independence_check(&MeanSpec::arithmetic(), &r(1.0, 256), &[3]);
        assert!(matches!(e, Err(Error::InvalidConfig(_))));
    }
}

mod diagonal_identities {
    use super::*;

    #[test]
    fn catalog_deviations_pass() {
        let catalog: Vec<DeviationFunction> = vec![
            DeviationFunction::linear(),
            DeviationFunction::difference(&GeneratorFunction::log()).unwrap(),
            DeviationFunction::difference(&GeneratorFunction::power(3.0).unwrap()).unwrap(),
            DeviationFunction::bajraktarevic(
                &GeneratorFunction::power(2.0).unwrap(),
                &GeneratorFunction::identity(),
            )
            .unwrap(),
            DeviationFunction::bajraktarevic(
                &GeneratorFunction::xlogx(),
                &GeneratorFunction::identity(),
            )
            .unwrap(),
        ];
        for dev in &catalog {
            for x in [0.5, 1.0, 3.0] {
                check_diagonal_identities(dev, &r(x, 1024)).unwrap_or_else(|e| {
                    panic!("{} failed at x={x}: {e}", dev.name());
                });
            }
        }
    }

    #[test]
    fn inconsistent_first_partial_is_flagged() {
        // E = x − u but the provided ∂₁E is twice the true one.
        let dev = DeviationFunction::new(
            "bad-d1",
            Interval::whole(),
            |x, u| Ok(x - u),
            |x, u| Ok(Real::from_f64(2.0, x.prec().max(u.prec()))),
            |x, u| Ok(Real::zero(x.prec().max(u.prec()))),
        )
        .unwrap();
        let e = check_diagonal_identities(&dev, &r(1.0, 256));
        assert!(matches!(e, Err(Error::DiagonalIdentity { which: 1, .. })));
    }

    #[test]
    fn inconsistent_second_partial_is_flagged() {
        let dev = DeviationFunction::new(
            "bad-d11",
            Interval::whole(),
            |x, u| Ok(x - u),
            |x, u| Ok(Real::one(x.prec().max(u.prec()))),
            |x, u| Ok(Real::from_f64(5.0, x.prec().max(u.prec()))),
        )
        .unwrap();
        let e = check_diagonal_identities(&dev, &r(1.0, 256));
        assert!(matches!(e, Err(Error::DiagonalIdentity { which: 2, .. })));
        // The analytic residuum runs the same check first.
        let spec = MeanSpec::quasideviation(dev);
        assert!(matches!(
            residuum_analytic(&spec, &r(1.0, 256)),
            Err(Error::DiagonalIdentity { which: 2, .. })
        ));
    }
}

mod serialization {
    use super::*;

    #[test]
    fn estimate_json_shape() {
        let e = residuum_limit(&MeanSpec::gini(2.0, 1.0).unwrap(), 3, &r(1.0, 256)).unwrap();
        let json: serde_json::Value = serde_json::from_str(&serde_json::to_string(&e).unwrap())
            .unwrap();
        let obj = json.as_object().unwrap();
        let mut keys: Vec<&str> = obj.keys().map(String::as_str).collect();
        keys.sort_unstable();
        assert_eq!(keys, ["method", "p", "uncertainty", "value"]);
        assert_eq!(obj["method"], "limit_extrapolation");
        assert_eq!(obj["p"], 3);
        // values travel as decimal strings
        assert!(obj["value"].is_string());
    }
}
