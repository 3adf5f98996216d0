use proptest::prelude::*;
use stopsmith::{
    critical_window_fraction, exact_success_by_enumeration, fixed_q_optimum, limit_curve, luce_inv_down_exact,
    mallows_down_exact, mallows_up_exact, optimize_threshold, sukhatme_optimal_fraction, tail_sum, AsymptoticRegime,
    ExactFamily, LimitCurve, ModelSpec, RankDirection, Sign, SukhatmeKind, Threshold, WeightVector,
};

const INV_E: f64 = 0.36787944117144233;

fn weight_families(n: usize) -> Vec<WeightVector> {
    vec![
        WeightVector::unit(n),
        WeightVector::geometric(0.6, n).unwrap(),
        WeightVector::geometric(2.0, n).unwrap(),
        WeightVector::sukhatme(n),
        WeightVector::reverse_sukhatme(n),
    ]
}

#[test]
fn success_profile_is_unimodal_with_predicted_peak() {
    let n = 2000;
    for q in [1.05, 1.2, 2.0, 5.0] {
        let v = ExactFamily::MallowsUp { q }.profile(n).unwrap();
        let peak = optimize_threshold(&ExactFamily::MallowsUp { q }, n).unwrap().m;
        for m in 0..n - 1 {
            if m < peak {
                assert!(v[m + 1] >= v[m] - 1e-12, "q={q}: rises fail at {m}");
            } else {
                assert!(v[m + 1] <= v[m] + 1e-12, "q={q}: falls fail at {m}");
            }
        }
        let lim = fixed_q_optimum(q, RankDirection::Max).unwrap();
        let Threshold::Count(m_star) = lim.threshold else { panic!("expected a count") };
        let allowed = peak == m_star || (lim.co_optimal && peak + 1 == m_star);
        assert!(allowed, "q={q}: finite peak {peak}, limit M* {m_star}");
        assert!((v[peak] - lim.limit_prob).abs() < 1e-9, "q={q}");
    }
}

#[test]
fn optimal_value_never_drops_far_below_inverse_e() {
    let n = 2000;
    let mut families = vec![ExactFamily::Classical];
    for q in [0.3, 0.7, 1.5, 3.0] {
        families.push(ExactFamily::MallowsUp { q });
        families.push(ExactFamily::MallowsDown { q });
    }
    for w in weight_families(n) {
        families.push(ExactFamily::LuceInvDown(w));
    }
    for fam in &families {
        let best = optimize_threshold(fam, n).unwrap();
        assert!(best.value >= INV_E - 0.02, "{fam:?}: {}", best.value);
    }
}

#[test]
fn limit_thresholds_are_near_optimal_at_large_n() {
    let n = 100_000;
    for kind in [SukhatmeKind::Standard, SukhatmeKind::Reverse] {
        let b = sukhatme_optimal_fraction(kind).threshold.value();
        let w = match kind {
            SukhatmeKind::Standard => WeightVector::sukhatme(n),
            SukhatmeKind::Reverse => WeightVector::reverse_sukhatme(n),
        };
        let m = (b * n as f64).round() as usize;
        let v = luce_inv_down_exact(n, m, &w).unwrap();
        assert!((v - INV_E).abs() <= 0.01, "{kind:?}: {v}");
    }
    for (dir, sign) in [
        (RankDirection::Max, Sign::Minus),
        (RankDirection::Max, Sign::Plus),
        (RankDirection::Min, Sign::Minus),
        (RankDirection::Min, Sign::Plus),
    ] {
        let c = 1.0;
        let res = critical_window_fraction(c, dir, sign).unwrap();
        let q = AsymptoticRegime::CriticalWindow { c, sign }.q_at(n);
        let m = res.threshold.at(n);
        let v = match dir {
            RankDirection::Max => mallows_up_exact(n, m, q),
            RankDirection::Min => mallows_down_exact(n, m, q),
        }
        .unwrap();
        assert!((v - INV_E).abs() <= 0.01, "({dir},{sign}): {v}");
    }
}

#[test]
fn intermediate_thresholds_are_near_optimal() {
    let n = 1_000_000;
    let (c, alpha) = (1.0, 0.5);
    for (dir, sign) in [
        (RankDirection::Max, Sign::Plus),
        (RankDirection::Max, Sign::Minus),
        (RankDirection::Min, Sign::Plus),
        (RankDirection::Min, Sign::Minus),
    ] {
        let res = stopsmith::intermediate_regime(c, alpha, dir, sign).unwrap();
        let q = res.regime.q_at(n);
        let fam = match dir {
            RankDirection::Max => ExactFamily::MallowsUp { q },
            RankDirection::Min => ExactFamily::MallowsDown { q },
        };
        let v = fam.evaluate(n, res.threshold.at(n)).unwrap();
        assert!((v - INV_E).abs() <= 0.01, "({dir},{sign}) {:?}: {v}", res.threshold);
    }
}

#[test]
fn fixed_q_limits_match_large_n_optima() {
    for q in [0.3, 0.8, 1.25, 4.0] {
        for dir in [RankDirection::Max, RankDirection::Min] {
            let lim = fixed_q_optimum(q, dir).unwrap();
            let fam = match dir {
                RankDirection::Max => ExactFamily::MallowsUp { q },
                RankDirection::Min => ExactFamily::MallowsDown { q },
            };
            let n = 3000;
            let best = optimize_threshold(&fam, n).unwrap();
            assert!((best.value - lim.limit_prob).abs() < 1e-9, "q={q} {dir}: {} vs {}", best.value, lim.limit_prob);
            let predicted = lim.threshold.at(n);
            let ok = best.m == predicted || (lim.co_optimal && best.m + 1 == predicted);
            assert!(ok, "q={q} {dir}: {} vs {predicted}", best.m);
        }
    }
}

#[test]
fn fixed_q_curve_argument_is_the_count() {
    let q = 1.1;
    let lim = fixed_q_optimum(q, RankDirection::Max).unwrap();
    let m = lim.threshold.value();
    let g = limit_curve(LimitCurve::FixedQ { q }, m).unwrap();
    assert!(((1.0 - 1.0 / q) * g - lim.limit_prob).abs() < 1e-12);
}

fn small_weights() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..20.0, 2..=6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn luce_inv_closed_form_matches_enumeration(theta in small_weights(), pick in 0usize..6) {
        let n = theta.len();
        let m = pick % n;
        let w = WeightVector::new(theta).unwrap();
        let oracle = exact_success_by_enumeration(&ModelSpec::luce_inv(w.clone()), m, RankDirection::Min).unwrap();
        prop_assert!((luce_inv_down_exact(n, m, &w).unwrap() - oracle).abs() <= 1e-12);
    }

    #[test]
    fn mallows_closed_forms_match_enumeration(n in 1usize..=6, pick in 0usize..6, q in 0.05f64..8.0) {
        let m = pick % n;
        let spec = ModelSpec::mallows(n, q).unwrap();
        let up = exact_success_by_enumeration(&spec, m, RankDirection::Max).unwrap();
        let down = exact_success_by_enumeration(&spec, m, RankDirection::Min).unwrap();
        prop_assert!((mallows_up_exact(n, m, q).unwrap() - up).abs() <= 1e-12);
        prop_assert!((mallows_down_exact(n, m, q).unwrap() - down).abs() <= 1e-12);
    }

    #[test]
    fn closed_forms_are_probabilities(n in 1usize..3000, frac in 0.0f64..1.0, lq in -6.0f64..6.0) {
        let q = lq.exp();
        let m = ((frac * n as f64) as usize).min(n - 1);
        for v in [mallows_up_exact(n, m, q).unwrap(), mallows_down_exact(n, m, q).unwrap()] {
            prop_assert!(v.is_finite() && (0.0..=1.0 + 1e-12).contains(&v), "{v}");
        }
    }

    #[test]
    fn duality_holds(n in 1usize..300, frac in 0.0f64..1.0, lq in -4.0f64..4.0) {
        let q = lq.exp();
        let m = ((frac * n as f64) as usize).min(n - 1);
        let a = mallows_down_exact(n, m, q).unwrap();
        let b = mallows_up_exact(n, m, 1.0 / q).unwrap();
        prop_assert!((a - b).abs() <= 1e-10);
    }

    #[test]
    fn tail_sums_decrease(lq in 0.01f64..3.0, m in 1usize..40) {
        let q = lq.exp();
        let a = tail_sum(q, m, 1e-14).unwrap();
        let b = tail_sum(q, m + 1, 1e-14).unwrap();
        prop_assert!(b < a && b > 0.0);
        let dual = tail_sum(1.0 / q, m, 1e-14).unwrap();
        prop_assert!((a - dual).abs() <= 1e-12 * a);
    }

    #[test]
    fn fixed_q_limit_dominates_inverse_e(lq in -4.0f64..4.0) {
        prop_assume!(lq.abs() > 1e-3);
        let q = lq.exp();
        for dir in [RankDirection::Max, RankDirection::Min] {
            let lim = fixed_q_optimum(q, dir).unwrap();
            prop_assert!(lim.limit_prob >= INV_E - 1e-9 && lim.limit_prob <= 1.0, "{q} {dir}: {}", lim.limit_prob);
        }
    }

    #[test]
    fn critical_fractions_stay_in_unit_interval(c in 1e-6f64..500.0) {
        for dir in [RankDirection::Max, RankDirection::Min] {
            for sign in [Sign::Plus, Sign::Minus] {
                let b = critical_window_fraction(c, dir, sign).unwrap().threshold.value();
                prop_assert!(b > 0.0 && b < 1.0);
            }
        }
    }
}
