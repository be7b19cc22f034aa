// Oracle values are quoted at full rational precision.
#![allow(clippy::excessive_precision)]

use proptest::prelude::*;
use remest_core::*;

/// `(k, D, N)` for the birth-death chain with `p = 0.3`, from an independent
/// 40-digit rational linear solve.
const ORACLE_090: [(u32, f64, f64); 11] = [
    (1, 0.0, 0.54),
    (2, 0.45762711864406779661, 0.12355932203389830508),
    (3, 0.76947228595580243932, 0.047537736988286438836),
    (4, 1.0066455905720338983, 0.021990904727224576271),
    (5, 1.1843626638519744097, 0.01105504309194971691),
    (6, 1.3130272375539247925, 0.0057922105529239577052),
    (7, 1.4029477707488912881, 0.0031009540315661825736),
    (8, 1.4638323135474333161, 0.0016793784317416237113),
    (9, 1.503955854591636421, 0.0009151816429746256366),
    (10, 1.5298053417880290716, 0.00050042540130882088259),
    (11, 1.5461487129295035971, 0.00027414270798949635059),
];

const ORACLE_095: [(u32, f64, f64); 11] = [
    (1, 0.0, 0.57),
    (2, 0.47899159663865546218, 0.13651260504201680672),
    (3, 0.8281798479899880956, 0.056528494246207380727),
    (4, 1.1217798774036149319, 0.028845568013886095541),
    (5, 1.3715190901077567182, 0.016330445983527798799),
    (6, 1.5811050927267772489, 0.0097986314211002089693),
    (7, 1.7536007140712849853, 0.0060868721329402483348),
    (8, 1.8927244264877548032, 0.0038632092887809682565),
    (9, 2.0027946241246459143, 0.0024854741384728207321),
    (10, 2.0883600301362404843, 0.0016131175195109532644),
    (11, 2.1538356046025738656, 0.0010528933569569947532),
];

fn bd(beta: f64) -> ModelSpecA {
    ModelSpecA::birth_death(0.3, beta).unwrap()
}

#[test]
fn discounted_values_match_high_precision_oracle() {
    for (beta, table) in [(0.9, &ORACLE_090), (0.95, &ORACLE_095)] {
        for &(k, d, n) in table {
            let p = performance(&bd(beta), k, None).unwrap();
            assert!((p.distortion - d).abs() < 1e-12, "beta={beta} k={k}");
            assert!((p.transmission_rate - n).abs() < 1e-12, "beta={beta} k={k}");
        }
    }
}

#[test]
fn average_values_match_rational_oracle() {
    for k in 1..=11u32 {
        let kf = f64::from(k);
        let p = performance(&bd(1.0), k, None).unwrap();
        assert!((p.distortion - (kf * kf - 1.0) / (3.0 * kf)).abs() < 1e-12);
        assert!((p.transmission_rate - 0.6 / (kf * kf)).abs() < 1e-12);
        let lm = solve_lm(
            &build_silent_system(&bd(1.0), k).unwrap(),
            DiscountFactor::AVERAGE,
        )
        .unwrap();
        assert!((lm.m0() - kf * kf / 0.6).abs() < 1e-9 * lm.m0());
        assert!((lm.l0() - kf * (kf * kf - 1.0) / 1.8).abs() < 1e-9 * lm.l0().max(1.0));
    }
}

#[test]
fn corner_prices_from_oracle_values() {
    // lambda^(k) = (D_{k+1} - D_k) / (N_k - N_{k+1}) on the oracle table.
    let c = corner_lambdas(&bd(0.9), 10).unwrap();
    for (i, corner) in c.iter().enumerate() {
        let (_, d0, n0) = ORACLE_090[i];
        let (_, d1, n1) = ORACLE_090[i + 1];
        assert_eq!(corner.k, i as u32 + 1);
        assert!((corner.lambda - (d1 - d0) / (n0 - n1)).abs() < 1e-8 * corner.lambda);
    }
}

#[test]
fn worked_example_exact_values() {
    let o = optimal_costly(&bd(0.9), 20.0).unwrap();
    let (_, d5, n5) = ORACLE_090[4];
    assert_eq!(o.k, 5);
    assert!((o.cost - (d5 + 20.0 * n5)).abs() < 1e-12);

    let o = optimal_constrained(&bd(0.9), 0.1).unwrap();
    let (_, d2, n2) = ORACLE_090[1];
    let (_, d3, n3) = ORACLE_090[2];
    let theta = (0.1 - n3) / (n2 - n3);
    assert_eq!(o.policy.k_star, 2);
    assert!((o.policy.theta_star - theta).abs() < 1e-12);
    assert!((o.d_star - (theta * d2 + (1.0 - theta) * d3)).abs() < 1e-12);
}

#[test]
fn vanishing_discount_approaches_average_closed_forms() {
    for k in 1..=10u32 {
        let near = performance(&bd(0.9999), k, None).unwrap();
        let avg = bd_closed_form(0.3, DiscountFactor::AVERAGE, k).unwrap();
        assert!((near.distortion - avg.distortion).abs() < 5e-3, "k={k}");
        assert!(
            (near.transmission_rate - avg.transmission_rate).abs() < 5e-3,
            "k={k}"
        );
    }
}

#[test]
fn randomized_policy_per_visit_probability_differs_from_mixing_weight() {
    // Flipping a theta-coin at every boundary visit overshoots the constraint.
    let o = optimal_constrained(&bd(1.0), 0.1).unwrap();
    let naive = randomized_performance(&bd(1.0), 2, o.policy.theta_star).unwrap();
    assert!(naive.transmission_rate > 0.105);
    let calibrated = randomized_performance(&bd(1.0), 2, o.policy.boundary_prob).unwrap();
    assert!((calibrated.transmission_rate - 0.1).abs() < 1e-12);
    assert!((o.policy.boundary_prob - 9.0 / 29.0).abs() < 1e-9);
}

fn arb_pmf() -> impl Strategy<Value = IntegerPmf> {
    (1usize..4, prop::collection::vec(0.05f64..1.0, 4)).prop_map(|(r, raw)| {
        // Nonincreasing tail weights, then symmetric normalization.
        let mut w: Vec<f64> = raw[..=r].to_vec();
        w.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let total = w[0] + 2.0 * w[1..].iter().sum::<f64>();
        let mut entries = vec![(0i64, w[0] / total)];
        for (i, &x) in w.iter().enumerate().skip(1) {
            entries.push((i as i64, x / total));
            entries.push((-(i as i64), x / total));
        }
        IntegerPmf::new(entries).unwrap()
    })
}

fn arb_beta() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), 0.3f64..0.999]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lm_increase_and_n_decreases_in_k(pmf in arb_pmf(), beta in arb_beta(), a in 1i64..3) {
        let spec = ModelSpecA::new(a, pmf, DistortionFn::Absolute, DiscountFactor::new(beta).unwrap());
        let mut prev: Option<(LmVectors, PerfPoint)> = None;
        for k in 1..=8u32 {
            let lm = solve_lm(&build_silent_system(&spec, k).unwrap(), spec.beta).unwrap();
            let p = performance(&spec, k, None).unwrap();
            if let Some((plm, pp)) = &prev {
                prop_assert!(lm.l0() >= plm.l0() - 1e-12);
                prop_assert!(lm.m0() > plm.m0());
                prop_assert!(p.transmission_rate < pp.transmission_rate);
                prop_assert!(p.distortion >= pp.distortion - 1e-12);
            }
            prev = Some((lm, p));
        }
    }

    #[test]
    fn first_threshold_rate_is_beta_times_escape(pmf in arb_pmf(), beta in arb_beta()) {
        let p0 = pmf.prob(0);
        let spec = ModelSpecA::new(1, pmf, DistortionFn::Quadratic, DiscountFactor::new(beta).unwrap());
        let p = performance(&spec, 1u32, None).unwrap();
        prop_assert!((p.transmission_rate - beta * (1.0 - p0)).abs() < 1e-12);
        prop_assert_eq!(p.distortion, 0.0);
    }

    #[test]
    fn sign_flip_leaves_performance_unchanged(pmf in arb_pmf(), beta in arb_beta(), a in 1i64..4, k in 1u32..7) {
        let spec = ModelSpecA::new(a, pmf, DistortionFn::Absolute, DiscountFactor::new(beta).unwrap());
        let p = performance(&spec, k, None).unwrap();
        let q = performance(&spec.with_a(-a), k, None).unwrap();
        prop_assert!((p.distortion - q.distortion).abs() < 1e-10 * p.distortion.max(1.0));
        prop_assert!((p.transmission_rate - q.transmission_rate).abs() < 1e-12);
    }

    #[test]
    fn corners_are_continuous_and_curves_well_shaped(pmf in arb_pmf(), beta in arb_beta()) {
        let spec = ModelSpecA::new(1, pmf, DistortionFn::Absolute, DiscountFactor::new(beta).unwrap());
        let corners = corner_lambdas(&spec, 8).unwrap();
        for w in corners.windows(2) {
            let left = w[0].distortion + w[0].lambda * w[0].transmission_rate;
            let right = w[1].distortion + w[0].lambda * w[1].transmission_rate;
            prop_assert!((left - right).abs() < 1e-9 * left.max(1.0));
        }
        let costly = tradeoff_curve(&spec, CurveKind::Costly, 8).unwrap();
        prop_assert!(costly.shape_violations(1e-9).is_empty());
        let constrained = tradeoff_curve(&spec, CurveKind::Constrained, 8).unwrap();
        prop_assert!(constrained.shape_violations(1e-9).is_empty());
    }

    #[test]
    fn costly_optimum_beats_neighbours(lambda in 0.01f64..200.0) {
        let spec = bd(0.95);
        let o = optimal_costly(&spec, lambda).unwrap();
        for k in o.k.saturating_sub(2)..=o.k + 2 {
            let c = performance(&spec, k, Some(lambda)).unwrap().cost.unwrap().value;
            prop_assert!(o.cost <= c + 1e-12);
        }
    }

    #[test]
    fn constrained_optimum_meets_rate(alpha in 0.001f64..0.55) {
        let spec = bd(0.9);
        let o = optimal_constrained(&spec, alpha).unwrap();
        prop_assert!((o.rate - alpha).abs() < 1e-10);
        let p = randomized_performance(&spec, o.policy.k_star, o.policy.boundary_prob).unwrap();
        prop_assert!((p.transmission_rate - alpha).abs() < 1e-10);
        prop_assert!((p.distortion - o.d_star).abs() < 1e-8);
    }
}
