//! Acceptance criteria 1-10. Prints one PASS/FAIL line per criterion and
//! exits with status 1 if any criterion fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use remest_core::*;

// Tolerances.
const TABLE_TOL: f64 = 5e-4;
const CLOSED_FORM_TOL: f64 = 1e-9;
const FIRST_RATE_TOL: f64 = 1e-12;
const CORNER_TOL: f64 = 1e-9;
const SHAPE_TOL: f64 = 1e-9;
const ROUND_TRIP_EPS: f64 = 1e-4;
const MC_SIGMAS: f64 = 3.0;
const FIXED_POINT_TOL: f64 = 1e-6;

// Monte-Carlo budget.
const MC_REPS: u32 = 200;
const MC_HORIZON: u64 = 100_000;

/// Reference `(k, D, N, lambda)` rows for the birth-death chain, `p = 0.3`.
type Row = (u32, f64, f64, Option<f64>);

const REFERENCE_090: [Row; 11] = [
    (0, 0.0, 1.0, None),
    (1, 0.0, 0.5400, Some(1.0989)),
    (2, 0.4576, 0.1236, Some(4.1021)),
    (3, 0.7695, 0.0475, Some(9.2839)),
    (4, 1.0066, 0.0220, Some(16.2509)),
    (5, 1.1844, 0.0111, Some(24.4478)),
    (6, 1.3130, 0.0058, Some(33.4121)),
    (7, 1.4029, 0.0031, Some(42.8289)),
    (8, 1.4638, 0.0017, Some(52.5042)),
    (9, 1.5040, 0.0009, Some(62.3245)),
    (10, 1.5298, 0.0005, Some(72.2255)),
];

const REFERENCE_095: [Row; 11] = [
    (0, 0.0, 1.0, None),
    (1, 0.0, 0.5700, Some(1.1050)),
    (2, 0.4790, 0.1365, Some(4.3657)),
    (3, 0.8282, 0.0565, Some(10.6058)),
    (4, 1.1218, 0.0288, Some(19.9550)),
    (5, 1.3715, 0.0163, Some(32.0869)),
    (6, 1.5811, 0.0098, Some(46.4727)),
    (7, 1.7536, 0.0061, Some(62.5651)),
    (8, 1.8927, 0.0039, Some(79.8921)),
    (9, 2.0028, 0.0025, Some(98.0854)),
    (10, 2.0884, 0.0016, Some(116.8739)),
];

const REFERENCE_100: [Row; 11] = [
    (0, 0.0, 1.0, None),
    (1, 0.0, 0.6000, Some(1.1111)),
    (2, 0.5000, 0.1500, Some(4.6667)),
    (3, 0.8889, 0.0667, Some(12.3810)),
    (4, 1.2500, 0.0375, Some(25.9259)),
    (5, 1.6000, 0.0240, Some(46.9697)),
    (6, 1.9444, 0.0167, Some(77.1795)),
    (7, 2.2857, 0.0122, Some(118.2222)),
    (8, 2.6250, 0.0094, Some(171.7647)),
    (9, 2.9630, 0.0074, Some(239.4737)),
    (10, 3.0000, 0.0060, Some(323.0159)),
];

const REFERENCE: [(f64, &[Row; 11]); 3] = [
    (0.9, &REFERENCE_090),
    (0.95, &REFERENCE_095),
    (1.0, &REFERENCE_100),
];

fn bd(beta: f64) -> ModelSpecA {
    ModelSpecA::birth_death(0.3, beta).unwrap()
}

fn gm(sigma: f64, beta: f64) -> ModelSpecB {
    ModelSpecB::gauss_markov(sigma, 1.0, beta).unwrap()
}

fn mc_config() -> SimConfig {
    SimConfig {
        horizon: MC_HORIZON,
        replications: MC_REPS,
        seed: 20_240_601,
        ..SimConfig::default()
    }
}

/// Outcome of one criterion: pass flag plus a one-line summary.
struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(failures: Vec<String>, summary: String) -> Self {
        if failures.is_empty() {
            Verdict {
                pass: true,
                detail: summary,
            }
        } else {
            Verdict {
                pass: false,
                detail: format!("{summary}; failed: {}", failures.join("; ")),
            }
        }
    }
}

fn within(failures: &mut Vec<String>, label: String, expected: f64, actual: f64, tol: f64) {
    if !((actual - expected).abs() <= tol) {
        failures.push(format!(
            "{label}: expected {expected} got {actual} (tol {tol:e})"
        ));
    }
}

fn criterion_1() -> Verdict {
    let mut failures = Vec::new();
    let mut cells = 0;
    for (beta, rows) in REFERENCE {
        let perf = performance_table(&bd(beta), 11).unwrap();
        for &(k, d, n, lambda) in rows.iter() {
            let i = k as usize;
            within(
                &mut failures,
                format!("beta={beta} k={k} D"),
                d,
                perf[i].distortion,
                TABLE_TOL,
            );
            within(
                &mut failures,
                format!("beta={beta} k={k} N"),
                n,
                perf[i].transmission_rate,
                TABLE_TOL,
            );
            match lambda {
                Some(l) => {
                    let got = (perf[i + 1].distortion - perf[i].distortion)
                        / (perf[i].transmission_rate - perf[i + 1].transmission_rate);
                    within(
                        &mut failures,
                        format!("beta={beta} k={k} lambda"),
                        l,
                        got,
                        TABLE_TOL,
                    );
                }
                None => assert_eq!(k, 0),
            }
            cells += 3;
        }
    }
    let bad = failures.len();
    Verdict::new(
        failures,
        format!("{} of {cells} cells within {TABLE_TOL:e}", cells - bad),
    )
}

fn criterion_2() -> Verdict {
    let mut failures = Vec::new();
    let c = optimal_costly(&bd(0.9), 20.0).unwrap();
    if c.k != 5 {
        failures.push(format!("costly k = {} (expected 5)", c.k));
    }
    within(&mut failures, "C*(20)".into(), 1.4064, c.cost, TABLE_TOL);
    let o = optimal_constrained(&bd(0.9), 0.1).unwrap();
    if o.policy.k_star != 2 {
        failures.push(format!("constrained k* = {} (expected 2)", o.policy.k_star));
    }
    within(
        &mut failures,
        "theta*".into(),
        0.6899,
        o.policy.theta_star,
        TABLE_TOL,
    );
    within(&mut failures, "D*(0.1)".into(), 0.5543, o.d_star, TABLE_TOL);
    Verdict::new(
        failures,
        format!(
            "C*(20) = {:.7} at k = {}; (k*, theta*, D*) = ({}, {:.5}, {:.5})",
            c.cost, c.k, o.policy.k_star, o.policy.theta_star, o.d_star
        ),
    )
}

fn criterion_3() -> Verdict {
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for p in [0.1, 0.2, 0.3] {
        for beta in [0.9, 0.95, 1.0] {
            let spec = ModelSpecA::birth_death(p, beta).unwrap();
            for k in 1..=10u32 {
                let lin = performance(&spec, k, None).unwrap();
                let cf = bd_closed_form(p, DiscountFactor::new(beta).unwrap(), k).unwrap();
                let err = (lin.distortion - cf.distortion)
                    .abs()
                    .max((lin.transmission_rate - cf.transmission_rate).abs());
                worst = worst.max(err);
                if err > CLOSED_FORM_TOL {
                    failures.push(format!("p={p} beta={beta} k={k}: {err:e}"));
                }
            }
        }
    }
    Verdict::new(failures, format!("90 instances, max deviation {worst:.2e}"))
}

/// Random symmetric pmf with nonincreasing tails and radius 1..=4.
fn random_pmf(rng: &mut ChaCha8Rng) -> IntegerPmf {
    let r = rng.random_range(1..=4usize);
    let mut w: Vec<f64> = (0..=r).map(|_| rng.random_range(0.05..1.0)).collect();
    w.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let total = w[0] + 2.0 * w[1..].iter().sum::<f64>();
    let mut entries = vec![(0i64, w[0] / total)];
    for (i, &x) in w.iter().enumerate().skip(1) {
        entries.push((i as i64, x / total));
        entries.push((-(i as i64), x / total));
    }
    IntegerPmf::new(entries).unwrap()
}

fn criterion_4() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for i in 0..5 {
        let pmf = random_pmf(&mut rng);
        assert!(pmf.violations().is_empty());
        let p0 = pmf.prob(0);
        for beta in [0.5, 0.9, 1.0] {
            let spec = ModelSpecA::new(
                1,
                pmf.clone(),
                DistortionFn::Absolute,
                DiscountFactor::new(beta).unwrap(),
            );
            let n1 = performance(&spec, 1u32, None).unwrap().transmission_rate;
            worst = worst.max((n1 - beta * (1.0 - p0)).abs());
            within(
                &mut failures,
                format!("pmf {i} beta={beta}"),
                beta * (1.0 - p0),
                n1,
                FIRST_RATE_TOL,
            );
        }
    }
    Verdict::new(failures, format!("15 cases, max deviation {worst:.2e}"))
}

/// Second divided differences of a curve sampled at increasing abscissas.
fn second_differences(points: &[(f64, f64)]) -> Vec<f64> {
    let slopes: Vec<(f64, f64)> = points
        .windows(2)
        .map(|w| {
            (
                (w[1].1 - w[0].1) / (w[1].0 - w[0].0),
                0.5 * (w[0].0 + w[1].0),
            )
        })
        .collect();
    slopes
        .windows(2)
        .map(|s| (s[1].0 - s[0].0) / (s[1].1 - s[0].1))
        .collect()
}

fn criterion_5() -> Verdict {
    let mut failures = Vec::new();
    let mut corners_seen = 0;
    let mut worst_gap = 0.0f64;
    for (beta, _) in REFERENCE {
        let spec = bd(beta);
        let corners = corner_lambdas(&spec, 10).unwrap();
        corners_seen += corners.len();
        for w in corners.windows(2) {
            let left = w[0].distortion + w[0].lambda * w[0].transmission_rate;
            let right = w[1].distortion + w[0].lambda * w[1].transmission_rate;
            worst_gap = worst_gap.max((left - right).abs());
            within(
                &mut failures,
                format!("beta={beta} corner k={}", w[0].k),
                left,
                right,
                CORNER_TOL,
            );
        }
        let costly: Vec<(f64, f64)> = corners.iter().map(|c| (c.lambda, c.cost())).collect();
        if costly.windows(2).any(|w| w[1].1 < w[0].1 - SHAPE_TOL) {
            failures.push(format!("beta={beta} C* decreases"));
        }
        if second_differences(&costly).iter().any(|&s| s > SHAPE_TOL) {
            failures.push(format!("beta={beta} C* not concave"));
        }
        let curve = tradeoff_curve(&spec, CurveKind::Constrained, 10).unwrap();
        let constrained: Vec<(f64, f64)> = curve
            .points()
            .iter()
            .map(|p| (p.abscissa, p.ordinate))
            .collect();
        if constrained.windows(2).any(|w| w[1].1 > w[0].1 + SHAPE_TOL) {
            failures.push(format!("beta={beta} D* increases"));
        }
        if second_differences(&constrained)
            .iter()
            .any(|&s| s < -SHAPE_TOL)
        {
            failures.push(format!("beta={beta} D* not convex"));
        }
    }
    Verdict::new(
        failures,
        format!("{corners_seen} corners, max continuity gap {worst_gap:.2e}; shapes checked"),
    )
}

fn criterion_6() -> Verdict {
    let mut failures = Vec::new();
    let tol = 2.0 * FredholmOptions::default().tolerance;
    let rel = |x: f64| tol * x.abs().max(1.0);
    let eps = 1e-6;
    let base = gm(1.0, 1.0);
    // (a) scaling identities.
    for alpha in [0.2, 0.5] {
        let one = algorithm2_constrained(&base, alpha, eps).unwrap();
        for sigma in [0.5, 2.0] {
            let s = algorithm2_constrained(&gm(sigma, 1.0), alpha, eps).unwrap();
            within(
                &mut failures,
                format!("k* sigma={sigma} alpha={alpha}"),
                sigma * one.k,
                s.k,
                rel(sigma * one.k),
            );
            within(
                &mut failures,
                format!("D* sigma={sigma} alpha={alpha}"),
                sigma * sigma * one.d_star,
                s.d_star,
                rel(sigma * sigma * one.d_star),
            );
        }
    }
    for lambda in [0.5, 2.0] {
        for sigma in [0.5, 2.0] {
            let s2 = sigma * sigma;
            let one = algorithm1_costly(&base, lambda / s2, eps).unwrap();
            let s = algorithm1_costly(&gm(sigma, 1.0), lambda, eps * s2).unwrap();
            within(
                &mut failures,
                format!("C* sigma={sigma} lambda={lambda}"),
                s2 * one.cost,
                s.cost,
                rel(s2 * one.cost),
            );
        }
    }
    // (b) monotonicity on a 12-point grid.
    let mut prev: Option<(f64, f64, f64)> = None;
    for i in 0..12 {
        let k = 0.1 * 1.5f64.powi(i);
        let lm = solve_lm_b(&base, k, &FredholmOptions::default()).unwrap();
        let (l0, m0) = (lm.l.evaluate(0.0), lm.m.evaluate(0.0));
        let n = 1.0 / m0;
        if let Some((pl, pm, pn)) = prev {
            if !(l0 > pl && m0 > pm && n < pn) {
                failures.push(format!("monotonicity at k={k}"));
            }
        }
        prev = Some((l0, m0, n));
    }
    // (c) rate bisection round trip.
    for alpha in [0.2, 0.5, 0.8] {
        let o = algorithm2_constrained(&base, alpha, ROUND_TRIP_EPS).unwrap();
        let p = performance_b(&base, ThresholdPolicy::new(o.k).unwrap(), None).unwrap();
        within(
            &mut failures,
            format!("round trip alpha={alpha}"),
            alpha,
            p.transmission_rate,
            ROUND_TRIP_EPS,
        );
    }
    Verdict::new(
        failures,
        format!(
            "scaling at relative {tol:e}, 12-point monotonicity, round trips at {ROUND_TRIP_EPS:e}"
        ),
    )
}

fn mc_within(failures: &mut Vec<String>, label: String, expected: f64, hat: f64, se: f64) {
    if !((hat - expected).abs() <= MC_SIGMAS * se) {
        failures.push(format!(
            "{label}: expected {expected:.5} got {hat:.5} (se {se:.2e})"
        ));
    }
}

fn criterion_7() -> Verdict {
    let mut failures = Vec::new();
    let cfg = mc_config();
    let mut runs = 0;
    for k in [2u32, 3, 5] {
        let spec = bd(1.0);
        let exact = performance(&spec, k, None).unwrap();
        let r = simulate(&spec.into(), &PolicySpec::Threshold(k.into()), &cfg).unwrap();
        mc_within(
            &mut failures,
            format!("birth-death k={k} D"),
            exact.distortion,
            r.d_hat,
            r.d_se,
        );
        mc_within(
            &mut failures,
            format!("birth-death k={k} N"),
            exact.transmission_rate,
            r.n_hat,
            r.n_se,
        );
        runs += 1;
    }
    for k in [1.0, 2.0] {
        let spec = gm(1.0, 1.0);
        let policy = ThresholdPolicy::new(k).unwrap();
        let exact = performance_b(&spec, policy, None).unwrap();
        let r = simulate(&spec.into(), &PolicySpec::Threshold(policy), &cfg).unwrap();
        mc_within(
            &mut failures,
            format!("gauss-markov k={k} D"),
            exact.distortion,
            r.d_hat,
            r.d_se,
        );
        mc_within(
            &mut failures,
            format!("gauss-markov k={k} N"),
            exact.transmission_rate,
            r.n_hat,
            r.n_se,
        );
        runs += 1;
    }
    let spec: ModelSpec = gm(1.0, 1.0).into();
    for alpha in [0.25, 0.5] {
        let r = simulate(&spec, &PolicySpec::IidRandom { alpha }, &cfg).unwrap();
        mc_within(
            &mut failures,
            format!("iid alpha={alpha}"),
            1.0 / alpha - 1.0,
            r.d_hat,
            r.d_se,
        );
        runs += 1;
    }
    let mut skipped = Vec::new();
    for (family, name) in [
        (PeriodicFamily::OneInT, "one_in_T"),
        (PeriodicFamily::AllButOne, "all_but_one"),
    ] {
        for alpha in [0.25, 0.5] {
            match (
                periodic_distortion(alpha, 1.0, family),
                periodic_pattern(alpha, family),
            ) {
                (Ok(d), Ok(pattern)) => {
                    let r = simulate(&spec, &PolicySpec::periodic(pattern).unwrap(), &cfg).unwrap();
                    mc_within(
                        &mut failures,
                        format!("periodic {name} alpha={alpha}"),
                        d,
                        r.d_hat,
                        r.d_se,
                    );
                    runs += 1;
                }
                _ => skipped.push(format!(
                    "{name} at alpha={alpha} (period would be non-integral)"
                )),
            }
        }
    }
    // The all-but-one family only realizes rates (T - 1) / T >= 1/2.
    let r = simulate(
        &spec,
        &PolicySpec::periodic(periodic_pattern(0.75, PeriodicFamily::AllButOne).unwrap()).unwrap(),
        &cfg,
    )
    .unwrap();
    mc_within(
        &mut failures,
        "periodic all_but_one alpha=0.75".into(),
        periodic_distortion(0.75, 1.0, PeriodicFamily::AllButOne).unwrap(),
        r.d_hat,
        r.d_se,
    );
    runs += 1;
    Verdict::new(
        failures,
        format!(
            "{runs} simulations at R={MC_REPS}, T={MC_HORIZON}; not representable: {}",
            skipped.join(", ")
        ),
    )
}

/// Threshold optimal on the reference price intervals `(lambda_(k-1), lambda_k]`.
fn reference_threshold(lambda: f64) -> u32 {
    REFERENCE_090
        .iter()
        .find(|r| r.3.is_some_and(|l| lambda <= l))
        .map(|r| r.0)
        .unwrap()
}

fn criterion_8() -> Verdict {
    let mut failures = Vec::new();
    let spec = bd(0.9);
    let mut found = Vec::new();
    for lambda in [2.0, 10.0, 20.0, 40.0] {
        let dp = value_iterate(&spec, lambda, 1e-9).unwrap();
        let k = dp.threshold();
        for e in 0..=dp.bound {
            if dp.transmits_at(e) != dp.transmits_at(-e) {
                failures.push(format!("lambda={lambda}: asymmetric at e={e}"));
                break;
            }
        }
        let exact = optimal_costly(&spec, lambda).unwrap().k;
        let reference = reference_threshold(lambda);
        if k != Some(exact) || exact != reference {
            failures.push(format!("lambda={lambda}: value iteration {k:?}, linear solve {exact}, reference intervals {reference}"));
        }
        found.push(format!("{}", k.map_or(-1, i64::from)));
    }
    let mut worst = 0.0f64;
    for (beta, rows) in REFERENCE.iter().take(2) {
        let spec = bd(*beta);
        for &(k, d_pub, n_pub, _) in rows.iter().skip(1) {
            let (d, n) = policy_evaluate_fixed_point(&spec, k, i64::from(k), 1e-9).unwrap();
            let exact = performance(&spec, k, None).unwrap();
            let err = (d - exact.distortion)
                .abs()
                .max((n - exact.transmission_rate).abs());
            worst = worst.max(err);
            if err > FIXED_POINT_TOL {
                failures.push(format!("fixed point beta={beta} k={k}: {err:e}"));
            }
            within(
                &mut failures,
                format!("fixed point vs reference D beta={beta} k={k}"),
                d_pub,
                d,
                TABLE_TOL,
            );
            within(
                &mut failures,
                format!("fixed point vs reference N beta={beta} k={k}"),
                n_pub,
                n,
                TABLE_TOL,
            );
        }
    }
    Verdict::new(
        failures,
        format!(
            "thresholds for lambda = 2, 10, 20, 40: {}; fixed point max deviation {worst:.2e}",
            found.join(", ")
        ),
    )
}

fn criterion_9() -> Verdict {
    let mut failures = Vec::new();
    let spec = bd(1.0);
    let alpha = 0.1;
    let o = optimal_constrained(&spec, alpha).unwrap();
    let k = o.policy.k_star;
    let n_k = performance(&spec, k, None).unwrap().transmission_rate;
    let n_k1 = performance(&spec, k + 1, None).unwrap().transmission_rate;
    let schedule = time_sharing_schedule(alpha, n_k, n_k1, o.policy.theta_star, 3).unwrap();
    // Interpolated reference values: theta = (0.1 - 0.0667) / (0.15 - 0.0667).
    let theta = (0.1 - 0.0667) / (0.15 - 0.0667);
    let d_target = theta * 0.5 + (1.0 - theta) * 0.8889;
    let cfg = mc_config();
    let mut summary = Vec::new();
    for (name, policy) in [
        (
            "steering",
            PolicySpec::Steering {
                k,
                theta: o.policy.boundary_prob,
            },
        ),
        (
            "time-sharing",
            PolicySpec::TimeSharing {
                k,
                schedule: schedule.clone(),
            },
        ),
    ] {
        let r = simulate(&spec.clone().into(), &policy, &cfg).unwrap();
        mc_within(&mut failures, format!("{name} N"), alpha, r.n_hat, r.n_se);
        mc_within(
            &mut failures,
            format!("{name} D"),
            d_target,
            r.d_hat,
            r.d_se,
        );
        summary.push(format!("{name} (N, D) = ({:.5}, {:.5})", r.n_hat, r.d_hat));
    }
    Verdict::new(
        failures,
        format!("target (0.1, {d_target:.4}); {}", summary.join(", ")),
    )
}

fn criterion_10() -> Verdict {
    let mut failures = Vec::new();
    let cases: [&[&str]; 3] = [
        &[
            "simulate",
            "--k",
            "3",
            "--reps",
            "64",
            "--horizon",
            "20000",
            "--seed",
            "11",
        ],
        &[
            "simulate",
            "--model",
            "B",
            "--policy",
            "iid",
            "--alpha",
            "0.5",
            "--reps",
            "32",
            "--horizon",
            "20000",
            "--format",
            "json",
        ],
        &[
            "simulate", "--policy", "steering", "--alpha", "0.1", "--beta", "0.95", "--reps", "40",
            "--seed", "5",
        ],
    ];
    for args in cases {
        let run = |extra: &[&str]| {
            let argv: Vec<&str> = std::iter::once("remest")
                .chain(args.iter().copied())
                .chain(extra.iter().copied())
                .collect();
            let out = remest_cli::run(argv);
            assert_eq!(out.code, 0, "{}", out.stderr);
            out.stdout
        };
        let reference = run(&["--serial"]);
        for extra in [
            &["--serial"][..],
            &["--threads", "4"],
            &["--threads", "2"],
            &[],
        ] {
            if run(extra) != reference {
                failures.push(format!("{} with {extra:?}", args.join(" ")));
            }
        }
    }
    Verdict::new(
        failures,
        "3 commands x 5 runs (serial, 4 threads, 2 threads, default pool) byte-identical".into(),
    )
}

type Criterion = (u32, &'static str, fn() -> Verdict, Duration);

fn main() {
    let criteria: [Criterion; 10] = [
        (
            1,
            "reference table reproduction",
            criterion_1,
            Duration::from_secs(1),
        ),
        (2, "worked examples", criterion_2, Duration::from_secs(1)),
        (
            3,
            "closed forms vs linear solver",
            criterion_3,
            Duration::from_secs(1),
        ),
        (
            4,
            "first-threshold rate",
            criterion_4,
            Duration::from_secs(5),
        ),
        (
            5,
            "corner continuity and curve shape",
            criterion_5,
            Duration::from_secs(5),
        ),
        (
            6,
            "Gauss-Markov properties",
            criterion_6,
            Duration::from_secs(60),
        ),
        (
            7,
            "Monte-Carlo validation",
            criterion_7,
            Duration::from_secs(120),
        ),
        (
            8,
            "dynamic-programming oracle",
            criterion_8,
            Duration::from_secs(30),
        ),
        (
            9,
            "deterministic implementations",
            criterion_9,
            Duration::from_secs(60),
        ),
        (
            10,
            "determinism across execution plans",
            criterion_10,
            Duration::from_secs(120),
        ),
    ];
    let mut failed = 0;
    for (n, title, check, limit) in criteria {
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| Verdict {
            pass: false,
            detail: format!(
                "panicked: {}",
                e.downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default()
            ),
        });
        let elapsed = start.elapsed();
        let in_time = elapsed <= limit;
        let pass = verdict.pass && in_time;
        if !pass {
            failed += 1;
        }
        let timing = if in_time {
            format!("{:.2}s", elapsed.as_secs_f64())
        } else {
            format!(
                "{:.2}s exceeds limit {:.0}s",
                elapsed.as_secs_f64(),
                limit.as_secs_f64()
            )
        };
        println!(
            "criterion {n:>2} {}: {title} [{timing}] {}",
            if pass { "PASS" } else { "FAIL" },
            verdict.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
