//! Consistency checks run by `remest validate`.

use rayon::prelude::*;
use remest_core::{
    algorithm1_costly, algorithm2_constrained, bd_closed_form, corner_lambdas, lambda_of_k,
    optimal_constrained, optimal_costly, performance, performance_b, performance_table,
    periodic_distortion, periodic_pattern, policy_evaluate_fixed_point, simulate, solve_lm_b,
    time_sharing_schedule, tradeoff_curve, value_iterate, CurveKind, DiscountFactor, DistortionFn,
    FredholmOptions, IntegerPmf, ModelSpec, ModelSpecA, ModelSpecB, PeriodicFamily, PolicySpec,
    SimConfig, ThresholdPolicy,
};

use crate::args::Suite;
use crate::output::{Cell, OutputRecord};
use crate::reference::{
    REFERENCE_P, REFERENCE_TABLES, REFERENCE_TOL, WORKED_CONSTRAINED, WORKED_COSTLY,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// The check does not apply to the requested parameters.
    Skip,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub expected: Cell,
    pub actual: Cell,
    pub tolerance: f64,
    pub status: Status,
    /// The property the check exercises.
    pub claim: &'static str,
}

impl Check {
    fn numeric(
        suite: &'static str,
        name: String,
        expected: f64,
        actual: f64,
        tolerance: f64,
        claim: &'static str,
    ) -> Self {
        let status = if (actual - expected).abs() <= tolerance {
            Status::Pass
        } else {
            Status::Fail
        };
        Check {
            suite,
            name,
            expected: expected.into(),
            actual: actual.into(),
            tolerance,
            status,
            claim,
        }
    }

    fn exact(
        suite: &'static str,
        name: String,
        expected: i64,
        actual: i64,
        claim: &'static str,
    ) -> Self {
        Check {
            suite,
            name,
            expected: Cell::Int(expected),
            actual: Cell::Int(actual),
            tolerance: 0.0,
            status: if expected == actual {
                Status::Pass
            } else {
                Status::Fail
            },
            claim,
        }
    }

    fn boolean(
        suite: &'static str,
        name: String,
        ok: bool,
        detail: String,
        claim: &'static str,
    ) -> Self {
        Check {
            suite,
            name,
            expected: "true".into(),
            actual: Cell::Text(if ok { "true".into() } else { detail }),
            tolerance: 0.0,
            status: if ok { Status::Pass } else { Status::Fail },
            claim,
        }
    }

    fn error(
        suite: &'static str,
        name: String,
        err: impl std::fmt::Display,
        claim: &'static str,
    ) -> Self {
        Check {
            suite,
            name,
            expected: Cell::Empty,
            actual: Cell::Text(format!("error: {err}")),
            tolerance: 0.0,
            status: Status::Fail,
            claim,
        }
    }

    fn skip(suite: &'static str, name: String, reason: &str, claim: &'static str) -> Self {
        Check {
            suite,
            name,
            expected: Cell::Empty,
            actual: Cell::Text(reason.into()),
            tolerance: 0.0,
            status: Status::Skip,
            claim,
        }
    }
}

/// Monte-Carlo settings shared by the simulation checks.
#[derive(Debug, Clone, Copy)]
pub struct McSettings {
    pub seed: u64,
    pub replications: u32,
    pub horizon: u64,
    pub parallel: bool,
}

impl McSettings {
    fn config(&self) -> SimConfig {
        SimConfig {
            horizon: self.horizon,
            replications: self.replications,
            seed: self.seed,
            parallel: self.parallel,
            ..SimConfig::default()
        }
    }
}

fn bd(beta: f64) -> ModelSpecA {
    ModelSpecA::birth_death(REFERENCE_P, beta).expect("valid birth-death instance")
}

fn gm(sigma: f64, beta: f64) -> ModelSpecB {
    ModelSpecB::gauss_markov(sigma, 1.0, beta).expect("valid Gauss-Markov instance")
}

const TABLE: &str = "tableI";

pub fn table_cells() -> Vec<Check> {
    let mut out = Vec::new();
    for (beta, rows) in REFERENCE_TABLES {
        let perf = match performance_table(&bd(beta), 11) {
            Ok(p) => p,
            Err(e) => {
                out.push(Check::error(
                    TABLE,
                    format!("beta={beta}"),
                    e,
                    "threshold performance",
                ));
                continue;
            }
        };
        for &(k, d_ref, n_ref, lambda_ref) in rows.iter() {
            let k_us = k as usize;
            let (d, n) = (perf[k_us].distortion, perf[k_us].transmission_rate);
            out.push(Check::numeric(
                TABLE,
                format!("beta={beta} k={k} D"),
                d_ref,
                d,
                REFERENCE_TOL,
                "renewal distortion D = L(0)/M(0)",
            ));
            out.push(Check::numeric(
                TABLE,
                format!("beta={beta} k={k} N"),
                n_ref,
                n,
                REFERENCE_TOL,
                "renewal rate N = 1/M(0) - (1 - beta)",
            ));
            match lambda_ref {
                None => out.push(Check {
                    suite: TABLE,
                    name: format!("beta={beta} k={k} lambda"),
                    expected: "—".into(),
                    actual: "—".into(),
                    tolerance: 0.0,
                    status: Status::Pass,
                    claim: "no corner price below the first threshold",
                }),
                Some(l_ref) => {
                    let next = &perf[k_us + 1];
                    let lambda = (next.distortion - d) / (n - next.transmission_rate);
                    out.push(Check::numeric(
                        TABLE,
                        format!("beta={beta} k={k} lambda"),
                        l_ref,
                        lambda,
                        REFERENCE_TOL,
                        "corner price (D_(k+1) - D_k) / (N_k - N_(k+1))",
                    ));
                }
            }
        }
    }
    out
}

pub fn worked_examples() -> Vec<Check> {
    let mut out = Vec::new();
    let (beta, lambda, k_ref, c_ref) = WORKED_COSTLY;
    match optimal_costly(&bd(beta), lambda) {
        Ok(o) => {
            out.push(Check::exact(
                TABLE,
                format!("costly beta={beta} lambda={lambda} k"),
                i64::from(k_ref),
                i64::from(o.k),
                "optimal costly threshold",
            ));
            out.push(Check::numeric(
                TABLE,
                format!("costly beta={beta} lambda={lambda} C"),
                c_ref,
                o.cost,
                REFERENCE_TOL,
                "optimal cost C*(lambda)",
            ));
        }
        Err(e) => out.push(Check::error(
            TABLE,
            "costly worked example".into(),
            e,
            "optimal costly threshold",
        )),
    }
    let (beta, alpha, k_ref, theta_ref, d_ref) = WORKED_CONSTRAINED;
    match optimal_constrained(&bd(beta), alpha) {
        Ok(o) => {
            out.push(Check::exact(
                TABLE,
                format!("constrained beta={beta} alpha={alpha} k"),
                i64::from(k_ref),
                i64::from(o.policy.k_star),
                "constrained optimum threshold",
            ));
            out.push(Check::numeric(
                TABLE,
                format!("constrained beta={beta} alpha={alpha} theta"),
                theta_ref,
                o.policy.theta_star,
                REFERENCE_TOL,
                "mixing weight (alpha - N_(k+1)) / (N_k - N_(k+1))",
            ));
            out.push(Check::numeric(
                TABLE,
                format!("constrained beta={beta} alpha={alpha} D"),
                d_ref,
                o.d_star,
                REFERENCE_TOL,
                "distortion-transmission function D*(alpha)",
            ));
        }
        Err(e) => out.push(Check::error(
            TABLE,
            "constrained worked example".into(),
            e,
            "constrained optimum",
        )),
    }
    out
}

const CLOSED: &str = "closed_forms";

pub fn closed_forms() -> Vec<Check> {
    let mut out = Vec::new();
    for p in [0.1, 0.2, 0.3] {
        for beta in [0.9, 0.95, 1.0] {
            let spec = ModelSpecA::birth_death(p, beta).expect("valid instance");
            let worst = (1..=10u32).try_fold(0.0f64, |acc, k| {
                let lin = performance(&spec, k, None)?;
                let cf = bd_closed_form(p, DiscountFactor::new(beta)?, k)?;
                Ok::<_, remest_core::Error>(
                    acc.max((lin.distortion - cf.distortion).abs())
                        .max((lin.transmission_rate - cf.transmission_rate).abs()),
                )
            });
            let name = format!("p={p} beta={beta} k=1..10 max |closed form - linear solve|");
            out.push(match worst {
                Ok(w) => Check::numeric(
                    CLOSED,
                    name,
                    0.0,
                    w,
                    1e-9,
                    "birth-death closed forms for D and N",
                ),
                Err(e) => Check::error(CLOSED, name, e, "birth-death closed forms for D and N"),
            });
        }
    }
    out
}

/// Five fixed symmetric unimodal pmfs.
pub fn sample_pmfs() -> Vec<IntegerPmf> {
    let raw: [&[f64]; 5] = [
        &[0.5, 0.25],
        &[0.2, 0.2, 0.2],
        &[0.4, 0.2, 0.1],
        &[0.3, 0.25, 0.05, 0.05],
        &[0.9, 0.05],
    ];
    raw.iter()
        .map(|w| {
            let total = w[0] + 2.0 * w[1..].iter().sum::<f64>();
            let mut entries = vec![(0i64, w[0] / total)];
            for (i, &x) in w.iter().enumerate().skip(1) {
                entries.push((i as i64, x / total));
                entries.push((-(i as i64), x / total));
            }
            IntegerPmf::new(entries).expect("valid pmf")
        })
        .collect()
}

pub fn first_threshold_rate() -> Vec<Check> {
    let mut out = Vec::new();
    for (i, pmf) in sample_pmfs().into_iter().enumerate() {
        for beta in [0.5, 0.9, 1.0] {
            let p0 = pmf.prob(0);
            let spec = ModelSpecA::new(
                1,
                pmf.clone(),
                DistortionFn::Absolute,
                DiscountFactor::new(beta).expect("valid beta"),
            );
            let name = format!("pmf #{} beta={beta} N(1)", i + 1);
            out.push(match performance(&spec, 1u32, None) {
                Ok(p) => Check::numeric(
                    CLOSED,
                    name,
                    beta * (1.0 - p0),
                    p.transmission_rate,
                    1e-12,
                    "N(1) = beta (1 - p_0)",
                ),
                Err(e) => Check::error(CLOSED, name, e, "N(1) = beta (1 - p_0)"),
            });
        }
    }
    out
}

pub fn corners_and_shape() -> Vec<Check> {
    let mut out = Vec::new();
    for (beta, _) in REFERENCE_TABLES {
        let spec = bd(beta);
        let claim = "C*(lambda) continuous at corner prices";
        match corner_lambdas(&spec, 10) {
            Ok(c) => {
                let gap = c
                    .windows(2)
                    .map(|w| {
                        let left = w[0].distortion + w[0].lambda * w[0].transmission_rate;
                        let right = w[1].distortion + w[0].lambda * w[1].transmission_rate;
                        (left - right).abs()
                    })
                    .fold(0.0, f64::max);
                out.push(Check::numeric(
                    CLOSED,
                    format!("beta={beta} max corner gap"),
                    0.0,
                    gap,
                    1e-9,
                    claim,
                ));
            }
            Err(e) => out.push(Check::error(
                CLOSED,
                format!("beta={beta} corners"),
                e,
                claim,
            )),
        }
        for (kind, claim) in [
            (CurveKind::Costly, "C* concave and nondecreasing"),
            (CurveKind::Constrained, "D* convex and nonincreasing"),
        ] {
            let name = format!("beta={beta} {kind:?} curve shape");
            out.push(match tradeoff_curve(&spec, kind, 10) {
                Ok(curve) => {
                    let v = curve.shape_violations(1e-9);
                    Check::boolean(CLOSED, name, v.is_empty(), v.join("; "), claim)
                }
                Err(e) => Check::error(CLOSED, name, e, claim),
            });
        }
    }
    out
}

const SCALING: &str = "scaling";

/// Relative tolerance for the scaling identities: twice the quadrature tolerance.
pub fn scaling_tolerance() -> f64 {
    2.0 * FredholmOptions::default().tolerance
}

pub fn gauss_markov_scaling() -> Vec<Check> {
    let eps = 1e-6;
    let tol = scaling_tolerance();
    let rel = |x: f64| tol * x.abs().max(1.0);
    let mut out = Vec::new();
    let base = gm(1.0, 1.0);
    for alpha in [0.2, 0.5] {
        let one = algorithm2_constrained(&base, alpha, eps);
        for sigma in [0.5, 2.0] {
            let name = format!("sigma={sigma} alpha={alpha}");
            match (&one, algorithm2_constrained(&gm(sigma, 1.0), alpha, eps)) {
                (Ok(o1), Ok(os)) => {
                    out.push(Check::numeric(
                        SCALING,
                        format!("{name} k*"),
                        sigma * o1.k,
                        os.k,
                        rel(sigma * o1.k),
                        "k*_sigma(alpha) = sigma k*_1(alpha)",
                    ));
                    out.push(Check::numeric(
                        SCALING,
                        format!("{name} D*"),
                        sigma * sigma * o1.d_star,
                        os.d_star,
                        rel(sigma * sigma * o1.d_star),
                        "D*_sigma(alpha) = sigma^2 D*_1(alpha)",
                    ));
                }
                (Err(e), _) => out.push(Check::error(
                    SCALING,
                    name,
                    e,
                    "k*_sigma(alpha) = sigma k*_1(alpha)",
                )),
                (_, Err(e)) => out.push(Check::error(
                    SCALING,
                    name,
                    e,
                    "k*_sigma(alpha) = sigma k*_1(alpha)",
                )),
            }
        }
    }
    for lambda in [0.5, 2.0] {
        for sigma in [0.5, 2.0] {
            let s2 = sigma * sigma;
            let name = format!("sigma={sigma} lambda={lambda} C*");
            let claim = "C*_sigma(lambda) = sigma^2 C*_1(lambda / sigma^2)";
            // The bisection tolerance is a price, which scales with sigma^2.
            match (
                algorithm1_costly(&base, lambda / s2, eps),
                algorithm1_costly(&gm(sigma, 1.0), lambda, eps * s2),
            ) {
                (Ok(o1), Ok(os)) => out.push(Check::numeric(
                    SCALING,
                    name,
                    s2 * o1.cost,
                    os.cost,
                    rel(s2 * o1.cost),
                    claim,
                )),
                (Err(e), _) | (_, Err(e)) => out.push(Check::error(SCALING, name, e, claim)),
            }
        }
    }
    out
}

/// Twelve geometric thresholds between 0.1 and about 8.6.
pub fn k_grid() -> Vec<f64> {
    (0..12).map(|i| 0.1 * 1.5f64.powi(i)).collect()
}

pub fn monotone_in_k() -> Vec<Check> {
    let mut out = Vec::new();
    for beta in [1.0, 0.9] {
        let spec = gm(1.0, beta);
        let values: Result<Vec<(f64, f64, f64)>, _> = k_grid()
            .into_iter()
            .map(|k| {
                let lm = solve_lm_b(&spec, k, &FredholmOptions::default())?;
                let m0 = lm.m.evaluate(0.0);
                Ok::<_, remest_core::Error>((
                    lm.l.evaluate(0.0),
                    m0,
                    1.0 / m0 - spec.beta.complement(),
                ))
            })
            .collect();
        let name = format!("beta={beta} 12-point grid");
        match values {
            Ok(v) => {
                let strict = |f: &dyn Fn(&(f64, f64, f64)) -> f64, up: bool| {
                    v.windows(2).all(|w| {
                        if up {
                            f(&w[1]) > f(&w[0])
                        } else {
                            f(&w[1]) < f(&w[0])
                        }
                    })
                };
                out.push(Check::boolean(
                    SCALING,
                    format!("{name} L(0) increasing"),
                    strict(&|t| t.0, true),
                    "not increasing".into(),
                    "L increasing in k",
                ));
                out.push(Check::boolean(
                    SCALING,
                    format!("{name} M(0) increasing"),
                    strict(&|t| t.1, true),
                    "not increasing".into(),
                    "M increasing in k",
                ));
                out.push(Check::boolean(
                    SCALING,
                    format!("{name} N decreasing"),
                    strict(&|t| t.2, false),
                    "not decreasing".into(),
                    "N decreasing in k",
                ));
            }
            Err(e) => out.push(Check::error(SCALING, name, e, "L, M increasing in k")),
        }
    }
    out
}

pub fn bisection_round_trip() -> Vec<Check> {
    let eps = 1e-4;
    let spec = gm(1.0, 1.0);
    let claim = "threshold from the rate bisection attains alpha";
    [0.2, 0.5, 0.8]
        .into_iter()
        .map(|alpha| {
            let name = format!("alpha={alpha} N(k*)");
            let r = algorithm2_constrained(&spec, alpha, eps)
                .and_then(|o| performance_b(&spec, ThresholdPolicy::new(o.k)?, None));
            match r {
                Ok(p) => Check::numeric(SCALING, name, alpha, p.transmission_rate, eps, claim),
                Err(e) => Check::error(SCALING, name, e, claim),
            }
        })
        .collect()
}

pub fn lambda_positive() -> Vec<Check> {
    let spec = gm(1.0, 1.0);
    let claim = "lambda(k) is positive and increasing";
    let ks = [0.5, 1.0, 2.0, 3.0];
    let ls: Result<Vec<f64>, _> = ks.iter().map(|&k| lambda_of_k(&spec, k)).collect();
    vec![match ls {
        Ok(l) => Check::boolean(
            SCALING,
            "lambda(k) at k=0.5,1,2,3".into(),
            l[0] > 0.0 && l.windows(2).all(|w| w[1] > w[0]),
            format!("{l:?}"),
            claim,
        ),
        Err(e) => Check::error(SCALING, "lambda(k)".into(), e, claim),
    }]
}

/// Compares a simulated mean with its analytic value at three standard errors.
fn mc_check(
    suite: &'static str,
    name: String,
    expected: f64,
    hat: f64,
    se: f64,
    claim: &'static str,
) -> Check {
    let mut c = Check::numeric(suite, name, expected, hat, 3.0 * se, claim);
    if se == 0.0 && (hat - expected).abs() <= 1e-12 * expected.abs().max(1.0) {
        c.status = Status::Pass;
    }
    c
}

const RENEWAL: &str = "renewal";

pub fn renewal(mc: &McSettings) -> Vec<Check> {
    let mut cases: Vec<(String, ModelSpec, f64)> = Vec::new();
    for k in [2.0, 3.0, 5.0] {
        cases.push((format!("birth-death beta=1 k={k}"), bd(1.0).into(), k));
    }
    cases.push(("birth-death beta=0.9 k=3".into(), bd(0.9).into(), 3.0));
    for k in [1.0, 2.0] {
        cases.push((format!("gauss-markov beta=1 k={k}"), gm(1.0, 1.0).into(), k));
    }
    let results: Vec<Vec<Check>> = cases
        .par_iter()
        .map(|(name, spec, k)| {
            let policy = ThresholdPolicy::new(*k).expect("nonnegative threshold");
            let analytic = match spec {
                ModelSpec::A(s) => performance(s, *k as u32, None),
                ModelSpec::B(s) => performance_b(s, policy, None),
            };
            let sim = simulate(spec, &PolicySpec::Threshold(policy), &mc.config());
            match (analytic, sim) {
                (Ok(a), Ok(s)) => vec![
                    mc_check(
                        RENEWAL,
                        format!("{name} D"),
                        a.distortion,
                        s.d_hat,
                        s.d_se,
                        "renewal distortion D = L(0)/M(0)",
                    ),
                    mc_check(
                        RENEWAL,
                        format!("{name} N"),
                        a.transmission_rate,
                        s.n_hat,
                        s.n_se,
                        "renewal rate N = 1/M(0) - (1 - beta)",
                    ),
                ],
                (Err(e), _) | (_, Err(e)) => {
                    vec![Check::error(RENEWAL, name.clone(), e, "renewal relations")]
                }
            }
        })
        .collect();
    results.into_iter().flatten().collect()
}

const DP: &str = "dp";

/// Threshold whose reference price interval `(lambda_(k-1), lambda_k]` contains `lambda`.
pub fn reference_interval_threshold(beta: f64, lambda: f64) -> Option<u32> {
    let (_, rows) = REFERENCE_TABLES.iter().find(|(b, _)| *b == beta)?;
    rows.iter()
        .filter_map(|&(k, _, _, l)| l.map(|l| (k, l)))
        .find(|&(_, l)| lambda <= l)
        .map(|(k, _)| k)
}

pub fn dynamic_programming() -> Vec<Check> {
    let mut out = Vec::new();
    let spec = bd(0.9);
    for lambda in [2.0, 10.0, 20.0, 40.0] {
        let claim = "value iteration yields the optimal symmetric threshold";
        let name = format!("beta=0.9 lambda={lambda} threshold");
        match (
            value_iterate(&spec, lambda, 1e-9),
            optimal_costly(&spec, lambda),
        ) {
            (Ok(dp), Ok(o)) => {
                let k = dp.threshold().map_or(-1, i64::from);
                out.push(Check::exact(
                    DP,
                    format!("{name} vs linear solve"),
                    i64::from(o.k),
                    k,
                    claim,
                ));
                if let Some(k_ref) = reference_interval_threshold(0.9, lambda) {
                    out.push(Check::exact(
                        DP,
                        format!("{name} vs reference price intervals"),
                        i64::from(k_ref),
                        k,
                        claim,
                    ));
                }
            }
            (Err(e), _) | (_, Err(e)) => out.push(Check::error(DP, name, e, claim)),
        }
    }
    let tol = 1e-9;
    for (beta, rows) in REFERENCE_TABLES.iter().take(2) {
        let spec = bd(*beta);
        let claim = "policy-evaluation fixed point equals renewal performance";
        let mut worst_exact = 0.0f64;
        let mut worst_ref = 0.0f64;
        let mut failure = None;
        for &(k, d_ref, n_ref, _) in rows.iter().skip(1) {
            let fp = policy_evaluate_fixed_point(&spec, k, i64::from(k), tol);
            let exact = performance(&spec, k, None);
            match (fp, exact) {
                (Ok((d, n)), Ok(p)) => {
                    worst_exact = worst_exact
                        .max((d - p.distortion).abs())
                        .max((n - p.transmission_rate).abs());
                    worst_ref = worst_ref.max((d - d_ref).abs()).max((n - n_ref).abs());
                }
                (Err(e), _) | (_, Err(e)) => failure = Some(e),
            }
        }
        let name = format!("beta={beta} k=1..10 fixed point");
        match failure {
            Some(e) => out.push(Check::error(DP, name, e, claim)),
            None => {
                out.push(Check::numeric(
                    DP,
                    format!("{name} vs linear solve"),
                    0.0,
                    worst_exact,
                    1e-6,
                    claim,
                ));
                out.push(Check::numeric(
                    DP,
                    format!("{name} vs reference table"),
                    0.0,
                    worst_ref,
                    REFERENCE_TOL,
                    claim,
                ));
            }
        }
    }
    out
}

const BASELINES: &str = "baselines";

/// Rate-`alpha` coin flips on the unit Gauss-Markov walk: `sigma^2 (1/alpha - 1)`.
pub fn iid_distortion(alpha: f64, sigma: f64) -> f64 {
    sigma * sigma * (1.0 / alpha - 1.0)
}

pub fn baselines(mc: &McSettings) -> Vec<Check> {
    let spec: ModelSpec = gm(1.0, 1.0).into();
    let mut jobs: Vec<(String, PolicySpec, f64, f64, &'static str)> = Vec::new();
    let mut out = Vec::new();
    for alpha in [0.25, 0.5] {
        jobs.push((
            format!("iid alpha={alpha}"),
            PolicySpec::IidRandom { alpha },
            iid_distortion(alpha, 1.0),
            alpha,
            "D_rand(alpha) = sigma^2 (1/alpha - 1)",
        ));
    }
    for (family, label) in [
        (PeriodicFamily::OneInT, "one_in_T"),
        (PeriodicFamily::AllButOne, "all_but_one"),
    ] {
        for alpha in [0.25, 0.5, 0.75] {
            let claim = "periodic distortion formula";
            if family == PeriodicFamily::OneInT && alpha == 0.75 {
                continue;
            }
            match (
                periodic_distortion(alpha, 1.0, family),
                periodic_pattern(alpha, family),
            ) {
                (Ok(d), Ok(pattern)) => jobs.push((
                    format!("periodic {label} alpha={alpha}"),
                    PolicySpec::periodic(pattern).expect("valid pattern"),
                    d,
                    alpha,
                    claim,
                )),
                _ => out.push(Check::skip(
                    BASELINES,
                    format!("periodic {label} alpha={alpha}"),
                    "rate not representable in this family",
                    claim,
                )),
            }
        }
    }
    // Deterministic implementations of the constrained optimum.
    let a_spec = bd(1.0);
    let alpha = 0.1;
    match deterministic_policies(&a_spec, alpha) {
        Ok((steering, sharing, d_star)) => {
            for (label, policy) in [("steering", steering), ("time-sharing", sharing)] {
                let name = format!("{label} birth-death beta=1 alpha={alpha}");
                let claim = "deterministic implementation attains (alpha, D*(alpha))";
                match simulate(&a_spec.clone().into(), &policy, &mc.config()) {
                    Ok(s) => {
                        out.push(mc_check(
                            BASELINES,
                            format!("{name} N"),
                            alpha,
                            s.n_hat,
                            s.n_se,
                            claim,
                        ));
                        out.push(mc_check(
                            BASELINES,
                            format!("{name} D"),
                            d_star,
                            s.d_hat,
                            s.d_se,
                            claim,
                        ));
                    }
                    Err(e) => out.push(Check::error(BASELINES, name, e, claim)),
                }
            }
        }
        Err(e) => out.push(Check::error(
            BASELINES,
            "deterministic implementations".into(),
            e,
            "constrained optimum",
        )),
    }
    let sims: Vec<Vec<Check>> = jobs
        .par_iter()
        .map(
            |(name, policy, d, alpha, claim)| match simulate(&spec, policy, &mc.config()) {
                Ok(s) => vec![
                    mc_check(BASELINES, format!("{name} D"), *d, s.d_hat, s.d_se, claim),
                    mc_check(
                        BASELINES,
                        format!("{name} N"),
                        *alpha,
                        s.n_hat,
                        s.n_se,
                        claim,
                    ),
                ],
                Err(e) => vec![Check::error(BASELINES, name.clone(), e, claim)],
            },
        )
        .collect();
    out.extend(sims.into_iter().flatten());
    out.extend(ordering(mc));
    out
}

/// Steering and time-sharing policies meeting `alpha`, and `D*(alpha)`.
pub fn deterministic_policies(
    spec: &ModelSpecA,
    alpha: f64,
) -> remest_core::Result<(PolicySpec, PolicySpec, f64)> {
    let o = optimal_constrained(spec, alpha)?;
    let k = o.policy.k_star;
    let n_k = performance(spec, k, None)?.transmission_rate;
    let n_k1 = performance(spec, k + 1, None)?.transmission_rate;
    let schedule = time_sharing_schedule(alpha, n_k, n_k1, o.policy.theta_star, 3)?;
    Ok((
        PolicySpec::Steering {
            k,
            theta: o.policy.boundary_prob,
        },
        PolicySpec::TimeSharing { k, schedule },
        o.d_star,
    ))
}

/// Threshold beats periodic beats i.i.d. at matched rates, by more than
/// three combined standard errors.
fn ordering(mc: &McSettings) -> Vec<Check> {
    let spec_b = gm(1.0, 1.0);
    let spec: ModelSpec = spec_b.clone().into();
    let claim = "threshold < periodic < i.i.d. distortion at equal rate";
    let mut out = Vec::new();
    for alpha in [0.2, 0.5] {
        let name = format!("ordering alpha={alpha}");
        let policies = algorithm2_constrained(&spec_b, alpha, 1e-6).and_then(|o| {
            Ok([
                PolicySpec::Threshold(ThresholdPolicy::new(o.k)?),
                PolicySpec::periodic(periodic_pattern(alpha, PeriodicFamily::OneInT)?)?,
                PolicySpec::IidRandom { alpha },
            ])
        });
        let sims = policies.and_then(|ps| {
            ps.iter()
                .map(|p| simulate(&spec, p, &mc.config()))
                .collect::<remest_core::Result<Vec<_>>>()
        });
        match sims {
            Ok(s) => {
                let gap = |a: usize, b: usize| {
                    let se = (s[a].d_se.powi(2) + s[b].d_se.powi(2)).sqrt();
                    (s[b].d_hat - s[a].d_hat, 3.0 * se)
                };
                let (g1, t1) = gap(0, 1);
                let (g2, t2) = gap(1, 2);
                out.push(Check::boolean(
                    BASELINES,
                    format!("{name} threshold < periodic"),
                    g1 > t1,
                    format!("gap {g1} <= {t1}"),
                    claim,
                ));
                out.push(Check::boolean(
                    BASELINES,
                    format!("{name} periodic < iid"),
                    g2 > t2,
                    format!("gap {g2} <= {t2}"),
                    claim,
                ));
            }
            Err(e) => out.push(Check::error(BASELINES, name, e, claim)),
        }
    }
    out
}

/// Checks for one suite, in a fixed order.
pub fn run_suite(suite: Suite, mc: &McSettings) -> Vec<Check> {
    match suite {
        Suite::TableI => [table_cells(), worked_examples()].concat(),
        Suite::ClosedForms => {
            [closed_forms(), first_threshold_rate(), corners_and_shape()].concat()
        }
        Suite::Scaling => [
            gauss_markov_scaling(),
            monotone_in_k(),
            bisection_round_trip(),
            lambda_positive(),
        ]
        .concat(),
        Suite::Renewal => renewal(mc),
        Suite::Dp => dynamic_programming(),
        Suite::Baselines => baselines(mc),
        Suite::All => {
            let suites = [
                Suite::TableI,
                Suite::ClosedForms,
                Suite::Scaling,
                Suite::Renewal,
                Suite::Dp,
                Suite::Baselines,
            ];
            let parts: Vec<Vec<Check>> = suites.par_iter().map(|&s| run_suite(s, mc)).collect();
            parts.concat()
        }
    }
}

pub fn checks_to_record(command: String, checks: &[Check], mc: &McSettings) -> OutputRecord {
    let mut rec = OutputRecord::new(
        command,
        &[
            "suite",
            "check",
            "expected",
            "actual",
            "tolerance",
            "status",
            "claim",
        ],
    );
    let failed = checks.iter().filter(|c| c.status == Status::Fail).count();
    rec.meta("seed", mc.seed)
        .meta("replications", mc.replications)
        .meta("horizon", mc.horizon)
        .meta("checks", checks.len() as u64)
        .meta("failed", failed as u64);
    for c in checks {
        rec.push(vec![
            c.suite.into(),
            c.name.clone().into(),
            c.expected.clone(),
            c.actual.clone(),
            c.tolerance.into(),
            c.status.as_str().into(),
            c.claim.into(),
        ]);
    }
    rec
}
