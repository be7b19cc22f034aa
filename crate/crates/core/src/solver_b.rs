//! Solver for the real-valued model.
//!
//! `L` and `M` solve Fredholm equations of the second kind on `(-k, k)` with
//! kernel `phi(n - a e)`; the optimal threshold for a price or a rate
//! constraint is found by bisection on `k`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fredholm::{fredholm_solve_many, FredholmOptions, FredholmSolution, Kernel, Rhs};
use crate::model::{
    CurveKind, CurvePoint, CurveShape, CurveSource, ModelSpecB, PerfPoint, Provenance,
    ThresholdPolicy, TradeoffCurve,
};

/// Maximum bracket expansions or contractions in the bisection algorithms.
pub const MAX_BRACKET_STEPS: usize = 60;

/// Solutions `L` and `M` for one threshold.
#[derive(Debug, Clone)]
pub struct LmFunctions {
    pub l: FredholmSolution,
    pub m: FredholmSolution,
}

fn kernel_of(spec: &ModelSpecB) -> Kernel {
    let pdf = spec.pdf.clone();
    let a = spec.a;
    Arc::new(move |e: f64, n: f64| pdf.density(n - a * e))
}

pub fn solve_lm_b(spec: &ModelSpecB, k: f64, options: &FredholmOptions) -> Result<LmFunctions> {
    let d = spec.distortion.clone();
    let rhs: [Rhs; 2] = [Arc::new(move |e: f64| d.eval(e)), Arc::new(|_| 1.0)];
    let mut out = fredholm_solve_many(kernel_of(spec), &rhs, k, spec.beta, options)?;
    let m = out.pop().unwrap();
    let l = out.pop().unwrap();
    Ok(LmFunctions { l, m })
}

/// `(D, N, C)` of the threshold policy with real threshold `k`.
pub fn performance_b(
    spec: &ModelSpecB,
    k: impl Into<ThresholdPolicy>,
    lambda: Option<f64>,
) -> Result<PerfPoint> {
    performance_b_with(spec, k.into(), lambda, &FredholmOptions::default())
}

pub fn performance_b_with(
    spec: &ModelSpecB,
    policy: ThresholdPolicy,
    lambda: Option<f64>,
    options: &FredholmOptions,
) -> Result<PerfPoint> {
    let k = policy.k();
    let point = if k == 0.0 {
        PerfPoint::new(0.0, 1.0, Provenance::Analytic)
    } else if policy.is_never() {
        PerfPoint::new(
            never_transmit_distortion(spec, options)?,
            0.0,
            Provenance::Analytic,
        )
    } else {
        let lm = solve_lm_b(spec, k, options)?;
        let (l0, m0) = (lm.l.evaluate(0.0), lm.m.evaluate(0.0));
        PerfPoint::new(
            l0 / m0,
            1.0 / m0 - spec.beta.complement(),
            Provenance::Analytic,
        )
    };
    Ok(point.priced(lambda))
}

fn never_transmit_distortion(spec: &ModelSpecB, options: &FredholmOptions) -> Result<f64> {
    if spec.beta.is_average() && spec.a.abs() >= 1.0 {
        return Err(Error::Divergence(
            "long-term average distortion of the never-transmit policy diverges for |a| >= 1"
                .into(),
        ));
    }
    let mut k = 4.0 * spec.pdf.scale() * spec.a.abs().max(1.0);
    let mut prev = performance_b_with(spec, ThresholdPolicy::new(k)?, None, options)?.distortion;
    let mut change = f64::INFINITY;
    for _ in 0..8 {
        k *= 2.0;
        let next = performance_b_with(spec, ThresholdPolicy::new(k)?, None, options)?.distortion;
        change = (next - prev).abs();
        if change <= 1e-9 * next.abs().max(1.0) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::NonConvergence {
        iterations: 8,
        last_change: change,
    })
}

/// Default finite-difference step `min(max(1e-3, 1e-2 k), k / 2)`.
pub fn default_step(k: f64) -> f64 {
    (1e-2 * k).max(1e-3).min(0.5 * k)
}

/// `(dD/dk, dN/dk)` by central differences with one Richardson level.
pub fn dk_derivatives(spec: &ModelSpecB, k: f64, step: f64) -> Result<(f64, f64)> {
    dk_derivatives_with(spec, k, step, &FredholmOptions::default())
}

pub fn dk_derivatives_with(
    spec: &ModelSpecB,
    k: f64,
    step: f64,
    options: &FredholmOptions,
) -> Result<(f64, f64)> {
    if !(step > 0.0 && k - step > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < step < k, got step={step}, k={k}"
        )));
    }
    // Solver noise of size tol divided by the step must stay well below 1e-4.
    if step < 1e4 * options.tolerance {
        return Err(Error::StepTooSmall {
            step,
            tolerance: options.tolerance,
        });
    }
    let perf = |x: f64| performance_b_with(spec, ThresholdPolicy::new(x)?, None, options);
    let central = |h: f64| -> Result<(f64, f64)> {
        let (p, m) = (perf(k + h)?, perf(k - h)?);
        Ok((
            (p.distortion - m.distortion) / (2.0 * h),
            (p.transmission_rate - m.transmission_rate) / (2.0 * h),
        ))
    };
    let (d1, n1) = central(step)?;
    let (d2, n2) = central(0.5 * step)?;
    Ok(((4.0 * d2 - d1) / 3.0, (4.0 * n2 - n1) / 3.0))
}

/// Price `-D'(k) / N'(k)` at which the threshold `k` is optimal.
pub fn lambda_of_k(spec: &ModelSpecB, k: f64) -> Result<f64> {
    lambda_of_k_with(spec, k, &FredholmOptions::default())
}

pub fn lambda_of_k_with(spec: &ModelSpecB, k: f64, options: &FredholmOptions) -> Result<f64> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "k must be positive, got {k}"
        )));
    }
    let (dd, dn) = dk_derivatives_with(spec, k, default_step(k), options)?;
    if !(dn < 0.0) {
        return Err(Error::Internal(format!(
            "transmission rate not decreasing at k={k} (dN/dk={dn:e})"
        )));
    }
    Ok(-dd / dn)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostlyOptimumB {
    pub k: f64,
    pub cost: f64,
    pub performance: PerfPoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstrainedOptimumB {
    pub k: f64,
    pub d_star: f64,
    pub performance: PerfPoint,
}

fn seed(spec: &ModelSpecB) -> f64 {
    spec.pdf.scale() * spec.a.abs().max(1.0)
}

/// Brackets the root of an increasing function `g` by doubling or halving
/// `k` from `seed`, then bisects until `accept(g(k))` holds.
fn bisect_increasing<G, A>(seed: f64, target: f64, mut g: G, accept: A) -> Result<(f64, f64)>
where
    G: FnMut(f64) -> Result<f64>,
    A: Fn(f64) -> bool,
{
    let mut k = seed;
    let mut gk = g(k)?;
    if accept(gk) {
        return Ok((k, gk));
    }
    let (mut lo, mut hi);
    let mut steps = 0;
    if gk < target {
        lo = k;
        loop {
            steps += 1;
            if steps > MAX_BRACKET_STEPS {
                return Err(Error::Bracket {
                    target,
                    expansions: MAX_BRACKET_STEPS,
                });
            }
            k *= 2.0;
            gk = g(k)?;
            if accept(gk) {
                return Ok((k, gk));
            }
            if gk > target {
                hi = k;
                break;
            }
            lo = k;
        }
    } else {
        hi = k;
        loop {
            steps += 1;
            if steps > MAX_BRACKET_STEPS {
                return Err(Error::Bracket {
                    target,
                    expansions: MAX_BRACKET_STEPS,
                });
            }
            k *= 0.5;
            gk = g(k)?;
            if accept(gk) {
                return Ok((k, gk));
            }
            if gk < target {
                lo = k;
                break;
            }
            hi = k;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid)?;
        if accept(gm) {
            return Ok((mid, gm));
        }
        if gm < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            return Err(Error::NonConvergence {
                iterations: 200,
                last_change: (gm - target).abs(),
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: 200,
        last_change: hi - lo,
    })
}

/// Optimal threshold `k` with `|lambda(k) - lambda| <= epsilon`, and the cost
/// `D + lambda N` there.
pub fn algorithm1_costly(spec: &ModelSpecB, lambda: f64, epsilon: f64) -> Result<CostlyOptimumB> {
    if !(lambda > 0.0 && lambda.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need lambda > 0 and epsilon > 0, got lambda={lambda}, epsilon={epsilon}"
        )));
    }
    let opts = FredholmOptions::default();
    let (k, _) = bisect_increasing(
        seed(spec),
        lambda,
        |k| lambda_of_k_with(spec, k, &opts),
        |l| (l - lambda).abs() <= epsilon,
    )?;
    let performance = performance_b_with(spec, ThresholdPolicy::new(k)?, Some(lambda), &opts)?;
    Ok(CostlyOptimumB {
        k,
        cost: performance.distortion + lambda * performance.transmission_rate,
        performance,
    })
}

/// Threshold `k` with `|N(k) - alpha| <= epsilon` and `D*(alpha) = D(k)`.
pub fn algorithm2_constrained(
    spec: &ModelSpecB,
    alpha: f64,
    epsilon: f64,
) -> Result<ConstrainedOptimumB> {
    if !(alpha > 0.0 && alpha < 1.0 && epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < alpha < 1 and epsilon > 0, got alpha={alpha}, epsilon={epsilon}"
        )));
    }
    let opts = FredholmOptions::default();
    // N decreases in k, so bisect on -N.
    let (k, _) = bisect_increasing(
        seed(spec),
        -alpha,
        |k| Ok(-performance_b_with(spec, ThresholdPolicy::new(k)?, None, &opts)?.transmission_rate),
        |neg_n| (neg_n + alpha).abs() <= epsilon,
    )?;
    let performance = performance_b_with(spec, ThresholdPolicy::new(k)?, None, &opts)?;
    Ok(ConstrainedOptimumB {
        k,
        d_star: performance.distortion,
        performance,
    })
}

fn source_of(spec: &ModelSpecB) -> CurveSource {
    match spec.gauss_markov_sigma() {
        Some(sigma) => CurveSource::GaussMarkov {
            sigma,
            a: spec.a,
            beta: spec.beta.value(),
        },
        None => CurveSource::RealModel,
    }
}

/// Curve sampled at the thresholds `ks`.
///
/// Costly points are `(lambda(k), D + lambda(k) N)`; constrained points are
/// `(N(k), D(k))`.
pub fn tradeoff_curve_b(spec: &ModelSpecB, kind: CurveKind, ks: &[f64]) -> Result<TradeoffCurve> {
    if ks.is_empty() {
        return Err(Error::InvalidArgument("need at least one threshold".into()));
    }
    if ks.windows(2).any(|w| !(w[1] > w[0])) || !(ks[0] > 0.0) {
        return Err(Error::InvalidArgument(
            "thresholds must be positive and increasing".into(),
        ));
    }
    let opts = FredholmOptions::default();
    let mut points = Vec::with_capacity(ks.len());
    for &k in ks {
        let p = performance_b_with(spec, ThresholdPolicy::new(k)?, None, &opts)?;
        points.push(match kind {
            CurveKind::Costly => {
                let lambda = lambda_of_k_with(spec, k, &opts)?;
                CurvePoint {
                    abscissa: lambda,
                    ordinate: p.distortion + lambda * p.transmission_rate,
                    threshold: k,
                }
            }
            CurveKind::Constrained => CurvePoint {
                abscissa: p.transmission_rate,
                ordinate: p.distortion,
                threshold: k,
            },
        });
    }
    if kind == CurveKind::Constrained {
        points.reverse();
    }
    TradeoffCurve::new(kind, CurveShape::Sampled, source_of(spec), points)
}

/// Maps a curve for the unit-variance Gauss-Markov instance to variance
/// `sigma^2`: prices and values scale by `sigma^2`, thresholds by `sigma`,
/// rates are unchanged.
pub fn gauss_markov_rescale(base: &TradeoffCurve, sigma: f64) -> Result<TradeoffCurve> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let CurveSource::GaussMarkov { sigma: s0, a, beta } = base.source else {
        return Err(Error::InvalidArgument(
            "rescaling needs a Gauss-Markov curve with quadratic distortion".into(),
        ));
    };
    if s0 != 1.0 {
        return Err(Error::InvalidArgument(format!(
            "rescaling needs a curve computed at sigma = 1, got {s0}"
        )));
    }
    let s2 = sigma * sigma;
    let points = base
        .points()
        .iter()
        .map(|p| match base.kind {
            CurveKind::Costly => CurvePoint {
                abscissa: s2 * p.abscissa,
                ordinate: s2 * p.ordinate,
                threshold: sigma * p.threshold,
            },
            CurveKind::Constrained => CurvePoint {
                abscissa: p.abscissa,
                ordinate: s2 * p.ordinate,
                threshold: sigma * p.threshold,
            },
        })
        .collect();
    TradeoffCurve::new(
        base.kind,
        base.shape,
        CurveSource::GaussMarkov { sigma, a, beta },
        points,
    )
}
