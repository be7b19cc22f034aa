//! Reference strategies and deterministic implementations of the randomized
//! optimal policy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeriodicFamily {
    /// One transmission every `T` steps, `alpha = 1 / T`.
    OneInT,
    /// Silent once every `T` steps, `alpha = (T - 1) / T`.
    AllButOne,
}

fn period_of(alpha: f64, family: PeriodicFamily) -> Result<u32> {
    let t = match family {
        PeriodicFamily::OneInT => 1.0 / alpha,
        PeriodicFamily::AllButOne => 1.0 / (1.0 - alpha),
    };
    let rounded = t.round();
    let min_period = match family {
        PeriodicFamily::OneInT => 1.0,
        PeriodicFamily::AllButOne => 2.0,
    };
    if !(alpha > 0.0 && alpha < 1.0 || alpha == 1.0 && family == PeriodicFamily::OneInT)
        || (t - rounded).abs() > 1e-9 * rounded
        || rounded < min_period
        || rounded > f64::from(u32::MAX)
    {
        return Err(Error::InvalidArgument(format!(
            "rate {alpha} is not of the form required by the {family:?} periodic family"
        )));
    }
    Ok(rounded as u32)
}

/// Transmission pattern over one period for the given family and rate.
pub fn periodic_pattern(alpha: f64, family: PeriodicFamily) -> Result<Vec<bool>> {
    let t = period_of(alpha, family)? as usize;
    Ok((0..t)
        .map(|i| match family {
            PeriodicFamily::OneInT => i == 0,
            PeriodicFamily::AllButOne => i != 0,
        })
        .collect())
}

/// Long-run squared-error distortion of periodic transmission for a
/// Gaussian random walk with innovation scale `sigma`.
pub fn periodic_distortion(alpha: f64, sigma: f64, family: PeriodicFamily) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    period_of(alpha, family)?;
    let s2 = sigma * sigma;
    Ok(match family {
        PeriodicFamily::OneInT => 0.5 * s2 * (1.0 / alpha - 1.0),
        PeriodicFamily::AllButOne => s2 * (1.0 - alpha),
    })
}

/// Distortion `(sigma^2 / 2) (E tau^2 / E tau - 1)` of a stationary policy
/// whose inter-transmission times `tau` are i.i.d. and independent of the
/// state (random walk, squared error, long-run average).
pub fn stationary_stopping_distortion(
    tau_mean: f64,
    tau_second_moment: f64,
    sigma: f64,
) -> Result<f64> {
    if !(tau_mean >= 1.0 && tau_second_moment >= tau_mean * tau_mean * (1.0 - 1e-12)) {
        return Err(Error::InvalidArgument(format!(
            "need E tau >= 1 and E tau^2 >= (E tau)^2, got {tau_mean}, {tau_second_moment}"
        )));
    }
    Ok(0.5 * sigma * sigma * (tau_second_moment / tau_mean - 1.0))
}

/// Boundary-visit action counts `(a0, a1)`: silent and transmit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SteeringCounters {
    pub a0: u64,
    pub a1: u64,
}

/// Deterministic boundary rule whose action frequencies track `theta`.
///
/// Off the boundary it acts like the threshold rule. At `|e| = k` it picks
/// the action `i` maximizing `theta_i - (a_i + 1) / (a_0 + a_1 + 1)`, where
/// `theta_1 = theta` and `theta_0 = 1 - theta`; ties transmit.
pub fn steering_policy_step(
    counters: SteeringCounters,
    e: f64,
    k: f64,
    theta: f64,
) -> (bool, SteeringCounters) {
    let m = e.abs();
    if m != k {
        return (m > k, counters);
    }
    let denom = (counters.a0 + counters.a1 + 1) as f64;
    let gain1 = theta - (counters.a1 + 1) as f64 / denom;
    let gain0 = (1.0 - theta) - (counters.a0 + 1) as f64 / denom;
    let transmit = gain1 >= gain0;
    let mut next = counters;
    if transmit {
        next.a1 += 1;
    } else {
        next.a0 += 1;
    }
    (transmit, next)
}

/// Best rational approximation `p / q` of `x` in `[0, 1]` with `q <= q_max`,
/// from continued-fraction convergents and semiconvergents.
pub fn best_rational(x: f64, q_max: u64) -> (u64, u64) {
    let x = x.clamp(0.0, 1.0);
    let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
    let mut y = x;
    loop {
        let a = y.floor();
        let a_int = a as u64;
        let q2 = q0.saturating_add(a_int.saturating_mul(q1));
        if q2 > q_max {
            let t = (q_max - q0) / q1.max(1);
            let (ps, qs) = (p0 + t * p1, q0 + t * q1);
            let err = |p: u64, q: u64| (x - p as f64 / q as f64).abs();
            if q1 == 0 || (qs > 0 && err(ps, qs) < err(p1, q1)) {
                return (ps, qs);
            }
            return (p1, q1);
        }
        let p2 = p0 + a_int * p1;
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = y - a;
        if frac <= 1e-15 || (x - p1 as f64 / q1 as f64).abs() <= 1e-15 {
            return (p1, q1);
        }
        y = 1.0 / frac;
    }
}

/// Constant schedule `[(a, b)]`: `a` cycles under `f^(k)` then `b` under
/// `f^(k+1)`, with `a / (a + b)` the best approximation of
/// `theta n_k / alpha` with denominator at most `10^depth`.
///
/// With cycles delimited by transmissions, that fraction of `f^(k)` cycles
/// gives long-run rate `alpha` and distortion
/// `theta D^(k) + (1 - theta) D^(k+1)`.
pub fn time_sharing_schedule(
    alpha: f64,
    n_k: f64,
    n_k1: f64,
    theta: f64,
    depth: u32,
) -> Result<Vec<(u64, u64)>> {
    if !(n_k > n_k1) || !(0.0..=1.0).contains(&theta) || !(alpha > 0.0) || depth == 0 || depth > 18
    {
        return Err(Error::InvalidArgument(format!(
            "need n_k > n_k1, theta in [0, 1], alpha > 0, 1 <= depth <= 18; got n_k={n_k}, n_k1={n_k1}, theta={theta}, alpha={alpha}, depth={depth}"
        )));
    }
    let ratio = (theta * n_k / alpha).clamp(0.0, 1.0);
    let (p, q) = best_rational(ratio, 10u64.pow(depth));
    Ok(vec![(p, q - p)])
}
