//! Value-iteration oracle for the discounted integer model.
//!
//! States `-B..=B` are kept explicitly; every state outside collapses into
//! one exterior state where transmission is forced. That is exact once `B`
//! covers the radius `e_0` beyond which transmitting is always optimal.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelSpecA;

const MAX_ITERATIONS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedDP {
    pub bound: i64,
    pub lambda: f64,
    pub beta: f64,
    /// Values for `e = -B..=B`, followed by the exterior state.
    pub value: Vec<f64>,
    /// `true` where transmitting is greedy-optimal, same indexing.
    pub transmit: Vec<bool>,
    pub iterations: usize,
    /// Bound on the value error caused by truncated pmf tail mass.
    pub tail_error_bound: f64,
}

impl TruncatedDP {
    pub fn value_at(&self, e: i64) -> f64 {
        if e.abs() > self.bound {
            *self.value.last().unwrap()
        } else {
            self.value[(e + self.bound) as usize]
        }
    }

    pub fn transmits_at(&self, e: i64) -> bool {
        e.abs() > self.bound || self.transmit[(e + self.bound) as usize]
    }

    /// `Some(k)` iff the greedy policy is exactly "transmit iff `|e| >= k`".
    pub fn threshold(&self) -> Option<u32> {
        let k = (0..=self.bound).find(|&e| self.transmits_at(e))?;
        let consistent = (-self.bound..=self.bound).all(|e| self.transmits_at(e) == (e.abs() >= k));
        consistent.then_some(k as u32)
    }
}

/// `e_0 = min{e >= 0 : d(e) >= lambda / (1 - beta)}`.
pub fn compactification_radius(spec: &ModelSpecA, lambda: f64) -> Result<i64> {
    let beta = spec.beta.value();
    let target = lambda / (1.0 - beta);
    (0..=1_000_000i64)
        .find(|&e| spec.distortion.eval(e as f64) >= target)
        .ok_or_else(|| Error::InvalidArgument(format!("distortion never reaches {target}")))
}

/// Default truncation bound: one silent step from inside `e_0` stays inside.
pub fn default_bound(spec: &ModelSpecA, lambda: f64) -> Result<i64> {
    let e0 = compactification_radius(spec, lambda)?;
    Ok((spec.a.abs() * e0 + spec.pmf.radius() + 1).max(e0 + 1))
}

pub fn value_iterate(spec: &ModelSpecA, lambda: f64, tol: f64) -> Result<TruncatedDP> {
    value_iterate_with_bound(spec, lambda, tol, default_bound(spec, lambda)?)
}

pub fn value_iterate_with_bound(
    spec: &ModelSpecA,
    lambda: f64,
    tol: f64,
    bound: i64,
) -> Result<TruncatedDP> {
    let beta = spec.beta.value();
    if spec.beta.is_average() {
        return Err(Error::InvalidArgument(
            "value iteration needs beta < 1".into(),
        ));
    }
    if !(lambda >= 0.0 && lambda.is_finite() && tol > 0.0 && bound >= 1) {
        return Err(Error::InvalidArgument(format!(
            "need lambda >= 0, tol > 0, bound >= 1; got {lambda}, {tol}, {bound}"
        )));
    }
    let dim = (2 * bound + 1) as usize;
    let ext = dim;
    let idx = |e: i64| {
        if e.abs() > bound {
            ext
        } else {
            (e + bound) as usize
        }
    };
    let pmf: Vec<(i64, f64)> = spec.pmf.iter().collect();
    let cost: Vec<f64> = (-bound..=bound)
        .map(|e| spec.distortion.eval(e as f64))
        .collect();
    // Successor indices after a silent step from each interior state.
    let silent_next: Vec<Vec<(usize, f64)>> = (-bound..=bound)
        .map(|e| pmf.iter().map(|&(n, p)| (idx(spec.a * e + n), p)).collect())
        .collect();
    let reset_next: Vec<(usize, f64)> = pmf.iter().map(|&(n, p)| (idx(n), p)).collect();
    let expect =
        |v: &[f64], next: &[(usize, f64)]| next.iter().map(|&(j, p)| p * v[j]).sum::<f64>();

    let stop = tol * (1.0 - beta) / (2.0 * beta);
    let mut v = vec![0.0; dim + 1];
    let mut next = vec![0.0; dim + 1];
    let mut iterations = 0;
    loop {
        iterations += 1;
        let transmit_value = lambda + beta * expect(&v, &reset_next);
        for i in 0..dim {
            let silent_value = cost[i] + beta * expect(&v, &silent_next[i]);
            next[i] = silent_value.min(transmit_value);
        }
        next[ext] = transmit_value;
        let diff = v
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut v, &mut next);
        if diff <= stop {
            break;
        }
        if iterations >= MAX_ITERATIONS {
            return Err(Error::NonConvergence {
                iterations,
                last_change: diff,
            });
        }
    }

    let transmit_value = lambda + beta * expect(&v, &reset_next);
    let mut transmit: Vec<bool> = (0..dim)
        .map(|i| {
            let silent_value = cost[i] + beta * expect(&v, &silent_next[i]);
            // Ties stay silent.
            transmit_value < silent_value
        })
        .collect();
    transmit.push(true);
    if !transmit[0] || !transmit[dim - 1] {
        return Err(Error::BoundTooSmall { bound });
    }
    let max_cost = cost.iter().fold(lambda, |m, &c| m.max(c));
    Ok(TruncatedDP {
        bound,
        lambda,
        beta,
        value: v,
        transmit,
        iterations,
        tail_error_bound: spec.pmf.truncated_mass() * max_cost / ((1.0 - beta) * (1.0 - beta)),
    })
}

/// `(D^(k), N^(k))` at `e = 0` by iterating the normalized policy-evaluation
/// fixed points on `-bound..=bound`; states outside behave like `|e| >= k`.
pub fn policy_evaluate_fixed_point(
    spec: &ModelSpecA,
    k: u32,
    bound: i64,
    tol: f64,
) -> Result<(f64, f64)> {
    let beta = spec.beta.value();
    if spec.beta.is_average() {
        return Err(Error::InvalidArgument(
            "fixed-point evaluation needs beta < 1".into(),
        ));
    }
    if k == 0 {
        return Ok((0.0, 1.0));
    }
    let ki = i64::from(k);
    if bound < ki || !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need bound >= k and tol > 0; got bound={bound}, k={k}, tol={tol}"
        )));
    }
    let dim = (2 * bound + 1) as usize;
    let ext = dim;
    let idx = |e: i64| {
        if e.abs() > bound {
            ext
        } else {
            (e + bound) as usize
        }
    };
    let pmf: Vec<(i64, f64)> = spec.pmf.iter().collect();
    let transmits: Vec<bool> = (-bound..=bound)
        .map(|e| e.abs() >= ki)
        .chain([true])
        .collect();
    let succ: Vec<Vec<(usize, f64)>> = (-bound..=bound)
        .chain([bound + 1])
        .enumerate()
        .map(|(i, e)| {
            let centre = if transmits[i] { 0 } else { spec.a * e };
            pmf.iter().map(|&(n, p)| (idx(centre + n), p)).collect()
        })
        .collect();
    let cost: Vec<(f64, f64)> = (-bound..=bound)
        .chain([bound + 1])
        .enumerate()
        .map(|(i, e)| {
            if transmits[i] {
                (0.0, 1.0)
            } else {
                (spec.distortion.eval(e as f64), 0.0)
            }
        })
        .collect();

    let (mut d, mut n) = (vec![0.0; dim + 1], vec![0.0; dim + 1]);
    let (mut d_next, mut n_next) = (d.clone(), n.clone());
    for iteration in 1..=MAX_ITERATIONS {
        let mut diff = 0.0f64;
        for i in 0..=dim {
            let (ed, en) = succ[i]
                .iter()
                .fold((0.0, 0.0), |(a, b), &(j, p)| (a + p * d[j], b + p * n[j]));
            d_next[i] = (1.0 - beta) * cost[i].0 + beta * ed;
            n_next[i] = (1.0 - beta) * cost[i].1 + beta * en;
            diff = diff
                .max((d_next[i] - d[i]).abs())
                .max((n_next[i] - n[i]).abs());
        }
        std::mem::swap(&mut d, &mut d_next);
        std::mem::swap(&mut n, &mut n_next);
        if beta / (1.0 - beta) * diff <= tol {
            let zero = idx(0);
            return Ok((d[zero], n[zero]));
        }
        if iteration == MAX_ITERATIONS {
            return Err(Error::NonConvergence {
                iterations: iteration,
                last_change: diff,
            });
        }
    }
    unreachable!()
}
