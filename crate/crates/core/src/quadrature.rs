//! Gauss-Legendre rules on symmetric intervals.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Nodes and weights of an `order`-point Gauss-Legendre rule on `(-k, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    half_width: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureGrid {
    pub fn gauss_legendre(half_width: f64, order: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "quadrature half-width must be positive, got {half_width}"
            )));
        }
        if order == 0 {
            return Err(Error::InvalidArgument(
                "quadrature order must be positive".into(),
            ));
        }
        let (x, w) = legendre_rule(order);
        Ok(QuadratureGrid {
            half_width,
            nodes: x.iter().map(|t| t * half_width).collect(),
            weights: w.iter().map(|v| v * half_width).collect(),
        })
    }

    /// Composite rule with an `order`-point Gauss-Legendre panel on each of
    /// `(-k, 0)` and `(0, k)`, for integrands with a kink at 0.
    pub fn split_gauss_legendre(half_width: f64, order: usize) -> Result<Self> {
        let half = Self::gauss_legendre(0.5 * half_width, order)?;
        let shift = 0.5 * half_width;
        let nodes = half
            .nodes
            .iter()
            .map(|x| x - shift)
            .chain(half.nodes.iter().map(|x| x + shift))
            .collect();
        let weights = half.weights.iter().chain(&half.weights).copied().collect();
        Ok(QuadratureGrid {
            half_width,
            nodes,
            weights,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// `order`-point Gauss-Legendre integral of `f` over `[lo, hi]`.
pub fn integrate<F: Fn(f64) -> f64>(lo: f64, hi: f64, order: usize, f: F) -> f64 {
    let (x, w) = legendre_rule(order);
    let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    x.iter()
        .zip(&w)
        .map(|(&t, &wt)| wt * f(mid + half * t))
        .sum::<f64>()
        * half
}

/// Nodes (ascending) and weights on `[-1, 1]`.
///
/// Newton iteration on the three-term recurrence from Tricomi's initial
/// guesses; nodes are computed for the nonnegative half and mirrored so the
/// rule is exactly symmetric.
fn legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let m = n.div_ceil(2);
    for i in 0..m {
        // i-th root counted from +1.
        let theta = PI * (4.0 * (i as f64) + 3.0) / (4.0 * nf + 2.0);
        let mut t = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, t);
            dp = d;
            let dt = p / d;
            t -= dt;
            if dt.abs() <= 4.0 * f64::EPSILON * t.abs().max(1.0) {
                dp = legendre_with_derivative(n, t).1;
                break;
            }
        }
        let weight = 2.0 / ((1.0 - t * t) * dp * dp);
        x[n - 1 - i] = t;
        w[n - 1 - i] = weight;
        x[i] = -t;
        w[i] = weight;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * t * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}
