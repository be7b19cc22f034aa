//! Nyström solution of `v(e) = h(e) + beta * int_{-k}^{k} K(e, n) v(n) dn`.
//!
//! The quadrature uses one Gauss-Legendre panel on each side of 0 so that
//! distortions with a kink at 0, such as `|e|`, keep spectral convergence.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::Factored;
use crate::model::DiscountFactor;
use crate::quadrature::QuadratureGrid;

pub type Kernel = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type Rhs = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Number of off-node points at which the residual is checked.
pub const RESIDUAL_PROBES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FredholmOptions {
    /// Stop once successive values at 0 differ by less than
    /// `tolerance * max(1, |v(0)|)`.
    pub tolerance: f64,
    /// Nodes per panel in the first solve.
    pub initial_order: usize,
    /// Refinements `n -> 2n - 1` allowed after the initial solve.
    pub max_doublings: usize,
    /// Hard cap on nodes per panel; the dense system needs `32 n^2` bytes.
    pub max_order: usize,
}

impl Default for FredholmOptions {
    fn default() -> Self {
        FredholmOptions {
            tolerance: 1e-10,
            initial_order: 33,
            max_doublings: 12,
            max_order: 2049,
        }
    }
}

#[derive(Clone)]
pub struct FredholmSolution {
    grid: QuadratureGrid,
    beta: f64,
    kernel: Kernel,
    rhs: Rhs,
    values: Vec<f64>,
    residual: f64,
    last_change: f64,
}

impl fmt::Debug for FredholmSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FredholmSolution")
            .field("k", &self.k())
            .field("order", &self.grid.order())
            .field("residual", &self.residual)
            .field("last_change", &self.last_change)
            .finish()
    }
}

impl FredholmSolution {
    pub fn k(&self) -> f64 {
        self.grid.half_width()
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    pub fn values_at_nodes(&self) -> &[f64] {
        &self.values
    }

    /// Nyström interpolant `h(e) + beta * sum_j w_j K(e, x_j) v_j`.
    pub fn evaluate(&self, e: f64) -> f64 {
        let integral: f64 = self
            .grid
            .nodes()
            .iter()
            .zip(self.grid.weights())
            .zip(&self.values)
            .map(|((&x, &w), &v)| w * (self.kernel)(e, x) * v)
            .sum();
        (self.rhs)(e) + self.beta * integral
    }

    /// Largest residual found at the off-node probes.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Change in `v(0)` at the final refinement.
    pub fn last_change(&self) -> f64 {
        self.last_change
    }

    /// Residual of the integral equation at `probes` interior points, with the
    /// integral evaluated by an independent, finer composite rule.
    fn probe_residual(&self, probes: usize) -> Result<f64> {
        let k = self.k();
        let fine = QuadratureGrid::split_gauss_legendre(k, self.grid.order() + 1)?;
        let v_fine: Vec<f64> = fine.nodes().iter().map(|&x| self.evaluate(x)).collect();
        let mut worst = 0.0f64;
        for i in 0..probes {
            // Midpoints of an even partition avoid the rule's nodes except by accident.
            let e = -k + 2.0 * k * (i as f64 + 0.5) / probes as f64;
            let integral: f64 = fine
                .nodes()
                .iter()
                .zip(fine.weights())
                .zip(&v_fine)
                .map(|((&x, &w), &v)| w * (self.kernel)(e, x) * v)
                .sum();
            let r = self.evaluate(e) - (self.rhs)(e) - self.beta * integral;
            worst = worst.max(r.abs());
        }
        Ok(worst)
    }
}

/// Solves for a single right-hand side.
pub fn fredholm_solve(
    kernel: Kernel,
    rhs: Rhs,
    k: f64,
    beta: DiscountFactor,
    options: &FredholmOptions,
) -> Result<FredholmSolution> {
    let mut out = fredholm_solve_many(kernel, &[rhs], k, beta, options)?;
    Ok(out.pop().unwrap())
}

/// Solves for several right-hand sides sharing one factorization per order.
/// Refinement continues until every solution has stabilized at 0.
pub fn fredholm_solve_many(
    kernel: Kernel,
    rhs: &[Rhs],
    k: f64,
    beta: DiscountFactor,
    options: &FredholmOptions,
) -> Result<Vec<FredholmSolution>> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "k must be positive, got {k}"
        )));
    }
    if !(options.tolerance > 0.0) || options.initial_order == 0 {
        return Err(Error::InvalidArgument("invalid quadrature options".into()));
    }
    let b = beta.value();
    let mut order = options.initial_order.min(options.max_order);
    let mut previous: Option<Vec<f64>> = None;
    let mut last_change = f64::INFINITY;
    for doubling in 0..=options.max_doublings {
        let grid = QuadratureGrid::split_gauss_legendre(k, order)?;
        let values = nystrom_values(&*kernel, rhs, &grid, b)?;
        let at_zero: Vec<f64> = values
            .iter()
            .zip(rhs)
            .map(|(v, h)| interpolate(&*kernel, &**h, &grid, b, v, 0.0))
            .collect();
        if let Some(prev) = &previous {
            last_change = at_zero
                .iter()
                .zip(prev)
                .map(|(x, y)| (x - y).abs() / x.abs().max(1.0))
                .fold(0.0, f64::max);
            if last_change < options.tolerance {
                let mut out = Vec::with_capacity(rhs.len());
                for (v, h) in values.into_iter().zip(rhs) {
                    let mut sol = FredholmSolution {
                        grid: grid.clone(),
                        beta: b,
                        kernel: kernel.clone(),
                        rhs: h.clone(),
                        values: v,
                        residual: 0.0,
                        last_change,
                    };
                    sol.residual = sol.probe_residual(RESIDUAL_PROBES)?;
                    let scale = sol.values.iter().fold(1.0f64, |m, x| m.max(x.abs()));
                    if sol.residual > options.tolerance * scale {
                        return Err(Error::NonConvergence {
                            iterations: doubling,
                            last_change: sol.residual / scale,
                        });
                    }
                    out.push(sol);
                }
                return Ok(out);
            }
        }
        previous = Some(at_zero);
        if order >= options.max_order {
            return Err(Error::NonConvergence {
                iterations: doubling,
                last_change,
            });
        }
        order = (2 * order - 1).min(options.max_order);
    }
    Err(Error::NonConvergence {
        iterations: options.max_doublings,
        last_change,
    })
}

fn nystrom_values(
    kernel: &(dyn Fn(f64, f64) -> f64 + Send + Sync),
    rhs: &[Rhs],
    grid: &QuadratureGrid,
    beta: f64,
) -> Result<Vec<Vec<f64>>> {
    let n = grid.order();
    let (x, w) = (grid.nodes(), grid.weights());
    let a = DMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        delta - beta * w[j] * kernel(x[i], x[j])
    });
    let f = Factored::new(a)?;
    rhs.iter()
        .map(|h| {
            let b = DVector::from_iterator(n, x.iter().map(|&e| h(e)));
            Ok(f.solve(&b)?.iter().copied().collect())
        })
        .collect()
}

fn interpolate(
    kernel: &(dyn Fn(f64, f64) -> f64 + Send + Sync),
    rhs: &(dyn Fn(f64) -> f64 + Send + Sync),
    grid: &QuadratureGrid,
    beta: f64,
    values: &[f64],
    e: f64,
) -> f64 {
    let s: f64 = grid
        .nodes()
        .iter()
        .zip(grid.weights())
        .zip(values)
        .map(|((&x, &w), &v)| w * kernel(e, x) * v)
        .sum();
    rhs(e) + beta * s
}
