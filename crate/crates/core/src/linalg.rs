//! Dense LU solves with a conditioning guard and one refinement step.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Systems whose estimated reciprocal condition number falls below this are
/// reported as singular.
pub const RCOND_FLOOR: f64 = 1e-13;

pub(crate) struct Factored {
    matrix: DMatrix<f64>,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    rcond: f64,
}

impl Factored {
    pub(crate) fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        let lu = matrix.clone().lu();
        if !lu.is_invertible() {
            return Err(Error::Singular { rcond: 0.0 });
        }
        let lu_t = matrix.transpose().lu();
        let inv_norm = estimate_inverse_one_norm(n, |b| lu.solve(b), |b| lu_t.solve(b));
        let a_norm = (0..n)
            .map(|j| matrix.column(j).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        let rcond = match inv_norm {
            Some(inv) if inv.is_finite() && inv > 0.0 => 1.0 / (a_norm * inv),
            _ => 0.0,
        };
        if !(rcond >= RCOND_FLOOR) {
            return Err(Error::Singular { rcond });
        }
        Ok(Factored { matrix, lu, rcond })
    }

    pub(crate) fn rcond(&self) -> f64 {
        self.rcond
    }

    /// Solves `A x = b` followed by one step of iterative refinement.
    pub(crate) fn solve(&self, b: &DVector<f64>) -> Result<DVector<f64>> {
        let mut x = self
            .lu
            .solve(b)
            .ok_or(Error::Singular { rcond: self.rcond })?;
        let r = b - &self.matrix * &x;
        if let Some(dx) = self.lu.solve(&r) {
            x += dx;
        }
        Ok(x)
    }

    /// `||A x - b||_inf`.
    pub(crate) fn residual(&self, x: &DVector<f64>, b: &DVector<f64>) -> f64 {
        (&self.matrix * x - b).amax()
    }
}

/// Hager's estimate of `||A^{-1}||_1` from solves with `A` and `A^T`.
fn estimate_inverse_one_norm<F, G>(n: usize, solve: F, solve_t: G) -> Option<f64>
where
    F: Fn(&DVector<f64>) -> Option<DVector<f64>>,
    G: Fn(&DVector<f64>) -> Option<DVector<f64>>,
{
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    let mut estimate = 0.0;
    for _ in 0..5 {
        let y = solve(&x)?;
        estimate = y.iter().map(|v| v.abs()).sum::<f64>();
        let xi = y.map(|v| if v >= 0.0 { 1.0 } else { -1.0 });
        let z = solve_t(&xi)?;
        let (j, zmax) = z.iter().enumerate().map(|(i, v)| (i, v.abs())).fold(
            (0, f64::NEG_INFINITY),
            |acc, c| if c.1 > acc.1 { c } else { acc },
        );
        if zmax <= z.dot(&x) {
            break;
        }
        x = DVector::zeros(n);
        x[j] = 1.0;
    }
    Some(estimate)
}
