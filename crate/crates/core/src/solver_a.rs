//! Exact solver for the integer-valued model.
//!
//! For a threshold `k >= 1` the error process stays in the silent set
//! `S = {-(k-1), ..., k-1}` until the first transmission. The expected
//! accumulated distortion `L` and expected time `M` until that transmission
//! solve `(I - beta T) L = d` and `(I - beta T) M = 1`, where
//! `T[e][n] = p_{n - a e}` is the substochastic transition matrix on `S`.
//! Renewal arguments then give `D = L(0) / M(0)` and
//! `N = 1 / M(0) - (1 - beta)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Factored;
use crate::model::{
    CurveKind, CurvePoint, CurveShape, CurveSource, DiscountFactor, ModelSpecA, PerfPoint,
    Provenance, RandomizedThresholdPolicy, ThresholdPolicy, TradeoffCurve,
};

/// Default cap on the silent-set dimension `2k - 1`.
pub const DEFAULT_MAX_DIM: usize = 20_001;

/// Distortion increments at or below this are treated as ties when forming
/// the set of thresholds that are optimal for some price.
pub const CORNER_TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SilentSystem {
    k: u32,
    transition: DMatrix<f64>,
    distortion: DVector<f64>,
}

impl SilentSystem {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.distortion.len()
    }

    /// Row/column `i` corresponds to error state `i - (k - 1)`.
    pub fn state(&self, i: usize) -> i64 {
        i as i64 - (i64::from(self.k) - 1)
    }

    pub fn index_of(&self, e: i64) -> Option<usize> {
        let i = e + i64::from(self.k) - 1;
        (0..self.dim() as i64).contains(&i).then_some(i as usize)
    }

    pub fn transition(&self) -> &DMatrix<f64> {
        &self.transition
    }

    pub fn distortion_vec(&self) -> &DVector<f64> {
        &self.distortion
    }
}

pub fn build_silent_system(spec: &ModelSpecA, k: u32) -> Result<SilentSystem> {
    build_silent_system_capped(spec, k, DEFAULT_MAX_DIM)
}

pub fn build_silent_system_capped(
    spec: &ModelSpecA,
    k: u32,
    max_dim: usize,
) -> Result<SilentSystem> {
    if k == 0 {
        return Err(Error::InvalidArgument("silent system needs k >= 1".into()));
    }
    let half = i64::from(k) - 1;
    check_dim(2 * half + 1, max_dim)?;
    let transition = transition_on(spec, half, |_| 1.0);
    let distortion = DVector::from_iterator(
        (2 * half + 1) as usize,
        (-half..=half).map(|e| spec.distortion.eval(e as f64)),
    );
    Ok(SilentSystem {
        k,
        transition,
        distortion,
    })
}

fn check_dim(dim: i64, max_dim: usize) -> Result<()> {
    if dim as usize > max_dim {
        Err(Error::Capacity {
            dim: dim as usize,
            max: max_dim,
        })
    } else {
        Ok(())
    }
}

/// `T[e][n] = p_{n - a e} * keep(n)` over states `-half..=half`.
fn transition_on(spec: &ModelSpecA, half: i64, keep: impl Fn(i64) -> f64) -> DMatrix<f64> {
    let dim = (2 * half + 1) as usize;
    let mut t = DMatrix::zeros(dim, dim);
    for (i, e) in (-half..=half).enumerate() {
        let centre = spec.a * e;
        // Only offsets inside the pmf support contribute.
        let lo = (centre + spec.pmf.lo()).max(-half);
        let hi = (centre + spec.pmf.hi()).min(half);
        for n in lo..=hi {
            let p = spec.pmf.prob(n - centre);
            if p > 0.0 {
                t[(i, (n + half) as usize)] = p * keep(n);
            }
        }
    }
    t
}

/// Pre-transmission functionals indexed by silent state.
#[derive(Debug, Clone, PartialEq)]
pub struct LmVectors {
    k: u32,
    pub l: Vec<f64>,
    pub m: Vec<f64>,
    /// Estimated reciprocal condition number of `I - beta T`.
    pub rcond: f64,
}

impl LmVectors {
    pub fn k(&self) -> u32 {
        self.k
    }

    fn idx(&self, e: i64) -> Option<usize> {
        let i = e + i64::from(self.k) - 1;
        (0..self.l.len() as i64).contains(&i).then_some(i as usize)
    }

    pub fn l_at(&self, e: i64) -> Option<f64> {
        self.idx(e).map(|i| self.l[i])
    }

    pub fn m_at(&self, e: i64) -> Option<f64> {
        self.idx(e).map(|i| self.m[i])
    }

    pub fn l0(&self) -> f64 {
        self.l[self.k as usize - 1]
    }

    pub fn m0(&self) -> f64 {
        self.m[self.k as usize - 1]
    }
}

pub fn solve_lm(system: &SilentSystem, beta: DiscountFactor) -> Result<LmVectors> {
    let dim = system.dim();
    let a = DMatrix::identity(dim, dim) - system.transition() * beta.value();
    let (l, m, rcond) = solve_pair(a, system.distortion_vec())?;
    Ok(LmVectors {
        k: system.k,
        l,
        m,
        rcond,
    })
}

/// Solves `A L = d` and `A M = 1` with a residual check.
fn solve_pair(a: DMatrix<f64>, d: &DVector<f64>) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let dim = a.nrows();
    let f = Factored::new(a)?;
    let ones = DVector::from_element(dim, 1.0);
    let mut out = Vec::with_capacity(2);
    for rhs in [d, &ones] {
        let x = f.solve(rhs)?;
        let res = f.residual(&x, rhs);
        if res > 1e-10 * (1.0 + x.amax()) {
            return Err(Error::Internal(format!(
                "linear solve residual {res:e} exceeds tolerance"
            )));
        }
        out.push(x.iter().copied().collect::<Vec<f64>>());
    }
    let m = out.pop().unwrap();
    let l = out.pop().unwrap();
    Ok((l, m, f.rcond()))
}

fn renewal(l0: f64, m0: f64, beta: DiscountFactor, provenance: Provenance) -> PerfPoint {
    PerfPoint::new(l0 / m0, 1.0 / m0 - beta.complement(), provenance)
}

/// Performance `(D, N, C)` of the threshold policy `f^(k)`.
///
/// `k = 0` gives `(0, 1, lambda)`. The never-transmit sentinel gives `N = 0`
/// and the limiting distortion, which diverges when `beta = 1` and
/// `|a| >= 1`.
pub fn performance(
    spec: &ModelSpecA,
    k: impl Into<ThresholdPolicy>,
    lambda: Option<f64>,
) -> Result<PerfPoint> {
    let point = match k.into().as_integer()? {
        Some(0) => PerfPoint::new(0.0, 1.0, Provenance::Analytic),
        Some(k) => {
            let lm = solve_lm(&build_silent_system(spec, k)?, spec.beta)?;
            renewal(lm.l0(), lm.m0(), spec.beta, Provenance::Analytic)
        }
        None => PerfPoint::new(never_transmit_distortion(spec)?, 0.0, Provenance::Analytic),
    };
    Ok(point.priced(lambda))
}

fn never_transmit_distortion(spec: &ModelSpecA) -> Result<f64> {
    let beta = spec.beta;
    if spec.a == 0 {
        // X_t = W_{t-1} is i.i.d. and the estimate stays at 0.
        let mean: f64 = spec
            .pmf
            .iter()
            .map(|(n, p)| p * spec.distortion.eval(n as f64))
            .sum();
        return Ok(beta.value() * mean);
    }
    if beta.is_average() {
        return Err(Error::Divergence(
            "long-term average distortion of the never-transmit policy diverges for |a| >= 1"
                .into(),
        ));
    }
    // D^(k) increases to the never-transmit limit.
    let mut k = 8u32;
    let mut prev = performance(spec, k, None)?.distortion;
    let mut change = f64::INFINITY;
    for iteration in 0..16 {
        k *= 2;
        if (2 * k - 1) as usize > DEFAULT_MAX_DIM {
            return Err(Error::NonConvergence {
                iterations: iteration,
                last_change: change,
            });
        }
        let next = performance(spec, k, None)?.distortion;
        change = (next - prev).abs();
        if change <= 1e-12 * next.abs().max(1.0) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::NonConvergence {
        iterations: 16,
        last_change: change,
    })
}

/// A threshold that is optimal on `(previous lambda, lambda]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Corner {
    pub k: u32,
    pub lambda: f64,
    pub distortion: f64,
    pub transmission_rate: f64,
}

impl Corner {
    pub fn cost(&self) -> f64 {
        self.distortion + self.lambda * self.transmission_rate
    }
}

/// `(D, N)` for `k = 0, 1, ..., upto`.
pub fn performance_table(spec: &ModelSpecA, upto: u32) -> Result<Vec<PerfPoint>> {
    (0..=upto).map(|k| performance(spec, k, None)).collect()
}

/// Corner prices `lambda^(k_n)` for every `k_n <= k_max` in the set of
/// thresholds `{k : D^(k+1) > D^(k)}`.
pub fn corner_lambdas(spec: &ModelSpecA, k_max: u32) -> Result<Vec<Corner>> {
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be at least 1".into()));
    }
    let mut table = performance_table(spec, k_max + 1)?;
    let in_set = |t: &[PerfPoint], k: usize| t[k + 1].distortion > t[k].distortion + CORNER_TIE_TOL;
    let mut members: Vec<usize> = (0..=k_max as usize)
        .filter(|&k| in_set(&table, k))
        .collect();

    // The last member needs its successor, which may lie beyond k_max.
    let limit = (4 * k_max as usize + 64).min(DEFAULT_MAX_DIM / 2);
    let mut k = k_max as usize + 1;
    while !members.is_empty() && k <= limit {
        if table.len() <= k + 1 {
            table.push(performance(spec, (k + 1) as u32, None)?);
        }
        if in_set(&table, k) {
            members.push(k);
            break;
        }
        k += 1;
    }

    let mut corners = Vec::with_capacity(members.len());
    for w in members.windows(2) {
        let (kn, kn1) = (w[0], w[1]);
        let (lo, hi) = (&table[kn], &table[kn1]);
        let dn = lo.transmission_rate - hi.transmission_rate;
        if !(dn > 0.0) {
            return Err(Error::Internal(format!(
                "transmission rate not strictly decreasing between k={kn} and k={kn1}"
            )));
        }
        corners.push(Corner {
            k: kn as u32,
            lambda: (hi.distortion - lo.distortion) / dn,
            distortion: lo.distortion,
            transmission_rate: lo.transmission_rate,
        });
    }
    if let Some(w) = corners.windows(2).find(|w| !(w[1].lambda > w[0].lambda)) {
        return Err(Error::Internal(format!(
            "corner prices not increasing: lambda^({})={} then lambda^({})={}",
            w[0].k, w[0].lambda, w[1].k, w[1].lambda
        )));
    }
    Ok(corners)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostlyOptimum {
    pub k: u32,
    pub cost: f64,
    pub performance: PerfPoint,
}

/// Optimal threshold and cost `C*(lambda)`.
pub fn optimal_costly(spec: &ModelSpecA, lambda: f64) -> Result<CostlyOptimum> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "communication price must be finite and nonnegative, got {lambda}"
        )));
    }
    let optimum = |k: u32| -> Result<CostlyOptimum> {
        let performance = performance(spec, k, Some(lambda))?;
        Ok(CostlyOptimum {
            k,
            cost: performance.cost.map(|c| c.value).unwrap_or(f64::NAN),
            performance,
        })
    };
    let mut k_max = 16u32;
    let mut seen = 0;
    loop {
        let corners = corner_lambdas(spec, k_max)?;
        if let Some(c) = corners.iter().find(|c| lambda <= c.lambda) {
            return optimum(c.k);
        }
        if let Some(last) = corners.last().filter(|_| corners.len() == seen) {
            // Distortion increments past the last corner are below the tie
            // tolerance; remaining costs agree to rounding.
            let mut best = optimum(last.k + 1)?;
            for k in last.k + 2..=k_max {
                let o = optimum(k)?;
                if o.cost < best.cost {
                    best = o;
                }
            }
            return Ok(best);
        }
        if corners.is_empty() && k_max >= 1024 {
            return Err(Error::Internal(
                "no threshold ever increases the distortion".into(),
            ));
        }
        seen = corners.len();
        k_max *= 2;
        check_dim(2 * i64::from(k_max) + 3, DEFAULT_MAX_DIM)?;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstrainedOptimum {
    pub policy: RandomizedThresholdPolicy,
    pub d_star: f64,
    /// `theta N^(k*) + (1 - theta) N^(k*+1)`, equal to the constraint.
    pub rate: f64,
}

/// Distortion-transmission function `D*(alpha)` and its randomized policy.
pub fn optimal_constrained(spec: &ModelSpecA, alpha: f64) -> Result<ConstrainedOptimum> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "rate constraint must lie in (0, 1), got {alpha}"
        )));
    }
    let mut lo = performance(spec, 0u32, None)?;
    let mut k = 0u32;
    let hi = loop {
        check_dim(2 * i64::from(k) + 1, DEFAULT_MAX_DIM)?;
        let next = performance(spec, k + 1, None)?;
        if next.transmission_rate < alpha {
            break next;
        }
        lo = next;
        k += 1;
    };
    let (n_k, n_k1) = (lo.transmission_rate, hi.transmission_rate);
    let theta = ((alpha - n_k1) / (n_k - n_k1)).clamp(0.0, 1.0);
    let d_star = theta * lo.distortion + (1.0 - theta) * hi.distortion;
    let rate = theta * n_k + (1.0 - theta) * n_k1;
    if (rate - alpha).abs() > 1e-10 {
        return Err(Error::Internal(format!(
            "mixed rate {rate} differs from constraint {alpha}"
        )));
    }
    let boundary_prob = boundary_probability(spec, k, alpha, theta)?;
    Ok(ConstrainedOptimum {
        policy: RandomizedThresholdPolicy::new(k, theta, boundary_prob)?,
        d_star,
        rate,
    })
}

/// Performance when the transmitter flips an independent coin with success
/// probability `q` at every visit to `|e| = k`, transmits for `|e| > k` and
/// stays silent for `|e| < k`.
pub fn randomized_performance(spec: &ModelSpecA, k: u32, q: f64) -> Result<PerfPoint> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidArgument(format!(
            "boundary probability must lie in [0, 1], got {q}"
        )));
    }
    let beta = spec.beta;
    if k == 0 {
        // The initial state 0 is itself on the boundary.
        let p0 = spec.pmf.prob(0);
        let b = beta.value();
        let n = if beta.is_average() {
            (1.0 - p0) + p0 * q
        } else {
            (1.0 - b) * q + b * ((1.0 - p0) + p0 * q)
        };
        return Ok(PerfPoint::new(0.0, n, Provenance::Analytic));
    }
    let half = i64::from(k);
    check_dim(2 * half + 1, DEFAULT_MAX_DIM)?;
    let t = transition_on(spec, half, |n| if n.abs() == half { 1.0 - q } else { 1.0 });
    let dim = (2 * half + 1) as usize;
    let d = DVector::from_iterator(dim, (-half..=half).map(|e| spec.distortion.eval(e as f64)));
    let (l, m, _) = solve_pair(DMatrix::identity(dim, dim) - t * beta.value(), &d)?;
    let i0 = half as usize;
    Ok(renewal(l[i0], m[i0], beta, Provenance::Analytic))
}

/// Per-visit boundary probability whose long-run rate equals `alpha`.
fn boundary_probability(spec: &ModelSpecA, k: u32, alpha: f64, theta: f64) -> Result<f64> {
    if k == 0 || theta == 0.0 || theta == 1.0 {
        return Ok(theta);
    }
    // The rate increases continuously from N^(k+1) at q = 0 to N^(k) at q = 1.
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let n = randomized_performance(spec, k, mid)?.transmission_rate;
        if n < alpha {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Corner points of `C*(lambda)` or `D*(alpha)`.
pub fn tradeoff_curve(spec: &ModelSpecA, kind: CurveKind, k_max: u32) -> Result<TradeoffCurve> {
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be at least 1".into()));
    }
    let points = match kind {
        CurveKind::Costly => corner_lambdas(spec, k_max)?
            .into_iter()
            .map(|c| CurvePoint {
                abscissa: c.lambda,
                ordinate: c.cost(),
                threshold: f64::from(c.k),
            })
            .collect(),
        CurveKind::Constrained => {
            let mut pts: Vec<CurvePoint> = (1..=k_max)
                .map(|k| {
                    performance(spec, k, None).map(|p| CurvePoint {
                        abscissa: p.transmission_rate,
                        ordinate: p.distortion,
                        threshold: f64::from(k),
                    })
                })
                .collect::<Result<_>>()?;
            pts.reverse();
            pts
        }
    };
    TradeoffCurve::new(
        kind,
        CurveShape::PiecewiseLinear,
        CurveSource::IntegerModel,
        points,
    )
}
