//! Problem instances, innovation laws, distortion functions and policies.
//!
//! The source evolves as `X_{t+1} = a X_t + W_t` with `X_0 = 0`. In the
//! integer-valued model `W` has a symmetric unimodal pmf; in the real-valued
//! model it has a symmetric unimodal density. Everything here is immutable
//! after construction and cheap to clone.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

/// Mass that may be dropped when a pmf with unbounded support is truncated.
pub const PMF_TRUNCATION_SLACK: f64 = 1e-10;

/// Discount factor in `(0, 1]`; `1` selects the long-term average criterion.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct DiscountFactor(f64);

impl DiscountFactor {
    pub const AVERAGE: DiscountFactor = DiscountFactor(1.0);

    pub fn new(beta: f64) -> Result<Self> {
        if beta > 0.0 && beta <= 1.0 {
            Ok(DiscountFactor(beta))
        } else {
            Err(Error::InvalidArgument(format!(
                "discount factor must lie in (0, 1], got {beta}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_average(self) -> bool {
        self.0 == 1.0
    }

    /// `1 - beta`, the normalizing factor of the discounted criteria.
    pub fn complement(self) -> f64 {
        1.0 - self.0
    }
}

/// Integer-valued innovation law stored densely over its support `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegerPmf {
    lo: i64,
    probs: Vec<f64>,
    truncated_mass: f64,
}

impl IntegerPmf {
    /// Builds a pmf from `(offset, probability)` pairs.
    ///
    /// Stored mass must be at least `1 - 1e-10`; the remainder is treated as
    /// truncated tail mass and the stored values are renormalized. Shape
    /// (symmetry, unimodality, `p_0 < 1`) is not enforced here, see
    /// [`IntegerPmf::violations`].
    pub fn new<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, f64)>,
    {
        let mut map = std::collections::BTreeMap::new();
        for (n, p) in entries {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "probability at offset {n} must be finite and nonnegative, got {p}"
                )));
            }
            *map.entry(n).or_insert(0.0) += p;
        }
        let total: f64 = map.values().sum();
        if !(1.0 - PMF_TRUNCATION_SLACK..=1.0 + PMF_TRUNCATION_SLACK).contains(&total) {
            return Err(Error::InvalidArgument(format!(
                "pmf mass must be 1 up to a truncated tail of at most {PMF_TRUNCATION_SLACK:e}, got {total}"
            )));
        }
        let support: Vec<i64> = map
            .iter()
            .filter(|(_, &p)| p > 0.0)
            .map(|(&n, _)| n)
            .collect();
        let (lo, hi) = match (support.first(), support.last()) {
            (Some(&lo), Some(&hi)) => (lo, hi),
            _ => return Err(Error::InvalidArgument("pmf has no mass".into())),
        };
        let mut probs = vec![0.0; (hi - lo + 1) as usize];
        for (&n, &p) in map.range(lo..=hi) {
            probs[(n - lo) as usize] = p / total;
        }
        Ok(IntegerPmf {
            lo,
            probs,
            truncated_mass: (1.0 - total).max(0.0),
        })
    }

    /// Symmetric birth-death innovations: `p` at `±1`, `1 - 2p` at `0`.
    pub fn birth_death(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 0.5) {
            return Err(Error::InvalidArgument(format!(
                "birth-death parameter must lie in (0, 1/2), got {p}"
            )));
        }
        IntegerPmf::new([(-1, p), (0, 1.0 - 2.0 * p), (1, p)])
    }

    pub fn prob(&self, n: i64) -> f64 {
        let idx = n - self.lo;
        if idx < 0 {
            return 0.0;
        }
        self.probs.get(idx as usize).copied().unwrap_or(0.0)
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.probs.len() as i64 - 1
    }

    /// Largest `|n|` carrying mass.
    pub fn radius(&self) -> i64 {
        self.lo.abs().max(self.hi().abs())
    }

    /// Mass dropped (and renormalized away) at construction.
    pub fn truncated_mass(&self) -> f64 {
        self.truncated_mass
    }

    /// `(offset, probability)` pairs with positive probability.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(move |(i, &p)| (self.lo + i as i64, p))
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.prob(0) >= 1.0 {
            out.push("p_0 < 1 required".to_string());
        }
        let r = self.radius();
        if let Some(n) = (1..=r).find(|&n| (self.prob(n) - self.prob(-n)).abs() > 1e-12) {
            out.push(format!("symmetry p_n = p_{{-n}} violated at n={n}"));
        }
        if let Some(n) = (0..r).find(|&n| self.prob(n) < self.prob(n + 1) - 1e-12) {
            out.push(format!("unimodality p_n >= p_{{n+1}} violated at n={n}"));
        }
        out
    }
}

#[derive(Clone)]
pub struct TabulatedPdf {
    density: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    half_width: f64,
}

/// Real-valued innovation law.
#[derive(Clone)]
pub enum SmoothPdf {
    Gaussian {
        sigma: f64,
    },
    /// User density, identically zero outside `[-half_width, half_width]`.
    Tabulated(TabulatedPdf),
}

impl fmt::Debug for SmoothPdf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SmoothPdf::Gaussian { sigma } => {
                f.debug_struct("Gaussian").field("sigma", sigma).finish()
            }
            SmoothPdf::Tabulated(t) => f
                .debug_struct("Tabulated")
                .field("half_width", &t.half_width)
                .finish_non_exhaustive(),
        }
    }
}

impl SmoothPdf {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if sigma > 0.0 && sigma.is_finite() {
            Ok(SmoothPdf::Gaussian { sigma })
        } else {
            Err(Error::InvalidArgument(format!(
                "gaussian sigma must be positive, got {sigma}"
            )))
        }
    }

    pub fn tabulated<F>(density: F, half_width: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "support half-width must be positive, got {half_width}"
            )));
        }
        Ok(SmoothPdf::Tabulated(TabulatedPdf {
            density: Arc::new(density),
            half_width,
        }))
    }

    pub fn density(&self, w: f64) -> f64 {
        match self {
            SmoothPdf::Gaussian { sigma } => {
                let z = w / sigma;
                (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
            }
            SmoothPdf::Tabulated(t) => {
                if w.abs() > t.half_width {
                    0.0
                } else {
                    (t.density)(w)
                }
            }
        }
    }

    /// Half-width beyond which the density is negligible (exactly zero for
    /// tabulated laws, below `1e-30` relative mass for the Gaussian).
    pub fn support_half_width(&self) -> f64 {
        match self {
            SmoothPdf::Gaussian { sigma } => 12.0 * sigma,
            SmoothPdf::Tabulated(t) => t.half_width,
        }
    }

    /// Standard deviation of the law.
    pub fn scale(&self) -> f64 {
        match self {
            SmoothPdf::Gaussian { sigma } => *sigma,
            SmoothPdf::Tabulated(t) => {
                let w = t.half_width;
                split_integral(w, |x| x * x * self.density(x)).sqrt()
            }
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let w = self.support_half_width();
        let probes = 400;
        for i in 0..=probes {
            let x = w * i as f64 / probes as f64;
            let (fp, fm) = (self.density(x), self.density(-x));
            if !(fp >= 0.0) || !fp.is_finite() {
                out.push(format!("density must be finite and nonnegative (at {x})"));
                break;
            }
            if (fp - fm).abs() > 1e-12 * (1.0 + fp.abs()) {
                out.push(format!("symmetry phi(w) = phi(-w) violated at w={x}"));
                break;
            }
        }
        for i in 0..probes {
            let x0 = w * i as f64 / probes as f64;
            let x1 = w * (i + 1) as f64 / probes as f64;
            if self.density(x1) > self.density(x0) * (1.0 + 1e-12) + 1e-300 {
                out.push(format!("unimodality violated between {x0} and {x1}"));
                break;
            }
        }
        let mass = split_integral(w, |x| self.density(x));
        if (mass - 1.0).abs() > 1e-6 {
            out.push(format!("density integrates to {mass}, expected 1"));
        }
        out
    }
}

/// Composite rule on `[-w, w]` with panel edges at 0, so a kink at the mode
/// does not spoil the accuracy.
fn split_integral<F: Fn(f64) -> f64>(w: f64, f: F) -> f64 {
    let panels = 32;
    (0..panels)
        .map(|i| {
            let lo = -w + 2.0 * w * i as f64 / panels as f64;
            let hi = -w + 2.0 * w * (i + 1) as f64 / panels as f64;
            quadrature::integrate(lo, hi, 32, &f)
        })
        .sum()
}

/// Per-step distortion `d(e)`.
#[derive(Clone)]
pub enum DistortionFn {
    Absolute,
    Quadratic,
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for DistortionFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistortionFn::Absolute => f.write_str("Absolute"),
            DistortionFn::Quadratic => f.write_str("Quadratic"),
            DistortionFn::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl DistortionFn {
    pub fn custom<F>(d: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        DistortionFn::Custom(Arc::new(d))
    }

    #[inline]
    pub fn eval(&self, e: f64) -> f64 {
        match self {
            DistortionFn::Absolute => e.abs(),
            DistortionFn::Quadratic => e * e,
            DistortionFn::Custom(d) => d(e),
        }
    }

    /// Checks the distortion axioms at the given nonnegative probe points.
    pub fn violations_on(&self, probes: &[f64]) -> Vec<String> {
        let mut out = Vec::new();
        if self.eval(0.0) != 0.0 {
            out.push("d(0) = 0 required".to_string());
        }
        let mut prev: Option<(f64, f64)> = None;
        for &e in probes.iter().filter(|&&e| e > 0.0) {
            let (dp, dm) = (self.eval(e), self.eval(-e));
            if !(dp > 0.0) {
                out.push(format!("d(e) > 0 required for e != 0 (fails at {e})"));
                break;
            }
            if (dp - dm).abs() > 1e-12 * (1.0 + dp.abs()) {
                out.push(format!("d must be even (fails at {e})"));
                break;
            }
            if let Some((pe, pd)) = prev {
                if dp < pd {
                    out.push(format!(
                        "d must be nondecreasing on e >= 0 (fails between {pe} and {e})"
                    ));
                    break;
                }
            }
            prev = Some((e, dp));
        }
        out
    }
}

/// Integer-valued instance.
#[derive(Debug, Clone)]
pub struct ModelSpecA {
    pub a: i64,
    pub pmf: IntegerPmf,
    pub distortion: DistortionFn,
    pub beta: DiscountFactor,
}

impl ModelSpecA {
    pub fn new(a: i64, pmf: IntegerPmf, distortion: DistortionFn, beta: DiscountFactor) -> Self {
        ModelSpecA {
            a,
            pmf,
            distortion,
            beta,
        }
    }

    /// Birth-death chain with `a = 1` and `d(e) = |e|`.
    pub fn birth_death(p: f64, beta: f64) -> Result<Self> {
        Ok(ModelSpecA::new(
            1,
            IntegerPmf::birth_death(p)?,
            DistortionFn::Absolute,
            DiscountFactor::new(beta)?,
        ))
    }

    pub fn with_a(&self, a: i64) -> Self {
        ModelSpecA { a, ..self.clone() }
    }

    pub fn with_beta(&self, beta: DiscountFactor) -> Self {
        ModelSpecA {
            beta,
            ..self.clone()
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = self.pmf.violations();
        let probes: Vec<f64> = (1..=64).map(f64::from).collect();
        out.extend(self.distortion.violations_on(&probes));
        out
    }
}

/// Real-valued instance.
#[derive(Debug, Clone)]
pub struct ModelSpecB {
    pub a: f64,
    pub pdf: SmoothPdf,
    pub distortion: DistortionFn,
    pub beta: DiscountFactor,
}

impl ModelSpecB {
    pub fn new(a: f64, pdf: SmoothPdf, distortion: DistortionFn, beta: DiscountFactor) -> Self {
        ModelSpecB {
            a,
            pdf,
            distortion,
            beta,
        }
    }

    /// Gaussian innovations with quadratic distortion.
    pub fn gauss_markov(sigma: f64, a: f64, beta: f64) -> Result<Self> {
        Ok(ModelSpecB::new(
            a,
            SmoothPdf::gaussian(sigma)?,
            DistortionFn::Quadratic,
            DiscountFactor::new(beta)?,
        ))
    }

    pub fn with_a(&self, a: f64) -> Self {
        ModelSpecB { a, ..self.clone() }
    }

    /// Sigma when this is a Gauss-Markov instance (Gaussian, quadratic).
    pub fn gauss_markov_sigma(&self) -> Option<f64> {
        match (&self.pdf, &self.distortion) {
            (SmoothPdf::Gaussian { sigma }, DistortionFn::Quadratic) => Some(*sigma),
            _ => None,
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.a.is_finite() {
            out.push("a must be finite".to_string());
        }
        out.extend(self.pdf.violations());
        let w = self.pdf.support_half_width();
        let probes: Vec<f64> = (1..=64).map(|i| w * i as f64 / 64.0).collect();
        out.extend(self.distortion.violations_on(&probes));
        out
    }
}

#[derive(Debug, Clone)]
pub enum ModelSpec {
    A(ModelSpecA),
    B(ModelSpecB),
}

impl From<ModelSpecA> for ModelSpec {
    fn from(s: ModelSpecA) -> Self {
        ModelSpec::A(s)
    }
}

impl From<ModelSpecB> for ModelSpec {
    fn from(s: ModelSpecB) -> Self {
        ModelSpec::B(s)
    }
}

impl ModelSpec {
    pub fn beta(&self) -> DiscountFactor {
        match self {
            ModelSpec::A(s) => s.beta,
            ModelSpec::B(s) => s.beta,
        }
    }

    pub fn a(&self) -> f64 {
        match self {
            ModelSpec::A(s) => s.a as f64,
            ModelSpec::B(s) => s.a,
        }
    }

    pub fn distortion(&self) -> &DistortionFn {
        match self {
            ModelSpec::A(s) => &s.distortion,
            ModelSpec::B(s) => &s.distortion,
        }
    }
}

/// Every violated modelling assumption; empty for a valid instance.
pub fn validate_spec(spec: &ModelSpec) -> Vec<String> {
    match spec {
        ModelSpec::A(s) => s.violations(),
        ModelSpec::B(s) => s.violations(),
    }
}

/// Kalman-like receiver: adopt the received state, otherwise predict `a * prev`.
#[inline]
pub fn estimator_step(prev_estimate: f64, received: Option<f64>, a: f64) -> f64 {
    match received {
        Some(x) => x,
        None => a * prev_estimate,
    }
}

/// Transmit iff `|e| >= k`. `k = 0` always transmits, `k = inf` never does.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct ThresholdPolicy {
    k: f64,
}

impl ThresholdPolicy {
    pub fn new(k: f64) -> Result<Self> {
        if k >= 0.0 {
            Ok(ThresholdPolicy { k })
        } else {
            Err(Error::InvalidArgument(format!(
                "threshold must be nonnegative, got {k}"
            )))
        }
    }

    pub const fn always() -> Self {
        ThresholdPolicy { k: 0.0 }
    }

    pub const fn never() -> Self {
        ThresholdPolicy { k: f64::INFINITY }
    }

    pub fn k(self) -> f64 {
        self.k
    }

    pub fn is_never(self) -> bool {
        self.k.is_infinite()
    }

    /// Integer threshold, or `None` for the never-transmit sentinel.
    /// Fails for non-integral thresholds.
    pub fn as_integer(self) -> Result<Option<u32>> {
        if self.is_never() {
            Ok(None)
        } else if self.k.fract() == 0.0 && self.k <= u32::MAX as f64 {
            Ok(Some(self.k as u32))
        } else {
            Err(Error::InvalidArgument(format!(
                "integer-valued model needs an integral threshold, got {}",
                self.k
            )))
        }
    }

    #[inline]
    pub fn transmits(self, e: f64) -> bool {
        e.abs() >= self.k
    }
}

impl From<u32> for ThresholdPolicy {
    fn from(k: u32) -> Self {
        ThresholdPolicy { k: f64::from(k) }
    }
}

/// Mixes `f^(k*)` and `f^(k*+1)`; the two differ only on `|e| = k*`.
///
/// `theta_star` is the mixing weight on `f^(k*)`: the optimal distortion and
/// rate are the `theta_star`-convex combination of the two pure policies.
/// `boundary_prob` is the per-visit transmit probability at `|e| = k*` that
/// realizes exactly that rate when the coin is flipped independently at
/// every boundary visit. The two coincide only when `k* = 0` or
/// `theta_star` is `0` or `1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomizedThresholdPolicy {
    pub k_star: u32,
    pub theta_star: f64,
    pub boundary_prob: f64,
}

impl RandomizedThresholdPolicy {
    pub fn new(k_star: u32, theta_star: f64, boundary_prob: f64) -> Result<Self> {
        for (name, v) in [("theta_star", theta_star), ("boundary_prob", boundary_prob)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        Ok(RandomizedThresholdPolicy {
            k_star,
            theta_star,
            boundary_prob,
        })
    }

    /// Transmission decision given a uniform draw `u` in `[0, 1)`.
    #[inline]
    pub fn transmits(&self, e: f64, u: f64) -> bool {
        let k = f64::from(self.k_star);
        let m = e.abs();
        if m > k {
            true
        } else if m < k {
            false
        } else {
            u < self.boundary_prob
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Analytic,
    ClosedForm,
    Simulated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cost {
    pub lambda: f64,
    pub value: f64,
}

/// Distortion `D`, transmission rate `N`, and optionally `C = D + lambda N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerfPoint {
    pub distortion: f64,
    pub transmission_rate: f64,
    pub cost: Option<Cost>,
    pub provenance: Provenance,
}

impl PerfPoint {
    pub fn new(distortion: f64, transmission_rate: f64, provenance: Provenance) -> Self {
        PerfPoint {
            distortion,
            transmission_rate,
            cost: None,
            provenance,
        }
    }

    pub fn priced(mut self, lambda: Option<f64>) -> Self {
        self.cost = lambda.map(|lambda| Cost {
            lambda,
            value: self.distortion + lambda * self.transmission_rate,
        });
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    /// `C*(lambda)`, abscissa is the communication price.
    Costly,
    /// `D*(alpha)`, abscissa is the rate constraint.
    Constrained,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveShape {
    PiecewiseLinear,
    Sampled,
}

/// Instance a curve was computed for, when it matters downstream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveSource {
    IntegerModel,
    GaussMarkov { sigma: f64, a: f64, beta: f64 },
    RealModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub abscissa: f64,
    pub ordinate: f64,
    /// Threshold of the policy attaining this point.
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffCurve {
    pub kind: CurveKind,
    pub shape: CurveShape,
    pub source: CurveSource,
    points: Vec<CurvePoint>,
}

impl TradeoffCurve {
    /// Fails unless abscissas are strictly increasing.
    pub fn new(
        kind: CurveKind,
        shape: CurveShape,
        source: CurveSource,
        points: Vec<CurvePoint>,
    ) -> Result<Self> {
        if let Some(w) = points.windows(2).find(|w| !(w[1].abscissa > w[0].abscissa)) {
            return Err(Error::InvalidArgument(format!(
                "curve abscissas must be strictly increasing ({} then {})",
                w[0].abscissa, w[1].abscissa
            )));
        }
        Ok(TradeoffCurve {
            kind,
            shape,
            source,
            points,
        })
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    /// Monotonicity and curvature violations on the stored points.
    ///
    /// Costly curves must be nondecreasing and concave, constrained curves
    /// nonincreasing and convex. Curvature is tested on consecutive chord
    /// slopes, with `rel_tol` slack relative to the slope magnitude.
    pub fn shape_violations(&self, rel_tol: f64) -> Vec<String> {
        let slopes: Vec<f64> = self
            .points
            .windows(2)
            .map(|w| (w[1].ordinate - w[0].ordinate) / (w[1].abscissa - w[0].abscissa))
            .collect();
        let mut out = Vec::new();
        for (i, &s) in slopes.iter().enumerate() {
            let slack = rel_tol * (1.0 + s.abs());
            let bad = match self.kind {
                CurveKind::Costly => s < -slack,
                CurveKind::Constrained => s > slack,
            };
            if bad {
                out.push(format!("monotonicity violated on segment {i} (slope {s})"));
            }
        }
        for (i, w) in slopes.windows(2).enumerate() {
            let slack = rel_tol * (1.0 + w[0].abs().max(w[1].abs()));
            let bad = match self.kind {
                CurveKind::Costly => w[1] > w[0] + slack,
                CurveKind::Constrained => w[1] < w[0] - slack,
            };
            if bad {
                out.push(format!(
                    "curvature violated at point {} (slopes {} then {})",
                    i + 1,
                    w[0],
                    w[1]
                ));
            }
        }
        out
    }
}
