//! Monte-Carlo simulation of the transmitter, channel and estimator loop.
//!
//! Replication `r` draws from a ChaCha8 stream seeded by `(seed, r)`, and the
//! per-replication estimates are combined by pairwise summation in
//! replication order, so results do not depend on the execution plan.

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{steering_policy_step, SteeringCounters};
use crate::error::{Error, Result};
use crate::model::{
    estimator_step, ModelSpec, ModelSpecA, ModelSpecB, RandomizedThresholdPolicy, SmoothPdf,
    ThresholdPolicy,
};

/// States beyond this magnitude are treated as an explosion.
const STATE_LIMIT_A: f64 = 9_007_199_254_740_992.0; // 2^53
const STATE_LIMIT_B: f64 = 1e150;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Averaged steps per replication after burn-in (`beta = 1` only).
    pub horizon: u64,
    pub replications: u32,
    pub seed: u64,
    /// Discarded initial steps (`beta = 1` only).
    pub burn_in: u64,
    /// Discounted runs stop at the first `T` with `beta^T < tol`.
    pub discount_truncation_tol: f64,
    /// Run replications on the rayon pool.
    pub parallel: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            horizon: 100_000,
            replications: 200,
            seed: 0,
            burn_in: 1_000,
            discount_truncation_tol: 1e-10,
            parallel: true,
        }
    }
}

impl SimConfig {
    fn validate(&self) -> Result<()> {
        if self.horizon == 0 || self.replications == 0 {
            return Err(Error::InvalidArgument(
                "horizon and replications must be at least 1".into(),
            ));
        }
        if !(self.discount_truncation_tol > 0.0 && self.discount_truncation_tol < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "discount truncation tolerance must lie in (0, 1), got {}",
                self.discount_truncation_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub d_hat: f64,
    pub n_hat: f64,
    pub d_se: f64,
    pub n_se: f64,
    pub replications_used: u32,
    /// Steps simulated per replication, including burn-in.
    pub steps_per_replication: u64,
    /// Replication `r` used the stream `(seed, r)`.
    pub seed: u64,
}

/// Transmission rule driven by the simulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolicySpec {
    Threshold(ThresholdPolicy),
    /// Transmit for `|e| > k*`, flip a coin with the calibrated boundary
    /// probability at `|e| = k*`.
    RandomizedThreshold(RandomizedThresholdPolicy),
    /// Transmit at step `t` iff `pattern[t mod period]`.
    Periodic {
        period: u32,
        pattern: Vec<bool>,
    },
    /// Transmit with probability `alpha` independently at every step.
    IidRandom {
        alpha: f64,
    },
    /// Threshold `k` with deterministic frequency steering toward `theta` at
    /// the boundary `|e| = k`.
    Steering {
        k: u32,
        theta: f64,
    },
    /// Cycles delimited by transmissions: `a_m` cycles under threshold `k`,
    /// then `b_m` cycles under `k + 1`, for each schedule entry in turn.
    TimeSharing {
        k: u32,
        schedule: Vec<(u64, u64)>,
    },
}

impl PolicySpec {
    pub fn periodic(pattern: Vec<bool>) -> Result<Self> {
        let policy = PolicySpec::Periodic {
            period: pattern.len() as u32,
            pattern,
        };
        policy.validate()?;
        Ok(policy)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        match self {
            PolicySpec::Periodic { period, pattern } => {
                if *period == 0 || pattern.len() != *period as usize {
                    return bad(format!(
                        "periodic pattern length {} must equal the period {period} >= 1",
                        pattern.len()
                    ));
                }
            }
            PolicySpec::IidRandom { alpha } | PolicySpec::Steering { theta: alpha, .. } => {
                if !(0.0..=1.0).contains(alpha) {
                    return bad(format!("probability must lie in [0, 1], got {alpha}"));
                }
            }
            PolicySpec::TimeSharing { schedule, .. } => {
                if schedule.is_empty() || schedule.iter().any(|&(a, b)| a + b == 0) {
                    return bad("time-sharing schedule entries must have a + b > 0".into());
                }
            }
            PolicySpec::Threshold(_) | PolicySpec::RandomizedThreshold(_) => {}
        }
        Ok(())
    }
}

enum Innovation {
    Integer {
        values: Vec<f64>,
        index: WeightedIndex<f64>,
    },
    Normal(Normal<f64>),
    /// Inverse CDF tabulated on a uniform grid.
    Table {
        grid: Vec<f64>,
        cdf: Vec<f64>,
    },
}

impl Innovation {
    fn for_a(spec: &ModelSpecA) -> Result<Self> {
        let (values, weights): (Vec<f64>, Vec<f64>) =
            spec.pmf.iter().map(|(n, p)| (n as f64, p)).unzip();
        let index = WeightedIndex::new(weights)
            .map_err(|e| Error::InvalidArgument(format!("bad innovation pmf: {e}")))?;
        Ok(Innovation::Integer { values, index })
    }

    fn for_b(spec: &ModelSpecB) -> Result<Self> {
        match &spec.pdf {
            SmoothPdf::Gaussian { sigma } => Normal::new(0.0, *sigma)
                .map(Innovation::Normal)
                .map_err(|e| Error::InvalidArgument(format!("bad gaussian: {e}"))),
            pdf @ SmoothPdf::Tabulated(_) => {
                let w = pdf.support_half_width();
                let n = 1 << 14;
                let grid: Vec<f64> = (0..=n)
                    .map(|i| -w + 2.0 * w * i as f64 / n as f64)
                    .collect();
                let mut cdf = Vec::with_capacity(grid.len());
                let mut acc = 0.0;
                cdf.push(0.0);
                for pair in grid.windows(2) {
                    acc +=
                        0.5 * (pair[1] - pair[0]) * (pdf.density(pair[0]) + pdf.density(pair[1]));
                    cdf.push(acc);
                }
                let total = acc;
                if !(total > 0.0) {
                    return Err(Error::InvalidArgument("density has no mass".into()));
                }
                cdf.iter_mut().for_each(|c| *c /= total);
                Ok(Innovation::Table { grid, cdf })
            }
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Innovation::Integer { values, index } => values[index.sample(rng)],
            Innovation::Normal(n) => n.sample(rng),
            Innovation::Table { grid, cdf } => {
                let u: f64 = rng.random();
                let j = cdf.partition_point(|&c| c < u).clamp(1, cdf.len() - 1);
                let (c0, c1) = (cdf[j - 1], cdf[j]);
                let t = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
                grid[j - 1] + t * (grid[j] - grid[j - 1])
            }
        }
    }
}

/// Per-replication transmitter state for history-dependent policies.
enum Transmitter<'a> {
    Threshold(ThresholdPolicy),
    Randomized(&'a RandomizedThresholdPolicy),
    Periodic(&'a [bool]),
    IidRandom(f64),
    Steering {
        k: f64,
        theta: f64,
        counters: SteeringCounters,
    },
    TimeSharing {
        k: f64,
        schedule: &'a [(u64, u64)],
        entry: usize,
        high: bool,
        remaining: u64,
    },
}

impl<'a> Transmitter<'a> {
    fn new(policy: &'a PolicySpec) -> Self {
        match policy {
            PolicySpec::Threshold(p) => Transmitter::Threshold(*p),
            PolicySpec::RandomizedThreshold(p) => Transmitter::Randomized(p),
            PolicySpec::Periodic { pattern, .. } => Transmitter::Periodic(pattern),
            PolicySpec::IidRandom { alpha } => Transmitter::IidRandom(*alpha),
            PolicySpec::Steering { k, theta } => Transmitter::Steering {
                k: f64::from(*k),
                theta: *theta,
                counters: SteeringCounters::default(),
            },
            PolicySpec::TimeSharing { k, schedule } => {
                let mut t = Transmitter::TimeSharing {
                    k: f64::from(*k),
                    schedule,
                    entry: 0,
                    high: false,
                    remaining: schedule[0].0,
                };
                t.skip_empty_phases();
                t
            }
        }
    }

    fn skip_empty_phases(&mut self) {
        if let Transmitter::TimeSharing {
            schedule,
            entry,
            high,
            remaining,
            ..
        } = self
        {
            while *remaining == 0 {
                if *high {
                    *entry = (*entry + 1) % schedule.len();
                    *high = false;
                    *remaining = schedule[*entry].0;
                } else {
                    *high = true;
                    *remaining = schedule[*entry].1;
                }
            }
        }
    }

    fn decide<R: Rng>(&mut self, t: u64, e: f64, rng: &mut R) -> bool {
        match self {
            Transmitter::Threshold(p) => p.transmits(e),
            Transmitter::Randomized(p) => {
                let u: f64 = if e.abs() == f64::from(p.k_star) {
                    rng.random()
                } else {
                    0.5
                };
                p.transmits(e, u)
            }
            Transmitter::Periodic(pattern) => pattern[(t % pattern.len() as u64) as usize],
            Transmitter::IidRandom(alpha) => rng.random::<f64>() < *alpha,
            Transmitter::Steering { k, theta, counters } => {
                let (u, next) = steering_policy_step(*counters, e, *k, *theta);
                *counters = next;
                u
            }
            Transmitter::TimeSharing { k, high, .. } => {
                let threshold = if *high { *k + 1.0 } else { *k };
                let u = e.abs() >= threshold;
                if u {
                    self.end_cycle();
                }
                u
            }
        }
    }

    fn end_cycle(&mut self) {
        if let Transmitter::TimeSharing { remaining, .. } = self {
            *remaining -= 1;
        }
        self.skip_empty_phases();
    }
}

struct Dynamics {
    a: f64,
    beta: f64,
    limit: f64,
    innovation: Innovation,
}

fn replication(
    dynamics: &Dynamics,
    distortion: &crate::model::DistortionFn,
    policy: &PolicySpec,
    config: &SimConfig,
    steps: u64,
    r: u32,
) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(u64::from(r));
    let mut tx = Transmitter::new(policy);
    let (a, beta) = (dynamics.a, dynamics.beta);
    let discounted = beta < 1.0;
    let (mut x, mut x_hat) = (0.0f64, 0.0f64);
    let (mut d_acc, mut n_acc) = (0.0f64, 0.0f64);
    let mut weight = 1.0f64;
    for t in 0..steps {
        let e = x - a * x_hat;
        let u = tx.decide(t, e, &mut rng);
        x_hat = estimator_step(x_hat, u.then_some(x), a);
        let cost = if u { 0.0 } else { distortion.eval(e) };
        if discounted {
            d_acc += weight * cost;
            n_acc += weight * f64::from(u8::from(u));
            weight *= beta;
        } else if t >= config.burn_in {
            d_acc += cost;
            n_acc += f64::from(u8::from(u));
        }
        x = a * x + dynamics.innovation.sample(&mut rng);
        if !(x.abs() <= dynamics.limit) || !(x_hat.abs() <= dynamics.limit) {
            return Err(Error::Overflow { step: t });
        }
    }
    Ok(if discounted {
        ((1.0 - beta) * d_acc, (1.0 - beta) * n_acc)
    } else {
        let n = config.horizon as f64;
        (d_acc / n, n_acc / n)
    })
}

/// Sum by recursive halving, independent of how the inputs were produced.
fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Number of steps for a discounted run: the first `T` with `beta^T < tol`.
pub fn discounted_horizon(beta: f64, tol: f64) -> u64 {
    (tol.ln() / beta.ln()).floor() as u64 + 1
}

pub fn simulate(spec: &ModelSpec, policy: &PolicySpec, config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    policy.validate()?;
    let violations = crate::model::validate_spec(spec);
    if !violations.is_empty() {
        return Err(Error::InvalidSpec(violations));
    }
    let dynamics = match spec {
        ModelSpec::A(s) => Dynamics {
            a: s.a as f64,
            beta: s.beta.value(),
            limit: STATE_LIMIT_A,
            innovation: Innovation::for_a(s)?,
        },
        ModelSpec::B(s) => Dynamics {
            a: s.a,
            beta: s.beta.value(),
            limit: STATE_LIMIT_B,
            innovation: Innovation::for_b(s)?,
        },
    };
    let steps = if dynamics.beta < 1.0 {
        discounted_horizon(dynamics.beta, config.discount_truncation_tol)
    } else {
        config.burn_in + config.horizon
    };
    let distortion = spec.distortion();
    let run = |r: u32| replication(&dynamics, distortion, policy, config, steps, r);
    let per_rep: Vec<(f64, f64)> = if config.parallel {
        (0..config.replications)
            .into_par_iter()
            .map(run)
            .collect::<Result<_>>()?
    } else {
        (0..config.replications).map(run).collect::<Result<_>>()?
    };
    let ds: Vec<f64> = per_rep.iter().map(|p| p.0).collect();
    let ns: Vec<f64> = per_rep.iter().map(|p| p.1).collect();
    let (d_hat, d_se) = mean_and_se(&ds);
    let (n_hat, n_se) = mean_and_se(&ns);
    Ok(SimResult {
        d_hat,
        n_hat,
        d_se,
        n_se,
        replications_used: config.replications,
        steps_per_replication: steps,
        seed: config.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DiscountFactor, DistortionFn, IntegerPmf};

    fn bd(beta: f64) -> ModelSpec {
        ModelSpecA::birth_death(0.3, beta).unwrap().into()
    }

    fn cfg(reps: u32, horizon: u64) -> SimConfig {
        SimConfig {
            horizon,
            replications: reps,
            seed: 7,
            ..SimConfig::default()
        }
    }

    #[test]
    fn always_transmit_is_exact() {
        let r = simulate(
            &bd(1.0),
            &PolicySpec::Threshold(ThresholdPolicy::always()),
            &cfg(4, 1000),
        )
        .unwrap();
        assert_eq!((r.d_hat, r.n_hat, r.d_se, r.n_se), (0.0, 1.0, 0.0, 0.0));
        let r = simulate(
            &bd(0.9),
            &PolicySpec::Threshold(ThresholdPolicy::always()),
            &cfg(4, 1000),
        )
        .unwrap();
        assert_eq!(r.d_hat, 0.0);
        assert!((r.n_hat - 1.0).abs() < 1e-9);
    }

    #[test]
    fn serial_and_parallel_agree_bitwise() {
        let policy = PolicySpec::Threshold(2.into());
        let mut c = cfg(16, 2000);
        let par = simulate(&bd(1.0), &policy, &c).unwrap();
        c.parallel = false;
        let ser = simulate(&bd(1.0), &policy, &c).unwrap();
        assert_eq!(par, ser);
        c.seed = 8;
        assert_ne!(simulate(&bd(1.0), &policy, &c).unwrap().d_hat, par.d_hat);
    }

    #[test]
    fn standard_errors_shrink_with_replications() {
        let policy = PolicySpec::Threshold(2.into());
        let small = simulate(&bd(1.0), &policy, &cfg(25, 2000)).unwrap();
        let large = simulate(&bd(1.0), &policy, &cfg(400, 2000)).unwrap();
        let ratio = small.d_se / large.d_se;
        assert!(ratio > 2.5 && ratio < 6.0, "ratio {ratio}");
    }

    #[test]
    fn discounted_horizon_meets_tolerance() {
        let t = discounted_horizon(0.9, 1e-10);
        assert!(0.9f64.powi(t as i32) < 1e-10 && 0.9f64.powi(t as i32 - 1) >= 1e-10);
    }

    #[test]
    fn explosion_is_reported() {
        let spec: ModelSpec = ModelSpecA::birth_death(0.3, 1.0).unwrap().with_a(2).into();
        let err = simulate(
            &spec,
            &PolicySpec::Threshold(ThresholdPolicy::never()),
            &cfg(2, 1000),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Overflow { .. }));
    }

    #[test]
    fn periodic_pattern_is_followed() {
        let policy = PolicySpec::periodic(vec![true, false, false]).unwrap();
        let r = simulate(&bd(1.0), &policy, &cfg(2, 3000)).unwrap();
        assert!((r.n_hat - 1.0 / 3.0).abs() < 1e-12);
        assert!(PolicySpec::Periodic {
            period: 2,
            pattern: vec![true]
        }
        .validate()
        .is_err());
    }

    #[test]
    fn time_sharing_pure_schedule_matches_threshold() {
        let ts = PolicySpec::TimeSharing {
            k: 2,
            schedule: vec![(1, 0)],
        };
        let th = PolicySpec::Threshold(2.into());
        assert_eq!(
            simulate(&bd(1.0), &ts, &cfg(3, 5000)).unwrap(),
            simulate(&bd(1.0), &th, &cfg(3, 5000)).unwrap()
        );
        let ts = PolicySpec::TimeSharing {
            k: 2,
            schedule: vec![(0, 1)],
        };
        let th = PolicySpec::Threshold(3.into());
        assert_eq!(
            simulate(&bd(1.0), &ts, &cfg(3, 5000)).unwrap(),
            simulate(&bd(1.0), &th, &cfg(3, 5000)).unwrap()
        );
    }

    #[test]
    fn tabulated_innovations_have_the_right_variance() {
        let pdf = SmoothPdf::tabulated(|w: f64| (1.0 - w.abs()).max(0.0), 1.0).unwrap();
        let spec: ModelSpec =
            ModelSpecB::new(1.0, pdf, DistortionFn::Quadratic, DiscountFactor::AVERAGE).into();
        // Transmitting every other step leaves one innovation of error half the time.
        let policy = PolicySpec::periodic(vec![true, false]).unwrap();
        let r = simulate(&spec, &policy, &cfg(20, 20_000)).unwrap();
        let expect = 0.5 / 6.0;
        assert!(
            (r.d_hat - expect).abs() < 3.0 * r.d_se + 1e-4,
            "{} vs {expect}",
            r.d_hat
        );
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let mut c = cfg(1, 10);
        c.replications = 0;
        assert!(simulate(&bd(1.0), &PolicySpec::IidRandom { alpha: 0.5 }, &c).is_err());
        assert!(simulate(&bd(1.0), &PolicySpec::IidRandom { alpha: 1.5 }, &cfg(1, 10)).is_err());
        let bad = ModelSpecA::new(
            1,
            IntegerPmf::new([(-1, 0.2), (0, 0.5), (1, 0.3)]).unwrap(),
            DistortionFn::Absolute,
            DiscountFactor::AVERAGE,
        );
        assert!(matches!(
            simulate(&bad.into(), &PolicySpec::Threshold(2.into()), &cfg(1, 10)),
            Err(Error::InvalidSpec(_))
        ));
    }
}
