//! Subcommand implementations producing [`OutputRecord`]s.

use remest_core::{
    algorithm1_costly, algorithm2_constrained, optimal_constrained, optimal_costly, performance,
    performance_table, periodic_pattern, simulate, time_sharing_schedule, tradeoff_curve,
    validate_spec, CurveKind, DiscountFactor, DistortionFn, IntegerPmf, ModelSpec, ModelSpecA,
    ModelSpecB, PeriodicFamily, PolicySpec, SimConfig, SmoothPdf, ThresholdPolicy,
};
use sha2::{Digest, Sha256};

use crate::args::{
    CurveArgs, Distortion, Family, Model, PolicyKind, Problem, SimArgs, SimulateArgs, SolveArgs,
    SpecArgs, TableArgs,
};
use crate::output::{format_display, Cell, OutputRecord};
use crate::CliError;

/// Birth-death parameters above this make `p_0 < p_1`.
const MAX_TABLE_P: f64 = 1.0 / 3.0;

fn distortion_of(spec: &SpecArgs) -> DistortionFn {
    match (spec.distortion, spec.model) {
        (Some(Distortion::Abs), _) | (None, Model::A) => DistortionFn::Absolute,
        (Some(Distortion::Quad), _) | (None, Model::B) => DistortionFn::Quadratic,
    }
}

fn distortion_name(d: &DistortionFn) -> &'static str {
    match d {
        DistortionFn::Absolute => "abs",
        DistortionFn::Quadratic => "quad",
        _ => "custom",
    }
}

/// Builds and validates the model instance described by the flags.
pub fn build_spec(spec: &SpecArgs) -> Result<ModelSpec, CliError> {
    let beta = DiscountFactor::new(spec.beta)?;
    let distortion = distortion_of(spec);
    let model: ModelSpec = match spec.model {
        Model::A => {
            if spec.a.fract() != 0.0 || spec.a.abs() > 1e6 {
                return Err(CliError::Usage(format!(
                    "model A needs an integral --a, got {}",
                    spec.a
                )));
            }
            ModelSpecA::new(
                spec.a as i64,
                IntegerPmf::birth_death(spec.p)?,
                distortion,
                beta,
            )
            .into()
        }
        Model::B => {
            ModelSpecB::new(spec.a, SmoothPdf::gaussian(spec.sigma)?, distortion, beta).into()
        }
    };
    let violations = validate_spec(&model);
    if !violations.is_empty() {
        return Err(remest_core::Error::InvalidSpec(violations).into());
    }
    Ok(model)
}

/// Canonical flags describing the instance, reused for hashing and echo.
pub fn spec_flags(spec: &SpecArgs) -> String {
    let d = distortion_name(&distortion_of(spec));
    match spec.model {
        Model::A => format!(
            "--model A --beta {:?} --a {:?} --p {:?} --distortion {d}",
            spec.beta, spec.a, spec.p
        ),
        Model::B => format!(
            "--model B --beta {:?} --a {:?} --sigma {:?} --distortion {d}",
            spec.beta, spec.a, spec.sigma
        ),
    }
}

/// First 16 hex digits of the SHA-256 of a canonical description.
pub fn short_hash(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn spec_a(spec: &ModelSpec) -> Result<&ModelSpecA, CliError> {
    match spec {
        ModelSpec::A(s) => Ok(s),
        ModelSpec::B(_) => Err(CliError::Usage("this policy needs --model A".into())),
    }
}

pub fn cmd_table(args: &TableArgs) -> Result<OutputRecord, CliError> {
    if !(args.p > 0.0 && args.p < MAX_TABLE_P) {
        return Err(CliError::Usage(format!(
            "--p must lie in (0, 1/3), got {}",
            args.p
        )));
    }
    if args.betas.is_empty() {
        return Err(CliError::Usage("need at least one --beta".into()));
    }
    let betas: Vec<String> = args.betas.iter().map(|b| format!("{b:?}")).collect();
    let command = format!(
        "table --p {:?} --beta {} --k-max {}",
        args.p,
        betas.join(","),
        args.k_max
    );
    let mut rec = OutputRecord::new(
        command,
        &[
            "beta",
            "k",
            "D",
            "N",
            "lambda",
            "D_4dp",
            "N_4dp",
            "lambda_4dp",
        ],
    );
    rec.meta(
        "spec_hash",
        short_hash(&format!("birth-death --p {:?}", args.p)),
    )
    .meta("p", args.p)
    .meta("k_max", args.k_max);
    for &beta in &args.betas {
        let spec = ModelSpecA::birth_death(args.p, beta)?;
        let perf = performance_table(&spec, args.k_max + 1)?;
        for k in 0..=args.k_max as usize {
            let (d, n) = (perf[k].distortion, perf[k].transmission_rate);
            // Price at which f^(k) and f^(k+1) cost the same.
            let lambda =
                (k > 0).then(|| (perf[k + 1].distortion - d) / (n - perf[k + 1].transmission_rate));
            rec.push(vec![
                beta.into(),
                (k as u32).into(),
                d.into(),
                n.into(),
                lambda.into(),
                format_display(d).into(),
                format_display(n).into(),
                lambda
                    .map_or_else(|| "—".to_string(), format_display)
                    .into(),
            ]);
        }
    }
    Ok(rec)
}

fn names(problem: Problem) -> (&'static str, &'static str, CurveKind) {
    match problem {
        Problem::Costly => ("lambda", "C", CurveKind::Costly),
        Problem::Constrained => ("alpha", "D", CurveKind::Constrained),
    }
}

fn problem_name(problem: Problem) -> &'static str {
    match problem {
        Problem::Costly => "costly",
        Problem::Constrained => "constrained",
    }
}

/// Returns the curve and any shape warnings.
pub fn cmd_curve(args: &CurveArgs) -> Result<(OutputRecord, Vec<String>), CliError> {
    let spec = build_spec(&args.spec)?;
    let (x_name, y_name, kind) = names(args.kind);
    let flags = spec_flags(&args.spec);
    let mut warnings = Vec::new();
    let rec = match &spec {
        ModelSpec::A(s) => {
            let command = format!(
                "curve {flags} --kind {} --k-max {}",
                problem_name(args.kind),
                args.k_max
            );
            let mut rec = OutputRecord::new(command, &[x_name, y_name, "k"]);
            rec.meta("spec_hash", short_hash(&flags))
                .meta("k_max", args.k_max);
            let curve = tradeoff_curve(s, kind, args.k_max)?;
            for p in curve.points() {
                rec.push(vec![
                    p.abscissa.into(),
                    p.ordinate.into(),
                    Cell::Int(p.threshold as i64),
                ]);
            }
            rec
        }
        ModelSpec::B(s) => {
            if args.grid.is_empty() {
                return Err(CliError::Usage("model B curves need --grid".into()));
            }
            if args.grid.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(CliError::Usage("--grid must be strictly increasing".into()));
            }
            let grid: Vec<String> = args.grid.iter().map(|x| format!("{x:?}")).collect();
            let command = format!(
                "curve {flags} --kind {} --grid {} --epsilon {:?}",
                problem_name(args.kind),
                grid.join(","),
                args.epsilon
            );
            let mut rec = OutputRecord::new(command, &[x_name, y_name, "k", "N"]);
            rec.meta("spec_hash", short_hash(&flags))
                .meta("epsilon", args.epsilon);
            let points: Vec<(f64, f64, f64, f64)> = args
                .grid
                .iter()
                .map(|&x| match args.kind {
                    Problem::Costly => algorithm1_costly(s, x, args.epsilon)
                        .map(|o| (x, o.cost, o.k, o.performance.transmission_rate)),
                    Problem::Constrained => algorithm2_constrained(s, x, args.epsilon)
                        .map(|o| (x, o.d_star, o.k, o.performance.transmission_rate)),
                })
                .collect::<Result<_, _>>()?;
            for w in points.windows(2) {
                let ok = match args.kind {
                    Problem::Costly => w[1].1 >= w[0].1,
                    Problem::Constrained => w[1].1 <= w[0].1,
                };
                if !ok {
                    warnings.push(format!(
                        "warning: optimal value not monotone between {x_name}={} and {x_name}={}",
                        w[0].0, w[1].0
                    ));
                }
            }
            for (x, y, k, n) in points {
                rec.push(vec![x.into(), y.into(), k.into(), n.into()]);
            }
            rec
        }
    };
    Ok((rec, warnings))
}

pub fn cmd_solve(args: &SolveArgs) -> Result<OutputRecord, CliError> {
    let spec = build_spec(&args.spec)?;
    let flags = spec_flags(&args.spec);
    let value = match args.problem {
        Problem::Costly => args
            .lambda
            .ok_or_else(|| CliError::Usage("costly problems need --lambda".into()))?,
        Problem::Constrained => args
            .alpha
            .ok_or_else(|| CliError::Usage("constrained problems need --alpha".into()))?,
    };
    let (x_flag, _, _) = names(args.problem);
    let mut command = format!(
        "solve {} {flags} --{x_flag} {value:?}",
        problem_name(args.problem)
    );
    if matches!(spec, ModelSpec::B(_)) {
        command.push_str(&format!(" --epsilon {:?}", args.epsilon));
    }
    let mut rec = OutputRecord::new(
        command,
        &[
            "problem",
            x_flag,
            "k",
            "theta",
            "boundary_prob",
            "D",
            "N",
            "C",
        ],
    );
    rec.meta("spec_hash", short_hash(&flags));
    let problem = problem_name(args.problem);
    let row: Vec<Cell> = match (&spec, args.problem) {
        (ModelSpec::A(s), Problem::Costly) => {
            let o = optimal_costly(s, value)?;
            vec![
                problem.into(),
                value.into(),
                o.k.into(),
                Cell::Empty,
                Cell::Empty,
                o.performance.distortion.into(),
                o.performance.transmission_rate.into(),
                o.cost.into(),
            ]
        }
        (ModelSpec::A(s), Problem::Constrained) => {
            let o = optimal_constrained(s, value)?;
            vec![
                problem.into(),
                value.into(),
                o.policy.k_star.into(),
                o.policy.theta_star.into(),
                o.policy.boundary_prob.into(),
                o.d_star.into(),
                o.rate.into(),
                Cell::Empty,
            ]
        }
        (ModelSpec::B(s), Problem::Costly) => {
            rec.meta("epsilon", args.epsilon);
            let o = algorithm1_costly(s, value, args.epsilon)?;
            vec![
                problem.into(),
                value.into(),
                o.k.into(),
                Cell::Empty,
                Cell::Empty,
                o.performance.distortion.into(),
                o.performance.transmission_rate.into(),
                o.cost.into(),
            ]
        }
        (ModelSpec::B(s), Problem::Constrained) => {
            rec.meta("epsilon", args.epsilon);
            let o = algorithm2_constrained(s, value, args.epsilon)?;
            vec![
                problem.into(),
                value.into(),
                o.k.into(),
                Cell::Empty,
                Cell::Empty,
                o.d_star.into(),
                o.performance.transmission_rate.into(),
                Cell::Empty,
            ]
        }
    };
    rec.push(row);
    Ok(rec)
}

/// Simulation settings from flags.
pub fn sim_config(sim: &SimArgs, parallel: bool) -> SimConfig {
    SimConfig {
        horizon: sim.horizon,
        replications: sim.reps,
        seed: sim.seed,
        burn_in: sim.burn_in,
        parallel,
        ..SimConfig::default()
    }
}

fn family(f: Family) -> PeriodicFamily {
    match f {
        Family::OneInT => PeriodicFamily::OneInT,
        Family::AllButOne => PeriodicFamily::AllButOne,
    }
}

/// Resolves the policy flags against the instance.
pub fn build_policy(args: &SimulateArgs, spec: &ModelSpec) -> Result<PolicySpec, CliError> {
    let alpha = || {
        args.alpha
            .ok_or_else(|| CliError::Usage("this policy needs --alpha".into()))
    };
    let policy = match args.policy {
        PolicyKind::Threshold => {
            let k = args
                .k
                .ok_or_else(|| CliError::Usage("threshold policies need --k".into()))?;
            PolicySpec::Threshold(ThresholdPolicy::new(k)?)
        }
        PolicyKind::Iid => PolicySpec::IidRandom { alpha: alpha()? },
        PolicyKind::Periodic => {
            PolicySpec::periodic(periodic_pattern(alpha()?, family(args.family))?)?
        }
        PolicyKind::Randomized => {
            let o = optimal_constrained(spec_a(spec)?, alpha()?)?;
            PolicySpec::RandomizedThreshold(o.policy)
        }
        PolicyKind::Steering => {
            // Steer boundary-visit frequencies toward the per-visit probability
            // that meets the rate constraint.
            let o = optimal_constrained(spec_a(spec)?, alpha()?)?;
            PolicySpec::Steering {
                k: o.policy.k_star,
                theta: o.policy.boundary_prob,
            }
        }
        PolicyKind::TimeSharing => {
            let a = spec_a(spec)?;
            let alpha = alpha()?;
            let o = optimal_constrained(a, alpha)?;
            let k = o.policy.k_star;
            let n_k = performance(a, k, None)?.transmission_rate;
            let n_k1 = performance(a, k + 1, None)?.transmission_rate;
            let schedule =
                time_sharing_schedule(alpha, n_k, n_k1, o.policy.theta_star, args.depth)?;
            PolicySpec::TimeSharing { k, schedule }
        }
    };
    Ok(policy)
}

fn policy_flags(args: &SimulateArgs) -> String {
    let name = match args.policy {
        PolicyKind::Threshold => "threshold",
        PolicyKind::Randomized => "randomized",
        PolicyKind::Periodic => "periodic",
        PolicyKind::Iid => "iid",
        PolicyKind::Steering => "steering",
        PolicyKind::TimeSharing => "time-sharing",
    };
    let mut s = format!("--policy {name}");
    if let Some(k) = args.k {
        s.push_str(&format!(" --k {k:?}"));
    }
    if let Some(alpha) = args.alpha {
        s.push_str(&format!(" --alpha {alpha:?}"));
    }
    match args.policy {
        PolicyKind::Periodic => s.push_str(match args.family {
            Family::OneInT => " --family one-in-t",
            Family::AllButOne => " --family all-but-one",
        }),
        PolicyKind::TimeSharing => s.push_str(&format!(" --depth {}", args.depth)),
        _ => {}
    }
    s
}

pub fn cmd_simulate(args: &SimulateArgs, parallel: bool) -> Result<OutputRecord, CliError> {
    let spec = build_spec(&args.spec)?;
    let policy = build_policy(args, &spec)?;
    let config = sim_config(&args.sim, parallel);
    let flags = spec_flags(&args.spec);
    let command = format!(
        "simulate {flags} {} --seed {} --reps {} --horizon {} --burn-in {}",
        policy_flags(args),
        config.seed,
        config.replications,
        config.horizon,
        config.burn_in
    );
    let r = simulate(&spec, &policy, &config)?;
    let mut rec = OutputRecord::new(
        command,
        &[
            "d_hat",
            "n_hat",
            "d_se",
            "n_se",
            "replications",
            "steps_per_replication",
            "seed",
        ],
    );
    rec.meta("spec_hash", short_hash(&flags))
        .meta("seed", config.seed)
        .meta("replications", config.replications)
        .meta("horizon", config.horizon)
        .meta("burn_in", config.burn_in)
        .meta("discount_truncation_tol", config.discount_truncation_tol)
        .meta(
            "policy",
            serde_json::to_value(&policy).expect("policy serializes"),
        );
    rec.push(vec![
        r.d_hat.into(),
        r.n_hat.into(),
        r.d_se.into(),
        r.n_se.into(),
        r.replications_used.into(),
        r.steps_per_replication.into(),
        r.seed.into(),
    ]);
    Ok(rec)
}
