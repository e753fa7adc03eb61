//! Command definitions and dispatch.

use std::fs;

use clap::{Args, Parser, Subcommand};
use seqlab_core::boundary::heuristic_boundary;
use seqlab_core::dp::{DpSolver, GridSpec, TruncatedProblem, DEFAULT_GRID_POINTS};
use seqlab_core::{
    BoundarySeries, DiscoveryCriterion, ModelSpec, PolicySpec, SimulationConfig, TruthSource,
};

use crate::artifact::{
    load_model, load_policy_spec, load_policy_table, parse_policy_token, write_json, write_meta,
    PolicyToken,
};
use crate::error::{CliError, CliResult};
use crate::ingest::{ingest_csv, rates};
use crate::report::{metrics_csv, metrics_document};
use crate::runner::run_simulation;

/// Sequential testing toolkit: fit priors, compute stopping boundaries,
/// solve for optimal rejection policies, and benchmark procedures by
/// simulation.
#[derive(Debug, Parser)]
#[command(name = "seqlab", version, about)]
pub struct Cli {
    /// Emit machine-readable JSON errors on stderr
    #[arg(long, global = true)]
    pub json_errors: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a Beta prior to empirical rate data (method of moments)
    FitPrior(FitPriorArgs),
    /// Compute the acceptance boundary series, optionally with the
    /// heuristic rejection boundary
    Boundaries(BoundariesArgs),
    /// Solve the k-truncated stopping problem for the optimal policy
    Solve(SolveArgs),
    /// Simulate one policy over a truth source and emit metrics
    Simulate(RunArgs),
    /// Benchmark several policies on identical truth sequences
    Compare(RunArgs),
}

#[derive(Debug, Args)]
pub struct FitPriorArgs {
    /// Input CSV with header id,trials,successes
    #[arg(long)]
    pub input: String,
    /// Keep only records with at least this many trials
    #[arg(long, default_value_t = 200)]
    pub min_trials: u64,
    /// Output path for the fitted model JSON
    #[arg(long)]
    pub out: String,
}

#[derive(Debug, Args)]
pub struct BoundariesArgs {
    /// Model JSON file, or an inline JSON object
    #[arg(long)]
    pub model: String,
    /// Effect threshold s of the discovery criterion
    #[arg(long)]
    pub s: f64,
    /// Error level of the discovery criterion
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Largest observation count to compute boundaries for
    #[arg(long, default_value_t = 5000)]
    pub horizon: u32,
    /// Also compute the heuristic rejection boundary
    #[arg(long)]
    pub heuristic: bool,
    /// Heuristic lookahead T_h
    #[arg(long, default_value_t = 2000)]
    pub t_h: u32,
    /// Heuristic plausibility level
    #[arg(long, default_value_t = 0.2)]
    pub beta_h: f64,
    /// Output path for the boundary series JSON
    #[arg(long)]
    pub out: String,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Model JSON file, or an inline JSON object
    #[arg(long)]
    pub model: String,
    /// Effect threshold s of the discovery criterion
    #[arg(long)]
    pub s: f64,
    /// Error level of the discovery criterion
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Truncation horizon
    #[arg(long, default_value_t = 5000)]
    pub k: u32,
    /// Fixed cost per started experiment
    #[arg(long, default_value_t = 0.0)]
    pub c: f64,
    /// Relative tolerance of the fixed-point bisection
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Normal model only: lower grid edge (defaults to s - 8*sigma0)
    #[arg(long)]
    pub grid_lo: Option<f64>,
    /// Normal model only: upper grid edge (defaults to s + 8*sigma0)
    #[arg(long)]
    pub grid_hi: Option<f64>,
    /// Normal model only: number of grid points (odd)
    #[arg(long)]
    pub grid_points: Option<u32>,
    /// Output path for the policy table JSON
    #[arg(long)]
    pub out: String,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Model JSON file, or an inline JSON object
    #[arg(long)]
    pub model: String,
    /// Effect threshold s; repeat for a sweep (one row per policy and s)
    #[arg(long, required = true)]
    pub s: Vec<f64>,
    /// Error level of the discovery criterion
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Policy: optimal[:table.json], heuristic, fixed-n[:N],
    /// fixed-n-early[:N], bayes-seq[:CAP], or a policy spec .json
    #[arg(long, required = true)]
    pub policy: Vec<String>,
    /// Truth source: "prior" or "csv:<path>"
    #[arg(long, default_value = "prior")]
    pub truth: String,
    /// Replications per policy and threshold
    #[arg(long, default_value_t = 1000)]
    pub replications: u32,
    /// Master seed (defaults to $SEQLAB_SEED, else 0)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for replications
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Reshuffle an empirical effect list every replication (default)
    #[arg(long, overrides_with = "no_shuffle")]
    pub shuffle: bool,
    /// Keep an empirical effect list in file order every replication
    #[arg(long, overrides_with = "shuffle")]
    pub no_shuffle: bool,
    /// Minimum trials when ingesting a CSV truth source
    #[arg(long, default_value_t = 200)]
    pub min_trials: u64,
    /// Fixed cost per started experiment
    #[arg(long, default_value_t = 0.0)]
    pub c: f64,
    /// Truncation horizon for optimal/heuristic policies
    #[arg(long, default_value_t = 5000)]
    pub k: u32,
    /// Relative tolerance when solving the optimal policy in process
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Heuristic lookahead T_h
    #[arg(long, default_value_t = 2000)]
    pub t_h: u32,
    /// Heuristic plausibility level
    #[arg(long, default_value_t = 0.2)]
    pub beta_h: f64,
    /// Sample size of fixed-n policies without an inline parameter
    #[arg(long, default_value_t = 1000)]
    pub fixed_n: u32,
    /// Observation cap of bayes-seq without an inline parameter
    #[arg(long, default_value_t = 4000)]
    pub cap: u32,
    /// bayes-seq rejection level as a fraction of the prior P(mu > s)
    #[arg(long, default_value_t = 0.9)]
    pub beta_frac: f64,
    /// Normal model only: lower grid edge (defaults to s - 8*sigma0)
    #[arg(long)]
    pub grid_lo: Option<f64>,
    /// Normal model only: upper grid edge (defaults to s + 8*sigma0)
    #[arg(long)]
    pub grid_hi: Option<f64>,
    /// Normal model only: number of grid points (odd)
    #[arg(long)]
    pub grid_points: Option<u32>,
    /// Output base path: writes <out>.csv and <out>.json
    #[arg(long)]
    pub out: String,
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::FitPrior(args) => cmd_fit_prior(&args),
        Command::Boundaries(args) => cmd_boundaries(&args),
        Command::Solve(args) => cmd_solve(&args),
        Command::Simulate(args) => cmd_run(&args, false),
        Command::Compare(args) => cmd_run(&args, true),
    }
}

fn resolve_seed(flag: Option<u64>) -> CliResult<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("SEQLAB_SEED") {
        Ok(text) => text
            .parse()
            .map_err(|_| CliError::Config(format!("SEQLAB_SEED '{text}' is not a u64"))),
        Err(_) => Ok(0),
    }
}

fn cmd_fit_prior(args: &FitPriorArgs) -> CliResult<()> {
    let file = fs::File::open(&args.input)
        .map_err(|e| CliError::Config(format!("cannot open {}: {e}", args.input)))?;
    let records = ingest_csv(file, args.min_trials)?;
    let rate_values = rates(&records);
    let (a, b) = seqlab_core::fit_beta_mom(&rate_values)?;
    let model = ModelSpec::beta_bernoulli(a, b)?;
    write_json(&args.out, &model)?;

    let n = rate_values.len() as f64;
    let mean = rate_values.iter().sum::<f64>() / n;
    let variance =
        rate_values.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (n - 1.0);
    write_meta(
        &args.out,
        &serde_json::json!({
            "command": "fit-prior",
            "input": args.input,
            "min_trials": args.min_trials,
            "records_kept": records.len(),
            "sample_mean": mean,
            "sample_variance": variance,
            "variance_estimator": "unbiased (n-1 denominator)",
            "out": args.out,
        }),
    )?;
    println!(
        "fitted beta prior: a = {a}, b = {b} from {} records -> {}",
        records.len(),
        args.out
    );
    Ok(())
}

fn cmd_boundaries(args: &BoundariesArgs) -> CliResult<()> {
    let model = load_model(&args.model)?;
    let criterion = DiscoveryCriterion::new(args.s, args.alpha, &model)?;
    let series = BoundarySeries::compute(model, criterion, args.horizon)?;

    let mut doc = serde_json::to_value(&series)?;
    if args.heuristic {
        let mut r = Vec::with_capacity(args.horizon as usize);
        for n in 1..=args.horizon {
            r.push(heuristic_boundary(&model, &criterion, n, args.t_h, args.beta_h)?);
        }
        doc.as_object_mut().expect("series is an object").insert(
            "heuristic".into(),
            serde_json::json!({"t_h": args.t_h, "beta": args.beta_h, "r": r}),
        );
    }
    write_json(&args.out, &doc)?;
    write_meta(
        &args.out,
        &serde_json::json!({
            "command": "boundaries",
            "model": model,
            "s": args.s,
            "alpha": args.alpha,
            "horizon": args.horizon,
            "heuristic": args.heuristic,
            "t_h": args.t_h,
            "beta_h": args.beta_h,
            "out": args.out,
        }),
    )?;
    let first_reachable = series
        .values()
        .iter()
        .position(Option::is_some)
        .map(|i| i + 1);
    match first_reachable {
        Some(n) => println!(
            "boundaries for n = 1..{} -> {} (first reachable at n = {n})",
            args.horizon, args.out
        ),
        None => println!(
            "boundaries for n = 1..{} -> {} (discovery unreachable everywhere)",
            args.horizon, args.out
        ),
    }
    Ok(())
}

fn grid_for(
    model: &ModelSpec,
    s: f64,
    lo: Option<f64>,
    hi: Option<f64>,
    points: Option<u32>,
) -> Option<GridSpec> {
    match *model {
        ModelSpec::BetaBernoulli { .. } => None,
        ModelSpec::NormalKnownVariance { sigma0, .. } => Some(GridSpec::YGrid {
            lo: lo.unwrap_or(s - 8.0 * sigma0),
            hi: hi.unwrap_or(s + 8.0 * sigma0),
            points: points.unwrap_or(DEFAULT_GRID_POINTS),
        }),
    }
}

fn cmd_solve(args: &SolveArgs) -> CliResult<()> {
    let model = load_model(&args.model)?;
    let criterion = DiscoveryCriterion::new(args.s, args.alpha, &model)?;
    let problem = match grid_for(&model, args.s, args.grid_lo, args.grid_hi, args.grid_points) {
        Some(grid) => TruncatedProblem::with_grid(model, criterion, args.k, args.c, grid)?,
        None => TruncatedProblem::new(model, criterion, args.k, args.c)?,
    };
    let grid = problem.grid;
    let table = DpSolver::new(problem)?.solve_optimal(args.tol)?;
    write_json(&args.out, &table)?;
    write_meta(
        &args.out,
        &serde_json::json!({
            "command": "solve",
            "model": model,
            "s": args.s,
            "alpha": args.alpha,
            "k": args.k,
            "c": args.c,
            "tol": args.tol,
            "grid": grid,
            "bisection_evaluations": table.iterations.len(),
            "out": args.out,
        }),
    )?;
    println!(
        "kappa* = {} after {} evaluations -> {}",
        table.kappa_star,
        table.iterations.len(),
        args.out
    );
    Ok(())
}

fn resolve_truth(args: &RunArgs, model: &ModelSpec) -> CliResult<TruthSource> {
    let shuffle = !args.no_shuffle;
    if args.truth == "prior" {
        return Ok(TruthSource::PriorSampled);
    }
    if let Some(path) = args.truth.strip_prefix("csv:") {
        let file = fs::File::open(path)
            .map_err(|e| CliError::Config(format!("cannot open {path}: {e}")))?;
        let records = ingest_csv(file, args.min_trials)?;
        if records.is_empty() {
            return Err(CliError::Config(format!(
                "no records in {path} pass min_trials = {}",
                args.min_trials
            )));
        }
        if let ModelSpec::NormalKnownVariance { .. } = model {
            return Err(CliError::Config(
                "csv truth sources carry rates in [0,1]; use a beta_bernoulli model".into(),
            ));
        }
        return Ok(TruthSource::EmpiricalList {
            effects: records.iter().map(|r| r.rate()).collect(),
            shuffle,
        });
    }
    Err(CliError::Config(format!(
        "unknown truth source '{}'; expected 'prior' or 'csv:<path>'",
        args.truth
    )))
}

fn resolve_policy_spec(
    token: &PolicyToken,
    args: &RunArgs,
    model: ModelSpec,
    criterion: DiscoveryCriterion,
    multiple_s: bool,
) -> CliResult<PolicySpec> {
    Ok(match token {
        PolicyToken::Optimal { table_path: Some(path) } => {
            if multiple_s {
                return Err(CliError::Config(
                    "a pre-solved table fixes one threshold; use --policy optimal to re-solve \
                     per s, or pass a single --s"
                        .into(),
                ));
            }
            PolicySpec::Optimal {
                table: Box::new(load_policy_table(path)?),
            }
        }
        PolicyToken::Optimal { table_path: None } => {
            let problem = match grid_for(
                &model,
                criterion.s,
                args.grid_lo,
                args.grid_hi,
                args.grid_points,
            ) {
                Some(grid) => {
                    TruncatedProblem::with_grid(model, criterion, args.k, args.c, grid)?
                }
                None => TruncatedProblem::new(model, criterion, args.k, args.c)?,
            };
            let table = DpSolver::new(problem)?.solve_optimal(args.tol)?;
            PolicySpec::Optimal {
                table: Box::new(table),
            }
        }
        PolicyToken::Heuristic => PolicySpec::Heuristic {
            t_h: args.t_h,
            beta: args.beta_h,
            k: args.k,
        },
        PolicyToken::FixedN { n } => PolicySpec::FixedN {
            n: n.unwrap_or(args.fixed_n),
        },
        PolicyToken::FixedNEarly { n } => PolicySpec::FixedNEarlyStop {
            n: n.unwrap_or(args.fixed_n),
        },
        PolicyToken::BayesSeq { cap } => {
            let prior_upper = 1.0 - model.prior_cdf(criterion.s);
            PolicySpec::BayesSequential {
                beta_reject: args.beta_frac * prior_upper,
                cap: cap.unwrap_or(args.cap),
            }
        }
        PolicyToken::SpecFile(path) => load_policy_spec(path)?,
    })
}

fn cmd_run(args: &RunArgs, compare: bool) -> CliResult<()> {
    if !compare && args.policy.len() != 1 {
        return Err(CliError::Config(
            "simulate takes exactly one --policy; use compare for several".into(),
        ));
    }
    let model = load_model(&args.model)?;
    let seed = resolve_seed(args.seed)?;
    let truth = resolve_truth(args, &model)?;
    let tokens: Vec<PolicyToken> = args
        .policy
        .iter()
        .map(|t| parse_policy_token(t))
        .collect::<CliResult<_>>()?;
    if args.threads == 0 {
        return Err(CliError::Config("--threads must be at least 1".into()));
    }

    let mut rows = Vec::new();
    for &s in &args.s {
        let criterion = DiscoveryCriterion::new(s, args.alpha, &model)?;
        for token in &tokens {
            let policy = resolve_policy_spec(token, args, model, criterion, args.s.len() > 1)?;
            let config = SimulationConfig {
                model,
                criterion,
                policy,
                truth: truth.clone(),
                replications: args.replications,
                seed,
                cost_c: args.c,
            };
            rows.push(run_simulation(&config, args.threads)?);
        }
    }

    let resolved = serde_json::json!({
        "command": if compare { "compare" } else { "simulate" },
        "model": model,
        "s": args.s,
        "alpha": args.alpha,
        "policies": args.policy,
        "truth": args.truth,
        "replications": args.replications,
        "seed": seed,
        "threads": args.threads,
        "shuffle": !args.no_shuffle,
        "min_trials": args.min_trials,
        "c": args.c,
        "k": args.k,
        "tol": args.tol,
        "t_h": args.t_h,
        "beta_h": args.beta_h,
        "fixed_n": args.fixed_n,
        "cap": args.cap,
        "beta_frac": args.beta_frac,
        "out": args.out,
    });
    fs::write(format!("{}.csv", args.out), metrics_csv(&rows))?;
    write_json(&format!("{}.json", args.out), &metrics_document(&resolved, &rows))?;
    for row in &rows {
        println!(
            "{} s={}: mean_time={} fdp={} power={} n_disc={}",
            row.policy,
            row.s,
            row.mean_time_to_discovery.map_or("-".into(), |v| format!("{v:.2}")),
            row.fdp.map_or("-".into(), |v| format!("{v:.4}")),
            row.power.map_or("-".into(), |v| format!("{v:.4}")),
            row.n_discoveries,
        );
    }
    println!("wrote {}.csv and {}.json", args.out, args.out);
    Ok(())
}
