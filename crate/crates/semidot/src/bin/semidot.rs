//! CLI driver: bind a TOML config to one experiment and emit
//! `results.csv`, `summary.json` and `meta.json` in the output directory.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use semidot::config::Config;
use semidot::experiments::{self, EpsRule, FunctionalKind};
use semidot::functionals::{self, TestField};
use semidot::output::{self, fmt};
use semidot::{eot_solver, geometry, sd_solver, Vec2};
use serde_json::json;
use std::path::PathBuf;
use std::sync::Arc;

#[derive(Parser)]
#[command(name = "semidot", about = "semidiscrete optimal transport laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Problem/experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Base seed for sampled experiments and test families.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker-thread cap for parallel experiments.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Dotted-path config overrides, e.g. --set experiment.eps=0.01
    #[arg(long = "set", global = true)]
    overrides: Vec<String>,
    /// Also emit an SVG plot/diagram.
    #[arg(long, global = true)]
    svg: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the unregularized semidual problem and dump the diagram.
    Solve,
    /// Solve the entropic problem at experiment.eps.
    Entropic,
    /// ε sweep + rate fit for the configured functional.
    Rates,
    /// Sharp ε² constant check at experiment.eps.
    Constant,
    /// Resampling CLT simulation.
    Clt,
    /// Closed-form tanh oracle on the symmetric 1D instance.
    Oracle,
}

fn main() {
    env_logger::init();
    if let Err(e) = run() {
        // machine-readable error record on stderr
        eprintln!(
            "{}",
            json!({ "error": e.to_string() })
        );
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("thread pool")?;
    }
    let config_path = cli
        .config
        .as_ref()
        .context("--config is required")?;
    let cfg = Config::load(config_path, &cli.overrides)?;
    let seed = cli.seed.unwrap_or(cfg.experiment.family_seed);
    std::fs::create_dir_all(&cli.out)?;

    let source = cfg.source_measure()?;
    let target = cfg.target_measure()?;
    let command_name = match cli.command {
        Command::Solve => "solve",
        Command::Entropic => "entropic",
        Command::Rates => "rates",
        Command::Constant => "constant",
        Command::Clt => "clt",
        Command::Oracle => "oracle",
    };

    match cli.command {
        Command::Solve => {
            let rep = sd_solver::solve_semidual(
                &source,
                &target,
                sd_solver::default_tol(source.dim()),
                sd_solver::DEFAULT_MAX_ITER,
            )?;
            if !rep.converged {
                bail!("solver stalled at residual {}", rep.residual);
            }
            let diag = geometry::build_diagram(&source, &target, &rep.potential)?;
            let masses = geometry::cell_masses(&diag, &source)?;
            let rows: Vec<Vec<String>> = (0..target.len())
                .map(|i| {
                    vec![
                        i.to_string(),
                        fmt(rep.potential.values()[i]),
                        fmt(masses[i]),
                        fmt(target.weights()[i]),
                    ]
                })
                .collect();
            output::write_csv(&cli.out.join("results.csv"), &["site", "z", "mass", "weight"], &rows)?;
            output::write_summary(
                &cli.out.join("summary.json"),
                &cfg,
                json!({
                    "z": rep.potential.values(),
                    "residual": rep.residual,
                    "iterations": rep.iterations,
                    "objective": rep.objective,
                }),
            )?;
            std::fs::write(&cli.out.join("diagram.txt"), diag.dump_text(Some(&masses)))?;
            if cli.svg {
                std::fs::write(&cli.out.join("diagram.svg"), output::svg_diagram(&diag))?;
            }
        }
        Command::Entropic => {
            let eps = cfg.experiment.eps;
            let rep = eot_solver::solve_entropic(
                &source,
                &target,
                eps,
                sd_solver::default_tol(source.dim()),
                60,
            )?;
            if !rep.converged {
                bail!("entropic solver stalled at residual {}", rep.residual);
            }
            let rows: Vec<Vec<String>> = (0..target.len())
                .map(|i| vec![i.to_string(), fmt(rep.potential.values()[i])])
                .collect();
            output::write_csv(&cli.out.join("results.csv"), &["site", "z"], &rows)?;
            output::write_summary(
                &cli.out.join("summary.json"),
                &cfg,
                json!({
                    "eps": eps,
                    "z": rep.potential.values(),
                    "residual": rep.residual,
                    "iterations": rep.iterations,
                    "objective": rep.objective,
                }),
            )?;
        }
        Command::Rates => {
            let kind = functional_kind(&cfg, &source, seed)?;
            let grid = experiments::geometric_grid(
                cfg.experiment.eps_hi,
                cfg.experiment.eps_lo,
                cfg.experiment.eps_count,
            )?;
            let sweep = experiments::rate_sweep(&source, &target, &kind, &grid)?;
            let rows: Vec<Vec<String>> = sweep
                .rows
                .iter()
                .map(|r| {
                    vec![
                        fmt(r.eps),
                        fmt(r.value),
                        fmt(r.residual),
                        r.iterations.to_string(),
                        r.converged.to_string(),
                    ]
                })
                .collect();
            output::write_csv(
                &cli.out.join("results.csv"),
                &["eps", "value", "residual", "iterations", "converged"],
                &rows,
            )?;
            output::write_summary(
                &cli.out.join("summary.json"),
                &cfg,
                json!({
                    "functional": sweep.label,
                    "slope": sweep.fit.slope,
                    "intercept": sweep.fit.intercept,
                    "r_squared": sweep.fit.r_squared,
                    "window": sweep.fit.window,
                    "seed": seed,
                }),
            )?;
            if cli.svg {
                let values: Vec<f64> = sweep.rows.iter().map(|r| r.value).collect();
                std::fs::write(
                    &cli.out.join("plot.svg"),
                    output::svg_rate_plot(&grid, &values, sweep.fit.slope, sweep.fit.intercept),
                )?;
            }
        }
        Command::Constant => {
            let check = experiments::constant_check(&source, &target, cfg.experiment.eps)?;
            output::write_csv(
                &cli.out.join("results.csv"),
                &["eps", "measured", "predicted", "rel_gap"],
                &[vec![
                    fmt(check.eps),
                    fmt(check.measured),
                    fmt(check.predicted),
                    fmt(check.rel_gap),
                ]],
            )?;
            output::write_summary(
                &cli.out.join("summary.json"),
                &cfg,
                serde_json::to_value(&check)?,
            )?;
        }
        Command::Clt => {
            let phi = TestField::new(Arc::new(|x: Vec2| x), 1.0, 2.0, "id")
                .map_err(anyhow::Error::from)?;
            let rule = EpsRule {
                coeff: cfg.experiment.eps_coeff,
                beta: cfg.experiment.eps_beta,
            };
            let stats = experiments::clt_sim(
                &source,
                &target,
                &cfg.experiment.n_list,
                rule,
                &phi,
                cfg.experiment.trials,
                seed,
            )?;
            let rows: Vec<Vec<String>> = stats
                .iter()
                .map(|s| {
                    vec![
                        s.n.to_string(),
                        fmt(s.eps),
                        fmt(s.mean),
                        fmt(s.variance),
                        fmt(s.std_error),
                        fmt(s.skewness),
                        fmt(s.excess_kurtosis),
                        fmt(s.mean_abs_gap),
                        s.resampled.to_string(),
                    ]
                })
                .collect();
            output::write_csv(
                &cli.out.join("results.csv"),
                &[
                    "n",
                    "eps",
                    "mean",
                    "variance",
                    "std_error",
                    "skewness",
                    "excess_kurtosis",
                    "mean_abs_gap",
                    "resampled",
                ],
                &rows,
            )?;
            output::write_summary(
                &cli.out.join("summary.json"),
                &cfg,
                json!({ "seed": seed, "stats": stats }),
            )?;
        }
        Command::Oracle => {
            let eps = cfg.experiment.eps;
            let alpha = cfg.experiment.alpha;
            let value = experiments::oracle_tanh(eps, alpha)?;
            let limit = experiments::tail_integral(alpha)?;
            let scaled = value / eps.powf(1.0 + alpha);
            output::write_csv(
                &cli.out.join("results.csv"),
                &["eps", "alpha", "value", "scaled", "limit"],
                &[vec![fmt(eps), fmt(alpha), fmt(value), fmt(scaled), fmt(limit)]],
            )?;
            output::write_summary(
                &cli.out.join("summary.json"),
                &cfg,
                json!({ "eps": eps, "alpha": alpha, "value": value, "scaled": scaled, "limit": limit }),
            )?;
        }
    }

    output::write_meta(&cli.out.join("meta.json"), &cfg, command_name, seed)?;
    Ok(())
}

fn functional_kind(cfg: &Config, source: &semidot::measures::SourceMeasure, seed: u64) -> Result<FunctionalKind> {
    let alpha = cfg.experiment.alpha;
    Ok(match cfg.experiment.functional.as_str() {
        "pair_id" => FunctionalKind::PairFn {
            field: Arc::new(|x: Vec2| x),
            label: "id".into(),
        },
        "pair_alpha" => FunctionalKind::PairFn {
            field: Arc::new(move |x: Vec2| {
                Vec2::new(
                    x.x.signum() * x.x.abs().powf(alpha),
                    x.y.signum() * x.y.abs().powf(alpha),
                )
            }),
            label: format!("sign|x|^{alpha}"),
        },
        "pair_sign" => FunctionalKind::PairFn {
            field: Arc::new(|x: Vec2| Vec2::axis(x.x.signum())),
            label: "sign(x1)".into(),
        },
        "l2" => FunctionalKind::L2,
        "dual_norm" => FunctionalKind::DualNorm(functionals::make_test_family(
            alpha,
            cfg.experiment.family_size,
            seed,
            source.domain(),
        )?),
        "potential_gap" => FunctionalKind::PotentialGap,
        other => bail!("unknown functional \"{other}\""),
    })
}
