//! Command-line runner: loads an experiment config, runs the axiom suite or
//! a named experiment, writes CSV/JSON artifacts tagged with the config
//! hash, and exits 0 (all checks pass), 1 (a check failed), or 2 (config or
//! usage error).

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use ammlab::config::{Direction, ExperimentConfig};
use ammlab::conformance::{check_axioms, ActionSampler};
use ammlab::error::Error;
use ammlab::estimator::{
    self, counterexample_replay, expected_mev, martingale_equality_experiment, noncompetitive_mev,
    ordering_invariance_experiment, subdivision_experiment, CsvRow, COUNTEREXAMPLE_EXPECTED,
};
use ammlab::numeric::ABS_FLOOR;
use ammlab::pools::PoolConfig;

const EXPERIMENTS: &[&str] = &[
    "ordering-invariance",
    "subdivision",
    "martingale-equality",
    "counterexample",
    "mev-estimate",
];

#[derive(Parser)]
#[command(
    name = "ammlab",
    version,
    about = "Liquidity-pool market simulator and MEV estimator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output directory; defaults to $AMMLAB_OUT, then the current directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override the config's master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the config's number of Monte Carlo paths.
    #[arg(long, global = true)]
    paths: Option<usize>,

    /// Worker threads (0 = auto).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run the liquidity-pool axiom conformance suite on a pool config.
    Axioms {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a named experiment: ordering-invariance, subdivision,
    /// martingale-equality, counterexample, or mev-estimate.
    Experiment {
        name: String,
        #[arg(long)]
        config: PathBuf,
    },
}

/// Record of one run, sufficient to reproduce it.
#[derive(Serialize)]
struct RunManifest {
    config_path: String,
    config_hash: String,
    master_seed: u64,
    outputs: Vec<String>,
    tool_version: String,
    duration_secs: f64,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct AxiomsConfig {
    pool: PoolConfig,
    #[serde(default = "default_trials")]
    n_trials: usize,
    #[serde(default)]
    seed: u64,
    /// Optional sampler price range [lo, hi]; default derives from the pool.
    #[serde(default)]
    price_range: Option<(f64, f64)>,
}

fn default_trials() -> usize {
    1000
}

struct Check {
    name: String,
    pass: bool,
    detail: String,
}

impl Check {
    fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

fn print_checks(checks: &[Check]) -> bool {
    let mut all = true;
    for c in checks {
        let status = if c.pass { "PASS" } else { "FAIL" };
        println!("check {:<42} {} ({})", c.name, status, c.detail);
        all &= c.pass;
    }
    all
}

fn main() {
    let cli = Cli::parse();
    if cli.threads > 0 {
        // Ignore failure: the global pool may already be initialized.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    };
    std::process::exit(code);
}

fn out_dir(cli: &Cli) -> Result<PathBuf, Error> {
    let dir = cli
        .out
        .clone()
        .or_else(|| std::env::var_os("AMMLAB_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn config_hash(canonical: &str) -> String {
    let digest = Sha256::digest(canonical.as_bytes());
    digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
}

fn read_config_file(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))
}

fn write_manifest(dir: &Path, stem: &str, manifest: &RunManifest) -> Result<PathBuf, Error> {
    let path = dir.join(format!("manifest-{stem}.json"));
    fs::write(
        &path,
        serde_json::to_string_pretty(manifest).expect("manifest serializes"),
    )?;
    Ok(path)
}

fn run(cli: &Cli) -> Result<i32, Error> {
    match &cli.command {
        Command::Axioms { config } => cmd_axioms(cli, config),
        Command::Experiment { name, config } => cmd_experiment(cli, name, config),
    }
}

fn cmd_axioms(cli: &Cli, config_path: &Path) -> Result<i32, Error> {
    let started = Instant::now();
    let raw = read_config_file(config_path)?;
    let mut cfg: AxiomsConfig =
        serde_json::from_str(&raw).map_err(|e| Error::config(e.to_string()))?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let pool = cfg.pool.build()?;
    let sampler = match cfg.price_range {
        Some((lo, hi)) => {
            if !(lo > 0.0 && hi > lo) {
                return Err(Error::config("price_range must satisfy 0 < lo < hi"));
            }
            ActionSampler::new(lo, hi)
        }
        None => ActionSampler::for_pool(pool.as_ref()),
    };
    let report = check_axioms(pool.as_ref(), &sampler, cfg.n_trials, cfg.seed);

    let canonical = serde_json::to_string(&cfg).expect("config serializes");
    let hash = config_hash(&canonical);
    let dir = out_dir(cli)?;
    let report_path = dir.join(format!("axioms-{hash}.json"));
    fs::write(
        &report_path,
        serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;

    let checks: Vec<Check> = report
        .0
        .iter()
        .map(|c| {
            Check::new(
                format!("axiom:{}", c.axiom),
                c.passed(),
                format!(
                    "trials={} worst_violation={:.3e}",
                    c.trials, c.worst_violation
                ),
            )
        })
        .collect();
    let all_pass = print_checks(&checks);

    let manifest = RunManifest {
        config_path: config_path.display().to_string(),
        config_hash: hash.clone(),
        master_seed: cfg.seed,
        outputs: vec![report_path.display().to_string()],
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        duration_secs: started.elapsed().as_secs_f64(),
    };
    write_manifest(&dir, &hash, &manifest)?;
    println!("wrote {}", report_path.display());
    Ok(if all_pass { 0 } else { 1 })
}

fn load_experiment_config(cli: &Cli, path: &Path) -> Result<ExperimentConfig, Error> {
    let raw = read_config_file(path)?;
    let mut cfg = ExperimentConfig::from_json(&raw)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(paths) = cli.paths {
        cfg.n_paths = paths;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Default direction for fee-dependent comparisons: equality on frictionless
/// pools, a one-sided bound with fees.
fn default_direction(cfg: &ExperimentConfig) -> Result<Direction, Error> {
    Ok(if cfg.pool.build()?.is_frictionless() {
        Direction::Equal
    } else {
        Direction::Le
    })
}

/// Evaluate a paired difference against an expected direction at the given
/// sigma multiplier.
fn directional_check(
    name: &str,
    diff_mean: f64,
    diff_stderr: f64,
    direction: Direction,
    sigma: f64,
) -> Check {
    let slack = sigma * diff_stderr + ABS_FLOOR;
    let pass = match direction {
        Direction::Equal => diff_mean.abs() <= slack,
        Direction::Le => diff_mean <= slack,
        Direction::Ge => diff_mean >= -slack,
    };
    Check::new(
        name,
        pass,
        format!(
            "diff={diff_mean:.6e} stderr={diff_stderr:.3e} expect={direction:?} at {sigma} sigma"
        ),
    )
}

fn cmd_experiment(cli: &Cli, name: &str, config_path: &Path) -> Result<i32, Error> {
    if !EXPERIMENTS.contains(&name) {
        return Err(Error::config(format!(
            "unknown experiment `{name}`; expected one of {}",
            EXPERIMENTS.join(", ")
        )));
    }
    let started = Instant::now();
    let cfg = load_experiment_config(cli, config_path)?;
    let hash = config_hash(&cfg.canonical_json());
    let config_id = hash.clone();
    let dir = out_dir(cli)?;
    let stem = format!("{name}-{hash}");

    let mut rows: Vec<CsvRow> = Vec::new();
    let mut checks: Vec<Check> = Vec::new();
    let mut outputs: Vec<String> = Vec::new();

    let row =
        |t: f64, mechanism: &str, metric: &str, estimate: f64, stderr: f64, n: usize| CsvRow {
            experiment: name.to_string(),
            config_id: config_id.clone(),
            mechanism: mechanism.to_string(),
            t,
            metric: metric.to_string(),
            estimate,
            stderr,
            n_paths: n,
            seed: cfg.seed,
        };

    match name {
        "ordering-invariance" => {
            let section = cfg
                .ordering
                .as_ref()
                .ok_or_else(|| Error::config("missing `ordering` section"))?
                .clone();
            let result = ordering_invariance_experiment(&cfg)?;
            let t_last = *cfg.schedule.build()?.times().last().expect("nonempty");
            for c in &result.comparisons {
                let label = format!("{}[m={}]", c.mechanism, c.clones);
                rows.push(row(
                    t_last,
                    &label,
                    "max_abs_diff",
                    c.max_abs_diff,
                    0.0,
                    result.n_paths,
                ));
                rows.push(row(
                    t_last,
                    &label,
                    "max_rel_diff",
                    c.max_rel_diff,
                    0.0,
                    result.n_paths,
                ));
                checks.push(Check::new(
                    format!("ordering-invariance:{label}"),
                    c.max_rel_diff <= section.rel_tolerance,
                    format!(
                        "max_rel_diff={:.3e} tol={:.1e}",
                        c.max_rel_diff, section.rel_tolerance
                    ),
                ));
            }
        }
        "subdivision" => {
            let section = cfg
                .subdivision
                .as_ref()
                .ok_or_else(|| Error::config("missing `subdivision` section"))?
                .clone();
            let result = subdivision_experiment(&cfg, section.k)?;
            let expect_mev = match section.expect_mev {
                Some(d) => d,
                None => default_direction(&cfg)?,
            };
            let expect_star = section.expect_mev_star.unwrap_or(Direction::Equal);
            for c in &result.mev {
                rows.push(row(
                    c.t,
                    "uncontested",
                    "expected_competitive_coarse",
                    c.coarse.estimate,
                    c.coarse.stderr,
                    c.coarse.n_paths,
                ));
                rows.push(row(
                    c.t,
                    "uncontested",
                    "expected_competitive_fine",
                    c.fine.estimate,
                    c.fine.stderr,
                    c.fine.n_paths,
                ));
                rows.push(row(
                    c.t,
                    "uncontested",
                    "expected_competitive_diff",
                    c.diff_mean,
                    c.diff_stderr,
                    c.coarse.n_paths,
                ));
                checks.push(directional_check(
                    &format!("subdivision:mev@t={}", c.t),
                    c.diff_mean,
                    c.diff_stderr,
                    expect_mev,
                    section.sigma_multiplier,
                ));
            }
            for c in &result.mev_star {
                rows.push(row(
                    c.t,
                    "uncontested",
                    "noncompetitive_coarse",
                    c.coarse.estimate,
                    c.coarse.stderr,
                    c.coarse.n_paths,
                ));
                rows.push(row(
                    c.t,
                    "uncontested",
                    "noncompetitive_fine",
                    c.fine.estimate,
                    c.fine.stderr,
                    c.fine.n_paths,
                ));
                rows.push(row(
                    c.t,
                    "uncontested",
                    "noncompetitive_diff",
                    c.diff_mean,
                    c.diff_stderr,
                    c.coarse.n_paths,
                ));
                checks.push(directional_check(
                    &format!("subdivision:mev_star@t={}", c.t),
                    c.diff_mean,
                    c.diff_stderr,
                    expect_star,
                    section.sigma_multiplier,
                ));
            }
        }
        "martingale-equality" => {
            let section = cfg
                .martingale
                .clone()
                .unwrap_or(ammlab::config::MartingaleSection {
                    defer_block: None,
                    expect: None,
                    sigma_multiplier: 3.0,
                });
            let result = martingale_equality_experiment(&cfg, section.defer_block)?;
            let expect = match section.expect {
                Some(d) => d,
                None => default_direction(&cfg)?,
            };
            rows.push(row(
                result.t,
                "uncontested",
                "expected_competitive",
                result.s0.estimate,
                result.s0.stderr,
                result.s0.n_paths,
            ));
            rows.push(row(
                result.t,
                "uncontested",
                "noncompetitive",
                result.deferred.estimate,
                result.deferred.stderr,
                result.deferred.n_paths,
            ));
            rows.push(row(
                result.t,
                "uncontested",
                "s0_minus_deferred",
                result.diff_mean,
                result.diff_stderr,
                result.s0.n_paths,
            ));
            checks.push(directional_check(
                &format!("martingale-equality@block={}", result.defer_block),
                result.diff_mean,
                result.diff_stderr,
                expect,
                section.sigma_multiplier,
            ));
        }
        "counterexample" => {
            let table = counterexample_replay()?;
            let csv_path = dir.join(format!("{stem}.csv"));
            let file = fs::File::create(&csv_path)?;
            estimator::write_counterexample_csv(file, &table)?;
            outputs.push(csv_path.display().to_string());
            println!("strategy block dx dy profit cumulative");
            for r in &table.rows {
                println!(
                    "{:>8} {:>5} {:>10.4} {:>12.4} {:>10.4} {:>12.4}",
                    r.strategy, r.block, r.dx, r.dy, r.profit, r.cumulative
                );
            }
            for (strategy, block, dx, dy, profit) in COUNTEREXAMPLE_EXPECTED {
                let found = table
                    .rows
                    .iter()
                    .find(|r| r.strategy == strategy && r.block == block);
                let pass = found.is_some_and(|r| {
                    (r.dx - dx).abs() <= 1e-6
                        && (r.dy - dy).abs() <= 1e-6
                        && (r.profit - profit).abs() <= 1e-6
                });
                checks.push(Check::new(
                    format!("counterexample:{strategy}@block{block}"),
                    pass,
                    format!("expected ({dx}, {dy}) profit {profit}"),
                ));
            }
        }
        "mev-estimate" => {
            let metric = cfg
                .estimate
                .as_ref()
                .map(|e| e.metric.clone())
                .unwrap_or_else(|| "expected".to_string());
            match metric.as_str() {
                "expected" => {
                    let report = expected_mev(&cfg)?;
                    for r in &report.rows {
                        rows.push(row(
                            r.t,
                            "uncontested",
                            report.metric.label(),
                            r.estimate,
                            r.stderr,
                            r.n_paths,
                        ));
                    }
                }
                "noncompetitive" => {
                    for t in cfg.eval_times()? {
                        let r = noncompetitive_mev(&cfg, t)?;
                        rows.push(row(
                            r.t,
                            "uncontested",
                            "noncompetitive",
                            r.estimate,
                            r.stderr,
                            r.n_paths,
                        ));
                    }
                }
                other => {
                    return Err(Error::config(format!(
                        "estimate.metric must be `expected` or `noncompetitive`, got `{other}`"
                    )))
                }
            }
            checks.push(Check::new(
                "mev-estimate:completed",
                true,
                format!("{} rows", rows.len()),
            ));
        }
        _ => unreachable!("validated above"),
    }

    if !rows.is_empty() {
        let csv_path = dir.join(format!("{stem}.csv"));
        let file = fs::File::create(&csv_path)?;
        estimator::write_csv(file, &rows)?;
        outputs.push(csv_path.display().to_string());
    }

    let all_pass = print_checks(&checks);
    let manifest = RunManifest {
        config_path: config_path.display().to_string(),
        config_hash: hash,
        master_seed: cfg.seed,
        outputs,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        duration_secs: started.elapsed().as_secs_f64(),
    };
    let manifest_path = write_manifest(&dir, &stem, &manifest)?;
    println!("wrote {}", manifest_path.display());
    Ok(if all_pass { 0 } else { 1 })
}
