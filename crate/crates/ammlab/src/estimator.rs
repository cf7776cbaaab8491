//! MEV estimates and invariance experiments.
//!
//! MEV quantities are computed through their strategy characterizations:
//! pathwise competitive MEV is the uncontested cumulative PNL of the simple
//! arbitrage strategy on a frictionless pool, expected competitive MEV is
//! its Monte Carlo mean, and noncompetitive MEV at time `t` is the expected
//! uncontested PNL of the strategy that defers its single trade to the last
//! block at or before `t`. Suprema over strategy sets are never searched
//! directly; randomized competitive sets appear only as falsification
//! pressure in the test suites.
//!
//! All equality and inequality comparisons are paired: the same price path
//! (common random numbers) drives both configurations and the difference is
//! computed per path before averaging.

use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::Error;
use crate::market::{run_market, BlockSchedule, BlockTrace, NamedStrategy, OrderingMechanism};
use crate::pool::LiquidityPool;
use crate::pools::PoolConfig;
use crate::price::{sample_path, PricePath, ProcessSpec};
use crate::rng::mix;
use crate::strategies::{clone_set, SimpleArb, TargetPriceArb};

/// Which MEV quantity a report row estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    PathwiseCompetitive,
    ExpectedCompetitive,
    Noncompetitive,
}

impl MetricKind {
    pub fn label(&self) -> &'static str {
        match self {
            MetricKind::PathwiseCompetitive => "pathwise_competitive",
            MetricKind::ExpectedCompetitive => "expected_competitive",
            MetricKind::Noncompetitive => "noncompetitive",
        }
    }
}

/// Point estimate with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MevRow {
    pub t: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub n_paths: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct MevReport {
    pub metric: MetricKind,
    pub rows: Vec<MevRow>,
}

#[derive(Debug, Clone, Copy)]
pub struct SampleStats {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

/// Sample mean and standard error (sample standard deviation / sqrt(n)).
pub fn sample_stats(xs: &[f64]) -> SampleStats {
    let n = xs.len();
    assert!(n >= 1);
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0)
    } else {
        0.0
    };
    SampleStats {
        mean,
        stderr: (var / n as f64).sqrt(),
        n,
    }
}

/// Cumulative uncontested PNL of the simple arbitrage strategy at each block
/// time: at block `n` this is `sum_{i<=n} (dx_i P_{t_i} + dy_i)` over its own
/// executed (uncontested, hence all) trades.
pub fn uncontested_s0_pnl(
    pool: &dyn LiquidityPool,
    path: &PricePath,
    paper_approx: bool,
) -> Vec<f64> {
    let arb = SimpleArb { paper_approx };
    let mut state = pool.initial_state();
    let mut acc = 0.0;
    let mut cumulative = Vec::with_capacity(path.len());
    for i in 0..path.len() {
        let price = path.price_at(i);
        let action = arb.action(pool, &state, price);
        acc += pool.payoff(&action).value_at(price);
        state = pool
            .transition(&state, &action)
            .expect("own optimal action is admissible");
        cumulative.push(acc);
    }
    cumulative
}

/// Uncontested PNL at `t >= t_n` of the strategy that submits one optimal
/// trade from the initial state at block `n` (1-based) and nothing else.
pub fn uncontested_deferred_pnl(pool: &dyn LiquidityPool, path: &PricePath, block: usize) -> f64 {
    assert!(block >= 1 && block <= path.len());
    let price = path.price_at(block - 1);
    let action = pool.optimal_action(&pool.initial_state(), price);
    pool.payoff(&action).value_at(price)
}

/// Pathwise competitive MEV at each block time of a frictionless pool: the
/// uncontested cumulative PNL of the simple arbitrage strategy.
pub fn pathwise_competitive_mev(
    pool: &dyn LiquidityPool,
    schedule: &BlockSchedule,
    path: &PricePath,
) -> Result<Vec<f64>, Error> {
    if !pool.is_frictionless() {
        return Err(Error::PoolNotFrictionless);
    }
    if path.len() != schedule.len() {
        return Err(Error::PathMismatch(format!(
            "{} blocks vs {} prices",
            schedule.len(),
            path.len()
        )));
    }
    Ok(uncontested_s0_pnl(pool, path, false))
}

fn require_martingale(cfg: &ExperimentConfig) -> Result<(), Error> {
    if !cfg.process.is_martingale() {
        return Err(Error::config(
            "this estimate requires a martingale process spec",
        ));
    }
    Ok(())
}

fn require_characterizable(pool: &dyn LiquidityPool) -> Result<(), Error> {
    if !(pool.is_frictionless() || pool.fee() > 0.0) {
        return Err(Error::Unsupported {
            kind: pool.kind(),
            what: "MEV characterization needs a frictionless pool or a fee over one",
        });
    }
    Ok(())
}

/// Monte Carlo estimate of expected competitive MEV at each evaluation time.
pub fn expected_mev(cfg: &ExperimentConfig) -> Result<MevReport, Error> {
    require_martingale(cfg)?;
    let pool = cfg.pool.build()?;
    require_characterizable(pool.as_ref())?;
    let schedule = cfg.schedule.build()?;
    let p0 = cfg.p0()?;
    let eval_times = cfg.eval_times()?;
    let eval_blocks: Vec<usize> = eval_times
        .iter()
        .map(|t| schedule.blocks_through(*t))
        .collect();

    let per_path: Vec<Vec<f64>> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|i| -> Result<Vec<f64>, Error> {
            let path = sample_path(&cfg.process, schedule.times(), p0, cfg.seed, i as u64)?;
            let cumulative = uncontested_s0_pnl(pool.as_ref(), &path, false);
            Ok(eval_blocks
                .iter()
                .map(|&n| if n == 0 { 0.0 } else { cumulative[n - 1] })
                .collect())
        })
        .collect::<Result<_, _>>()?;

    let rows = eval_times
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let column: Vec<f64> = per_path.iter().map(|v| v[j]).collect();
            let stats = sample_stats(&column);
            MevRow {
                t,
                estimate: stats.mean,
                stderr: stats.stderr,
                n_paths: stats.n,
            }
        })
        .collect();
    Ok(MevReport {
        metric: MetricKind::ExpectedCompetitive,
        rows,
    })
}

/// Monte Carlo estimate of noncompetitive MEV at time `t`: the expected
/// uncontested PNL of deferring one optimal trade to the last block at or
/// before `t`. Zero before the first block.
pub fn noncompetitive_mev(cfg: &ExperimentConfig, t: f64) -> Result<MevRow, Error> {
    require_martingale(cfg)?;
    let pool = cfg.pool.build()?;
    require_characterizable(pool.as_ref())?;
    let schedule = cfg.schedule.build()?;
    let p0 = cfg.p0()?;
    let block = schedule.blocks_through(t);
    if block == 0 {
        return Ok(MevRow {
            t,
            estimate: 0.0,
            stderr: 0.0,
            n_paths: cfg.n_paths,
        });
    }
    let values: Vec<f64> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|i| -> Result<f64, Error> {
            let path = sample_path(&cfg.process, schedule.times(), p0, cfg.seed, i as u64)?;
            Ok(uncontested_deferred_pnl(pool.as_ref(), &path, block))
        })
        .collect::<Result<_, _>>()?;
    let stats = sample_stats(&values);
    Ok(MevRow {
        t,
        estimate: stats.mean,
        stderr: stats.stderr,
        n_paths: stats.n,
    })
}

/// Team total PNL, cumulative by block: all executed trades in the run
/// marked at their block prices.
pub fn team_cumulative_pnl(traces: &[BlockTrace]) -> Vec<f64> {
    let mut acc = 0.0;
    traces
        .iter()
        .map(|trace| {
            acc += trace
                .executed
                .iter()
                .map(|e| e.payoff.value_at(trace.price))
                .sum::<f64>();
            acc
        })
        .collect()
}

fn run_s0_clones(
    pool: &dyn LiquidityPool,
    schedule: &BlockSchedule,
    path: &PricePath,
    m: usize,
    mechanism: &OrderingMechanism,
    run_seed: u64,
) -> Result<Vec<f64>, Error> {
    let mut team = clone_set("s0", m, || Box::new(SimpleArb::exact()));
    let traces = run_market(pool, schedule, &mut team, mechanism, path, run_seed)?;
    Ok(team_cumulative_pnl(&traces))
}

/// Per-mechanism divergence of clone-team total PNL from the fifo baseline.
#[derive(Debug, Clone, Serialize)]
pub struct OrderingComparison {
    pub mechanism: String,
    pub clones: usize,
    /// Max over paths and block times of |total - baseline total|.
    pub max_abs_diff: f64,
    /// Same, relative to max(1, |baseline|).
    pub max_rel_diff: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderingInvarianceResult {
    pub n_paths: usize,
    pub comparisons: Vec<OrderingComparison>,
}

/// For each configured (mechanism, clone count), run the m-clone simple
/// arbitrage team on every path and compare its cumulative total PNL at
/// every block against the uncontested fifo baseline (one clone).
pub fn ordering_invariance_experiment(
    cfg: &ExperimentConfig,
) -> Result<OrderingInvarianceResult, Error> {
    let section = cfg
        .ordering
        .as_ref()
        .ok_or_else(|| Error::config("missing `ordering` section"))?;
    if section.mechanisms.len() < 2 {
        return Err(Error::config("ordering experiment needs >= 2 mechanisms"));
    }
    if section.clone_counts.is_empty() || section.clone_counts.iter().any(|m| *m < 1) {
        return Err(Error::config("clone_counts must be nonempty, all >= 1"));
    }
    let pool = cfg.pool.build()?;
    let schedule = cfg.schedule.build()?;
    let p0 = cfg.p0()?;

    let combos: Vec<(OrderingMechanism, usize)> = section
        .mechanisms
        .iter()
        .flat_map(|mech| section.clone_counts.iter().map(move |&m| (mech.clone(), m)))
        .collect();

    let per_path: Vec<Vec<(f64, f64)>> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|i| -> Result<Vec<(f64, f64)>, Error> {
            let path = sample_path(&cfg.process, schedule.times(), p0, cfg.seed, i as u64)?;
            let run_seed = mix(cfg.seed ^ 0xB10C_0DDE ^ i as u64);
            let baseline = run_s0_clones(
                pool.as_ref(),
                &schedule,
                &path,
                1,
                &OrderingMechanism::Fifo,
                run_seed,
            )?;
            let mut diffs = Vec::with_capacity(combos.len());
            for (mech, m) in &combos {
                let totals = run_s0_clones(pool.as_ref(), &schedule, &path, *m, mech, run_seed)?;
                let mut abs = 0.0f64;
                let mut rel = 0.0f64;
                for (a, b) in baseline.iter().zip(&totals) {
                    let d = (a - b).abs();
                    abs = abs.max(d);
                    rel = rel.max(d / 1f64.max(a.abs()));
                }
                diffs.push((abs, rel));
            }
            Ok(diffs)
        })
        .collect::<Result<_, _>>()?;

    let comparisons = combos
        .iter()
        .enumerate()
        .map(|(j, (mech, m))| OrderingComparison {
            mechanism: mech.label(),
            clones: *m,
            max_abs_diff: per_path.iter().map(|v| v[j].0).fold(0.0, f64::max),
            max_rel_diff: per_path.iter().map(|v| v[j].1).fold(0.0, f64::max),
        })
        .collect();
    Ok(OrderingInvarianceResult {
        n_paths: cfg.n_paths,
        comparisons,
    })
}

/// Paired estimates of one metric on the coarse and subdivided schedules.
#[derive(Debug, Clone, Serialize)]
pub struct PairedComparison {
    pub t: f64,
    pub coarse: MevRow,
    pub fine: MevRow,
    /// Mean of per-path (fine - coarse).
    pub diff_mean: f64,
    pub diff_stderr: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubdivisionResult {
    pub k: usize,
    pub mev: Vec<PairedComparison>,
    pub mev_star: Vec<PairedComparison>,
}

/// Compare expected and noncompetitive MEV on schedule B against the
/// schedule B' that subdivides each block into `k`. Pairing: prices are
/// sampled on the fine schedule and the coarse path is its restriction, so
/// both configurations see the same Brownian increments.
pub fn subdivision_experiment(
    cfg: &ExperimentConfig,
    k: usize,
) -> Result<SubdivisionResult, Error> {
    if k < 2 {
        return Err(Error::config("subdivision factor must be >= 2"));
    }
    require_martingale(cfg)?;
    if !matches!(cfg.process, ProcessSpec::GbmZeroDrift { .. }) {
        return Err(Error::config(
            "subdivision pairing requires the gbm process (consistent under refinement)",
        ));
    }
    let pool = cfg.pool.build()?;
    require_characterizable(pool.as_ref())?;
    let coarse = cfg.schedule.build()?;
    let fine = coarse.subdivide(k)?;
    let p0 = cfg.p0()?;
    let eval_times = cfg.eval_times()?;
    let eval: Vec<(f64, usize, usize)> = eval_times
        .iter()
        .map(|&t| (t, coarse.blocks_through(t), fine.blocks_through(t)))
        .collect();

    struct PathValues {
        mev_coarse: Vec<f64>,
        mev_fine: Vec<f64>,
        star_coarse: Vec<f64>,
        star_fine: Vec<f64>,
    }

    let per_path: Vec<PathValues> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|i| -> Result<PathValues, Error> {
            let fine_path = sample_path(&cfg.process, fine.times(), p0, cfg.seed, i as u64)?;
            let coarse_prices: Vec<f64> = (0..coarse.len())
                .map(|j| fine_path.price_at((j + 1) * k - 1))
                .collect();
            let coarse_path = PricePath::new(coarse.times().to_vec(), coarse_prices, p0)?;
            let cum_coarse = uncontested_s0_pnl(pool.as_ref(), &coarse_path, false);
            let cum_fine = uncontested_s0_pnl(pool.as_ref(), &fine_path, false);
            let mut v = PathValues {
                mev_coarse: Vec::with_capacity(eval.len()),
                mev_fine: Vec::with_capacity(eval.len()),
                star_coarse: Vec::with_capacity(eval.len()),
                star_fine: Vec::with_capacity(eval.len()),
            };
            for &(_, n_c, n_f) in &eval {
                v.mev_coarse
                    .push(if n_c == 0 { 0.0 } else { cum_coarse[n_c - 1] });
                v.mev_fine
                    .push(if n_f == 0 { 0.0 } else { cum_fine[n_f - 1] });
                v.star_coarse.push(if n_c == 0 {
                    0.0
                } else {
                    uncontested_deferred_pnl(pool.as_ref(), &coarse_path, n_c)
                });
                v.star_fine.push(if n_f == 0 {
                    0.0
                } else {
                    uncontested_deferred_pnl(pool.as_ref(), &fine_path, n_f)
                });
            }
            Ok(v)
        })
        .collect::<Result<_, _>>()?;

    let build = |coarse_of: fn(&PathValues) -> &Vec<f64>,
                 fine_of: fn(&PathValues) -> &Vec<f64>|
     -> Vec<PairedComparison> {
        eval.iter()
            .enumerate()
            .map(|(j, &(t, _, _))| {
                let c: Vec<f64> = per_path.iter().map(|v| coarse_of(v)[j]).collect();
                let f: Vec<f64> = per_path.iter().map(|v| fine_of(v)[j]).collect();
                let d: Vec<f64> = c.iter().zip(&f).map(|(a, b)| b - a).collect();
                let sc = sample_stats(&c);
                let sf = sample_stats(&f);
                let sd = sample_stats(&d);
                PairedComparison {
                    t,
                    coarse: MevRow {
                        t,
                        estimate: sc.mean,
                        stderr: sc.stderr,
                        n_paths: sc.n,
                    },
                    fine: MevRow {
                        t,
                        estimate: sf.mean,
                        stderr: sf.stderr,
                        n_paths: sf.n,
                    },
                    diff_mean: sd.mean,
                    diff_stderr: sd.stderr,
                }
            })
            .collect()
    };

    Ok(SubdivisionResult {
        k,
        mev: build(|v| &v.mev_coarse, |v| &v.mev_fine),
        mev_star: build(|v| &v.star_coarse, |v| &v.star_fine),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MartingaleEqualityResult {
    pub t: f64,
    pub defer_block: usize,
    pub s0: MevRow,
    pub deferred: MevRow,
    /// Mean of per-path (s0 - deferred).
    pub diff_mean: f64,
    pub diff_stderr: f64,
}

/// Paired comparison of E[PNL*(S0)] against E[PNL*(deferred(n))] at block
/// `n`'s time. Equal in expectation on frictionless pools; with fees the
/// deferred strategy is at least as good on average.
pub fn martingale_equality_experiment(
    cfg: &ExperimentConfig,
    defer_block: Option<usize>,
) -> Result<MartingaleEqualityResult, Error> {
    require_martingale(cfg)?;
    let pool = cfg.pool.build()?;
    require_characterizable(pool.as_ref())?;
    let schedule = cfg.schedule.build()?;
    let p0 = cfg.p0()?;
    let n = defer_block.unwrap_or(schedule.len());
    if n < 1 || n > schedule.len() {
        return Err(Error::config(format!(
            "defer_block must be in [1, {}]",
            schedule.len()
        )));
    }
    let t = schedule.times()[n - 1];

    let pairs: Vec<(f64, f64)> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|i| -> Result<(f64, f64), Error> {
            let path = sample_path(&cfg.process, schedule.times(), p0, cfg.seed, i as u64)?;
            let s0 = uncontested_s0_pnl(pool.as_ref(), &path, false)[n - 1];
            let def = uncontested_deferred_pnl(pool.as_ref(), &path, n);
            Ok((s0, def))
        })
        .collect::<Result<_, _>>()?;

    let s0: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let def: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let d: Vec<f64> = pairs.iter().map(|p| p.0 - p.1).collect();
    let (ss, sd, sdiff) = (sample_stats(&s0), sample_stats(&def), sample_stats(&d));
    Ok(MartingaleEqualityResult {
        t,
        defer_block: n,
        s0: MevRow {
            t,
            estimate: ss.mean,
            stderr: ss.stderr,
            n_paths: ss.n,
        },
        deferred: MevRow {
            t,
            estimate: sd.mean,
            stderr: sd.stderr,
            n_paths: sd.n,
        },
        diff_mean: sdiff.mean,
        diff_stderr: sdiff.stderr,
    })
}

/// One row of the deterministic counterexample replay.
#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleRow {
    pub strategy: String,
    pub block: usize,
    pub dx: f64,
    pub dy: f64,
    pub profit: f64,
    pub cumulative: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleTable {
    pub rows: Vec<CounterexampleRow>,
}

/// Exact block-level payoffs and profits of the counterexample replay:
/// linear book with fee 0.01 starting at price 1, external prices 100 then
/// 1, simple arbitrage (approximate fee targets 99 and 1.01) vs the
/// target-price strategy aiming at 101 then 1.01. Derived from the book's
/// quadratic cost integral with the fee charged on pre-fee turnover.
pub const COUNTEREXAMPLE_EXPECTED: [(&str, usize, f64, f64, f64); 4] = [
    ("s0", 1, 98.0, -4949.0, 4851.0),
    ("s0", 2, -97.99, 4850.9900505, 4753.0000505),
    ("s1", 1, 100.0, -5151.0, 4849.0),
    ("s1", 2, -99.99, 5048.9900505, 4949.0000505),
];

/// Deterministic replay of the two-block fee counterexample; each strategy
/// runs uncontested and the per-block executed payoffs and profits are
/// tabulated.
pub fn counterexample_replay() -> Result<CounterexampleTable, Error> {
    let pool = PoolConfig::LinearBook {
        price: 1.0,
        fee: 0.01,
    }
    .build()?;
    let schedule = BlockSchedule::uniform(2, 1.0)?;
    let spec = ProcessSpec::Deterministic {
        prices: vec![100.0, 1.0],
    };
    let path = sample_path(&spec, schedule.times(), 1.0, 0, 0)?;

    let mut rows = Vec::new();
    let runs: Vec<(&str, Box<dyn crate::market::Strategy>)> = vec![
        ("s0", Box::new(SimpleArb::paper_approx())),
        ("s1", Box::new(TargetPriceArb::new(vec![101.0, 1.01]))),
    ];
    for (id, strategy) in runs {
        let mut named = vec![NamedStrategy::new(id, strategy)];
        let traces = run_market(
            pool.as_ref(),
            &schedule,
            &mut named,
            &OrderingMechanism::Fifo,
            &path,
            0,
        )?;
        let mut cumulative = 0.0;
        for trace in &traces {
            let payoff = trace.executed_payoff(id);
            let profit = payoff.value_at(trace.price);
            cumulative += profit;
            rows.push(CounterexampleRow {
                strategy: id.to_string(),
                block: trace.block,
                dx: payoff.dx,
                dy: payoff.dy,
                profit,
                cumulative,
            });
        }
    }
    Ok(CounterexampleTable { rows })
}

/// Row of the estimator CSV schema.
#[derive(Debug, Clone, Serialize)]
pub struct CsvRow {
    pub experiment: String,
    pub config_id: String,
    pub mechanism: String,
    pub t: f64,
    pub metric: String,
    pub estimate: f64,
    pub stderr: f64,
    pub n_paths: usize,
    pub seed: u64,
}

/// Write estimator rows as CSV with headers.
pub fn write_csv<W: std::io::Write>(writer: W, rows: &[CsvRow]) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row).map_err(|e| Error::config(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Write the counterexample table as CSV with headers.
pub fn write_counterexample_csv<W: std::io::Write>(
    writer: W,
    table: &CounterexampleTable,
) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(writer);
    for row in &table.rows {
        w.serialize(row).map_err(|e| Error::config(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
