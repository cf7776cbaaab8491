//! Block-based market engine.
//!
//! Per block: collect each strategy's submissions, permute them with the
//! configured ordering mechanism, greedily drop whatever is inadmissible at
//! the state reached by the kept prefix, execute the rest, and advance the
//! pool state. Strategies observe only the block index and time, the current
//! pool state, current and past prices, and their own past executions.

use serde::{Deserialize, Serialize};

use crate::action::{Action, Payoff, PoolState};
use crate::error::Error;
use crate::numeric::approx_eq;
use crate::pool::LiquidityPool;
use crate::price::PricePath;
use crate::rng::SplitMix64;

/// Deterministic block times, strictly increasing, fixed before simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSchedule {
    times: Vec<f64>,
}

impl BlockSchedule {
    pub fn explicit(times: Vec<f64>) -> Result<Self, Error> {
        if times.is_empty() {
            return Err(Error::config("schedule must be nonempty"));
        }
        let mut prev = 0.0;
        for t in &times {
            if *t <= prev {
                return Err(Error::config(
                    "block times must be strictly increasing from 0",
                ));
            }
            prev = *t;
        }
        Ok(Self { times })
    }

    /// `n` blocks at times `dt, 2 dt, ..., n dt`.
    pub fn uniform(n_blocks: usize, dt: f64) -> Result<Self, Error> {
        if n_blocks == 0 || dt <= 0.0 {
            return Err(Error::config("need n_blocks >= 1 and dt > 0"));
        }
        Ok(Self {
            times: (1..=n_blocks).map(|i| i as f64 * dt).collect(),
        })
    }

    /// Subdivide each block span into `k` evenly spaced blocks. The original
    /// block times are preserved (they are every k-th time of the result).
    pub fn subdivide(&self, k: usize) -> Result<Self, Error> {
        if k < 1 {
            return Err(Error::config("subdivision factor must be >= 1"));
        }
        let mut times = Vec::with_capacity(self.times.len() * k);
        let mut prev = 0.0;
        for &t in &self.times {
            for j in 1..=k {
                times.push(prev + (t - prev) * j as f64 / k as f64);
            }
            prev = t;
        }
        // Snap the preserved times exactly to avoid drift in comparisons.
        for (i, &t) in self.times.iter().enumerate() {
            times[(i + 1) * k - 1] = t;
        }
        Self::explicit(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Index of the last block with `t_n <= t`, as a 1-based count.
    pub fn blocks_through(&self, t: f64) -> usize {
        self.times.iter().take_while(|&&bt| bt <= t).count()
    }
}

pub type StrategyId = String;

/// One action submitted by one strategy for a block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Submission {
    pub strategy: StrategyId,
    pub action: Action,
}

/// Distribution over permutations of a block's submissions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderingMechanism {
    /// Submission order.
    Fifo,
    /// Reversed submission order.
    Reverse,
    /// Uniformly random permutation from the block's rng substream.
    UniformRandom,
    /// Listed strategies first (in list order), then the rest; stable within
    /// each bucket.
    Priority(Vec<StrategyId>),
}

impl OrderingMechanism {
    pub fn label(&self) -> String {
        match self {
            OrderingMechanism::Fifo => "fifo".into(),
            OrderingMechanism::Reverse => "reverse".into(),
            OrderingMechanism::UniformRandom => "uniform_random".into(),
            OrderingMechanism::Priority(ids) => format!("priority({})", ids.join(",")),
        }
    }
}

/// Permute submissions per the mechanism. Deterministic mechanisms ignore
/// the rng. The output is always a permutation of the input.
pub fn order_submissions(
    submissions: Vec<Submission>,
    mechanism: &OrderingMechanism,
    rng: &mut SplitMix64,
) -> Vec<Submission> {
    match mechanism {
        OrderingMechanism::Fifo => submissions,
        OrderingMechanism::Reverse => submissions.into_iter().rev().collect(),
        OrderingMechanism::UniformRandom => {
            let mut out = submissions;
            rng.shuffle(&mut out);
            out
        }
        OrderingMechanism::Priority(order) => {
            let rank = |id: &StrategyId| order.iter().position(|o| o == id).unwrap_or(order.len());
            let mut out = submissions;
            // Stable sort keeps submission order within each priority bucket.
            out.sort_by_key(|s| rank(&s.strategy));
            out
        }
    }
}

/// Greedy prefix filter: keep a submission iff its action is admissible at
/// the state reached by all previously kept actions. Returns the kept flags
/// and the end state; the kept subsequence is admissible from `state` as a
/// whole by the composition axiom.
pub fn filter_admissible(
    pool: &dyn LiquidityPool,
    state: &PoolState,
    ordered: &[Submission],
) -> (Vec<bool>, PoolState) {
    let mut kept = Vec::with_capacity(ordered.len());
    let mut current = state.clone();
    for sub in ordered {
        match pool.transition(&current, &sub.action) {
            Ok(next) => {
                current = next;
                kept.push(true);
            }
            Err(_) => kept.push(false),
        }
    }
    (kept, current)
}

/// Payoff credited to a strategy for one executed trade.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionRecord {
    pub strategy: StrategyId,
    pub payoff: Payoff,
}

/// Full record of one block.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockTrace {
    /// 1-based block index.
    pub block: usize,
    pub time: f64,
    pub price: f64,
    pub ordered: Vec<Submission>,
    /// Parallel to `ordered`: true if the submission was dropped.
    pub dropped: Vec<bool>,
    /// Fee-inclusive payoffs of executed trades, in execution order.
    pub executed: Vec<ExecutionRecord>,
    pub state_before: PoolState,
    pub state_after: PoolState,
}

impl BlockTrace {
    /// Total executed payoff for one strategy in this block.
    pub fn executed_payoff(&self, strategy: &str) -> Payoff {
        self.executed
            .iter()
            .filter(|e| e.strategy == strategy)
            .fold(Payoff::ZERO, |acc, e| acc + e.payoff)
    }

    /// Serialize as one JSON line.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("trace serializes")
    }
}

/// What a strategy sees when asked for its submissions.
pub struct BlockContext<'a> {
    /// 1-based block index.
    pub block: usize,
    pub time: f64,
    pub state: &'a PoolState,
    pub price: f64,
    /// Prices of blocks 1..block-1.
    pub past_prices: &'a [f64],
}

/// A trading strategy driven by the market engine. Implementations hold
/// private state; the engine notifies them of their own executions.
pub trait Strategy: Send {
    /// Actions to submit for this block, in submission order. Each action is
    /// one unit for ordering and dropping; strategies needing atomicity
    /// submit a composite.
    fn submissions(
        &mut self,
        pool: &dyn LiquidityPool,
        ctx: &BlockContext,
    ) -> Result<Vec<Action>, Error>;

    /// Called after each block with the fee-inclusive payoffs of this
    /// strategy's executed trades (possibly empty).
    fn record_execution(&mut self, _block: usize, _executed: &[Payoff]) {}
}

/// A strategy with its market identity.
pub struct NamedStrategy {
    pub id: StrategyId,
    pub strategy: Box<dyn Strategy>,
}

impl NamedStrategy {
    pub fn new(id: impl Into<String>, strategy: Box<dyn Strategy>) -> Self {
        Self {
            id: id.into(),
            strategy,
        }
    }
}

/// Execute one block: order, filter, execute, record.
#[allow(clippy::too_many_arguments)]
pub fn step_block(
    pool: &dyn LiquidityPool,
    state: &PoolState,
    submissions: Vec<Submission>,
    mechanism: &OrderingMechanism,
    rng: &mut SplitMix64,
    block: usize,
    time: f64,
    price: f64,
) -> BlockTrace {
    let ordered = order_submissions(submissions, mechanism, rng);
    let (kept, _) = filter_admissible(pool, state, &ordered);
    let mut executed = Vec::new();
    let mut current = state.clone();
    for (sub, keep) in ordered.iter().zip(&kept) {
        if *keep {
            current = pool
                .transition(&current, &sub.action)
                .expect("kept submissions are admissible");
            executed.push(ExecutionRecord {
                strategy: sub.strategy.clone(),
                payoff: pool.payoff(&sub.action),
            });
        }
    }
    BlockTrace {
        block,
        time,
        price,
        dropped: kept.iter().map(|k| !k).collect(),
        ordered,
        executed,
        state_before: state.clone(),
        state_after: current,
    }
}

/// Run a full market: iterate `step_block` over the schedule, feeding each
/// strategy its block context before collecting submissions. Deterministic
/// given all inputs; the ordering rng substream for block `n` is derived
/// from `seed ^ n`.
pub fn run_market(
    pool: &dyn LiquidityPool,
    schedule: &BlockSchedule,
    strategies: &mut [NamedStrategy],
    mechanism: &OrderingMechanism,
    path: &PricePath,
    seed: u64,
) -> Result<Vec<BlockTrace>, Error> {
    if path.len() != schedule.len() {
        return Err(Error::PathMismatch(format!(
            "{} blocks vs {} prices",
            schedule.len(),
            path.len()
        )));
    }
    for (a, b) in schedule.times().iter().zip(&path.times) {
        if !approx_eq(*a, *b) {
            return Err(Error::PathMismatch(format!(
                "schedule time {a} vs path time {b}"
            )));
        }
    }

    let mut traces = Vec::with_capacity(schedule.len());
    let mut state = pool.initial_state();
    for (i, (&time, &price)) in schedule.times().iter().zip(&path.prices).enumerate() {
        let block = i + 1;
        let ctx = BlockContext {
            block,
            time,
            state: &state,
            price,
            past_prices: &path.prices[..i],
        };
        let mut submissions = Vec::new();
        for named in strategies.iter_mut() {
            for action in named.strategy.submissions(pool, &ctx)? {
                submissions.push(Submission {
                    strategy: named.id.clone(),
                    action,
                });
            }
        }
        let mut rng = SplitMix64::substream(seed, block as u64);
        let trace = step_block(
            pool,
            &state,
            submissions,
            mechanism,
            &mut rng,
            block,
            time,
            price,
        );
        for named in strategies.iter_mut() {
            let payoffs: Vec<Payoff> = trace
                .executed
                .iter()
                .filter(|e| e.strategy == named.id)
                .map(|e| e.payoff)
                .collect();
            named.strategy.record_execution(block, &payoffs);
        }
        state = trace.state_after.clone();
        traces.push(trace);
    }
    Ok(traces)
}
