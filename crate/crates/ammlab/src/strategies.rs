//! Arbitrage strategies and PNL accounting.
//!
//! All strategies here are self-financing arbitrage strategies (zero external
//! risky-asset holdings), except the hedged diagnostic which deliberately
//! carries an external position to exercise the holdings term of the PNL.

use serde::{Deserialize, Serialize};

use crate::action::{Action, Payoff, PoolState};
use crate::error::Error;
use crate::market::{BlockContext, BlockTrace, NamedStrategy, Strategy};
use crate::numeric::tol;
use crate::pool::LiquidityPool;
use crate::price::PricePath;
use crate::rng::SplitMix64;

/// Simple arbitrage strategy: submit the value-maximizing trade for the
/// current state and price, every block.
///
/// In `paper_approx` mode the fee-pool destination uses the first-order
/// approximations `P (1 - phi)` (buys) and `P (1 + phi)` (sells) instead of
/// the exact `P / (1 + phi)` and `P / (1 - phi)`; frictionless pools are
/// unaffected.
#[derive(Debug, Clone, Default)]
pub struct SimpleArb {
    pub paper_approx: bool,
}

impl SimpleArb {
    pub fn exact() -> Self {
        Self {
            paper_approx: false,
        }
    }

    pub fn paper_approx() -> Self {
        Self { paper_approx: true }
    }

    /// The action this strategy submits at (state, price).
    pub fn action(&self, pool: &dyn LiquidityPool, state: &PoolState, price: f64) -> Action {
        let phi = pool.fee();
        if !self.paper_approx || phi == 0.0 {
            return pool.optimal_action(state, price);
        }
        let p0 = pool
            .marginal_price(state)
            .expect("fee pools expose the underlying marginal price");
        let target_price = if price > p0 * (1.0 + phi) {
            price * (1.0 - phi)
        } else if price < p0 * (1.0 - phi) {
            price * (1.0 + phi)
        } else {
            return Action::Null;
        };
        let target = pool
            .underlying_no_arb_state(target_price)
            .expect("fee pools wrap frictionless pools");
        pool.connecting_action(state, &target)
            .expect("target state is valid")
    }
}

impl Strategy for SimpleArb {
    fn submissions(
        &mut self,
        pool: &dyn LiquidityPool,
        ctx: &BlockContext,
    ) -> Result<Vec<Action>, Error> {
        Ok(vec![self.action(pool, ctx.state, ctx.price)])
    }
}

/// Waits until block `at_block` (1-based), submits the optimal action for
/// the state and price of that block, then goes quiet again.
#[derive(Debug, Clone)]
pub struct DeferredArb {
    pub at_block: usize,
}

impl DeferredArb {
    pub fn new(at_block: usize) -> Self {
        assert!(at_block >= 1, "blocks are 1-based");
        Self { at_block }
    }
}

impl Strategy for DeferredArb {
    fn submissions(
        &mut self,
        pool: &dyn LiquidityPool,
        ctx: &BlockContext,
    ) -> Result<Vec<Action>, Error> {
        if ctx.block == self.at_block {
            Ok(vec![pool.optimal_action(ctx.state, ctx.price)])
        } else {
            Ok(vec![Action::Null])
        }
    }
}

/// Trades the pool to a prescribed target price each block. Refuses targets
/// outside the no-arbitrage band `[P/(1+phi), P/(1-phi)]` for that block's
/// price, so any run that completes is competitive (finite-horizon).
#[derive(Debug, Clone)]
pub struct TargetPriceArb {
    pub targets: Vec<f64>,
}

impl TargetPriceArb {
    pub fn new(targets: Vec<f64>) -> Self {
        Self { targets }
    }
}

impl Strategy for TargetPriceArb {
    fn submissions(
        &mut self,
        pool: &dyn LiquidityPool,
        ctx: &BlockContext,
    ) -> Result<Vec<Action>, Error> {
        let Some(&target) = self.targets.get(ctx.block - 1) else {
            return Ok(vec![Action::Null]);
        };
        let phi = pool.fee();
        let (lo, hi) = (ctx.price / (1.0 + phi), ctx.price / (1.0 - phi));
        let slack = tol(1f64.max(ctx.price));
        if target < lo - slack || target > hi + slack {
            return Err(Error::CompetitivenessViolation {
                block: ctx.block,
                target,
                lo,
                hi,
            });
        }
        let state = pool
            .underlying_no_arb_state(target)
            .ok_or(Error::Unsupported {
                kind: pool.kind(),
                what: "target-price strategy needs a price-parameterized pool",
            })?;
        Ok(vec![pool.connecting_action(ctx.state, &state)?])
    }
}

/// `m` independent instances built from the same factory, named
/// `{base_id}#1 .. {base_id}#m`. Clones submit identical actions each block,
/// so at most one non-null copy executes.
pub fn clone_set(
    base_id: &str,
    m: usize,
    factory: impl Fn() -> Box<dyn Strategy>,
) -> Vec<NamedStrategy> {
    assert!(m >= 1);
    (1..=m)
        .map(|i| NamedStrategy::new(format!("{base_id}#{i}"), factory()))
        .collect()
}

/// One member of a randomized competitive team used to stress the dominance
/// bound: each block the team plans a chain of intermediate no-arbitrage
/// states ending at the block price's rebalanced state, and member `k`
/// submits hop `k`. All members derive the identical plan from the shared
/// seed. Run under FIFO ordering so hops execute in sequence; occasional
/// stale duplicates are planted to exercise the drop rule.
pub struct CompetitiveTeamMember {
    team_seed: u64,
    member: usize,
    team_size: usize,
}

impl CompetitiveTeamMember {
    pub fn team(team_seed: u64, team_size: usize) -> Vec<NamedStrategy> {
        assert!(team_size >= 1);
        (1..=team_size)
            .map(|member| {
                NamedStrategy::new(
                    format!("team#{member}"),
                    Box::new(CompetitiveTeamMember {
                        team_seed,
                        member,
                        team_size,
                    }) as Box<dyn Strategy>,
                )
            })
            .collect()
    }

    fn plan(&self, pool: &dyn LiquidityPool, ctx: &BlockContext) -> Result<Vec<PoolState>, Error> {
        let mut rng = SplitMix64::substream(self.team_seed, ctx.block as u64);
        let mut chain = Vec::with_capacity(self.team_size + 1);
        chain.push(ctx.state.clone());
        for _ in 1..self.team_size {
            let detour = ctx.price * rng.next_log_uniform(0.5, 2.0);
            chain.push(
                pool.underlying_no_arb_state(detour)
                    .ok_or(Error::Unsupported {
                        kind: pool.kind(),
                        what: "competitive team needs a frictionless pool",
                    })?,
            );
        }
        chain.push(
            pool.underlying_no_arb_state(ctx.price)
                .ok_or(Error::Unsupported {
                    kind: pool.kind(),
                    what: "competitive team needs a frictionless pool",
                })?,
        );
        Ok(chain)
    }
}

impl Strategy for CompetitiveTeamMember {
    fn submissions(
        &mut self,
        pool: &dyn LiquidityPool,
        ctx: &BlockContext,
    ) -> Result<Vec<Action>, Error> {
        let chain = self.plan(pool, ctx)?;
        let hop = pool.connecting_action(&chain[self.member - 1], &chain[self.member])?;
        let mut subs = vec![hop];
        // A stale duplicate of the previous hop: always dropped, never
        // changes the end state, but exercises the filter.
        let mut rng = SplitMix64::substream(
            self.team_seed ^ 0xD1CE,
            (ctx.block * self.team_size + self.member) as u64,
        );
        if self.member >= 2 && rng.next_open01() < 0.3 {
            let dup = pool.connecting_action(&chain[self.member - 2], &chain[self.member - 1])?;
            if !dup.is_null() {
                subs.push(dup);
            }
        }
        Ok(subs)
    }
}

/// Simple arbitrage plus an external hedge: holdings offset the cumulative
/// on-chain risky-asset flow, so the hedged book is flat in `x` at all
/// times. Used as a diagnostic for the external-holdings PNL term.
#[derive(Debug, Default)]
pub struct HedgedS0 {
    inner: SimpleArb,
    cumulative_dx: Vec<f64>,
}

impl HedgedS0 {
    pub fn new() -> Self {
        Self::default()
    }

    /// On-chain cumulative `dx` after each block (the unhedged leg's
    /// holdings); the hedge holds the negation.
    pub fn onchain_x_after(&self) -> &[f64] {
        &self.cumulative_dx
    }
}

impl Strategy for HedgedS0 {
    fn submissions(
        &mut self,
        pool: &dyn LiquidityPool,
        ctx: &BlockContext,
    ) -> Result<Vec<Action>, Error> {
        self.inner.submissions(pool, ctx)
    }

    fn record_execution(&mut self, _block: usize, executed: &[Payoff]) {
        let prev = self.cumulative_dx.last().copied().unwrap_or(0.0);
        let dx: f64 = executed.iter().map(|p| p.dx).sum();
        self.cumulative_dx.push(prev + dx);
    }
}

/// PNL of a strategy at time `t`, split into the on-chain mark-to-market
/// component and the external-holdings component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PnlRecord {
    pub t: f64,
    pub pnl: f64,
    pub onchain: f64,
    pub external: f64,
}

/// PNL of an arbitrage strategy (zero external holdings): the sum over
/// executed trades in blocks with `t_i <= t` of `dx * P_{t_i} + dy`.
pub fn pnl(traces: &[BlockTrace], strategy: &str, path: &PricePath, t: f64) -> PnlRecord {
    pnl_with_holdings(traces, strategy, path, t, &[])
}

/// PNL with piecewise-constant external holdings: `holdings_after[j]` is the
/// risky-asset position held from block `j+1`'s time until the next block.
/// Holdings before the first block are zero; an empty slice means always
/// flat.
pub fn pnl_with_holdings(
    traces: &[BlockTrace],
    strategy: &str,
    path: &PricePath,
    t: f64,
    holdings_after: &[f64],
) -> PnlRecord {
    let mut onchain = 0.0;
    for trace in traces {
        if trace.time > t {
            break;
        }
        onchain += trace.executed_payoff(strategy).value_at(trace.price);
    }
    let mut external = 0.0;
    for (j, x) in holdings_after.iter().enumerate() {
        if j + 1 >= path.len() || path.times[j + 1] > t {
            break;
        }
        external += x * (path.prices[j + 1] - path.prices[j]);
    }
    PnlRecord {
        t,
        pnl: onchain + external,
        onchain,
        external,
    }
}

/// PNL of the sum of the named strategies: componentwise sum of the
/// individual records (the engine guarantees executed trades are disjoint).
pub fn sum_strategies(
    traces: &[BlockTrace],
    strategies: &[&str],
    path: &PricePath,
    t: f64,
) -> PnlRecord {
    let mut total = PnlRecord {
        t,
        pnl: 0.0,
        onchain: 0.0,
        external: 0.0,
    };
    for id in strategies {
        let r = pnl(traces, id, path, t);
        total.pnl += r.pnl;
        total.onchain += r.onchain;
        total.external += r.external;
    }
    total
}

/// Strategy configuration schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StrategyConfig {
    S0 {
        #[serde(default)]
        paper_approx: bool,
    },
    Deferred {
        at_block: usize,
    },
    TargetPrice {
        targets: Vec<f64>,
    },
    CloneSet {
        base: Box<StrategyConfig>,
        m: usize,
    },
    HedgedS0 {},
}

impl StrategyConfig {
    /// Instantiate, assigning ids from the config shape.
    pub fn build(&self) -> Result<Vec<NamedStrategy>, Error> {
        match self {
            StrategyConfig::S0 { paper_approx } => Ok(vec![NamedStrategy::new(
                "s0",
                Box::new(SimpleArb {
                    paper_approx: *paper_approx,
                }),
            )]),
            StrategyConfig::Deferred { at_block } => {
                if *at_block < 1 {
                    return Err(Error::config("deferred at_block is 1-based"));
                }
                Ok(vec![NamedStrategy::new(
                    format!("deferred@{at_block}"),
                    Box::new(DeferredArb::new(*at_block)),
                )])
            }
            StrategyConfig::TargetPrice { targets } => Ok(vec![NamedStrategy::new(
                "target_price",
                Box::new(TargetPriceArb::new(targets.clone())),
            )]),
            StrategyConfig::CloneSet { base, m } => {
                if *m < 1 {
                    return Err(Error::config("clone_set m must be >= 1"));
                }
                let mut out = Vec::with_capacity(*m);
                for i in 1..=*m {
                    let mut built = base.build()?;
                    if built.len() != 1 {
                        return Err(Error::config("clone_set base must be a single strategy"));
                    }
                    let mut named = built.pop().expect("checked length");
                    named.id = format!("{}#{i}", named.id);
                    out.push(named);
                }
                Ok(out)
            }
            StrategyConfig::HedgedS0 {} => Ok(vec![NamedStrategy::new(
                "hedged_s0",
                Box::new(HedgedS0::new()),
            )]),
        }
    }
}
