//! Constant-sum mock pool: reserves `(x, y)` with `x + y` fixed, so every
//! trade executes at price 1. Constant-sum markets do not satisfy the
//! liquidity-pool axioms: for any external price away from 1 the trade value
//! grows with size all the way to the (open) reserve boundary, so no maximizer
//! exists. This mock deliberately returns a half-reserve trade from
//! `optimal_action` so the conformance suite can demonstrate the failure, and
//! it exposes no closed-form no-arbitrage test so that check can be exercised
//! in its statistical mode.

use crate::action::{Action, AtomicAction, AtomicKind, Payoff, PoolState};
use crate::error::Error;
use crate::numeric::{approx_eq, tol};
use crate::pool::LiquidityPool;
use crate::rng::SplitMix64;

#[derive(Debug, Clone)]
pub struct ConstantSumPool {
    x0: f64,
    y0: f64,
    total: f64,
}

impl ConstantSumPool {
    pub fn new(x0: f64, y0: f64) -> Self {
        assert!(x0 > 0.0 && y0 > 0.0, "reserves must be positive");
        Self {
            x0,
            y0,
            total: x0 + y0,
        }
    }

    fn unpack(&self, state: &PoolState) -> Result<(f64, f64), String> {
        match state {
            PoolState::Reserves { x, y } if *x > 0.0 && *y > 0.0 => Ok((*x, *y)),
            PoolState::Reserves { .. } => Err("reserves must be strictly positive".into()),
            other => Err(format!("expected reserve state, got {other:?}")),
        }
    }

    fn on_line(&self, x: f64, y: f64) -> bool {
        (x + y - self.total).abs() <= tol(self.total)
    }

    fn trade(&self, state: &PoolState, dx: f64) -> Action {
        let (x, y) = self.unpack(state).expect("valid state");
        if dx == 0.0 {
            return Action::Null;
        }
        Action::atomic(
            state.clone(),
            AtomicKind::TargetState(PoolState::reserves(x - dx, y + dx)),
            Payoff::new(dx, -dx),
        )
    }
}

impl LiquidityPool for ConstantSumPool {
    fn kind(&self) -> &'static str {
        "constant_sum"
    }

    fn initial_state(&self) -> PoolState {
        PoolState::reserves(self.x0, self.y0)
    }

    fn is_frictionless(&self) -> bool {
        false
    }

    fn is_path_independent(&self) -> bool {
        true
    }

    fn is_efficient(&self) -> bool {
        true
    }

    fn transition_atomic(
        &self,
        state: &PoolState,
        atom: &AtomicAction,
    ) -> Result<PoolState, String> {
        let (x, y) = self.unpack(state)?;
        let AtomicKind::TargetState(target) = &atom.kind else {
            return Err("pair action submitted to a single pool".into());
        };
        let (tx, ty) = self.unpack(target)?;
        if !self.on_line(tx, ty) {
            return Err(format!(
                "target ({tx}, {ty}) violates x + y = {}",
                self.total
            ));
        }
        let produced = Payoff::new(x - tx, y - ty);
        if !produced.approx_eq(&atom.payoff) {
            return Err("state does not reproduce recorded payoff".into());
        }
        Ok(target.clone())
    }

    fn optimal_action(&self, state: &PoolState, price: f64) -> Action {
        let (x, y) = self.unpack(state).expect("valid state");
        if approx_eq(price, 1.0) {
            Action::Null
        } else if price > 1.0 {
            self.trade(state, x / 2.0)
        } else {
            self.trade(state, -y / 2.0)
        }
    }

    fn marginal_price(&self, _state: &PoolState) -> Option<f64> {
        None
    }

    fn is_no_arb_exact(&self, _state: &PoolState, _price: f64) -> Option<bool> {
        None
    }

    fn underlying_no_arb_state(&self, _price: f64) -> Option<PoolState> {
        None
    }

    fn connecting_action(&self, state: &PoolState, target: &PoolState) -> Result<Action, Error> {
        let (x, y) = self.unpack(state).map_err(Error::Config)?;
        let (tx, ty) = self.unpack(target).map_err(Error::Config)?;
        if !self.on_line(tx, ty) {
            return Err(Error::config("target is not on the constant-sum line"));
        }
        let payoff = Payoff::new(x - tx, y - ty);
        if payoff.is_zero() {
            return Ok(Action::Null);
        }
        Ok(Action::atomic(
            state.clone(),
            AtomicKind::TargetState(target.clone()),
            payoff,
        ))
    }

    fn potential(&self, _price: f64) -> Result<f64, Error> {
        Err(Error::Unsupported {
            kind: self.kind(),
            what: "no potential function",
        })
    }

    fn sample_action(
        &self,
        state: &PoolState,
        _price_range: (f64, f64),
        rng: &mut SplitMix64,
    ) -> Action {
        let (x, y) = self.unpack(state).expect("valid state");
        let frac = rng.next_range(0.05, 0.95);
        if rng.next_u64() & 1 == 0 {
            self.trade(state, frac * x)
        } else {
            self.trade(state, -frac * y)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pool::action_value;

    #[test]
    fn half_reserve_trade_is_dominated() {
        let pool = ConstantSumPool::new(100.0, 100.0);
        let s = pool.initial_state();
        let claimed = pool.optimal_action(&s, 2.0);
        let bigger = pool.trade(&s, 90.0);
        assert!(pool.is_admissible(&s, &bigger));
        assert!(action_value(&pool, &bigger, 2.0) > action_value(&pool, &claimed, 2.0));
    }
}
