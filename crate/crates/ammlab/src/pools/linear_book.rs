//! Linear liquidity book: one unit of the risky asset per unit price,
//! uniformly across all positive prices. Moving the pool price from `p1` to
//! `p2` trades `p2 - p1` units at a pre-fee cost of `(p2^2 - p1^2) / 2`.

use crate::action::{Action, AtomicAction, AtomicKind, Payoff, PoolState};
use crate::error::Error;
use crate::numeric::approx_eq;
use crate::pool::LiquidityPool;
use crate::rng::SplitMix64;

#[derive(Debug, Clone)]
pub struct LinearBookPool {
    p0: f64,
}

impl LinearBookPool {
    pub fn new(p0: f64) -> Self {
        assert!(p0 > 0.0, "pool price must be positive");
        Self { p0 }
    }

    /// Pre-fee trader payoff of moving the pool price `from -> to`.
    pub fn payoff_between(from: f64, to: f64) -> Payoff {
        Payoff::new(to - from, -(to * to - from * from) / 2.0)
    }

    fn unpack(state: &PoolState) -> Result<f64, String> {
        match state {
            PoolState::Price(p) if *p > 0.0 => Ok(*p),
            PoolState::Price(_) => Err("pool price must be strictly positive".into()),
            other => Err(format!("expected price state, got {other:?}")),
        }
    }
}

impl LiquidityPool for LinearBookPool {
    fn kind(&self) -> &'static str {
        "linear_book"
    }

    fn initial_state(&self) -> PoolState {
        PoolState::Price(self.p0)
    }

    fn is_frictionless(&self) -> bool {
        true
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
        let p = Self::unpack(state)?;
        let AtomicKind::TargetState(target) = &atom.kind else {
            return Err("pair action submitted to a single pool".into());
        };
        let t = Self::unpack(target)?;
        let produced = Self::payoff_between(p, t);
        if !produced.approx_eq(&atom.payoff) {
            return Err(format!(
                "state does not reproduce recorded payoff: got ({}, {}), recorded ({}, {})",
                produced.dx, produced.dy, atom.payoff.dx, atom.payoff.dy
            ));
        }
        Ok(target.clone())
    }

    fn optimal_action(&self, state: &PoolState, price: f64) -> Action {
        self.connecting_action(state, &PoolState::Price(price))
            .expect("every positive price is a valid target")
    }

    fn marginal_price(&self, state: &PoolState) -> Option<f64> {
        Self::unpack(state).ok()
    }

    fn is_no_arb_exact(&self, state: &PoolState, price: f64) -> Option<bool> {
        self.marginal_price(state).map(|p| approx_eq(p, price))
    }

    fn underlying_no_arb_state(&self, price: f64) -> Option<PoolState> {
        Some(PoolState::Price(price))
    }

    fn connecting_action(&self, state: &PoolState, target: &PoolState) -> Result<Action, Error> {
        let p = Self::unpack(state).map_err(Error::Config)?;
        let t = Self::unpack(target).map_err(Error::Config)?;
        let payoff = Self::payoff_between(p, t);
        if payoff.is_zero() {
            return Ok(Action::Null);
        }
        Ok(Action::atomic(
            state.clone(),
            AtomicKind::TargetState(target.clone()),
            payoff,
        ))
    }

    fn potential(&self, price: f64) -> Result<f64, Error> {
        Ok((price * price - self.p0 * self.p0) / 2.0)
    }

    fn sample_action(
        &self,
        state: &PoolState,
        price_range: (f64, f64),
        rng: &mut SplitMix64,
    ) -> Action {
        let p = rng.next_log_uniform(price_range.0, price_range.1);
        self.connecting_action(state, &PoolState::Price(p))
            .expect("sampled price is positive")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trade_to_price_payoffs() {
        // 1 -> 99 buys 98 units at pre-fee cost (99^2 - 1) / 2 = 4900.
        let p = LinearBookPool::payoff_between(1.0, 99.0);
        assert!(approx_eq(p.dx, 98.0) && approx_eq(p.dy, -4900.0));
        // Same-price target is a zero trade.
        assert!(LinearBookPool::payoff_between(5.0, 5.0).is_zero());
    }

    #[test]
    fn optimal_action_value_is_half_square_gap() {
        let pool = LinearBookPool::new(1.0);
        let a = pool.optimal_action(&pool.initial_state(), 100.0);
        let v = pool.payoff(&a).value_at(100.0);
        assert!(approx_eq(v, 99.0 * 99.0 / 2.0));
    }

    #[test]
    fn potential_example() {
        let pool = LinearBookPool::new(1.0);
        assert!(approx_eq(pool.potential(99.0).unwrap(), 4900.0));
        assert!(approx_eq(pool.potential(1.0).unwrap(), 0.0));
    }
}
