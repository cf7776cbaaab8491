//! Product of two pools: states are pairs, an atomic action is a pair of
//! component actions applied simultaneously, and payoffs add. Frictionless
//! and path-independent whenever both components are. Components may carry
//! their own (possibly distinct) fees.

use crate::action::AtomicAction;
use crate::action::{Action, AtomicKind, Payoff, PoolState};
use crate::error::Error;
use crate::numeric::approx_eq;
use crate::pool::LiquidityPool;
use crate::rng::SplitMix64;

pub struct ProductPool {
    left: Box<dyn LiquidityPool>,
    right: Box<dyn LiquidityPool>,
}

impl ProductPool {
    pub fn new(left: Box<dyn LiquidityPool>, right: Box<dyn LiquidityPool>) -> Self {
        Self { left, right }
    }

    pub fn left(&self) -> &dyn LiquidityPool {
        self.left.as_ref()
    }

    pub fn right(&self) -> &dyn LiquidityPool {
        self.right.as_ref()
    }

    fn unpack<'s>(&self, state: &'s PoolState) -> Result<(&'s PoolState, &'s PoolState), String> {
        match state {
            PoolState::Pair(l, r) => Ok((l, r)),
            other => Err(format!("expected pair state, got {other:?}")),
        }
    }

    /// Build the product atomic from component actions.
    pub fn pair_action(&self, state: &PoolState, left: Action, right: Action) -> Action {
        if left.is_null() && right.is_null() {
            return Action::Null;
        }
        let payoff = left.underlying_payoff() + right.underlying_payoff();
        Action::atomic(
            state.clone(),
            AtomicKind::Pair(Box::new(left), Box::new(right)),
            payoff,
        )
    }
}

impl LiquidityPool for ProductPool {
    fn kind(&self) -> &'static str {
        "product"
    }

    fn initial_state(&self) -> PoolState {
        PoolState::pair(self.left.initial_state(), self.right.initial_state())
    }

    fn is_frictionless(&self) -> bool {
        self.left.is_frictionless() && self.right.is_frictionless()
    }

    fn is_path_independent(&self) -> bool {
        self.left.is_path_independent() && self.right.is_path_independent()
    }

    fn is_efficient(&self) -> bool {
        // Cross-pool arbitrage: a pair of component no-arbitrage states for
        // different prices is not a no-arbitrage state of the product.
        false
    }

    fn payoff(&self, action: &Action) -> Payoff {
        match action {
            Action::Null => Payoff::ZERO,
            Action::Atomic(atom) => match &atom.kind {
                AtomicKind::Pair(l, r) => self.left.payoff(l) + self.right.payoff(r),
                // Shape mismatch; never admissible, but stay a total function.
                AtomicKind::TargetState(_) => atom.payoff,
            },
            Action::Composite(parts) => parts
                .iter()
                .fold(Payoff::ZERO, |acc, a| acc + self.payoff(a)),
        }
    }

    fn transition_atomic(
        &self,
        state: &PoolState,
        atom: &AtomicAction,
    ) -> Result<PoolState, String> {
        let (sl, sr) = self.unpack(state)?;
        let AtomicKind::Pair(al, ar) = &atom.kind else {
            return Err("single-pool action submitted to a product pool".into());
        };
        let nl = self
            .left
            .transition(sl, al)
            .map_err(|e| format!("left component: {e}"))?;
        let nr = self
            .right
            .transition(sr, ar)
            .map_err(|e| format!("right component: {e}"))?;
        Ok(PoolState::pair(nl, nr))
    }

    fn optimal_action(&self, state: &PoolState, price: f64) -> Action {
        let (sl, sr) = self.unpack(state).expect("product state is a pair");
        self.pair_action(
            state,
            self.left.optimal_action(sl, price),
            self.right.optimal_action(sr, price),
        )
    }

    fn marginal_price(&self, state: &PoolState) -> Option<f64> {
        let (sl, sr) = self.unpack(state).ok()?;
        let pl = self.left.marginal_price(sl)?;
        let pr = self.right.marginal_price(sr)?;
        if approx_eq(pl, pr) {
            Some(pl)
        } else {
            None
        }
    }

    fn is_no_arb_exact(&self, state: &PoolState, price: f64) -> Option<bool> {
        let (sl, sr) = self.unpack(state).ok()?;
        Some(self.left.is_no_arb_exact(sl, price)? && self.right.is_no_arb_exact(sr, price)?)
    }

    fn underlying_no_arb_state(&self, price: f64) -> Option<PoolState> {
        Some(PoolState::pair(
            self.left.underlying_no_arb_state(price)?,
            self.right.underlying_no_arb_state(price)?,
        ))
    }

    fn connecting_action(&self, state: &PoolState, target: &PoolState) -> Result<Action, Error> {
        let (sl, sr) = self.unpack(state).map_err(Error::Config)?;
        let (tl, tr) = self.unpack(target).map_err(Error::Config)?;
        Ok(self.pair_action(
            state,
            self.left.connecting_action(sl, tl)?,
            self.right.connecting_action(sr, tr)?,
        ))
    }

    fn potential(&self, price: f64) -> Result<f64, Error> {
        // Valid along jointly rebalanced (pairwise no-arbitrage) states.
        Ok(self.left.potential(price)? + self.right.potential(price)?)
    }

    fn sample_action(
        &self,
        state: &PoolState,
        price_range: (f64, f64),
        rng: &mut SplitMix64,
    ) -> Action {
        let (sl, sr) = self.unpack(state).expect("product state is a pair");
        let al = self.left.sample_action(sl, price_range, rng);
        let ar = self.right.sample_action(sr, price_range, rng);
        self.pair_action(state, al, ar)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pool::action_value;
    use crate::pools::{ConstantProductPool, LinearBookPool};

    fn cp_times_linear() -> ProductPool {
        ProductPool::new(
            Box::new(ConstantProductPool::new(100.0, 10_000.0)),
            Box::new(LinearBookPool::new(100.0)),
        )
    }

    #[test]
    fn optimal_is_componentwise_and_value_adds() {
        let pool = cp_times_linear();
        let s = pool.initial_state();
        let a = pool.optimal_action(&s, 121.0);
        let left_value = 100.0; // constant product (100, 10000) at P = 121
        let right_value = (121.0 - 100.0) * (121.0 - 100.0) / 2.0; // linear book
        assert!(approx_eq(
            action_value(&pool, &a, 121.0),
            left_value + right_value
        ));

        // End state is the pair of component no-arbitrage states.
        let end = pool.transition(&s, &a).unwrap();
        assert!(end.approx_eq(&pool.underlying_no_arb_state(121.0).unwrap()));
        assert_eq!(pool.is_no_arb_exact(&end, 121.0), Some(true));
    }

    #[test]
    fn both_components_at_no_arb_is_null() {
        let pool = cp_times_linear();
        let a = pool.optimal_action(&pool.initial_state(), 100.0);
        assert!(a.is_null());
    }

    #[test]
    fn product_of_frictionless_is_frictionless() {
        let pool = cp_times_linear();
        assert!(pool.is_frictionless() && pool.is_path_independent());
    }
}
