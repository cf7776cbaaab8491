//! Constant product market maker: reserves `(x, y)` with `x * y` held at a
//! fixed invariant level `L`. Frictionless, path-independent, and efficient;
//! the no-arbitrage state for price `P` is the unique point with `y / x = P`,
//! i.e. `(sqrt(L / P), sqrt(L * P))`.

use crate::action::{Action, AtomicAction, AtomicKind, Payoff, PoolState};
use crate::error::Error;
use crate::numeric::{approx_eq, tol};
use crate::pool::LiquidityPool;
use crate::rng::SplitMix64;

#[derive(Debug, Clone)]
pub struct ConstantProductPool {
    x0: f64,
    y0: f64,
    invariant: f64,
}

impl ConstantProductPool {
    pub fn new(x0: f64, y0: f64) -> Self {
        assert!(x0 > 0.0 && y0 > 0.0, "reserves must be positive");
        Self {
            x0,
            y0,
            invariant: x0 * y0,
        }
    }

    pub fn invariant(&self) -> f64 {
        self.invariant
    }

    /// The no-arbitrage reserves for external price `price`.
    pub fn no_arb_reserves(&self, price: f64) -> (f64, f64) {
        (
            (self.invariant / price).sqrt(),
            (self.invariant * price).sqrt(),
        )
    }

    fn unpack(&self, state: &PoolState) -> Result<(f64, f64), String> {
        match state {
            PoolState::Reserves { x, y } if *x > 0.0 && *y > 0.0 => Ok((*x, *y)),
            PoolState::Reserves { .. } => Err("reserves must be strictly positive".into()),
            other => Err(format!("expected reserve state, got {other:?}")),
        }
    }

    fn on_curve(&self, x: f64, y: f64) -> bool {
        (x * y - self.invariant).abs() <= tol(self.invariant)
    }
}

impl LiquidityPool for ConstantProductPool {
    fn kind(&self) -> &'static str {
        "constant_product"
    }

    fn initial_state(&self) -> PoolState {
        PoolState::reserves(self.x0, self.y0)
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
        let (x, y) = self.unpack(state)?;
        let AtomicKind::TargetState(target) = &atom.kind else {
            return Err("pair action submitted to a single pool".into());
        };
        let (tx, ty) = self.unpack(target)?;
        if !self.on_curve(tx, ty) {
            return Err(format!(
                "target reserves ({tx}, {ty}) violate x*y = {}",
                self.invariant
            ));
        }
        let produced = Payoff::new(x - tx, y - ty);
        if !produced.approx_eq(&atom.payoff) {
            return Err(format!(
                "state does not reproduce recorded payoff: got ({}, {}), recorded ({}, {})",
                produced.dx, produced.dy, atom.payoff.dx, atom.payoff.dy
            ));
        }
        Ok(target.clone())
    }

    fn optimal_action(&self, state: &PoolState, price: f64) -> Action {
        let target = PoolState::reserves(
            (self.invariant / price).sqrt(),
            (self.invariant * price).sqrt(),
        );
        self.connecting_action(state, &target)
            .expect("no-arbitrage target is always on the curve")
    }

    fn marginal_price(&self, state: &PoolState) -> Option<f64> {
        let (x, y) = self.unpack(state).ok()?;
        Some(y / x)
    }

    fn is_no_arb_exact(&self, state: &PoolState, price: f64) -> Option<bool> {
        self.marginal_price(state).map(|p| approx_eq(p, price))
    }

    fn underlying_no_arb_state(&self, price: f64) -> Option<PoolState> {
        let (x, y) = self.no_arb_reserves(price);
        Some(PoolState::reserves(x, y))
    }

    fn connecting_action(&self, state: &PoolState, target: &PoolState) -> Result<Action, Error> {
        let (x, y) = self
            .unpack(state)
            .map_err(|e| Error::config(format!("bad source state: {e}")))?;
        let (tx, ty) = self
            .unpack(target)
            .map_err(|e| Error::config(format!("bad target state: {e}")))?;
        if !self.on_curve(tx, ty) {
            return Err(Error::config(format!(
                "target ({tx}, {ty}) is not on the invariant curve"
            )));
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

    fn potential(&self, price: f64) -> Result<f64, Error> {
        // q(P) = sqrt(L * P) - sqrt(L * P_ref): the numeraire balance the pool
        // gains moving from the reference no-arbitrage state to P's.
        let p_ref = self.y0 / self.x0;
        Ok((self.invariant * price).sqrt() - (self.invariant * p_ref).sqrt())
    }

    fn sample_action(
        &self,
        state: &PoolState,
        price_range: (f64, f64),
        rng: &mut SplitMix64,
    ) -> Action {
        let p = rng.next_log_uniform(price_range.0, price_range.1);
        let target = self
            .underlying_no_arb_state(p)
            .expect("constant product has a target for every price");
        self.connecting_action(state, &target)
            .expect("sampled target is on the curve")
    }
}
