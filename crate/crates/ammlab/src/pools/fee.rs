//! Fee wrapper: same state space, action space, and admissibility as the
//! underlying pool, with the payoff reduced by `phi` times the action's
//! volume. The underlying pool must be efficient, frictionless, and
//! path-independent, which is exactly what makes the wrapped pool still
//! satisfy the optimal-action axiom.

use crate::action::{Action, AtomicAction, PoolState};
use crate::error::Error;
use crate::pool::LiquidityPool;
use crate::rng::SplitMix64;

pub struct FeeWrappedPool {
    inner: Box<dyn LiquidityPool>,
    phi: f64,
}

impl FeeWrappedPool {
    pub fn new(inner: Box<dyn LiquidityPool>, phi: f64) -> Result<Self, Error> {
        if !(phi > 0.0 && phi < 1.0) {
            return Err(Error::config(format!("fee must be in (0, 1), got {phi}")));
        }
        if inner.fee() != 0.0 {
            return Err(Error::config("cannot fee-wrap an already fee-wrapped pool"));
        }
        if !(inner.is_frictionless() && inner.is_path_independent() && inner.is_efficient()) {
            return Err(Error::config(
                "fee wrapper requires an efficient, frictionless, path-independent underlying pool",
            ));
        }
        Ok(Self { inner, phi })
    }

    pub fn inner(&self) -> &dyn LiquidityPool {
        self.inner.as_ref()
    }

    /// No-arbitrage band of underlying pool prices for external price `p`.
    pub fn no_arb_band(&self, price: f64) -> (f64, f64) {
        (price / (1.0 + self.phi), price / (1.0 - self.phi))
    }
}

impl LiquidityPool for FeeWrappedPool {
    fn kind(&self) -> &'static str {
        "fee_wrapped"
    }

    fn initial_state(&self) -> PoolState {
        self.inner.initial_state()
    }

    fn fee(&self) -> f64 {
        self.phi
    }

    fn is_frictionless(&self) -> bool {
        false
    }

    fn is_path_independent(&self) -> bool {
        // Volume, and therefore the fee, depends on the path taken.
        false
    }

    fn is_efficient(&self) -> bool {
        true
    }

    fn transition_atomic(
        &self,
        state: &PoolState,
        atom: &AtomicAction,
    ) -> Result<PoolState, String> {
        self.inner.transition_atomic(state, atom)
    }

    fn optimal_action(&self, state: &PoolState, price: f64) -> Action {
        // Buy to the band's lower edge when the external price clears it,
        // sell to the upper edge when below, otherwise stand pat. A price
        // exactly on a band edge leaves a zero-value trade; prefer null.
        let p0 = self
            .inner
            .marginal_price(state)
            .expect("underlying pool exposes a marginal price");
        let (band_lo, band_hi) = self.no_arb_band(price);
        let target_price = if price > p0 * (1.0 + self.phi) {
            band_lo
        } else if price < p0 * (1.0 - self.phi) {
            band_hi
        } else {
            return Action::Null;
        };
        let target = self
            .inner
            .underlying_no_arb_state(target_price)
            .expect("underlying pool is frictionless");
        self.inner
            .connecting_action(state, &target)
            .expect("underlying target state is valid")
    }

    fn marginal_price(&self, state: &PoolState) -> Option<f64> {
        self.inner.marginal_price(state)
    }

    fn is_no_arb_exact(&self, state: &PoolState, price: f64) -> Option<bool> {
        let p0 = self.inner.marginal_price(state)?;
        Some(price <= p0 * (1.0 + self.phi) && price >= p0 * (1.0 - self.phi))
    }

    fn underlying_no_arb_state(&self, price: f64) -> Option<PoolState> {
        self.inner.underlying_no_arb_state(price)
    }

    fn connecting_action(&self, state: &PoolState, target: &PoolState) -> Result<Action, Error> {
        self.inner.connecting_action(state, target)
    }

    fn potential(&self, _price: f64) -> Result<f64, Error> {
        // The potential is a property of the underlying pool; fee-inclusive
        // payoffs do not telescope.
        Err(Error::Unsupported {
            kind: self.kind(),
            what: "potential is defined on the underlying pool",
        })
    }

    fn sample_action(
        &self,
        state: &PoolState,
        price_range: (f64, f64),
        rng: &mut SplitMix64,
    ) -> Action {
        self.inner.sample_action(state, price_range, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::approx_eq;
    use crate::pool::action_value;
    use crate::pools::{ConstantProductPool, LinearBookPool};

    fn linear_fee(p0: f64, phi: f64) -> FeeWrappedPool {
        FeeWrappedPool::new(Box::new(LinearBookPool::new(p0)), phi).unwrap()
    }

    #[test]
    fn fee_charges_on_pre_fee_turnover() {
        let pool = linear_fee(1.0, 0.01);
        let target = PoolState::Price(99.0);
        let a = pool
            .connecting_action(&pool.initial_state(), &target)
            .unwrap();
        let payoff = pool.payoff(&a);
        assert!(approx_eq(payoff.dx, 98.0));
        assert!(approx_eq(payoff.dy, -4949.0));
        assert!(approx_eq(a.volume(), 4900.0));
    }

    #[test]
    fn optimal_buy_targets_price_over_one_plus_fee() {
        let pool = linear_fee(1.0, 0.01);
        let a = pool.optimal_action(&pool.initial_state(), 100.0);
        let end = pool.transition(&pool.initial_state(), &a).unwrap();
        assert!(end.approx_eq(&PoolState::Price(100.0 / 1.01)));

        // Golden-section oracle over the target price confirms the closed form.
        let value = |t: f64| {
            let dy0 = -(t * t - 1.0) / 2.0;
            (t - 1.0) * 100.0 + dy0 - 0.01 * dy0.abs()
        };
        let (mut lo, mut hi) = (1.0, 200.0);
        let gr = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let m1 = hi - gr * (hi - lo);
            let m2 = lo + gr * (hi - lo);
            if value(m1) < value(m2) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        let oracle_best = value((lo + hi) / 2.0);
        let got = action_value(&pool, &a, 100.0);
        assert!((got - oracle_best).abs() <= 1e-6 * oracle_best.abs());
        assert!(got + 1e-9 >= oracle_best);
    }

    #[test]
    fn inside_band_is_null() {
        let pool = linear_fee(1.0, 0.01);
        assert!(pool.optimal_action(&pool.initial_state(), 1.005).is_null());
        // Exactly on the band edge: the boundary trade has zero value.
        assert!(pool.optimal_action(&pool.initial_state(), 1.01).is_null());
    }

    #[test]
    fn constant_product_fee_destination() {
        let pool = FeeWrappedPool::new(Box::new(ConstantProductPool::new(100.0, 10_000.0)), 0.003)
            .unwrap();
        let a = pool.optimal_action(&pool.initial_state(), 121.0);
        let end = pool.transition(&pool.initial_state(), &a).unwrap();
        let inner_price: f64 = 121.0 / 1.003;
        let expected = PoolState::reserves((1e6 / inner_price).sqrt(), (1e6 * inner_price).sqrt());
        assert!(end.approx_eq(&expected));

        // Grid search over candidate target prices never beats it.
        let best = action_value(&pool, &a, 121.0);
        for k in 0..2000 {
            let t = 80.0 + 0.05 * k as f64;
            let target = pool.underlying_no_arb_state(t).unwrap();
            let candidate = pool
                .connecting_action(&pool.initial_state(), &target)
                .unwrap();
            assert!(action_value(&pool, &candidate, 121.0) <= best + 1e-9 * best.max(1.0));
        }
    }

    #[test]
    fn no_arb_band_check() {
        let pool = linear_fee(99.0, 0.01);
        // 99 in [99.5/1.01, 99.5/0.99]
        assert_eq!(
            pool.is_no_arb_exact(&pool.initial_state(), 99.5),
            Some(true)
        );
        assert_eq!(
            pool.is_no_arb_exact(&pool.initial_state(), 110.0),
            Some(false)
        );
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(FeeWrappedPool::new(Box::new(LinearBookPool::new(1.0)), 0.0).is_err());
        assert!(FeeWrappedPool::new(Box::new(LinearBookPool::new(1.0)), 1.0).is_err());
        let wrapped = FeeWrappedPool::new(Box::new(LinearBookPool::new(1.0)), 0.01).unwrap();
        assert!(FeeWrappedPool::new(Box::new(wrapped), 0.01).is_err());
    }
}
