//! Concentrated liquidity pool: constant-product segments stitched across
//! consecutive price bands `[b_i, b_{i+1})`, each with its own liquidity
//! parameter `L_i`. Within a band, moving the price `p1 -> p2` pays the
//! trader `dx = L_i (1/sqrt(p1) - 1/sqrt(p2))`, `dy = -L_i (sqrt(p2) -
//! sqrt(p1))`; trades spanning bands compose the per-band segments into one
//! atomic action. The price domain is clamped to the banded range: external
//! prices outside it move the state to the nearest edge.

use crate::action::{Action, AtomicAction, AtomicKind, Payoff, PoolState};
use crate::error::Error;
use crate::numeric::approx_eq;
use crate::pool::LiquidityPool;
use crate::rng::SplitMix64;

#[derive(Debug, Clone)]
pub struct ClmmPool {
    /// Band edges, strictly increasing, length = bands + 1.
    edges: Vec<f64>,
    /// Liquidity per band, length = bands.
    liquidity: Vec<f64>,
    p0: f64,
}

impl ClmmPool {
    pub fn new(edges: Vec<f64>, liquidity: Vec<f64>, p0: f64) -> Result<Self, Error> {
        if edges.len() < 2 || liquidity.len() != edges.len() - 1 {
            return Err(Error::config(
                "clmm needs k+1 edges and k liquidity values with k >= 1",
            ));
        }
        if edges[0] <= 0.0 || edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config(
                "clmm edges must be positive and strictly increasing",
            ));
        }
        if liquidity.iter().any(|l| *l <= 0.0) {
            return Err(Error::config("clmm band liquidity must be positive"));
        }
        if p0 < edges[0] || p0 > edges[edges.len() - 1] {
            return Err(Error::config("clmm initial price outside the banded range"));
        }
        Ok(Self {
            edges,
            liquidity,
            p0,
        })
    }

    fn lo(&self) -> f64 {
        self.edges[0]
    }

    fn hi(&self) -> f64 {
        self.edges[self.edges.len() - 1]
    }

    pub fn clamp_price(&self, price: f64) -> f64 {
        price.clamp(self.lo(), self.hi())
    }

    /// Pre-fee trader payoff of moving the pool price `from -> to`, summing
    /// per-band segments. Antisymmetric in its arguments.
    pub fn payoff_between(&self, from: f64, to: f64) -> Payoff {
        if from == to {
            return Payoff::ZERO;
        }
        let (lo, hi, sign) = if from < to {
            (from, to, 1.0)
        } else {
            (to, from, -1.0)
        };
        let mut dx = 0.0;
        let mut dy = 0.0;
        for (i, l) in self.liquidity.iter().enumerate() {
            let seg_lo = lo.max(self.edges[i]);
            let seg_hi = hi.min(self.edges[i + 1]);
            if seg_lo < seg_hi {
                dx += l * (1.0 / seg_lo.sqrt() - 1.0 / seg_hi.sqrt());
                dy -= l * (seg_hi.sqrt() - seg_lo.sqrt());
            }
        }
        Payoff::new(sign * dx, sign * dy)
    }

    fn unpack(&self, state: &PoolState) -> Result<f64, String> {
        match state {
            PoolState::Price(p) if *p >= self.lo() && *p <= self.hi() => Ok(*p),
            PoolState::Price(p) => Err(format!(
                "pool price {p} outside banded range [{}, {}]",
                self.lo(),
                self.hi()
            )),
            other => Err(format!("expected price state, got {other:?}")),
        }
    }
}

impl LiquidityPool for ClmmPool {
    fn kind(&self) -> &'static str {
        "clmm"
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
        let p = self.unpack(state)?;
        let AtomicKind::TargetState(target) = &atom.kind else {
            return Err("pair action submitted to a single pool".into());
        };
        let t = self.unpack(target)?;
        let produced = self.payoff_between(p, t);
        if !produced.approx_eq(&atom.payoff) {
            return Err(format!(
                "state does not reproduce recorded payoff: got ({}, {}), recorded ({}, {})",
                produced.dx, produced.dy, atom.payoff.dx, atom.payoff.dy
            ));
        }
        Ok(target.clone())
    }

    fn optimal_action(&self, state: &PoolState, price: f64) -> Action {
        let target = PoolState::Price(self.clamp_price(price));
        self.connecting_action(state, &target)
            .expect("clamped price is in the banded range")
    }

    fn marginal_price(&self, state: &PoolState) -> Option<f64> {
        self.unpack(state).ok()
    }

    fn is_no_arb_exact(&self, state: &PoolState, price: f64) -> Option<bool> {
        self.marginal_price(state)
            .map(|p| approx_eq(p, self.clamp_price(price)))
    }

    fn underlying_no_arb_state(&self, price: f64) -> Option<PoolState> {
        Some(PoolState::Price(self.clamp_price(price)))
    }

    fn connecting_action(&self, state: &PoolState, target: &PoolState) -> Result<Action, Error> {
        let p = self.unpack(state).map_err(Error::Config)?;
        let t = self.unpack(target).map_err(Error::Config)?;
        let payoff = self.payoff_between(p, t);
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
        Ok(-self.payoff_between(self.p0, self.clamp_price(price)).dy)
    }

    fn sample_action(
        &self,
        state: &PoolState,
        price_range: (f64, f64),
        rng: &mut SplitMix64,
    ) -> Action {
        let p = self.clamp_price(rng.next_log_uniform(price_range.0, price_range.1));
        self.connecting_action(state, &PoolState::Price(p))
            .expect("sampled price clamped into range")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_band() -> ClmmPool {
        ClmmPool::new(vec![1.0, 4.0], vec![1.0], 1.0).unwrap()
    }

    fn two_bands() -> ClmmPool {
        ClmmPool::new(vec![1.0, 4.0, 9.0], vec![1.0, 2.0], 1.0).unwrap()
    }

    #[test]
    fn single_band_full_sweep() {
        // From the band bottom to the top edge: dx = 1 - 1/2, dy = -(2 - 1).
        let p = single_band().payoff_between(1.0, 4.0);
        assert!(approx_eq(p.dx, 0.5) && approx_eq(p.dy, -1.0));
    }

    #[test]
    fn two_band_sweep_composes_segments() {
        let p = two_bands().payoff_between(1.0, 9.0);
        assert!(approx_eq(p.dx, 0.5 + 2.0 * (0.5 - 1.0 / 3.0)));
        assert!(approx_eq(p.dy, -3.0));
    }

    #[test]
    fn round_trip_nets_zero() {
        let pool = two_bands();
        let up = pool.payoff_between(1.5, 7.0);
        let down = pool.payoff_between(7.0, 1.5);
        assert!((up + down).is_zero());
    }

    #[test]
    fn out_of_range_price_clamps_to_edge() {
        let pool = two_bands();
        let a = pool.optimal_action(&PoolState::Price(2.0), 50.0);
        let end = pool.transition(&PoolState::Price(2.0), &a).unwrap();
        assert!(end.approx_eq(&PoolState::Price(9.0)));
        // Already at the edge: nothing further to do.
        assert!(pool.optimal_action(&end, 50.0).is_null());
    }

    #[test]
    fn same_price_is_null() {
        let pool = single_band();
        assert!(pool.optimal_action(&PoolState::Price(2.0), 2.0).is_null());
    }

    #[test]
    fn riemann_sum_oracle_matches_closed_form() {
        // Independent integral oracle: within band i the marginal x-density
        // at price p is L_i / (2 p^(3/2)) per unit price, and the numeraire
        // cost density is p times that.
        let pool = two_bands();
        let (from, to) = (1.3, 8.2);
        let steps = 400_000;
        let h = (to - from) / steps as f64;
        let mut dx = 0.0;
        let mut dy = 0.0;
        for k in 0..steps {
            let p = from + (k as f64 + 0.5) * h;
            let band = if p < 4.0 { 0 } else { 1 };
            let l = [1.0, 2.0][band];
            let density = l / (2.0 * p.powf(1.5));
            dx += density * h;
            dy -= p * density * h;
        }
        let closed = pool.payoff_between(from, to);
        assert!((closed.dx - dx).abs() <= 1e-6 * dx.abs());
        assert!((closed.dy - dy).abs() <= 1e-6 * dy.abs());
    }
}
