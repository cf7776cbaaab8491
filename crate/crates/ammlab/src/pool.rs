//! The abstract liquidity-pool contract.
//!
//! A pool is a deterministic state machine: a state space, an atomic action
//! space closed under composition, per-state admissibility, a transition
//! function, a payoff function, and a value-maximizing atomic action for any
//! (state, external price) pair. Concrete pools live in [`crate::pools`];
//! everything here is written against the [`LiquidityPool`] trait.

use crate::action::{Action, AtomicAction, Payoff, PoolState};
use crate::error::{AdmissibilityError, Error};
use crate::numeric::tol;
use crate::rng::SplitMix64;

/// Abstract pool contract.
///
/// Implementations must keep all operations pure: values are immutable and
/// safe to share across threads.
pub trait LiquidityPool: Send + Sync {
    /// Short identifier for reports ("constant_product", "linear_book", ...).
    fn kind(&self) -> &'static str;

    fn initial_state(&self) -> PoolState;

    /// Liquidity-provider fee fraction; 0 for frictionless pools.
    fn fee(&self) -> f64 {
        0.0
    }

    /// Unique no-arbitrage state per external price?
    fn is_frictionless(&self) -> bool;

    /// Payoff determined by (start state, end state) alone?
    fn is_path_independent(&self) -> bool;

    /// Every state a no-arbitrage state for some price?
    fn is_efficient(&self) -> bool;

    /// Apply one atomic action. Errors with a human-readable reason when the
    /// current state does not reproduce the action's recorded payoff.
    fn transition_atomic(
        &self,
        state: &PoolState,
        atom: &AtomicAction,
    ) -> Result<PoolState, String>;

    /// Fee-inclusive payoff of an action. Pure function of the action.
    fn payoff(&self, action: &Action) -> Payoff {
        let base = action.underlying_payoff();
        let phi = self.fee();
        if phi == 0.0 {
            base
        } else {
            Payoff::new(base.dx, base.dy - phi * action.volume())
        }
    }

    /// Apply an action leg by leg. The error index refers to the offending
    /// atomic leg in execution order.
    fn transition(
        &self,
        state: &PoolState,
        action: &Action,
    ) -> Result<PoolState, AdmissibilityError> {
        let mut current = state.clone();
        for (i, leg) in action.legs().into_iter().enumerate() {
            let Action::Atomic(atom) = leg else {
                unreachable!("legs() yields atomic actions only");
            };
            match self.transition_atomic(&current, atom) {
                Ok(next) => current = next,
                Err(reason) => return Err(AdmissibilityError::new(i, reason)),
            }
        }
        Ok(current)
    }

    fn is_admissible(&self, state: &PoolState, action: &Action) -> bool {
        self.transition(state, action).is_ok()
    }

    /// Atomic admissible action maximizing `dx * price + dy` of the
    /// fee-inclusive payoff. Never worse than null, so the value is >= 0.
    fn optimal_action(&self, state: &PoolState, price: f64) -> Action;

    /// Closed-form pool (marginal) price at `state`, when the kind has one.
    fn marginal_price(&self, state: &PoolState) -> Option<f64>;

    /// Closed-form no-arbitrage test, when the kind has one.
    fn is_no_arb_exact(&self, state: &PoolState, price: f64) -> Option<bool>;

    /// The unique no-arbitrage state of the pool itself (frictionless kinds)
    /// or of its underlying pool (fee-wrapped kinds), when a closed form
    /// exists.
    fn underlying_no_arb_state(&self, price: f64) -> Option<PoolState>;

    /// Atomic action moving `state` to `target`, with the pre-fee payoff
    /// recorded. Errors if `target` is not a valid state of this pool.
    fn connecting_action(&self, state: &PoolState, target: &PoolState) -> Result<Action, Error>;

    /// Nondecreasing potential on prices, normalized to 0 at the marginal
    /// price of the initial state. For any action moving the pool between
    /// no-arbitrage states, `dy = q(p_start) - q(p_end)`. Only defined for
    /// efficient, frictionless, path-independent kinds.
    fn potential(&self, price: f64) -> Result<f64, Error>;

    /// Sample an admissible atomic action at `state`: draw a target pool
    /// price log-uniformly from `price_range` and connect to it. Pool kinds
    /// without a price parameterization sample what fits their state space.
    fn sample_action(
        &self,
        state: &PoolState,
        price_range: (f64, f64),
        rng: &mut SplitMix64,
    ) -> Action;
}

/// Fee-inclusive mark-to-market value of `action` at `price`.
pub fn action_value(pool: &dyn LiquidityPool, action: &Action, price: f64) -> f64 {
    pool.payoff(action).value_at(price)
}

/// Apply a sequence of actions at `state`. On success returns the final
/// state and the summed fee-inclusive payoff; on failure identifies the
/// first sequence element whose inclusion breaks admissibility.
pub fn apply_sequence(
    pool: &dyn LiquidityPool,
    state: &PoolState,
    seq: &[Action],
) -> Result<(PoolState, Payoff), AdmissibilityError> {
    let mut current = state.clone();
    let mut total = Payoff::ZERO;
    for (i, action) in seq.iter().enumerate() {
        match pool.transition(&current, action) {
            Ok(next) => {
                total += pool.payoff(action);
                current = next;
            }
            Err(e) => return Err(e.at_index(i)),
        }
    }
    Ok((current, total))
}

/// Outcome of a no-arbitrage check.
#[derive(Debug, Clone, Copy)]
pub struct NoArbAssessment {
    pub holds: bool,
    /// True when a closed form decided the answer; false when only the
    /// sampling check ran (statistical answer).
    pub exact: bool,
    /// Largest sampled action value observed (positive values are arbitrage).
    pub worst_sampled_value: f64,
}

/// Check whether `state` is a no-arbitrage state relative to `price`.
///
/// Uses the pool's closed form when available, and always cross-validates by
/// sampling admissible actions and marking any with positive value. Without
/// a closed form the sampled answer is returned and flagged as statistical.
pub fn is_no_arbitrage_state(
    pool: &dyn LiquidityPool,
    state: &PoolState,
    price: f64,
    trials: usize,
    seed: u64,
) -> NoArbAssessment {
    assert!(price > 0.0, "external price must be positive");
    let mut rng = SplitMix64::new(seed);
    let range = sample_price_range(pool, price);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..trials {
        let a = pool.sample_action(state, range, &mut rng);
        if pool.is_admissible(state, &a) {
            worst = worst.max(action_value(pool, &a, price));
        }
    }
    if worst == f64::NEG_INFINITY {
        worst = 0.0;
    }
    let sampled_ok = worst <= tol(1f64.max(price.abs()).max(worst.abs()));
    match pool.is_no_arb_exact(state, price) {
        Some(exact_answer) => NoArbAssessment {
            // The closed form decides; sampling can only contradict it if the
            // implementation is broken, which the conformance suite surfaces.
            holds: exact_answer && sampled_ok,
            exact: true,
            worst_sampled_value: worst,
        },
        None => NoArbAssessment {
            holds: sampled_ok,
            exact: false,
            worst_sampled_value: worst,
        },
    }
}

/// Default sampling range around a reference price.
pub(crate) fn sample_price_range(pool: &dyn LiquidityPool, reference: f64) -> (f64, f64) {
    let p0 = pool
        .marginal_price(&pool.initial_state())
        .unwrap_or(reference)
        .max(f64::MIN_POSITIVE);
    let reference = reference.max(f64::MIN_POSITIVE);
    let lo = (p0.min(reference)) / 4.0;
    let hi = (p0.max(reference)) * 4.0;
    (lo, hi)
}
