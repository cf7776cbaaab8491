//! Seeded conformance checker for the liquidity-pool axioms.
//!
//! Each axiom is exercised over sampled states, prices, and admissible
//! actions; failures are recorded in the report rather than raised, so a
//! non-conforming pool (like the constant-sum mock) produces a readable
//! verdict instead of a panic.

use serde::{Deserialize, Serialize};

use crate::action::{Action, PoolState};
use crate::numeric::tol;
use crate::pool::{action_value, sample_price_range, LiquidityPool};
use crate::rng::SplitMix64;

/// Samples admissible atomic actions by drawing target pool prices
/// log-uniformly from a price range and connecting the current state to them.
#[derive(Debug, Clone)]
pub struct ActionSampler {
    pub price_lo: f64,
    pub price_hi: f64,
}

impl ActionSampler {
    pub fn new(price_lo: f64, price_hi: f64) -> Self {
        assert!(price_lo > 0.0 && price_hi > price_lo);
        Self { price_lo, price_hi }
    }

    /// Default range for a pool: a factor-of-four band around the initial
    /// marginal price.
    pub fn for_pool(pool: &dyn LiquidityPool) -> Self {
        let p0 = pool.marginal_price(&pool.initial_state()).unwrap_or(1.0);
        let (lo, hi) = sample_price_range(pool, p0);
        Self::new(lo, hi)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.price_lo, self.price_hi)
    }

    pub fn sample(
        &self,
        pool: &dyn LiquidityPool,
        state: &PoolState,
        rng: &mut SplitMix64,
    ) -> Action {
        pool.sample_action(state, self.range(), rng)
    }

    fn sample_price(&self, rng: &mut SplitMix64) -> f64 {
        rng.next_log_uniform(self.price_lo, self.price_hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxiomStatus {
    Pass,
    Fail,
}

/// One axiom verdict; serializes with exactly these fields.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AxiomCheck {
    pub axiom: String,
    pub status: AxiomStatus,
    pub trials: usize,
    pub worst_violation: f64,
    pub seed: u64,
}

impl AxiomCheck {
    pub fn passed(&self) -> bool {
        self.status == AxiomStatus::Pass
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConformanceReport(pub Vec<AxiomCheck>);

impl ConformanceReport {
    pub fn all_pass(&self) -> bool {
        self.0.iter().all(AxiomCheck::passed)
    }

    pub fn get(&self, axiom: &str) -> Option<&AxiomCheck> {
        self.0.iter().find(|c| c.axiom == axiom)
    }
}

/// Run the axiom suite: null-action laws, payoff additivity, admissibility
/// chaining, composition associativity (flattening), optimal-action
/// dominance, and the no-arbitrage property of post-optimal states.
/// Deterministic given the seed.
pub fn check_axioms(
    pool: &dyn LiquidityPool,
    sampler: &ActionSampler,
    n_trials: usize,
    seed: u64,
) -> ConformanceReport {
    assert!(n_trials >= 1);
    let checks = vec![
        run_check("null_action", pool, sampler, n_trials, seed, check_null),
        run_check(
            "payoff_additivity",
            pool,
            sampler,
            n_trials,
            seed,
            check_additivity,
        ),
        run_check(
            "admissibility_chaining",
            pool,
            sampler,
            n_trials,
            seed,
            check_chaining,
        ),
        run_check(
            "composition_associativity",
            pool,
            sampler,
            n_trials,
            seed,
            check_associativity,
        ),
        run_check(
            "optimal_action_dominance",
            pool,
            sampler,
            n_trials,
            seed,
            check_dominance,
        ),
        run_check(
            "post_optimal_no_arbitrage",
            pool,
            sampler,
            n_trials,
            seed,
            check_post_optimal,
        ),
    ];
    ConformanceReport(checks)
}

struct Trial<'a> {
    pool: &'a dyn LiquidityPool,
    sampler: &'a ActionSampler,
    state: PoolState,
    rng: SplitMix64,
}

impl Trial<'_> {
    /// Wander to keep states varied; occasionally reset to the initial state.
    fn step(&mut self) {
        if self.rng.next_open01() < 0.2 {
            self.state = self.pool.initial_state();
        }
        let a = self.sampler.sample(self.pool, &self.state, &mut self.rng);
        if let Ok(next) = self.pool.transition(&self.state, &a) {
            self.state = next;
        }
    }
}

fn run_check(
    name: &str,
    pool: &dyn LiquidityPool,
    sampler: &ActionSampler,
    n_trials: usize,
    seed: u64,
    check: fn(&mut Trial) -> f64,
) -> AxiomCheck {
    // Distinct substream per axiom keeps verdicts independent of suite order.
    let stream = SplitMix64::substream(seed, fxhash(name));
    let mut trial = Trial {
        pool,
        sampler,
        state: pool.initial_state(),
        rng: stream,
    };
    let mut worst = 0.0f64;
    for _ in 0..n_trials {
        worst = worst.max(check(&mut trial));
        trial.step();
    }
    AxiomCheck {
        axiom: name.to_string(),
        status: if worst > 0.0 {
            AxiomStatus::Fail
        } else {
            AxiomStatus::Pass
        },
        trials: n_trials,
        worst_violation: worst,
        seed,
    }
}

// Tiny stable string hash for substream labels.
fn fxhash(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x1000_0000_01b3)
    })
}

fn violation(excess: f64, scale: f64) -> f64 {
    let t = tol(1f64.max(scale.abs()));
    if excess > t {
        excess
    } else {
        0.0
    }
}

fn check_null(t: &mut Trial) -> f64 {
    let pool = t.pool;
    let mut worst = 0.0f64;
    if !pool.is_admissible(&t.state, &Action::Null) {
        worst = worst.max(1.0);
    }
    match pool.transition(&t.state, &Action::Null) {
        Ok(next) if next.approx_eq(&t.state) => {}
        _ => worst = worst.max(1.0),
    }
    let p = pool.payoff(&Action::Null);
    worst = worst.max(violation(p.dx.abs(), 1.0));
    worst = worst.max(violation(p.dy.abs(), 1.0));
    worst
}

fn check_additivity(t: &mut Trial) -> f64 {
    let pool = t.pool;
    let a1 = t.sampler.sample(pool, &t.state, &mut t.rng);
    let Ok(mid) = pool.transition(&t.state, &a1) else {
        return 0.0;
    };
    let a2 = t.sampler.sample(pool, &mid, &mut t.rng);
    let combined = pool.payoff(&crate::action::compose(a1.clone(), a2.clone()));
    let parts = pool.payoff(&a1) + pool.payoff(&a2);
    let scale = combined.dx.abs().max(combined.dy.abs());
    violation(
        (combined.dx - parts.dx)
            .abs()
            .max((combined.dy - parts.dy).abs()),
        scale,
    )
}

fn check_chaining(t: &mut Trial) -> f64 {
    let pool = t.pool;
    let a1 = t.sampler.sample(pool, &t.state, &mut t.rng);
    if !pool.is_admissible(&t.state, &a1) {
        return 0.0;
    }
    let mid = pool.transition(&t.state, &a1).expect("checked admissible");
    let a2 = t.sampler.sample(pool, &mid, &mut t.rng);
    if !pool.is_admissible(&mid, &a2) {
        return 0.0;
    }
    let composite = crate::action::compose(a1, a2);
    if pool.is_admissible(&t.state, &composite) {
        0.0
    } else {
        1.0
    }
}

fn check_associativity(t: &mut Trial) -> f64 {
    let pool = t.pool;
    let a1 = t.sampler.sample(pool, &t.state, &mut t.rng);
    let s1 = pool
        .transition(&t.state, &a1)
        .unwrap_or_else(|_| t.state.clone());
    let a2 = t.sampler.sample(pool, &s1, &mut t.rng);
    let s2 = pool.transition(&s1, &a2).unwrap_or_else(|_| s1.clone());
    let a3 = t.sampler.sample(pool, &s2, &mut t.rng);
    let left = crate::action::compose(crate::action::compose(a1.clone(), a2.clone()), a3.clone());
    let right = crate::action::compose(a1, crate::action::compose(a2, a3));
    if left == right {
        0.0
    } else {
        1.0
    }
}

fn check_dominance(t: &mut Trial) -> f64 {
    let pool = t.pool;
    let price = t.sampler.sample_price(&mut t.rng);
    let best = pool.optimal_action(&t.state, price);
    if !pool.is_admissible(&t.state, &best) {
        return 1.0;
    }
    let best_value = action_value(pool, &best, price);
    if best_value < -tol(1f64.max(price)) {
        // Optimal action must never be worse than null.
        return -best_value;
    }
    // Candidates: single sampled legs and a two-leg admissible sequence.
    let a1 = t.sampler.sample(pool, &t.state, &mut t.rng);
    let mut worst = 0.0f64;
    if pool.is_admissible(&t.state, &a1) {
        let v = action_value(pool, &a1, price);
        worst = worst.max(violation(
            v - best_value,
            price.abs().max(v.abs()).max(best_value.abs()),
        ));
        if let Ok(mid) = pool.transition(&t.state, &a1) {
            let a2 = t.sampler.sample(pool, &mid, &mut t.rng);
            let seq = crate::action::compose(a1, a2);
            if pool.is_admissible(&t.state, &seq) {
                let v = action_value(pool, &seq, price);
                worst = worst.max(violation(
                    v - best_value,
                    price.abs().max(v.abs()).max(best_value.abs()),
                ));
            }
        }
    }
    worst
}

fn check_post_optimal(t: &mut Trial) -> f64 {
    let pool = t.pool;
    let price = t.sampler.sample_price(&mut t.rng);
    let best = pool.optimal_action(&t.state, price);
    let Ok(after) = pool.transition(&t.state, &best) else {
        return 1.0;
    };
    let a = t.sampler.sample(pool, &after, &mut t.rng);
    if !pool.is_admissible(&after, &a) {
        return 0.0;
    }
    let v = action_value(pool, &a, price);
    violation(v, price.abs().max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pools::{ConstantProductPool, ConstantSumPool};

    #[test]
    fn constant_product_conforms() {
        let pool = ConstantProductPool::new(100.0, 10_000.0);
        let sampler = ActionSampler::for_pool(&pool);
        let report = check_axioms(&pool, &sampler, 500, 7);
        assert!(report.all_pass(), "{report:?}");
    }

    #[test]
    fn constant_sum_fails_dominance() {
        let pool = ConstantSumPool::new(100.0, 100.0);
        let sampler = ActionSampler::new(0.25, 4.0);
        let report = check_axioms(&pool, &sampler, 500, 7);
        assert!(!report.all_pass());
        assert_eq!(
            report.get("optimal_action_dominance").unwrap().status,
            AxiomStatus::Fail
        );
        // The monoid structure itself is fine.
        assert!(report.get("null_action").unwrap().passed());
        assert!(report.get("payoff_additivity").unwrap().passed());
        assert!(report.get("composition_associativity").unwrap().passed());
    }

    #[test]
    fn report_is_deterministic_given_seed() {
        let pool = ConstantProductPool::new(100.0, 10_000.0);
        let sampler = ActionSampler::for_pool(&pool);
        let a = serde_json::to_string(&check_axioms(&pool, &sampler, 200, 11)).unwrap();
        let b = serde_json::to_string(&check_axioms(&pool, &sampler, 200, 11)).unwrap();
        assert_eq!(a, b);
    }
}
