//! Liquidity-pool market simulator and arbitrage MEV estimation harness.
//!
//! The crate models on-chain liquidity pools as deterministic state machines
//! (states, payoff-parameterized actions, per-state admissibility), runs them
//! inside a block-based market with pluggable transaction-ordering
//! mechanisms, drives arbitrage strategies over seeded external price paths,
//! and estimates maximal extractable value from arbitrage via Monte Carlo.
//!
//! Layout:
//! - [`action`], [`pool`]: the abstract pool contract and its action monoid.
//! - [`pools`]: constant product, linear book, concentrated liquidity, fee
//!   wrapper, product pool, and a non-conforming constant-sum mock.
//! - [`conformance`]: seeded checker for the pool axioms.
//! - [`price`], [`rng`]: deterministic price-path generation.
//! - [`market`]: block engine (submission ordering, admissibility filtering,
//!   execution).
//! - [`strategies`]: arbitrage strategies and PNL accounting.
//! - [`estimator`]: MEV estimates and the invariance experiments.
//! - [`config`]: experiment configuration schema.

pub mod action;
pub mod config;
pub mod conformance;
pub mod error;
pub mod estimator;
pub mod market;
pub mod numeric;
pub mod pool;
pub mod pools;
pub mod price;
pub mod rng;
pub mod strategies;

pub use action::{compose, compose_all, Action, AtomicAction, AtomicKind, Payoff, PoolState};
pub use error::{AdmissibilityError, Error};
pub use pool::{action_value, apply_sequence, is_no_arbitrage_state, LiquidityPool};
