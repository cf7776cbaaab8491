//! Experiment configuration: one JSON document drives a run. Unknown keys
//! are a hard error everywhere; silent typos corrupt experiments.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::market::{BlockSchedule, OrderingMechanism};
use crate::pools::PoolConfig;
use crate::price::ProcessSpec;
use crate::strategies::StrategyConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleConfig {
    Uniform { n_blocks: usize, dt: f64 },
    Explicit { times: Vec<f64> },
}

impl ScheduleConfig {
    pub fn build(&self) -> Result<BlockSchedule, Error> {
        match self {
            ScheduleConfig::Uniform { n_blocks, dt } => BlockSchedule::uniform(*n_blocks, *dt),
            ScheduleConfig::Explicit { times } => BlockSchedule::explicit(times.clone()),
        }
    }
}

/// Expected direction of a statistical comparison (lhs vs rhs).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Equal,
    Le,
    Ge,
}

fn default_sigma_multiplier() -> f64 {
    3.0
}

fn default_rel_tolerance() -> f64 {
    1e-9
}

/// Parameters for the ordering-invariance experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderingSection {
    pub mechanisms: Vec<OrderingMechanism>,
    pub clone_counts: Vec<usize>,
    #[serde(default = "default_rel_tolerance")]
    pub rel_tolerance: f64,
}

/// Parameters for the block-subdivision experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubdivisionSection {
    pub k: usize,
    /// Expected relation of subdivided vs coarse expected MEV. Default:
    /// `le` when the pool has a fee, `equal` otherwise.
    #[serde(default)]
    pub expect_mev: Option<Direction>,
    /// Expected relation for noncompetitive MEV. Default: `equal`.
    #[serde(default)]
    pub expect_mev_star: Option<Direction>,
    #[serde(default = "default_sigma_multiplier")]
    pub sigma_multiplier: f64,
}

/// Parameters for the martingale-equality experiment (simple vs deferred
/// arbitrage).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MartingaleSection {
    /// Block the deferred strategy trades on; default: the last block.
    #[serde(default)]
    pub defer_block: Option<usize>,
    /// Expected relation of E[PNL*(S0)] vs E[PNL*(deferred)]. Default:
    /// `le` when the pool has a fee, `equal` otherwise.
    #[serde(default)]
    pub expect: Option<Direction>,
    #[serde(default = "default_sigma_multiplier")]
    pub sigma_multiplier: f64,
}

/// Parameters for the plain MEV estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateSection {
    /// "expected" (competitive) or "noncompetitive".
    pub metric: String,
}

/// One experiment configuration document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub n_paths: usize,
    pub pool: PoolConfig,
    pub schedule: ScheduleConfig,
    pub process: ProcessSpec,
    /// External price at time zero; default: the pool's initial marginal
    /// price, so the market starts in a no-arbitrage state.
    #[serde(default)]
    pub initial_price: Option<f64>,
    /// Must be a subset of the schedule's block times; default: the last.
    #[serde(default)]
    pub evaluation_times: Vec<f64>,
    #[serde(default)]
    pub strategies: Vec<StrategyConfig>,
    #[serde(default)]
    pub ordering: Option<OrderingSection>,
    #[serde(default)]
    pub subdivision: Option<SubdivisionSection>,
    #[serde(default)]
    pub martingale: Option<MartingaleSection>,
    #[serde(default)]
    pub estimate: Option<EstimateSection>,
}

impl ExperimentConfig {
    pub fn from_json(json: &str) -> Result<Self, Error> {
        let cfg: ExperimentConfig =
            serde_json::from_str(json).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.n_paths == 0 {
            return Err(Error::config("n_paths must be >= 1"));
        }
        self.process.validate()?;
        let schedule = self.schedule.build()?;
        for t in &self.evaluation_times {
            if !schedule
                .times()
                .iter()
                .any(|bt| crate::numeric::approx_eq(*bt, *t))
            {
                return Err(Error::config(format!(
                    "evaluation time {t} is not a block time"
                )));
            }
        }
        // Building the pool validates its parameters.
        let pool = self.pool.build()?;
        if self.initial_price.is_none() && pool.marginal_price(&pool.initial_state()).is_none() {
            return Err(Error::config(
                "pool kind has no marginal price; set initial_price explicitly",
            ));
        }
        Ok(())
    }

    /// External price at time zero.
    pub fn p0(&self) -> Result<f64, Error> {
        if let Some(p) = self.initial_price {
            if p <= 0.0 {
                return Err(Error::config("initial_price must be positive"));
            }
            return Ok(p);
        }
        let pool = self.pool.build()?;
        pool.marginal_price(&pool.initial_state())
            .ok_or_else(|| Error::config("pool kind has no marginal price; set initial_price"))
    }

    /// Evaluation times, defaulting to the final block time.
    pub fn eval_times(&self) -> Result<Vec<f64>, Error> {
        if !self.evaluation_times.is_empty() {
            return Ok(self.evaluation_times.clone());
        }
        let schedule = self.schedule.build()?;
        Ok(vec![*schedule.times().last().expect("nonempty schedule")])
    }

    /// Canonical serialized form used for hashing and manifests.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}
