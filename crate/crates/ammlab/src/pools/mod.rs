//! Concrete pool implementations and their configuration schema.

mod clmm;
mod constant_product;
mod constant_sum;
mod fee;
mod linear_book;
mod product;

pub use clmm::ClmmPool;
pub use constant_product::ConstantProductPool;
pub use constant_sum::ConstantSumPool;
pub use fee::FeeWrappedPool;
pub use linear_book::LinearBookPool;
pub use product::ProductPool;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::pool::LiquidityPool;

/// Pool configuration. `fee > 0` wraps the pool in [`FeeWrappedPool`];
/// product components carry their own (possibly distinct) fees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PoolConfig {
    ConstantProduct {
        x: f64,
        y: f64,
        #[serde(default)]
        fee: f64,
    },
    LinearBook {
        price: f64,
        #[serde(default)]
        fee: f64,
    },
    Clmm {
        edges: Vec<f64>,
        liquidity: Vec<f64>,
        price: f64,
        #[serde(default)]
        fee: f64,
    },
    Product {
        left: Box<PoolConfig>,
        right: Box<PoolConfig>,
    },
    /// Mock that violates the optimal-action axiom; for conformance testing.
    ConstantSum { x: f64, y: f64 },
}

impl PoolConfig {
    pub fn build(&self) -> Result<Box<dyn LiquidityPool>, Error> {
        match self {
            PoolConfig::ConstantProduct { x, y, fee } => {
                if !(*x > 0.0 && *y > 0.0) {
                    return Err(Error::config("constant_product reserves must be positive"));
                }
                wrap_fee(Box::new(ConstantProductPool::new(*x, *y)), *fee)
            }
            PoolConfig::LinearBook { price, fee } => {
                if !price.is_finite() || *price <= 0.0 {
                    return Err(Error::config("linear_book price must be positive"));
                }
                wrap_fee(Box::new(LinearBookPool::new(*price)), *fee)
            }
            PoolConfig::Clmm {
                edges,
                liquidity,
                price,
                fee,
            } => wrap_fee(
                Box::new(ClmmPool::new(edges.clone(), liquidity.clone(), *price)?),
                *fee,
            ),
            PoolConfig::Product { left, right } => {
                Ok(Box::new(ProductPool::new(left.build()?, right.build()?)))
            }
            PoolConfig::ConstantSum { x, y } => {
                if !(*x > 0.0 && *y > 0.0) {
                    return Err(Error::config("constant_sum reserves must be positive"));
                }
                Ok(Box::new(ConstantSumPool::new(*x, *y)))
            }
        }
    }

    /// The fee of the outermost wrapper (0 for product configs; components
    /// keep their own).
    pub fn fee(&self) -> f64 {
        match self {
            PoolConfig::ConstantProduct { fee, .. }
            | PoolConfig::LinearBook { fee, .. }
            | PoolConfig::Clmm { fee, .. } => *fee,
            PoolConfig::Product { .. } | PoolConfig::ConstantSum { .. } => 0.0,
        }
    }

    /// Same configuration with the outer fee removed.
    pub fn without_fee(&self) -> PoolConfig {
        let mut cfg = self.clone();
        match &mut cfg {
            PoolConfig::ConstantProduct { fee, .. }
            | PoolConfig::LinearBook { fee, .. }
            | PoolConfig::Clmm { fee, .. } => *fee = 0.0,
            PoolConfig::Product { .. } | PoolConfig::ConstantSum { .. } => {}
        }
        cfg
    }
}

fn wrap_fee(inner: Box<dyn LiquidityPool>, fee: f64) -> Result<Box<dyn LiquidityPool>, Error> {
    if fee == 0.0 {
        Ok(inner)
    } else {
        Ok(Box::new(FeeWrappedPool::new(inner, fee)?))
    }
}
