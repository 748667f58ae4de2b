//! Rényi and Shannon entropies (in nats) of discrete distributions.

use serde::{Deserialize, Serialize};

use crate::coarse::ProbabilityDistribution;
use crate::error::{invalid, Error, Result};

/// Orders closer to one than this are evaluated with the Shannon formula.
pub const SHANNON_ROUTING_BAND: f64 = 1e-8;

/// Conjugate Rényi orders with `1/α + 1/β = 2` and `α ≥ 1`.
///
/// Only `alpha` is stored; `beta = α/(2α - 1)` is always derived from it.
/// `α = +∞` is accepted as the limit and pairs with `β = 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderPair {
    alpha: f64,
}

impl OrderPair {
    pub fn shannon() -> Self {
        OrderPair { alpha: 1.0 }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        if self.alpha.is_infinite() {
            0.5
        } else {
            self.alpha / (2.0 * self.alpha - 1.0)
        }
    }

    pub fn is_shannon(&self) -> bool {
        (self.alpha - 1.0).abs() < SHANNON_ROUTING_BAND
    }
}

pub fn conjugate_order(alpha: f64) -> Result<OrderPair> {
    if alpha.is_nan() || alpha < 1.0 {
        return Err(invalid("alpha", format!("conjugate orders need alpha >= 1, got {alpha}")));
    }
    Ok(OrderPair { alpha })
}

fn check_support(dist: &ProbabilityDistribution) -> Result<()> {
    if dist.weights().iter().all(|&w| w <= 0.0) {
        return Err(Error::EmptyDistribution);
    }
    Ok(())
}

/// `(1 - α)^(-1) ln Σ P_i^α`, skipping zero weights.
///
/// Orders within [`SHANNON_ROUTING_BAND`] of one use the Shannon limit and
/// `α = +∞` gives the min-entropy `-ln max P_i`.
pub fn renyi_entropy(dist: &ProbabilityDistribution, order: f64) -> Result<f64> {
    if order.is_nan() || order <= 0.0 {
        return Err(invalid("order", format!("must be positive, got {order}")));
    }
    check_support(dist)?;
    if (order - 1.0).abs() < SHANNON_ROUTING_BAND {
        return shannon_entropy(dist);
    }
    if order.is_infinite() {
        return Ok(-dist.max_weight().ln());
    }
    let sum: f64 = dist
        .weights()
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| w.powf(order))
        .sum();
    Ok(sum.ln() / (1.0 - order))
}

/// `-Σ P_i ln P_i` with `0 ln 0 = 0`.
pub fn shannon_entropy(dist: &ProbabilityDistribution) -> Result<f64> {
    check_support(dist)?;
    Ok(-dist
        .weights()
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| w * w.ln())
        .sum::<f64>())
}
