//! Entropic lower bounds for binned position/momentum distributions.
//!
//! Three bounds are available for the entropy sum `H_α + H_β` of conjugate
//! orders:
//!
//! - concentration (Maassen–Uffink type): `-2 ln C_max = -ln λ₀`, for the
//!   intra-bin refined distributions `|a_km|²`, `|b_ln|²`;
//! - single-bin (Deutsch type): `-2 ln((1 + C_max)/2)`, from
//!   `q_k + p_l ≤ 1 + C_max`;
//! - Beckner: `-(1/2)(ln α/(1-α) + ln β/(1-β)) + ln π - ln γ`, positive only
//!   below an order-dependent threshold on `γ`.
//!
//! The best-bound selectors take the larger of the valid candidates.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::entropy::{conjugate_order, OrderPair};
use crate::error::{invalid, Result};
use crate::prolate::{solve_concentration, ConcentrationEigenSolution};

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(invalid("gamma", format!("must be positive and finite, got {gamma}")));
    }
    Ok(())
}

/// `-ln λ₀`, identical to `-2 ln C_max`.
pub fn maassen_uffink_from_lambda0(lambda0: f64) -> f64 {
    -lambda0.ln()
}

/// `-2 ln((1 + sqrt(λ₀))/2)`.
pub fn deutsch_from_lambda0(lambda0: f64) -> f64 {
    -2.0 * (0.5 * (1.0 + lambda0.sqrt())).ln()
}

pub fn bound_maassen_uffink(gamma: f64, node_count: usize) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(maassen_uffink_from_lambda0(solve_concentration(gamma, node_count)?.lambda0))
}

pub fn bound_deutsch(gamma: f64, node_count: usize) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(deutsch_from_lambda0(solve_concentration(gamma, node_count)?.lambda0))
}

/// `ln a/(1 - a)`, continuous through `a = 1` (value -1) and zero at `a = ∞`.
fn log_ratio(a: f64, a_minus_one: f64) -> f64 {
    if a.is_infinite() {
        0.0
    } else if a_minus_one == 0.0 {
        -1.0
    } else {
        -a_minus_one.ln_1p() / a_minus_one
    }
}

/// Beckner-derived bound for conjugate orders `(α, β)` at `γ`. May be
/// negative; see [`beckner_threshold`].
pub fn bound_beckner(alpha: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let pair = conjugate_order(alpha)?;
    let (a, b) = (pair.alpha(), pair.beta());
    // β - 1 = (1 - α)/(2α - 1) without cancellation
    let b_minus_one = if a.is_infinite() {
        -0.5
    } else {
        (1.0 - a) / (2.0 * a - 1.0)
    };
    let orders = log_ratio(a, a - 1.0) + log_ratio(b, b_minus_one);
    Ok(-0.5 * orders + PI.ln() - gamma.ln())
}

/// `γ` at which the Beckner bound for order `α` reaches zero:
/// `(π/α)(2α - 1)^((2α - 1)/(2(α - 1)))`, which is `eπ` at `α = 1` and
/// tends to `2π` as `α → ∞`.
pub fn beckner_threshold(alpha: f64) -> Result<f64> {
    let pair = conjugate_order(alpha)?;
    let a = pair.alpha();
    if a.is_infinite() {
        return Ok(2.0 * PI);
    }
    let x = a - 1.0;
    // ln(2α - 1)/(α - 1) → 2 as α → 1
    let log_ratio = if x == 0.0 { 2.0 } else { (2.0 * x).ln_1p() / x };
    Ok(PI / a * (0.5 * (2.0 * a - 1.0) * log_ratio).exp())
}

/// Which candidate a best-bound selector returned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Beckner,
    Concentration,
}

/// `-ln min{γ/(eπ), λ₀}`: best Shannon bound for the intra-bin refined
/// distributions.
pub fn best_bound_ab(gamma: f64, lambda0: f64) -> (f64, Branch) {
    let beckner = gamma / (E * PI);
    if beckner < lambda0 {
        (-beckner.ln(), Branch::Beckner)
    } else {
        (-lambda0.ln(), Branch::Concentration)
    }
}

/// `-ln min{γ/(eπ), (1 + sqrt(λ₀))²/4}`: best Shannon bound for the bin
/// masses.
pub fn best_bound_qp(gamma: f64, lambda0: f64) -> (f64, Branch) {
    let beckner = gamma / (E * PI);
    let single_bin = single_bin_bound(lambda0).product;
    if beckner < single_bin {
        (-beckner.ln(), Branch::Beckner)
    } else {
        (-single_bin.ln(), Branch::Concentration)
    }
}

/// Universal caps on a single position/momentum bin pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleBinBound {
    /// `q_k + p_l ≤ 1 + sqrt(λ₀)`.
    pub sum: f64,
    /// `q_k p_l ≤ (1 + sqrt(λ₀))²/4`.
    pub product: f64,
}

pub fn single_bin_bound(lambda0: f64) -> SingleBinBound {
    let sum = 1.0 + lambda0.sqrt();
    SingleBinBound {
        sum,
        product: 0.25 * sum * sum,
    }
}

/// Every bound at one `(γ, α)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub gamma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub lambda0: f64,
    pub c_max: f64,
    pub bound_mu: f64,
    pub bound_deutsch: f64,
    /// `None` when `γ` is at or above the threshold and the bound is void.
    pub bound_beckner: Option<f64>,
    pub bound_beckner_raw: f64,
    pub beckner_valid: bool,
    /// Largest valid bound for the refined distributions.
    pub best_ab: f64,
    /// Largest valid bound for the bin masses.
    pub best_qp: f64,
}

impl BoundReport {
    pub fn new(order: OrderPair, solution: &ConcentrationEigenSolution) -> Result<Self> {
        let gamma = solution.gamma;
        let lambda0 = solution.lambda0;
        let raw = bound_beckner(order.alpha(), gamma)?;
        let beckner_valid = gamma < beckner_threshold(order.alpha())?;
        let bound_beckner = beckner_valid.then_some(raw);
        let bound_mu = maassen_uffink_from_lambda0(lambda0);
        let bound_deutsch = deutsch_from_lambda0(lambda0);
        let best = |base: f64| bound_beckner.map_or(base, |b| b.max(base));
        Ok(BoundReport {
            gamma,
            alpha: order.alpha(),
            beta: order.beta(),
            lambda0,
            c_max: lambda0.sqrt(),
            bound_mu,
            bound_deutsch,
            bound_beckner,
            bound_beckner_raw: raw,
            beckner_valid,
            best_ab: best(bound_mu),
            best_qp: best(bound_deutsch),
        })
    }

    pub fn compute(gamma: f64, alpha: f64, node_count: usize) -> Result<Self> {
        check_gamma(gamma)?;
        let order = conjugate_order(alpha)?;
        BoundReport::new(order, &solve_concentration(gamma, node_count)?)
    }
}

/// Which pair of bounds a crossover separates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossoverKind {
    /// Beckner against `-ln λ₀`.
    Ab,
    /// Beckner against the single-bin bound.
    Qp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossover {
    pub kind: CrossoverKind,
    pub alpha: f64,
    pub gamma: f64,
    pub beckner: f64,
    pub concentration: f64,
    pub iterations: usize,
}

/// Locates the `γ` where the Beckner bound meets the concentration-based
/// bound by bisection inside `bracket`, to relative width `rel_tol`.
/// Returns `None` if the difference does not change sign on the bracket.
pub fn find_crossover(
    kind: CrossoverKind,
    alpha: f64,
    bracket: (f64, f64),
    rel_tol: f64,
    node_count: usize,
) -> Result<Option<Crossover>> {
    let (mut lo, mut hi) = bracket;
    check_gamma(lo)?;
    check_gamma(hi)?;
    if !(hi > lo) {
        return Err(invalid("bracket", "upper end must exceed lower end"));
    }
    let sides = |gamma: f64| -> Result<(f64, f64)> {
        let lambda0 = solve_concentration(gamma, node_count)?.lambda0;
        let other = match kind {
            CrossoverKind::Ab => maassen_uffink_from_lambda0(lambda0),
            CrossoverKind::Qp => deutsch_from_lambda0(lambda0),
        };
        Ok((bound_beckner(alpha, gamma)?, other))
    };
    let diff = |gamma: f64| sides(gamma).map(|(b, c)| b - c);
    let f_lo = diff(lo)?;
    if f_lo.signum() == diff(hi)?.signum() {
        return Ok(None);
    }
    let mut iterations = 0;
    while hi - lo > rel_tol * lo && iterations < 200 {
        let mid = 0.5 * (lo + hi);
        if diff(mid)?.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let gamma = 0.5 * (lo + hi);
    let (beckner, concentration) = sides(gamma)?;
    Ok(Some(Crossover {
        kind,
        alpha,
        gamma,
        beckner,
        concentration,
        iterations,
    }))
}
