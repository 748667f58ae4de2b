//! The concentration eigenproblem behind `C_max`.
//!
//! A momentum-space function supported on one bin of width `δp` can put at
//! most a fraction `λ₀` of its position-space mass into one bin of width
//! `δx`. After scaling both bins onto `[-1, 1]`, `λ₀` is the largest
//! eigenvalue of
//!
//! ```text
//! (1/π) ∫_{-1}^{1} ds  sin(γ(t - s)/4)/(t - s) · Ψ(s) = λ Ψ(t),   γ = δx·δp/ħ
//! ```
//!
//! which is solved here by the Nyström method on Gauss–Legendre nodes. The
//! quadratic form of the same kernel (the concentration functional `W[Ψ]`)
//! is bounded by `λ₀` over normalized `Ψ`, and `C_max = sqrt(λ₀)` bounds
//! every entry of the overlap tensor.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::quad::QuadratureRule;

/// Node count used when the caller has no preference; converged to 1e-10
/// for `γ ≤ 50`.
pub const DEFAULT_NODES: usize = 64;

/// Smallest accepted node count.
pub const MIN_NODES: usize = 16;

/// A solution whose eigenvalue moved more than this between `N/2` and `N`
/// nodes is flagged as not converged.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-8;

/// Maximum number of eigenvalues kept in [`ConcentrationEigenSolution::spectrum_head`].
pub const SPECTRUM_HEAD_LEN: usize = 8;

/// Kernel `(1/π) sin(γ(t - s)/4)/(t - s)`, equal to `γ/(4π)` on the diagonal.
pub fn sinc_kernel(gamma: f64, t: f64, s: f64) -> f64 {
    let d = t - s;
    let x = 0.25 * gamma * d;
    if x.abs() < 1e-4 {
        0.25 * gamma / PI * (1.0 - x * x / 6.0)
    } else {
        x.sin() / (PI * d)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationEigenSolution {
    pub gamma: f64,
    pub rule: QuadratureRule,
    /// Largest eigenvalue, strictly inside `(0, 1)`.
    pub lambda0: f64,
    /// Top eigenfunction at the nodes, `Σ w_i v_i² = 1`, positive at `t = 0`.
    pub eigenvector: Vec<f64>,
    /// Leading eigenvalues in descending order, cut at the rounding floor.
    pub spectrum_head: Vec<f64>,
    /// `|λ₀(N) - λ₀(N/2)|`.
    pub convergence_delta: f64,
    pub converged: bool,
}

impl ConcentrationEigenSolution {
    pub fn c_max(&self) -> f64 {
        self.lambda0.sqrt()
    }

    /// Nyström extension of the top eigenfunction to an arbitrary `t`.
    pub fn eigenfunction(&self, t: f64) -> f64 {
        nystrom_extension(&self.rule, &self.eigenvector, self.gamma, self.lambda0, t)
    }
}

fn nystrom_extension(rule: &QuadratureRule, v: &[f64], gamma: f64, lambda: f64, t: f64) -> f64 {
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .zip(v)
        .map(|((&s, &w), &vi)| w * sinc_kernel(gamma, t, s) * vi)
        .sum::<f64>()
        / lambda
}

struct Spectrum {
    rule: QuadratureRule,
    values: Vec<f64>,
    top: Vec<f64>,
}

/// Symmetrized Nyström matrix `D^(1/2) K D^(1/2)` and its eigen-decomposition.
fn nystrom_spectrum(gamma: f64, nodes: usize) -> Result<Spectrum> {
    let rule = QuadratureRule::gauss_legendre(nodes)?;
    let sqrt_w: Vec<f64> = rule.weights.iter().map(|w| w.sqrt()).collect();
    let matrix = DMatrix::from_fn(nodes, nodes, |i, j| {
        sqrt_w[i] * sinc_kernel(gamma, rule.nodes[i], rule.nodes[j]) * sqrt_w[j]
    });
    let eigen = SymmetricEigen::new(matrix);
    let mut order: Vec<usize> = (0..nodes).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[b].total_cmp(&eigen.eigenvalues[a]));
    let values: Vec<f64> = order.iter().map(|&i| eigen.eigenvalues[i]).collect();
    let top = eigen
        .eigenvectors
        .column(order[0])
        .iter()
        .zip(&sqrt_w)
        .map(|(y, sw)| y / sw)
        .collect();
    Ok(Spectrum { rule, values, top })
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(invalid("gamma", format!("must be positive and finite, got {gamma}")));
    }
    Ok(())
}

/// Solves the concentration eigenproblem with `node_count` Gauss–Legendre
/// nodes and re-solves with half as many to estimate the discretization error.
pub fn solve_concentration(gamma: f64, node_count: usize) -> Result<ConcentrationEigenSolution> {
    check_gamma(gamma)?;
    if node_count < MIN_NODES {
        return Err(invalid(
            "node_count",
            format!("need at least {MIN_NODES} nodes, got {node_count}"),
        ));
    }
    let full = nystrom_spectrum(gamma, node_count)?;
    let half = nystrom_spectrum(gamma, node_count / 2)?;
    let raw = full.values[0];
    let convergence_delta = (raw - half.values[0]).abs();

    // True λ₀ is below one for every finite γ; within an ulp of one the
    // closest representable value below one is reported.
    let below_one = 1.0 - f64::EPSILON / 2.0;
    let lambda0 = raw.min(below_one);

    let floor = 100.0 * node_count as f64 * f64::EPSILON * raw.abs();
    let spectrum_head = full
        .values
        .iter()
        .take(SPECTRUM_HEAD_LEN)
        .take_while(|&&v| v > floor)
        .map(|&v| v.min(below_one))
        .collect();

    let mut eigenvector = full.top;
    if nystrom_extension(&full.rule, &eigenvector, gamma, raw, 0.0) < 0.0 {
        eigenvector.iter_mut().for_each(|v| *v = -*v);
    }

    Ok(ConcentrationEigenSolution {
        gamma,
        rule: full.rule,
        lambda0,
        eigenvector,
        spectrum_head,
        convergence_delta,
        converged: convergence_delta <= CONVERGENCE_TOLERANCE,
    })
}

/// `C_max(γ) = sqrt(λ₀(γ))`.
pub fn c_max(gamma: f64, node_count: usize) -> Result<f64> {
    Ok(solve_concentration(gamma, node_count)?.c_max())
}

/// Allowed deviation of `Σ w_i |ψ_i|²` from one.
pub const TRIAL_NORM_TOLERANCE: f64 = 1e-9;

fn check_trial(rule: &QuadratureRule, psi: &[Complex64]) -> Result<()> {
    if psi.len() != rule.len() {
        return Err(invalid(
            "psi",
            format!("{} samples for {} nodes", psi.len(), rule.len()),
        ));
    }
    let norm: f64 = rule.weights.iter().zip(psi).map(|(w, p)| w * p.norm_sqr()).sum();
    if (norm - 1.0).abs() > TRIAL_NORM_TOLERANCE {
        return Err(Error::NotNormalized { norm });
    }
    Ok(())
}

/// `W[Ψ] = Σ_ij w_i w_j K(t_i, t_j) Ψ_i Ψ*_j` for a trial function sampled at
/// the rule's nodes and normalized as `Σ w_i |Ψ_i|² = 1`.
pub fn concentration_functional(rule: &QuadratureRule, psi: &[Complex64], gamma: f64) -> Result<f64> {
    concentration_functional_in_bin(rule, psi, gamma, 0)
}

/// The functional for position bin `k`, whose kernel carries the extra phase
/// `exp(i k γ (t - s)/2)`. Equals the bin-0 functional of
/// `exp(i k γ t/2) Ψ(t)`, which is how the bin labels drop out of `C_max`.
pub fn concentration_functional_in_bin(
    rule: &QuadratureRule,
    psi: &[Complex64],
    gamma: f64,
    position_bin: i64,
) -> Result<f64> {
    check_gamma(gamma)?;
    check_trial(rule, psi)?;
    let shift = 0.5 * position_bin as f64 * gamma;
    let mut total = Complex64::new(0.0, 0.0);
    for (i, (&t, &wi)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        let mut row = Complex64::new(0.0, 0.0);
        for (j, (&s, &wj)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
            let phase = Complex64::cis(shift * (t - s));
            row += phase * (wj * sinc_kernel(gamma, t, s)) * psi[j].conj();
        }
        total += wi * psi[i] * row;
    }
    debug_assert!(total.im.abs() <= 1e-10 * total.re.abs().max(1.0));
    Ok(total.re)
}
