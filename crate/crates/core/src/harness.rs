//! End-to-end checks: build a state, bin it in both spaces, compute the
//! entropies and compare them with every applicable bound.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    find_crossover, single_bin_bound, BoundReport, Crossover, CrossoverKind,
};
use crate::coarse::{
    distribution, joint_entropy_distribution, BinBasis, BinningScheme, FourierBinBasis,
    JointDistribution, LegendreBinBasis, ProbabilityDistribution, CAPTURED_MASS_THRESHOLD,
};
use crate::entropy::{conjugate_order, renyi_entropy, OrderPair};
use crate::error::{invalid, Result};
use crate::prolate::{solve_concentration, ConcentrationEigenSolution};
use crate::state::{fourier_transform, make_gaussian, make_random_state, GridSpec, GridState};

/// Slack below which an inequality counts as violated.
pub const SLACK_TOLERANCE: f64 = -1e-8;

/// A member of the test-state catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StateDescriptor {
    Gaussian {
        center: f64,
        momentum_shift: f64,
        width: f64,
    },
    /// Seeded superposition of coherent packets.
    Random { seed: u64, packets: usize },
}

impl StateDescriptor {
    pub fn build(&self, grid: GridSpec, hbar: f64) -> Result<GridState> {
        match *self {
            StateDescriptor::Gaussian {
                center,
                momentum_shift,
                width,
            } => make_gaussian(center, momentum_shift, width, grid, hbar),
            StateDescriptor::Random { seed, packets } => {
                make_random_state(seed, packets, grid, hbar)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisChoice {
    Fourier,
    Legendre,
}

impl BasisChoice {
    pub fn basis(self) -> &'static dyn BinBasis {
        match self {
            BasisChoice::Fourier => &FourierBinBasis,
            BasisChoice::Legendre => &LegendreBinBasis,
        }
    }
}

/// Numerical resolution shared by every case of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarnessConfig {
    /// Samples of the symmetric position/momentum grid.
    pub grid_count: usize,
    pub hbar: f64,
    pub node_count: usize,
    pub basis_size: usize,
    pub basis: BasisChoice,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            grid_count: 16384,
            hbar: 1.0,
            node_count: 64,
            basis_size: 32,
            basis: BasisChoice::Legendre,
        }
    }
}

impl HarnessConfig {
    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::symmetric(self.grid_count, self.hbar)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseInputs {
    pub state: StateDescriptor,
    pub scheme: BinningScheme,
    pub order: OrderPair,
    /// Also evaluate the intra-bin refined distributions.
    pub with_ab: bool,
}

/// Which pair of distributions an inequality is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Bin masses `q_k`, `p_l`.
    Qp,
    /// Refined distributions `|a_km|²`, `|b_ln|²`.
    Ab,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub name: String,
    pub family: Family,
    pub entropy_sum: f64,
    pub bound: f64,
    pub slack: f64,
    /// Diagnostic-only checks are reported but never fail a case.
    pub enforced: bool,
}

impl InequalityCheck {
    fn new(name: &str, family: Family, entropy_sum: f64, bound: f64, enforced: bool) -> Self {
        InequalityCheck {
            name: name.to_string(),
            family,
            entropy_sum,
            bound,
            slack: entropy_sum - bound,
            enforced,
        }
    }

    pub fn holds(&self) -> bool {
        !self.enforced || self.slack >= SLACK_TOLERANCE
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleBinCheck {
    /// `max_k q_k + max_l p_l`, the largest `q_k + p_l` over all pairs.
    pub max_sum: f64,
    /// `1 + sqrt(λ₀)`.
    pub bound: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinedEntropies {
    pub basis: BasisChoice,
    pub basis_size: usize,
    pub entropy_a: f64,
    pub entropy_b: f64,
    pub captured_a: f64,
    pub captured_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationCase {
    pub state: StateDescriptor,
    pub scheme: BinningScheme,
    pub gamma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub lambda0: f64,
    /// `H_α` of the position bin masses.
    pub entropy_q: f64,
    /// `H_β` of the momentum bin masses.
    pub entropy_p: f64,
    pub mass_q: f64,
    pub mass_p: f64,
    pub refined: Option<RefinedEntropies>,
    pub checks: Vec<InequalityCheck>,
    pub single_bin: SingleBinCheck,
    /// Every captured mass reached [`CAPTURED_MASS_THRESHOLD`].
    pub reliable: bool,
    /// Every enforced inequality holds within [`SLACK_TOLERANCE`].
    pub passed: bool,
}

impl VerificationCase {
    pub fn min_slack(&self) -> f64 {
        self.checks
            .iter()
            .filter(|c| c.enforced)
            .map(|c| c.slack)
            .chain(std::iter::once(self.single_bin.slack))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn check(&self, name: &str, family: Family) -> Option<&InequalityCheck> {
        self.checks.iter().find(|c| c.name == name && c.family == family)
    }
}

/// Runs one case, solving the concentration problem for its `γ`.
pub fn verify_state(config: &HarnessConfig, inputs: &CaseInputs) -> Result<VerificationCase> {
    let solution = solve_concentration(inputs.scheme.gamma(), config.node_count)?;
    verify_state_with(config, inputs, &solution)
}

/// [`verify_state`] with a precomputed eigen-solution for `inputs.scheme.gamma()`.
pub fn verify_state_with(
    config: &HarnessConfig,
    inputs: &CaseInputs,
    solution: &ConcentrationEigenSolution,
) -> Result<VerificationCase> {
    let scheme = &inputs.scheme;
    if (scheme.hbar - config.hbar).abs() > 1e-12 * config.hbar {
        return Err(invalid("scheme", "hbar differs from the harness grid"));
    }
    let psi = inputs.state.build(config.grid()?, config.hbar)?;
    let phi = fourier_transform(&psi)?;
    let q = distribution(&psi, scheme)?;
    let p = distribution(&phi, scheme)?;
    let refined = if inputs.with_ab {
        let basis = config.basis.basis();
        let joint = |state: &GridState, masses: &ProbabilityDistribution| {
            joint_entropy_distribution(
                state,
                scheme,
                config.basis_size,
                occupied_bins(masses),
                basis,
            )
        };
        Some((joint(&psi, &q)?, joint(&phi, &p)?))
    } else {
        None
    };
    evaluate_case(inputs, config, &q, &p, refined.as_ref(), solution)
}

/// Smallest contiguous label range holding every bin with non-negligible mass.
fn occupied_bins(dist: &ProbabilityDistribution) -> std::ops::RangeInclusive<i64> {
    let mut labels = dist.iter().filter(|&(_, w)| w > 1e-20).map(|(k, _)| k);
    let first = labels.next().unwrap_or(dist.offset());
    let last = labels.last().unwrap_or(first);
    first..=last
}

/// Compares given distributions with every bound. Separated from
/// [`verify_state`] so that arbitrary (including deliberately wrong)
/// distributions can be fed through the same checks.
pub fn evaluate_case(
    inputs: &CaseInputs,
    config: &HarnessConfig,
    q: &ProbabilityDistribution,
    p: &ProbabilityDistribution,
    refined: Option<&(JointDistribution, JointDistribution)>,
    solution: &ConcentrationEigenSolution,
) -> Result<VerificationCase> {
    let order = inputs.order;
    let report = BoundReport::new(order, solution)?;
    let entropy_q = renyi_entropy(q, order.alpha())?;
    let entropy_p = renyi_entropy(p, order.beta())?;
    let sum_qp = entropy_q + entropy_p;

    let mut checks = vec![
        InequalityCheck::new("single_bin", Family::Qp, sum_qp, report.bound_deutsch, true),
        InequalityCheck::new("best", Family::Qp, sum_qp, report.best_qp, true),
        // not claimed for bin masses; kept as a diagnostic
        InequalityCheck::new("concentration", Family::Qp, sum_qp, report.bound_mu, false),
    ];
    if let Some(beckner) = report.bound_beckner {
        checks.push(InequalityCheck::new("beckner", Family::Qp, sum_qp, beckner, true));
    }

    let mut reliable = q.total() >= CAPTURED_MASS_THRESHOLD && p.total() >= CAPTURED_MASS_THRESHOLD;
    let refined = match refined {
        Some((a, b)) => {
            let entropy_a = renyi_entropy(&a.distribution, order.alpha())?;
            let entropy_b = renyi_entropy(&b.distribution, order.beta())?;
            let sum_ab = entropy_a + entropy_b;
            checks.push(InequalityCheck::new("concentration", Family::Ab, sum_ab, report.bound_mu, true));
            checks.push(InequalityCheck::new("single_bin", Family::Ab, sum_ab, report.bound_deutsch, true));
            checks.push(InequalityCheck::new("best", Family::Ab, sum_ab, report.best_ab, true));
            if let Some(beckner) = report.bound_beckner {
                checks.push(InequalityCheck::new("beckner", Family::Ab, sum_ab, beckner, true));
            }
            reliable &= a.reliable && b.reliable;
            Some(RefinedEntropies {
                basis: config.basis,
                basis_size: a.basis_size,
                entropy_a,
                entropy_b,
                captured_a: a.captured_mass,
                captured_b: b.captured_mass,
            })
        }
        None => None,
    };

    let bound = single_bin_bound(solution.lambda0).sum;
    let max_sum = q.max_weight() + p.max_weight();
    let single_bin = SingleBinCheck {
        max_sum,
        bound,
        slack: bound - max_sum,
    };
    let passed = checks.iter().all(InequalityCheck::holds) && single_bin.slack >= SLACK_TOLERANCE;

    Ok(VerificationCase {
        state: inputs.state.clone(),
        scheme: inputs.scheme,
        gamma: inputs.scheme.gamma(),
        alpha: order.alpha(),
        beta: order.beta(),
        lambda0: solution.lambda0,
        entropy_q,
        entropy_p,
        mass_q: q.total(),
        mass_p: p.total(),
        refined,
        checks,
        single_bin,
        reliable,
        passed,
    })
}

/// Gaussians with widths {1/4, 1/2, 1, 2, 4}, centers {0, 0.3δx} and
/// momentum shifts {0, 0.7δp}, plus four seeded random superpositions.
pub fn catalog(scheme: &BinningScheme) -> Vec<StateDescriptor> {
    let mut states = Vec::new();
    for width in [0.25, 0.5, 1.0, 2.0, 4.0] {
        for center in [0.0, 0.3 * scheme.delta_x] {
            for momentum_shift in [0.0, 0.7 * scheme.delta_p] {
                states.push(StateDescriptor::Gaussian {
                    center,
                    momentum_shift,
                    width,
                });
            }
        }
    }
    states.extend((1..=4).map(|seed| StateDescriptor::Random { seed, packets: 3 }));
    states
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogReport {
    pub cases: Vec<VerificationCase>,
    pub min_slack: f64,
    pub all_passed: bool,
    pub all_reliable: bool,
}

/// Verifies the whole catalog for every `(γ, α)` with `δx = δp = sqrt(γħ)`.
/// The refined distributions are included for the `γ` values listed in
/// `ab_gammas`. Cases run in parallel; the output order is fixed by
/// `(γ, α, state)`.
pub fn run_catalog(
    config: &HarnessConfig,
    gammas: &[f64],
    alphas: &[f64],
    ab_gammas: &[f64],
) -> Result<CatalogReport> {
    let orders = alphas
        .iter()
        .map(|&a| conjugate_order(a))
        .collect::<Result<Vec<_>>>()?;
    let solutions = gammas
        .par_iter()
        .map(|&g| solve_concentration(g, config.node_count))
        .collect::<Result<Vec<_>>>()?;
    let mut jobs = Vec::new();
    for (gamma, solution) in gammas.iter().zip(&solutions) {
        let scheme = BinningScheme::symmetric(*gamma, config.hbar)?;
        let with_ab = ab_gammas.iter().any(|g| (g - gamma).abs() <= 1e-12 * gamma);
        for order in &orders {
            for state in catalog(&scheme) {
                jobs.push((
                    CaseInputs {
                        state,
                        scheme,
                        order: *order,
                        with_ab,
                    },
                    solution,
                ));
            }
        }
    }
    let cases = jobs
        .par_iter()
        .map(|(inputs, solution)| verify_state_with(config, inputs, solution))
        .collect::<Result<Vec<_>>>()?;
    let min_slack = cases.iter().map(VerificationCase::min_slack).fold(f64::INFINITY, f64::min);
    Ok(CatalogReport {
        all_passed: cases.iter().all(|c| c.passed),
        all_reliable: cases.iter().all(|c| c.reliable),
        min_slack,
        cases,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<BoundReport>,
    pub crossovers: Vec<Crossover>,
}

/// One [`BoundReport`] per `(γ, α)` (γ-major), plus for every order the
/// crossovers between the Beckner bound and the two concentration-based
/// bounds, located by bisection to `rel_tol` inside the first pair of
/// adjacent grid points where the difference changes sign.
pub fn sweep_bounds(
    gamma_grid: &[f64],
    alpha_list: &[f64],
    node_count: usize,
    rel_tol: f64,
) -> Result<SweepReport> {
    if gamma_grid.is_empty() || alpha_list.is_empty() {
        return Err(invalid("grid", "gamma and alpha lists must be nonempty"));
    }
    let orders = alpha_list
        .iter()
        .map(|&a| conjugate_order(a))
        .collect::<Result<Vec<_>>>()?;
    let solutions = gamma_grid
        .par_iter()
        .map(|&g| solve_concentration(g, node_count))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(solutions.len() * orders.len());
    for solution in &solutions {
        for order in &orders {
            rows.push(BoundReport::new(*order, solution)?);
        }
    }

    let mut sorted: Vec<f64> = gamma_grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let mut crossovers = Vec::new();
    for order in &orders {
        for kind in [CrossoverKind::Ab, CrossoverKind::Qp] {
            let diff = |gamma: f64| -> Result<f64> {
                let row = rows
                    .iter()
                    .find(|r| r.gamma == gamma && r.alpha == order.alpha())
                    .expect("row for every grid point");
                let other = match kind {
                    CrossoverKind::Ab => row.bound_mu,
                    CrossoverKind::Qp => row.bound_deutsch,
                };
                Ok(row.bound_beckner_raw - other)
            };
            for pair in sorted.windows(2) {
                if diff(pair[0])?.signum() != diff(pair[1])?.signum() {
                    if let Some(c) =
                        find_crossover(kind, order.alpha(), (pair[0], pair[1]), rel_tol, node_count)?
                    {
                        crossovers.push(c);
                    }
                    break;
                }
            }
        }
    }
    Ok(SweepReport { rows, crossovers })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthScanRow {
    pub width: f64,
    pub entropy_q: f64,
    pub entropy_p: f64,
    pub entropy_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthScan {
    pub gamma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub rows: Vec<WidthScanRow>,
    pub min_entropy_sum: f64,
    pub argmin_width: f64,
    /// Largest valid bound for the bin masses at this `(γ, α)`.
    pub best_bound: f64,
    /// `min_entropy_sum - best_bound`.
    pub gap: f64,
    pub holds: bool,
}

/// Entropy sums of centered Gaussians of the given widths, binned with
/// `δx = δp = sqrt(γħ)`.
pub fn width_scan(
    config: &HarnessConfig,
    gamma: f64,
    widths: &[f64],
    order: OrderPair,
) -> Result<WidthScan> {
    if widths.is_empty() {
        return Err(invalid("widths", "must be nonempty"));
    }
    if let Some(w) = widths.iter().find(|w| !(**w > 0.0)) {
        return Err(invalid("widths", format!("must be positive, got {w}")));
    }
    let scheme = BinningScheme::symmetric(gamma, config.hbar)?;
    let solution = solve_concentration(gamma, config.node_count)?;
    let report = BoundReport::new(order, &solution)?;
    let grid = config.grid()?;
    let rows = widths
        .par_iter()
        .map(|&width| {
            let psi = make_gaussian(0.0, 0.0, width, grid, config.hbar)?;
            let phi = fourier_transform(&psi)?;
            let entropy_q = renyi_entropy(&distribution(&psi, &scheme)?, order.alpha())?;
            let entropy_p = renyi_entropy(&distribution(&phi, &scheme)?, order.beta())?;
            Ok(WidthScanRow {
                width,
                entropy_q,
                entropy_p,
                entropy_sum: entropy_q + entropy_p,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = rows
        .iter()
        .min_by(|a, b| a.entropy_sum.total_cmp(&b.entropy_sum))
        .expect("nonempty");
    let gap = best.entropy_sum - report.best_qp;
    Ok(WidthScan {
        gamma,
        alpha: order.alpha(),
        beta: order.beta(),
        min_entropy_sum: best.entropy_sum,
        argmin_width: best.width,
        best_bound: report.best_qp,
        gap,
        holds: gap >= SLACK_TOLERANCE,
        rows,
    })
}

/// Widths `ħ·2^(j/4)` for `j` in `-steps..=steps`, symmetric under `w → ħ/w`.
pub fn log_widths(hbar: f64, steps: i32) -> Vec<f64> {
    (-steps..=steps).map(|j| hbar.sqrt() * 2f64.powf(j as f64 / 4.0)).collect()
}

/// `ln(eπ/γ)`, the Shannon Beckner bound, exposed for scan comparisons.
pub fn shannon_beckner(gamma: f64) -> f64 {
    1.0 + PI.ln() - gamma.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> HarnessConfig {
        HarnessConfig {
            grid_count: 4096,
            ..HarnessConfig::default()
        }
    }

    #[test]
    fn catalog_has_twenty_four_states() {
        let scheme = BinningScheme::symmetric(1.0, 1.0).unwrap();
        let states = catalog(&scheme);
        assert_eq!(states.len(), 24);
        assert!(states.contains(&StateDescriptor::Gaussian {
            center: 0.3,
            momentum_shift: 0.7,
            width: 2.0
        }));
    }

    #[test]
    fn gaussian_at_gamma_one_satisfies_everything() {
        let config = small_config();
        let inputs = CaseInputs {
            state: StateDescriptor::Gaussian {
                center: 0.0,
                momentum_shift: 0.0,
                width: 1.0,
            },
            scheme: BinningScheme::symmetric(1.0, 1.0).unwrap(),
            order: OrderPair::shannon(),
            with_ab: true,
        };
        let case = verify_state(&config, &inputs).unwrap();
        assert!(case.passed, "{case:#?}");
        assert!(case.reliable);
        assert!(case.checks.iter().filter(|c| c.enforced).all(|c| c.slack >= 0.0));
        let refined = case.refined.unwrap();
        assert!(refined.entropy_a >= case.entropy_q - 1e-9);
        assert!(refined.entropy_b >= case.entropy_p - 1e-9);
    }

    #[test]
    fn point_mass_distributions_fail() {
        let config = small_config();
        let scheme = BinningScheme::symmetric(1.0, 1.0).unwrap();
        let inputs = CaseInputs {
            state: StateDescriptor::Random { seed: 0, packets: 1 },
            scheme,
            order: OrderPair::shannon(),
            with_ab: false,
        };
        let solution = solve_concentration(1.0, 64).unwrap();
        let point = ProbabilityDistribution::point_mass(0);
        let case = evaluate_case(&inputs, &config, &point, &point, None, &solution).unwrap();
        assert!(!case.passed);
        assert!(case.single_bin.slack < 0.0);
        assert!(case.min_slack() < SLACK_TOLERANCE);
    }

    #[test]
    fn mismatched_hbar_rejected() {
        let config = small_config();
        let inputs = CaseInputs {
            state: StateDescriptor::Random { seed: 0, packets: 1 },
            scheme: BinningScheme::symmetric(1.0, 2.0).unwrap(),
            order: OrderPair::shannon(),
            with_ab: false,
        };
        assert!(verify_state(&config, &inputs).is_err());
    }

    #[test]
    fn log_widths_are_reciprocal() {
        let w = log_widths(1.0, 4);
        assert_eq!(w.len(), 9);
        for (a, b) in w.iter().zip(w.iter().rev()) {
            assert!((a * b - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn sweep_rejects_empty_grid() {
        assert!(sweep_bounds(&[], &[1.0], 64, 1e-6).is_err());
        assert!(sweep_bounds(&[1.0], &[0.5], 64, 1e-6).is_err());
    }
}
