//! Binning of position and momentum space.
//!
//! Bin `j` of width `δ` covers `[(j - 1/2)δ, (j + 1/2)δ]` (shifted by an
//! optional global offset). A state yields bin masses `q_k` in position and
//! `p_l` in momentum, and, once an orthonormal basis is fixed inside every
//! bin, the finer coefficients `a_km`, `b_ln` whose squared moduli refine
//! those masses. The overlap tensor `U_kmln` links the two families.

use std::f64::consts::PI;
use std::ops::RangeInclusive;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quad::{Interpolant, QuadratureRule};
use crate::state::{GridSpec, GridState, Space};

/// Negative bin weights above this are quadrature noise and clamped to zero.
pub const NEGATIVE_WEIGHT_FLOOR: f64 = -1e-12;

/// Allowed deviation of a distribution's total from 1.
pub const TOTAL_TOLERANCE: f64 = 1e-9;

/// Captured mass below which a truncated distribution is flagged unreliable.
pub const CAPTURED_MASS_THRESHOLD: f64 = 0.999;

/// Bin widths in position and momentum space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinningScheme {
    pub delta_x: f64,
    pub delta_p: f64,
    pub hbar: f64,
    /// Global shift of every bin center, position then momentum. Zero puts
    /// bin centers on integer multiples of the width.
    pub offset: [f64; 2],
}

impl BinningScheme {
    pub fn new(delta_x: f64, delta_p: f64, hbar: f64) -> Result<Self> {
        for (name, value) in [("delta_x", delta_x), ("delta_p", delta_p), ("hbar", hbar)] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(invalid(name, format!("must be positive and finite, got {value}")));
            }
        }
        Ok(BinningScheme {
            delta_x,
            delta_p,
            hbar,
            offset: [0.0, 0.0],
        })
    }

    /// Equal widths `δx = δp = sqrt(γħ)`.
    pub fn symmetric(gamma: f64, hbar: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(invalid("gamma", format!("must be positive, got {gamma}")));
        }
        let width = (gamma * hbar).sqrt();
        BinningScheme::new(width, width, hbar)
    }

    pub fn with_offset(mut self, position: f64, momentum: f64) -> Self {
        self.offset = [position, momentum];
        self
    }

    /// `γ = δx·δp/ħ`.
    pub fn gamma(&self) -> f64 {
        self.delta_x * self.delta_p / self.hbar
    }

    pub fn width(&self, space: Space) -> f64 {
        match space {
            Space::Position => self.delta_x,
            Space::Momentum => self.delta_p,
        }
    }

    pub fn offset(&self, space: Space) -> f64 {
        match space {
            Space::Position => self.offset[0],
            Space::Momentum => self.offset[1],
        }
    }

    pub fn layout(&self, space: Space) -> BinLayout {
        BinLayout {
            width: self.width(space),
            offset: self.offset(space),
        }
    }
}

/// Uniform tiling of one axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinLayout {
    pub width: f64,
    pub offset: f64,
}

impl BinLayout {
    pub fn new(width: f64) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(invalid("bin_width", format!("must be positive, got {width}")));
        }
        Ok(BinLayout { width, offset: 0.0 })
    }

    pub fn center(&self, j: i64) -> f64 {
        j as f64 * self.width + self.offset
    }

    /// `[(j - 1/2)δ, (j + 1/2)δ]` plus offset.
    pub fn edges(&self, j: i64) -> (f64, f64) {
        let c = self.center(j);
        (c - 0.5 * self.width, c + 0.5 * self.width)
    }

    /// Index of the bin containing `s`; points on a shared edge go right.
    pub fn index_of(&self, s: f64) -> i64 {
        ((s - self.offset) / self.width + 0.5).floor() as i64
    }

    /// Every bin that intersects the sampled range of `grid`.
    pub fn covering(&self, grid: &GridSpec) -> RangeInclusive<i64> {
        self.index_of(grid.first())..=self.index_of(grid.last())
    }
}

/// Nonnegative weights attached to consecutive integer labels starting at
/// `offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityDistribution {
    offset: i64,
    weights: Vec<f64>,
}

impl ProbabilityDistribution {
    /// Validated distribution: weights are clamped at the noise floor and must
    /// sum to one within [`TOTAL_TOLERANCE`].
    pub fn new(offset: i64, weights: Vec<f64>) -> Result<Self> {
        let dist = ProbabilityDistribution::sub_normalized(offset, weights)?;
        let sum = dist.total();
        if (sum - 1.0).abs() > TOTAL_TOLERANCE {
            return Err(Error::BadTotal { sum });
        }
        Ok(dist)
    }

    /// A truncated distribution whose total may fall short of one (but not
    /// exceed it), as produced by cutting an infinite family of outcomes.
    pub fn sub_normalized(offset: i64, mut weights: Vec<f64>) -> Result<Self> {
        for (index, w) in weights.iter_mut().enumerate() {
            if !w.is_finite() || *w < NEGATIVE_WEIGHT_FLOOR {
                return Err(Error::NegativeWeight { index, value: *w });
            }
            *w = w.max(0.0);
        }
        let sum: f64 = weights.iter().sum();
        if sum > 1.0 + TOTAL_TOLERANCE {
            return Err(Error::BadTotal { sum });
        }
        if sum <= 0.0 {
            return Err(Error::EmptyDistribution);
        }
        Ok(ProbabilityDistribution { offset, weights })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyDistribution);
        }
        ProbabilityDistribution::new(0, vec![1.0 / n as f64; n])
    }

    pub fn point_mass(index: i64) -> Self {
        ProbabilityDistribution {
            offset: index,
            weights: vec![1.0],
        }
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Weight at label `index`; zero outside the stored range.
    pub fn get(&self, index: i64) -> f64 {
        usize::try_from(index - self.offset)
            .ok()
            .and_then(|i| self.weights.get(i).copied())
            .unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .map(move |(i, &w)| (self.offset + i as i64, w))
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    /// Joint distribution of two independent outcomes, flattened row-major.
    pub fn product(&self, other: &ProbabilityDistribution) -> ProbabilityDistribution {
        let weights = self
            .weights
            .iter()
            .flat_map(|a| other.weights.iter().map(move |b| a * b))
            .collect();
        ProbabilityDistribution { offset: 0, weights }
    }
}

/// Bin masses `∫ χ_j(s)|ψ(s)|² ds` for bins of width `bin_width` centered on
/// integer multiples of the width.
pub fn coarse_grain(state: &GridState, bin_width: f64) -> Result<ProbabilityDistribution> {
    coarse_grain_layout(state, BinLayout::new(bin_width)?)
}

/// Bin masses of `state` in its own space under `scheme`.
pub fn distribution(state: &GridState, scheme: &BinningScheme) -> Result<ProbabilityDistribution> {
    coarse_grain_layout(state, scheme.layout(state.space()))
}

/// Bin masses with an arbitrary layout. Each bin integral uses a degree-11
/// piecewise interpolant of `|ψ|²` built from the samples inside that bin.
pub fn coarse_grain_layout(state: &GridState, layout: BinLayout) -> Result<ProbabilityDistribution> {
    let grid = state.grid();
    let per_bin = layout.width / grid.step;
    if per_bin < 2.0 {
        return Err(Error::InsufficientSamples {
            available: per_bin.floor() as usize,
            required: 2,
        });
    }
    let density = state.density();
    let bins = layout.covering(grid);
    let first = *bins.start();
    let weights = bins
        .map(|j| {
            let (a, b) = layout.edges(j);
            match Interpolant::on_interval(grid.origin, grid.step, &density, a, b) {
                Ok(interp) => Ok(interp.integral()),
                // sliver of an edge bin overlapping the grid by under two samples
                Err(Error::InsufficientSamples { .. }) => Ok(sliver_mass(grid, &density, a, b)),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    ProbabilityDistribution::new(first, weights)
}

fn sliver_mass(grid: &GridSpec, density: &[f64], a: f64, b: f64) -> f64 {
    let lo = a.max(grid.first());
    let hi = b.min(grid.last() + 0.5 * grid.step);
    if hi <= lo {
        return 0.0;
    }
    let i = (((lo + hi) * 0.5 - grid.origin) / grid.step).round() as usize;
    density.get(i).copied().unwrap_or(0.0) * (hi - lo)
}

/// An orthonormal basis of square-integrable functions on a single bin.
pub trait BinBasis: Send + Sync {
    fn name(&self) -> &'static str;

    /// Value at `s` of basis function number `ordinal` for the bin with the
    /// given center and width. Callers only evaluate inside the bin.
    fn value(&self, ordinal: usize, center: f64, width: f64, s: f64) -> Complex64;
}

/// Plane waves `δ^(-1/2) exp(2πi m (s - c)/δ)` on the bin centered at `c`.
/// Ordinals enumerate frequencies as `0, 1, -1, 2, -2, …`.
#[derive(Debug, Clone, Copy, Default)]
pub struct FourierBinBasis;

/// Frequency `m` of the `ordinal`-th Fourier basis function.
pub fn fourier_frequency(ordinal: usize) -> i64 {
    let half = ordinal.div_ceil(2) as i64;
    if ordinal % 2 == 1 {
        half
    } else {
        -half
    }
}

impl BinBasis for FourierBinBasis {
    fn name(&self) -> &'static str {
        "fourier"
    }

    fn value(&self, ordinal: usize, center: f64, width: f64, s: f64) -> Complex64 {
        let m = fourier_frequency(ordinal) as f64;
        Complex64::cis(2.0 * PI * m * (s - center) / width) / width.sqrt()
    }
}

/// Normalized Legendre polynomials `sqrt((2n+1)/δ) P_n(2(s - c)/δ)`.
///
/// Coefficients of smooth states decay faster than in the Fourier basis,
/// whose periodic extension is generally discontinuous at the bin edges.
#[derive(Debug, Clone, Copy, Default)]
pub struct LegendreBinBasis;

impl BinBasis for LegendreBinBasis {
    fn name(&self) -> &'static str {
        "legendre"
    }

    fn value(&self, ordinal: usize, center: f64, width: f64, s: f64) -> Complex64 {
        let t = 2.0 * (s - center) / width;
        let (mut prev, mut cur) = (1.0, t);
        let p = match ordinal {
            0 => 1.0,
            _ => {
                for n in 1..ordinal {
                    let n = n as f64;
                    let next = ((2.0 * n + 1.0) * t * cur - n * prev) / (n + 1.0);
                    prev = cur;
                    cur = next;
                }
                cur
            }
        };
        Complex64::new(p * ((2 * ordinal + 1) as f64 / width).sqrt(), 0.0)
    }
}

/// `φ_km(s) = δ^(-1/2) exp(2πi m (s - kδ)/δ)` on bin `k`, zero elsewhere.
pub fn bin_fourier_basis(bin_index: i64, m: i64, bin_width: f64) -> impl Fn(f64) -> Complex64 {
    let layout = BinLayout {
        width: bin_width,
        offset: 0.0,
    };
    let (a, b) = layout.edges(bin_index);
    let center = layout.center(bin_index);
    move |s| {
        if s < a || s > b {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::cis(2.0 * PI * m as f64 * (s - center) / bin_width) / bin_width.sqrt()
        }
    }
}

/// Coefficients of `χ_k ψ` in an intra-bin basis.
#[derive(Debug, Clone, PartialEq)]
pub struct BinCoefficients {
    pub bin_index: i64,
    pub coefficients: Vec<Complex64>,
    pub basis_size: usize,
}

impl BinCoefficients {
    /// `Σ_m |c_m|²`; bounded by the bin mass and converging to it.
    pub fn captured(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }
}

fn coefficient_rule(basis_size: usize) -> Result<QuadratureRule> {
    QuadratureRule::gauss_legendre((2 * basis_size + 32).max(64))
}

/// `c_m = ∫ χ_k ψ φ*_km` in the Fourier basis of the state's space.
pub fn bin_coefficients(
    state: &GridState,
    scheme: &BinningScheme,
    bin_index: i64,
    basis_size: usize,
) -> Result<BinCoefficients> {
    bin_coefficients_with(state, scheme, bin_index, basis_size, &FourierBinBasis)
}

pub fn bin_coefficients_with(
    state: &GridState,
    scheme: &BinningScheme,
    bin_index: i64,
    basis_size: usize,
    basis: &dyn BinBasis,
) -> Result<BinCoefficients> {
    if basis_size == 0 {
        return Err(invalid("basis_size", "must be at least 1"));
    }
    let rule = coefficient_rule(basis_size)?;
    coefficients_in_bin(state, scheme.layout(state.space()), bin_index, basis_size, basis, &rule)
}

/// Gauss–Legendre quadrature over the bin of the grid interpolant of `ψ`
/// (built from in-bin samples only) against each basis function.
fn coefficients_in_bin(
    state: &GridState,
    layout: BinLayout,
    bin_index: i64,
    basis_size: usize,
    basis: &dyn BinBasis,
    rule: &QuadratureRule,
) -> Result<BinCoefficients> {
    let grid = state.grid();
    if layout.width / grid.step < 2.0 {
        return Err(Error::InsufficientSamples {
            available: (layout.width / grid.step).floor() as usize,
            required: 2,
        });
    }
    let (a, b) = layout.edges(bin_index);
    let center = layout.center(bin_index);
    let samples = state.amplitudes();
    let zero = Complex64::new(0.0, 0.0);
    let interp = match Interpolant::on_interval(grid.origin, grid.step, samples, a, b) {
        Ok(interp) => Some(interp),
        // bin off the grid, or a sliver of one at the edge: ψ is taken as zero
        Err(Error::InsufficientSamples { .. }) => None,
        Err(e) => return Err(e),
    };
    let Some(interp) = interp else {
        return Ok(BinCoefficients {
            bin_index,
            coefficients: vec![zero; basis_size],
            basis_size,
        });
    };
    let (lo, hi) = interp.interval();
    let (nodes, weights) = rule.mapped(a, b);
    let psi: Vec<Complex64> = nodes
        .iter()
        .zip(&weights)
        .map(|(&s, &w)| {
            if s < lo || s > hi {
                zero
            } else {
                interp.eval(s) * w
            }
        })
        .collect();
    let coefficients = (0..basis_size)
        .map(|m| {
            nodes
                .iter()
                .zip(&psi)
                .map(|(&s, f)| f * basis.value(m, center, layout.width, s).conj())
                .sum()
        })
        .collect();
    Ok(BinCoefficients {
        bin_index,
        coefficients,
        basis_size,
    })
}

/// Flattened `|c_km|²` over a range of bins, with truncation diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    /// Weights indexed by `(k - first_bin)·basis_size + m`; not renormalized.
    pub distribution: ProbabilityDistribution,
    pub bins: RangeInclusive<i64>,
    pub basis_size: usize,
    /// `Σ_{k,m} |c_km|²`, at most one.
    pub captured_mass: f64,
    /// `captured_mass >= CAPTURED_MASS_THRESHOLD`.
    pub reliable: bool,
}

/// The distribution `{|a_km|²}` (position state) or `{|b_ln|²}` (momentum
/// state) over `bin_range` and the first `basis_size` basis functions.
pub fn joint_entropy_distribution(
    state: &GridState,
    scheme: &BinningScheme,
    basis_size: usize,
    bin_range: RangeInclusive<i64>,
    basis: &dyn BinBasis,
) -> Result<JointDistribution> {
    if basis_size == 0 {
        return Err(invalid("basis_size", "must be at least 1"));
    }
    if bin_range.is_empty() {
        return Err(invalid("bin_range", "must be nonempty"));
    }
    let layout = scheme.layout(state.space());
    let rule = coefficient_rule(basis_size)?;
    let bins: Vec<i64> = bin_range.clone().collect();
    let per_bin = bins
        .par_iter()
        .map(|&k| coefficients_in_bin(state, layout, k, basis_size, basis, &rule))
        .collect::<Result<Vec<_>>>()?;
    let weights: Vec<f64> = per_bin
        .iter()
        .flat_map(|c| c.coefficients.iter().map(|a| a.norm_sqr()))
        .collect();
    let distribution = ProbabilityDistribution::sub_normalized(0, weights)?;
    let captured_mass = distribution.total();
    Ok(JointDistribution {
        distribution,
        bins: bin_range,
        basis_size,
        captured_mass,
        reliable: captured_mass >= CAPTURED_MASS_THRESHOLD,
    })
}

/// Truncated overlap tensor `U[k,m,l,n]` between position and momentum
/// intra-bin bases.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapTensor {
    pub position_bins: RangeInclusive<i64>,
    pub momentum_bins: RangeInclusive<i64>,
    pub basis_size: usize,
    entries: Vec<Complex64>,
    /// `max_{k,m} |1 - Σ_{l,n} |U_kmln|²|` over the included ranges.
    pub residual: f64,
}

impl OverlapTensor {
    fn index(&self, k: i64, m: usize, l: i64, n: usize) -> usize {
        let nk = (k - self.position_bins.start()) as usize;
        let nl = (l - self.momentum_bins.start()) as usize;
        let bl = (self.momentum_bins.end() - self.momentum_bins.start() + 1) as usize;
        ((nk * self.basis_size + m) * bl + nl) * self.basis_size + n
    }

    pub fn get(&self, k: i64, m: usize, l: i64, n: usize) -> Complex64 {
        self.entries[self.index(k, m, l, n)]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|u| u.norm()).fold(0.0, f64::max)
    }

    /// `Σ_{l,n} |U_kmln|²` for every `(k, m)`, row-major.
    pub fn row_norms(&self) -> Vec<f64> {
        let row = (self.momentum_bins.end() - self.momentum_bins.start() + 1) as usize
            * self.basis_size;
        self.entries
            .chunks(row)
            .map(|r| r.iter().map(|u| u.norm_sqr()).sum())
            .collect()
    }
}

/// `U_kmln = (2πħ)^(-1/2) ∫χ_k dx ∫χ_l dp e^(ipx/ħ) φ*_km(x) θ_ln(p)` with
/// Fourier bases on both sides, by tensor Gauss–Legendre quadrature on every
/// bin pair.
pub fn overlap_tensor(
    scheme: &BinningScheme,
    position_bins: RangeInclusive<i64>,
    momentum_bins: RangeInclusive<i64>,
    basis_size: usize,
    quadrature_nodes: usize,
) -> Result<OverlapTensor> {
    overlap_tensor_with(
        scheme,
        position_bins,
        momentum_bins,
        basis_size,
        quadrature_nodes,
        &FourierBinBasis,
        &FourierBinBasis,
    )
}

pub fn overlap_tensor_with(
    scheme: &BinningScheme,
    position_bins: RangeInclusive<i64>,
    momentum_bins: RangeInclusive<i64>,
    basis_size: usize,
    quadrature_nodes: usize,
    position_basis: &dyn BinBasis,
    momentum_basis: &dyn BinBasis,
) -> Result<OverlapTensor> {
    if position_bins.is_empty() || momentum_bins.is_empty() {
        return Err(invalid("bins", "ranges must be nonempty"));
    }
    if basis_size == 0 {
        return Err(invalid("basis_size", "must be at least 1"));
    }
    if quadrature_nodes < 32 {
        return Err(invalid("quadrature_nodes", "need at least 32"));
    }
    let rule = QuadratureRule::gauss_legendre(quadrature_nodes)?;
    let hbar = scheme.hbar;
    let xs = scheme.layout(Space::Position);
    let ps = scheme.layout(Space::Momentum);
    let norm = (2.0 * PI * hbar).sqrt().recip();

    // A[m][i] = w_i φ*_km(x_i), B[n][j] = w_j θ_ln(p_j)
    let weighted = |layout: BinLayout, j: i64, basis: &dyn BinBasis, conj: bool| {
        let (a, b) = layout.edges(j);
        let (nodes, weights) = rule.mapped(a, b);
        let table: Vec<Vec<Complex64>> = (0..basis_size)
            .map(|m| {
                nodes
                    .iter()
                    .zip(&weights)
                    .map(|(&s, &w)| {
                        let v = basis.value(m, layout.center(j), layout.width, s);
                        (if conj { v.conj() } else { v }) * w
                    })
                    .collect()
            })
            .collect();
        (nodes, table)
    };

    let ks: Vec<i64> = position_bins.clone().collect();
    let ls: Vec<i64> = momentum_bins.clone().collect();
    let blocks: Vec<Vec<Complex64>> = ks
        .par_iter()
        .map(|&k| {
            let (x_nodes, a_table) = weighted(xs, k, position_basis, true);
            let mut out = vec![Complex64::new(0.0, 0.0); basis_size * ls.len() * basis_size];
            for (li, &l) in ls.iter().enumerate() {
                let (p_nodes, b_table) = weighted(ps, l, momentum_basis, false);
                // T[i][n] = Σ_j e^(i p_j x_i/ħ) B[n][j]
                let t: Vec<Vec<Complex64>> = x_nodes
                    .iter()
                    .map(|&x| {
                        let phases: Vec<Complex64> =
                            p_nodes.iter().map(|&p| Complex64::cis(p * x / hbar)).collect();
                        b_table
                            .iter()
                            .map(|row| row.iter().zip(&phases).map(|(b, e)| b * e).sum())
                            .collect()
                    })
                    .collect();
                for (m, a_row) in a_table.iter().enumerate() {
                    for n in 0..basis_size {
                        let value: Complex64 =
                            a_row.iter().zip(&t).map(|(a, t_row)| a * t_row[n]).sum();
                        out[(m * ls.len() + li) * basis_size + n] = value * norm;
                    }
                }
            }
            out
        })
        .collect();

    let entries: Vec<Complex64> = blocks.into_iter().flatten().collect();
    let mut tensor = OverlapTensor {
        position_bins,
        momentum_bins,
        basis_size,
        entries,
        residual: 0.0,
    };
    tensor.residual = tensor
        .row_norms()
        .iter()
        .map(|r| (1.0 - r).abs())
        .fold(0.0, f64::max);
    Ok(tensor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{fourier_transform, make_gaussian, GridSpec};
    use approx::assert_abs_diff_eq;

    #[test]
    fn scheme_gamma_and_validation() {
        let s = BinningScheme::new(0.5, 3.0, 2.0).unwrap();
        assert_abs_diff_eq!(s.gamma(), 0.75);
        assert!(BinningScheme::new(0.0, 1.0, 1.0).is_err());
        assert!(BinningScheme::new(1.0, -1.0, 1.0).is_err());
        let sym = BinningScheme::symmetric(2.0 * PI, 1.0).unwrap();
        assert_abs_diff_eq!(sym.gamma(), 2.0 * PI, epsilon = 1e-14);
    }

    #[test]
    fn bins_tile_the_line() {
        let layout = BinLayout::new(0.7).unwrap();
        for j in -5..5 {
            assert_abs_diff_eq!(layout.edges(j).1, layout.edges(j + 1).0, epsilon = 1e-15);
            assert_eq!(layout.index_of(layout.center(j)), j);
        }
        assert_eq!(layout.index_of(0.35), 1);
        assert_eq!(layout.index_of(0.3499), 0);
    }

    #[test]
    fn distribution_validation() {
        assert!(ProbabilityDistribution::new(0, vec![0.5, 0.5]).is_ok());
        assert!(matches!(
            ProbabilityDistribution::new(0, vec![0.5, 0.6]),
            Err(Error::BadTotal { .. })
        ));
        assert!(matches!(
            ProbabilityDistribution::new(0, vec![1.0 + 1e-3, -1e-3]),
            Err(Error::NegativeWeight { index: 1, .. })
        ));
        let clamped = ProbabilityDistribution::new(3, vec![1.0, -1e-13]).unwrap();
        assert_eq!(clamped.weights(), &[1.0, 0.0]);
        assert_eq!(clamped.get(3), 1.0);
        assert_eq!(clamped.get(2), 0.0);
        assert_eq!(clamped.get(10), 0.0);
        assert!(matches!(
            ProbabilityDistribution::sub_normalized(0, vec![0.0, 0.0]),
            Err(Error::EmptyDistribution)
        ));
    }

    #[test]
    fn narrow_state_fills_one_bin() {
        let grid = GridSpec::symmetric(4096, 1.0).unwrap();
        let psi = make_gaussian(0.0, 0.0, 0.25, grid, 1.0).unwrap();
        // ±8 widths fit inside the bin
        let q = coarse_grain(&psi, 4.0).unwrap();
        assert_abs_diff_eq!(q.get(0), 1.0, epsilon = 1e-9);
        for (k, w) in q.iter().filter(|(k, _)| *k != 0) {
            assert!(w < 1e-12, "bin {k} has weight {w}");
        }
    }

    #[test]
    fn huge_bin_takes_everything() {
        let grid = GridSpec::symmetric(1024, 1.0).unwrap();
        let psi = make_gaussian(0.0, 0.0, 1.0, grid, 1.0).unwrap();
        let q = coarse_grain(&psi, 1000.0).unwrap();
        assert_eq!(q.len(), 1);
        assert_abs_diff_eq!(q.get(0), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn coarse_grain_rejects_undersampled_bins() {
        let grid = GridSpec::symmetric(256, 1.0).unwrap();
        let psi = make_gaussian(0.0, 0.0, 1.0, grid, 1.0).unwrap();
        assert!(matches!(
            coarse_grain(&psi, grid.step * 1.5),
            Err(Error::InsufficientSamples { .. })
        ));
        assert!(coarse_grain(&psi, -1.0).is_err());
    }

    #[test]
    fn momentum_masses_sum_to_one() {
        let grid = GridSpec::symmetric(2048, 1.0).unwrap();
        let psi = make_gaussian(0.4, -0.9, 0.8, grid, 1.0).unwrap();
        let phi = fourier_transform(&psi).unwrap();
        let scheme = BinningScheme::new(0.6, 0.9, 1.0).unwrap();
        let p = distribution(&phi, &scheme).unwrap();
        assert_abs_diff_eq!(p.total(), 1.0, epsilon = 1e-10);
        assert_eq!(p.offset(), scheme.layout(Space::Momentum).index_of(phi.grid().first()));
    }

    #[test]
    fn translation_by_one_bin_shifts_labels() {
        let grid = GridSpec::symmetric(4096, 1.0).unwrap();
        let width = 0.8;
        let a = coarse_grain(&make_gaussian(0.1, 0.3, 1.0, grid, 1.0).unwrap(), width).unwrap();
        let b = coarse_grain(&make_gaussian(0.1 + width, 0.3, 1.0, grid, 1.0).unwrap(), width)
            .unwrap();
        for k in -8..8 {
            assert_abs_diff_eq!(a.get(k), b.get(k + 1), epsilon = 1e-10);
        }
    }

    #[test]
    fn fourier_ordinals() {
        let freqs: Vec<i64> = (0..6).map(fourier_frequency).collect();
        assert_eq!(freqs, vec![0, 1, -1, 2, -2, 3]);
    }

    #[test]
    fn fourier_basis_constant_mode() {
        let phi = bin_fourier_basis(2, 0, 0.5);
        assert_abs_diff_eq!(phi(1.0).re, 0.5f64.sqrt().recip(), epsilon = 1e-15);
        assert_eq!(phi(0.0), Complex64::new(0.0, 0.0));
        // self inner product of the constant mode
        let rule = QuadratureRule::gauss_legendre(16).unwrap();
        let (nodes, weights) = rule.mapped(0.75, 1.25);
        let ip: f64 = nodes.iter().zip(&weights).map(|(&s, w)| w * phi(s).norm_sqr()).sum();
        assert_abs_diff_eq!(ip, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn fourier_modes_are_orthogonal() {
        let width = 1.3;
        let (f1, f2) = (bin_fourier_basis(-1, 1, width), bin_fourier_basis(-1, 2, width));
        let rule = QuadratureRule::gauss_legendre(32).unwrap();
        let (nodes, weights) = rule.mapped(-1.5 * width, -0.5 * width);
        let ip: Complex64 = nodes
            .iter()
            .zip(&weights)
            .map(|(&s, &w)| f1(s) * f2(s).conj() * w)
            .sum();
        assert!(ip.norm() < 1e-14);
    }

    #[test]
    fn legendre_basis_is_orthonormal() {
        let rule = QuadratureRule::gauss_legendre(40).unwrap();
        let (nodes, weights) = rule.mapped(0.4, 2.4);
        for i in 0..10 {
            for j in 0..10 {
                let g: Complex64 = nodes
                    .iter()
                    .zip(&weights)
                    .map(|(&s, &w)| {
                        LegendreBinBasis.value(i, 1.4, 2.0, s)
                            * LegendreBinBasis.value(j, 1.4, 2.0, s).conj()
                            * w
                    })
                    .sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((g.re - expected).abs() < 1e-12 && g.im.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn coefficients_of_a_basis_function() {
        // ψ = φ_{0,0}: constant on bin 0 of width 1, zero elsewhere; samples
        // sit at cell midpoints so exactly 64 of them fall inside the bin
        let grid = GridSpec::new(-3.0 + 1.0 / 128.0, 1.0 / 64.0, 384, Space::Position).unwrap();
        let amps = grid
            .points()
            .map(|x| Complex64::new(if x.abs() <= 0.5 { 1.0 } else { 0.0 }, 0.0))
            .collect();
        let psi = GridState::new(grid, amps, 1.0).unwrap();
        let scheme = BinningScheme::new(1.0, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(psi.raw_norm(), 1.0, epsilon = 1e-14);
        let c = bin_coefficients(&psi, &scheme, 0, 6).unwrap();
        assert_abs_diff_eq!(c.coefficients[0].re, 1.0, epsilon = 1e-12);
        for a in &c.coefficients[1..] {
            assert!(a.norm() < 1e-12);
        }
        let joint =
            joint_entropy_distribution(&psi, &scheme, 6, -2..=2, &FourierBinBasis).unwrap();
        assert_abs_diff_eq!(joint.captured_mass, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(joint.distribution.max_weight(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn coefficients_respect_bessel_bound() {
        let grid = GridSpec::symmetric(4096, 1.0).unwrap();
        let psi = make_gaussian(0.3, 0.4, 0.7, grid, 1.0).unwrap();
        let scheme = BinningScheme::new(1.0, 1.0, 1.0).unwrap();
        let q = distribution(&psi, &scheme).unwrap();
        for k in -2..=2 {
            let mut previous = 0.0;
            for size in [1, 4, 16, 32] {
                let captured = bin_coefficients(&psi, &scheme, k, size).unwrap().captured();
                assert!(captured <= q.get(k) + 1e-9);
                assert!(captured >= previous - 1e-12);
                previous = captured;
            }
        }
    }

    #[test]
    fn joint_distribution_captures_nearly_all_mass() {
        let grid = GridSpec::symmetric(8192, 1.0).unwrap();
        let psi = make_gaussian(0.0, 0.0, 1.0, grid, 1.0).unwrap();
        let scheme = BinningScheme::new(1.0, 1.0, 1.0).unwrap();
        let q = distribution(&psi, &scheme).unwrap();
        let on_range: f64 = (-8..=8).map(|k| q.get(k)).sum();
        let joint = joint_entropy_distribution(&psi, &scheme, 32, -8..=8, &LegendreBinBasis).unwrap();
        assert!(joint.captured_mass >= 1.0 - 1e-6, "{}", joint.captured_mass);
        assert!(joint.captured_mass <= on_range + 1e-9);
        assert!(joint.reliable);
        assert_eq!(joint.distribution.len(), 17 * 32);
    }

    #[test]
    fn fourier_truncation_converges_slowly_off_center() {
        // |ψ|² differs at the two edges of off-center bins, so the periodic
        // extension jumps and |a_km|² decays only like 1/m²
        let grid = GridSpec::symmetric(8192, 1.0).unwrap();
        let psi = make_gaussian(0.0, 0.0, 1.0, grid, 1.0).unwrap();
        let scheme = BinningScheme::new(1.0, 1.0, 1.0).unwrap();
        let captured = |m| {
            joint_entropy_distribution(&psi, &scheme, m, -8..=8, &FourierBinBasis)
                .unwrap()
                .captured_mass
        };
        let (c32, c128) = (captured(32), captured(128));
        assert!(c32 < 1.0 - 1e-4 && c32 < c128 && c128 <= 1.0 + 1e-9);
        // deficit shrinks roughly in proportion to 1/m
        let ratio = (1.0 - c32) / (1.0 - c128);
        assert!(ratio > 3.0 && ratio < 5.0, "{ratio}");
    }

    #[test]
    fn legendre_coefficients_converge_fast() {
        let grid = GridSpec::symmetric(4096, 1.0).unwrap();
        let psi = make_gaussian(0.3, 0.4, 0.7, grid, 1.0).unwrap();
        let scheme = BinningScheme::new(1.0, 1.0, 1.0).unwrap();
        let q = distribution(&psi, &scheme).unwrap();
        let c = bin_coefficients_with(&psi, &scheme, 0, 16, &LegendreBinBasis).unwrap();
        assert_abs_diff_eq!(c.captured(), q.get(0), epsilon = 1e-9);
    }

    #[test]
    fn overlap_tensor_rows_are_subunitary() {
        let scheme = BinningScheme::symmetric(2.0 * PI, 1.0).unwrap();
        let u = overlap_tensor(&scheme, -1..=1, -2..=2, 4, 48).unwrap();
        assert_eq!(u.entries().len(), 3 * 4 * 5 * 4);
        for r in u.row_norms() {
            assert!(r <= 1.0 + 1e-8);
        }
        assert!(u.residual < 1.0);
        assert!(overlap_tensor(&scheme, 0..=0, 0..=0, 4, 16).is_err());
        let empty = std::ops::RangeInclusive::new(1, 0);
        assert!(overlap_tensor(&scheme, empty, 0..=0, 4, 48).is_err());
    }
}
