//! Wave functions sampled on uniform grids.
//!
//! A [`GridState`] is either a position-space wave function `ψ(x)` or its
//! momentum-space counterpart `ψ̃(p)`, related by
//!
//! ```text
//! ψ̃(p) = (2πħ)^(-1/2) ∫ dx e^(-ipx/ħ) ψ(x)
//! ```
//!
//! The discrete transform evaluates this integral on the grid with the phase
//! factors that account for nonzero grid origins, so sampled values agree with
//! the continuum transform and not merely with an index-space DFT.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{invalid, Error, Result};

/// Largest probability mass a Gaussian may lose off either end of a grid.
pub const TAIL_MASS_LIMIT: f64 = 1e-12;

/// Tolerance on the L2 norm of a state after construction.
pub const NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Position,
    Momentum,
}

impl Space {
    pub fn conjugate(self) -> Space {
        match self {
            Space::Position => Space::Momentum,
            Space::Momentum => Space::Position,
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Position => f.write_str("position"),
            Space::Momentum => f.write_str("momentum"),
        }
    }
}

/// Uniform sampling grid: point `i` sits at `origin + i·step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin: f64,
    pub step: f64,
    pub count: usize,
    pub space: Space,
    /// Origin of the grid the Fourier transform maps onto. `None` selects the
    /// centered conjugate grid `-(count/2)·step_conjugate`.
    pub conjugate_origin: Option<f64>,
}

impl GridSpec {
    pub fn new(origin: f64, step: f64, count: usize, space: Space) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(invalid("step", format!("must be positive and finite, got {step}")));
        }
        if count < 2 {
            return Err(invalid("count", format!("need at least 2 samples, got {count}")));
        }
        if !origin.is_finite() {
            return Err(invalid("origin", "must be finite"));
        }
        Ok(GridSpec {
            origin,
            step,
            count,
            space,
            conjugate_origin: None,
        })
    }

    /// Grid of `count` points with spacing `step`, centered so that index
    /// `count/2` lands on zero.
    pub fn centered(count: usize, step: f64, space: Space) -> Result<Self> {
        GridSpec::new(-((count / 2) as f64) * step, step, count, space)
    }

    /// Centered position grid whose conjugate momentum grid is identical,
    /// i.e. `step = sqrt(2πħ/count)`.
    pub fn symmetric(count: usize, hbar: f64) -> Result<Self> {
        if !(hbar > 0.0) {
            return Err(invalid("hbar", "must be positive"));
        }
        if count < 2 {
            return Err(invalid("count", format!("need at least 2 samples, got {count}")));
        }
        GridSpec::centered(count, (2.0 * PI * hbar / count as f64).sqrt(), Space::Position)
    }

    pub fn with_conjugate_origin(mut self, origin: f64) -> Self {
        self.conjugate_origin = Some(origin);
        self
    }

    #[inline]
    pub fn point(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.step
    }

    pub fn first(&self) -> f64 {
        self.origin
    }

    pub fn last(&self) -> f64 {
        self.point(self.count - 1)
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |i| self.point(i))
    }

    /// Spacing of the conjugate grid, `2πħ/(count·step)`.
    pub fn conjugate_step(&self, hbar: f64) -> f64 {
        2.0 * PI * hbar / (self.count as f64 * self.step)
    }

    /// The grid the Fourier transform (or its inverse) produces.
    pub fn conjugate(&self, hbar: f64) -> GridSpec {
        let step = self.conjugate_step(hbar);
        let origin = self
            .conjugate_origin
            .unwrap_or(-((self.count / 2) as f64) * step);
        GridSpec {
            origin,
            step,
            count: self.count,
            space: self.space.conjugate(),
            conjugate_origin: Some(self.origin),
        }
    }
}

/// A normalized wave function sampled on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    grid: GridSpec,
    amplitudes: Vec<Complex64>,
    hbar: f64,
    raw_norm: f64,
}

impl GridState {
    /// Builds a state from raw samples and renormalizes it so that
    /// `step·Σ|ψ_i|² = 1`. The pre-normalization value is kept in
    /// [`GridState::raw_norm`].
    pub fn new(grid: GridSpec, amplitudes: Vec<Complex64>, hbar: f64) -> Result<Self> {
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(invalid("hbar", format!("must be positive, got {hbar}")));
        }
        if amplitudes.len() != grid.count {
            return Err(invalid(
                "amplitudes",
                format!("length {} does not match grid count {}", amplitudes.len(), grid.count),
            ));
        }
        let raw_norm = l2_norm(&amplitudes, grid.step);
        if !(raw_norm > 0.0) || !raw_norm.is_finite() {
            return Err(Error::NotNormalized { norm: raw_norm });
        }
        let scale = raw_norm.sqrt().recip();
        let amplitudes = amplitudes.into_iter().map(|a| a * scale).collect();
        Ok(GridState {
            grid,
            amplitudes,
            hbar,
            raw_norm,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn space(&self) -> Space {
        self.grid.space
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Norm of the samples before renormalization. For analytic states this
    /// exposes how much mass the grid truncated.
    pub fn raw_norm(&self) -> f64 {
        self.raw_norm
    }

    /// `step·Σ|ψ_i|²`.
    pub fn norm(&self) -> f64 {
        l2_norm(&self.amplitudes, self.grid.step)
    }

    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Grid estimate of `∫ f(s)|ψ(s)|² ds`.
    pub fn expectation(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| f(self.grid.point(i)) * a.norm_sqr())
            .sum::<f64>()
            * self.grid.step
    }

    pub fn mean(&self) -> f64 {
        self.expectation(|s| s)
    }

    /// Central second moment `⟨(s − ⟨s⟩)²⟩`.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.expectation(|s| (s - m) * (s - m))
    }

    /// Inner product `∫ ψ*(s) φ(s) ds` between states on the same grid.
    pub fn overlap(&self, other: &GridState) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(invalid("other", "states live on different grids"));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.grid.step)
    }

    fn from_transform(grid: GridSpec, amplitudes: Vec<Complex64>, hbar: f64) -> Self {
        let raw_norm = l2_norm(&amplitudes, grid.step);
        GridState {
            grid,
            amplitudes,
            hbar,
            raw_norm,
        }
    }
}

fn l2_norm(amplitudes: &[Complex64], step: f64) -> f64 {
    amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * step
}

/// Position → momentum representation.
///
/// With `x_j = x₀ + j·Δx` and `p_k = p₀ + k·Δp`, `Δx·Δp = 2πħ/N`, the sum
/// `Δx (2πħ)^(-1/2) Σ_j e^(-i p_k x_j/ħ) ψ_j` factors into a pre-twist by
/// `e^(-i p₀ x_j'/ħ)`, a forward DFT and a post-twist by `e^(-i p_k x₀/ħ)`.
pub fn fourier_transform(state: &GridState) -> Result<GridState> {
    if state.space() != Space::Position {
        return Err(Error::WrongSpace {
            expected: Space::Position,
            found: state.space(),
        });
    }
    Ok(transform(state, -1.0))
}

/// Momentum → position representation; exact left inverse of
/// [`fourier_transform`] up to rounding.
pub fn inverse_fourier_transform(state: &GridState) -> Result<GridState> {
    if state.space() != Space::Momentum {
        return Err(Error::WrongSpace {
            expected: Space::Momentum,
            found: state.space(),
        });
    }
    Ok(transform(state, 1.0))
}

fn transform(state: &GridState, sign: f64) -> GridState {
    let hbar = state.hbar;
    let src = state.grid;
    let dst = src.conjugate(hbar);
    let n = src.count;

    let mut buffer: Vec<Complex64> = state
        .amplitudes
        .iter()
        .enumerate()
        .map(|(j, a)| a * Complex64::cis(sign * dst.origin * (j as f64 * src.step) / hbar))
        .collect();

    let mut planner = FftPlanner::new();
    let fft = if sign < 0.0 {
        planner.plan_fft_forward(n)
    } else {
        planner.plan_fft_inverse(n)
    };
    fft.process(&mut buffer);

    let scale = src.step / (2.0 * PI * hbar).sqrt();
    for (k, value) in buffer.iter_mut().enumerate() {
        *value *= Complex64::cis(sign * dst.point(k) * src.origin / hbar) * scale;
    }
    GridState::from_transform(dst, buffer, hbar)
}

/// Analytic `|ψ|²` mass of the Gaussian density centered at `center` with
/// amplitude width `width` that lies outside `[lo, hi]`.
fn gaussian_tail_mass(center: f64, width: f64, lo: f64, hi: f64) -> f64 {
    0.5 * erfc((hi - center) / width) + 0.5 * erfc((center - lo) / width)
}

/// Samples `π^(-1/4) w^(-1/2) exp(-(x-c)²/(2w²)) exp(i·k·x/ħ)` on a position grid.
///
/// Both the position grid and its conjugate momentum grid must contain all but
/// [`TAIL_MASS_LIMIT`] of the respective densities; otherwise the state would
/// alias when transformed.
pub fn make_gaussian(
    center: f64,
    momentum_shift: f64,
    width: f64,
    grid: GridSpec,
    hbar: f64,
) -> Result<GridState> {
    if !(width > 0.0) || !width.is_finite() {
        return Err(invalid("width", format!("must be positive, got {width}")));
    }
    if !(hbar > 0.0) {
        return Err(invalid("hbar", "must be positive"));
    }
    if grid.space != Space::Position {
        return Err(Error::WrongSpace {
            expected: Space::Position,
            found: grid.space,
        });
    }
    let position_tail = gaussian_tail_mass(center, width, grid.first(), grid.last());
    let momentum_grid = grid.conjugate(hbar);
    let momentum_tail = gaussian_tail_mass(
        momentum_shift,
        hbar / width,
        momentum_grid.first(),
        momentum_grid.last(),
    );
    let tail_mass = position_tail.max(momentum_tail);
    if tail_mass > TAIL_MASS_LIMIT {
        return Err(Error::GridTooNarrow {
            tail_mass,
            limit: TAIL_MASS_LIMIT,
        });
    }

    let prefactor = PI.powf(-0.25) / width.sqrt();
    let amplitudes = grid
        .points()
        .map(|x| {
            let u = (x - center) / width;
            Complex64::cis(momentum_shift * x / hbar) * (prefactor * (-0.5 * u * u).exp())
        })
        .collect();
    GridState::new(grid, amplitudes, hbar)
}

/// Parameters of one coherent packet inside a random superposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Packet {
    pub center: f64,
    pub momentum: f64,
    pub width: f64,
    pub coefficient: [f64; 2],
}

/// Draws `packets` Gaussian packets with centers in `[-spread, spread]`,
/// momenta in `[-band, band]`, widths in `[0.5, 1.5]` and complex
/// coefficients in the unit square, all from a seeded ChaCha stream.
pub fn random_packets(seed: u64, packets: usize, spread: f64, band: f64) -> Vec<Packet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..packets)
        .map(|_| Packet {
            center: rng.random_range(-spread..=spread),
            momentum: rng.random_range(-band..=band),
            width: rng.random_range(0.5..=1.5),
            coefficient: [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)],
        })
        .collect()
}

/// Normalized superposition of coherent packets.
///
/// Every component is localized in both representations, so the state is
/// band-limited to within [`TAIL_MASS_LIMIT`] on an adequate grid and the
/// discrete transform stays faithful.
pub fn make_superposition(packets: &[Packet], grid: GridSpec, hbar: f64) -> Result<GridState> {
    if packets.is_empty() {
        return Err(invalid("packets", "need at least one packet"));
    }
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); grid.count];
    for packet in packets {
        let component = make_gaussian(packet.center, packet.momentum, packet.width, grid, hbar)?;
        let c = Complex64::new(packet.coefficient[0], packet.coefficient[1]);
        for (acc, a) in amplitudes.iter_mut().zip(component.amplitudes()) {
            *acc += c * a;
        }
    }
    GridState::new(grid, amplitudes, hbar)
}

/// Seeded random superposition, see [`random_packets`].
pub fn make_random_state(
    seed: u64,
    packets: usize,
    grid: GridSpec,
    hbar: f64,
) -> Result<GridState> {
    make_superposition(&random_packets(seed, packets, 3.0, 2.0), grid, hbar)
}
