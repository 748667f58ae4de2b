//! Quadrature helpers: Gauss–Legendre rules and piecewise Lagrange
//! interpolation of uniformly sampled functions restricted to an interval.
//!
//! Bin integrals only ever use samples that lie inside the bin, with
//! one-sided stencils at the edges, so integrands that are smooth inside a
//! bin but discontinuous at its edges are integrated to full order.

use std::num::NonZeroUsize;
use std::ops::{Add, Mul};
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

use crate::error::{invalid, Error, Result};

/// Widest Lagrange stencil used by [`Interpolant`] (degree 11).
pub const MAX_STENCIL: usize = 12;

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn gauss_legendre(n: usize) -> Result<Self> {
        let degree = NonZeroUsize::new(n).ok_or_else(|| invalid("node_count", "must be positive"))?;
        let mut pairs = GaussLegendre::new(degree).into_node_weight_pairs().into_vec();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (nodes, weights) = pairs.into_iter().unzip();
        Ok(QuadratureRule { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights affinely mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let nodes = self.nodes.iter().map(|t| mid + half * t).collect();
        let weights = self.weights.iter().map(|w| half * w).collect();
        (nodes, weights)
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(t, w)| w * f(mid + half * t))
            .sum::<f64>()
            * half
    }
}

/// Values that can be interpolated: real or complex samples.
pub trait Sample: Copy + Default + Add<Output = Self> + Mul<f64, Output = Self> {}

impl<T> Sample for T where T: Copy + Default + Add<Output = T> + Mul<f64, Output = T> {}

/// Lagrange basis on the nodes `0..n`, evaluated in product form.
fn lagrange_basis(n: usize, u: f64) -> [f64; MAX_STENCIL] {
    let mut out = [0.0; MAX_STENCIL];
    for (r, slot) in out.iter_mut().enumerate().take(n) {
        let mut v = 1.0;
        for j in (0..n).filter(|&j| j != r) {
            v *= (u - j as f64) / (r as f64 - j as f64);
        }
        *slot = v;
    }
    out
}

/// Gauss–Legendre rule with enough nodes to integrate the basis exactly.
fn basis_rule() -> &'static QuadratureRule {
    static RULE: OnceLock<QuadratureRule> = OnceLock::new();
    RULE.get_or_init(|| QuadratureRule::gauss_legendre(MAX_STENCIL / 2 + 1).expect("positive size"))
}

/// `∫_{u0}^{u1} L_r(u) du` for every basis polynomial.
fn lagrange_integrals(n: usize, u0: f64, u1: f64) -> [f64; MAX_STENCIL] {
    let (nodes, weights) = basis_rule().mapped(u0, u1);
    let mut out = [0.0; MAX_STENCIL];
    for (u, w) in nodes.iter().zip(&weights) {
        for (o, l) in out.iter_mut().zip(lagrange_basis(n, *u)) {
            *o += w * l;
        }
    }
    out
}

/// Cell integrals `∫_c^{c+1} L_r` for stencils of every size.
struct LagrangeTable {
    cell_weights: Vec<[f64; MAX_STENCIL]>,
}

impl LagrangeTable {
    fn new(n: usize) -> Self {
        let cell_weights = (0..n.saturating_sub(1))
            .map(|c| lagrange_integrals(n, c as f64, c as f64 + 1.0))
            .collect();
        LagrangeTable { cell_weights }
    }
}

fn table(n: usize) -> &'static LagrangeTable {
    static TABLES: OnceLock<Vec<LagrangeTable>> = OnceLock::new();
    &TABLES.get_or_init(|| (0..=MAX_STENCIL).map(LagrangeTable::new).collect())[n]
}

/// Piecewise Lagrange interpolant of uniformly spaced samples, using only
/// the samples with index in `lo..=hi`.
#[derive(Debug, Clone, Copy)]
pub struct Interpolant<'a, T> {
    origin: f64,
    step: f64,
    samples: &'a [T],
    lo: usize,
    hi: usize,
    stencil: usize,
    a: f64,
    b: f64,
}

impl<'a, T: Sample> Interpolant<'a, T> {
    /// Interpolant on `[a, b] ∩ [first sample, last sample]` built from the
    /// samples inside that interval. At least two samples are required.
    pub fn on_interval(origin: f64, step: f64, samples: &'a [T], a: f64, b: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InsufficientSamples {
                available: samples.len(),
                required: 2,
            });
        }
        if !(b > a) {
            return Err(invalid("interval", format!("empty interval [{a}, {b}]")));
        }
        let last = origin + (samples.len() - 1) as f64 * step;
        let a = a.max(origin);
        let b = b.min(last);
        let snap = 1e-9;
        let lo_f = ((a - origin) / step - snap).ceil();
        let hi_f = ((b - origin) / step + snap).floor();
        let available = if b > a && hi_f >= lo_f {
            (hi_f - lo_f) as usize + 1
        } else {
            0
        };
        if available < 2 {
            return Err(Error::InsufficientSamples {
                available,
                required: 2,
            });
        }
        let lo = lo_f as usize;
        let hi = hi_f as usize;
        Ok(Interpolant {
            origin,
            step,
            samples,
            lo,
            hi,
            stencil: available.min(MAX_STENCIL),
            a,
            b,
        })
    }

    /// Number of samples the interpolant draws on.
    pub fn samples_inside(&self) -> usize {
        self.hi - self.lo + 1
    }

    /// The (clipped) integration interval.
    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    fn stencil_start(&self, cell: isize) -> usize {
        let half = (self.stencil / 2) as isize - 1;
        let max_start = (self.hi + 1 - self.stencil) as isize;
        (cell - half).clamp(self.lo as isize, max_start) as usize
    }

    fn combine(&self, start: usize, weights: impl Iterator<Item = f64>) -> T {
        self.samples[start..start + self.stencil]
            .iter()
            .zip(weights)
            .fold(T::default(), |acc, (&f, w)| acc + f * w)
    }

    fn partial(&self, start: usize, u0: f64, u1: f64) -> T {
        self.combine(start, lagrange_integrals(self.stencil, u0, u1).into_iter())
    }

    /// Value of the interpolant at `x`.
    pub fn eval(&self, x: f64) -> T {
        let cell = ((x - self.origin) / self.step).floor() as isize;
        let start = self.stencil_start(cell);
        let u = (x - self.origin) / self.step - start as f64;
        self.combine(start, lagrange_basis(self.stencil, u).into_iter())
    }

    /// Exact integral of the interpolant over the clipped interval.
    pub fn integral(&self) -> T {
        let t = table(self.stencil);
        let x_lo = self.origin + self.lo as f64 * self.step;
        let x_hi = self.origin + self.hi as f64 * self.step;
        let mut total = T::default();
        if x_lo - self.a > 0.0 {
            total = total + self.partial(self.lo, (self.a - x_lo) / self.step, 0.0);
        }
        for cell in self.lo..self.hi {
            let start = self.stencil_start(cell as isize);
            let weights = &t.cell_weights[cell - start];
            total = total + self.combine(start, weights.iter().copied());
        }
        if self.b - x_hi > 0.0 {
            let start = self.hi + 1 - self.stencil;
            let u0 = (self.hi - start) as f64;
            total = total + self.partial(start, u0, u0 + (self.b - x_hi) / self.step);
        }
        total * self.step
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let rule = QuadratureRule::gauss_legendre(6).unwrap();
        assert_eq!(rule.len(), 6);
        assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
        assert_abs_diff_eq!(rule.weights.iter().sum::<f64>(), 2.0, epsilon = 1e-14);
        // degree 11 is exact for six nodes
        let exact = 2.0f64.powi(12) / 12.0 - 0.0;
        assert_abs_diff_eq!(rule.integrate(0.0, 2.0, |x| x.powi(11)), exact, epsilon = 1e-9);
        assert!(QuadratureRule::gauss_legendre(0).is_err());
    }

    #[test]
    fn lagrange_weights_sum_to_one() {
        for n in 2..=MAX_STENCIL {
            let t = table(n);
            for row in &t.cell_weights {
                assert_abs_diff_eq!(row.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
            }
            for u in [-0.7, 0.0, 0.3, n as f64 - 1.2] {
                let s: f64 = lagrange_basis(n, u).iter().sum();
                assert_abs_diff_eq!(s, 1.0, epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn integrates_septic_exactly_on_unaligned_interval() {
        let step = 0.1;
        let origin = -3.0;
        let f = |x: f64| 0.3 * x.powi(7) - x.powi(4) + 2.0 * x - 1.0;
        let samples: Vec<f64> = (0..61).map(|i| f(origin + i as f64 * step)).collect();
        let (a, b) = (-1.234, 0.987);
        let antideriv = |x: f64| 0.3 * x.powi(8) / 8.0 - x.powi(5) / 5.0 + x * x - x;
        let interp = Interpolant::on_interval(origin, step, &samples, a, b).unwrap();
        assert_abs_diff_eq!(interp.integral(), antideriv(b) - antideriv(a), epsilon = 1e-11);
        assert_abs_diff_eq!(interp.eval(0.4321), f(0.4321), epsilon = 1e-11);
        assert_abs_diff_eq!(interp.eval(a), f(a), epsilon = 1e-10);
    }

    #[test]
    fn discontinuity_outside_interval_is_ignored() {
        // Constant on [0, 1], zero elsewhere; interval edges fall between samples.
        let step = 0.013;
        let origin = -0.5;
        let samples: Vec<Complex64> = (0..160)
            .map(|i| {
                let x = origin + i as f64 * step;
                if (0.0..=1.0).contains(&x) {
                    Complex64::new(1.0, -2.0)
                } else {
                    Complex64::default()
                }
            })
            .collect();
        let interp = Interpolant::on_interval(origin, step, &samples, 0.0, 1.0).unwrap();
        let value = interp.integral();
        assert!((value - Complex64::new(1.0, -2.0)).norm() < 1e-13);
    }

    #[test]
    fn too_few_samples_rejected() {
        let samples = vec![1.0; 10];
        let err = Interpolant::on_interval(0.0, 1.0, &samples, 2.2, 2.9).unwrap_err();
        assert_eq!(
            err,
            Error::InsufficientSamples {
                available: 0,
                required: 2
            }
        );
        let ok = Interpolant::on_interval(0.0, 1.0, &samples, 2.2, 4.1).unwrap();
        assert_eq!(ok.samples_inside(), 2);
        assert_abs_diff_eq!(ok.integral(), 1.9, epsilon = 1e-14);
    }

    #[test]
    fn interval_is_clipped_to_grid() {
        let samples = vec![2.0; 11];
        let interp = Interpolant::on_interval(0.0, 0.1, &samples, -5.0, 0.55).unwrap();
        assert_eq!(interp.interval(), (0.0, 0.55));
        assert_abs_diff_eq!(interp.integral(), 1.1, epsilon = 1e-14);
    }
}
