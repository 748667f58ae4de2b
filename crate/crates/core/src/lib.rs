//! Coarse-grained position/momentum probability distributions of one-dimensional
//! wave functions, their Rényi and Shannon entropies, and the entropic uncertainty
//! bounds that limit how well a state can be localized in both position and
//! momentum bins at once.
//!
//! The bins have widths `δx` and `δp`; every bound depends only on the
//! dimensionless product `γ = δx·δp/ħ`. The central quantity is the largest
//! eigenvalue `λ₀(γ)` of the sinc-kernel integral operator on `[-1, 1]`,
//! computed in [`prolate`]. Its square root `C_max` is the largest overlap any
//! pair of intra-bin bases can have.
//!
//! Module map:
//!
//! - [`state`]: wave functions on uniform grids and the unitary Fourier transform.
//! - [`quad`]: Gauss–Legendre rules and high-order interpolation of grid samples.
//! - [`coarse`]: bin masses `q_k`, `p_l`, intra-bin coefficients and overlap tensors.
//! - [`entropy`]: Rényi/Shannon entropies and conjugate order pairs.
//! - [`prolate`]: Nyström solver for the concentration eigenproblem.
//! - [`bounds`]: the entropic lower bounds and best-bound selectors.
//! - [`harness`]: end-to-end verification, bound sweeps and width scans.
//! - [`cli`]: the command-line front end and its report formats.

// `!(x > 0.0)` deliberately rejects NaN alongside nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod coarse;
pub mod entropy;
mod error;
pub mod harness;
pub mod prolate;
pub mod quad;
pub mod state;

pub use error::{Error, Result};
pub use num_complex::Complex64;
