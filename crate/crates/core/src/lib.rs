//! Synchronisation analysis for networks of diffusively coupled dynamical
//! systems
//!
//! ```text
//! ẋᵢ = f(t, xᵢ) + gᵢ(t, xᵢ) + α Σⱼ Wᵢⱼ h(xⱼ − xᵢ)
//! ```
//!
//! The crate is `no_std` (it needs `alloc`) and split into:
//!
//! - [`linalg`]: small dense real/complex matrices, spectra, Kronecker
//!   products, operator norms and the explicit eigenbasis of a perturbed
//!   Jordan block.
//! - [`network`]: Laplacians built from weight matrices, connectivity, the
//!   spectral gap and diagonalisable approximations of defective Laplacians.
//! - [`stability`]: the spectral certificate `γ = min Re(λᵢβⱼ)`, bounds on the
//!   Jacobian constant ρ, the coupling threshold `α > ρ/γ`, diagonal-dominance
//!   margins, roughness and persistence bounds.
//! - [`dynamics`]: vector fields, coupling functions, the network right-hand
//!   side and fixed-step Runge–Kutta integration.
//! - [`experiments`]: synchronisation detection, decay-rate fits, critical
//!   coupling bisection, β-sweeps and persistence measurements.
//!
//! File formats, the JSON configuration and the command-line front-end live
//! in the `syncnet` companion crate.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod dynamics;
pub mod experiments;
pub mod linalg;
pub mod network;
pub mod stability;
pub mod tolerances;

pub use num_complex::Complex64;
