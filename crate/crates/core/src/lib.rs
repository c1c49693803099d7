//! Periodic traveling waves of the Ostrovsky (quadratic) and short-pulse
//! (cubic) equations, and numerical certification of their spectral stability.
//!
//! The crate builds the wave profiles from Jacobi elliptic functions,
//! discretizes the associated Hill operators by Fourier collocation, and checks
//! stability three ways: closed-form Lamé spectra, the Green's-function index
//! `⟨L⁻¹Φ′, Φ′⟩`, and direct eigenvalues of the pencil `L Z = μ Z′`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod elliptic;
pub mod error;
pub mod greens;
pub mod hillop;
pub mod linalg;
pub mod linspec;
pub mod positivity;
pub mod profiles;
pub mod quadrature;
pub mod spectral;

pub use elliptic::{complete_e, complete_k, jacobi, Modulus};
pub use error::{Error, Result};
