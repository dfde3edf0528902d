//! Rate / secret-key frontiers and common information for jointly Gaussian
//! vector sources.
//!
//! The crate is organized bottom-up:
//!
//! * [`matgauss`] — symmetric linear algebra for possibly singular
//!   covariances (Jacobi eigendecomposition, pseudo square roots, SVD,
//!   Schur conditionals, determinant-based mutual information);
//! * [`spectrum`] — Gaussian vector models and their correlation spectra
//!   under simultaneous whitening;
//! * [`region`] — closed-form rate / key-rate frontier points, sweeps over a
//!   tradeoff grid, and the common-information functional;
//! * [`verify`] — independent numerical oracles (golden-section searches,
//!   explicit auxiliary-variable constructions, determinant cross-checks,
//!   Monte Carlo sampling) that re-derive the closed forms and report
//!   residuals.
//!
//! All rates are in nats internally; unit conversion is the caller's concern.

pub mod error;
pub mod matgauss;
pub mod region;
pub mod spectrum;
pub mod verify;

pub use error::{Error, Result};
pub use matgauss::SymMatrix;
pub use region::{DisclosureCase, FrontierPoint, XDisclosure};
pub use spectrum::{DisclosureChannel, GaussianModel};
