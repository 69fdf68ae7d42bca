//! Approximate Oseledets directions of matrix cocycles.
//!
//! The leading right singular vectors of a long product `P^{(M)}` started
//! `N` steps in the past, pushed forward by the `N`-step product, approximate
//! the slowest-decaying equivariant directions at the reference time.

pub mod approx;
pub mod bound;
pub mod spectrum;
pub mod svd;

pub use approx::{
    align_parity, convergence_delta, discrete_approx, normalize_l1, OseledetsApprox,
};
pub use bound::{positive_part_bound, BoundCheck};
pub use spectrum::{eigenvector, nonzero_eigenvalues};
pub use svd::{
    jacobi_svd, sign_convention, top_k_singular, top_k_singular_dense, SpectralResult, SvdOptions,
};
