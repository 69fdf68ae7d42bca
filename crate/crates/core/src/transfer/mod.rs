//! Ulam discretisations of transfer operators and their products.

pub mod cocycle;
pub mod io;
pub mod matrix;
pub mod operator;
pub mod ulam;

pub use cocycle::{compose, Cocycle};
pub use matrix::{rho_hat, TimeSpan, TransferMatrix};
pub use operator::LinearOperator;
pub use ulam::{FamilyMatrices, ulam_family, ulam_flow, ulam_flow_snapshots, ulam_map};
