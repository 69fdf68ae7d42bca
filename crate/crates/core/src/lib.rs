//! Coherent sets of aperiodically driven dynamical systems.
//!
//! The pipeline discretises transfer operators on a uniform box grid
//! ([`transfer`]), approximates the slow Oseledets directions of the
//! resulting matrix cocycle ([`oseledets`]) and extracts coherent set
//! families from them by thresholding ([`coherent`]). [`experiment`] wires
//! the stages together for the bundled example systems in [`systems`].

pub mod coherent;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod oseledets;
pub mod parallel;
pub mod systems;
pub mod transfer;

pub use error::{Error, Result};
pub use grid::{Axis, BoxSet, Grid};
