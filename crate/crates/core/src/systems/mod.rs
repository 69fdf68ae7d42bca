//! The example dynamical systems.

pub mod flow;
pub mod maps;
pub mod symbols;

pub use flow::{DrivingPath, DrivingStage, FlowSystem, LorenzParams, State, WaveParams};
pub use maps::{CircleMap, MapFamily};
pub use symbols::SymbolSequence;
