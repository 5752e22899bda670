//! Structural averaged controllability of parameter-dependent linear ensembles.

pub mod algebra;
pub mod analysis;
pub mod construction;
pub mod graph;
pub mod hilbert;
pub mod necessary;
pub mod sim;
pub mod structural;

pub use graph::{NodeId, NodeKind, PatternError, PatternFormat, SparsityPattern};
