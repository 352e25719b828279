//! Stochastic series expansion quantum Monte Carlo for spin-1/2 XXZ and
//! transverse-field Ising models on periodic chains and square lattices,
//! with estimators for Pauli correlators and a post-processing layer that
//! turns them into pairwise entanglement measures.

pub mod channel;
pub mod ed;
pub mod entanglement;
pub mod estimators;
pub mod lattice;
pub mod model;
pub mod runner;
pub mod sse;

pub use channel::{Axis, ChannelId, PairChannels};
pub use lattice::{build_lattice, LatticeGeometry, SeparationVector};
pub use model::{directed_loop_table, LoopRules, Model, ModelKind, ModelParams};
