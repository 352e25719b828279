//! SSE Markov chain: state, diagonal updates, directed-loop and cluster
//! updates, sweep composition, and bit-exact checkpointing.

pub mod checkpoint;
pub mod cluster;
pub mod diagonal;
pub mod engine;
pub mod linked;
pub mod loops;
pub mod state;

pub use engine::Engine;
pub use loops::LoopTrace;
pub use state::{Op, SseState};
