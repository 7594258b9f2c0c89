//! Optimal control of a flexible pool of finite queues.
//!
//! A single stream of tasks is dispatched across up to `n` queues that can
//! be deployed and torn down on the fly (think VM instances in an elastic
//! server pool). The
//! crate solves the discounted continuous-time control problem exactly on
//! the finite state space (value iteration over the uniformized fixed-point
//! equation), checks structural properties of the solution, simulates the
//! closed loop, and sweeps cost parameters to map out policy regimes.

pub mod analysis;
pub mod config;
pub mod error;
pub mod experiments;
mod linalg;
pub mod model;
pub mod sim;
pub mod solver;
pub mod state;

pub use error::{Error, Result};
pub use model::ModelParams;
pub use state::{QueueClass, StateSpace, SystemState};
