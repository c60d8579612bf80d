//! Low-rank matrix completion by nuclear-norm minimization with entries
//! sampled by relaxed leverage scores.

pub mod error;
pub mod harness;
pub mod leverage;
pub mod matcore;
pub mod recovery;
pub mod sampling;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
