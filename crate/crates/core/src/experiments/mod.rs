//! Composed passages, scaling fits, convergence and the claim checks.

pub mod bounds;
pub mod claims;
pub mod compose;
pub mod convergence;
pub mod fit;
pub mod sweep;
