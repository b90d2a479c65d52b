//! Kernelization of constraint satisfaction problems through Maltsev and
//! k-edge embeddings, together with the algebraic tests (partial
//! polymorphisms, universal partial Maltsev operations) that decide when such
//! embeddings can exist.

pub mod algebra;
pub mod embeddings;
pub mod harness;
pub mod kernelize;
pub mod limits;
pub mod maltsev;
pub mod model;
pub mod modp;

pub use limits::Limits;
