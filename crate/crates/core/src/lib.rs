//! Supernodal symbolic analysis for sparse Cholesky factors, with two
//! within-supernode column reordering methods (partition refinement and a
//! traveling-salesman model), block metrics that score the reorderings, and a
//! right-looking blocked numeric factorization that consumes the block lists.
//!
//! Indices are 0-based throughout; file formats convert at the boundary.

pub mod alloc_meter;
pub mod amalgamate;
pub mod blockmetrics;
mod error;
pub mod gen;
pub mod matrixio;
pub mod pipeline;
pub mod pr;
pub mod rlb;
pub mod symbolic;
pub mod tsp;

pub use error::{Error, Result};
pub use matrixio::{Permutation, SymmetricPattern};

#[cfg(test)]
#[global_allocator]
static ALLOC: alloc_meter::CountingAlloc = alloc_meter::CountingAlloc;
