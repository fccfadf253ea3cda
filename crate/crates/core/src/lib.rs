//! Exact computations with symmetrizable Cartan data: root systems, modules
//! over generalized path and preprojective algebras, reflection functors,
//! point counts of locally free quiver Grassmannians and a cluster-algebra
//! cross-check.

pub mod cartan;
pub mod checks;
pub mod cluster;
pub mod error;
pub mod field;
pub mod functors;
pub mod grassmann;
pub mod hmod;
pub mod io;
pub mod linsys;
pub mod matrix;
pub mod module;
pub mod pimod;

pub use error::{Error, Result};
