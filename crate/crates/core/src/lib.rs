//! Reduction-based algebraic multigrid solvers.
//!
//! This crate implements AMG hierarchies built around approximations of the
//! ideal transfer operators of a C/F splitting: local approximate ideal
//! restriction (lAIR) and its constrained variant (ClAIR), which fits
//! near-nullspace mode constraints into the transfer operators the way
//! energy-minimization methods do. It also ships classical Ruge-Stuben
//! components, CFF/FFC Jacobi relaxation, CG/GMRES accelerators, a set of
//! deterministic PDE test-matrix generators, and dense diagnostics for weak
//! and strong approximation properties of the resulting operators.

pub mod analysis;
pub mod error;
pub mod hierarchy;
pub mod io;
pub mod krylov;
pub mod linalg;
pub mod partition;
pub mod problems;
pub mod relaxation;
pub mod rng;
pub mod sparse;
pub mod transfer;

pub use error::{AmgError, Result};
pub use hierarchy::{setup, Hierarchy, Method, SolverConfig};
pub use krylov::{ConvergenceReport, KrylovConfig, KrylovMethod};

pub use sparse::SparseMatrix;
