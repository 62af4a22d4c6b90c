//! Exact spanning-tree counts for the q-analog of the n-cube.
//!
//! The graph `C_q(n)` has the subspaces of `F_q^n` as vertices, with an edge
//! between two subspaces when one contains the other and their dimensions
//! differ by one. This crate computes its spanning-tree count as a factored
//! product of polynomials in `q`, exhibits the coefficient positivity of
//! those polynomials through signed sets, block diagonalizes the commutant
//! of the `GL(n, F_q)` action, and checks everything against brute-force
//! oracles built from explicit subspace enumeration over prime fields.

pub mod commutant;
pub mod error;
pub mod exec;
pub mod linalg;
pub mod oracle;
pub mod qpoly;
pub mod signedsets;
pub mod spectral;
pub mod treecount;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Exec;
pub use qpoly::{qbinom, qint, QPoly};
pub use treecount::{complexity_factored, f_poly, FactoredExpr};
