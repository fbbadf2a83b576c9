//! Bohr-Sommerfeld quantization matrices, Wilson-Dirac operators on torus
//! lattices, and spectral index counts checked against their topological
//! predictions.
//!
//! The pipeline: [`symbol`] builds matrix-valued functions on
//! `T^n_x x T^n_theta` and computes their Moyal calculus and Chern-character
//! integrals; [`quantizer`] realizes them as operators on `l^2(B_k)`;
//! [`lattice`] and [`wilson`] assemble gauge fields and Wilson-Dirac
//! operators; [`index`] counts positive eigenvalues and compares with the
//! integer predictions; [`linalg`] provides the dense hermitian substrate.

pub mod clifford;
pub mod error;
pub mod index;
pub mod lattice;
pub mod linalg;
pub mod quantizer;
pub mod symbol;
pub mod wilson;

pub use error::{Error, Result};
