//! Deformed Schur-measure kernels, Fredholm-determinant tau-functions and
//! numerical checks of the 2D Toda bilinear identities.
//!
//! The crate is organized bottom-up:
//!
//! - [`partitions`]: Young diagrams, half-integers and point configurations.
//! - [`symfun`]: Miwa-time specializations of `h_k`, Schur and skew Schur values.
//! - [`series`]: truncated power/Laurent series, `J_k(t, t')`, `{z}` shifts, DFT
//!   coefficient extraction.
//! - [`kernel`]: the weights `sigma` and finite windows of `K_{t,t',sigma}`.
//! - [`fredholm`]: `tau_n(t, t'; sigma)` in direct and Hankel-conjugated form.
//! - [`measures`]: brute-force enumeration oracles.
//! - [`fock`]: a truncated semi-infinite wedge simulator.
//! - [`hirota`]: residuals of the bilinear Hirota equations.
//!
//! Data-parallel loops go through [`par::Parallelism`]; with the `parallel`
//! feature disabled every loop runs sequentially.

pub mod cjson;
pub mod error;
pub mod fock;
pub mod fredholm;
pub mod hirota;
pub mod kernel;
pub mod linalg;
pub mod measures;
pub mod par;
pub mod partitions;
pub mod series;
pub mod symfun;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use par::Parallelism;
pub use partitions::{HalfInt, Partition};
pub use symfun::ParamSeq;
