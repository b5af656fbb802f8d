//! Operator renewal sequences for intermittent interval maps, scalar renewal
//! asymptotics and numerical Tauberian tools.
//!
//! The induced operator is discretized by Ulam's method on a uniform grid of
//! `Y = [1/2, 1]`; partial sums of `T_n = 1_Y L^n 1_Y` come from the renewal
//! equation `T_n = Σ_j T_{n−j} R_j`.

pub mod cli;
pub mod error;
pub mod fit;
pub mod grid;
pub mod induced;
pub mod linalg;
pub mod maps;
pub mod quadrature;
pub mod scalar_renewal;
pub mod special_fn;
pub mod tauberian;

pub use error::{Error, Result};
