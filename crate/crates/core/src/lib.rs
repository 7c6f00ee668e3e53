//! Equivariant noncommutative index theory on finite and truncated models.

pub mod algebra;
pub mod assembly;
pub mod chern;
pub mod cocycle;
pub mod error;
pub mod forms;
pub mod identities;
pub mod jlo;
pub mod localization;
pub mod manifold;
pub mod scalar;
pub mod spectral;
pub mod ta;
pub mod xcomplex;

pub use error::{Error, Result};
