//! Exact p-adic engine for trace-to-eigenvalue transfer and congruences
//! between Hecke eigencharacters.

pub mod campaign;
pub mod characters;
pub mod congruence;
pub mod error;
pub mod exec;
pub mod hecke;
pub mod linalg;
pub mod padic;
pub mod slope;
pub mod symplectic;
pub mod transfer;
pub mod weights;

pub use error::{Error, Result};
