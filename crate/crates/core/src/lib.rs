//! Normal ideals in totally definite quaternion algebras over `Q` and real
//! quadratic fields, and the genera of quaternary quadratic lattices they
//! describe.

pub mod classes;
pub mod enumeration;
pub mod error;
pub mod field;
pub mod genus;
pub mod lattice;
pub mod linalg;
pub mod quat;

pub use error::{Error, Result};
