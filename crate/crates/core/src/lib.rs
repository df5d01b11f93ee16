//! Dense tensor networks for one- and two-dimensional spin models.
//!
//! The crate is organised bottom-up: [`tensor`] holds the value type and the
//! primitive operations, [`decomp`] the matrix factorisations, and the
//! remaining modules build matrix product states and operators, exact
//! diagonalization, TEBD and TRG on top of them. [`oracle`] collects slow
//! reference implementations used to cross-check the fast paths.

pub mod decomp;
pub mod ed;
pub mod error;
pub mod mpo;
pub mod mps;
pub mod ops;
pub mod oracle;
pub mod random;
pub mod tebd;
pub mod tensor;
pub mod trg;

pub type C64 = num_complex::Complex64;

pub use decomp::{SvdResult, TruncationSpec};
pub use error::{Error, Result};
pub use mpo::{Model, Mpo};
pub use mps::{Mps, SweepDirection};
pub use tensor::DenseTensor;
