//! Exponent bookkeeping, isotropic lattice census and Harish-Chandra
//! quadrature for effective counting problems in `SO(p,q)`.

pub mod census;
pub mod error;
pub mod exponents;
pub mod fit;
pub mod harish_chandra;
pub mod lattice;
pub mod lie;
pub mod rational;
pub mod symbolic;

pub use error::{Error, Result};
pub use lattice::{GramLattice, LatticeVector, PositivePlane};
pub use lie::GroupSpec;
pub use rational::Rational;
