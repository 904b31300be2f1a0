//! Layered solutions of the vector Allen-Cahn system `-Lap u + grad W(u) = 0`
//! for symmetric double-well potentials `W : R^2 -> R`.
//!
//! The crate builds the solutions dimension by dimension:
//!
//! * [`one_dim`]: minimal heteroclinic connections between the wells, their
//!   spectral non-degeneracy and tail decay;
//! * [`strip2d`]: minimizers on Neumann strips of half-width `L`, the table
//!   `L -> m_{2,L}` and the two-dimensional heteroclinic between `q` and `q-bar`;
//! * [`prism3d`]: the doubly renormalized minimizer on a truncated prism;
//! * [`assemble`]: the entire solution obtained by reflecting the prism
//!   solution across its faces.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix `f64`, which is what the pipeline uses.

// Negated float comparisons (`!(x > 0.0)`) are used on purpose: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assemble;
pub mod error;
pub mod fit;
pub mod grid;
pub mod one_dim;
pub mod optimize;
pub mod potential;
pub mod prism3d;
pub mod scalar;
pub mod strip2d;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Potential = potential::PotentialSpec<f64>;
pub type WellConstants = potential::WellConstants<f64>;
pub type MinimizeOptions = optimize::MinimizeOptions<f64>;
pub type Profile = one_dim::Profile1D<f64>;
pub type MinimizerSet = one_dim::MinimizerSet<f64>;
pub type Field2 = strip2d::Field2D<f64>;
pub type M2LTable = strip2d::M2LTable<f64>;
pub type Field3 = prism3d::Field3D<f64>;
pub type Assembly = assemble::ReflectionAssembly<f64>;
