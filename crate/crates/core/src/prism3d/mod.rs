//! The doubly renormalized problem on the truncated prism
//! `P = {0 <= z <= Z, |y| <= z tan(theta)}`, `theta = pi / (2 j)`.
//!
//! Every z-slice is a strip of half-width `z tan(theta)`, so its energy is
//! renormalized by the strip minimum `m_{2,L}` of that width; `phi3`
//! integrates the renormalized slice energies and the z-kinetic energy. The
//! walls carry natural boundary conditions, the columns `x = +-X` the wells,
//! and the top level is fixed to the 2D heteroclinic (or left free).
//!
//! The slanted walls are resolved as a staircase: level `k` holds the rows
//! `|y| <= n_k hy` with `n_k hy <= z_k tan(theta)`, and consecutive levels
//! are coupled on the rows they share. The strip table used for
//! renormalization is computed at exactly the half-widths `n hy`, on the
//! same grid, so that every slice is compared with its own discrete minimum.

mod diagnostics;
mod energy;
mod field;
mod solve;

pub use diagnostics::{check_far_field, gradient_bound, slice_diagnostics, FarField, GradientBound, SliceDiagnostic};
pub use energy::{grad_phi3, phi3, PrismObjective};
pub use field::{CapCondition, Field3D, PrismGrid};
pub use solve::{prepare_prism_inputs, prepare_prism_inputs_for, solve_prism, PrismInputs, PrismOptions, PrismSolution};
