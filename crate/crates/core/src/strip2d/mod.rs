//! Two-dimensional layers: minimizers on Neumann strips `R x (-L, L)` and
//! the heteroclinic-type solution connecting `q-bar` to `q` in `y`.
//!
//! Fields carry the symmetries `v(-x, y) = (-v1, v2)(x, y)` and
//! `v(x, -y) = (v1, -v2)(x, y)`. The solvers work on the quarter `x, y >= 0`
//! with `v1 = 0` on `x = 0` and `v2 = 0` on `y = 0`, so every iterate is
//! exactly symmetric.
//!
//! Energies are renormalized by the discrete `m1` of the same x-grid; see
//! [`RenormLevel`].

mod decay;
mod energy;
mod field;
mod solve;
mod table;

pub use decay::{check_2d_decay, SliceDecay};
pub use energy::{dy_norm_sq, el_residual, grad_phi2l, phi2_window, phi2l, phi2l_parts, RenormLevel, StripObjective};
pub(crate) use energy::QuarterStrip;
pub(crate) use field::clamp_point;
pub use field::{truncate_r, Field2D, YBoundary};
pub use solve::{relax_strip, solve_hetero2d, solve_pl2, StripOptions, StripSolution};
pub use table::{extrapolate_m2, m2l_table, GapFit, M2LTable};
