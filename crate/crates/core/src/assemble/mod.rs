//! The entire solution `v_j` built from a prism solution.
//!
//! The rotation `A_j` by `-pi/j` about the x-axis maps the fundamental prism
//! (the wedge of half-angle `pi/(2j)` around the +z axis) onto its
//! neighbour, and the `2j` images tile space. On the image of sector `k` the
//! field is the prism solution at the rotated-back point, mirrored in y when
//! `k` is odd. Because the prism solution is odd in y (in its second
//! component) and satisfies natural conditions on the walls, the two
//! definitions on a shared face agree.

mod assembly;
mod check;
mod sectors;
mod vtk;

pub use assembly::{ReflectionAssembly, ZExtension};
pub use check::{check_assembly, AssemblyReport, MidRay, SampleSpec};
pub use sectors::{apply, mat_mul, mat_pow, rotation_matrix, sector_index, transpose, Mat3};
pub use vtk::{export_field3d, SampleBox};
