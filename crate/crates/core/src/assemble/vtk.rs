use std::io::Write;

use super::assembly::ReflectionAssembly;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Axis-aligned box `[lo, hi]` sampled with `resolution` points per axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleBox<T> {
    pub lo: [T; 3],
    pub hi: [T; 3],
    pub resolution: [usize; 3],
}

impl<T: Real> SampleBox<T> {
    /// The largest box `[-X, X] x [-s, s]^2` whose points all lie within
    /// distance `Z` of the x-axis, so that every query stays below the top.
    pub fn covering(asm: &ReflectionAssembly<T>, resolution: usize) -> Self {
        let s = asm.z_extent() / T::two().sqrt();
        let x = asm.x_extent();
        Self { lo: [-x, -s, -s], hi: [x, s, s], resolution: [resolution; 3] }
    }

    fn spacing(&self, axis: usize) -> T {
        let n = self.resolution[axis];
        if n > 1 {
            (self.hi[axis] - self.lo[axis]) / T::from_usize_lossy(n - 1)
        } else {
            T::one()
        }
    }
}

/// Writes `v_j` on a box as a legacy VTK structured-points file with the
/// scalar fields `v1`, `v2` and `dist_a_plus = |v - a+|`.
pub fn export_field3d<T: Real, W: Write>(asm: &ReflectionAssembly<T>, bx: &SampleBox<T>, out: &mut W) -> Result<()> {
    if bx.resolution.contains(&0) {
        return Err(Error::Argument("resolution must be positive on every axis".into()));
    }
    let [nx, ny, nz] = bx.resolution;
    let h = [bx.spacing(0), bx.spacing(1), bx.spacing(2)];
    let mut values = Vec::with_capacity(nx * ny * nz);
    // VTK orders points with x varying fastest.
    for iz in 0..nz {
        let z = bx.lo[2] + T::from_usize_lossy(iz) * h[2];
        for iy in 0..ny {
            let y = bx.lo[1] + T::from_usize_lossy(iy) * h[1];
            for ix in 0..nx {
                let x = bx.lo[0] + T::from_usize_lossy(ix) * h[0];
                values.push(asm.evaluate(x, y, z)?);
            }
        }
    }
    let io = Error::Io;
    writeln!(out, "# vtk DataFile Version 3.0").map_err(io)?;
    writeln!(out, "layered solution v_j, j = {}", asm.j).map_err(io)?;
    writeln!(out, "ASCII").map_err(io)?;
    writeln!(out, "DATASET STRUCTURED_POINTS").map_err(io)?;
    writeln!(out, "DIMENSIONS {nx} {ny} {nz}").map_err(io)?;
    let f = |v: T| format!("{:.9e}", v.to_f64_lossy());
    writeln!(out, "ORIGIN {} {} {}", f(bx.lo[0]), f(bx.lo[1]), f(bx.lo[2])).map_err(io)?;
    writeln!(out, "SPACING {} {} {}", f(h[0]), f(h[1]), f(h[2])).map_err(io)?;
    writeln!(out, "POINT_DATA {}", values.len()).map_err(io)?;
    let a = asm.a_plus;
    let fields: [(&str, Box<dyn Fn(&[T; 2]) -> T>); 3] = [
        ("v1", Box::new(|v| v[0])),
        ("v2", Box::new(|v| v[1])),
        ("dist_a_plus", Box::new(move |v| ((v[0] - a[0]) * (v[0] - a[0]) + (v[1] - a[1]) * (v[1] - a[1])).sqrt())),
    ];
    for (name, g) in fields.iter() {
        writeln!(out, "SCALARS {name} double 1").map_err(io)?;
        writeln!(out, "LOOKUP_TABLE default").map_err(io)?;
        for v in &values {
            writeln!(out, "{}", f(g(v))).map_err(io)?;
        }
    }
    Ok(())
}
