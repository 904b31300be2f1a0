use super::sectors::{apply, mat_pow, rotation_matrix, sector_index, transpose, Mat3};
use crate::error::{Error, Result};
use crate::one_dim::Profile1D;
use crate::potential::{Point, PotentialSpec};
use crate::prism3d::Field3D;
use crate::scalar::Real;

/// How queries above the top level `z = Z` are answered.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZExtension {
    Error,
    /// Reuse the top slice (with its half-width) for every `z > Z`.
    ClampSlice,
}

/// The entire field `v_j` obtained from a prism solution by rotations and
/// reflections across the sector faces.
#[derive(Clone, Debug)]
pub struct ReflectionAssembly<T> {
    pub j: usize,
    pub rotation: Mat3<T>,
    /// `A_j^{-k}` for `k = 0..2j`.
    inverse_powers: Vec<Mat3<T>>,
    pub field: Field3D<T>,
    pub q: Profile1D<T>,
    pub q_bar: Profile1D<T>,
    pub a_plus: Point<T>,
    pub extension: ZExtension,
}

/// Splits `r >= 0` into a cell index and a fraction, snapping to the node
/// when `r` is within rounding of an integer.
#[inline]
fn cell<T: Real>(r: T) -> (usize, T) {
    let n = r.round();
    if (r - n).abs() <= T::lit(1e-9) {
        (n.to_usize().unwrap_or(0), T::zero())
    } else {
        let f = r.floor();
        (f.to_usize().unwrap_or(0), r - f)
    }
}

impl<T: Real> ReflectionAssembly<T> {
    pub fn new(p: &PotentialSpec<T>, field: Field3D<T>, q: Profile1D<T>) -> Result<Self> {
        if !q.grid.same_as(&field.xgrid) {
            return Err(Error::Grid("profile and prism x-grids differ".into()));
        }
        let j = field.j;
        let rotation = rotation_matrix(j)?;
        let inv = transpose(&rotation);
        let inverse_powers = (0..2 * j).map(|k| mat_pow(&inv, k)).collect();
        let q_bar = q.bar();
        Ok(Self { j, rotation, inverse_powers, field, q, q_bar, a_plus: p.a_plus(), extension: ZExtension::Error })
    }

    pub fn with_extension(mut self, extension: ZExtension) -> Self {
        self.extension = extension;
        self
    }

    pub fn z_extent(&self) -> T {
        self.field.z_extent()
    }

    pub fn x_extent(&self) -> T {
        self.field.xgrid.extent
    }

    /// Bilinear value of level `k` at `x, y >= 0`, continued constantly in y
    /// beyond the level's wall.
    fn level_value(&self, k: usize, ix: usize, sx: T, ay: T) -> Point<T> {
        let u = &self.field;
        let n = u.half_rows[k];
        let row = |iy: usize| {
            let a = u.at(k, ix, iy as isize);
            if sx == T::zero() {
                a
            } else {
                let b = u.at(k, ix + 1, iy as isize);
                [a[0] + sx * (b[0] - a[0]), a[1] + sx * (b[1] - a[1])]
            }
        };
        if n == 0 {
            return row(0);
        }
        let (iy, sy) = cell((ay / u.hy).min(T::from_usize_lossy(n)));
        if iy >= n || sy == T::zero() {
            return row(iy.min(n));
        }
        let (a, b) = (row(iy), row(iy + 1));
        [a[0] + sy * (b[0] - a[0]), a[1] + sy * (b[1] - a[1])]
    }

    /// Trilinear interpolation of the prism field at a point of the prism,
    /// using the slice symmetries for `x < 0` and `y < 0`.
    pub fn prism_value(&self, x: T, y: T, z: T) -> Result<Point<T>> {
        let u = &self.field;
        let z_top = u.z_extent();
        let z = if z > z_top {
            match self.extension {
                ZExtension::ClampSlice => z_top,
                ZExtension::Error => {
                    return Err(Error::Extension(format!("z = {z} lies above the prism top {z_top}")));
                }
            }
        } else {
            z.max(T::zero())
        };
        let (sgx, sgy) = (if x < T::zero() { -T::one() } else { T::one() }, if y < T::zero() { -T::one() } else { T::one() });
        let (ax, ay) = (x.abs(), y.abs());
        let c = u.xgrid.center();
        let last = u.nx() - 1;
        let (cx, sx) = cell(ax / u.xgrid.h());
        let ix = c + cx;
        let v = if ix >= last {
            self.a_plus
        } else {
            let (kz, tz) = cell(z / u.hz);
            let kz = kz.min(u.nz() - 1);
            let lo = self.level_value(kz, ix, sx, ay);
            if tz == T::zero() || kz + 1 >= u.nz() {
                lo
            } else {
                let hi = self.level_value(kz + 1, ix, sx, ay);
                [lo[0] + tz * (hi[0] - lo[0]), lo[1] + tz * (hi[1] - lo[1])]
            }
        };
        Ok([sgx * v[0], sgy * v[1]])
    }

    /// `v_j` evaluated through the prism of sector `k`: the point is rotated
    /// back into the fundamental prism, mirrored in y for odd `k`.
    pub fn evaluate_in_sector(&self, k: usize, x: T, y: T, z: T) -> Result<Point<T>> {
        let p = apply(&self.inverse_powers[k % (2 * self.j)], [x, y, z]);
        let py = if k % 2 == 1 { -p[1] } else { p[1] };
        self.prism_value(p[0], py, p[2])
    }

    pub fn evaluate(&self, x: T, y: T, z: T) -> Result<Point<T>> {
        self.evaluate_in_sector(sector_index(y, z, self.j), x, y, z)
    }

    /// `v_j` in cylindrical coordinates `y = rho cos(phi)`, `z = rho sin(phi)`.
    pub fn evaluate_polar(&self, x: T, rho: T, phi: T) -> Result<Point<T>> {
        self.evaluate(x, rho * phi.cos(), rho * phi.sin())
    }

    /// A bound on the trilinear interpolation error, `max |D^2 u| h^2 / 8`
    /// per axis, estimated from second differences of the prism field.
    pub fn interpolation_error(&self) -> T {
        let u = &self.field;
        let nx = u.nx();
        let mut worst = T::zero();
        let mut bump = |a: Point<T>, b: Point<T>, c: Point<T>| {
            let d0 = a[0] - T::two() * b[0] + c[0];
            let d1 = a[1] - T::two() * b[1] + c[1];
            worst = worst.max((d0 * d0 + d1 * d1).sqrt());
        };
        for k in 0..u.nz() {
            let n = u.half_rows[k] as isize;
            for iy in -n..=n {
                for ix in 1..nx - 1 {
                    bump(u.at(k, ix - 1, iy), u.at(k, ix, iy), u.at(k, ix + 1, iy));
                    if iy.abs() < n {
                        bump(u.at(k, ix, iy - 1), u.at(k, ix, iy), u.at(k, ix, iy + 1));
                    }
                    if k > 0 && k + 1 < u.nz() && iy.unsigned_abs() <= u.half_rows[k - 1] {
                        bump(u.at(k - 1, ix, iy), u.at(k, ix, iy), u.at(k + 1, ix, iy));
                    }
                }
            }
        }
        worst / T::lit(8.0)
    }
}
