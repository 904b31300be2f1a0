use crate::error::{Error, Result};
use crate::scalar::Real;

pub type Mat3<T> = [[T; 3]; 3];

/// Rotation by `-pi / j` in the `(y, z)` plane, fixing the x-axis:
/// rows `[1, 0, 0]`, `[0, cos, sin]`, `[0, -sin, cos]`.
pub fn rotation_matrix<T: Real>(j: usize) -> Result<Mat3<T>> {
    if j < 2 {
        return Err(Error::Argument(format!("symmetry order must be at least 2, got {j}")));
    }
    let a = std::f64::consts::PI / j as f64;
    let (s, c) = (T::lit(a.sin()), T::lit(a.cos()));
    let (o, l) = (T::zero(), T::one());
    Ok([[l, o, o], [o, c, s], [o, -s, c]])
}

pub fn mat_mul<T: Real>(a: &Mat3<T>, b: &Mat3<T>) -> Mat3<T> {
    let mut out = [[T::zero(); 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (k, v) in row.iter_mut().enumerate() {
            *v = (0..3).map(|m| a[i][m] * b[m][k]).sum();
        }
    }
    out
}

pub fn transpose<T: Real>(a: &Mat3<T>) -> Mat3<T> {
    let mut out = *a;
    for (i, row) in out.iter_mut().enumerate() {
        for (k, v) in row.iter_mut().enumerate() {
            *v = a[k][i];
        }
    }
    out
}

pub fn mat_pow<T: Real>(a: &Mat3<T>, n: usize) -> Mat3<T> {
    let (o, l) = (T::zero(), T::one());
    let mut out = [[l, o, o], [o, l, o], [o, o, l]];
    for _ in 0..n {
        out = mat_mul(&out, a);
    }
    out
}

pub fn apply<T: Real>(a: &Mat3<T>, p: [T; 3]) -> [T; 3] {
    [
        a[0][0] * p[0] + a[0][1] * p[1] + a[0][2] * p[2],
        a[1][0] * p[0] + a[1][1] * p[1] + a[1][2] * p[2],
        a[2][0] * p[0] + a[2][1] * p[1] + a[2][2] * p[2],
    ]
}

/// The sector `k` in `0..2j` whose image `A_j^k P` contains `(y, z)`.
///
/// Sector `k` is the wedge of half-angle `pi / (2j)` around the polar angle
/// `pi/2 - k pi / j` (angles measured from the +y axis). Points on a face
/// belong to the smaller of the two adjacent indices; the origin to 0.
pub fn sector_index<T: Real>(y: T, z: T, j: usize) -> usize {
    let two_j = 2 * j as i64;
    if y == T::zero() && z == T::zero() {
        return 0;
    }
    let phi = z.to_f64_lossy().atan2(y.to_f64_lossy());
    let s = (std::f64::consts::FRAC_PI_2 - phi) * j as f64 / std::f64::consts::PI;
    let k = (s + 0.5).floor();
    let idx = if s + 0.5 == k {
        // On the face between sectors k - 1 and k.
        let a = (k as i64 - 1).rem_euclid(two_j);
        let b = (k as i64).rem_euclid(two_j);
        a.min(b)
    } else {
        (k as i64).rem_euclid(two_j)
    };
    idx as usize
}
