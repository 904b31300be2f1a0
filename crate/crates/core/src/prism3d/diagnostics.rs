use super::energy::{phi3, PrismKernel};
use super::field::Field3D;
use super::solve::PrismInputs;
use crate::error::Result;
use crate::fit::exp_decay_fit;
use crate::grid::trapezoid_weight;
use crate::potential::{Point, PotentialSpec};
use crate::scalar::Real;

/// Distances of one z-level to the limiting two-dimensional profiles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SliceDiagnostic<T> {
    pub z: T,
    pub half_width: T,
    /// `L^2` distance to the 2D heteroclinic restricted to the slice.
    pub l2_to_vq: T,
    /// `L^2` distance to the strip minimizer of the same half-width.
    pub l2_to_periodic: T,
    pub sup_to_vq: T,
    /// `phi_{2,L}(u(., ., z)) - m_{2,L}`.
    pub energy_gap: T,
}

impl<T: Real> SliceDiagnostic<T> {
    /// Distance to the nearer of the two reference profiles.
    pub fn distance(&self) -> T {
        self.l2_to_vq.min(self.l2_to_periodic)
    }
}

fn level_distances<T: Real>(u: &Field3D<T>, k: usize, other: &[Point<T>], other_half_rows: usize) -> (T, T) {
    let n = u.half_rows[k];
    let nx = u.nx();
    let hx = u.xgrid.h();
    let mut l2 = T::zero();
    let mut sup = T::zero();
    for r in 0..2 * n + 1 {
        let ro = r + other_half_rows - n;
        let wy = if n == 0 { T::one() } else { trapezoid_weight(r, 2 * n + 1, u.hy) };
        for ix in 0..nx {
            let a = u.levels[k][r * nx + ix];
            let b = other[ro * nx + ix];
            let d = (a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]);
            l2 = l2 + wy * trapezoid_weight(ix, nx, hx) * d;
            sup = sup.max(d.sqrt());
        }
    }
    (l2.sqrt(), sup)
}

/// Slice-by-slice comparison of a prism field with the 2D heteroclinic and
/// the strip minimizers (apex levels are skipped).
pub fn slice_diagnostics<T: Real>(
    p: &PotentialSpec<T>,
    inputs: &PrismInputs<T>,
    u: &Field3D<T>,
) -> Result<Vec<SliceDiagnostic<T>>> {
    let kernel = PrismKernel::new(&inputs.m1, &inputs.table, u)?;
    let v = u.to_quarter();
    let vq_rows = inputs.vq.ygrid.center();
    let mut out = Vec::new();
    for k in 0..u.nz() {
        let n = u.half_rows[k];
        if n == 0 {
            continue;
        }
        let (l2_to_vq, sup_to_vq) = level_distances(u, k, &inputs.vq.values, vq_rows);
        let periodic = &inputs.table.solutions[n - 1].field;
        let (l2_to_periodic, _) = level_distances(u, k, &periodic.values, n);
        let (slice, _) = kernel.slice_parts(p, &v, k);
        out.push(SliceDiagnostic {
            z: u.z(k),
            half_width: u.half_width(k),
            l2_to_vq,
            l2_to_periodic,
            sup_to_vq,
            energy_gap: slice - kernel.renorm[k],
        });
    }
    Ok(out)
}

/// Decay of `max_{y,z} |u(x, y, z) - a+|` along the columns between `0.6 X`
/// and `0.8 X`.
#[derive(Clone, Debug, PartialEq)]
pub struct FarField<T> {
    pub xs: Vec<T>,
    pub maxima: Vec<T>,
    pub rate: T,
    pub r2: T,
    /// The maxima never increase with x.
    pub monotone: bool,
    /// The columns `x = +-X` hold the wells exactly.
    pub clamp_exact: bool,
}

pub fn check_far_field<T: Real>(p: &PotentialSpec<T>, u: &Field3D<T>) -> Result<FarField<T>> {
    let nx = u.nx();
    let x_max = u.xgrid.extent;
    let plus = p.a_plus();
    let (lo, hi) = (T::lit(0.6) * x_max, T::lit(0.8) * x_max);
    let tol = T::lit(1e-9) * u.xgrid.h();
    let mut xs = Vec::new();
    let mut maxima = Vec::new();
    for ix in u.xgrid.center()..nx {
        let x = u.xgrid.x(ix);
        if x < lo - tol || x > hi + tol {
            continue;
        }
        let m = u
            .levels
            .iter()
            .flat_map(|l| l.chunks(nx).map(move |row| row[ix]))
            .map(|v| ((v[0] - plus[0]) * (v[0] - plus[0]) + (v[1] - plus[1]) * (v[1] - plus[1])).sqrt())
            .fold(T::zero(), T::max);
        xs.push(x);
        maxima.push(m);
    }
    let fit = exp_decay_fit(&xs, &maxima)?;
    Ok(FarField {
        monotone: maxima.windows(2).all(|w| w[1] <= w[0]),
        clamp_exact: u.is_clamped(p),
        rate: fit.rate,
        r2: fit.r2,
        xs,
        maxima,
    })
}

/// Both sides of `||grad u||^2_{L^2(T_r)} <= 2 (phi3(u) + r m2 + tan(theta) r^2 m1)`
/// on the truncated prism `T_r = {z <= r}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradientBound<T> {
    pub r: T,
    pub lhs: T,
    pub rhs: T,
}

impl<T: Real> GradientBound<T> {
    pub fn holds(&self, tol: T) -> bool {
        self.lhs <= self.rhs + tol
    }
}

pub fn gradient_bound<T: Real>(
    p: &PotentialSpec<T>,
    inputs: &PrismInputs<T>,
    u: &Field3D<T>,
    r: T,
) -> Result<GradientBound<T>> {
    let kernel = PrismKernel::new(&inputs.m1, &inputs.table, u)?;
    let v = u.to_quarter();
    let top = (0..u.nz()).take_while(|&k| u.z(k) <= r + T::lit(1e-12) * u.hz).last().unwrap_or(0);
    let mut kinetic = T::zero();
    for k in 0..=top {
        let w = if top == 0 { T::zero() } else { trapezoid_weight(k, top + 1, u.hz) };
        kinetic = kinetic + w * kernel.slice_parts(p, &v, k).1;
        if k < top {
            kinetic = kinetic + kernel.z_kinetic(&v, k);
        }
    }
    let phi = phi3(p, &inputs.m1, &inputs.table, u)?;
    let rhs = T::two() * (phi + r * inputs.table.m2() + u.theta.tan() * r * r * inputs.m1.value);
    Ok(GradientBound { r, lhs: T::two() * kinetic, rhs })
}
