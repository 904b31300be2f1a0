use rayon::prelude::*;

use super::field::{clamp_point, Field2D, YBoundary};
use crate::error::{Error, Result};
use crate::grid::SymGrid;
use crate::one_dim::{phi1, MinimizerSet};
use crate::optimize::Objective;
use crate::potential::PotentialSpec;
use crate::scalar::{pairwise_sum, Real};

/// The one-dimensional minimal level `m1` together with the x-grid it was
/// computed on. Slice energies are renormalized only against a level from
/// the identical grid, so that every slice term is nonnegative up to rounding.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenormLevel<T> {
    pub value: T,
    pub grid: SymGrid<T>,
}

impl<T: Real> RenormLevel<T> {
    pub fn new(value: T, grid: SymGrid<T>) -> Self {
        Self { value, grid }
    }

    pub fn of(ms: &MinimizerSet<T>) -> Self {
        Self { value: ms.m1, grid: ms.profiles[0].profile.grid }
    }

    pub fn check(&self, xgrid: &SymGrid<T>) -> Result<()> {
        if self.grid.same_as(xgrid) {
            Ok(())
        } else {
            Err(Error::Grid(format!(
                "m1 was computed on [-{}, {}] with {} nodes, the field uses [-{}, {}] with {} nodes",
                self.grid.extent, self.grid.extent, self.grid.n, xgrid.extent, xgrid.extent, xgrid.n
            )))
        }
    }
}

/// `phi_{2,L}` of an arbitrary field on the full grid: trapezoid rule in `y`
/// of `phi1(v(., y)) - m1`, plus `1/2 int |dv/dy|^2` from edge differences.
pub fn phi2l<T: Real>(p: &PotentialSpec<T>, m1: &RenormLevel<T>, v: &Field2D<T>) -> Result<T> {
    let (kin, slices) = phi2l_parts(p, m1, v)?;
    Ok(kin + slices)
}

/// `(1/2 int |dv/dy|^2, int phi1(v(., y)) - m1 dy)`.
pub fn phi2l_parts<T: Real>(p: &PotentialSpec<T>, m1: &RenormLevel<T>, v: &Field2D<T>) -> Result<(T, T)> {
    m1.check(&v.xgrid)?;
    let ny = v.ny();
    let slices: Vec<T> = (0..ny)
        .into_par_iter()
        .map(|iy| v.ygrid.weight(iy) * (phi1(p, &v.row(iy)) - m1.value))
        .collect();
    Ok((T::half() * dy_norm_sq(v), pairwise_sum(&slices)))
}

/// `int |dv/dy|^2` over the strip.
pub fn dy_norm_sq<T: Real>(v: &Field2D<T>) -> T {
    dy_norm_sq_window(v, 0, v.ny() - 1)
}

fn dy_norm_sq_window<T: Real>(v: &Field2D<T>, j0: usize, j1: usize) -> T {
    let hy = v.ygrid.h();
    let nx = v.nx();
    let terms: Vec<T> = (j0..j1)
        .map(|iy| {
            let mut acc = T::zero();
            for ix in 0..nx {
                let a = v.at(ix, iy);
                let b = v.at(ix, iy + 1);
                acc = acc + v.xgrid.weight(ix) * ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2));
            }
            acc / hy
        })
        .collect();
    pairwise_sum(&terms)
}

/// The renormalized energy restricted to the rows `j0..=j1`: kinetic part
/// from the edges inside the window, slice part with trapezoid weights of
/// the window itself.
pub fn phi2_window<T: Real>(
    p: &PotentialSpec<T>,
    m1: &RenormLevel<T>,
    v: &Field2D<T>,
    j0: usize,
    j1: usize,
) -> Result<T> {
    m1.check(&v.xgrid)?;
    if !(j0 < j1 && j1 < v.ny()) {
        return Err(Error::Argument(format!("bad row window {j0}..={j1}")));
    }
    let hy = v.ygrid.h();
    let slices: Vec<T> = (j0..=j1)
        .map(|iy| {
            let w = if iy == j0 || iy == j1 { T::half() * hy } else { hy };
            w * (phi1(p, &v.row(iy)) - m1.value)
        })
        .collect();
    Ok(T::half() * dy_norm_sq_window(v, j0, j1) + pairwise_sum(&slices))
}

/// Energy and gradient of a symmetric strip field stored on its quarter
/// `x >= 0, y >= 0`. Each quarter row and edge is weighted by the number of
/// mirror images it stands for, so the value equals [`phi2l`] of the
/// expanded field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct QuarterStrip<T> {
    pub nqx: usize,
    pub nqy: usize,
    pub hx: T,
    pub hy: T,
    pub m1: T,
    /// The last row is fixed (Dirichlet) rather than free (Neumann).
    pub fixed_top: bool,
}

impl<T: Real> QuarterStrip<T> {
    pub fn for_field(v: &Field2D<T>, m1: T) -> Self {
        Self {
            nqx: v.nx() - v.xgrid.center(),
            nqy: v.ny() - v.ygrid.center(),
            hx: v.xgrid.h(),
            hy: v.ygrid.h(),
            m1,
            fixed_top: v.boundary == YBoundary::Dirichlet,
        }
    }

    /// Trapezoid weight times mirror multiplicity of quarter column `a`.
    #[inline]
    pub fn cx(&self, a: usize) -> T {
        if a == 0 || a + 1 == self.nqx {
            self.hx
        } else {
            T::two() * self.hx
        }
    }

    #[inline]
    pub fn cy(&self, b: usize) -> T {
        if b == 0 || b + 1 == self.nqy {
            self.hy
        } else {
            T::two() * self.hy
        }
    }

    pub fn len(&self) -> usize {
        2 * self.nqx * self.nqy
    }

    /// Whether quarter entry `k` (interleaved) is an unknown.
    #[inline]
    pub fn is_free(&self, k: usize) -> bool {
        let comp = k % 2;
        let node = k / 2;
        let (a, b) = (node % self.nqx, node / self.nqx);
        !(a + 1 == self.nqx || (a == 0 && comp == 0) || (b == 0 && comp == 1) || (self.fixed_top && b + 1 == self.nqy))
    }

    /// `sum_b cy(b) (sum_a cx(a) W(v) - m1)`: the part of the energy that is
    /// not kinetic.
    pub fn renormalized_potential(&self, p: &PotentialSpec<T>, v: &[T]) -> T {
        let rows: Vec<T> = (0..self.nqy)
            .map(|b| {
                let row = &v[2 * b * self.nqx..2 * (b + 1) * self.nqx];
                let w: Vec<T> = (0..self.nqx).map(|a| self.cx(a) * p.w([row[2 * a], row[2 * a + 1]])).collect();
                self.cy(b) * (pairwise_sum(&w) - self.m1)
            })
            .collect();
        pairwise_sum(&rows)
    }

    /// Returns the energy and writes the gradient (zero on pinned entries).
    pub fn energy_gradient(&self, p: &PotentialSpec<T>, v: &[T], grad: &mut [T]) -> T {
        let nqx = self.nqx;
        let nqy = self.nqy;
        let stride = 2 * nqx;
        let two = T::two();
        let inv_hx = T::one() / self.hx;
        let inv_hy = T::one() / self.hy;
        let rows: Vec<T> = grad
            .par_chunks_mut(stride)
            .enumerate()
            .map(|(b, g)| {
                let row = &v[b * stride..(b + 1) * stride];
                let cy = self.cy(b);
                let mut slice = T::zero();
                let mut ykin = T::zero();
                for a in 0..nqx {
                    let q = [row[2 * a], row[2 * a + 1]];
                    let cx = self.cx(a);
                    slice = slice + cx * p.w(q);
                    let gw = p.grad(q);
                    let mut g0 = cy * cx * gw[0];
                    let mut g1 = cy * cx * gw[1];
                    if a + 1 < nqx {
                        let d0 = row[2 * a + 2] - row[2 * a];
                        let d1 = row[2 * a + 3] - row[2 * a + 1];
                        slice = slice + inv_hx * (d0 * d0 + d1 * d1);
                        g0 = g0 - cy * two * inv_hx * d0;
                        g1 = g1 - cy * two * inv_hx * d1;
                    }
                    if a > 0 {
                        let d0 = row[2 * a] - row[2 * a - 2];
                        let d1 = row[2 * a + 1] - row[2 * a - 1];
                        g0 = g0 + cy * two * inv_hx * d0;
                        g1 = g1 + cy * two * inv_hx * d1;
                    }
                    if b + 1 < nqy {
                        let up = &v[(b + 1) * stride..(b + 2) * stride];
                        let d0 = up[2 * a] - row[2 * a];
                        let d1 = up[2 * a + 1] - row[2 * a + 1];
                        ykin = ykin + inv_hy * cx * (d0 * d0 + d1 * d1);
                        g0 = g0 - two * inv_hy * cx * d0;
                        g1 = g1 - two * inv_hy * cx * d1;
                    }
                    if b > 0 {
                        let dn = &v[(b - 1) * stride..b * stride];
                        let d0 = row[2 * a] - dn[2 * a];
                        let d1 = row[2 * a + 1] - dn[2 * a + 1];
                        g0 = g0 + two * inv_hy * cx * d0;
                        g1 = g1 + two * inv_hy * cx * d1;
                    }
                    g[2 * a] = g0;
                    g[2 * a + 1] = g1;
                }
                for a in 0..nqx {
                    let base = b * stride + 2 * a;
                    if !self.is_free(base) {
                        g[2 * a] = T::zero();
                    }
                    if !self.is_free(base + 1) {
                        g[2 * a + 1] = T::zero();
                    }
                }
                cy * (slice - self.m1) + ykin
            })
            .collect();
        pairwise_sum(&rows)
    }

    /// Discrete Euler-Lagrange residual `-Lap v + grad W(v)` at every free
    /// entry (the gradient divided by the node's quadrature weight).
    pub fn residual_sup(&self, p: &PotentialSpec<T>, v: &[T]) -> T {
        let mut g = vec![T::zero(); self.len()];
        self.energy_gradient(p, v, &mut g);
        let mut worst = T::zero();
        for (k, gk) in g.iter().enumerate() {
            if self.is_free(k) {
                let node = k / 2;
                let w = self.cx(node % self.nqx) * self.cy(node / self.nqx);
                worst = worst.max(gk.abs() / w);
            }
        }
        worst
    }
}

/// The strip energy as a function of the free quarter entries.
pub struct StripObjective<'a, T> {
    pub(crate) potential: &'a PotentialSpec<T>,
    pub(crate) kernel: QuarterStrip<T>,
    free: Vec<usize>,
    base: Vec<T>,
}

impl<'a, T: Real> StripObjective<'a, T> {
    /// Pinned entries (symmetry lines, clamped columns, Dirichlet rows) are
    /// taken from `template`.
    pub fn new(p: &'a PotentialSpec<T>, m1: &RenormLevel<T>, template: &Field2D<T>) -> Result<Self> {
        m1.check(&template.xgrid)?;
        if template.ny() < 3 {
            return Err(Error::Grid("the strip needs at least three rows".into()));
        }
        let kernel = QuarterStrip::for_field(template, m1.value);
        let mut base = template.to_quarter();
        let free: Vec<usize> = (0..kernel.len()).filter(|&k| kernel.is_free(k)).collect();
        for (k, v) in base.iter_mut().enumerate() {
            let node = k / 2;
            if k % 2 == 0 && node % kernel.nqx == 0 || k % 2 == 1 && node < kernel.nqx {
                *v = T::zero();
            }
        }
        Ok(Self { potential: p, kernel, free, base })
    }

    pub fn dim(&self) -> usize {
        self.free.len()
    }

    pub fn pack(&self, v: &Field2D<T>) -> Vec<T> {
        let q = v.to_quarter();
        self.free.iter().map(|&k| q[k]).collect()
    }

    pub fn unpack_quarter(&self, x: &[T]) -> Vec<T> {
        let mut q = self.base.clone();
        for (&k, v) in self.free.iter().zip(x) {
            q[k] = *v;
        }
        q
    }

    pub fn unpack(&self, x: &[T], like: &Field2D<T>) -> Field2D<T> {
        Field2D::from_quarter(like.xgrid, like.ygrid, like.boundary, &self.unpack_quarter(x))
    }

    /// Radial truncation of every node; returns whether anything changed.
    pub fn truncate(&self, x: &mut [T], radius: T) -> bool {
        let mut q = self.unpack_quarter(x);
        let mut changed = false;
        for node in q.chunks_mut(2) {
            let mut pt = [node[0], node[1]];
            if clamp_point(&mut pt, radius) {
                node[0] = pt[0];
                node[1] = pt[1];
                changed = true;
            }
        }
        if changed {
            for (&k, v) in self.free.iter().zip(x.iter_mut()) {
                *v = q[k];
            }
        }
        changed
    }

    pub fn residual_sup(&self, x: &[T]) -> T {
        self.kernel.residual_sup(self.potential, &self.unpack_quarter(x))
    }
}

impl<T: Real> Objective<T> for StripObjective<'_, T> {
    fn value_and_gradient(&self, x: &[T], grad: &mut [T]) -> T {
        let q = self.unpack_quarter(x);
        let mut g = vec![T::zero(); q.len()];
        let e = self.kernel.energy_gradient(self.potential, &q, &mut g);
        for (&k, out) in self.free.iter().zip(grad.iter_mut()) {
            *out = g[k];
        }
        e
    }
}

/// Gradient of [`phi2l`] with respect to the free entries of the quarter
/// parameterization (in the order of [`StripObjective::pack`]).
pub fn grad_phi2l<T: Real>(p: &PotentialSpec<T>, m1: &RenormLevel<T>, v: &Field2D<T>) -> Result<Vec<T>> {
    let obj = StripObjective::new(p, m1, v)?;
    let x = obj.pack(v);
    let mut g = vec![T::zero(); x.len()];
    obj.value_and_gradient(&x, &mut g);
    Ok(g)
}

/// Sup norm of the discrete `-Lap v + grad W(v)` over the free entries.
pub fn el_residual<T: Real>(p: &PotentialSpec<T>, m1: &RenormLevel<T>, v: &Field2D<T>) -> Result<T> {
    let obj = StripObjective::new(p, m1, v)?;
    Ok(obj.residual_sup(&obj.pack(v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::one_dim::Profile1D;
    use crate::optimize::check_gradient;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(p: &PotentialSpec<f64>, seed: u64, bc: YBoundary) -> Field2D<f64> {
        let xg = SymGrid::new(3.0, 31).unwrap();
        let yg = SymGrid::new(1.0, 11).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = Field2D::from_fn(xg, yg, bc, |x: f64, y: f64| [x.tanh(), 0.7 * y.tanh() / x.cosh()]);
        // Perturb the quarter and re-expand so the field stays symmetric.
        let mut q = f.to_quarter();
        q.iter_mut().for_each(|v| *v += rng.gen_range(-0.2..0.2));
        f = Field2D::from_quarter(xg, yg, bc, &q);
        let obj = StripObjective::new(p, &RenormLevel::new(1.0, xg), &f).unwrap();
        let x = obj.pack(&f);
        obj.unpack(&x, &f)
    }

    #[test]
    fn quarter_energy_equals_full_grid_formula() {
        let p = PotentialSpec::<f64>::abg(2.0, 0.3);
        for bc in [YBoundary::Neumann, YBoundary::Dirichlet] {
            let f = random_field(&p, 3, bc);
            let m1 = RenormLevel::new(1.3, f.xgrid);
            let obj = StripObjective::new(&p, &m1, &f).unwrap();
            let x = obj.pack(&f);
            let mut g = vec![0.0; x.len()];
            let e = obj.value_and_gradient(&x, &mut g);
            let full = phi2l(&p, &m1, &f).unwrap();
            assert!((e - full).abs() < 1e-12 * full.abs().max(1.0), "{e} vs {full}");
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let p = PotentialSpec::<f64>::abg(2.0, 0.3);
        for seed in 0..4 {
            for bc in [YBoundary::Neumann, YBoundary::Dirichlet] {
                let f = random_field(&p, seed, bc);
                let obj = StripObjective::new(&p, &RenormLevel::new(2.0, f.xgrid), &f).unwrap();
                let err = check_gradient(&obj, &obj.pack(&f), 1e-5);
                assert!(err < 1e-5, "{err}");
            }
        }
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let p = PotentialSpec::<f64>::abg(2.0, 0.3);
        let f = random_field(&p, 0, YBoundary::Neumann);
        let other = RenormLevel::new(1.0, SymGrid::new(3.0, 61).unwrap());
        assert!(matches!(phi2l(&p, &other, &f), Err(Error::Grid(_))));
    }

    #[test]
    fn y_constant_scalar_field_costs_its_excess_per_unit_width() {
        let p = PotentialSpec::<f64>::abg(2.0, 0.3);
        let xg = SymGrid::new(6.0, 121).unwrap();
        let mut q = Profile1D::reference(xg);
        q.clamp_to_wells(&p);
        let e1 = phi1(&p, &q);
        let yg = SymGrid::new(1.5, 31).unwrap();
        let f = Field2D::constant_in_y(&q, yg, YBoundary::Neumann);
        let m1 = RenormLevel::new(3.0, xg);
        let e = phi2l(&p, &m1, &f).unwrap();
        assert!((e - 3.0 * (e1 - 3.0)).abs() < 1e-12);
    }
}
